"""Command-line interface: run, sweep, report, stub-check."""

from __future__ import annotations

import sys

import click
import yaml

from .config import SearchConfig
from .conformance import run_game24_check, run_scripted_check
from .envs.game24 import Game24Env, Game24State
from .envs.synthetic import SyntheticEnv, SyntheticTreeMDP
from .harness import (BUDGET_PRESETS, BudgetPoint, SweepSpec,
                      format_summary_table, report, run_sweep, summarize)
from .search import decode_episode, run_search

ENDPOINT_ENVVAR = "RESCALE_ENDPOINT"


@click.group()
def main() -> None:
    """Tree-search decoding benchmark harness."""


def _budget_from_flags(env: str, budget: str | None, sims, width, top_m, depth) -> BudgetPoint:
    if budget:
        point = BUDGET_PRESETS[env][budget]
    else:
        point = BUDGET_PRESETS[env]["medium"]
    label = budget or ("custom" if any(x is not None for x in (sims, width, top_m, depth))
                       else point.label)
    return BudgetPoint(
        label=label,
        sims=sims if sims is not None else point.sims,
        width=width if width is not None else point.width,
        top_m=top_m if top_m is not None else point.top_m,
        depth=depth if depth is not None else point.depth,
    )


def _method_token(method: str, no_gumbel: bool, no_halving: bool) -> str:
    if method == "rescale" and no_gumbel:
        return "rescale-no-gumbel"
    if method == "rescale" and no_halving:
        return "rescale-no-halving"
    return method


@main.command()
@click.option("--env", "env_name", type=click.Choice(["game24", "synthetic"]),
              default="game24", show_default=True)
@click.option("--problem", default="6 6 6 6", show_default=True,
              help="game24: four numbers; synthetic: generation seed")
@click.option("--method", type=click.Choice(["rescale", "alphazero"]),
              default="rescale", show_default=True)
@click.option("--budget", type=click.Choice(["small", "medium", "large", "ablation"]),
              default=None)
@click.option("--sims", "-N", type=int, default=None)
@click.option("--width", "-w", type=int, default=None)
@click.option("--top-m", "-M", type=int, default=None)
@click.option("--depth", "-d", type=int, default=None)
@click.option("--evaluator", default="oracle", show_default=True,
              help="oracle | noisy:SIGMA | remote:URL")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--no-gumbel", is_flag=True, help="ablation: zero the Gumbel draws")
@click.option("--no-halving", is_flag=True, help="ablation: PUCT at the root")
@click.option("--dump-tree", is_flag=True, help="print the final search tree")
def run(env_name, problem, method, budget, sims, width, top_m, depth,
        evaluator, seed, no_gumbel, no_halving, dump_tree) -> None:
    """Decode one problem and print the trajectory plus root diagnostics."""
    from .harness import _build_evaluator  # late import: flag parsing first

    point = _budget_from_flags(env_name, budget, sims, width, top_m, depth)
    if env_name == "game24":
        env = Game24Env()
        state = Game24State(int(tok) for tok in problem.split())
    else:
        mdp = SyntheticTreeMDP(8, point.depth, seed=(int(problem.split()[0]), 0))
        env = SyntheticEnv(mdp)
        state = env.root_state

    spec = SweepSpec(methods=["rescale"], budgets=[point], seeds=[seed],
                     env=env_name, evaluator=evaluator,
                     problems={"instances": [[1, 1, 1, 1]]} if env_name == "game24" else {})
    ev = _build_evaluator(spec, env, seed)
    config = SearchConfig(
        num_simulations=point.sims, expansion_width=point.width,
        root_top_m=min(point.top_m, point.width), max_depth=point.depth,
        algorithm=method, gumbel_enabled=not no_gumbel,
        sequential_halving_enabled=not no_halving, rng_seed=seed)

    if dump_tree:
        result = run_search(state, config, ev, env, keep_tree=True)
        click.echo(f"chosen action: {result.chosen_action}")
        click.echo("root children (action, prior, visits, mean, score):")
        for s in result.root_child_stats:
            click.echo(f"  {s.action!r:<42} p={s.prior:.3f} N={s.visit_count:>3} "
                       f"v={s.mean_value:.3f} score={s.root_score:.3f}")
        click.echo("tree dump:")
        click.echo(result.tree.dump(), nl=False)
        return

    traj = decode_episode(state, config, ev, env)
    for i, action in enumerate(traj.actions):
        click.echo(f"step {i + 1}: {action}")
    click.echo(f"final state: {traj.final_state_text}")
    click.echo(f"reward: {traj.reward}")
    click.echo(f"cost: propose={traj.cost.propose_calls} "
               f"value={traj.cost.value_calls} chars={traj.cost.action_chars}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML sweep spec; every flag below overrides its key")
@click.option("--method", "methods", multiple=True,
              help="rescale | alphazero | best-of-n (repeatable)")
@click.option("--budget", "budgets", multiple=True,
              help="small | medium | large | ablation (repeatable)")
@click.option("--sims", "-N", type=int, default=None)
@click.option("--width", "-w", type=int, default=None)
@click.option("--top-m", "-M", type=int, default=None)
@click.option("--depth", "-d", type=int, default=None)
@click.option("--env", "env_name", type=click.Choice(["game24", "synthetic"]), default=None)
@click.option("--evaluator", default=None, help="oracle | noisy:SIGMA | remote:URL")
@click.option("--seeds", default=None, help="comma-separated, e.g. 0,1,2")
@click.option("--problems", "problem_source", default=None,
              help="game24: fixture path; synthetic: problem count")
@click.option("--score-mode", type=click.Choice(["episode", "root"]), default=None)
@click.option("--out", "out_path", default=None)
@click.option("--workers", "-K", type=int, default=None)
@click.option("--no-gumbel", is_flag=True)
@click.option("--no-halving", is_flag=True)
def sweep(config_path, methods, budgets, sims, width, top_m, depth, env_name,
          evaluator, seeds, problem_source, score_mode, out_path, workers,
          no_gumbel, no_halving) -> None:
    """Run a benchmark grid and write one CSV row per (method, budget, seed, problem)."""
    raw = {}
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}

    env_value = env_name or raw.get("env", "synthetic")
    method_list = [(m if isinstance(m, str) else str(m))
                   for m in (methods or raw.get("methods", ["rescale"]))]
    method_list = [_method_token(m, no_gumbel, no_halving) for m in method_list]

    budget_entries = list(budgets) or raw.get("budgets", ["medium"])
    points = []
    for entry in budget_entries:
        if isinstance(entry, str):
            point = BUDGET_PRESETS[env_value][entry]
        else:
            point = BudgetPoint(entry["label"], int(entry["sims"]), int(entry["width"]),
                                int(entry["top_m"]), int(entry["depth"]))
        points.append(BudgetPoint(
            label=point.label,
            sims=sims if sims is not None else point.sims,
            width=width if width is not None else point.width,
            top_m=top_m if top_m is not None else point.top_m,
            depth=depth if depth is not None else point.depth))

    seed_list = ([int(s) for s in seeds.split(",")] if seeds
                 else [int(s) for s in raw.get("seeds", [0])])

    problems = dict(raw.get("problems", {}))
    if problem_source:
        if env_value == "game24":
            problems["fixture"] = problem_source
        else:
            problems["count"] = int(problem_source)

    spec = SweepSpec(
        methods=method_list,
        budgets=points,
        seeds=seed_list,
        env=env_value,
        env_params=dict(raw.get("env_params", {})),
        evaluator=evaluator or raw.get("evaluator", "oracle"),
        problems=problems,
        score_mode=score_mode or raw.get("score_mode", "episode"),
        out_path=out_path or raw.get("out", "sweep.csv"),
        workers=workers if workers is not None else int(raw.get("workers", 1)),
    )
    records = run_sweep(spec)
    click.echo(f"wrote {len(records)} rows to {spec.out_path}")
    rows = [{"method": r.method, "budget_label": r.budget_label, "N": r.N,
             "seed": r.seed, "problem_id": r.problem_id, "correct": r.correct,
             "propose_calls": r.propose_calls, "value_calls": r.value_calls,
             "action_chars": r.action_chars,
             "max_root_visit_fraction": r.max_root_visit_fraction,
             "error": r.error} for r in records]
    click.echo(format_summary_table(summarize(rows)))
    errors = sum(1 for r in records if r.error)
    if errors:
        click.echo(f"warning: {errors} runs failed (see the error column)", err=True)


@main.command("report")
@click.argument("csv_path", type=click.Path(exists=True))
@click.option("--plot-out", default=None,
              help="plot-data CSV path (default: <csv>.plot.csv)")
def report_cmd(csv_path, plot_out) -> None:
    """Aggregate a sweep CSV: accuracy mean±std per method and budget."""
    plot_path = plot_out or f"{csv_path}.plot.csv"
    summaries = report(csv_path, plot_path)
    click.echo(format_summary_table(summaries))
    click.echo(f"plot data written to {plot_path}")


@main.command("stub-check")
@click.option("--endpoint", envvar=ENDPOINT_ENVVAR, required=True,
              help=f"server base URL (or ${ENDPOINT_ENVVAR})")
@click.option("--mode", type=click.Choice(["scripted", "game24"]), default="scripted",
              show_default=True)
@click.option("--fixture", "fixture_path", type=click.Path(exists=True), default=None,
              help="exchange fixture JSON (scripted mode)")
def stub_check(endpoint, mode, fixture_path) -> None:
    """Check a remote evaluator endpoint for protocol conformance."""
    if mode == "scripted":
        if not fixture_path:
            raise click.UsageError("scripted mode requires --fixture")
        results = run_scripted_check(endpoint, fixture_path)
    else:
        results = run_game24_check(endpoint)
    failed = 0
    for r in results:
        status = "ok" if r.ok else "FAIL"
        suffix = f" ({r.detail})" if r.detail else ""
        click.echo(f"[{status}] {r.name}{suffix}")
        failed += not r.ok
    if failed:
        click.echo(f"{failed}/{len(results)} checks failed", err=True)
        sys.exit(1)
    click.echo(f"all {len(results)} checks passed")


if __name__ == "__main__":
    main()
