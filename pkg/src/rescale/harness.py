"""Benchmark harness: budget sweeps, Best-of-N baseline, CSV reports.

A sweep is a grid of (method, budget, seed, problem). Every grid point is
reproducible on its own: per-run RNG streams are derived from (seed,
problem) counters, rows are emitted in grid order regardless of worker
scheduling, and the CSV is written atomically. Reruns of the same spec are
byte-identical except for the wall_ms column.
"""

from __future__ import annotations

import csv
import math
import os
import statistics
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import ALPHAZERO, RESCALE, CostCounter, SearchConfig
from .envs.base import Environment
from .envs.game24 import Game24Env, Game24State, game24_solvable, load_fixture
from .envs.synthetic import SyntheticEnv, SyntheticTreeMDP
from .evaluators import (CountingEvaluator, Evaluator, EvaluatorError,
                         NoisyOracleEvaluator, OracleEvaluator, RemoteEvaluator)
from .rng import derive_rng
from .search import SearchAbortedError, decode_episode, run_search

METHODS = ("rescale", "rescale-no-gumbel", "rescale-no-halving",
           "alphazero", "best-of-n")

CSV_COLUMNS = ["method", "budget_label", "N", "w", "M", "d", "seed",
               "problem_id", "correct", "sims", "nodes_expanded",
               "propose_calls", "value_calls", "action_chars", "wall_ms",
               "max_root_visit_fraction", "error"]


@dataclass(frozen=True)
class BudgetPoint:
    label: str
    sims: int
    width: int
    top_m: int
    depth: int


BUDGET_PRESETS: dict[str, dict[str, BudgetPoint]] = {
    "synthetic": {
        "small": BudgetPoint("small", 8, 8, 8, 4),
        "medium": BudgetPoint("medium", 24, 8, 8, 4),
        "large": BudgetPoint("large", 64, 8, 8, 4),
        "ablation": BudgetPoint("ablation", 50, 24, 16, 16),
    },
    "game24": {
        "small": BudgetPoint("small", 8, 12, 8, 4),
        "medium": BudgetPoint("medium", 16, 12, 8, 4),
        "large": BudgetPoint("large", 50, 12, 8, 4),
        "ablation": BudgetPoint("ablation", 50, 24, 16, 16),
    },
}


@dataclass
class SweepSpec:
    methods: list[str]
    budgets: list[BudgetPoint]
    seeds: list[int]
    env: str = "synthetic"
    env_params: dict = field(default_factory=dict)
    evaluator: str = "oracle"
    problems: dict = field(default_factory=dict)
    score_mode: str = "episode"  # or "root": judge only the first decision
    out_path: str = "sweep.csv"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.env not in ("game24", "synthetic"):
            raise ValueError(f"unknown env {self.env!r}")
        if self.score_mode not in ("episode", "root"):
            raise ValueError(f"unknown score_mode {self.score_mode!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")


@dataclass
class SweepRecord:
    method: str
    budget_label: str
    N: int
    w: int
    M: int
    d: int
    seed: int
    problem_id: int
    correct: int
    sims: int = 0
    nodes_expanded: int = 0
    propose_calls: int = 0
    value_calls: int = 0
    action_chars: int = 0
    wall_ms: float = 0.0
    max_root_visit_fraction: float | None = None
    error: str = ""

    def to_row(self) -> list[str]:
        frac = ("" if self.max_root_visit_fraction is None
                else f"{self.max_root_visit_fraction:.6f}")
        return [self.method, self.budget_label, str(self.N), str(self.w),
                str(self.M), str(self.d), str(self.seed), str(self.problem_id),
                str(self.correct), str(self.sims), str(self.nodes_expanded),
                str(self.propose_calls), str(self.value_calls),
                str(self.action_chars), f"{self.wall_ms:.1f}", frac, self.error]


# -- problem construction ----------------------------------------------------


def _problem_ids(spec: SweepSpec) -> list[int]:
    if spec.env == "game24":
        instances = _game24_instances(spec)
        ids = list(range(len(instances)))
        if spec.problems.get("solvable_only"):
            ids = [i for i in ids if game24_solvable(instances[i])]
        return ids
    return list(range(int(spec.problems.get("count", 100))))


def _game24_instances(spec: SweepSpec) -> list[list[int]]:
    if "instances" in spec.problems:
        return [list(x) for x in spec.problems["instances"]]
    fixture = spec.problems.get("fixture")
    if not fixture:
        raise ValueError("game24 sweeps need problems.fixture or problems.instances")
    return load_fixture(fixture)


def _build_env_state(spec: SweepSpec, problem_id: int):
    if spec.env == "game24":
        env = Game24Env()
        state = Game24State(_game24_instances(spec)[problem_id])
        return env, state
    params = dict(spec.env_params)
    base_seed = int(spec.problems.get("base_seed", 0))
    branching = int(params.pop("branching", 8))
    depth = int(params.pop("depth", 4))
    mdp = SyntheticTreeMDP(branching, depth, seed=(base_seed, problem_id), **params)
    env = SyntheticEnv(mdp)
    return env, env.root_state


def _build_evaluator(spec: SweepSpec, env: Environment, seed: int) -> Evaluator:
    token = spec.evaluator
    if token == "oracle":
        return OracleEvaluator(env, seed=seed)
    if token.startswith("noisy:"):
        return NoisyOracleEvaluator(env, sigma_noise=float(token[6:]), seed=seed)
    if token == "remote" or token.startswith("remote:"):
        endpoint = token[7:] if token.startswith("remote:") else ""
        endpoint = endpoint or os.environ.get("RESCALE_ENDPOINT", "")
        if not endpoint:
            raise ValueError("remote evaluator needs remote:URL or $RESCALE_ENDPOINT")
        return RemoteEvaluator(endpoint)
    raise ValueError(f"unknown evaluator {token!r}")


def _method_config(method: str, budget: BudgetPoint, seed: int) -> SearchConfig:
    base = dict(num_simulations=budget.sims, expansion_width=budget.width,
                root_top_m=min(budget.top_m, budget.width),
                max_depth=budget.depth, rng_seed=seed)
    if method == "alphazero":
        return SearchConfig(algorithm=ALPHAZERO, **base)
    if method == "rescale":
        return SearchConfig(algorithm=RESCALE, **base)
    if method == "rescale-no-gumbel":
        return SearchConfig(algorithm=RESCALE, gumbel_enabled=False, **base)
    if method == "rescale-no-halving":
        return SearchConfig(algorithm=RESCALE, sequential_halving_enabled=False, **base)
    raise ValueError(f"no search config for method {method!r}")


def _judge_value(env: Environment, state) -> float:
    """Task-level binary value: can the state still reach a perfect outcome."""
    if isinstance(env, SyntheticEnv):
        return float(env.mdp.optimal_values[state])
    if isinstance(env, Game24Env):
        return 1.0 if game24_solvable(state.numbers) else 0.0
    return env.oracle_value(state)


def best_of_n(state, n: int, evaluator: Evaluator, env: Environment, rng,
              width: int, max_depth: int) -> tuple[bool, CostCounter]:
    """Sample n rollouts from the proposal policy; keep the value-argmax one.

    Ties in value keep the earliest-sampled rollout. Correctness is the
    environment reward of the kept rollout's final state.
    """
    if n < 1:
        raise ValueError("best_of_n needs n >= 1")
    cost = CostCounter()
    counting = CountingEvaluator(evaluator, cost)
    best_score = -math.inf
    best_final = None
    for _ in range(n):
        s = state
        while not env.is_terminal(s) and env.state_depth(s) < max_depth:
            proposals = counting.propose(env.canonical_text(s), width)
            total = sum(p.raw_prob for p in proposals)
            if total <= 0:
                probs = [1.0 / len(proposals)] * len(proposals)
            else:
                probs = [p.raw_prob / total for p in proposals]
            pick = rng.choice(len(proposals), p=probs)
            s = env.step(s, proposals[pick].action_text)
        score = counting.value(env.canonical_text(s))
        if score > best_score:
            best_score = score
            best_final = s
    return env.reward(best_final) >= 1.0, cost


def run_unit(spec: SweepSpec, method: str, budget: BudgetPoint, seed: int,
             problem_id: int) -> SweepRecord:
    """One grid point; failures come back as an error row, never an exception."""
    record = SweepRecord(method=method, budget_label=budget.label, N=budget.sims,
                         w=budget.width, M=min(budget.top_m, budget.width),
                         d=budget.depth, seed=seed, problem_id=problem_id,
                         correct=0)
    started = time.perf_counter()
    try:
        env, state = _build_env_state(spec, problem_id)
        evaluator = _build_evaluator(spec, env, seed)
        if method == "best-of-n":
            rng = derive_rng(seed, problem_id)
            ok, cost = best_of_n(state, budget.sims, evaluator, env, rng,
                                 budget.width, budget.depth)
            record.correct = int(ok)
            record.sims = budget.sims
            record.propose_calls = cost.propose_calls
            record.value_calls = cost.value_calls
            record.action_chars = cost.action_chars
        elif spec.score_mode == "root":
            config = _method_config(method, budget, seed)
            rng = derive_rng(seed, problem_id, 0)
            result = run_search(state, config, evaluator, env, rng=rng)
            next_state = env.step(state, result.chosen_action)
            record.correct = int(_judge_value(env, next_state)
                                 == _judge_value(env, state))
            record.sims = result.simulations_run
            record.nodes_expanded = result.nodes_expanded
            record.propose_calls = result.cost.propose_calls
            record.value_calls = result.cost.value_calls
            record.action_chars = result.cost.action_chars
            record.max_root_visit_fraction = result.max_root_visit_fraction
        else:
            config = _method_config(method, budget, seed)
            traj = decode_episode(state, config, evaluator, env,
                                  stream_key=(problem_id,))
            record.correct = int(traj.reward >= 1.0)
            record.sims = sum(r.simulations_run for r in traj.steps)
            record.nodes_expanded = sum(r.nodes_expanded for r in traj.steps)
            record.propose_calls = traj.cost.propose_calls
            record.value_calls = traj.cost.value_calls
            record.action_chars = traj.cost.action_chars
            if traj.steps:
                record.max_root_visit_fraction = (
                    sum(r.max_root_visit_fraction for r in traj.steps)
                    / len(traj.steps))
    except (SearchAbortedError, EvaluatorError, ValueError) as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        record.correct = 0
    record.wall_ms = (time.perf_counter() - started) * 1e3
    return record


def _unit_args(spec: SweepSpec):
    problem_ids = _problem_ids(spec)
    for method in spec.methods:
        for budget in spec.budgets:
            for problem_id in problem_ids:
                for seed in spec.seeds:
                    yield (method, budget, seed, problem_id)


def _run_unit_star(args):
    return run_unit(*args)


def run_sweep(spec: SweepSpec) -> list[SweepRecord]:
    """Execute the full grid, write the CSV atomically, return the records."""
    tasks = list(_unit_args(spec))
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(_run_unit_star,
                                    [(spec, *t) for t in tasks], chunksize=16))
    else:
        records = [run_unit(spec, *t) for t in tasks]
    write_records_csv(records, spec.out_path)
    return records


def write_records_csv(records: list[SweepRecord], out_path: str) -> None:
    out_dir = os.path.dirname(os.path.abspath(out_path)) or "."
    os.makedirs(out_dir, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=".csv.tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for record in records:
                writer.writerow(record.to_row())
        os.replace(tmp_path, out_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


# -- reporting ---------------------------------------------------------------


@dataclass
class CellSummary:
    method: str
    budget_label: str
    N: int
    accuracy_mean: float
    accuracy_std: float
    mean_max_root_visit_fraction: float | None
    mean_propose_calls: float
    mean_value_calls: float
    mean_action_chars: float
    runs: int


def read_records(csv_path: str) -> list[dict]:
    rows = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
        for line_no, raw in enumerate(reader, start=2):
            try:
                rows.append({
                    "method": raw["method"],
                    "budget_label": raw["budget_label"],
                    "N": int(raw["N"]),
                    "seed": int(raw["seed"]),
                    "problem_id": int(raw["problem_id"]),
                    "correct": int(raw["correct"]),
                    "propose_calls": int(raw["propose_calls"]),
                    "value_calls": int(raw["value_calls"]),
                    "action_chars": int(raw["action_chars"]),
                    "max_root_visit_fraction": (
                        float(raw["max_root_visit_fraction"])
                        if raw["max_root_visit_fraction"] else None),
                    "error": raw["error"],
                })
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed CSV row {line_no}: {exc}") from exc
    return rows


def summarize(rows: list[dict]) -> list[CellSummary]:
    """Per (method, budget): accuracy mean +/- std across seeds, mean costs."""
    cells: dict[tuple[str, str, int], list[dict]] = {}
    for row in rows:
        cells.setdefault((row["method"], row["budget_label"], row["N"]), []).append(row)
    summaries = []
    for (method, label, n_sims), cell_rows in sorted(cells.items()):
        by_seed: dict[int, list[int]] = {}
        for row in cell_rows:
            by_seed.setdefault(row["seed"], []).append(row["correct"])
        seed_accs = [sum(v) / len(v) for _, v in sorted(by_seed.items())]
        fracs = [row["max_root_visit_fraction"] for row in cell_rows
                 if row["max_root_visit_fraction"] is not None]
        summaries.append(CellSummary(
            method=method,
            budget_label=label,
            N=n_sims,
            accuracy_mean=statistics.fmean(seed_accs),
            accuracy_std=statistics.pstdev(seed_accs) if len(seed_accs) > 1 else 0.0,
            mean_max_root_visit_fraction=(
                statistics.fmean(fracs) if fracs else None),
            mean_propose_calls=statistics.fmean(r["propose_calls"] for r in cell_rows),
            mean_value_calls=statistics.fmean(r["value_calls"] for r in cell_rows),
            mean_action_chars=statistics.fmean(r["action_chars"] for r in cell_rows),
            runs=len(cell_rows),
        ))
    return summaries


def format_summary_table(summaries: list[CellSummary]) -> str:
    """Rows = method x budget; the max-accuracy column is max over this grid
    only (a smaller grid than a full hyperparameter study would use)."""
    method_max = {}
    for s in summaries:
        method_max[s.method] = max(method_max.get(s.method, 0.0), s.accuracy_mean)
    header = (f"{'method':<20} {'budget':<10} {'N':>5} {'acc':>14} "
              f"{'max_acc_grid':>12} {'root_frac':>10} {'propose':>9} "
              f"{'value':>9} {'chars':>10}")
    lines = [header, "-" * len(header)]
    for s in summaries:
        frac = ("-" if s.mean_max_root_visit_fraction is None
                else f"{s.mean_max_root_visit_fraction:.3f}")
        lines.append(
            f"{s.method:<20} {s.budget_label:<10} {s.N:>5} "
            f"{s.accuracy_mean:>7.3f}±{s.accuracy_std:<5.3f} "
            f"{method_max[s.method]:>12.3f} {frac:>10} "
            f"{s.mean_propose_calls:>9.1f} {s.mean_value_calls:>9.1f} "
            f"{s.mean_action_chars:>10.1f}")
    return "\n".join(lines)


def write_plot_data(summaries: list[CellSummary], path: str) -> None:
    """Plot-ready series: x = budget (N), y = accuracy, one series per method."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "budget_label", "N", "accuracy_mean",
                         "accuracy_std", "mean_max_root_visit_fraction"])
        for s in sorted(summaries, key=lambda s: (s.method, s.N)):
            frac = ("" if s.mean_max_root_visit_fraction is None
                    else f"{s.mean_max_root_visit_fraction:.6f}")
            writer.writerow([s.method, s.budget_label, s.N,
                             f"{s.accuracy_mean:.6f}", f"{s.accuracy_std:.6f}",
                             frac])


def report(csv_path: str, plot_path: str | None = None) -> list[CellSummary]:
    rows = read_records(csv_path)
    summaries = summarize(rows)
    if plot_path:
        write_plot_data(summaries, plot_path)
    return summaries
