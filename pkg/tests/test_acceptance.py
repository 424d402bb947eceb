"""Acceptance suite: one test per criterion, each printing a pass line.

Criteria 1-9 run fully in-process (no server). Criterion 10 needs the
Node-based evaluator server stub from server-stub/ and is skipped when the
stub bundle or node is unavailable.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the pass lines.
"""

import csv
import math
import shutil
import socket
import subprocess
import time
from pathlib import Path

import pytest

from rescale.config import SearchConfig
from rescale.envs.game24 import Game24Env, Game24State, game24_solvable, load_fixture
from rescale.envs.synthetic import SyntheticEnv, SyntheticTreeMDP
from rescale.evaluators import NoisyOracleEvaluator, OracleEvaluator
from rescale.gumbel import gumbel_top_m, halving_schedule, improved_policy
from rescale.harness import (BUDGET_PRESETS, SweepSpec, run_sweep, summarize)
from rescale.rng import derive_rng
from rescale.search import decode_episode, run_search

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def ok(criterion, detail):
    print(f"\nACCEPTANCE {criterion}: PASS — {detail}")


def test_criterion_1_schedule_exactness():
    started = time.perf_counter()
    schedule = halving_schedule(8, 24)
    assert schedule.rounds == [(8, 1), (4, 2), (2, 4)]
    assert schedule.total == 24
    checked = 0
    for m in range(1, 65):
        for n in range(max(1, math.ceil(math.log2(max(m, 2)))), 513):
            assert halving_schedule(m, n).total == n
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    ok(1, f"(8,24) -> [(8,1),(4,2),(2,4)]; {checked} schedules sum exactly "
          f"({elapsed:.2f}s < 1s)")


def test_criterion_2_gumbel_max_trick():
    started = time.perf_counter()
    priors = [0.5, 0.3, 0.2]
    rng = derive_rng(2024)
    counts = [0, 0, 0]
    n = 100_000
    for _ in range(n):
        counts[gumbel_top_m(priors, 1, rng)[0].action_index] += 1
    freqs = [c / n for c in counts]
    for f, p in zip(freqs, priors):
        assert abs(f - p) < 0.01, (freqs, priors)
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    ok(2, f"top-1 frequencies {[round(f, 4) for f in freqs]} within ±0.01 of "
          f"{priors} ({elapsed:.2f}s < 5s)")


def test_criterion_3_policy_improvement():
    started = time.perf_counter()
    rng = derive_rng(3)
    worst = math.inf
    for _ in range(1000):
        k = int(rng.integers(2, 17))
        raw = rng.random(k) + 1e-3
        priors = (raw / raw.sum()).tolist()
        q = rng.random(k).tolist()
        visits = rng.integers(0, 100, size=k).tolist()
        pi = improved_policy([math.log(p) for p in priors], q, max(visits))
        gain = (sum(p * v for p, v in zip(pi, q))
                - sum(p * v for p, v in zip(priors, q)))
        worst = min(worst, gain)
        assert gain >= -1e-12
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    ok(3, f"1000 instances, worst improvement {worst:.3e} >= -1e-12 "
          f"({elapsed:.2f}s < 1s)")


def _replay_halving(candidates, c_visit=50.0):
    """Independent halving replay over (pos, gumbel, log_prior, prior, v*).

    Visit counts under the (8, 24) schedule are fully determined, so the
    whole search collapses to this arithmetic when the oracle is exact.
    """
    alive = list(candidates)
    visits = {c[0]: 0 for c in candidates}
    for sims_per_survivor in (1, 2, 4):
        for c in alive:
            visits[c[0]] += sims_per_survivor
        max_visits = max(visits.values())
        scored = sorted(alive, key=lambda c: (
            -(c[1] + c[2] + (c_visit + max_visits) * c[4]), -c[3], c[0]))
        alive = scored[:len(alive) - len(alive) // 2]
    return alive[0][0]


def test_criterion_4_oracle_replay_equivalence():
    started = time.perf_counter()
    matches = 0
    for trial in range(500):
        mdp = SyntheticTreeMDP(8, 3, seed=(500, trial), root_separation=0.1)
        env = SyntheticEnv(mdp)
        evaluator = OracleEvaluator(env, seed=1)
        config = SearchConfig(num_simulations=24, expansion_width=8,
                              root_top_m=8, max_depth=2, c_visit=50.0,
                              rng_seed=trial)
        result = run_search(env.root_state, config, evaluator, env)
        children = list(mdp.children(0))
        candidates = []
        for pos, stat in enumerate(result.root_child_stats):
            slot = int(stat.action[1:])
            candidates.append((pos, stat.gumbel,
                               math.log(max(stat.prior, 1e-300)), stat.prior,
                               float(mdp.quality_values[children[slot]])))
        expected = _replay_halving(candidates)
        got = next(pos for pos, stat in enumerate(result.root_child_stats)
                   if stat.action == result.chosen_action)
        matches += (expected == got)
    elapsed = time.perf_counter() - started
    assert matches == 500, f"only {matches}/500 replays matched"
    assert elapsed < 30.0, f"took {elapsed:.2f}s"
    ok(4, f"survivor equals replayed argmax(g + log p + sigma(v*)) in "
          f"{matches}/500 trials ({elapsed:.2f}s < 30s)")


def test_criterion_5_backup_and_visit_invariants():
    started = time.perf_counter()
    rng = derive_rng(55)
    for trial in range(200):
        branching = int(rng.integers(2, 7))
        tree_depth = int(rng.integers(2, 4))
        width = int(rng.integers(2, branching + 3))
        top_m = int(rng.integers(1, width + 1))
        rounds = max(1, math.ceil(math.log2(top_m)))
        sims = int(rng.integers(rounds, 41))
        algorithm = ["rescale", "alphazero"][int(rng.integers(0, 2))]
        config = SearchConfig(
            num_simulations=sims, expansion_width=width, root_top_m=top_m,
            max_depth=int(rng.integers(1, tree_depth + 2)),
            algorithm=algorithm,
            gumbel_enabled=bool(rng.integers(0, 2)),
            sequential_halving_enabled=bool(rng.integers(0, 2)),
            rng_seed=trial, record_backups=True)
        mdp = SyntheticTreeMDP(branching, tree_depth, seed=(55, trial))
        env = SyntheticEnv(mdp)
        evaluator = NoisyOracleEvaluator(env, sigma_noise=float(rng.random()),
                                         seed=trial)
        result = run_search(env.root_state, config, evaluator, env,
                            rng=derive_rng(trial), keep_tree=True)
        tree = result.tree
        assert sum(s.visit_count for s in result.root_child_stats) == sims
        backed: dict[tuple[int, int], list[float]] = {}
        for node_id, idx, v_leaf in tree.backup_log:
            backed.setdefault((node_id, idx), []).append(v_leaf)
        for node_id, node in enumerate(tree.nodes):
            if not node.expanded:
                continue
            for idx, edge in enumerate(node.children):
                values = backed.get((node_id, idx), [])
                assert len(values) == edge.visit_count
                if values:
                    assert abs(edge.mean_value - sum(values) / len(values)) <= 1e-9
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"took {elapsed:.2f}s"
    ok(5, f"200 fuzzed configs: visit conservation exact, edge means replay "
          f"to 1e-9 ({elapsed:.2f}s < 30s)")


def test_criterion_6_game24_oracle_decode():
    started = time.perf_counter()
    instances = load_fixture(FIXTURES / "game24_100.txt")
    bits = [int(line) for line in
            (FIXTURES / "game24_100_solvable.txt").read_text().split()]
    solvable = [nums for nums, bit in zip(instances, bits) if bit]
    env = Game24Env()
    evaluator = OracleEvaluator(env, seed=1)
    config = SearchConfig(num_simulations=16, expansion_width=12, root_top_m=8,
                          max_depth=4, rng_seed=0)
    failures = []
    for index, nums in enumerate(solvable):
        traj = decode_episode(Game24State(nums), config, evaluator, env,
                              stream_key=(index,))
        if traj.reward != 1.0:
            failures.append(nums)
    elapsed = time.perf_counter() - started
    assert not failures, f"unsolved: {failures}"
    assert elapsed < 60.0, f"took {elapsed:.2f}s"
    ok(6, f"solved {len(solvable)}/{len(solvable)} solvable fixtures at "
          f"N=16, w=12, M=8 ({elapsed:.2f}s < 60s)")


def _scaling_sweep(tmp_path, methods, budgets, score_mode="root"):
    spec = SweepSpec(
        methods=methods,
        budgets=budgets,
        seeds=[0, 1, 2],
        env="synthetic",
        env_params={"branching": 8, "depth": 4},
        evaluator="noisy:0.2",
        problems={"count": 500, "base_seed": 100},
        score_mode=score_mode,
        out_path=str(tmp_path / "scaling.csv"),
        workers=2,
    )
    records = run_sweep(spec)
    rows = [{"method": r.method, "budget_label": r.budget_label, "N": r.N,
             "seed": r.seed, "problem_id": r.problem_id, "correct": r.correct,
             "propose_calls": r.propose_calls, "value_calls": r.value_calls,
             "action_chars": r.action_chars,
             "max_root_visit_fraction": r.max_root_visit_fraction,
             "error": r.error} for r in records]
    assert not any(r["error"] for r in rows)
    return {(c.method, c.N): c for c in summarize(rows)}


def test_criterion_7_scaling_shape(tmp_path):
    started = time.perf_counter()
    budgets = [BUDGET_PRESETS["synthetic"][k] for k in ("small", "medium", "large")]
    cells = _scaling_sweep(tmp_path, ["rescale", "alphazero"], budgets)
    rescale_acc = [cells[("rescale", n)].accuracy_mean for n in (8, 24, 64)]
    az_acc = [cells[("alphazero", n)].accuracy_mean for n in (8, 24, 64)]
    rescale_frac = cells[("rescale", 64)].mean_max_root_visit_fraction
    az_frac = cells[("alphazero", 64)].mean_max_root_visit_fraction

    assert rescale_acc[1] >= rescale_acc[0] - 0.02, rescale_acc
    assert rescale_acc[2] >= rescale_acc[1] - 0.02, rescale_acc
    assert rescale_acc[2] >= rescale_acc[0] + 0.03, rescale_acc
    assert az_frac > rescale_frac, (az_frac, rescale_frac)

    elapsed = time.perf_counter() - started
    assert elapsed < 600.0, f"took {elapsed:.2f}s"
    ok(7, f"accuracy over N=(8,24,64): {[round(a, 4) for a in rescale_acc]} "
          f"(+{(rescale_acc[2] - rescale_acc[0]) * 100:.1f} pts, monotone within "
          f"2 pts); baseline alongside {[round(a, 4) for a in az_acc]} with "
          f"root concentration {az_frac:.3f} > {rescale_frac:.3f} "
          f"({elapsed:.1f}s < 600s)")


def test_criterion_8_ablation_direction(tmp_path):
    started = time.perf_counter()
    budgets = [BUDGET_PRESETS["synthetic"]["ablation"]]
    cells = _scaling_sweep(
        tmp_path, ["rescale", "rescale-no-halving", "rescale-no-gumbel"], budgets)
    full = cells[("rescale", 50)].accuracy_mean
    no_halving = cells[("rescale-no-halving", 50)].accuracy_mean
    no_gumbel = cells[("rescale-no-gumbel", 50)].accuracy_mean
    assert full >= no_halving - 0.01, (full, no_halving)
    assert full >= no_gumbel - 0.01, (full, no_gumbel)
    elapsed = time.perf_counter() - started
    ok(8, f"N=50/w=24 preset: full {full:.4f} vs no-halving {no_halving:.4f} "
          f"and no-gumbel {no_gumbel:.4f} (1-pt slack, paired over 3 seeds; "
          f"{elapsed:.1f}s)")


def test_criterion_9_sweep_determinism(tmp_path):
    started = time.perf_counter()

    def spec(out_name):
        return SweepSpec(
            methods=["rescale", "alphazero"],
            budgets=[BUDGET_PRESETS["synthetic"]["small"],
                     BUDGET_PRESETS["synthetic"]["medium"]],
            seeds=[0, 1],
            env="synthetic",
            evaluator="noisy:0.2",
            problems={"count": 10, "base_seed": 9},
            score_mode="root",
            out_path=str(tmp_path / out_name),
        )

    run_sweep(spec("a.csv"))
    run_sweep(spec("b.csv"))

    def rows_without_wall_ms(path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        drop = rows[0].index("wall_ms")
        return [tuple(v for i, v in enumerate(row) if i != drop) for row in rows]

    a = rows_without_wall_ms(tmp_path / "a.csv")
    b = rows_without_wall_ms(tmp_path / "b.csv")
    assert a == b
    elapsed = time.perf_counter() - started
    ok(9, f"two identical sweeps byte-identical modulo wall_ms "
          f"({len(a) - 1} rows, {elapsed:.1f}s)")


# -- criterion 10: secondary component -----------------------------------


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _start_stub(mode: str, port: int, fixture: str | None = None):
    bundle = ROOT / "server-stub" / "dist" / "server.js"
    if not bundle.exists() or shutil.which("node") is None:
        pytest.skip("server-stub bundle or node unavailable")
    args = ["node", str(bundle), "--port", str(port), "--mode", mode]
    if fixture:
        args += ["--fixture", fixture]
    proc = subprocess.Popen(args, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    deadline = time.time() + 10
    while time.time() < deadline:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return proc
        except OSError:
            if proc.poll() is not None:
                raise RuntimeError(
                    f"stub exited: {proc.stderr.read().decode()[:500]}")
            time.sleep(0.05)
    proc.kill()
    raise RuntimeError("stub did not come up")


def test_criterion_10_protocol_conformance():
    from rescale.conformance import run_game24_check, run_scripted_check

    started = time.perf_counter()
    fixture = str(FIXTURES / "stub_scripted.json")

    port = _free_port()
    proc = _start_stub("scripted", port, fixture)
    try:
        scripted = run_scripted_check(f"http://127.0.0.1:{port}", fixture)
    finally:
        proc.terminate()
        proc.wait(timeout=5)
    assert all(r.ok for r in scripted), [r for r in scripted if not r.ok]

    port = _free_port()
    proc = _start_stub("game24", port)
    try:
        game24 = run_game24_check(f"http://127.0.0.1:{port}")
    finally:
        proc.terminate()
        proc.wait(timeout=5)
    assert all(r.ok for r in game24), [r for r in game24 if not r.ok]

    elapsed = time.perf_counter() - started
    ok(10, f"scripted fixtures {len(scripted)}/{len(scripted)} and game24 "
           f"known answers {len(game24)}/{len(game24)} through the full "
           f"client path ({elapsed:.1f}s)")
