"""Search orchestration: the simulation loop, root controllers, and decoding.

A search spends exactly N simulations. Each simulation is routed through a
root controller that picks which root child to descend into:

* Sequential Halving controller (default): frozen Gumbel scores pick the
  top-M candidates, the budget schedule deals simulations round by round,
  and the bottom half is eliminated on refreshed scores until one survives.
* Gumbel-PUCT controller (halving ablation): PUCT at the root over priors
  softmax(log p + g), final choice by f + sigma(mean) among visited.
* AlphaZero controller (baseline): Dirichlet-noised priors, PUCT at the
  root, visit-count sampling for the final choice.

Below the root, the default algorithm follows the deterministic
improved-policy rule; the baseline uses PUCT everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import (ALPHAZERO, RESCALE, CostCounter, RootChildStat,
                     SearchConfig, SearchResult)
from .envs.base import Environment
from .evaluators import Evaluator, EvaluatorError, MemoizingEvaluator
from .gumbel import (RootCandidate, candidate_order_key, floored_log,
                     gumbel_top_m, halving_schedule, select_final_root_action,
                     select_nonroot_action, sigma)
from .puct import PuctParams, apply_dirichlet_noise, puct_select, visit_count_action
from .rng import derive_rng
from .tree import SearchTree


class SearchAbortedError(RuntimeError):
    """Evaluator failure mid-search; carries how far the search got."""

    def __init__(self, message: str, simulations_completed: int):
        super().__init__(message)
        self.simulations_completed = simulations_completed


def run_simulation(tree: SearchTree, root_action_index: int,
                   config: SearchConfig) -> float:
    """One root-to-leaf descent through the given root child, plus backup.

    The walk stops at the first unexpanded node (expanded, leaf value =
    cached evaluator value), terminal node (environment reward), or node at
    the depth cap (cached evaluator value); the leaf value is then backed
    up through every edge on the path.
    """
    path = [(0, root_action_index)]
    node_id = tree.root.children[root_action_index].child
    while True:
        node = tree.node(node_id)
        if node.is_terminal:
            v_leaf = node.reward
            break
        if node.depth >= config.max_depth:
            v_leaf = node.value_eval
            break
        if not node.expanded:
            edges = tree.expand(node_id)
            if not edges:  # dead end: expand() marked it terminal
                v_leaf = node.reward
            else:
                v_leaf = node.value_eval
            break
        if config.algorithm == ALPHAZERO:
            priors, visits, means, values = tree.child_arrays(node_id)
            incoming = tree.node(node.parent[0]).children[node.parent[1]]
            index = puct_select(priors, visits, means, values,
                                _puct_params(config), parent_mean=incoming.mean_value)
        else:
            priors, visits, means, values = tree.child_arrays(node_id)
            index = select_nonroot_action(priors, visits, means, values,
                                          config.c_visit, config.c_scale)
        path.append((node_id, index))
        node_id = node.children[index].child
    tree.backpropagate(path, v_leaf)
    return v_leaf


def _puct_params(config: SearchConfig) -> PuctParams:
    return PuctParams(
        c_puct=config.puct_c,
        dirichlet_epsilon=config.dirichlet_epsilon,
        dirichlet_alpha=config.dirichlet_alpha,
        temperature_tau=config.temperature_tau,
        tau_greedy=config.tau_greedy,
        unvisited_q=config.puct_unvisited_q,
    )


class HalvingRootController:
    """Runs the Sequential Halving budget schedule at the root."""

    def __init__(self, tree: SearchTree, config: SearchConfig, rng):
        self.config = config
        priors = [e.prior for e in tree.root.children]
        m_eff = min(config.root_top_m, len(priors))
        self.candidates = gumbel_top_m(priors, m_eff, rng, config.gumbel_enabled)
        self.schedule = halving_schedule(m_eff, config.num_simulations)

    def _alive_by_score(self, tree: SearchTree) -> list[RootCandidate]:
        edges = tree.root.children
        max_visits = max(e.visit_count for e in edges)
        return sorted(
            (c for c in self.candidates if c.alive),
            key=lambda c: candidate_order_key(
                c.score + sigma(edges[c.action_index].mean_value, max_visits,
                                self.config.c_visit, self.config.c_scale),
                c.prior, c.action_index),
        )

    def _eliminate(self, tree: SearchTree, scheduled_sims: int) -> None:
        ranked = self._alive_by_score(tree)
        if scheduled_sims >= 1:
            starved = [c.action_index for c in ranked
                       if tree.root.children[c.action_index].visit_count == 0]
            if starved:
                raise RuntimeError(
                    f"schedule bug: alive candidates {starved} ended a "
                    f"{scheduled_sims}-sim round with zero visits")
        for c in ranked[len(ranked) - len(ranked) // 2:]:
            c.alive = False

    def run(self, tree: SearchTree, simulate) -> None:
        rounds = self.schedule.rounds
        for round_index, (survivor_count, sims_each) in enumerate(rounds):
            order = self._alive_by_score(tree)
            if len(order) != survivor_count:
                raise RuntimeError(
                    f"schedule expected {survivor_count} survivors, "
                    f"found {len(order)}")
            remaining = {c.action_index: sims_each for c in order}
            if round_index == len(rounds) - 1:
                for i in range(self.schedule.extra_final_sims):
                    remaining[order[i % len(order)].action_index] += 1
            budget_left = sum(remaining.values())
            while budget_left:
                for c in order:
                    if remaining[c.action_index] > 0:
                        simulate(c.action_index)
                        remaining[c.action_index] -= 1
                        budget_left -= 1
            if survivor_count > 1:
                self._eliminate(tree, sims_each)

    def final_action(self, tree: SearchTree, rng) -> int:
        _, visits, means, _ = tree.child_arrays(0)
        return select_final_root_action(
            self.candidates, visits, means, self.config.c_visit,
            self.config.c_scale, halving_completed=True)


class GumbelPuctRootController:
    """Halving ablation: PUCT at the root over Gumbel-noised priors."""

    def __init__(self, tree: SearchTree, config: SearchConfig, rng):
        self.config = config
        priors = [e.prior for e in tree.root.children]
        self.candidates = gumbel_top_m(priors, len(priors), rng, config.gumbel_enabled)
        scores = [0.0] * len(priors)
        for c in self.candidates:
            scores[c.action_index] = c.score
        top = max(scores)
        weights = [math.exp(s - top) for s in scores]
        total = sum(weights)
        self.noised_priors = [w / total for w in weights]

    def run(self, tree: SearchTree, simulate) -> None:
        params = _puct_params(self.config)
        for _ in range(self.config.num_simulations):
            _, visits, means, values = tree.child_arrays(0)
            simulate(puct_select(self.noised_priors, visits, means, values, params))

    def final_action(self, tree: SearchTree, rng) -> int:
        _, visits, means, _ = tree.child_arrays(0)
        return select_final_root_action(
            self.candidates, visits, means, self.config.c_visit,
            self.config.c_scale, halving_completed=False)


class AlphaZeroRootController:
    """Baseline: Dirichlet noise on root priors, PUCT, visit-count choice."""

    def __init__(self, tree: SearchTree, config: SearchConfig, rng):
        self.config = config
        priors = [e.prior for e in tree.root.children]
        self.noised_priors = apply_dirichlet_noise(priors, _puct_params(config), rng)
        self.candidates: list[RootCandidate] = []

    def run(self, tree: SearchTree, simulate) -> None:
        params = _puct_params(self.config)
        for _ in range(self.config.num_simulations):
            _, visits, means, values = tree.child_arrays(0)
            simulate(puct_select(self.noised_priors, visits, means, values, params))

    def final_action(self, tree: SearchTree, rng) -> int:
        _, visits, _, _ = tree.child_arrays(0)
        return visit_count_action(visits, self.config.temperature_tau, rng,
                                  self.config.tau_greedy)


def _make_controller(tree: SearchTree, config: SearchConfig, rng):
    if config.algorithm == ALPHAZERO:
        return AlphaZeroRootController(tree, config, rng)
    if config.sequential_halving_enabled:
        return HalvingRootController(tree, config, rng)
    return GumbelPuctRootController(tree, config, rng)


def run_search(root_state, config: SearchConfig, evaluator: Evaluator,
               env: Environment, rng=None, keep_tree: bool = False) -> SearchResult:
    """Full search from one state: N simulations, then the final root choice."""
    if rng is None:
        rng = derive_rng(config.rng_seed)
    sims_done = 0
    try:
        tree = SearchTree(root_state, env, evaluator, config)
        controller = _make_controller(tree, config, rng)

        def simulate(root_index: int) -> None:
            nonlocal sims_done
            run_simulation(tree, root_index, config)
            sims_done += 1

        controller.run(tree, simulate)
        chosen = controller.final_action(tree, rng)
    except EvaluatorError as exc:
        raise SearchAbortedError(
            f"search aborted after {sims_done} simulations: {exc}", sims_done
        ) from exc

    edges = tree.root.children
    total_visits = sum(e.visit_count for e in edges)
    if total_visits != config.num_simulations:
        raise RuntimeError(
            f"visit conservation violated: {total_visits} != {config.num_simulations}")

    gumbels = {c.action_index: c.gumbel for c in controller.candidates}
    max_visits = max(e.visit_count for e in edges)
    stats = []
    for i, e in enumerate(edges):
        if config.algorithm == ALPHAZERO:
            score = e.visit_count / total_visits
        else:
            score = (gumbels.get(i, 0.0) + e.log_prior
                     + sigma(e.mean_value, max_visits, config.c_visit, config.c_scale))
        stats.append(RootChildStat(
            action=e.action_text, prior=e.prior, visit_count=e.visit_count,
            mean_value=e.mean_value, root_score=score, gumbel=gumbels.get(i, 0.0)))

    result = SearchResult(
        chosen_action=edges[chosen].action_text,
        root_child_stats=stats,
        simulations_run=total_visits,
        nodes_expanded=tree.nodes_expanded,
        evaluator_calls=(tree.cost.propose_calls, tree.cost.value_calls),
        cost=tree.cost.snapshot(),
    )
    if keep_tree:
        result.tree = tree
    return result


@dataclass
class Trajectory:
    """One decoded episode: the committed actions and the final outcome."""

    actions: list[str]
    final_state_text: str
    reward: float
    cost: CostCounter
    steps: list[SearchResult] = field(default_factory=list)


def decode_episode(initial_state, config: SearchConfig, evaluator: Evaluator,
                   env: Environment, stream_key: tuple[int, ...] = ()) -> Trajectory:
    """Repeat search-and-commit until terminal, STOP, or the depth budget.

    A fresh tree is built per step; with ``subtree_reuse`` the evaluator is
    wrapped in a cross-step memo so statistics stay per-search while repeat
    evaluations of already-seen states are free.
    """
    if config.subtree_reuse:
        evaluator = MemoizingEvaluator(evaluator)
    state = initial_state
    cost = CostCounter()
    actions: list[str] = []
    steps: list[SearchResult] = []
    step_index = 0
    while (not env.is_terminal(state)
           and env.state_depth(state) < config.max_depth):
        rng = derive_rng(config.rng_seed, *stream_key, step_index)
        result = run_search(state, config, evaluator, env, rng=rng)
        cost.add(result.cost)
        steps.append(result)
        actions.append(result.chosen_action)
        state = env.step(state, result.chosen_action)
        if env.is_stop_action(result.chosen_action):
            break
        step_index += 1
    return Trajectory(actions, env.canonical_text(state), env.reward(state),
                      cost, steps)
