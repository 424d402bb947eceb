"""Root sampling, Sequential Halving, and improved-policy selection math.

Everything here is a pure function over plain lists, so each rule can be
checked against hand-derived values in isolation. Conventions shared by all
operations:

* priors are floored at 1e-300 before taking logs, so an underflowed
  proposal ranks last instead of poisoning the arithmetic with -inf;
* every ordering uses the total tie-break (score, then prior, then lower
  action index), which makes all selections deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import gumbel_from_uniform

LOG_PRIOR_FLOOR = 1e-300


def floored_log(p: float) -> float:
    return math.log(max(p, LOG_PRIOR_FLOOR))


def sample_gumbel(rng) -> float:
    """One standard Gumbel(0, 1) variate: -log(-log(u)), u uniform in (0, 1)."""
    return gumbel_from_uniform(rng.random())


def gumbel_variates(rng, n: int) -> list[float]:
    u = np.clip(rng.random(n), 1e-300, 1.0 - 1e-16)
    return (-np.log(-np.log(u))).tolist()


@dataclass
class RootCandidate:
    """A root action's frozen draw and score f = g + log p.

    ``gumbel`` is sampled exactly once per search and never refreshed
    between halving rounds.
    """

    action_index: int
    gumbel: float
    log_prior: float
    prior: float
    alive: bool = False

    @property
    def score(self) -> float:
        return self.gumbel + self.log_prior


def gumbel_top_m(priors: list[float], m: int, rng, gumbel_enabled: bool = True) -> list[RootCandidate]:
    """Draw one Gumbel per candidate and mark the top ``m`` by f alive.

    Returns all candidates sorted descending by f (ties: higher prior, then
    lower index). With ``gumbel_enabled`` false the draws are zeroed, which
    reduces the alive set to the m largest priors.
    """
    if not priors:
        raise ValueError("gumbel_top_m needs at least one prior")
    if not 1 <= m <= len(priors):
        raise ValueError(f"m={m} out of range for {len(priors)} priors")
    if gumbel_enabled:
        gumbels = gumbel_variates(rng, len(priors))
    else:
        gumbels = [0.0] * len(priors)
    candidates = [
        RootCandidate(i, g, floored_log(p), p)
        for i, (p, g) in enumerate(zip(priors, gumbels))
    ]
    candidates.sort(key=lambda c: (-c.score, -c.prior, c.action_index))
    for c in candidates[:m]:
        c.alive = True
    return candidates


def sigma(v: float, max_visits: int, c_visit: float = 50.0, c_scale: float = 1.0) -> float:
    """Monotone value transform (c_visit + max sibling visits) * v, scaled."""
    return c_scale * (c_visit + max_visits) * v


@dataclass(frozen=True)
class HalvingSchedule:
    """Budget split for Sequential Halving.

    ``rounds`` lists (survivor_count, sims_per_survivor); whatever the
    flooring leaves over is spent in the final round, dealt round-robin in
    score order, so the totals always add up to the exact budget.
    """

    rounds: list[tuple[int, int]] = field(default_factory=list)
    extra_final_sims: int = 0

    @property
    def total(self) -> int:
        return sum(s * q for s, q in self.rounds) + self.extra_final_sims


def halving_schedule(m: int, n: int) -> HalvingSchedule:
    """Split ``n`` simulations over ceil(log2(m)) halving rounds.

    Each round gets floor(n / rounds) simulations, shared evenly (floored)
    among that round's survivors. A single arm degenerates to one round
    holding the whole budget.
    """
    if m < 1 or n < 1:
        raise ValueError("halving_schedule requires m >= 1 and n >= 1")
    if m == 1:
        return HalvingSchedule(rounds=[(1, n)], extra_final_sims=0)
    num_rounds = math.ceil(math.log2(m))
    per_round = n // num_rounds
    rounds: list[tuple[int, int]] = []
    survivors = m
    for _ in range(num_rounds):
        rounds.append((survivors, per_round // survivors))
        survivors = (survivors + 1) // 2
    used = sum(s * q for s, q in rounds)
    return HalvingSchedule(rounds=rounds, extra_final_sims=n - used)


def candidate_order_key(score: float, prior: float, action_index: int):
    """Sort key for descending score with the standard tie-break."""
    return (-score, -prior, action_index)


def halving_eliminate(
    candidates: list[RootCandidate],
    root_visit_counts: list[int],
    root_mean_values: list[float],
    c_visit: float = 50.0,
    c_scale: float = 1.0,
) -> list[RootCandidate]:
    """Re-score the alive candidates and mark the bottom half dead.

    The refreshed score is f + sigma(v) where v is the root edge's running
    mean (which still holds the initial evaluator value for a child the
    schedule gave no simulations). ``max_visits`` is taken over all root
    children, not only the alive ones.
    """
    max_visits = max(root_visit_counts) if root_visit_counts else 0
    alive = [c for c in candidates if c.alive]
    scored = sorted(
        alive,
        key=lambda c: candidate_order_key(
            c.score + sigma(root_mean_values[c.action_index], max_visits, c_visit, c_scale),
            c.prior,
            c.action_index,
        ),
    )
    for c in scored[len(alive) - len(alive) // 2:]:
        c.alive = False
    return candidates


def completed_values(
    priors: list[float],
    visit_counts: list[int],
    mean_values: list[float],
    value_evals: list[float],
) -> list[float]:
    """Per-child completed values: running means where visited, v_mix elsewhere.

    v_mix blends the child's own evaluator value with the policy-weighted
    mean over visited siblings, weighted by the total visit count, so an
    unvisited child inherits more of the observed evidence as it accrues.
    """
    n_total = sum(visit_counts)
    if n_total == 0:
        return list(value_evals)
    prior_mass = 0.0
    weighted = 0.0
    for p, n, mv in zip(priors, visit_counts, mean_values):
        if n > 0:
            prior_mass += p
            weighted += p * mv
    v_bar = weighted / max(prior_mass, LOG_PRIOR_FLOOR)
    out = []
    for n, mv, ve in zip(visit_counts, mean_values, value_evals):
        if n > 0:
            out.append(mv)
        else:
            out.append((ve + n_total * v_bar) / (1.0 + n_total))
    return out


def improved_policy(
    log_priors: list[float],
    completed: list[float],
    max_visits: int,
    c_visit: float = 50.0,
    c_scale: float = 1.0,
) -> list[float]:
    """softmax(log p + sigma(completed value)), max-subtracted for stability."""
    scale = c_scale * (c_visit + max_visits)
    logits = [lp + scale * v for lp, v in zip(log_priors, completed)]
    top = max(logits)
    exps = [math.exp(x - top) for x in logits]
    total = sum(exps)
    return [e / total for e in exps]


def select_nonroot_action(
    priors: list[float],
    visit_counts: list[int],
    mean_values: list[float],
    value_evals: list[float],
    c_visit: float = 50.0,
    c_scale: float = 1.0,
) -> int:
    """Deterministic in-tree choice: argmax of pi' minus the visit fraction.

    Repeated application drives the children's visit fractions toward pi'.
    """
    log_priors = [floored_log(p) for p in priors]
    comp = completed_values(priors, visit_counts, mean_values, value_evals)
    pi = improved_policy(log_priors, comp, max(visit_counts), c_visit, c_scale)
    n_total = sum(visit_counts)
    best = 0
    best_key = None
    for i, (p, n) in enumerate(zip(pi, visit_counts)):
        key = (p - n / (1.0 + n_total), p, -i)
        if best_key is None or key > best_key:
            best, best_key = i, key
    return best


def final_score_argmax(
    candidates: list[RootCandidate],
    visit_counts: list[int],
    mean_values: list[float],
    c_visit: float = 50.0,
    c_scale: float = 1.0,
    visited_only: bool = True,
) -> int:
    """argmax over candidates of f + sigma(mean value), default visited only."""
    max_visits = max(visit_counts) if visit_counts else 0
    pool = [c for c in candidates if not visited_only or visit_counts[c.action_index] > 0]
    if not pool:
        raise ValueError("no visited root children to select from")
    best = min(
        pool,
        key=lambda c: candidate_order_key(
            c.score + sigma(mean_values[c.action_index], max_visits, c_visit, c_scale),
            c.prior,
            c.action_index,
        ),
    )
    return best.action_index


def select_final_root_action(
    candidates: list[RootCandidate],
    visit_counts: list[int],
    mean_values: list[float],
    c_visit: float = 50.0,
    c_scale: float = 1.0,
    halving_completed: bool = True,
) -> int:
    """The surviving candidate's action; or the ablation argmax without halving."""
    if halving_completed:
        alive = [c for c in candidates if c.alive]
        if len(alive) != 1:
            raise RuntimeError(
                f"Sequential Halving must end with one survivor, found {len(alive)}"
            )
        return alive[0].action_index
    return final_score_argmax(candidates, visit_counts, mean_values, c_visit, c_scale)
