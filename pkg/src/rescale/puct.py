"""AlphaZero-style baseline rules: Dirichlet root noise, PUCT, visit-count choice."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PuctParams:
    c_puct: float = 1.25
    dirichlet_epsilon: float = 0.25
    dirichlet_alpha: float = 0.3
    temperature_tau: float = 1.0
    tau_greedy: float = 0.01
    # Q for an edge with no visits; this init materially shapes how hard
    # the baseline over-exploits, so it stays configurable.
    unvisited_q: str = "zero"

    def __post_init__(self) -> None:
        if self.c_puct <= 0:
            raise ValueError("c_puct must be > 0")
        if not 0.0 <= self.dirichlet_epsilon <= 1.0:
            raise ValueError("dirichlet_epsilon must be in [0, 1]")
        if self.dirichlet_alpha <= 0:
            raise ValueError("dirichlet_alpha must be > 0")
        if self.temperature_tau <= 0:
            raise ValueError("temperature_tau must be > 0")


def apply_dirichlet_noise(priors: list[float], params: PuctParams, rng) -> list[float]:
    """p' = (1 - eps) * p + eps * Dirichlet(alpha, ..., alpha)."""
    eps = params.dirichlet_epsilon
    if eps == 0.0 or len(priors) == 1:
        return list(priors)
    noise = rng.dirichlet([params.dirichlet_alpha] * len(priors))
    return [(1.0 - eps) * p + eps * float(e) for p, e in zip(priors, noise)]


def puct_select(
    priors: list[float],
    visit_counts: list[int],
    mean_values: list[float],
    value_evals: list[float],
    params: PuctParams,
    parent_mean: float | None = None,
) -> int:
    """argmax of Q(a) + c_puct * p(a) * sqrt(sum_b N(b)) / (1 + N(a)).

    Q(a) is the running mean for visited edges; unvisited edges fall back to
    the configured init (zero, the child's evaluator value, or the parent's
    mean). Ties break by higher prior, then lower index.
    """
    sqrt_total = math.sqrt(sum(visit_counts))
    best = 0
    best_key = None
    for i, (p, n, mv) in enumerate(zip(priors, visit_counts, mean_values)):
        if n > 0:
            q = mv
        elif params.unvisited_q == "value_eval":
            q = value_evals[i]
        elif params.unvisited_q == "parent_mean" and parent_mean is not None:
            q = parent_mean
        else:
            q = 0.0
        key = (q + params.c_puct * p * sqrt_total / (1.0 + n), p, -i)
        if best_key is None or key > best_key:
            best, best_key = i, key
    return best


def visit_count_action(visit_counts: list[int], tau: float, rng,
                       tau_greedy: float = 0.01) -> int:
    """Sample proportionally to N^(1/tau); tau at or below tau_greedy is greedy."""
    total = sum(visit_counts)
    if total < 1:
        raise ValueError("visit_count_action requires at least one visit")
    if tau <= tau_greedy:
        return max(range(len(visit_counts)), key=lambda i: (visit_counts[i], -i))
    # exponentiate in log space; zero-count edges carry zero probability
    logits = [math.log(n) / tau if n > 0 else -math.inf for n in visit_counts]
    top = max(logits)
    weights = [math.exp(l - top) for l in logits]
    z = sum(weights)
    u = rng.random() * z
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(visit_counts) - 1
