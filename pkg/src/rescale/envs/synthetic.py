"""Synthetic full b-ary tree MDP with a DP oracle.

The generator plants a latent quality q on every node via a logit-space
random walk down the tree; leaves draw a binary reward ~ Bernoulli(q).
Two value tables come out of the DP max-backup:

* ``optimal_values``   — over realized leaf rewards (binary: is a reward-1
  leaf reachable);
* ``quality_values``   — over leaf qualities (graded: the best success
  probability reachable), the stand-in for a well-trained value network.

Prior logits mimic an LLM policy that correlates with quality but is
miscalibrated: beta * quality + Gaussian noise. Regeneration is a pure
function of (b, D, seed, beta, sigma_prior) plus the walk parameters.
"""

from __future__ import annotations

import math

import numpy as np

from .base import Environment


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


class SyntheticTreeMDP:
    """Arrays indexed by level-order node id (root = 0)."""

    def __init__(
        self,
        branching: int,
        depth: int,
        seed,
        beta: float = 2.0,
        sigma_prior: float = 1.0,
        q_start: float = 0.5,
        branch_spread: float = 0.5,
        quality_drift: float = -2.6,
        quality_step: float = 1.2,
        root_separation: float | None = None,
    ):
        if branching < 2 or depth < 1:
            raise ValueError("branching must be >= 2 and depth >= 1")
        self.branching = branching
        self.depth = depth
        self.seed = seed
        self.beta = beta
        self.sigma_prior = sigma_prior
        self.q_start = q_start
        self.branch_spread = branch_spread
        self.quality_drift = quality_drift
        self.quality_step = quality_step
        self.root_separation = root_separation

        b, dd = branching, depth
        self.level_sizes = [b**k for k in range(dd + 1)]
        self.level_starts = np.cumsum([0] + self.level_sizes).tolist()
        self.num_nodes = self.level_starts[-1]

        entropy = seed if isinstance(seed, tuple) else (int(seed),)
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy + (b, dd)))
        )
        self._generate(rng)
        seed_text = ".".join(str(s) for s in entropy)
        self.tag = f"{seed_text}-{b}x{dd}"

    def _generate(self, rng) -> None:
        b, dd = self.branching, self.depth
        logits = np.empty(self.num_nodes)
        logits[0] = _logit(self.q_start)
        if self.root_separation is None:
            # Level 1 is the decision that matters: a wide driftless spread
            # separates branch qualities. Deeper levels drift down with
            # smaller steps, so leaf success stays sparse and the depth-1
            # ordering mostly survives the max-backup.
            for level in range(1, dd + 1):
                lo, hi = self.level_starts[level], self.level_starts[level + 1]
                parents = np.repeat(
                    logits[self.level_starts[level - 1]:lo], b)
                if level == 1:
                    steps = self.branch_spread * rng.standard_normal(hi - lo)
                else:
                    steps = self.quality_drift + self.quality_step * rng.standard_normal(hi - lo)
                logits[lo:hi] = parents + steps
            quality = 1.0 / (1.0 + np.exp(-logits))
        else:
            # Separated mode: depth-1 children get qualities with pairwise
            # gaps >= root_separation; deeper nodes inherit them exactly, so
            # every subtree's DP quality equals its depth-1 ancestor's.
            sep = self.root_separation
            span = (b - 1) * sep
            jitter = rng.uniform(0.0, 0.05 * sep, size=b - 1)
            lo_q = rng.uniform(0.05, 0.95 - span - float(jitter.sum()))
            ladder = lo_q + np.concatenate([[0.0], np.cumsum(sep + jitter)])
            order = rng.permutation(b)
            quality = np.empty(self.num_nodes)
            quality[0] = float(ladder.max())
            quality[1:b + 1] = ladder[order]
            for level in range(2, dd + 1):
                lo, hi = self.level_starts[level], self.level_starts[level + 1]
                quality[lo:hi] = np.repeat(
                    quality[self.level_starts[level - 1]:lo], b)
        self.quality = quality

        leaf_lo = self.level_starts[dd]
        leaf_u = rng.random(self.num_nodes - leaf_lo)
        self.leaf_rewards = (leaf_u < quality[leaf_lo:]).astype(np.int8)

        self.quality_values = self._max_backup(quality[leaf_lo:].astype(float))
        self.optimal_values = self._max_backup(self.leaf_rewards.astype(float))

        prior_noise = rng.standard_normal(self.num_nodes)
        self.prior_logit = self.beta * self.quality_values + self.sigma_prior * prior_noise

    def _max_backup(self, leaf_values: np.ndarray) -> np.ndarray:
        b, dd = self.branching, self.depth
        values = np.empty(self.num_nodes)
        values[self.level_starts[dd]:] = leaf_values
        for level in range(dd - 1, -1, -1):
            lo, hi = self.level_starts[level], self.level_starts[level + 1]
            child_block = values[hi:self.level_starts[level + 2]]
            values[lo:hi] = child_block.reshape(hi - lo, b).max(axis=1)
        return values

    # -- structure helpers -------------------------------------------------

    def node_level(self, node: int) -> int:
        for level, start in enumerate(self.level_starts[1:]):
            if node < start:
                return level
        raise ValueError(f"node {node} out of range")

    def children(self, node: int) -> range:
        first = node * self.branching + 1
        return range(first, first + self.branching)

    def is_leaf(self, node: int) -> bool:
        return node >= self.level_starts[self.depth]

    def serialize(self) -> str:
        """Stable text form used by regeneration-determinism checks."""
        parts = [f"{self.tag};b={self.branching};D={self.depth}"]
        parts.append(",".join(repr(float(q)) for q in self.quality))
        parts.append(",".join(str(int(r)) for r in self.leaf_rewards))
        parts.append(",".join(repr(float(v)) for v in self.prior_logit))
        return "\n".join(parts)


def synth_generate(branching: int, depth: int, seed, beta: float = 2.0,
                   sigma_prior: float = 1.0, **kwargs) -> SyntheticTreeMDP:
    return SyntheticTreeMDP(branching, depth, seed, beta, sigma_prior, **kwargs)


def synth_optimal_values(mdp: SyntheticTreeMDP) -> np.ndarray:
    """Binary DP table over realized leaf rewards (max-backup)."""
    return mdp.optimal_values


class SyntheticEnv(Environment):
    """States are node ids of one generated tree.

    ``value_mode`` picks which DP table the oracle exposes: ``"quality"``
    (graded success probability; default, used by the scaling benchmark) or
    ``"realized"`` (binary reachability of a reward-1 leaf).
    """

    def __init__(self, mdp: SyntheticTreeMDP, value_mode: str = "quality"):
        if value_mode not in ("quality", "realized"):
            raise ValueError("value_mode must be 'quality' or 'realized'")
        self.mdp = mdp
        self.value_mode = value_mode
        self._prefix = f"t{mdp.tag}:n"

    @property
    def root_state(self) -> int:
        return 0

    def canonical_text(self, state: int) -> str:
        return f"{self._prefix}{state}"

    def parse_state(self, text: str) -> int:
        if not text.startswith(self._prefix):
            raise ValueError(f"state text {text!r} does not belong to tree {self.mdp.tag}")
        node = int(text[len(self._prefix):])
        if not 0 <= node < self.mdp.num_nodes:
            raise ValueError(f"node {node} out of range")
        return node

    def is_terminal(self, state: int) -> bool:
        return self.mdp.is_leaf(state)

    def reward(self, state: int) -> float:
        if not self.mdp.is_leaf(state):
            return 0.0
        leaf_lo = self.mdp.level_starts[self.mdp.depth]
        return float(self.mdp.leaf_rewards[state - leaf_lo])

    def legal_actions(self, state: int) -> list[tuple[str, int]]:
        if self.mdp.is_leaf(state):
            return []
        return [(f"a{k}", child) for k, child in enumerate(self.mdp.children(state))]

    def state_depth(self, state: int) -> int:
        return self.mdp.node_level(state)

    def oracle_value(self, state: int) -> float:
        table = (self.mdp.quality_values if self.value_mode == "quality"
                 else self.mdp.optimal_values)
        return float(table[state])

    def prior_logits(self, state: int) -> list[tuple[str, float]] | None:
        if self.mdp.is_leaf(state):
            return None
        return [(f"a{k}", float(self.mdp.prior_logit[child]))
                for k, child in enumerate(self.mdp.children(state))]
