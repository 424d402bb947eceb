"""Search configuration and result records."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

RESCALE = "rescale"
ALPHAZERO = "alphazero"

UNVISITED_Q_MODES = ("zero", "value_eval", "parent_mean")


@dataclass
class SearchConfig:
    """All knobs for one tree search.

    ``algorithm`` selects the root controller: ``"rescale"`` (Gumbel root
    sampling + Sequential Halving, improved-policy in-tree selection) or
    ``"alphazero"`` (Dirichlet root noise + PUCT everywhere, visit-count
    final choice). The two ablation flags only apply to ``"rescale"``.
    """

    num_simulations: int = 24
    expansion_width: int = 8
    root_top_m: int = 8
    max_depth: int = 4
    c_visit: float = 50.0
    c_scale: float = 1.0
    algorithm: str = RESCALE
    gumbel_enabled: bool = True
    sequential_halving_enabled: bool = True
    puct_c: float = 1.25
    dirichlet_epsilon: float = 0.25
    dirichlet_alpha: float = 0.3
    temperature_tau: float = 1.0
    tau_greedy: float = 0.01
    puct_unvisited_q: str = "zero"
    rng_seed: int = 0
    subtree_reuse: bool = False
    record_backups: bool = False

    def __post_init__(self) -> None:
        if self.num_simulations < 1:
            raise ValueError("num_simulations must be >= 1")
        if self.expansion_width < 1:
            raise ValueError("expansion_width must be >= 1")
        if not 1 <= self.root_top_m <= self.expansion_width:
            raise ValueError("root_top_m must satisfy 1 <= M <= expansion_width")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.algorithm not in (RESCALE, ALPHAZERO):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.puct_unvisited_q not in UNVISITED_Q_MODES:
            raise ValueError(f"puct_unvisited_q must be one of {UNVISITED_Q_MODES}")
        if self.temperature_tau <= 0:
            raise ValueError("temperature_tau must be > 0")
        for name in ("c_visit", "c_scale", "puct_c", "dirichlet_epsilon",
                     "dirichlet_alpha", "temperature_tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.algorithm == RESCALE and self.sequential_halving_enabled:
            rounds = max(1, math.ceil(math.log2(self.root_top_m)))
            if self.num_simulations < rounds:
                raise ValueError(
                    f"num_simulations={self.num_simulations} is below the "
                    f"ceil(log2(M))={rounds} rounds Sequential Halving needs"
                )


@dataclass
class CostCounter:
    """Monotone counters for evaluator usage within a search or episode.

    ``action_chars`` totals the characters of every proposed action text,
    the engine's stand-in for generated-token accounting.
    """

    propose_calls: int = 0
    value_calls: int = 0
    action_chars: int = 0

    def add(self, other: "CostCounter") -> None:
        self.propose_calls += other.propose_calls
        self.value_calls += other.value_calls
        self.action_chars += other.action_chars

    def snapshot(self) -> "CostCounter":
        return CostCounter(self.propose_calls, self.value_calls, self.action_chars)


@dataclass(frozen=True)
class RootChildStat:
    """Per-root-child diagnostics; ``gumbel`` is the frozen draw used for f."""

    action: str
    prior: float
    visit_count: int
    mean_value: float
    root_score: float
    gumbel: float = 0.0


@dataclass
class SearchResult:
    chosen_action: str
    root_child_stats: list[RootChildStat]
    simulations_run: int
    nodes_expanded: int
    evaluator_calls: tuple[int, int]
    cost: CostCounter

    @property
    def max_root_visit_fraction(self) -> float:
        total = sum(s.visit_count for s in self.root_child_stats)
        if total == 0:
            return 1.0
        return max(s.visit_count for s in self.root_child_stats) / total

    def to_json(self) -> str:
        """Canonical serialization, stable byte-for-byte across identical runs."""
        return json.dumps(dataclasses.asdict(self), sort_keys=True)
