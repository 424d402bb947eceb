"""Tree-search decoding with Gumbel root sampling and Sequential Halving."""

from .config import (ALPHAZERO, RESCALE, CostCounter, RootChildStat,
                     SearchConfig, SearchResult)
from .search import (SearchAbortedError, Trajectory, decode_episode,
                     run_search, run_simulation)
from .tree import SearchTree

__all__ = [
    "ALPHAZERO",
    "RESCALE",
    "CostCounter",
    "RootChildStat",
    "SearchAbortedError",
    "SearchConfig",
    "SearchResult",
    "SearchTree",
    "Trajectory",
    "decode_episode",
    "run_search",
    "run_simulation",
]
