"""Environment contract for sequential decision processes driven by the search."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any


class InvalidActionError(ValueError):
    """Raised by ``step`` when an action text has no legal transition."""


class Environment(ABC):
    """A deterministic episodic environment.

    States are opaque immutable values; ``canonical_text`` must be injective
    over reachable states because evaluators, duplicate merging, and the
    wire protocol all key on it.
    """

    @abstractmethod
    def canonical_text(self, state: Any) -> str: ...

    @abstractmethod
    def parse_state(self, text: str) -> Any:
        """Inverse of ``canonical_text`` for reachable states."""

    @abstractmethod
    def is_terminal(self, state: Any) -> bool: ...

    @abstractmethod
    def reward(self, state: Any) -> float:
        """Task reward in [0, 1]; sparse environments return 0 off-terminal."""

    @abstractmethod
    def legal_actions(self, state: Any) -> list[tuple[str, Any]]:
        """All (action_text, next_state) pairs from a non-terminal state."""

    @abstractmethod
    def state_depth(self, state: Any) -> int:
        """Number of actions taken to reach the state from an episode start."""

    def step(self, state: Any, action_text: str) -> Any:
        for text, nxt in self.legal_actions(state):
            if text == action_text:
                return nxt
        raise InvalidActionError(f"no legal action {action_text!r} in state "
                                 f"{self.canonical_text(state)!r}")

    def is_stop_action(self, action_text: str) -> bool:
        """Whether committing this action ends the episode regardless of state."""
        return False

    def oracle_value(self, state: Any) -> float:
        """Ground-truth state value for oracle evaluators, in [0, 1]."""
        raise NotImplementedError(f"{type(self).__name__} has no oracle")

    def prior_logits(self, state: Any) -> list[tuple[str, float]] | None:
        """Environment-supplied proposal logits, or None if the evaluator
        should construct its own from oracle values."""
        return None
