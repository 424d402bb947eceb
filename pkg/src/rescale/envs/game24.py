"""Game24: combine four numbers with + - * / to reach exactly 24.

All arithmetic is exact rational (``fractions.Fraction``); correctness never
touches floating point. A state is the multiset of remaining numbers; the
step history is carried along for display but excluded from state identity,
so the canonical text (sorted numbers, space-separated) stays injective.
"""

from __future__ import annotations

import functools
from fractions import Fraction

import numpy as np

from .base import Environment

TARGET = Fraction(24)


def render_rational(x: Fraction) -> str:
    """Canonical text for a reduced rational: '24', '-1', '3/2'."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Game24State:
    """Immutable multiset of remaining rationals plus the steps that led here."""

    __slots__ = ("numbers", "history")

    def __init__(self, numbers, history: tuple[str, ...] = ()):
        self.numbers: tuple[Fraction, ...] = tuple(sorted(Fraction(n) for n in numbers))
        self.history = history

    @property
    def terminal(self) -> bool:
        return len(self.numbers) == 1

    def __eq__(self, other) -> bool:
        return isinstance(other, Game24State) and self.numbers == other.numbers

    def __hash__(self) -> int:
        return hash(self.numbers)

    def __repr__(self) -> str:
        return f"Game24State({' '.join(render_rational(n) for n in self.numbers)})"


def _pair_results(x: Fraction, y: Fraction) -> list[Fraction]:
    results = [x + y, x - y, y - x, x * y]
    if y != 0:
        results.append(x / y)
    if x != 0:
        results.append(y / x)
    return results


def _op_symbolic(x: Fraction, y: Fraction):
    """(text lhs, op, text rhs, result) in the fixed enumeration order."""
    ops = [
        (x, "+", y, x + y),
        (x, "-", y, x - y),
        (y, "-", x, y - x),
        (x, "*", y, x * y),
    ]
    if y != 0:
        ops.append((x, "/", y, x / y))
    if x != 0:
        ops.append((y, "/", x, y / x))
    return ops


def game24_legal_actions(state: Game24State) -> list[tuple[str, Game24State]]:
    """Every combine-two-numbers step, deduplicated by resulting multiset.

    Action text format: ``"x op y = z (left: a, b, c)"`` with canonical
    rational rendering; the first action (in pair/op enumeration order)
    producing a given next multiset wins the dedup.
    """
    if state.terminal:
        return []
    nums = state.numbers
    seen: set[tuple[Fraction, ...]] = set()
    actions: list[tuple[str, Game24State]] = []
    for i in range(len(nums)):
        for j in range(i + 1, len(nums)):
            x, y = nums[i], nums[j]
            rest = nums[:i] + nums[i + 1:j] + nums[j + 1:]
            for lhs, op, rhs, z in _op_symbolic(x, y):
                nxt_numbers = tuple(sorted(rest + (z,)))
                if nxt_numbers in seen:
                    continue
                seen.add(nxt_numbers)
                left = ", ".join(render_rational(n) for n in nxt_numbers)
                text = (f"{render_rational(lhs)} {op} {render_rational(rhs)} "
                        f"= {render_rational(z)} (left: {left})")
                actions.append((text, Game24State(nxt_numbers, state.history + (text,))))
    return actions


def game24_reward(state: Game24State) -> int:
    if not state.terminal:
        raise ValueError("reward is defined on terminal states only")
    return 1 if state.numbers[0] == TARGET else 0


@functools.lru_cache(maxsize=1_000_000)
def _solvable(numbers: tuple[Fraction, ...]) -> bool:
    if len(numbers) == 1:
        return numbers[0] == TARGET
    for i in range(len(numbers)):
        for j in range(i + 1, len(numbers)):
            rest = numbers[:i] + numbers[i + 1:j] + numbers[j + 1:]
            for z in _pair_results(numbers[i], numbers[j]):
                if _solvable(tuple(sorted(rest + (z,)))):
                    return True
    return False


def game24_solvable(numbers) -> bool:
    """Exhaustive check (memoized) that some sequence of steps reaches 24."""
    return _solvable(tuple(sorted(Fraction(n) for n in numbers)))


class Game24Env(Environment):
    def canonical_text(self, state: Game24State) -> str:
        return " ".join(render_rational(n) for n in state.numbers)

    def parse_state(self, text: str) -> Game24State:
        tokens = text.split()
        if not 1 <= len(tokens) <= 4:
            raise ValueError(f"bad Game24 state text {text!r}")
        return Game24State(Fraction(t) for t in tokens)

    def is_terminal(self, state: Game24State) -> bool:
        return state.terminal

    def reward(self, state: Game24State) -> float:
        return float(game24_reward(state)) if state.terminal else 0.0

    def legal_actions(self, state: Game24State) -> list[tuple[str, Game24State]]:
        return game24_legal_actions(state)

    def state_depth(self, state: Game24State) -> int:
        return len(state.history)

    def oracle_value(self, state: Game24State) -> float:
        return 1.0 if game24_solvable(state.numbers) else 0.0


def generate_fixture(count: int, seed: int, low: int = 1, high: int = 13):
    """Deterministic problem list: ``count`` draws of four ints in [low, high].

    Returns (instances, solvable_bits); used once to derive the checked-in
    fixture files and re-run by tests to confirm they match.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    instances = []
    bits = []
    for _ in range(count):
        nums = sorted(int(x) for x in rng.integers(low, high + 1, size=4))
        instances.append(nums)
        bits.append(1 if game24_solvable(nums) else 0)
    return instances, bits


def load_fixture(path) -> list[list[int]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append([int(tok) for tok in line.split()])
    return out
