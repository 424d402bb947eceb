"""Seeding discipline: counter-derived generator streams and state-keyed noise.

All randomness in a run flows from a single 64-bit seed. Independent streams
(per problem, per decode step, per search) are derived by feeding the seed
plus a tuple of integer counters into ``numpy.random.SeedSequence``, so that
results never depend on execution order or parallel scheduling.

Evaluator noise is not drawn from a stream at all: a "trained" value network
is a fixed function of the state, so its error must be reproducible per
state. ``keyed_normal``/``keyed_uniform`` hash ``(seed, tag, text)`` with
BLAKE2 and map the digest through the inverse normal CDF.
"""

from __future__ import annotations

import hashlib
import math
from statistics import NormalDist

import numpy as np

_STD_NORMAL = NormalDist()
_U64 = float(1 << 64)


def derive_rng(seed: int, *counters: int) -> np.random.Generator:
    """A generator stream for ``(seed, *counters)``, independent across keys."""
    entropy = (int(seed) & 0xFFFFFFFFFFFFFFFF,) + tuple(int(c) for c in counters)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _keyed_u64(seed: int, tag: str, text: str) -> int:
    payload = f"{int(seed)}\x1f{tag}\x1f{text}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def keyed_uniform(seed: int, tag: str, text: str) -> float:
    """Deterministic uniform in (0, 1), a pure function of the key."""
    return (_keyed_u64(seed, tag, text) + 0.5) / _U64


def keyed_normal(seed: int, tag: str, text: str) -> float:
    """Deterministic standard-normal draw, a pure function of the key."""
    return _STD_NORMAL.inv_cdf(keyed_uniform(seed, tag, text))


def gumbel_from_uniform(u: float) -> float:
    """Map a uniform in (0, 1) to a standard Gumbel(0, 1) variate."""
    u = min(max(u, 1e-300), 1.0 - 1e-16)
    return -math.log(-math.log(u))
