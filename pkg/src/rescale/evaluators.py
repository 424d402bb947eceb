"""Policy/value evaluator backends behind one text-based contract.

An evaluator never sees environment objects, only canonical state text, so
the in-process oracles and the remote HTTP client are interchangeable from
the search's point of view. Values returned to the search are always
clamped to [0, 1].
"""

from __future__ import annotations

import logging
import math
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass

import httpx

from .config import CostCounter
from .envs.base import Environment
from .rng import keyed_normal

logger = logging.getLogger(__name__)


class EvaluatorError(RuntimeError):
    """Evaluator backend failure; aborts the search that triggered it."""


class ProtocolError(EvaluatorError):
    """Remote response violated the wire protocol."""


@dataclass(frozen=True)
class Proposal:
    action_text: str
    raw_prob: float


class Evaluator(ABC):
    """Contract: propose candidate actions for a state, value a state.

    ``raw_prob`` need not sum to one across proposals; the search merges
    duplicates and renormalizes. ``value`` must land in [0, 1].
    """

    @abstractmethod
    def propose(self, state_text: str, w: int, rng=None) -> list[Proposal]: ...

    @abstractmethod
    def value(self, state_text: str) -> float: ...


def _softmax_proposals(scored: list[tuple[str, float]], w: int,
                       temperature: float) -> list[Proposal]:
    temp = max(temperature, 1e-9)
    top = max(s for _, s in scored)
    weights = [(text, math.exp((s - top) / temp)) for text, s in scored]
    total = sum(wt for _, wt in weights)
    ranked = sorted(
        ((text, wt / total) for text, wt in weights),
        key=lambda item: (-item[1], item[0]),
    )
    return [Proposal(text, prob) for text, prob in ranked[:w]]


class OracleEvaluator(Evaluator):
    """Ground-truth backend: exact environment values, softmax-of-quality priors.

    Proposal scores are beta * oracle(child) + state-keyed Gaussian noise
    (the usual "confident but miscalibrated" prior), unless the environment
    supplies its own logits, in which case those win. All draws are pure
    functions of (state, action, seed): calling twice changes nothing.
    """

    def __init__(self, env: Environment, beta: float = 6.0, sigma_prior: float = 1.0,
                 temperature: float = 1.0, seed: int = 0):
        self.env = env
        self.beta = beta
        self.sigma_prior = sigma_prior
        self.temperature = temperature
        self.seed = seed

    def propose(self, state_text: str, w: int, rng=None) -> list[Proposal]:
        state = self.env.parse_state(state_text)
        if self.env.is_terminal(state):
            raise EvaluatorError(f"propose on terminal state {state_text!r}")
        scored = self.env.prior_logits(state)
        if scored is None:
            scored = []
            for text, nxt in self.env.legal_actions(state):
                noise = self.sigma_prior * keyed_normal(
                    self.seed, "prior", f"{state_text}|{text}")
                scored.append((text, self.beta * self._state_value(nxt) + noise))
        if not scored:
            raise EvaluatorError(f"no legal actions for {state_text!r}")
        return _softmax_proposals(scored, w, self.temperature)

    def value(self, state_text: str) -> float:
        state = self.env.parse_state(state_text)
        return self._state_value(state)

    def _state_value(self, state) -> float:
        return min(1.0, max(0.0, self.env.oracle_value(state)))


class NoisyOracleEvaluator(OracleEvaluator):
    """Oracle values corrupted by state-keyed Gaussian noise, clamped to [0, 1].

    The noise is a fixed function of (canonical state text, seed), like the
    error surface of a trained-but-imperfect value network: re-querying the
    same state always returns the same number.
    """

    def __init__(self, env: Environment, sigma_noise: float, **kwargs):
        if sigma_noise < 0:
            raise ValueError("sigma_noise must be >= 0")
        super().__init__(env, **kwargs)
        self.sigma_noise = sigma_noise

    def value(self, state_text: str) -> float:
        exact = super().value(state_text)
        if self.sigma_noise == 0:
            return exact
        noisy = exact + self.sigma_noise * keyed_normal(self.seed, "value", state_text)
        return min(1.0, max(0.0, noisy))


class RemoteEvaluator(Evaluator):
    """HTTP client for the /v1/propose + /v1/value wire protocol.

    The server reports logprobs; they are exponentiated client-side. A
    bounded semaphore caps concurrent in-flight requests, so one client may
    serve many episodes at once.
    """

    def __init__(self, endpoint: str, temperature: float = 1.0,
                 timeout: float = 30.0, max_attempts: int = 3,
                 backoff: float = 0.25, max_in_flight: int = 8):
        self.endpoint = endpoint.rstrip("/")
        self.temperature = temperature
        self.max_attempts = max_attempts
        self.backoff = backoff
        self._client = httpx.Client(timeout=timeout)
        self._gate = threading.Semaphore(max_in_flight)

    def close(self) -> None:
        self._client.close()

    def _post(self, path: str, payload: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                with self._gate:
                    response = self._client.post(self.endpoint + path, json=payload)
                break
            except httpx.HTTPError as exc:
                last_exc = exc
                if attempt + 1 < self.max_attempts:
                    time.sleep(self.backoff * (2 ** attempt))
        else:
            raise EvaluatorError(
                f"{path} failed after {self.max_attempts} attempts: {last_exc}")
        try:
            body = response.json()
        except ValueError:
            raise ProtocolError(
                f"{path}: non-JSON response: {response.text[:200]!r}")
        if response.status_code != 200:
            raise EvaluatorError(
                f"{path}: HTTP {response.status_code}: {str(body)[:200]}")
        if isinstance(body, dict) and "error" in body:
            raise EvaluatorError(f"{path}: server error: {body['error']!r}")
        if not isinstance(body, dict):
            raise ProtocolError(f"{path}: expected object, got {str(body)[:200]!r}")
        return body

    def propose(self, state_text: str, w: int, rng=None) -> list[Proposal]:
        body = self._post("/v1/propose", {
            "state": state_text, "w": int(w), "temperature": self.temperature,
        })
        actions = body.get("actions")
        if not isinstance(actions, list):
            raise ProtocolError(f"/v1/propose: missing actions list in {str(body)[:200]!r}")
        if not actions:
            raise ProtocolError(f"/v1/propose: empty action list for {state_text!r}")
        proposals = []
        for entry in actions:
            if (not isinstance(entry, dict) or not isinstance(entry.get("text"), str)
                    or not isinstance(entry.get("logprob"), (int, float))
                    or isinstance(entry.get("logprob"), bool)):
                raise ProtocolError(f"/v1/propose: malformed action {str(entry)[:200]!r}")
            logprob = float(entry["logprob"])
            if not math.isfinite(logprob):
                raise ProtocolError(f"/v1/propose: non-finite logprob in {str(entry)[:200]!r}")
            proposals.append(Proposal(entry["text"], math.exp(logprob)))
        return proposals

    def value(self, state_text: str) -> float:
        body = self._post("/v1/value", {"state": state_text})
        raw = body.get("value")
        if not isinstance(raw, (int, float)) or isinstance(raw, bool) or not math.isfinite(float(raw)):
            raise ProtocolError(f"/v1/value: malformed value in {str(body)[:200]!r}")
        value = float(raw)
        if not 0.0 <= value <= 1.0:
            logger.warning("remote value %.6g outside [0, 1]; clamping", value)
            value = min(1.0, max(0.0, value))
        return value


class CountingEvaluator(Evaluator):
    """Pass-through wrapper that tallies contract invocations in a CostCounter."""

    def __init__(self, inner: Evaluator, counter):
        self.inner = inner
        self.counter = counter

    def propose(self, state_text: str, w: int, rng=None) -> list[Proposal]:
        proposals = self.inner.propose(state_text, w, rng)
        self.counter.propose_calls += 1
        self.counter.action_chars += sum(len(p.action_text) for p in proposals)
        return proposals

    def value(self, state_text: str) -> float:
        result = self.inner.value(state_text)
        self.counter.value_calls += 1
        return result


class MemoizingEvaluator(Evaluator):
    """Caches propose/value by state text to reuse work across decode steps.

    Counting happens beneath the cache (``bind_counter``), so a search's
    CostCounter reflects calls that actually reached the backend; cache hits
    are free, which is the point of cross-step reuse.
    """

    def __init__(self, inner: Evaluator):
        self.inner = CountingEvaluator(inner, CostCounter())
        self._propose_cache: dict[tuple[str, int], list[Proposal]] = {}
        self._value_cache: dict[str, float] = {}

    def bind_counter(self, counter) -> None:
        self.inner.counter = counter

    def propose(self, state_text: str, w: int, rng=None) -> list[Proposal]:
        key = (state_text, w)
        if key not in self._propose_cache:
            self._propose_cache[key] = self.inner.propose(state_text, w, rng)
        return self._propose_cache[key]

    def value(self, state_text: str) -> float:
        if state_text not in self._value_cache:
            self._value_cache[state_text] = self.inner.value(state_text)
        return self._value_cache[state_text]
