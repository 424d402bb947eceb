"""Wire-protocol conformance checks driven through the real remote client.

``stub-check`` exercises an endpoint exactly the way a search would: every
request goes through :class:`RemoteEvaluator`, so a pass means the full
client path (HTTP, schema validation, logprob conversion, clamping) agrees
with the server.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .evaluators import RemoteEvaluator


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def run_scripted_check(endpoint: str, fixture_path: str) -> list[CheckResult]:
    """Replay every fixture exchange and compare against the canned response."""
    with open(fixture_path, encoding="utf-8") as fh:
        fixture = json.load(fh)
    client = RemoteEvaluator(endpoint)
    results = []
    try:
        for index, exchange in enumerate(fixture["exchanges"]):
            request = exchange["request"]
            expected = exchange["response"]
            name = f"exchange {index}: {request['path']}"
            try:
                if request["path"] == "/v1/propose":
                    body = request["body"]
                    proposals = client.propose(body["state"], body["w"])
                    want = [(a["text"], math.exp(a["logprob"]))
                            for a in expected["actions"]]
                    got = [(p.action_text, p.raw_prob) for p in proposals]
                    ok = (len(got) == len(want)
                          and all(gt == wt and _close(gp, wp)
                                  for (gt, gp), (wt, wp) in zip(got, want)))
                    detail = "" if ok else f"expected {want}, got {got}"
                elif request["path"] == "/v1/value":
                    value = client.value(request["body"]["state"])
                    want_value = min(1.0, max(0.0, float(expected["value"])))
                    ok = _close(value, want_value)
                    detail = "" if ok else f"expected {want_value}, got {value}"
                else:
                    ok, detail = False, f"unknown path {request['path']!r}"
            except Exception as exc:  # report, don't abort the remaining checks
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(name, ok, detail))
    finally:
        client.close()
    return results


def run_game24_check(endpoint: str) -> list[CheckResult]:
    """Known-answer probes for a server running in game24-oracle mode."""
    client = RemoteEvaluator(endpoint)
    results = []
    try:
        for state, expected in (("6 6 6 6", 1.0), ("1 1 1 1", 0.0), ("24", 1.0)):
            try:
                value = client.value(state)
                ok = _close(value, expected)
                detail = "" if ok else f"expected {expected}, got {value}"
            except Exception as exc:
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(f"value({state!r}) == {expected}", ok, detail))

        try:
            proposals = client.propose("6 6 6 6", 2)
            ok = (len(proposals) == 2
                  and all(p.raw_prob > 0 and math.isfinite(p.raw_prob)
                          for p in proposals))
            detail = "" if ok else f"got {proposals}"
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult("propose('6 6 6 6', w=2) -> 2 finite actions",
                                   ok, detail))
    finally:
        client.close()
    return results
