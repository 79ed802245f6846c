"""Process persistence: construction specs, not materialized columns.

Stage columns are exponential objects, so files carry only what rebuilds
them deterministically: the parameter sequence for the slow-rate family,
or the estimator configs plus budgets for the adversary.  Loading
re-runs the construction, so a load always re-validates every stage
invariant.
"""

from __future__ import annotations

import json

from .process import ProcessHandle


def process_to_spec(p: ProcessHandle) -> dict:
    return dict(p.meta)


def process_from_spec(spec: dict) -> ProcessHandle:
    kind = spec.get("kind")
    if kind == "slowrate":
        from .slowrate import build_slowrate_process, KSequence
        return build_slowrate_process(
            KSequence(spec["k"]), spec.get("stages"),
            pattern_cap=spec.get("pattern_cap"))
    if kind == "adversary":
        from .adversary import build_adversary, EvalBudgets
        from .estimators import estimator_from_config
        ests = [estimator_from_config(c) for c in spec["estimators"]]
        handle, _ = build_adversary(
            ests, spec["stages"], EvalBudgets.from_json(spec["budgets"]),
            pattern_cap=spec.get("pattern_cap"))
        return handle
    raise ValueError(f"unknown process kind {kind!r}")


def rebuild_with_trace(spec: dict):
    """Adversary rebuild that also returns the trace and live estimators."""
    from .adversary import build_adversary, EvalBudgets
    from .estimators import estimator_from_config
    if spec.get("kind") != "adversary":
        raise ValueError("trace rebuild only applies to adversary specs")
    ests = [estimator_from_config(c) for c in spec["estimators"]]
    handle, trace = build_adversary(
        ests, spec["stages"], EvalBudgets.from_json(spec["budgets"]),
        pattern_cap=spec.get("pattern_cap"))
    return handle, trace, ests


def save_process(p: ProcessHandle, path) -> None:
    with open(path, "w") as fh:
        json.dump(process_to_spec(p), fh, indent=2)


def load_process(path) -> ProcessHandle:
    with open(path) as fh:
        return process_from_spec(json.load(fh))
