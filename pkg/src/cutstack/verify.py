"""Invariant suite shared by the CLI verify command and the test suite.

Each check returns (name, passed, detail); the CLI prints one line per
check and fails on any red.  Checks re-derive everything being asserted:
label recursion from run profiles and extraction, level geometry from
materialized columns, probabilities from independent counting.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import (Dyadic, ONE, intersect_sets, merge_intervals,
                     set_contains, total_width)
from .columns import double, materialize
from .labels import brute_count
from .process import ProcessHandle, block_prob, block_prob_limit, entropy_profile
from .slowrate import (KSequence, closed_form_probability,
                       early_block_intersection_measure,
                       early_block_level_count)
from .adversary import StageTrace, entropy_spotcheck, verify_witness


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


MATERIALIZE_CHECK_LIMIT = 1 << 16


def _stage_bookkeeping(p: ProcessHandle) -> CheckResult:
    if p.kind == "slowrate":
        for n in range(p.depth + 1):
            kn = p.k[n]
            ok = (p.width(n) == Dyadic.pow2(-kn)
                  and p.support_measure(n) == ONE - Dyadic.pow2(-(n + 1))
                  and p.height(n) == (1 << kn) - (1 << (kn - n - 1)))
            if not ok:
                return CheckResult("stage-bookkeeping", False, f"stage {n}")
    else:
        for n in range(p.depth + 1):
            col = p.stage(n)
            if col.width != Dyadic.pow2(-p.k[n]):
                return CheckResult("stage-bookkeeping", False, f"stage {n} width")
            if col.support_measure != total_width(col.support):
                return CheckResult("stage-bookkeeping", False, f"stage {n} support")
    return CheckResult("stage-bookkeeping", True)


def _extending(p: ProcessHandle) -> CheckResult:
    for n in range(p.depth):
        if not set_contains(p.stage(n + 1).support, p.stage(n).support):
            return CheckResult("extending-support", False, f"stage {n}->{n + 1}")
    return CheckResult("extending-support", True)


def _label_recursion(p: ProcessHandle) -> CheckResult:
    """Slow-rate label recursion, checked on run profiles plus extraction
    (exactly, at any height) and by literal equality when materializable."""
    if p.kind != "slowrate":
        return CheckResult("label-recursion", True, "n/a")
    for n in range(1, p.depth + 1):
        kn, kp = p.k[n], p.k[n - 1]
        reps, pad = 1 << (kn - kp), 1 << (kn - (n + 1))
        lab, prev = p.stage_label(n), p.stage_label(n - 1)
        if lab.length != reps * prev.length + pad:
            return CheckResult("label-recursion", False, f"stage {n} length")
        if lab.length <= MATERIALIZE_CHECK_LIMIT:
            if lab.materialize() != prev.materialize() * reps + "0" * pad:
                return CheckResult("label-recursion", False, f"stage {n} literal")
        else:
            prof, prev_prof = lab.run_profile("0"), prev.run_profile("0")
            if prof.trail != prev_prof.trail + pad:
                return CheckResult("label-recursion", False, f"stage {n} trail")
            head = lab.extract(1, min(prev.length, 4096))
            if head != prev.extract(1, min(prev.length, 4096)):
                return CheckResult("label-recursion", False, f"stage {n} head")
    return CheckResult("label-recursion", True)


def _grammar_vs_brute(p: ProcessHandle, rng, patterns: int = 40) -> CheckResult:
    for n in range(p.depth + 1):
        lab = p.stage_label(n)
        if lab.length > MATERIALIZE_CHECK_LIMIT:
            break
        flat = lab.materialize()
        for _ in range(patterns):
            ln = rng.randint(1, min(12, lab.length))
            pat = "".join(rng.choice("01") for _ in range(ln))
            if lab.count_occurrences(pat) != brute_count(flat, pat):
                return CheckResult("grammar-vs-brute", False,
                                   f"stage {n} pattern {pat}")
            start = rng.randint(1, lab.length - ln + 1)
            if lab.extract(start, ln) != flat[start - 1:start - 1 + ln]:
                return CheckResult("grammar-vs-brute", False,
                                   f"stage {n} extract@{start}")
    return CheckResult("grammar-vs-brute", True)


def _level_geometry(p: ProcessHandle) -> CheckResult:
    """Shift-and-scale identity of doubling at materializable scale: block b
    of the 2^k-fold doubling restricts each level set to a width-2^-k copy."""
    col = p.stage(min(p.depth, 2))
    if col.height > 1 << 10:
        col = p.stage(0)
    k = 3
    big = double(col, k)
    mat, big_mat = materialize(col), materialize(big)
    h = col.height
    rng = random.Random(7)
    for _ in range(20):
        block = rng.randrange(1 << k)
        levels = sorted(rng.sample(range(1, h + 1), min(h, rng.randint(1, h))))
        base = merge_intervals([mat[j - 1][0] for j in levels])
        shifted = [big_mat[block * h + j - 1][0] for j in levels]
        inter = intersect_sets(base, [iv for iv, _ in big_mat[block * h:(block + 1) * h]])
        if merge_intervals(shifted) != inter:
            return CheckResult("level-geometry", False, "level-set mismatch")
        if total_width(shifted) != total_width(base).scale2(-k):
            return CheckResult("level-geometry", False, "measure mismatch")
    return CheckResult("level-geometry", True)


def _closed_forms(p: ProcessHandle) -> CheckResult:
    if p.kind != "slowrate" or p.depth < 2:
        return CheckResult("closed-forms", True, "n/a")
    k = KSequence(p.k)
    ms = k.milestones()
    one_len = 1 << (p.k[1] - 1)
    checks = [("one-run", one_len)]
    checks += [("zero-run", ms[n]) for n in range(1, p.depth)]
    for kind, m in checks:
        value = closed_form_probability(k, kind, m)
        pattern = ("0" + "1" * m + "0") if kind == "one-run" else ("1" + "0" * m + "1")
        if len(pattern) > 4096:
            continue
        eps = Dyadic.pow2(-(p.depth - 1))
        try:
            enc = block_prob_limit(p, pattern, eps)
        except Exception:
            continue
        if not (enc.lo <= value <= enc.hi):
            return CheckResult("closed-forms", False, f"{kind} m={m}")
    return CheckResult("closed-forms", True)


def _early_blocks(p: ProcessHandle) -> CheckResult:
    """Product formula vs direct measure of the early-block intersection,
    at materializable scale."""
    if p.kind != "slowrate":
        return CheckResult("early-blocks", True, "n/a")
    n_max = max(n for n in range(p.depth + 1)
                if p.height(n) <= MATERIALIZE_CHECK_LIMIT)
    k = KSequence(p.k)
    current = None
    for n in range(n_max + 1):
        mat = materialize(p.stage(n))
        cut = early_block_level_count(p, n)
        block = merge_intervals([iv for iv, _ in mat[:cut]])
        current = block if current is None else intersect_sets(current, block)
        if total_width(current) != early_block_intersection_measure(k, n):
            return CheckResult("early-blocks", False, f"stage {n}")
    return CheckResult("early-blocks", True)


def _entropy(p: ProcessHandle) -> CheckResult:
    prof = entropy_profile(p)
    for n in range(2, len(prof) - 1):
        if not prof[n + 1] < prof[n]:
            return CheckResult("entropy-profile", False, f"not decreasing at {n}")
    for n, v in enumerate(prof):
        if v <= 0 or v > Fraction(p.k[n], 1 << (p.k[n] - 1)):
            return CheckResult("entropy-profile", False, f"bound at {n}")
    spot = entropy_spotcheck(p, samples=8)
    if not all(r["passed"] for r in spot):
        return CheckResult("entropy-profile", False, "spot check")
    return CheckResult("entropy-profile", True)


def run_process_checks(p: ProcessHandle, trace: StageTrace | None = None,
                       estimators=None, seed: int = 0) -> list[CheckResult]:
    rng = random.Random(seed)
    checks = [
        _stage_bookkeeping(p),
        _extending(p),
        _label_recursion(p),
        _grammar_vs_brute(p, rng),
        _level_geometry(p),
        _closed_forms(p),
        _early_blocks(p),
        _entropy(p),
    ]
    if trace is not None:
        ok = all(verify_witness(p, trace, w, estimators)
                 for w in trace.witnesses)
        checks.append(CheckResult(
            "witnesses", ok, f"{len(trace.witnesses)} rechecked"))
    return checks
