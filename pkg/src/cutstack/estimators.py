"""Estimator contract, the lifted claim test, and built-in estimators.

An estimator is a partial map (x, k, y) -> rational that, once defined on
a prefix y, must return the same value on every extension of y
(prefix stability; sample size acts as a stopping time).  Black boxes
cannot be proven stable, so the harness checks it on randomized
extensions instead (``check_prefix_stability``).

The adversary consumes estimators through one question, the *claim*
test: does the estimator assert, on prefix y and for some precision
k <= budget, that the all-zero block 0^m has probability below
2^-(code+2)?  Formally: exists k with f(0^m, k, y) + 1/k < 2^-(code+2).
Budget exhaustion counts as "no claim", which only ever spares an
estimator, never falsifies it wrongly.

External estimators attach over a line protocol on stdin/stdout:
request ``EST x k y\\n``, response ``VAL p/q\\n`` or ``NOTYET\\n``.
"""

from __future__ import annotations

import select
import subprocess
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import Dyadic
from .process import ProcessHandle, block_prob_limit, InsufficientStages


class EstimatorError(ValueError):
    pass


@dataclass(frozen=True)
class EvalResult:
    status: str  # "defined" | "not-yet" | "budget-exhausted"
    value: Fraction | None = None

    @classmethod
    def defined(cls, value) -> "EvalResult":
        return cls("defined", Fraction(value))

    @classmethod
    def not_yet(cls) -> "EvalResult":
        return cls("not-yet")

    @classmethod
    def exhausted(cls) -> "EvalResult":
        return cls("budget-exhausted")

    @property
    def is_defined(self) -> bool:
        return self.status == "defined"


class Estimator:
    """Base class; subclasses implement evaluate().

    `nonnegative` declares that every defined value is >= 0, which lets
    the claim test skip precisions k <= 2^(code+2) outright (a pure
    search optimization, checked equivalent in tests).  `candidate_ks`
    may narrow the precision range further for the same reason.
    """

    name = "estimator"
    nonnegative = True

    def evaluate(self, x: str, k: int, y: str,
                 step_budget: int | None = None) -> EvalResult:
        raise NotImplementedError

    def candidate_ks(self, x: str, y: str, k_lo: int, k_hi: int):
        return range(k_lo, k_hi + 1)

    def config(self) -> dict:
        raise EstimatorError(f"{self.name} has no serializable config")


class ConstantEstimator(Estimator):
    """Answers the same rational immediately for every query."""

    def __init__(self, value, name: str | None = None):
        self.value = Fraction(value)
        self.name = name or f"constant[{self.value}]"
        self.nonnegative = self.value >= 0

    def evaluate(self, x, k, y, step_budget=None):
        return EvalResult.defined(self.value)

    def candidate_ks(self, x, y, k_lo, k_hi):
        # value is k-independent: if the largest k fails, all fail
        return range(k_hi, k_hi + 1) if k_lo <= k_hi else range(0)

    def config(self):
        return {"type": "constant", "value": str(self.value)}


GROWTH_RULES = {
    # prefix length required before answering (x, k); both rules freeze the
    # answer at the first qualifying prefix
    "quadratic": lambda k, xlen: k * k * (1 << xlen),
    "linear": lambda k, xlen: k * (1 << (xlen + 1)),
}


class EmpiricalEstimator(Estimator):
    """Window frequency of x in the first G(k,|x|) symbols, frozen there."""

    def __init__(self, growth: str = "quadratic"):
        if growth not in GROWTH_RULES:
            raise EstimatorError(f"unknown growth rule {growth!r}")
        self.growth = growth
        self._g = GROWTH_RULES[growth]
        self.name = f"empirical[{growth}]"

    def evaluate(self, x, k, y, step_budget=None):
        need = self._g(k, len(x))
        if step_budget is not None and need > step_budget:
            return EvalResult.exhausted()
        if len(y) < need:
            return EvalResult.not_yet()
        window = y[:need]
        count, i = 0, window.find(x)
        while i >= 0:
            count += 1
            i = window.find(x, i + 1)
        return EvalResult.defined(Fraction(count, need - len(x) + 1))

    def candidate_ks(self, x, y, k_lo, k_hi):
        return (k for k in range(k_lo, k_hi + 1)
                if self._g(k, len(x)) <= len(y))

    def config(self):
        return {"type": "empirical", "growth": self.growth}


class OracleEstimator(Estimator):
    """Positive control: answers exact enclosure midpoints of one known
    process, ignoring the sample.  Cannot be falsified on its own process;
    the adversary defeats it on the new process it builds instead.
    Returns not-yet when the bound process is too shallow for the
    requested precision."""

    def __init__(self, process: ProcessHandle, name: str = "oracle"):
        self.process = process
        self.name = name

    def evaluate(self, x, k, y, step_budget=None):
        eps = Dyadic.pow2(-(2 * k - 1).bit_length())  # <= 1/(2k)
        try:
            enc = block_prob_limit(self.process, x, eps)
        except InsufficientStages:
            return EvalResult.not_yet()
        return EvalResult.defined(enc.midpoint)

    def config(self):
        spec = self.process.meta
        return {"type": "oracle", "process": dict(spec)}


class SubprocessEstimator(Estimator):
    """Adapter for external estimators speaking the line protocol.

    One request per evaluate() call; a response timeout (seconds) maps to
    budget-exhausted.  External code is assumed prefix-stable; check it
    with check_prefix_stability.
    """

    def __init__(self, cmd, name: str | None = None, timeout: float | None = 30.0,
                 nonnegative: bool = False):
        self.cmd = list(cmd)
        self.name = name or f"subprocess[{self.cmd[0]}]"
        self.timeout = timeout
        self.nonnegative = nonnegative
        self._proc = None

    def _ensure(self):
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        return self._proc

    def evaluate(self, x, k, y, step_budget=None):
        proc = self._ensure()
        proc.stdin.write(f"EST {x} {k} {y}\n")
        proc.stdin.flush()
        if self.timeout is not None:
            ready, _, _ = select.select([proc.stdout], [], [], self.timeout)
            if not ready:
                return EvalResult.exhausted()
        line = proc.stdout.readline().strip()
        if line == "NOTYET":
            return EvalResult.not_yet()
        if line.startswith("VAL "):
            return EvalResult.defined(Fraction(line[4:]))
        raise EstimatorError(f"bad response from {self.name}: {line!r}")

    def close(self):
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)

    def config(self):
        return {"type": "subprocess", "cmd": self.cmd,
                "nonnegative": self.nonnegative}


def estimator_from_config(cfg: dict) -> Estimator:
    kind = cfg.get("type")
    if kind == "constant":
        return ConstantEstimator(Fraction(cfg["value"]))
    if kind == "empirical":
        return EmpiricalEstimator(cfg.get("growth", "quadratic"))
    if kind == "oracle":
        from .persist import process_from_spec
        return OracleEstimator(process_from_spec(cfg["process"]))
    if kind == "subprocess":
        return SubprocessEstimator(cfg["cmd"],
                                   nonnegative=cfg.get("nonnegative", False))
    raise EstimatorError(f"unknown estimator type {kind!r}")


# --- the lifted claim test -----------------------------------------------------

@dataclass(frozen=True)
class ClaimQuery:
    """Does the estimator claim P(0^m) < 2^-(code+2) on prefix y?"""

    code: int
    m: int
    y: str
    k_budget: int
    m_budget: int

    def __post_init__(self):
        if self.k_budget < 1 or self.m_budget < 1:
            raise EstimatorError("budgets must be >= 1")

    @property
    def threshold(self) -> Fraction:
        return Fraction(1, 1 << (self.code + 2))


def makes_claim(f: Estimator, q: ClaimQuery,
                step_budget: int | None = None) -> bool:
    """True iff some precision k <= k_budget yields a defined value with
    value + 1/k < 2^-(code+2).  Prefix stability makes evaluating at the
    full prefix sufficient; budget exhaustion counts as False."""
    threshold = q.threshold
    k_lo = 1
    if f.nonnegative:
        # need 1/k < threshold, so k > 2^(code+2)
        k_lo = (1 << (q.code + 2)) + 1
        if k_lo > q.k_budget:
            return False
    x = "0" * q.m
    for k in f.candidate_ks(x, q.y, k_lo, q.k_budget):
        res = f.evaluate(x, k, q.y, step_budget)
        if res.is_defined and res.value + Fraction(1, k) < threshold:
            return True
    return False


def check_prefix_stability(f: Estimator, x: str, k: int, y: str, rng,
                           extensions: int = 100, max_extra: int = 64):
    """Randomized prefix-stability audit; returns mismatches (empty = pass)."""
    base = f.evaluate(x, k, y)
    bad = []
    if not base.is_defined:
        return bad
    for _ in range(extensions):
        extra = "".join(rng.choice("01")
                        for _ in range(rng.randint(1, max_extra)))
        res = f.evaluate(x, k, y + extra)
        if not res.is_defined or res.value != base.value:
            bad.append((y + extra, res))
    return bad
