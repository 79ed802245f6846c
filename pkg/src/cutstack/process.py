"""Executable processes built from extending column sequences.

A ProcessHandle wraps the stage columns of one construction and exposes:

  * exact point location and symbolic orbit emission (orbits are read off
    stage labels, never by iterating the map pointwise),
  * seeded uniform orbit sampling with lazily refined dyadic points,
  * exact stage block probabilities and limit enclosures,
  * per-stage entropy proxies.

Orbit sampling draws a point uniformly from the deepest built support,
so the sampled law is the process law conditioned on that support; the
total-variation gap on any finite coordinate window is at most the
missing mass, available as ``conditioning_gap()``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import Dyadic, DyadicInterval, ZERO, ONE, DyadicError
from .columns import Column, locate as column_locate, level_interval
from .labels import LabelString


class ProcessError(ValueError):
    pass


class InsufficientStages(ProcessError):
    """Raised when a query needs deeper stages than were built."""


class OutsideSupport(ProcessError):
    pass


@dataclass(frozen=True)
class ProcessHandle:
    """Built stages of one construction with exact bookkeeping."""

    stages: tuple[Column, ...]
    k: tuple[int, ...]
    kind: str  # "slowrate" | "adversary"
    meta: dict

    def __post_init__(self):
        object.__setattr__(self, "_labels", {})

    @property
    def depth(self) -> int:
        return len(self.stages) - 1

    def stage(self, n: int) -> Column:
        if n < 0 or n > self.depth:
            raise InsufficientStages(f"stage {n} not built (depth {self.depth})")
        return self.stages[n]

    def stage_label(self, n: int) -> LabelString:
        lab = self._labels.get(n)
        if lab is None:
            lab = self.stage(n).label(
                pattern_cap=self.meta.get("pattern_cap"))
            self._labels[n] = lab
        return lab

    def width(self, n: int) -> Dyadic:
        return self.stage(n).width

    def height(self, n: int) -> int:
        return self.stage(n).height

    def support_measure(self, n: int) -> Dyadic:
        return self.stage(n).support_measure

    def conditioning_gap(self) -> Dyadic:
        """Mass of [0,1) missing from the deepest built support."""
        return ONE - self.stage(self.depth).support_measure

    def __repr__(self):
        return f"<ProcessHandle {self.kind} depth={self.depth} k={list(self.k)}>"


def locate(p: ProcessHandle, point, stage: int):
    """(level, interval) of the point in the stage column, or None outside."""
    return column_locate(p.stage(stage), point)


def emit_symbols(p: ProcessHandle, point, length: int) -> str:
    """First `length` symbols of the one-sided orbit coding of the point.

    A point at level i of stage n realizes label positions i.. of that
    stage; when the window overruns the column top the point is relocated
    at the next stage, where its remaining headroom can only grow.
    """
    if length == 0:
        return ""
    found = False
    for n in range(p.depth + 1):
        hit = locate(p, point, n)
        if hit is None:
            if found:
                raise ProcessError("support shrank across stages; corrupt handle")
            continue
        found = True
        i, _ = hit
        if i + length - 1 <= p.height(n):
            return p.stage_label(n).extract(i, length)
    if not found:
        raise OutsideSupport("point outside every built stage support")
    raise InsufficientStages(
        f"orbit of length {length} needs stages deeper than {p.depth}")


@dataclass(frozen=True)
class OrbitSample:
    seed: int
    start_point: Dyadic
    bits: str
    stage_used: int


class _LazyUniformPoint:
    """Uniform point on [0,1) whose binary digits are drawn on demand.

    Comparisons against dyadic bounds refine the point until decided; the
    refinement cap makes the null event of hitting a query boundary a loud
    failure instead of an endless loop.
    """

    def __init__(self, rng: random.Random, max_bits: int = 256):
        self._rng = rng
        self._num = 0
        self._bits = 0
        self._max_bits = max_bits

    def _refine(self):
        if self._bits >= self._max_bits:
            raise ProcessError(
                f"sample point undecided after {self._max_bits} bits")
        self._num = (self._num << 1) | self._rng.getrandbits(1)
        self._bits += 1

    def less_than(self, bound: Dyadic) -> bool:
        while True:
            lo = Dyadic(self._num, self._bits) if self._bits else ZERO
            hi = lo + Dyadic.pow2(-self._bits)
            if hi <= bound:
                return True
            if lo >= bound:
                return False
            self._refine()

    def known_point(self) -> Dyadic:
        return Dyadic(self._num, self._bits) if self._bits else ZERO


def _draw_support_point(p: ProcessHandle, rng: random.Random,
                        max_bits: int, max_rejects: int = 64):
    support = p.stage(p.depth).support
    for _ in range(max_rejects):
        pt = _LazyUniformPoint(rng, max_bits=max_bits)
        if any(iv.contains(pt) for iv in support):
            return pt
    raise ProcessError("rejection sampling failed; support measure too small?")


def sample_orbit(p: ProcessHandle, seed: int, length: int) -> OrbitSample:
    """Seeded orbit: uniform start on the deepest support, then emit_symbols.

    Deterministic per (seed, length) and prefix-stable in length.  The
    output law is the process conditioned on the deepest built support
    (total-variation gap at most ``conditioning_gap()`` on the first
    `length` coordinates).
    """
    if length < 1:
        raise ProcessError("orbit length must be >= 1")
    rng = random.Random(seed)
    max_bits = max(256, p.k[-1] + 64)
    pt = _draw_support_point(p, rng, max_bits)
    bits = emit_symbols(p, pt, length)
    stage_used = next(n for n in range(p.depth + 1)
                      if locate(p, pt, n) is not None
                      and locate(p, pt, n)[0] + length - 1 <= p.height(n))
    return OrbitSample(seed, pt.known_point(), bits, stage_used)


# --- exact block probabilities ------------------------------------------------

def block_prob(p: ProcessHandle, stage: int, x: str) -> Dyadic:
    """Measure of levels whose label window reads x at the given stage.

    The empty window matches every level, giving the stage support measure.
    """
    if x == "":
        return p.support_measure(stage)
    count = p.stage_label(stage).count_occurrences(x)
    return Dyadic(count) * p.width(stage)


def uniform_block_prob(p: ProcessHandle, stage: int, symbol: str, m: int) -> Dyadic:
    """Stage probability of symbol^m without building the pattern string;
    exact for any m via the label's run profile."""
    if m < 1:
        raise ProcessError("window length must be >= 1")
    count = p.stage_label(stage).run_profile(symbol).count_uniform_pattern(m)
    return Dyadic(count) * p.width(stage)


def block_prob_enclosure(p: ProcessHandle, x: str, stage: int
                         ) -> tuple[Dyadic, Dyadic]:
    """[stage value, stage value + tail bound] containing the limit probability.

    Tail bound: mass outside the stage support plus the at most |x|-1
    levels whose window overruns the column top.
    """
    lo = block_prob(p, stage, x)
    bound = (ONE - p.support_measure(stage)) \
        + Dyadic(max(0, len(x) - 1)) * p.width(stage)
    return lo, lo + bound


@dataclass(frozen=True)
class ProbEnclosure:
    x: str
    lo: Dyadic
    hi: Dyadic
    stage: int

    @property
    def width(self) -> Dyadic:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo.as_fraction() + self.hi.as_fraction()) / 2

    def to_json(self) -> dict:
        return {"x": self.x, "lo": self.lo.to_json(), "hi": self.hi.to_json(),
                "stage": self.stage}


def block_prob_limit(p: ProcessHandle, x: str, eps: Dyadic) -> ProbEnclosure:
    """Enclosure of the limit probability of width <= eps.

    Only meaningful for full-measure constructions (kind "slowrate"); the
    stage is the shallowest one whose tail bound meets eps.
    """
    if p.kind != "slowrate":
        raise ProcessError("limit enclosures need a full-measure construction")
    if not ZERO < eps:
        raise ProcessError("eps must be positive")
    extra = Dyadic(max(0, len(x) - 1))
    for n in range(p.depth + 1):
        bound = (ONE - p.support_measure(n)) + extra * p.width(n)
        if bound <= eps:
            lo, hi = block_prob_enclosure(p, x, n)
            return ProbEnclosure(x, lo, hi, n)
    raise InsufficientStages(
        f"stage budget {p.depth} exhausted before enclosure width {eps}")


def entropy_profile(p: ProcessHandle) -> list[Fraction]:
    """Per stage: stage depth / height, an exact upper proxy for the
    per-symbol log-probability of the stage label (every bottom-level point
    realizes the whole label, so its probability is at least the width)."""
    return [Fraction(p.k[n], p.height(n)) for n in range(p.depth + 1)]
