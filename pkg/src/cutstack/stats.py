"""Empirical measurement layer: window frequencies and deviation curves."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import Dyadic
from .labels import brute_count
from .process import ProcessHandle, block_prob_limit, sample_orbit


class StatsError(ValueError):
    pass


def empirical_freq(bits: str, x: str) -> Fraction:
    """Overlapping-window frequency: occurrences / (|bits| - |x| + 1)."""
    if not x or len(bits) < len(x):
        raise StatsError("need |bits| >= |x| >= 1")
    return Fraction(brute_count(bits, x), len(bits) - len(x) + 1)


def wilson_interval(hits: int, trials: int, z: float = 1.96
                    ) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    phat = hits / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * ((phat * (1 - phat) / trials + z * z / (4 * trials ** 2)) ** 0.5) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class CurvePoint:
    length: int
    deviation_fraction: Fraction
    ci_lo: float
    ci_hi: float

    def csv_row(self) -> str:
        return (f"{self.length},{float(self.deviation_fraction):.6g},"
                f"{self.ci_lo:.6g},{self.ci_hi:.6g}")


def rate_curve(p: ProcessHandle, x: str, k: int, lengths, trials: int,
               seed: int, eps: Dyadic | None = None) -> list[CurvePoint]:
    """Per length: fraction of seeded orbits whose window frequency of x
    deviates from the exact probability by >= 1/k, with Wilson intervals.

    The exact probability is the midpoint of a width-<=eps enclosure
    (default 2^-20), so the deviation test is unambiguous whenever 1/k is
    not within eps of the true gap.
    """
    if k < 1 or trials < 1:
        raise StatsError("need k >= 1 and trials >= 1")
    enc = block_prob_limit(p, x, eps or Dyadic.pow2(-20))
    p_exact = enc.midpoint
    gap = Fraction(1, k)
    master = random.Random(seed)
    out = []
    for length in lengths:
        if length < len(x):
            raise StatsError(f"length {length} shorter than |x|")
        hits = 0
        for _ in range(trials):
            orbit = sample_orbit(p, master.getrandbits(60), length)
            if abs(empirical_freq(orbit.bits, x) - p_exact) >= gap:
                hits += 1
        ci_lo, ci_hi = wilson_interval(hits, trials)
        out.append(CurvePoint(length, Fraction(hits, trials), ci_lo, ci_hi))
    return out


def curve_csv(points) -> str:
    lines = ["length,deviation_fraction,ci_lo,ci_hi"]
    lines += [pt.csv_row() for pt in points]
    return "\n".join(lines) + "\n"
