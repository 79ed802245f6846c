"""Exact dyadic rationals and half-open dyadic intervals.

Every measure-theoretic quantity in the construction engine (interval
endpoints, widths, level measures, stage probabilities) is a dyadic
rational a*2^-b.  Keeping them exact means every bookkeeping identity in
the library can be asserted with ``==`` instead of a tolerance.

Values are canonical (exponent 0 or odd mantissa), so equality and
hashing are structural.  Intervals are uniformly half-open [lo, hi);
open/closed endpoint variations in the source constructions differ from
this normalization only on a null set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class DyadicError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Dyadic:
    """Exact mantissa * 2^-exponent with exponent >= 0."""

    mantissa: int
    exponent: int = 0

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if e < 0:
            raise DyadicError("exponent must be non-negative")
        if m == 0:
            e = 0
        else:
            while e > 0 and m % 2 == 0:
                m //= 2
                e -= 1
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """2^k for any integer k (negative k gives 2^-|k| exactly)."""
        if k >= 0:
            return cls(1 << k, 0)
        return cls(1, -k)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "Dyadic":
        den = f.denominator
        e = den.bit_length() - 1
        if den != 1 << e:
            raise DyadicError(f"{f} is not dyadic")
        return cls(f.numerator, e)

    def as_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def scale2(self, k: int) -> "Dyadic":
        """Multiply by 2^k."""
        if k >= 0:
            return Dyadic(self.mantissa << k, self.exponent)
        return Dyadic(self.mantissa, self.exponent - k)

    def _pair(self, other: "Dyadic") -> tuple[int, int]:
        e = max(self.exponent, other.exponent)
        return (self.mantissa << (e - self.exponent),
                other.mantissa << (e - other.exponent))

    def __add__(self, other: "Dyadic") -> "Dyadic":
        a, b = self._pair(other)
        return Dyadic(a + b, max(self.exponent, other.exponent))

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        a, b = self._pair(other)
        return Dyadic(a - b, max(self.exponent, other.exponent))

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        return Dyadic(self.mantissa * other.mantissa,
                      self.exponent + other.exponent)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.mantissa, self.exponent)

    def _cmp(self, other: "Dyadic") -> int:
        a, b = self._pair(other)
        return (a > b) - (a < b)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def less_than(self, bound: "Dyadic") -> bool:
        """Point protocol shared with lazily refined sample points."""
        return self < bound

    def __float__(self):
        return self.mantissa / (1 << self.exponent)

    def __str__(self):
        if self.exponent == 0:
            return str(self.mantissa)
        return f"{self.mantissa}/2^{self.exponent}"

    def to_json(self) -> dict:
        return {"m": str(self.mantissa), "e": self.exponent}

    @classmethod
    def from_json(cls, obj: dict) -> "Dyadic":
        return cls(int(obj["m"]), int(obj["e"]))


ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, 1)


def floor_scaled(x: Dyadic, s: int) -> int:
    """floor(x * 2^s); exact integer, any sign of s."""
    shift = s - x.exponent
    if shift >= 0:
        return x.mantissa << shift
    return x.mantissa >> (-shift)


@dataclass(frozen=True, slots=True)
class DyadicInterval:
    """Half-open interval [lower, upper) with dyadic endpoints."""

    lower: Dyadic
    upper: Dyadic

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DyadicError(f"empty interval [{self.lower}, {self.upper})")

    @property
    def width(self) -> Dyadic:
        return self.upper - self.lower

    def contains(self, point) -> bool:
        """Membership test; `point` is a Dyadic or anything with less_than."""
        return not point.less_than(self.lower) and point.less_than(self.upper)

    def contains_interval(self, other: "DyadicInterval") -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def overlaps(self, other: "DyadicInterval") -> bool:
        return self.lower < other.upper and other.lower < self.upper

    def __str__(self):
        return f"[{self.lower}, {self.upper})"

    def to_json(self) -> dict:
        return {"lo": self.lower.to_json(), "hi": self.upper.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "DyadicInterval":
        return cls(Dyadic.from_json(obj["lo"]), Dyadic.from_json(obj["hi"]))


UNIT = DyadicInterval(ZERO, ONE)


def interval_split(iv: DyadicInterval) -> tuple[DyadicInterval, DyadicInterval]:
    """Split [lo, hi) into equal halves; the left half keeps the lower endpoint."""
    mid = iv.lower + iv.width.scale2(-1)
    return DyadicInterval(iv.lower, mid), DyadicInterval(mid, iv.upper)


def translate(point: Dyadic, src: DyadicInterval, dst: DyadicInterval) -> Dyadic:
    """Carry a point between equal-width intervals, preserving the offset."""
    if src.width != dst.width:
        raise DyadicError("translate requires equal-width intervals")
    if not src.contains(point):
        raise DyadicError(f"{point} not in {src}")
    return dst.lower + (point - src.lower)


# --- finite unions of disjoint intervals ------------------------------------
#
# Supports of columns are finite unions of half-open intervals.  They are
# kept as sorted tuples with adjacent pieces coalesced, so disjointness and
# containment are decidable by a single merge pass.

def merge_intervals(ivs) -> tuple[DyadicInterval, ...]:
    """Normalize a collection of pairwise-disjoint intervals (sorted, coalesced)."""
    items = sorted(ivs, key=lambda iv: iv.lower.as_fraction())
    out: list[DyadicInterval] = []
    for iv in items:
        if out and iv.lower < out[-1].upper:
            raise DyadicError(f"intervals overlap: {out[-1]} and {iv}")
        if out and iv.lower == out[-1].upper:
            out[-1] = DyadicInterval(out[-1].lower, iv.upper)
        else:
            out.append(iv)
    return tuple(out)


def sets_disjoint(a, b) -> bool:
    a, b = list(a), list(b)
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i].overlaps(b[j]):
            return False
        if a[i].upper <= b[j].upper:
            i += 1
        else:
            j += 1
    return True


def set_contains(outer, inner) -> bool:
    """True iff every interval of `inner` is covered by the union `outer`."""
    outer = merge_intervals(outer)
    for iv in inner:
        if not any(o.contains_interval(iv) for o in outer):
            return False
    return True


def intersect_sets(a, b) -> tuple[DyadicInterval, ...]:
    out = []
    for x in a:
        for y in b:
            lo = max(x.lower, y.lower, key=lambda d: d.as_fraction())
            hi = min(x.upper, y.upper, key=lambda d: d.as_fraction())
            if lo < hi:
                out.append(DyadicInterval(lo, hi))
    return merge_intervals(out)


def total_width(ivs) -> Dyadic:
    acc = ZERO
    for iv in ivs:
        acc = acc + iv.width
    return acc
