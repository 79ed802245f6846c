"""Columns and the cutting-and-stacking operators.

A column is an ordered stack of equal-width disjoint intervals.  The
three constructors mirror how the constructions build them:

  * ``base_slab(interval)``  -- a single level (height 1),
  * ``double(c, n)``         -- n rounds of cut-in-half-and-stack,
  * ``stack(a, b, ...)``     -- concatenation of disjoint columns.

Columns are immutable expression trees; width, height, support, and
support measure are computed at construction and exponentially tall
columns are never materialized.  Level geometry (point location and
level intervals) is resolved by descent on the expression.

Cutting order: each doubling stacks the right half on top of the left,
recursively left-first.  Under that order block b of the 2^n-fold
doubling holds sub-slice bitreverse(b) of each original level; the order
is observable only through level indices and matches the worked
construction examples this library reproduces in its tests.
"""

from __future__ import annotations

from .dyadic import (
    Dyadic, DyadicInterval, HALF, ONE, ZERO, floor_scaled,
    interval_split, merge_intervals, sets_disjoint, total_width,
)
from .labels import LabelString


class ColumnError(ValueError):
    pass


class WidthMismatch(ColumnError):
    pass


class OverlappingSupport(ColumnError):
    pass


class IncompatibleInterval(ColumnError):
    pass


SYMBOL_HALVES = (DyadicInterval(ZERO, HALF), DyadicInterval(HALF, ONE))

DEFAULT_MATERIALIZE_LIMIT = 1 << 20


def dyadic_band(j: int) -> DyadicInterval:
    """The width-2^-(j+1) band [2^-(j+1), 2^-j) inside the 0-labelled half."""
    if j < 1:
        raise ColumnError("band index must be >= 1")
    return DyadicInterval(Dyadic.pow2(-(j + 1)), Dyadic.pow2(-j))


class Column:
    """Immutable column expression; construct via the module functions."""

    __slots__ = ("kind", "interval", "symbol", "child", "times", "parts",
                 "width", "height", "support", "support_measure", "_label")

    def __init__(self, kind, *, interval=None, symbol=None, child=None,
                 times=None, parts=None):
        self.kind = kind
        self.interval = interval
        self.symbol = symbol
        self.child = child
        self.times = times
        self.parts = parts
        self._label = None
        if kind == "base":
            self.width = interval.width
            self.height = 1
            self.support = (interval,)
            self.support_measure = interval.width
        elif kind == "double":
            self.width = child.width.scale2(-times)
            self.height = child.height << times
            self.support = child.support
            self.support_measure = child.support_measure
        else:
            self.width = parts[0].width
            self.height = sum(p.height for p in parts)
            self.support = merge_intervals(
                iv for p in parts for iv in p.support)
            self.support_measure = total_width(self.support)

    def label(self, pattern_cap=None) -> LabelString:
        if self._label is None:
            kw = {} if pattern_cap is None else {"pattern_cap": pattern_cap}
            self._label = LabelString(self, **kw)
        return self._label

    def contains_point(self, point) -> bool:
        return any(iv.contains(point) for iv in self.support)

    def __repr__(self):
        return f"<Column h={self.height} w={self.width} S={self.support_measure}>"


def base_slab(interval: DyadicInterval) -> Column:
    """Single-level column; the interval must lie wholly in one symbol half."""
    for sym, half in enumerate(SYMBOL_HALVES):
        if half.contains_interval(interval):
            return Column("base", interval=interval, symbol=sym)
    raise IncompatibleInterval(
        f"{interval} does not lie within a single symbol half")


def double(c: Column, n: int) -> Column:
    """n rounds of halving and restacking: width /2^n, height *2^n."""
    if n < 0:
        raise ColumnError("doubling count must be >= 0")
    if n == 0:
        return c
    return Column("double", child=c, times=n)


def stack(*columns: Column) -> Column:
    """Concatenate columns bottom-to-top; equal widths, disjoint supports."""
    if len(columns) < 2:
        raise ColumnError("stack needs at least two columns")
    w = columns[0].width
    for c in columns[1:]:
        if c.width != w:
            raise WidthMismatch(f"widths differ: {w} vs {c.width}")
    for i, a in enumerate(columns):
        for b in columns[i + 1:]:
            if not sets_disjoint(a.support, b.support):
                raise OverlappingSupport("stacked columns must have disjoint supports")
    return Column("stack", parts=tuple(columns))


def label(c: Column) -> LabelString:
    return c.label()


def _bitrev(q: int, bits: int) -> int:
    if bits == 0:
        return 0
    return int(format(q, f"0{bits}b")[::-1], 2)


def _slice_of(interval: DyadicInterval, q: int, bits: int) -> DyadicInterval:
    cell = interval.width.scale2(-bits)
    lo = interval.lower + Dyadic(q) * cell
    return DyadicInterval(lo, lo + cell)


def _find_slice(interval: DyadicInterval, point, bits: int) -> int:
    """Index of the width/2^bits sub-slice containing the point."""
    if isinstance(point, Dyadic):
        offset = point - interval.lower
        # cell width is 2^-(wexp + bits) with interval width 2^-wexp * m
        cell = interval.width.scale2(-bits)
        assert cell.mantissa == 1
        return floor_scaled(offset, cell.exponent)
    lo, hi = 0, (1 << bits) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        boundary = _slice_of(interval, mid, bits).upper
        if point.less_than(boundary):
            hi = mid
        else:
            lo = mid + 1
    return lo


def locate(c: Column, point) -> tuple[int, DyadicInterval] | None:
    """(1-based level, containing level interval), or None outside the support."""
    if c.kind == "base":
        return (1, c.interval) if c.interval.contains(point) else None
    if c.kind == "double":
        hit = locate(c.child, point)
        if hit is None:
            return None
        i, iv = hit
        q = _find_slice(iv, point, c.times)
        level = _bitrev(q, c.times) * c.child.height + i
        return level, _slice_of(iv, q, c.times)
    offset = 0
    for part in c.parts:
        if part.contains_point(point):
            i, iv = locate(part, point)
            return offset + i, iv
        offset += part.height
    return None


def level_interval(c: Column, level: int) -> DyadicInterval:
    """Interval of the given 1-based level."""
    if level < 1 or level > c.height:
        raise ColumnError(f"level {level} out of range 1..{c.height}")
    if c.kind == "base":
        return c.interval
    if c.kind == "double":
        hb = c.child.height
        block, i = divmod(level - 1, hb)
        q = _bitrev(block, c.times)
        return _slice_of(level_interval(c.child, i + 1), q, c.times)
    offset = 0
    for part in c.parts:
        if level <= offset + part.height:
            return level_interval(part, level - offset)
        offset += part.height
    raise AssertionError("unreachable")


def materialize(c: Column, limit: int = DEFAULT_MATERIALIZE_LIMIT) -> list:
    """Flat [(interval, symbol), ...] bottom to top; refuses huge columns."""
    if c.height > limit:
        raise ColumnError(f"height {c.height} exceeds materialize limit {limit}")
    if c.kind == "base":
        return [(c.interval, c.symbol)]
    if c.kind == "double":
        levels = materialize(c.child, limit)
        for _ in range(c.times):
            lefts, rights = [], []
            for iv, sym in levels:
                l, r = interval_split(iv)
                lefts.append((l, sym))
                rights.append((r, sym))
            levels = lefts + rights
        return levels
    out = []
    for part in c.parts:
        out.extend(materialize(part, limit))
    return out


def apply_column_map(c: Column, point: Dyadic) -> Dyadic | None:
    """One step of the tower map: level i -> level i+1; None on the top level."""
    hit = locate(c, point)
    if hit is None:
        raise ColumnError(f"{point} outside column support")
    i, iv = hit
    if i == c.height:
        return None
    target = level_interval(c, i + 1)
    return target.lower + (point - iv.lower)


# --- JSON form of column expressions ----------------------------------------

def column_to_json(c: Column) -> dict:
    if c.kind == "base":
        return {"base": {"interval": c.interval.to_json(), "symbol": c.symbol}}
    if c.kind == "double":
        return {"double": {"c": column_to_json(c.child), "n": c.times}}
    return {"stack": [column_to_json(p) for p in c.parts]}


def column_from_json(obj: dict) -> Column:
    if "base" in obj:
        return base_slab(DyadicInterval.from_json(obj["base"]["interval"]))
    if "double" in obj:
        return double(column_from_json(obj["double"]["c"]), obj["double"]["n"])
    return stack(*(column_from_json(p) for p in obj["stack"]))
