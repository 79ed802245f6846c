import pytest
from fractions import Fraction

from hypothesis import given, strategies as st

from cutstack.dyadic import (
    Dyadic, DyadicError, DyadicInterval, ZERO, ONE, HALF, floor_scaled,
    interval_split, translate, merge_intervals, sets_disjoint, set_contains,
    intersect_sets, total_width,
)

dyadics = st.builds(Dyadic, st.integers(-2**40, 2**40), st.integers(0, 48))


def test_canonical_form():
    assert Dyadic(4, 2) == Dyadic(1, 0)
    assert Dyadic(6, 3) == Dyadic(3, 2)
    assert Dyadic(0, 17) == ZERO
    assert Dyadic(3, 2).mantissa == 3 and Dyadic(3, 2).exponent == 2


def test_negative_exponent_rejected():
    with pytest.raises(DyadicError):
        Dyadic(1, -1)


def test_pow2_and_fraction_roundtrip():
    assert Dyadic.pow2(-3) == Dyadic(1, 3)
    assert Dyadic.pow2(4) == Dyadic(16)
    assert Dyadic.from_fraction(Fraction(5, 8)) == Dyadic(5, 3)
    with pytest.raises(DyadicError):
        Dyadic.from_fraction(Fraction(1, 3))


@given(dyadics, dyadics)
def test_add_sub_roundtrip(a, b):
    assert (a + b) - b == a
    assert (a + b).as_fraction() == a.as_fraction() + b.as_fraction()


@given(dyadics, dyadics)
def test_mul_matches_fractions(a, b):
    assert (a * b).as_fraction() == a.as_fraction() * b.as_fraction()


@given(dyadics, dyadics)
def test_order_matches_fractions(a, b):
    assert (a < b) == (a.as_fraction() < b.as_fraction())
    assert (a == b) == (a.as_fraction() == b.as_fraction())


@given(dyadics, st.integers(-20, 20))
def test_scale2(a, k):
    assert a.scale2(k).as_fraction() == a.as_fraction() * Fraction(2) ** k


@given(st.integers(0, 2**30), st.integers(0, 30), st.integers(-10, 34))
def test_floor_scaled(m, e, s):
    x = Dyadic(m, e)
    import math
    assert floor_scaled(x, s) == math.floor(x.as_fraction() * 2 ** s)


def test_json_roundtrip():
    d = Dyadic(12345678901234567890123, 77)
    assert Dyadic.from_json(d.to_json()) == d


def test_interval_split_examples():
    unit = DyadicInterval(ZERO, ONE)
    l, r = interval_split(unit)
    assert l == DyadicInterval(ZERO, HALF) and r == DyadicInterval(HALF, ONE)
    iv = DyadicInterval(Dyadic(1, 2), HALF)  # [1/4, 1/2)
    l, r = interval_split(iv)
    assert l == DyadicInterval(Dyadic(1, 2), Dyadic(3, 3))
    assert r == DyadicInterval(Dyadic(3, 3), HALF)


def test_repeated_split_width():
    # splitting [1/4,1/2) twice on the left piece gives width 1/16
    iv = DyadicInterval(Dyadic(1, 2), HALF)
    left, _ = interval_split(iv)
    left, _ = interval_split(left)
    assert left.width == Dyadic.pow2(-4)


@given(dyadics.filter(lambda d: d.mantissa > 0), dyadics)
def test_split_conserves_measure(w, lo):
    iv = DyadicInterval(lo, lo + w)
    l, r = interval_split(iv)
    assert l.width + r.width == iv.width
    assert l.upper == r.lower and l.lower == iv.lower and r.upper == iv.upper


def test_translate_examples():
    src = DyadicInterval(Dyadic(1, 2), HALF)
    dst = DyadicInterval(Dyadic(3, 2), ONE)
    assert translate(Dyadic(1, 2), src, dst) == Dyadic(3, 2)
    dst2 = DyadicInterval(HALF, Dyadic(3, 2))
    assert translate(Dyadic(5, 4), src, dst2) == Dyadic(9, 4)
    assert translate(Dyadic(5, 4), src, src) == Dyadic(5, 4)


def test_translate_errors():
    src = DyadicInterval(ZERO, HALF)
    with pytest.raises(DyadicError):
        translate(Dyadic(1, 2), src, DyadicInterval(ZERO, ONE))
    with pytest.raises(DyadicError):
        translate(Dyadic(3, 2), src, src)


@given(dyadics.filter(lambda d: d.mantissa > 0), dyadics, dyadics,
       st.integers(0, 255))
def test_translate_roundtrip(w, lo1, lo2, frac_num):
    src = DyadicInterval(lo1, lo1 + w)
    dst = DyadicInterval(lo2, lo2 + w)
    point = lo1 + w * Dyadic(frac_num, 8)
    there = translate(point, src, dst)
    assert translate(there, dst, src) == point


def test_interval_set_operations():
    a = DyadicInterval(ZERO, Dyadic(1, 2))
    b = DyadicInterval(Dyadic(1, 2), HALF)
    c = DyadicInterval(HALF, ONE)
    merged = merge_intervals([c, a, b])
    assert merged == (DyadicInterval(ZERO, ONE),)
    assert sets_disjoint([a], [c])
    assert not sets_disjoint([DyadicInterval(ZERO, HALF)], [b])
    assert set_contains([DyadicInterval(ZERO, ONE)], [b, c])
    assert not set_contains([a, c], [b])
    inter = intersect_sets([DyadicInterval(ZERO, HALF)], [b, c])
    assert inter == (b,)
    assert total_width([a, b, c]) == ONE


def test_merge_rejects_overlap():
    with pytest.raises(DyadicError):
        merge_intervals([DyadicInterval(ZERO, HALF),
                         DyadicInterval(Dyadic(1, 2), ONE)])
