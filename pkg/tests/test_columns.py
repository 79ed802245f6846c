import random

import pytest

from cutstack.dyadic import (Dyadic, DyadicInterval, ZERO, ONE, HALF,
                             merge_intervals, intersect_sets, total_width)
from cutstack.columns import (
    Column, ColumnError, IncompatibleInterval, OverlappingSupport,
    WidthMismatch, apply_column_map, base_slab, double, dyadic_band,
    label, level_interval, locate, materialize, stack,
    column_to_json, column_from_json, SYMBOL_HALVES,
)


def slab(sym):
    return base_slab(SYMBOL_HALVES[sym])


def test_base_slab_compatibility():
    c = slab(1)
    assert (c.width, c.height, c.support_measure) == (HALF, 1, HALF)
    assert base_slab(dyadic_band(2)).symbol == 0
    with pytest.raises(IncompatibleInterval):
        base_slab(DyadicInterval(Dyadic(1, 2), Dyadic(3, 2)))  # crosses 1/2


def test_double_bookkeeping():
    c = slab(1)
    d = double(c, 1)
    assert d.width == Dyadic(1, 2) and d.height == 2
    assert d.support_measure == HALF
    assert label(d).materialize() == "11"
    assert double(c, 0) is c
    d3 = double(c, 3)
    assert d3.support_measure == c.support_measure
    assert label(d3).materialize() == "1" * 8


def test_stack_bookkeeping_and_errors():
    a = double(slab(1), 1)              # width 1/4
    b = base_slab(dyadic_band(1))       # width 1/4
    s = stack(a, b)
    assert s.height == a.height + b.height
    assert s.support_measure == a.support_measure + b.support_measure
    assert label(s).materialize() == "110"
    with pytest.raises(WidthMismatch):
        stack(slab(1), b)
    with pytest.raises(OverlappingSupport):
        stack(a, double(slab(1), 1))


def test_materialize_matches_label_and_width():
    c = stack(double(slab(1), 2), double(base_slab(dyadic_band(1)), 1),
              base_slab(dyadic_band(2)))
    mat = materialize(c)
    assert len(mat) == c.height
    assert "".join(str(s) for _, s in mat) == label(c).materialize()
    assert all(iv.width == c.width for iv, _ in mat)
    assert merge_intervals([iv for iv, _ in mat]) == c.support
    assert total_width([iv for iv, _ in mat]) == c.support_measure


def test_locate_and_level_interval_agree_with_materialize():
    rng = random.Random(1)
    c = stack(double(slab(1), 3), double(base_slab(dyadic_band(1)), 2),
              double(base_slab(dyadic_band(2)), 1))
    mat = materialize(c)
    for lvl, (iv, _) in enumerate(mat, start=1):
        assert level_interval(c, lvl) == iv
        # a point strictly inside the level locates back to it
        offset = iv.width * Dyadic(rng.randrange(16), 4)
        found = locate(c, iv.lower + offset)
        assert found == (lvl, iv)
    assert locate(c, Dyadic(1, 5)) is None  # 1/32 below the support


def test_locate_outside_and_bounds():
    c = double(slab(1), 1)
    assert locate(c, Dyadic(1, 2)) is None
    with pytest.raises(ColumnError):
        level_interval(c, 3)


def test_block_structure_of_doubling():
    # Fig-style check: doubling by 2 visits quarters in order q0,q2,q1,q3
    c = stack(double(slab(1), 1), base_slab(dyadic_band(1)))  # h=3, label 110
    big = double(c, 2)
    mat, base = materialize(big), materialize(c)
    h = c.height
    for block in range(4):
        q = [0, 2, 1, 3][block]
        for j in range(h):
            iv = mat[block * h + j][0]
            parent = base[j][0]
            cell = parent.width.scale2(-2)
            expect_lo = parent.lower + Dyadic(q) * cell
            assert iv == DyadicInterval(expect_lo, expect_lo + cell)


def test_shift_and_scale_identity_randomized():
    # level sets survive doubling as shifted, 2^-k scaled copies per block
    rng = random.Random(42)
    for _ in range(100):
        parts = [double(slab(1), 2), double(base_slab(dyadic_band(1)), 1),
                 base_slab(dyadic_band(2))]
        col = stack(*parts[:rng.randint(2, 3)])
        k = rng.randint(1, 4)
        h = col.height
        block = rng.randrange(1 << k)
        levels = sorted(rng.sample(range(1, h + 1), rng.randint(1, h)))
        mat = materialize(col)
        big = materialize(double(col, k))
        base_set = merge_intervals([mat[j - 1][0] for j in levels])
        shifted = merge_intervals([big[block * h + j - 1][0] for j in levels])
        block_set = [iv for iv, _ in big[block * h:(block + 1) * h]]
        assert shifted == intersect_sets(base_set, block_set)
        assert total_width(shifted) == total_width(base_set).scale2(-k)


def test_apply_column_map_walks_levels():
    c = stack(double(slab(1), 1), base_slab(dyadic_band(1)))
    mat = materialize(c)
    pt = mat[0][0].lower + Dyadic(1, 4)
    seen = [pt]
    while True:
        nxt = apply_column_map(c, seen[-1])
        if nxt is None:
            break
        seen.append(nxt)
    assert len(seen) == c.height
    for lvl, p in enumerate(seen, start=1):
        assert locate(c, p)[0] == lvl


def test_transform_extension_under_doubling():
    # the doubled column's map agrees wherever the original was defined
    rng = random.Random(3)
    c = stack(double(slab(1), 2), base_slab(dyadic_band(2)))
    d = double(c, 2)
    for _ in range(50):
        iv, _ = random.Random(rng.random()).choice(materialize(c)[:-1]), None
        iv = iv[0]
        pt = iv.lower + iv.width * Dyadic(rng.randrange(1 << 6), 6)
        if locate(c, pt)[0] == c.height:
            continue
        assert apply_column_map(c, pt) == apply_column_map(d, pt)


def test_column_json_roundtrip():
    c = stack(double(slab(1), 2), double(base_slab(dyadic_band(1)), 1),
              base_slab(dyadic_band(2)))
    c2 = column_from_json(column_to_json(c))
    assert label(c2).materialize() == label(c).materialize()
    assert materialize(c2) == materialize(c)
