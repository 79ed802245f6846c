import random

import pytest
from hypothesis import given, settings, strategies as st

from cutstack.columns import base_slab, double, stack, dyadic_band, SYMBOL_HALVES
from cutstack.labels import LabelString, LabelError, PatternTooLong, brute_count


def slab(sym):
    return base_slab(SYMBOL_HALVES[sym])


def build_stage_labels(ks):
    """Columns of the slow-rate construction for a parameter prefix."""
    cols = [slab(1)]
    for n in range(1, len(ks)):
        body = double(cols[-1], ks[n] - ks[n - 1])
        pad = double(base_slab(dyadic_band(n)), ks[n] - (n + 1))
        cols.append(stack(body, pad))
    return cols


def test_known_stage_labels():
    cols = build_stage_labels([1, 2, 3])
    texts = [LabelString(c).materialize() for c in cols]
    assert texts == ["1", "110", "1101100"]
    cols = build_stage_labels([1, 2, 4])
    assert LabelString(cols[2]).materialize() == "11011011011000"


def test_extract_examples():
    lab = LabelString(build_stage_labels([1, 2, 3])[2])
    assert lab.extract(3, 3) == "011"
    assert lab.extract(1, 7) == "1101100"
    assert lab.extract(1, 0) == ""
    lab2 = LabelString(build_stage_labels([1, 2, 4])[2])
    assert lab2.extract(9, 6) == "011000"
    with pytest.raises(LabelError):
        lab.extract(3, 6)
    with pytest.raises(LabelError):
        lab.extract(0, 1)


def test_count_examples():
    lab = LabelString(build_stage_labels([1, 2, 3])[2])
    assert lab.count_occurrences("11") == 2
    assert lab.count_occurrences("1001") == 0
    assert lab.count_occurrences("1101100") == 1
    doubled = LabelString(double(build_stage_labels([1, 2, 3])[2], 1))
    assert doubled.count_occurrences("1001") == 1  # seam occurrence only


def test_count_errors():
    lab = LabelString(build_stage_labels([1, 2, 3])[2])
    with pytest.raises(LabelError):
        lab.count_occurrences("")
    with pytest.raises(LabelError):
        lab.count_occurrences("1" * 8)  # longer than the string
    small_cap = LabelString(build_stage_labels([1, 2, 3])[2], pattern_cap=3)
    with pytest.raises(PatternTooLong):
        small_cap.count_occurrences("0011")
    # single-run and uniform patterns bypass the cap
    assert small_cap.count_occurrences("0110") == 1
    assert small_cap.count_occurrences("1001") == 0
    assert small_cap.count_occurrences("0000") == 0


def test_pattern_equal_to_string():
    lab = LabelString(build_stage_labels([1, 2, 3])[1])
    assert lab.count_occurrences("110") == 1


def test_uniform_and_single_run_paths():
    lab = LabelString(build_stage_labels([1, 2, 4])[2])
    text = lab.materialize()  # 11011011011000
    for m in range(1, 5):
        assert lab.count_occurrences("0" * m) == brute_count(text, "0" * m)
        assert lab.count_occurrences("1" * m) == brute_count(text, "1" * m)
        assert lab.count_occurrences("1" + "0" * m + "1") == \
            brute_count(text, "1" + "0" * m + "1")
        assert lab.count_occurrences("0" + "1" * m + "0") == \
            brute_count(text, "0" + "1" * m + "0")


def test_huge_column_queries_stay_symbolic():
    # ~8.6e17 levels: materialization is impossible, queries stay exact
    col = double(stack(double(slab(1), 1), base_slab(dyadic_band(1))), 58)
    lab = LabelString(col)
    assert lab.length == 3 << 58
    assert lab.count_occurrences("10") == (1 << 58)
    assert lab.count_occurrences("00") == 0
    assert lab.extract(4, 6) == "110110"
    assert lab.extract(3 * (1 << 58) - 2, 3) == "110"
    prof = lab.run_profile("0")
    assert prof.inner_count(1) == (1 << 58) - 1 and prof.trail == 1
    assert lab.count_occurrences("101") == (1 << 58) - 1


random_columns = st.deferred(lambda: st.one_of(
    st.sampled_from([0, 1]).map(slab),
    st.tuples(random_columns, st.integers(1, 3)).map(lambda t: double(*t)),
))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_grammar_matches_bruteforce_random(data):
    # random stacked/doubled columns over disjoint bands, capped height
    rng = random.Random(data.draw(st.integers(0, 10 ** 9)))
    parts, widths = [], set()
    bands = iter([SYMBOL_HALVES[1]] + [dyadic_band(j) for j in range(1, 8)])
    target_exp = rng.randint(2, 6)
    for iv in bands:
        exp = iv.width.exponent
        if exp > target_exp:
            continue
        parts.append(double(base_slab(iv), target_exp - exp))
        if len(parts) >= rng.randint(1, 4):
            break
    col = parts[0] if len(parts) == 1 else stack(*parts)
    col = double(col, rng.randint(0, 3))
    lab = LabelString(col)
    text = lab.materialize(limit=1 << 16)
    for _ in range(12):
        ln = rng.randint(1, min(10, len(text)))
        pat = "".join(rng.choice("01") for _ in range(ln))
        assert lab.count_occurrences(pat) == brute_count(text, pat), (text, pat)
        start = rng.randint(1, len(text) - ln + 1)
        assert lab.extract(start, ln) == text[start - 1:start + ln - 1]
