"""The explicit-parameter construction with arbitrarily slow convergence.

Starting from a strictly increasing parameter sequence k_0=1 < k_1 < ...,
stage n doubles the previous column to width 2^-k_n and stacks the n-th
dyadic band (doubled to the same width) on top.  The stages exhaust
[0,1), so the limit process has full support and exact bookkeeping:

    width 2^-k_n,  support measure 1 - 2^-(n+1),
    height 2^k_n - 2^(k_n-n-1),
    label(n) = label(n-1)^(2^(k_n-k_(n-1))) . 0^(2^(k_n-(n+1))).

The orbit structure encodes the parameters: maximal one-runs all have
length 2^(k_1-1), and maximal zero-runs have lengths from the milestone
sequence f(n) = sum_i 2^(k_i-(i+1)).  ``recover_k_table`` decodes the
parameters back out of any orbit that exhibits the milestone patterns in
first-occurrence order, which happens on an explicit positive-measure
set of start points (``early_block_intersection_measure``).  On top of
that decoder, ``estimate_from_orbit`` turns a sampled orbit into block
probability estimates of any requested precision, and
``choose_k_for_rate``/``slow_rate_certificate`` pick parameters whose
empirical frequencies provably deviate more often than a given rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic import Dyadic, ZERO, ONE
from .columns import base_slab, double, stack, dyadic_band, SYMBOL_HALVES
from .process import (
    ProcessHandle, block_prob, block_prob_enclosure, uniform_block_prob,
)


class SlowRateError(ValueError):
    pass


class InconsistentOrbit(ValueError):
    """Input bits cannot have come from any valid parameter sequence."""


@dataclass(frozen=True)
class KSequence:
    """Strictly increasing stage parameters starting at 1."""

    values: tuple[int, ...]

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(int(v) for v in values))
        v = self.values
        if not v or v[0] != 1:
            raise SlowRateError("parameter sequence must start at 1")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise SlowRateError("parameter sequence must be strictly increasing")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def gap_condition(self) -> bool:
        """Gaps k_i - k_(i-1) >= i; needed for the recovery set to have
        positive measure, not for the construction itself."""
        return all(self.values[i] - self.values[i - 1] >= i
                   for i in range(1, len(self.values)))

    def milestone(self, n: int) -> int:
        """f(n): the length of the maximal zero-run introduced at stage n."""
        if n < 0 or n >= len(self.values):
            raise SlowRateError(f"milestone {n} outside built prefix")
        return sum(1 << (self.values[i] - (i + 1)) for i in range(1, n + 1))

    def milestones(self) -> list[int]:
        return [self.milestone(n) for n in range(len(self.values))]


@dataclass(frozen=True)
class KTable:
    """Recovered (stage, parameter) pairs; a partial map that only grows
    as more orbit is read."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def from_dict(cls, d: dict) -> "KTable":
        return cls(tuple(sorted(d.items())))

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def as_prefix(self) -> tuple[int, ...] | None:
        """Parameter values k_0..k_J when the table covers 0..J contiguously."""
        d = self.as_dict()
        if 0 not in d:
            return None
        out = []
        n = 0
        while n in d:
            out.append(d[n])
            n += 1
        return tuple(out)

    def consistent_with(self, k: KSequence) -> bool:
        return all(n < len(k) and k[n] == v for n, v in self.pairs)


def build_slowrate_process(k, stages: int | None = None,
                           pattern_cap: int | None = None) -> ProcessHandle:
    """Build the construction through the given stage count.

    The stage identities (width, support measure, height) are re-derived
    from the columns and checked exactly on every stage.
    """
    kseq = k if isinstance(k, KSequence) else KSequence(k)
    n_stages = len(kseq) - 1 if stages is None else stages
    if n_stages >= len(kseq):
        raise SlowRateError(
            f"{n_stages} stages need {n_stages + 1} parameters, have {len(kseq)}")
    cols = [base_slab(SYMBOL_HALVES[1])]
    for n in range(1, n_stages + 1):
        kn, kp = kseq[n], kseq[n - 1]
        body = double(cols[-1], kn - kp)
        pad = double(base_slab(dyadic_band(n)), kn - (n + 1))
        col = stack(body, pad)
        if col.width != Dyadic.pow2(-kn):
            raise SlowRateError(f"stage {n}: width invariant broken")
        if col.support_measure != ONE - Dyadic.pow2(-(n + 1)):
            raise SlowRateError(f"stage {n}: support invariant broken")
        if col.height != (1 << kn) - (1 << (kn - n - 1)):
            raise SlowRateError(f"stage {n}: height invariant broken")
        cols.append(col)
    meta = {"kind": "slowrate", "k": list(kseq.values), "stages": n_stages}
    if pattern_cap is not None:
        meta["pattern_cap"] = pattern_cap
    return ProcessHandle(tuple(cols), kseq.values[:n_stages + 1], "slowrate", meta)


def closed_form_probability(k: KSequence, kind: str, run_length: int) -> Dyadic:
    """Exact limit probability of the two run-delimited pattern families.

    one-run  (0 1^m 0): maximal one-runs all have length 2^(k_1-1); the
    probability is 2^-k_1 for that length and 0 otherwise.

    zero-run (1 0^m 1): runs of length f(n) close at seams between
    consecutive stage-n blocks.  Per block of width 2^-k_n one seam
    follows, except that a fraction 2^-(k_(n+1)-k_n) of blocks is last in
    its stage-(n+1) group and runs into longer padding, so the value is
    2^-k_n - 2^-k_(n+1).  Deciding a zero-run length therefore needs the
    parameter prefix through stage n+1.
    """
    if run_length < 1:
        raise SlowRateError("run length must be >= 1")
    if kind == "one-run":
        if len(k) < 2:
            raise SlowRateError("one-run value needs k_1")
        return Dyadic.pow2(-k[1]) if run_length == 1 << (k[1] - 1) else ZERO
    if kind != "zero-run":
        raise SlowRateError(f"unknown kind {kind!r}")
    last = len(k) - 1
    ms = k.milestones()
    for n in range(1, last + 1):
        if run_length == ms[n]:
            if n + 1 > last:
                raise SlowRateError(
                    f"zero-run value at milestone {n} needs k_{n + 1}")
            return Dyadic.pow2(-k[n]) - Dyadic.pow2(-k[n + 1])
    if run_length >= ms[last]:
        raise SlowRateError(
            f"run length {run_length} beyond built milestone range")
    return ZERO


# --- early-block sets ---------------------------------------------------------

def early_block_level_count(p: ProcessHandle, n: int) -> int:
    """Number of bottom levels of stage n whose points stay clear of the
    stage's final block and padding (the recovery-friendly levels)."""
    if n == 0:
        return p.height(0)
    d = p.k[n] - p.k[n - 1]
    return ((1 << d) - 1) * p.height(n - 1)


def early_block_intersection_measure(k: KSequence, n: int) -> Dyadic:
    """Exact measure of points below the early-block cut at every stage <= n:
    (1/2) * prod_i (1 - 2^-(k_i - k_(i-1)))."""
    acc = Dyadic(1, 1)
    for i in range(1, n + 1):
        d = k[i] - k[i - 1]
        acc = acc * (ONE - Dyadic.pow2(-d))
    return acc


# --- run scanning and parameter recovery --------------------------------------

@dataclass(frozen=True)
class _RunScan:
    length: int
    zero_starts: np.ndarray
    zero_lengths: np.ndarray
    one_starts: np.ndarray
    one_lengths: np.ndarray
    first_adjacent_ones: int | None


def _as_bit_array(bits) -> np.ndarray:
    if isinstance(bits, np.ndarray):
        return bits
    if isinstance(bits, str):
        bits = bits.encode()
    return np.frombuffer(bits, dtype=np.uint8)


def _scan_runs(bits) -> _RunScan:
    arr = _as_bit_array(bits)
    n = len(arr)
    empty = np.empty(0, dtype=np.int64)
    if n == 0:
        return _RunScan(0, empty, empty, empty, empty, None)
    z = arr == ord("0")
    change = np.flatnonzero(z[1:] != z[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [n]))
    lengths = ends - starts
    is_zero = z[starts]
    flanked = (starts > 0) & (ends < n)
    zmask = is_zero & flanked
    omask = ~is_zero & flanked
    ones_long = ~is_zero & (lengths >= 2)
    first11 = int(starts[ones_long][0]) if ones_long.any() else None
    return _RunScan(n, starts[zmask], lengths[zmask],
                    starts[omask], lengths[omask], first11)


def _decode_pairs(zero_first: list[tuple[int, int]],
                  one_lengths, first11: int | None) -> dict:
    """Shared decode: zero_first is [(first position, run length)] sorted by
    run length; positions are 0-based starts of the flanked runs."""
    pairs: dict[int, int] = {}
    if zero_first:
        positions = [p for p, _ in zero_first]
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise InconsistentOrbit(
                "flanked zero-runs appear out of first-occurrence order")
        if first11 is None or first11 >= zero_first[0][0] - 1:
            raise InconsistentOrbit(
                "a flanked zero-run precedes the first adjacent ones")
        prev_f, prev_k = 0, 1
        for n, (_, m) in enumerate(zero_first, start=1):
            diff = m - prev_f
            if diff <= 0 or diff & (diff - 1):
                raise InconsistentOrbit(
                    f"zero-run length {m} is no valid milestone after {prev_f}")
            k_n = (diff.bit_length() - 1) + n + 1
            if k_n <= prev_k:
                raise InconsistentOrbit(
                    f"decoded parameter {k_n} at stage {n} not increasing")
            pairs[n] = k_n
            prev_f, prev_k = m, k_n
    if len(one_lengths):
        uniq = sorted(set(int(v) for v in one_lengths))
        if len(uniq) > 1:
            raise InconsistentOrbit(f"one-runs of differing lengths {uniq}")
        b = uniq[0]
        if b < 2 or b & (b - 1):
            raise InconsistentOrbit(f"one-run length {b} is not 2^(k_1-1)")
        k1 = b.bit_length()
        if 1 in pairs and pairs[1] != k1:
            raise InconsistentOrbit(
                f"one-runs give k_1={k1} but zero-runs give k_1={pairs[1]}")
        pairs.setdefault(1, k1)
    if first11 is not None:
        pairs[0] = 1
    return pairs


def recover_k_table(bits) -> KTable:
    """Decode construction parameters from an orbit prefix.

    Prefix-stable: reading more bits only adds pairs.  Raises
    InconsistentOrbit when the runs cannot belong to any parameter
    sequence (out-of-order first occurrences, non-power-of-two milestone
    gaps, mismatched one-runs).
    """
    scan = _scan_runs(bits)
    zero_first: list[tuple[int, int]] = []
    if len(scan.zero_lengths):
        vals, first_idx = np.unique(scan.zero_lengths, return_index=True)
        zero_first = [(int(scan.zero_starts[i]), int(v))
                      for v, i in zip(vals, first_idx)]
    pairs = _decode_pairs(zero_first, scan.one_lengths,
                          scan.first_adjacent_ones)
    return KTable.from_dict(pairs)


@dataclass(frozen=True)
class RunOrderViolation:
    kind: str
    position: int  # 1-based pattern start
    detail: str


@dataclass(frozen=True)
class RunOrderReport:
    """Scan of an orbit against the run grammar of a known sequence.

    `strict_run_lengths` notes that the scan also rejects any flanked
    run whose length no parameter prefix can produce; those runs have
    probability zero under the construction, so rejecting them is sound
    but stronger than first-occurrence ordering alone.
    """

    passed: bool
    violations: tuple[RunOrderViolation, ...]
    first_occurrences: dict
    strict_run_lengths: bool = True


def run_order_report(bits, k: KSequence) -> RunOrderReport:
    scan = _scan_runs(bits)
    ms = k.milestones()
    allowed_zero = set(ms[1:])
    one_len = 1 << (k[1] - 1) if len(k) > 1 else None
    violations: list[RunOrderViolation] = []
    firsts: dict[int, int] = {}
    if scan.first_adjacent_ones is not None:
        firsts[0] = scan.first_adjacent_ones + 1
    for s, ln in zip(scan.zero_starts, scan.zero_lengths):
        s, ln = int(s), int(ln)
        if ln in allowed_zero:
            n = ms.index(ln)
            firsts.setdefault(n, s)  # 0-based run start, fixed below
        elif ln <= ms[-1]:
            violations.append(RunOrderViolation(
                "invalid-zero-run", s, f"flanked zero-run of length {ln}"))
    for s, ln in zip(scan.one_starts, scan.one_lengths):
        if one_len is not None and int(ln) != one_len:
            violations.append(RunOrderViolation(
                "invalid-one-run", int(s) + 1,
                f"flanked one-run of length {int(ln)}, expected {one_len}"))
    # convert zero-pattern firsts to 1-based pattern starts (the 1 before the run)
    for n in list(firsts):
        if n > 0:
            firsts[n] = firsts[n]  # 0-based run start == 1-based position of the '1'
    seen = sorted((n, pos) for n, pos in firsts.items())
    for (na, pa), (nb, pb) in zip(seen, seen[1:]):
        if pb <= pa:
            violations.append(RunOrderViolation(
                "order", pb,
                f"pattern for stage {nb} (pos {pb}) precedes stage {na} (pos {pa})"))
    return RunOrderReport(not violations, tuple(violations), firsts)


def estimate_from_orbit(x: str, precision_k: int, bits,
                        ktable: KTable | None = None) -> Fraction | None:
    """Block probability estimate within 1/precision_k, or None if the
    orbit does not yet pin down enough parameters.

    Uses the shallowest stage whose enclosure is narrower than the target,
    so the answer never changes once defined (orbit extensions only add
    parameters beyond the chosen stage).
    """
    if precision_k < 1:
        raise SlowRateError("precision must be >= 1")
    kt = ktable if ktable is not None else recover_k_table(bits)
    prefix = kt.as_prefix()
    if not prefix:
        return None
    target = Fraction(1, precision_k)
    for n in range(len(prefix)):
        bound = Fraction(1, 1 << (n + 1)) \
            + (len(x) - 1) * Fraction(1, 1 << prefix[n])
        if bound < target:
            p = build_slowrate_process(KSequence(prefix[:n + 1]))
            lo, hi = block_prob_enclosure(p, x, n)
            return (lo.as_fraction() + hi.as_fraction()) / 2
    return None


# --- indexed recovery over a shared label -------------------------------------

class OrbitWindowIndex:
    """Run index over one long label text for batch window recovery.

    Every finite orbit of a point below a stage top reads off a window of
    that stage's label (crossing at most one repetition seam), so Monte
    Carlo experiments over many seeds can share one scan of the text.
    ``recover_window(start, length)`` returns exactly what
    ``recover_k_table(text[start:start+length])`` returns; the
    equivalence is property-tested at materializable scale.
    """

    def __init__(self, text: str):
        self.length = len(text)
        scan = _scan_runs(text)
        self._by_len: dict[int, np.ndarray] = {}
        for v in np.unique(scan.zero_lengths):
            self._by_len[int(v)] = scan.zero_starts[scan.zero_lengths == v]
        self._one_starts = scan.one_starts
        self._one_lengths = scan.one_lengths
        arr = _as_bit_array(text)
        ones2 = (arr[:-1] == ord("1")) & (arr[1:] == ord("1")) \
            if self.length >= 2 else np.zeros(0, bool)
        self._pos11 = np.flatnonzero(ones2)

    def _first_in(self, starts: np.ndarray, lo: int, hi: int) -> int | None:
        i = np.searchsorted(starts, lo)
        if i < len(starts) and starts[i] <= hi:
            return int(starts[i])
        return None

    def recover_window(self, start: int, length: int) -> KTable:
        a, b = start, start + length
        if a < 0 or b > self.length:
            raise SlowRateError("window out of range")
        zero_first = []
        for ln, starts in self._by_len.items():
            pos = self._first_in(starts, a + 1, b - ln - 1)
            if pos is not None:
                zero_first.append((pos, ln))
        zero_first.sort(key=lambda t: t[1])
        one_lengths = []
        for ln in np.unique(self._one_lengths):
            starts = self._one_starts[self._one_lengths == ln]
            if self._first_in(starts, a + 1, b - int(ln) - 1) is not None:
                one_lengths.append(int(ln))
        i = np.searchsorted(self._pos11, a)
        first11 = None
        if i < len(self._pos11) and self._pos11[i] + 2 <= b:
            first11 = int(self._pos11[i]) - a
        zero_first = [(p - a, ln) for p, ln in zero_first]
        return KTable.from_dict(
            _decode_pairs(zero_first, one_lengths, first11))


# --- rate-targeted parameter choice and certificates ---------------------------

def choose_k_for_rate(rate, stages: int, t_cap: int = 512) -> KSequence:
    """Greedy parameters making stage-n deviation probability exceed the rate.

    Picks k_n = max(k_(n-1)+n, least t with 2^-(n+2) > rate(2^(t-(n+1)-1))),
    so each stage has a half-padding event of measure >= 2^-(n+2) at a
    length where the rate has already dropped below it.  The gap condition
    holds by construction.
    """
    probes: list[tuple[int, Fraction]] = []

    def _rate(m: int) -> Fraction:
        v = Fraction(rate(m))
        for pm, pv in probes:
            if (pm < m and pv < v) or (pm > m and pv > v):
                raise SlowRateError(f"rate oracle not decreasing near {m}")
        probes.append((m, v))
        return v

    if not _rate(1) < 1:
        raise SlowRateError("rate must be < 1")
    ks = [1]
    for n in range(1, stages + 1):
        t = max(ks[-1] + 1, n + 2)
        while t <= t_cap:
            if Fraction(1, 1 << (n + 2)) > _rate(1 << (t - n - 2)):
                break
            t += 1
        else:
            raise SlowRateError(
                f"rate never drops below 2^-({n}+2) within t cap {t_cap}")
        ks.append(max(ks[-1] + n, t))
    return KSequence(ks)


@dataclass(frozen=True)
class SlowRateCertificate:
    """Machine-checkable witness that the stage-n deviation event has
    probability above 2^-(n+2) (and above rate(h') when a rate is given).

    All probabilities are raw (unnormalized) measures.
    """

    n: int
    h_prime: int
    lower_bound: Dyadic
    r_of_h_prime: Fraction | None
    passed: bool
    degenerate: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "h_prime": str(self.h_prime),
            "lower_bound": self.lower_bound.to_json(),
            "r_of_h_prime": (None if self.r_of_h_prime is None
                             else str(self.r_of_h_prime)),
            "pass": self.passed,
            "degenerate": self.degenerate,
        }


def slow_rate_certificate(p: ProcessHandle, n: int, rate=None
                          ) -> SlowRateCertificate:
    """Certificate for stage n: all-zero windows of length h' have
    probability >= 2^-(n+2), re-verified against the exact stage count.

    h' is half the stage padding height; when the padding is a single
    level (k_n = n+1) the degenerate h' = 1 still satisfies the bound.
    """
    if n < 1 or n > p.depth:
        raise SlowRateError(f"stage {n} not built")
    kn = p.k[n]
    degenerate = kn < n + 2
    h_prime = 1 if degenerate else 1 << (kn - n - 2)
    lower = Dyadic.pow2(-(n + 2))
    exact = uniform_block_prob(p, n, "0", h_prime)
    ok = exact >= lower
    r_val = None
    passed = ok
    if rate is not None:
        r_val = Fraction(rate(h_prime))
        passed = ok and lower.as_fraction() > r_val
    return SlowRateCertificate(n, h_prime, lower, r_val, passed, degenerate)
