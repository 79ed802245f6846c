"""Grammar-compressed binary label strings.

Stage labels grow like 2^(stage depth), so they are never stored flat.
A label is a view over the column expression tree: a base slab is one
symbol, a doubled column repeats its label 2^n times, a stacked column
concatenates.  All queries (length, extraction, occurrence counting,
run statistics) walk that grammar.

Occurrence counting uses the standard straight-line-program scheme: per
node and pattern we keep (count, prefix fringe, suffix fringe) where the
fringes have length |pattern|-1, and concatenations add a boundary scan
of the joined fringes.  Repetition nodes are folded by binary
exponentiation, since the per-pattern summaries form a monoid under
concatenation.  Patterns consisting of a single repeated symbol (0^m,
1^m) and single-run patterns (1 0^m 1, 0 1^m 0) are answered exactly
from run-length profiles instead, with no length cap.
"""

from __future__ import annotations

from dataclasses import dataclass


class LabelError(ValueError):
    pass


class PatternTooLong(LabelError):
    pass


DEFAULT_PATTERN_CAP = 64


def brute_count(text: str, pattern: str) -> int:
    """Overlapping occurrence count by repeated scan; the test oracle."""
    if not pattern:
        raise LabelError("empty pattern")
    n, i = 0, text.find(pattern)
    while i >= 0:
        n += 1
        i = text.find(pattern, i + 1)
    return n


# --- per-pattern summaries ---------------------------------------------------

@dataclass(frozen=True, slots=True)
class _PatState:
    length: int
    count: int
    prefix: str  # first min(length, |pattern|-1) symbols
    suffix: str  # last  min(length, |pattern|-1) symbols


def _boundary_count(sa: str, pb: str, pattern: str) -> int:
    """Occurrences straddling the seam between a suffix fringe and a prefix fringe."""
    p = len(pattern)
    joined = sa + pb
    n = 0
    for t in range(max(0, len(sa) - p + 1), len(sa)):
        if t + p <= len(joined) and joined.startswith(pattern, t):
            n += 1
    return n


def _pat_combine(a: _PatState, b: _PatState, pattern: str) -> _PatState:
    q = len(pattern) - 1
    length = a.length + b.length
    count = a.count + b.count + _boundary_count(a.suffix, b.prefix, pattern)
    prefix = (a.prefix + b.prefix)[:min(q, length)]
    tail = a.suffix + b.suffix
    suffix = tail[max(0, len(tail) - min(q, length)):]
    return _PatState(length, count, prefix, suffix)


def _pat_power(st: _PatState, reps: int, pattern: str) -> _PatState:
    if reps == 1:
        return st
    acc = None
    sq = st
    r = reps
    while r > 0:
        if r & 1:
            acc = sq if acc is None else _pat_combine(acc, sq, pattern)
        r >>= 1
        if r:
            sq = _pat_combine(sq, sq, pattern)
    return acc


# --- run-length profiles -----------------------------------------------------

@dataclass(frozen=True, slots=True)
class RunProfile:
    """Maximal-run statistics of one symbol within a label.

    `inner` maps run length -> count for runs flanked by the other symbol
    on both sides; `lead`/`trail` are the unflanked boundary runs (equal to
    `length` when the whole string is the symbol, flagged by `uniform`).
    """

    length: int
    lead: int
    trail: int
    inner: tuple[tuple[int, int], ...]
    uniform: bool

    def inner_count(self, run_length: int) -> int:
        for ln, c in self.inner:
            if ln == run_length:
                return c
        return 0

    def count_uniform_pattern(self, m: int) -> int:
        """Occurrences of symbol^m."""
        if self.uniform:
            return max(0, self.length - m + 1)
        total = max(0, self.lead - m + 1) + max(0, self.trail - m + 1)
        for ln, c in self.inner:
            if ln >= m:
                total += c * (ln - m + 1)
        return total


def _runs_combine(a: RunProfile, b: RunProfile) -> RunProfile:
    if a.uniform and b.uniform:
        n = a.length + b.length
        return RunProfile(n, n, n, (), True)
    if a.uniform:
        return RunProfile(a.length + b.length, a.length + b.lead, b.trail,
                          b.inner, False)
    if b.uniform:
        return RunProfile(a.length + b.length, a.lead, a.trail + b.length,
                          a.inner, False)
    inner = dict(a.inner)
    for ln, c in b.inner:
        inner[ln] = inner.get(ln, 0) + c
    seam = a.trail + b.lead
    if seam > 0:
        inner[seam] = inner.get(seam, 0) + 1
    return RunProfile(a.length + b.length, a.lead, b.trail,
                      tuple(sorted(inner.items())), False)


def _runs_power(st: RunProfile, reps: int) -> RunProfile:
    if reps == 1:
        return st
    acc = None
    sq = st
    r = reps
    while r > 0:
        if r & 1:
            acc = sq if acc is None else _runs_combine(acc, sq)
        r >>= 1
        if r:
            sq = _runs_combine(sq, sq)
    return acc


def _single_run_form(pattern: str) -> tuple[str, int] | None:
    """Recognize c b^m c with b != c; returns (b, m)."""
    if len(pattern) >= 3 and pattern[0] == pattern[-1]:
        body = pattern[1:-1]
        b = body[0]
        if b != pattern[0] and body == b * len(body):
            return b, len(body)
    return None


# --- the label view ----------------------------------------------------------

class LabelString:
    """Symbol string of a compatible column, addressed through its grammar.

    Positions are 1-based.  Summary queries are memoized per (node,
    pattern); the memo lives on this instance, so dropping the label
    releases it.
    """

    def __init__(self, column, pattern_cap: int = DEFAULT_PATTERN_CAP):
        self.column = column
        self.pattern_cap = pattern_cap
        self._pat_memo: dict = {}
        self._run_memo: dict = {}

    def __len__(self) -> int:
        return self.column.height

    @property
    def length(self) -> int:
        return self.column.height

    # -- extraction

    def extract(self, start: int, length: int) -> str:
        """Substring at 1-based `start` of the given length."""
        if length < 0 or start < 1 or start + length - 1 > self.length:
            raise LabelError(
                f"extract({start}, {length}) out of range for length {self.length}")
        if length == 0:
            return ""
        return _extract(self.column, start, length)

    def materialize(self, limit: int = 1 << 20) -> str:
        if self.length > limit:
            raise LabelError(f"label of length {self.length} exceeds limit {limit}")
        return _extract(self.column, 1, self.length)

    # -- counting

    def count_occurrences(self, pattern: str) -> int:
        if not pattern:
            raise LabelError("empty pattern")
        if any(c not in "01" for c in pattern):
            raise LabelError("pattern must be binary")
        if len(pattern) > self.length:
            raise LabelError("pattern longer than string")
        if pattern == pattern[0] * len(pattern):
            prof = self.run_profile(pattern[0])
            return prof.count_uniform_pattern(len(pattern))
        form = _single_run_form(pattern)
        if form is not None:
            prof = self.run_profile(form[0])
            return prof.inner_count(form[1])
        if len(pattern) > self.pattern_cap:
            raise PatternTooLong(
                f"pattern length {len(pattern)} exceeds cap {self.pattern_cap}")
        return self._pat_state(self.column, pattern).count

    def run_profile(self, symbol: str) -> RunProfile:
        if symbol not in "01":
            raise LabelError("symbol must be '0' or '1'")
        return self._run_state(self.column, symbol)

    # -- internals

    def _pat_state(self, col, pattern: str) -> _PatState:
        key = (id(col), pattern)
        hit = self._pat_memo.get(key)
        if hit is not None:
            return hit
        q = len(pattern) - 1
        if col.kind == "base":
            s = str(col.symbol)
            st = _PatState(1, 1 if s == pattern else 0, s[:q], s[:q])
        elif col.kind == "double":
            st = _pat_power(self._pat_state(col.child, pattern),
                            1 << col.times, pattern)
        else:
            st = self._pat_state(col.parts[0], pattern)
            for part in col.parts[1:]:
                st = _pat_combine(st, self._pat_state(part, pattern), pattern)
        self._pat_memo[key] = st
        return st

    def _run_state(self, col, symbol: str) -> RunProfile:
        key = (id(col), symbol)
        hit = self._run_memo.get(key)
        if hit is not None:
            return hit
        if col.kind == "base":
            if str(col.symbol) == symbol:
                st = RunProfile(1, 1, 1, (), True)
            else:
                st = RunProfile(1, 0, 0, (), False)
        elif col.kind == "double":
            st = _runs_power(self._run_state(col.child, symbol), 1 << col.times)
        else:
            st = self._run_state(col.parts[0], symbol)
            for part in col.parts[1:]:
                st = _runs_combine(st, self._run_state(part, symbol))
        self._run_memo[key] = st
        return st


def _extract(col, start: int, length: int) -> str:
    if col.kind == "base":
        return str(col.symbol)
    if col.kind == "double":
        child = col.child
        clen = child.height
        pieces = []
        pos = (start - 1) % clen + 1
        remaining = length
        full = None
        while remaining > 0:
            if pos == 1 and remaining >= clen:
                if full is None:
                    full = _extract(child, 1, clen)
                reps = remaining // clen
                pieces.append(full * reps)
                remaining -= reps * clen
            else:
                take = min(remaining, clen - pos + 1)
                pieces.append(_extract(child, pos, take))
                remaining -= take
                pos = 1
        return "".join(pieces)
    # stack: route the range across parts
    pieces = []
    offset = 0
    remaining = length
    pos = start
    for part in col.parts:
        h = part.height
        if pos > offset + h:
            offset += h
            continue
        local = pos - offset
        take = min(remaining, h - local + 1)
        pieces.append(_extract(part, local, take))
        remaining -= take
        pos += take
        offset += h
        if remaining == 0:
            break
    return "".join(pieces)
