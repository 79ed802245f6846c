"""Stage-wise adversary: a process that falsifies a given estimator family.

At stage n the adversary reads the previous stage's label, offers every
suffix of it to the first min(n, E) estimators, and collects claims of
the form "P(0^m) < 2^-(code+2)" (code pairs the estimator index with the
suffix start).  Every fresh claiming code gets its dyadic band stacked
into the next column, doubled far enough that the band's label carries
at least 2m(code) zeros.  Points in the lower half of that band then
open with 0^m, so P(0^m) >= 2^-(code+2): the claim is false, and the
witness records exactly the arithmetic that proves it.

Estimators that never claim under the given budgets are reported as
silent: on this process they never produce the claimed answers at all,
so they fail the estimation contract by never finishing rather than by
being wrong.  All probabilities in witnesses are raw (unnormalized)
measures; the built support has measure 1/2 + sum of the stacked band
widths, which only makes the reported lower bounds conservative.

Stage growth is guarded: parameter jumps scale the next height by the
largest claiming code, so a stage whose suffix count exceeds the
configured cap aborts the build with a budget report instead of silently
exploding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dyadic import Dyadic, ONE
from .columns import base_slab, double, stack, dyadic_band, SYMBOL_HALVES
from .process import ProcessHandle, block_prob, uniform_block_prob
from .estimators import Estimator, ClaimQuery, makes_claim


class AdversaryError(ValueError):
    pass


def pair_code(e: int, i: int) -> int:
    """Cantor pairing of (estimator index, suffix start), both >= 1."""
    if e < 1 or i < 1:
        raise AdversaryError("pairing arguments must be >= 1")
    s = e + i - 2
    return s * (s + 1) // 2 + e


def unpair_code(c: int) -> tuple[int, int]:
    if c < 1:
        raise AdversaryError("code must be >= 1")
    s = 0
    while (s + 1) * (s + 2) // 2 < c:
        s += 1
    e = c - s * (s + 1) // 2
    return e, s + 2 - e


@dataclass(frozen=True)
class EvalBudgets:
    k_budget: int = 64
    m_budget: int = 16
    step_budget: int | None = 10 ** 6
    suffix_cap: int = 1 << 14

    def to_json(self) -> dict:
        return {"k": self.k_budget, "m": self.m_budget,
                "steps": self.step_budget, "suffix_cap": self.suffix_cap}

    @classmethod
    def from_json(cls, obj) -> "EvalBudgets":
        return cls(obj.get("k", 64), obj.get("m", 16), obj.get("steps"),
                   obj.get("suffix_cap", 1 << 14))


@dataclass(frozen=True)
class Claim:
    estimator: int  # 1-based index e
    suffix_start: int  # 1-based level i
    code: int
    m: int  # minimal claimed window length under the m budget


@dataclass(frozen=True)
class FalsificationWitness:
    """Everything needed to recheck one falsified claim from scratch."""

    estimator_name: str
    e: int
    i: int
    code: int
    m: int
    stage: int
    claimed_bound: Dyadic  # 2^-(code+2): the claim asserts P(0^m) below this
    proven_bound: Dyadic   # measure of the lower half-band opening with 0^m
    suffix_stage: int
    suffix_start: int
    suffix_length: int

    def to_json(self) -> dict:
        return {
            "estimator": self.estimator_name, "e": self.e, "i": self.i,
            "code": self.code, "m": str(self.m), "stage": self.stage,
            "claimed_bound": self.claimed_bound.to_json(),
            "proven_bound": self.proven_bound.to_json(),
            "suffix": {"stage": self.suffix_stage,
                       "start": str(self.suffix_start),
                       "length": str(self.suffix_length)},
            "probability_convention": "raw",
        }


@dataclass(frozen=True)
class BudgetAbort:
    stage: int
    height: int
    suffix_cap: int


@dataclass(frozen=True)
class StageRecord:
    n: int
    k_n: int
    claims: tuple[Claim, ...]      # minimal found claim per fresh code
    new_codes: tuple[int, ...]     # codes first stacked at this stage


@dataclass
class StageTrace:
    budgets: EvalBudgets
    estimator_names: tuple[str, ...]
    records: list[StageRecord] = field(default_factory=list)
    witnesses: list[FalsificationWitness] = field(default_factory=list)
    abort: BudgetAbort | None = None

    def verdicts(self) -> dict:
        """Per estimator: 'falsified' with witnesses, or 'silent'."""
        out = {}
        for idx, name in enumerate(self.estimator_names, start=1):
            ws = [w for w in self.witnesses if w.e == idx]
            out[name] = {"verdict": "falsified" if ws else "silent",
                         "witnesses": ws}
        return out

    def to_json(self) -> dict:
        return {
            "budgets": self.budgets.to_json(),
            "estimators": list(self.estimator_names),
            "stages": [{"n": r.n, "k_n": r.k_n,
                        "new_codes": list(r.new_codes),
                        "claims": [{"e": c.estimator, "i": c.suffix_start,
                                    "code": c.code, "m": str(c.m)}
                                   for c in r.claims]}
                       for r in self.records],
            "witnesses": [w.to_json() for w in self.witnesses],
            "abort": (None if self.abort is None else
                      {"stage": self.abort.stage,
                       "height": str(self.abort.height),
                       "suffix_cap": self.abort.suffix_cap}),
        }


def _ceil_log2(v: int) -> int:
    return (v - 1).bit_length()


def build_adversary(estimators: list[Estimator], stages: int,
                    budgets: EvalBudgets = EvalBudgets(),
                    pattern_cap: int | None = None
                    ) -> tuple[ProcessHandle, StageTrace]:
    """Run the stage-wise construction against the estimator family.

    Stage n evaluates claims for estimators e <= min(n, E) on all label
    suffixes of stage n-1 (lazily extracted), takes the minimal claimed
    window per fresh code, and stacks the corresponding bands.  With no
    fresh claims the stage is a plain doubling.  Claim evaluation order
    (e, then suffix start, then window length) is deterministic, so
    rebuilding from the same family and budgets reproduces the trace.
    """
    if stages < 1:
        raise AdversaryError("need at least one stage")
    trace = StageTrace(budgets, tuple(f.name for f in estimators))
    cols = [base_slab(SYMBOL_HALVES[1])]
    ks = [1]
    used_codes: set[int] = set()
    witnesses = trace.witnesses
    for n in range(1, stages + 1):
        prev = cols[-1]
        h_prev = prev.height
        if h_prev > budgets.suffix_cap:
            trace.abort = BudgetAbort(n, h_prev, budgets.suffix_cap)
            break
        label_prev = prev.label(pattern_cap=pattern_cap)
        claims: list[Claim] = []
        for e in range(1, min(n, len(estimators)) + 1):
            f = estimators[e - 1]
            for i in range(1, h_prev + 1):
                code = pair_code(e, i)
                if code in used_codes:
                    continue
                if f.nonnegative and (1 << (code + 2)) + 1 > budgets.k_budget:
                    continue  # no precision under budget can claim below 2^-(code+2)
                suffix = label_prev.extract(i, h_prev - i + 1)
                for m in range(1, budgets.m_budget + 1):
                    q = ClaimQuery(code, m, suffix, budgets.k_budget,
                                   budgets.m_budget)
                    if makes_claim(f, q, budgets.step_budget):
                        claims.append(Claim(e, i, code, m))
                        break
        claims.sort(key=lambda c: c.code)
        new_codes = tuple(c.code for c in claims)
        if not claims:
            k_n = ks[-1] + 1
            col = double(prev, 1)
        else:
            k_n = max(ks[-1] + 1,
                      max(c.code + 1 + _ceil_log2(2 * c.m) for c in claims))
            parts = [double(prev, k_n - ks[-1])]
            for c in claims:
                band = double(base_slab(dyadic_band(c.code)),
                              k_n - c.code - 1)
                if band.width != Dyadic.pow2(-k_n):
                    raise AdversaryError(f"stage {n}: width alignment broken")
                parts.append(band)
            col = stack(*parts)
            for c in claims:
                witnesses.append(FalsificationWitness(
                    estimator_name=estimators[c.estimator - 1].name,
                    e=c.estimator, i=c.suffix_start, code=c.code, m=c.m,
                    stage=n,
                    claimed_bound=Dyadic.pow2(-(c.code + 2)),
                    proven_bound=Dyadic.pow2(-(c.code + 2)),
                    suffix_stage=n - 1, suffix_start=c.suffix_start,
                    suffix_length=h_prev - c.suffix_start + 1))
            used_codes.update(new_codes)
        if col.width != Dyadic.pow2(-k_n):
            raise AdversaryError(f"stage {n}: width invariant broken")
        trace.records.append(StageRecord(n, k_n, tuple(claims), new_codes))
        cols.append(col)
        ks.append(k_n)
    meta = {"kind": "adversary", "stages": stages,
            "budgets": budgets.to_json(),
            "estimators": [f.config() for f in estimators]}
    if pattern_cap is not None:
        meta["pattern_cap"] = pattern_cap
    handle = ProcessHandle(tuple(cols), tuple(ks), "adversary", meta)
    return handle, trace


def decide_claim_truth(p: ProcessHandle, code: int, m: int) -> bool | None:
    """Is P(0^m) < 2^-(code+2) true on this process?

    False is definitive once any built stage's exact count already meets
    the threshold (stage values only grow).  True needs control of the
    limit: available for full-measure constructions through enclosures,
    undecidable from a finite adversary build, where deeper stages may
    still add zero mass; those cases return None.
    """
    threshold = Dyadic.pow2(-(code + 2))
    for n in range(p.depth, -1, -1):
        if uniform_block_prob(p, n, "0", m) >= threshold:
            return False
    if p.kind != "slowrate":
        return None
    extra = Dyadic(m - 1)
    for n in range(p.depth + 1):
        lo = uniform_block_prob(p, n, "0", m)
        hi = lo + (ONE - p.support_measure(n)) + extra * p.width(n)
        if hi < threshold:
            return True
        if lo >= threshold:
            return False
    return None


def verify_witness(p: ProcessHandle, trace: StageTrace,
                   w: FalsificationWitness,
                   estimators: list[Estimator] | None = None) -> bool:
    """Recheck a witness from first principles.

    Confirms (a) the stacked band's label is all zeros and long enough to
    cover 2m, (b) its lower half measures exactly 2^-(code+2), (c) the
    final stage's exact count already gives P(0^m) >= that bound, and
    (d) when the estimator family is supplied, the recorded suffix still
    elicits the claim.
    """
    rec = next((r for r in trace.records if r.n == w.stage), None)
    if rec is None or w.code not in rec.new_codes:
        return False
    k_n = rec.k_n
    band_height = 1 << (k_n - w.code - 1)
    if band_height < 2 * w.m:
        return False
    half_measure = Dyadic(band_height // 2) * Dyadic.pow2(-k_n)
    if half_measure != Dyadic.pow2(-(w.code + 2)):
        return False
    if w.claimed_bound != Dyadic.pow2(-(w.code + 2)) \
            or w.proven_bound != half_measure:
        return False
    if uniform_block_prob(p, p.depth, "0", w.m) < w.proven_bound:
        return False
    if estimators is not None:
        f = estimators[w.e - 1]
        suffix = p.stage_label(w.suffix_stage).extract(
            w.suffix_start, w.suffix_length)
        q = ClaimQuery(w.code, w.m, suffix,
                       trace.budgets.k_budget, trace.budgets.m_budget)
        if not makes_claim(f, q, trace.budgets.step_budget):
            return False
    return True


def entropy_spotcheck(p: ProcessHandle, samples: int = 32, seed: int = 0,
                      max_len: int | None = None) -> list[dict]:
    """Per-stage check of the zero-entropy mechanism at finite depth.

    Asserts height >= 2^(k_n - 1) and, on sampled label windows, that the
    stage probability of the window is >= the stage width (every window
    of the label occurs in it at least once).
    """
    import random as _random
    rng = _random.Random(seed)
    cap = max_len or p.meta.get("pattern_cap") or 64
    out = []
    for n in range(p.depth + 1):
        h, kn = p.height(n), p.k[n]
        ok_height = h >= 1 << (kn - 1)
        ok_windows = True
        for _ in range(samples):
            ln = rng.randint(1, min(cap, h))
            i = rng.randint(1, h - ln + 1)
            window = p.stage_label(n).extract(i, ln)
            if block_prob(p, n, window) < p.width(n):
                ok_windows = False
                break
        out.append({"stage": n, "height_ok": ok_height,
                    "windows_ok": ok_windows,
                    "passed": ok_height and ok_windows})
    return out
