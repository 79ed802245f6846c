"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 budget abort during an adversary build.  Diagnostics go to stderr,
data to stdout or --out.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction

from .dyadic import Dyadic, DyadicError
from .process import (InsufficientStages, block_prob_limit, sample_orbit)
from .slowrate import (KSequence, SlowRateError, build_slowrate_process,
                       choose_k_for_rate, estimate_from_orbit,
                       recover_k_table, slow_rate_certificate)
from .adversary import EvalBudgets, build_adversary
from .estimators import estimator_from_config
from .ryabko import RyabkoSpec, estimate_emission_probability, sample_ryabko
from .stats import curve_csv, rate_curve
from .persist import (load_process, process_to_spec, process_from_spec,
                      rebuild_with_trace)
from .verify import run_process_checks

USAGE_ERROR = 2
VERIFY_ERROR = 1
BUDGET_ABORT = 3


def _fail(msg: str, code: int = USAGE_ERROR):
    print(f"error: {msg}", file=sys.stderr)
    raise SystemExit(code)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_rate(expr: str):
    """Rate oracles accepted on the command line: 'b^-n' or '1/(n+c)'."""
    m = re.fullmatch(r"(\d+)\^-n", expr.strip())
    if m:
        base = int(m.group(1))
        return lambda n: Fraction(1, base ** n)
    m = re.fullmatch(r"1/\(n\+(\d+)\)", expr.replace(" ", ""))
    if m:
        c = int(m.group(1))
        return lambda n: Fraction(1, n + c)
    _fail(f"cannot parse rate {expr!r}; use forms like 2^-n or 1/(n+2)")


def parse_eps(expr: str) -> Dyadic:
    m = re.fullmatch(r"2\^-(\d+)", expr.strip())
    if m:
        return Dyadic.pow2(-int(m.group(1)))
    try:
        return Dyadic.from_fraction(Fraction(expr))
    except (ValueError, ZeroDivisionError, DyadicError):
        _fail(f"eps {expr!r} must be a dyadic rational")


def parse_budgets(expr: str) -> EvalBudgets:
    vals = {}
    for part in expr.split(","):
        key, _, raw = part.partition("=")
        vals[key.strip()] = int(float(raw))
    return EvalBudgets(
        k_budget=vals.get("k", 64), m_budget=vals.get("m", 16),
        step_budget=vals.get("steps"), suffix_cap=vals.get("suffix_cap", 1 << 14))


def cmd_build(args):
    if args.kind in ("theorem2", "slowrate"):
        if bool(args.k) == bool(args.rate):
            _fail("give exactly one of --k and --rate")
        if args.k:
            try:
                k = KSequence([int(v) for v in args.k.split(",")])
            except (ValueError, SlowRateError) as exc:
                _fail(f"bad parameter sequence: {exc}")
            stages = args.stages if args.stages is not None else len(k) - 1
        else:
            if args.stages is None:
                _fail("--rate needs --stages")
            k = choose_k_for_rate(parse_rate(args.rate), args.stages)
            stages = args.stages
        try:
            p = build_slowrate_process(k, stages)
        except SlowRateError as exc:
            _fail(str(exc))
        doc = process_to_spec(p)
        if args.certificates:
            rate = parse_rate(args.rate) if args.rate else None
            doc["certificates"] = [
                slow_rate_certificate(p, n, rate).to_json()
                for n in range(1, p.depth + 1)]
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        print(f"built slowrate process, {p.depth} stages, k={list(p.k)}",
              file=sys.stderr)
        return 0
    # adversary
    if not args.estimators:
        _fail("adversary build needs --estimators")
    with open(args.estimators) as fh:
        cfgs = json.load(fh)
    ests = [estimator_from_config(c) for c in cfgs]
    budgets = parse_budgets(args.budgets) if args.budgets else EvalBudgets()
    handle, trace = build_adversary(ests, args.stages or 8, budgets)
    doc = {"process": process_to_spec(handle), "trace": trace.to_json()}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    for name, verdict in trace.verdicts().items():
        ws = verdict["witnesses"]
        line = f"{name}: {verdict['verdict']}"
        if ws:
            line += " (" + ", ".join(
                f"code {w.code} m={w.m} stage {w.stage}" for w in ws) + ")"
        print(line, file=sys.stderr)
    if trace.abort:
        print(f"stage {trace.abort.stage} aborted: height {trace.abort.height}"
              f" exceeds suffix cap {trace.abort.suffix_cap}", file=sys.stderr)
        return BUDGET_ABORT
    return 0


def _load(path):
    with open(path) as fh:
        doc = json.load(fh)
    spec = doc.get("process", doc)
    return spec, doc


def cmd_sample(args):
    spec, _ = _load(args.process)
    p = process_from_spec(spec)
    lines = []
    for t in range(args.count):
        orbit = sample_orbit(p, args.seed + t, args.len)
        lines.append(orbit.bits)
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_prob(args):
    spec, _ = _load(args.process)
    p = process_from_spec(spec)
    try:
        enc = block_prob_limit(p, args.x, parse_eps(args.eps))
    except InsufficientStages as exc:
        _fail(str(exc), BUDGET_ABORT)
    _emit(json.dumps(enc.to_json()) + "\n", args.out)
    return 0


def cmd_estimate(args):
    spec, _ = _load(args.process)
    p = process_from_spec(spec)
    length = args.len or 256
    value, used = None, 0
    while True:
        try:
            orbit = sample_orbit(p, args.seed, length)
        except InsufficientStages:
            break  # the built stages cannot emit longer orbits for this seed
        used = length
        value = estimate_from_orbit(args.x, args.k, orbit.bits)
        if value is not None or args.len is not None:
            break
        length *= 2
    doc = {"x": args.x, "k": args.k, "orbit_len": used,
           "defined": value is not None,
           "value": None if value is None else str(value)}
    _emit(json.dumps(doc) + "\n", args.out)
    return 0


def cmd_verify(args):
    spec, doc = _load(args.process)
    if spec.get("kind") == "adversary":
        p, trace, ests = rebuild_with_trace(spec)
        checks = run_process_checks(p, trace, ests)
    else:
        p = process_from_spec(spec)
        checks = run_process_checks(p)
    failed = 0
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        detail = f"  ({c.detail})" if c.detail else ""
        print(f"{status} {c.name}{detail}")
        failed += not c.passed
    return VERIFY_ERROR if failed else 0


def cmd_ryabko(args):
    try:
        spec = RyabkoSpec([Fraction(v) for v in args.p.split(",")])
    except ValueError as exc:
        _fail(f"bad bias list: {exc}")
    bits = sample_ryabko(spec, args.seed, args.len)
    if args.estimate:
        kv = dict(part.split("=") for part in args.estimate.split(","))
        j, k = int(kv["j"]), int(kv["k"])
        value = estimate_emission_probability(bits, j, k)
        doc = {"j": j, "k": k, "defined": value is not None,
               "value": None if value is None else str(value)}
        _emit(json.dumps(doc) + "\n", args.out)
    else:
        _emit(bits + "\n", args.out)
    return 0


def cmd_rate_curve(args):
    spec, _ = _load(args.process)
    p = process_from_spec(spec)
    if p.kind != "slowrate":
        _fail("rate-curve needs a slowrate process")
    lengths = [int(v) for v in args.lengths.split(",")]
    points = rate_curve(p, args.x, args.k, lengths, args.trials, args.seed)
    _emit(curve_csv(points), args.out)
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cutstack",
        description="exact construction engine for cutting-and-stacking processes")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a process and save its spec")
    b.add_argument("kind", choices=["theorem2", "slowrate", "adversary"])
    b.add_argument("--k", help="comma-separated parameter sequence, e.g. 1,2,4")
    b.add_argument("--rate", help="target rate, e.g. 2^-n or 1/(n+2)")
    b.add_argument("--stages", type=int)
    b.add_argument("--estimators", help="estimator config JSON (adversary)")
    b.add_argument("--budgets", help="k=...,m=...,steps=...,suffix_cap=...")
    b.add_argument("--certificates", action="store_true",
                   help="attach slow-rate certificates per stage")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("sample", help="emit seeded orbit lines")
    s.add_argument("--process", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--len", type=int, required=True)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    pr = sub.add_parser("prob", help="limit-probability enclosure for a block")
    pr.add_argument("--process", required=True)
    pr.add_argument("--x", required=True)
    pr.add_argument("--eps", default="2^-12")
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_prob)

    es = sub.add_parser("estimate", help="run the orbit estimator on a sample")
    es.add_argument("--process", required=True)
    es.add_argument("--x", required=True)
    es.add_argument("--k", type=int, required=True)
    es.add_argument("--seed", type=int, required=True)
    es.add_argument("--len", type=int)
    es.add_argument("--out")
    es.set_defaults(func=cmd_estimate)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--process", required=True)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("ryabko", help="sample the hidden-state process")
    r.add_argument("--p", required=True, help="bias list, e.g. 1/2,1/3,1/4")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--len", type=int, required=True)
    r.add_argument("--estimate", help="j=...,k=...")
    r.add_argument("--out")
    r.set_defaults(func=cmd_ryabko)

    rc = sub.add_parser("rate-curve", help="empirical deviation curve CSV")
    rc.add_argument("--process", required=True)
    rc.add_argument("--x", required=True)
    rc.add_argument("--k", type=int, required=True)
    rc.add_argument("--lengths", required=True)
    rc.add_argument("--trials", type=int, default=2000)
    rc.add_argument("--seed", type=int, default=0)
    rc.add_argument("--out")
    rc.set_defaults(func=cmd_rate_curve)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (SlowRateError, DyadicError, ValueError) as exc:
        _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
