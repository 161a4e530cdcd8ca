"""Command-line interface: exact, estimate, sweep and verify.

Exit codes: 0 success, 1 verification failures, 2 bad input or domain error,
3 accuracy or internal-consistency failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict

import numpy as np

from .errors import AccuracyError, ConsistencyError, DomainError, ResourceError, WeylNagyError
from .estimators import estimate, estimate_thm3, zeta_form_bracket, ESTIMATORS
from .kernels import R_MIN_ORACLE, ClassParams, Metric
from .oracle import DEFAULT_REL_TOL, R_MIN_LINF, exact_deviation
from . import verify as vf

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

FIELDS = (
    "r", "beta", "n", "p", "normalized_exact", "exact_halfwidth", "principal_thm3",
    "delta_thm3", "regime", "bracket6g_lo", "bracket6g_hi", "ratio_to_principal",
)


class InputError(Exception):
    """Bad flag value detected after argparse."""


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def default_tol(environ=None):
    """Tolerance from WN_TOL if set, else the oracle default."""
    env = os.environ if environ is None else environ
    text = env.get("WN_TOL")
    if text is None or text.strip() == "":
        return DEFAULT_REL_TOL
    try:
        return float(text)
    except ValueError:
        raise InputError(f"WN_TOL must be a number, got {text!r}") from None


def output_record(params, rel_tol, exact_only=False):
    """One OutputRecord dict plus the oracle method tag."""
    p1 = params.p is Metric.L1
    if p1 and not exact_only and not (params.r > 2.0):
        raise DomainError(
            f"r > 2 is required for the bracket and estimate fields, got r={params.r}; "
            f"pass --exact-only for the oracle alone (needs r >= {R_MIN_ORACLE})"
        )
    if p1 and params.r < R_MIN_ORACLE:
        raise DomainError(f"the p=1 oracle needs r >= {R_MIN_ORACLE}, got r={params.r}")
    if not p1 and params.r < R_MIN_LINF:
        raise DomainError(f"the p=inf oracle needs r >= {R_MIN_LINF}, got r={params.r}")
    dev = exact_deviation(params, rel_tol)
    rec = dict.fromkeys(FIELDS)
    rec.update(r=params.r, beta=params.beta, n=params.n, p=params.p.value,
               normalized_exact=dev.value, exact_halfwidth=dev.half_width)
    if p1 and params.r > 2.0 and not exact_only:
        est = estimate_thm3(params)
        lo, hi, _ = zeta_form_bracket(params)
        rec.update(principal_thm3=est.principal, delta_thm3=est.delta,
                   regime=est.regime.value, bracket6g_lo=lo, bracket6g_hi=hi,
                   ratio_to_principal=dev.value / est.principal)
    return rec, dev.method


def records_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for rec in records:
        w.writerow([_fmt(rec[k]) for k in FIELDS])
    return buf.getvalue()


def parse_set(text, kind=float):
    """Comma list ``a,b,c`` or range ``lo:hi:count`` (inclusive, evenly spaced)."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            vals = np.linspace(lo, hi, count).tolist()
            if kind is int:
                vals = sorted({int(round(v)) for v in vals})
            return [kind(v) for v in vals]
        vals = [kind(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise InputError(f"cannot parse value set {text!r}") from None
    if not vals:
        raise InputError(f"empty value set {text!r}")
    return vals


def _params_from(args):
    return ClassParams(args.r, args.beta, args.n, Metric.parse(args.p))


def _tol(args):
    tol = args.tol if args.tol is not None else default_tol()
    if not (math.isfinite(tol) and tol > 0.0):
        raise InputError(f"tolerance must be positive, got {tol}")
    return tol


def cmd_exact(args, out):
    params = _params_from(args)
    rec, method = output_record(params, _tol(args), args.exact_only)
    if args.format == "json":
        doc = {k: _json_value(v) for k, v in rec.items()}
        doc["method"] = method
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(records_csv([rec]))
    return EXIT_OK


def cmd_estimate(args, out):
    params = _params_from(args)
    est = estimate(args.theorem, params)
    doc = asdict(est)
    doc["regime"] = est.regime.value if est.regime is not None else None
    doc = {"r": params.r, "beta": params.beta, "n": params.n, **doc}
    if args.format == "json":
        out.write(json.dumps({k: _json_value(v) for k, v in doc.items()}, indent=2) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(doc))
        w.writerow([_fmt(v) for v in doc.values()])
        out.write(buf.getvalue())
    return EXIT_OK


def _atomic_write(path, text):
    """Write via a temporary file in the target directory; nothing is left on failure."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wn-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def cmd_sweep(args, out):
    tol = _tol(args)
    metric = Metric.parse(args.p)
    rs = parse_set(args.r_set)
    ns = parse_set(args.n_set, int)
    bs = parse_set(args.beta_set)
    records = []
    for r in sorted(set(rs)):
        for n in sorted(set(ns)):
            for beta in sorted(set(bs)):
                rec, _ = output_record(ClassParams(r, beta, n, metric), tol)
                records.append(rec)
    text = records_csv(records)
    if args.out in (None, "-"):
        out.write(text)
    else:
        _atomic_write(args.out, text)
        print(f"wrote {len(records)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, out):
    tol = _tol(args)
    if args.count < 1:
        raise InputError(f"--count must be >= 1, got {args.count}")
    baselines = None
    if args.suite in ("constants", "all") and not args.write_baseline:
        try:
            baselines = vf.load_baselines(args.baseline)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read baseline file {args.baseline!r}: {exc}") from None
    if args.write_baseline:
        doc = {preset: vf.measure_baselines(preset, tol) for preset in sorted(vf.PRESETS)}
        _atomic_write(args.write_baseline, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wrote baselines to {args.write_baseline}", file=sys.stderr)
        return EXIT_OK
    report = vf.run_suite(args.suite, args.seed, args.count, args.grid_preset, baselines, tol)
    text = report.to_json()
    if args.out in (None, "-"):
        out.write(text)
    else:
        _atomic_write(args.out, text)
    s = report.summary
    print(
        f"{s['passed']}/{s['total']} checks passed, {s['vacuous']} vacuous, "
        f"{s['errored']} errored, {s['blocking_failures']} blocking failures",
        file=sys.stderr,
    )
    return EXIT_OK if report.ok else EXIT_FAIL


def _add_point(sp, need_p=True):
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--n", type=int, required=True)
    if need_p:
        sp.add_argument("--p", choices=("1", "inf"), default="1")
    sp.add_argument("--tol", type=float, default=None,
                    help="relative oracle tolerance (default: $WN_TOL or 1e-9)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="weylnagy",
        description="Deviations of Fourier sums on Weyl-Nagy classes (all values times n^r).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("exact", help="certified oracle value at one point")
    _add_point(sp)
    sp.add_argument("--exact-only", action="store_true",
                    help="skip estimate and bracket fields (allows 1.05 <= r <= 2)")
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("estimate", help="closed-form estimate at one point")
    sp.add_argument("--theorem", choices=sorted(ESTIMATORS), required=True)
    _add_point(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("sweep", help="oracle plus estimates over a grid, as CSV")
    sp.add_argument("--r-set", required=True, help="comma list or lo:hi:count")
    sp.add_argument("--n-set", required=True, help="comma list or lo:hi:count")
    sp.add_argument("--beta-set", default="0", help="comma list or lo:hi:count")
    sp.add_argument("--p", choices=("1", "inf"), default="1")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--out", default=None, help="CSV path (default: stdout)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="inequality, bracket and constant suites")
    sp.add_argument("--suite", choices=("inequalities", "brackets", "constants", "all"),
                    default="all")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--grid-preset", choices=sorted(vf.PRESETS), default="smoke")
    sp.add_argument("--baseline", default=None, help="baseline JSON (default: packaged)")
    sp.add_argument("--write-baseline", default=None, metavar="PATH",
                    help="measure constants for every preset and write them to PATH")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--out", default=None, help="report path (default: stdout)")
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args, out)
    except (InputError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AccuracyError, ResourceError, ConsistencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WeylNagyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # keep the exit-code contract total
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
