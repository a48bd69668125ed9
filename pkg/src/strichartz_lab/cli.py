"""Command-line front end: ``strichartz-lab <subcommand> [options]``.

Every campaign prints (or writes under ``--out``) a CSV table and a JSON
summary that embeds the full configuration.  Exit codes: 0 all checks
passed, 1 some check failed, 2 bad configuration, 3 quadrature budget
exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import bessel, dyadic_ops, knapp, oscillatory
from .exponents import INF, ExponentTuple, condition_report, fmt_exponent, parse_exponent, thm11_admissible
from .quadrature import PrecisionError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECISION = 0, 1, 2, 3
THREADS_ENV = "STRICHARTZ_LAB_THREADS"


class ConfigError(ValueError):
    pass


def _exponent(text: str):
    try:
        return parse_exponent(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


# --- subcommands -------------------------------------------------------------------


def cmd_admissible(args):
    e = ExponentTuple(args.d, args.a, args.q, args.p, args.s)
    rows = condition_report(e)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["condition", "d", "a", "q", "p", "s", "result", "boundary_distance"])
    for r in rows:
        t = r["tuple"]
        w.writerow([r["condition"], t["d"], t["a"], t["q"], t["p"], t["s"], str(r["result"]).lower(), r["boundary_distance"]])
    return buf.getvalue(), {"conditions": rows}, []


def cmd_bessel_check(args):
    nus = args.nu
    checks = []
    if args.lemma == "2.2":
        rep = bessel.lemma22_scan(nus, args.rmax_mult, args.n_points, args.tol)
        sups = rep.sup_by_nu()
        spread = max(sups.values()) / min(sups.values())
        checks.append(_check("sup ratio finite", math.isfinite(rep.sup_ratio), sup_ratio=rep.sup_ratio))
        checks.append(_check("cross-order spread <= 2", spread <= 2.0, spread=spread))
    elif args.lemma == "2.3":
        rs = args.r or [50.0, 100.0, 200.0, 400.0]
        rep = bessel.lemma23_scan(rs, lambda r: round(args.nu_mult * r), args.eps, args.K, args.tol)
        # J_nu(r) for nu = 2r is far below the absolute quadrature tolerance, so
        # only boundedness is meaningful here
        checks.append(_check("scaled values bounded by 1", rep.sup_ratio <= 1.0, sup_ratio=rep.sup_ratio))
    elif args.lemma == "2.5":
        rep = bessel.lemma25_scan(nus, args.rmax_mult, args.n_points, args.tol, K=args.K)
        if args.K == 0:
            checks.append(_check("remainder within frozen constant", rep.sup_ratio <= bessel.LEMMA25_CONSTANT,
                                 sup_ratio=rep.sup_ratio, constant=bessel.LEMMA25_CONSTANT))
        else:
            checks.append(_check("corrected remainder finite", math.isfinite(rep.sup_ratio), sup_ratio=rep.sup_ratio))
    elif args.lemma == "2.5-tail":
        try:
            rep = bessel.integer_tail_scan(nus, args.rmax_mult, args.n_points, args.tol)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        checks.append(_check("integer-order tail within frozen constant", rep.sup_ratio <= bessel.INTEGER_TAIL_CONSTANT,
                             sup_ratio=rep.sup_ratio, constant=bessel.INTEGER_TAIL_CONSTANT))
    else:
        raise ConfigError(f"unknown lemma {args.lemma!r}")
    return rep.to_csv(), rep.summary(), checks


PHASES = {
    "quadratic": lambda: oscillatory.polynomial([0, 0, 0.5]),
    "cubic": lambda: oscillatory.polynomial([0, 0, 0.5, 1 / 12]),
}


def cmd_stationary_phase(args):
    lams = [10 ** (math.log10(args.lam_min) + i * (math.log10(args.lam_max) - math.log10(args.lam_min)) / (args.n_lam - 1))
            for i in range(args.n_lam)]
    prob = oscillatory.OscillatoryProblem(PHASES[args.phase](), oscillatory.bump(), lams[0])
    scan = oscillatory.remainder_scan(prob, lams, K=args.K)
    checks = []
    s, e = scan.slopes["remainder"]
    checks.append(_check("remainder slope -3/2 +- 0.1", abs(s + 1.5) <= 0.1, slope=s, stderr=e))
    if args.K >= 1:
        s, e = scan.slopes[f"remainder_K{args.K}"]
        target = -args.K - 1.5
        checks.append(_check(f"corrected slope {target} +- 0.15", abs(s - target) <= 0.15, slope=s, stderr=e))
    buf = io.StringIO()
    cols = ["lambda", "abs_I", "abs_leading", "abs_remainder", "bound"] + (["abs_corrected_remainder"] if args.K >= 1 else [])
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for row in scan.rows:
        w.writerow([repr(float(row[c])) for c in cols])
    summary = {"slopes": {k: {"slope": v[0], "stderr": v[1]} for k, v in scan.slopes.items()}, "lambdas": lams}
    return buf.getvalue(), summary, checks


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def cmd_dyadic_scan(args):
    if args.jmin < 5 or args.jmax > 12 or args.jmin > args.jmax:
        raise ConfigError("need 5 <= jmin <= jmax <= 12")
    res = dyadic_ops.dyadic_scan(args.a, args.d, args.q, args.p, args.nu, (args.jmin, args.jmax), args.lambda_rule,
                                 args.eps, args.n_iter, args.ensemble, args.seed, _threads(args))
    e = ExponentTuple(args.d, 2, args.q, args.p)
    checks = [_check(f"nu={nu:g} has a slope fit", nu in res.slopes) for nu in args.nu if nu not in res.slopes]
    if thm11_admissible(e):
        for nu, (s, err, n) in res.slopes.items():
            checks.append(_check(f"nu={nu:g} decays (slope <= -0.05)", s <= -0.05 and n >= 3, slope=s, stderr=err, n_points=n))
        checks.append(_check("cross-order spread <= 3", res.spread <= 3.0, spread=res.spread))
    else:
        for nu, (s, err, n) in res.slopes.items():
            checks.append(_check(f"nu={nu:g} does not decay (slope >= -0.01)", s >= -0.01, slope=s, stderr=err))
    return res.to_csv(), res.summary(), checks


def cmd_lemma34_scan(args):
    Rs = [2.0**j for j in range(args.jmin, args.jmax + 1)]
    nu_of_R = (lambda R: round(args.nu_mult * R)) if args.nu_mult else None
    rep = dyadic_ops.lemma34_scan(args.nu, Rs, args.eps, args.N, args.lambda_factor, n_iter=args.n_iter,
                                  ensemble_size=args.ensemble, seed=args.seed, nu_of_R=nu_of_R)
    checks = [_check("decay slope negative", rep.slope < 0, slope=rep.slope, target=rep.target, vanishing_from=rep.vanishing_from)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["nu", "R", "lambda", "norm"])
    for row in rep.rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue(), rep.summary(), checks


def cmd_knapp(args):
    deltas = []
    k = 0
    while 2.0**-k >= args.delta_min * (1 - 1e-12):
        if 2.0**-k <= args.delta_max * (1 + 1e-12):
            deltas.append(2.0**-k)
        k += 1
    if len(deltas) < 2:
        raise ConfigError("need at least two dyadic cap widths between --delta-min and --delta-max")
    cfg = knapp.KnappConfig(args.d, args.a, deltas[0], args.q, args.p, args.s)
    scan = knapp.knapp_scan(cfg, deltas, args.n)
    checks = [_check("slope matches prediction within 0.15", abs(scan.fitted_slope - scan.predicted_slope) <= 0.15,
                     fitted=scan.fitted_slope, predicted=scan.predicted_slope, verdict=scan.verdict)]
    return scan.to_csv(), scan.summary(), checks


COMMANDS = {
    "admissible": cmd_admissible,
    "bessel-check": cmd_bessel_check,
    "stationary-phase": cmd_stationary_phase,
    "dyadic-scan": cmd_dyadic_scan,
    "lemma34-scan": cmd_lemma34_scan,
    "knapp": cmd_knapp,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--threads", type=int, default=None, help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")
    common.add_argument("--out", type=Path, default=None, help="directory for <command>.csv and <command>.json")

    parser = _Parser(prog="strichartz-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("admissible", parents=[common], help="evaluate every admissibility condition")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--a", type=_exponent, default=parse_exponent("2"))
    p.add_argument("--q", type=_exponent, required=True)
    p.add_argument("--p", type=_exponent, required=True)
    p.add_argument("--s", type=_exponent, default=parse_exponent("2"))

    p = sub.add_parser("bessel-check", parents=[common], help="envelope scans for J_nu")
    p.add_argument("--lemma", choices=["2.2", "2.3", "2.5", "2.5-tail"], required=True)
    p.add_argument("--nu", type=_float_list, default=[20.0, 50.0, 100.0])
    p.add_argument("--rmax-mult", type=float, default=10.0)
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--K", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--r", type=_float_list, default=None, help="radii for the rapid-decay scan")
    p.add_argument("--nu-mult", type=float, default=2.0, help="order = nu_mult * r in the rapid-decay scan")

    p = sub.add_parser("stationary-phase", parents=[common], help="remainder slopes of the stationary phase expansion")
    p.add_argument("--phase", choices=sorted(PHASES), default="quadratic")
    p.add_argument("--lam-min", type=float, default=1e2)
    p.add_argument("--lam-max", type=float, default=1e4)
    p.add_argument("--n-lam", type=int, default=5)
    p.add_argument("--K", type=int, default=1)

    def operator_flags(p):
        p.add_argument("--jmin", type=int, default=5)
        p.add_argument("--jmax", type=int, default=10)
        p.add_argument("--eps", type=float, default=0.05)
        p.add_argument("--n-iter", type=int, default=12)
        p.add_argument("--ensemble", type=int, default=4)

    p = sub.add_parser("dyadic-scan", parents=[common], help="weighted annulus norms over dyadic radii")
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--q", type=_exponent, default=parse_exponent("2"))
    p.add_argument("--p", type=_exponent, default=parse_exponent("4"))
    p.add_argument("--nu", type=_float_list, default=[10.0, 50.0, 200.0])
    p.add_argument("--lambda-rule", choices=["R^{1/2+eps}", "R^{1/3+eps}"], default="R^{1/2+eps}")
    operator_flags(p)

    p = sub.add_parser("lemma34-scan", parents=[common], help="norms of the gamma_2 piece")
    p.add_argument("--nu", type=int, default=50)
    p.add_argument("--N", type=float, default=1.0)
    p.add_argument("--lambda-factor", type=float, default=dyadic_ops.LAMBDA_FACTOR)
    p.add_argument("--nu-mult", type=float, default=None, help="tie the order to the radius: nu = nu_mult * R")
    operator_flags(p)

    p = sub.add_parser("knapp", parents=[common], help="cap example slope in the cap width")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--q", type=_exponent, default=parse_exponent("2"))
    p.add_argument("--p", type=_exponent, default=parse_exponent("8"))
    p.add_argument("--s", type=_exponent, default=parse_exponent("2"))
    p.add_argument("--delta-min", type=float, default=2.0**-6)
    p.add_argument("--delta-max", type=float, default=2.0**-3)
    p.add_argument("--n", type=int, default=64, help="tube grid points per axis")
    return parser


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "out":
            continue
        if isinstance(v, Fraction) or v is INF:
            v = fmt_exponent(v)
        out[k] = v
    return _jsonable(out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        table, summary, checks = COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"strichartz-lab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionError as exc:
        print(f"strichartz-lab: precision budget exhausted: {exc} (estimate {exc.estimate:.3e}, at {exc.where})", file=sys.stderr)
        return EXIT_PRECISION
    passed = all(c["passed"] for c in checks)
    doc = {"command": args.command, "config": _config(args), "summary": _jsonable(summary),
           "checks": _jsonable(checks), "passed": passed}
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{args.command}.csv").write_bytes(table.encode())
        (args.out / f"{args.command}.json").write_bytes(text.encode())
        sys.stdout.write(text)
    else:
        sys.stdout.write(table)
        sys.stdout.write(text)
    if not passed:
        failed = [c["name"] for c in checks if not c["passed"]]
        print("failed checks: " + "; ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
