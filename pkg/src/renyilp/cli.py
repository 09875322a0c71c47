"""Command-line interface.

Exit codes: 0 success, 1 an invariant was violated, 2 usage error, 3 unreadable
input, 4 invalid order or exponent, 5 any other domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

from . import serialization as ser
from .divergences import (DivergenceValue, alpha_sweep, max_relative, relative_entropy,
                          sandwiched_renyi, standard_renyi, support_contained)
from .dpi_sufficiency import dpi_report, reports_to_csv, sufficiency_test
from .ensembles import RNG_NAME, make_rng, random_channel, random_state
from .errors import InvalidAlpha, InvalidExponent, ParseError, RenyiLpError
from .lp_kosaki import extract, is_member, kosaki_norm, linf_norm_pair
from .selftest import run_selftest

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_ALPHA, EXIT_DOMAIN = 0, 1, 3, 4, 5
DEFAULT_ALPHAS = "1.2,1.5,2,3,5"


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _units(args, nats):
    """Convert a divergence-valued quantity to the requested base."""
    if nats is None or args.log_base == "e":
        return nats
    return float(DivergenceValue(nats).in_base(2).value)


def _emit(args, payload: dict, rows: list[dict] | None = None, default: str = "json") -> None:
    fmt = args.out or default
    if fmt == "csv" and rows is not None:
        buf = io.StringIO()
        if rows:
            w = csv.writer(buf, lineterminator="\n")
            keys = list(rows[0])
            w.writerow(keys)
            for r in rows:
                w.writerow([ser.format_float(v) if isinstance(v, float) else v
                            for v in (r[k] for k in keys)])
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(ser.dumps(payload))


def cmd_divergence(args) -> int:
    psi, phi = ser.load_functional(args.psi), ser.load_functional(args.phi)
    kind = args.kind
    if kind in ("sandwiched", "standard") and args.alpha is None:
        raise InvalidAlpha(f"--alpha is required for the {kind} divergence")
    funcs = {"sandwiched": lambda: sandwiched_renyi(psi, phi, args.alpha),
             "standard": lambda: standard_renyi(psi, phi, args.alpha),
             "relative": lambda: relative_entropy(psi, phi),
             "max": lambda: max_relative(psi, phi)}
    value = funcs[kind]()
    out = {"kind": kind, "alpha": args.alpha, "value": _units(args, float(value)),
           "units": "bits" if args.log_base == "2" else "nats",
           "support_contained": support_contained(psi, phi)}
    if kind == "sandwiched":
        out["kosaki_norm"] = kosaki_norm(psi.element, phi, args.alpha)
    _emit(args, out, [{k: out[k] for k in ("kind", "alpha", "value", "units",
                                            "support_contained")}])
    return EXIT_OK


def cmd_sweep(args) -> int:
    psi, phi = ser.load_functional(args.psi), ser.load_functional(args.phi)
    table = alpha_sweep(psi, phi, args.grid)
    rows = [{c: (getattr(r, c) if c == "alpha" else _units(args, getattr(r, c)))
             for c in table.HEADER} for r in table.rows]
    _emit(args, {"rows": rows, "violations": table.violations,
                 "units": "bits" if args.log_base == "2" else "nats"}, rows, default="csv")
    for v in table.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_OK if table.ok else EXIT_VIOLATION


def cmd_norms(args) -> int:
    h = ser.load_element(args.element)
    sigma = ser.load_functional(args.sigma)
    rows = [{"p": p, "norm": kosaki_norm(h, sigma, p)} for p in args.p]
    out = {"member": is_member(h, sigma), "norms": rows}
    if math.inf in args.p and out["member"]:
        pencil, direct = linf_norm_pair(extract(h, sigma, math.inf), sigma)
        out["linf_pencil"], out["linf_direct"] = pencil, direct
    _emit(args, out, rows)
    return EXIT_OK


def _report_dict(args, rep) -> dict:
    d = rep.to_dict()
    for key in ("d_in", "d_out", "gap", "lower_bound", "upper_bound"):
        d[key] = _units(args, d[key])
    d["violations"] = rep.violations()
    return d


def _csv_reports(args, reports) -> None:
    sys.stdout.write(reports_to_csv(reports))


def cmd_dpi(args) -> int:
    if args.random:
        rng = make_rng(args.seed)
        reports = []
        for i in range(args.samples):
            phi = random_channel(rng, args.dims, args.out_dims or args.dims)
            psi, sigma = random_state(rng, (args.dims,)), random_state(rng, (args.dims,))
            reports.append(dpi_report(phi, psi, sigma, args.alpha[i % len(args.alpha)]))
        bad = sum(bool(r.violations()) for r in reports)
        if (args.out or "json") == "csv":
            _csv_reports(args, reports)
        else:
            sys.stdout.write(ser.dumps({
                "rng": RNG_NAME, "seed": args.seed, "samples": args.samples,
                "dims": args.dims, "violations": bad,
                "reports": [_report_dict(args, r) for r in reports]}))
        return EXIT_VIOLATION if bad else EXIT_OK
    if not (args.channel and args.psi and args.phi):
        raise ParseError("dpi needs CHANNEL PSI PHI files or --random")
    phi = ser.load_channel(args.channel)
    psi, sigma = ser.load_functional(args.psi), ser.load_functional(args.phi)
    rep = dpi_report(phi, psi, sigma, args.alpha[0])
    if (args.out or "json") == "csv":
        _csv_reports(args, [rep])
    else:
        sys.stdout.write(ser.dumps(_report_dict(args, rep)))
    return EXIT_VIOLATION if rep.violations() else EXIT_OK


def cmd_suffices(args) -> int:
    phi = ser.load_channel(args.channel)
    psi, sigma = ser.load_functional(args.psi), ser.load_functional(args.phi)
    verdict = sufficiency_test(phi, psi, sigma, args.alpha, tol=args.tol)
    out = verdict.to_dict()
    out["evidence"] = _report_dict(args, verdict.evidence)
    recovery = ser.channel_to_json(verdict.recovery)
    if args.recovery_out:
        Path(args.recovery_out).write_text(ser.dumps(recovery))
        out["recovery_file"] = str(args.recovery_out)
    else:
        out["recovery"] = recovery
    if (args.out or "json") == "csv":
        _csv_reports(args, [verdict.evidence])
    else:
        sys.stdout.write(ser.dumps(out))
    return EXIT_OK if verdict.consistent else EXIT_VIOLATION


def cmd_selftest(args) -> int:
    report = run_selftest(args.seed)
    if (args.out or "text") == "json":
        sys.stdout.write(ser.dumps(report))
    else:
        lines = [f"rng: {report['rng']}  seed: {report['seed']}"]
        lines += [f"{name}: {status}" for name, status in report["results"].items()]
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if report["passed"] else EXIT_VIOLATION


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--tol", type=_positive, default=d(1e-6),
                        help="recovery tolerance for sufficiency verdicts")
    parser.add_argument("--log-base", choices=("e", "2"), default=d("e"))
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--out", choices=("json", "csv"), default=d(None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renyilp",
                                     description="Sandwiched Renyi divergences, Kosaki norms "
                                                 "and data processing checks.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", parents=[common], help="one divergence between two states")
    p.add_argument("psi")
    p.add_argument("phi")
    p.add_argument("--alpha", type=float)
    p.add_argument("--kind", choices=("sandwiched", "standard", "relative", "max"),
                   default="sandwiched")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("sweep", parents=[common], help="alpha sweep table")
    p.add_argument("psi")
    p.add_argument("phi")
    p.add_argument("--grid", type=_float_list, default=_float_list(DEFAULT_ALPHAS))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("norms", parents=[common], help="Kosaki norms of an element")
    p.add_argument("element")
    p.add_argument("sigma")
    p.add_argument("--p", type=_float_list, default=_float_list("1,2,inf"))
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("dpi", parents=[common], help="data processing report")
    p.add_argument("channel", nargs="?")
    p.add_argument("psi", nargs="?")
    p.add_argument("phi", nargs="?")
    p.add_argument("--alpha", type=_float_list, default=[2.0],
                   help="order, or a list cycled over random samples")
    p.add_argument("--random", action="store_true")
    p.add_argument("--dims", type=int, default=3)
    p.add_argument("--out-dims", type=int)
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_dpi)

    p = sub.add_parser("suffices", parents=[common], help="sufficiency test with Petz recovery")
    p.add_argument("channel")
    p.add_argument("psi")
    p.add_argument("phi")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--recovery-out")
    p.set_defaults(func=cmd_suffices)

    p = sub.add_parser("selftest", parents=[common], help="deterministic invariant suite")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "samples", 1) < 1:
        print("error: --samples must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidAlpha, InvalidExponent) as exc:
        print(f"invalid order: {exc}", file=sys.stderr)
        return EXIT_ALPHA
    except RenyiLpError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
