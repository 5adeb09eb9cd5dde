"""Command line entry point.

Exit codes: 0 bounded/verified, 2 quantization violated, 3 counterexample
trichotomy confirmed, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import counterexamples as cx
from .criterion import (
    DEFAULT_EPS_Q,
    QuantizationViolated,
    certify_bound,
    parse_real,
)
from .certified import Enclosure
from .function_model import parse_fn_spec
from .lattice import count_layer_full, count_layer_nonneg, simplex_moment, simplex_volume
from .report import report_svgs, to_csv, to_json, write_outputs
from .trig import decompose, format_decomposition, sup_norm

EXIT_OK = 0
EXIT_VIOLATED = 2
EXIT_TRICHOTOMY = 3
EXIT_USAGE = 64
FORMATS = ("json", "csv", "svg")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _real(text: str) -> str:
    parse_real(text)
    return text


def _vector(text: str) -> list[str]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    for s in items:
        parse_real(s)
    if not items:
        raise argparse.ArgumentTypeError("empty vector")
    return items


def _int_vector(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"integer vector expected, got {text!r}") from None


def _floats(text: str) -> list[float]:
    return [float(s) for s in str(text).split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpcrit", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file whose keys mirror the command's flags")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("verify-criterion", help="certified bound on ||f||_p or quantization verdict")
    c.add_argument("--t", type=_real, help="shift step (decimal or symbolic, e.g. pi/2)")
    c.add_argument("--s", type=_real, help="sine frequency")
    c.add_argument("--p", type=float)
    c.add_argument("--fn", help="box:LO:HI | power:ALPHA | recip | one")
    c.add_argument("--shift-norm", type=float, help="upper bound on ||f(.+t) - f||_p")
    c.add_argument("--sine-norm", type=float, help="upper bound on ||sin(s.) f||_p")
    c.add_argument("--delta", type=float)
    c.add_argument("--eps", type=float)
    c.add_argument("--out-dir")

    e = sub.add_parser("counterexample", help="generate and certify a counterexample")
    e.add_argument("--kind", choices=cx.KINDS)
    e.add_argument("--p", type=float)
    e.add_argument("--M", type=_floats, help="threshold(s), comma separated")
    e.add_argument("--n", type=int)
    e.add_argument("--gamma", type=float)
    e.add_argument("--a", type=_vector, help="shift vector for singleton kinds, e.g. pi,2,0")
    e.add_argument("--b", type=_vector, help="frequency vector for singleton kinds")
    e.add_argument("--alpha", type=float, help="decay exponent for s_zero")
    e.add_argument("--t", type=_real, help="shift used by s_zero")
    e.add_argument("--s", type=_real, help="frequency used by t_zero")
    e.add_argument("--K", type=int, help="tail cutoff for certified sums")
    e.add_argument("--out-dir")
    e.add_argument("--format", help="comma separated subset of json,csv,svg")

    lc = sub.add_parser("lattice-count", help="number of lattice points with l1-norm k")
    lc.add_argument("--n", type=int)
    lc.add_argument("--k", type=int)
    lc.add_argument("--orthant", action="store_true", default=None)

    td = sub.add_parser("trig-decomp", help="sin<b,x> = sum_j Q_j(x) sin x_j")
    td.add_argument("--b", type=_int_vector)

    sp = sub.add_parser("simplex", help="volume or moment of the simplex of size a")
    sp.add_argument("--n", type=int)
    sp.add_argument("--a", type=float)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--volume", action="store_true", default=None)
    g.add_argument("--moment", action="store_true", default=None)
    sp.add_argument("--p", type=float)
    return parser


DEFAULTS = {
    "verify-criterion": {"p": 2.0, "eps": DEFAULT_EPS_Q},
    "counterexample": {"p": 2.0, "M": [1.0], "format": "json,csv", "K": cx.DEFAULT_TAIL_CUTOFF},
    "lattice-count": {"orthant": False},
    "trig-decomp": {},
    "simplex": {"volume": False, "moment": False, "p": 1.0},
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        if args.command is None:
            args.command = cfg.get("command")
    if args.command not in DEFAULTS:
        raise UsageError("a command is required (see --help)")
    for key, value in {**DEFAULTS[args.command], **cfg}.items():
        key = key.replace("-", "_")
        if key in ("command", "config"):
            continue
        if getattr(args, key, None) is None:
            if key in ("a", "b") and isinstance(value, list):
                value = [str(v) for v in value]
            if key == "M" and not isinstance(value, list):
                value = _floats(value)
            setattr(args, key, value)
    return args


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command}: missing --{', --'.join(missing)}")


def cmd_criterion(args, out) -> int:
    _need(args, "t", "s")
    if args.p < 1:
        raise UsageError("p must be >= 1")
    norms = None
    f = None
    if args.fn is not None:
        f = parse_fn_spec(args.fn)
    elif args.shift_norm is not None and args.sine_norm is not None:
        norms = (Enclosure(0.0, args.shift_norm), Enclosure(0.0, args.sine_norm))
    else:
        raise UsageError("verify-criterion needs --fn or both --shift-norm and --sine-norm")
    payload = {"inputs": {"t": args.t, "s": args.s, "p": args.p, "fn": args.fn}}
    try:
        cert = certify_bound(f, args.t, args.s, args.p, norms=norms, delta=args.delta, eps=args.eps)
    except QuantizationViolated as exc:
        payload.update(verdict="violated", quantization=exc.report.to_dict())
        _emit(args, out, payload, "criterion.json")
        return EXIT_VIOLATED
    payload.update(verdict="bounded", certificate=cert.to_dict())
    _emit(args, out, payload, "criterion.json")
    return EXIT_OK


def _emit(args, out, payload, name):
    text = to_json(payload, args.command)
    out.write(text)
    if getattr(args, "out_dir", None):
        write_outputs(args.out_dir, {name: text})


def run_counterexample(args) -> cx.VerificationReport:
    kind, p, M = args.kind, args.p, args.M
    if kind == "one_d_pi":
        return cx.verify_one_d(p, M, K=args.K)
    if kind == "t_zero":
        return cx.verify_trivial_pair("t_zero", p, M, s=args.s if args.s is not None else 1.0)
    if kind == "s_zero":
        return cx.verify_trivial_pair(
            "s_zero", p, M, t=args.t if args.t is not None else 1.0, a=args.alpha
        )
    if kind == "lattice_nd":
        _need(args, "n", "gamma")
        return cx.verify_lattice_nd(args.n, args.gamma, p, M, K=args.K)
    _need(args, "a", "b")
    report = cx.verify_singleton_nd(args.a, args.b, p, M, K=args.K)
    if report.kind != kind:
        raise UsageError(f"a and b give the {report.kind} case, not {kind}")
    return report


def cmd_counterexample(args, out) -> int:
    _need(args, "kind")
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise UsageError(f"unknown format(s): {', '.join(bad)}")
    report = run_counterexample(args)
    text = to_json({"report": report.to_dict()}, args.command)
    out.write(text)
    if args.out_dir:
        files = {}
        if "json" in formats:
            files["report.json"] = text
        if "csv" in formats:
            files["partial_sums.csv"] = to_csv(report.curves)
        if "svg" in formats:
            files.update(report_svgs(report.curves, args.M, report.kind))
        write_outputs(args.out_dir, files)
    return EXIT_TRICHOTOMY if report.trichotomy else 1


def cmd_lattice_count(args, out) -> int:
    _need(args, "n", "k")
    count = count_layer_nonneg if args.orthant else count_layer_full
    out.write(f"{count(args.n, args.k)}\n")
    return EXIT_OK


def cmd_trig(args, out) -> int:
    _need(args, "b")
    qs = decompose(args.b)
    out.write(format_decomposition(qs) + "\n")
    for j, q in enumerate(qs, start=1):
        e = sup_norm(q)
        out.write(f"||Q{j}||_inf in [{e.lower:.12g}, {e.upper:.12g}]\n")
    return EXIT_OK


def cmd_simplex(args, out) -> int:
    _need(args, "n", "a")
    if args.moment:
        out.write(f"{simplex_moment(args.n, args.a, args.p)!r}\n")
    else:
        out.write(f"{simplex_volume(args.n, args.a)!r}\n")
    return EXIT_OK


COMMANDS = {
    "verify-criterion": cmd_criterion,
    "counterexample": cmd_counterexample,
    "lattice-count": cmd_lattice_count,
    "trig-decomp": cmd_trig,
    "simplex": cmd_simplex,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _merge_config(build_parser().parse_args(argv))
        return COMMANDS[args.command](args, out)
    except (UsageError, ValueError, TypeError, IndexError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
