"""Command line interface.

Exit codes: 0 success, 2 usage error, 3 undecided (an Inconclusive
verdict, or no drift certificate found), 4 domain error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .classify import INCONCLUSIVE, classify, verdict_report
from .diagnostics import CLT_NOTE, batch_means
from .drift import NoCertificate, find_drift_certificate, lift_to_rgs
from .errors import ErgochainError, StartNotInSupport
from .family import SequenceSpec, build_family
from .kernels import (
    DGS,
    MARGINAL_X,
    RGS,
    build_Pdgs,
    build_Prgs,
    build_Px,
    spectral_gap,
    tv_curve,
)
from .presets import example_description, example_names, example_spec
from .samplers import RunConfig, run_chain
from .subgeo import build_subgeo_report

_CHAINS = (MARGINAL_X, DGS, RGS)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--spec", help="family spec: inline JSON or a file path")
    grp.add_argument("--example", choices=example_names(),
                     help="one of the built-in families")
    p.add_argument("--n", type=int, default=200, help="truncation level")


def _load_spec(args) -> SequenceSpec:
    if args.example is not None:
        return example_spec(args.example)
    text = args.spec
    if not text.lstrip().startswith("{"):
        text = Path(text).read_text()
    return SequenceSpec.from_json(text)


def _parse_start(s: str, kind: str):
    if kind == MARGINAL_X:
        return int(s)
    parts = s.split(",")
    if len(parts) != 2:
        raise StartNotInSupport(f"need x,y for a bivariate start, got {s!r}")
    return int(parts[0]), int(parts[1])


def _default_start(kind: str):
    return 1 if kind == MARGINAL_X else (1, 1)


def _build_matrix(fam, kind: str, scan_p: float):
    if kind == MARGINAL_X:
        return build_Px(fam)
    if kind == DGS:
        return build_Pdgs(fam)
    return build_Prgs(fam, scan_p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ergochain",
        description="Convergence-rate analysis of staircase Gibbs chains")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="geometric or subgeometric verdict")
    _add_spec_args(p)
    p.add_argument("--scan-p", type=float, default=None,
                   help="also lift the certificate to the random scan")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out")

    p = sub.add_parser("drift", help="search for a drift certificate")
    _add_spec_args(p)
    p.add_argument("--scan-p", type=float, default=None)
    p.add_argument("--out")

    p = sub.add_parser("spectrum", help="operator norm and spectral gap")
    _add_spec_args(p)
    p.add_argument("--chain", choices=_CHAINS, default=MARGINAL_X)
    p.add_argument("--scan-p", type=float, default=0.5)
    p.add_argument("--out")

    p = sub.add_parser("tvcurve", help="total variation distance by step")
    _add_spec_args(p)
    p.add_argument("--chain", choices=_CHAINS, default=MARGINAL_X)
    p.add_argument("--scan-p", type=float, default=0.5)
    p.add_argument("--start", default=None)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("subgeo", help="conditional-variance and tail statistics")
    _add_spec_args(p)
    p.add_argument("--scan-p", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("sample", help="simulate a chain")
    _add_spec_args(p)
    p.add_argument("--chain", choices=_CHAINS, default=MARGINAL_X)
    p.add_argument("--scan-p", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default=None)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--g-indicator", type=int, default=None, metavar="T",
                   help="track g = 1(x >= T) and report a batch-means error")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("examples", help="list the built-in families")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out")

    p = sub.add_parser("report", help="classify several families at once")
    p.add_argument("--examples", default="all",
                   help="comma-separated example names, or all")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--scan-p", type=float, default=None)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out")

    return ap


def _cmd_classify(args) -> int:
    v = classify(_load_spec(args), N=args.n, scan_p=args.scan_p)
    v = dataclasses.replace(v, label=args.example or "spec")
    if args.format == "table":
        _emit(verdict_report([v], "table"), args.out)
    else:
        _emit(_dump_json(v.to_json_dict()), args.out)
    return 3 if v.verdict == INCONCLUSIVE else 0


def _cmd_drift(args) -> int:
    fam = build_family(_load_spec(args), args.n)
    cert = find_drift_certificate(fam)
    if isinstance(cert, NoCertificate):
        _emit(_dump_json({"certificate": None, "reason": cert.reason,
                          "r_hat": cert.r_hat, "q_hat": cert.q_hat}), args.out)
        return 3
    if args.scan_p is not None:
        cert = lift_to_rgs(cert, args.scan_p)
    _emit(_dump_json(cert.to_json_dict()), args.out)
    return 0


def _cmd_spectrum(args) -> int:
    fam = build_family(_load_spec(args), args.n)
    tm = _build_matrix(fam, args.chain, args.scan_p)
    _emit(_dump_json(spectral_gap(tm).to_json_dict()), args.out)
    return 0


def _cmd_tvcurve(args) -> int:
    fam = build_family(_load_spec(args), args.n)
    tm = _build_matrix(fam, args.chain, args.scan_p)
    start = (_parse_start(args.start, args.chain) if args.start is not None
             else _default_start(args.chain))
    curve = tv_curve(tm, start, args.steps)
    if args.format == "json":
        _emit(_dump_json(curve.to_json_dict()), args.out)
    else:
        _emit(curve.to_csv(), args.out)
    return 0


def _cmd_subgeo(args) -> int:
    fam = build_family(_load_spec(args), args.n)
    report = build_subgeo_report(fam, horizon=args.horizon, scan_p=args.scan_p)
    if args.format == "json":
        _emit(_dump_json(report.to_json_dict()), args.out)
    else:
        _emit(report.to_csv(), args.out)
    return 0


def _cmd_sample(args) -> int:
    fam = build_family(_load_spec(args), args.n)
    start = (_parse_start(args.start, args.chain) if args.start is not None
             else _default_start(args.chain))
    g = None
    if args.g_indicator is not None:
        t = args.g_indicator
        g = ((lambda x: float(x >= t)) if args.chain == MARGINAL_X
             else (lambda x, y: float(x >= t)))
    cfg = RunConfig(kind=args.chain, n_steps=args.steps, seed=args.seed,
                    init=start, thin=args.thin,
                    scan_p=args.scan_p if args.chain == RGS else None, g=g)
    trace = run_chain(fam, cfg)
    if args.format == "csv":
        _emit(trace.to_csv(), args.out)
        return 0
    final = None
    if trace.xs.size:
        final = (int(trace.xs[-1]) if trace.ys is None
                 else [int(trace.xs[-1]), int(trace.ys[-1])])
    out = {"kind": trace.kind, "n_steps": trace.n_steps, "seed": trace.seed,
           "thin": trace.thin, "final_state": final, "g": None}
    if g is not None and trace.n_steps > 0:
        est = batch_means(trace.g_values)
        gd = est.to_json_dict()
        gd["note"] = CLT_NOTE
        out["g"] = gd
    _emit(_dump_json(out), args.out)
    return 0


def _cmd_examples(args) -> int:
    names = example_names()
    if args.format == "json":
        _emit(_dump_json([{"name": n, "description": example_description(n)}
                          for n in names]), args.out)
        return 0
    width = max(len(n) for n in names)
    lines = [f"{n.ljust(width)}  {example_description(n)}" for n in names]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_report(args) -> int:
    if args.examples == "all":
        names = example_names()
    else:
        names = [s.strip() for s in args.examples.split(",") if s.strip()]
    verdicts = []
    for name in names:
        v = classify(example_spec(name), N=args.n, scan_p=args.scan_p)
        verdicts.append(dataclasses.replace(v, label=name))
    _emit(verdict_report(verdicts, args.format), args.out)
    return 0


_COMMANDS = {
    "classify": _cmd_classify,
    "drift": _cmd_drift,
    "spectrum": _cmd_spectrum,
    "tvcurve": _cmd_tvcurve,
    "subgeo": _cmd_subgeo,
    "sample": _cmd_sample,
    "examples": _cmd_examples,
    "report": _cmd_report,
}


def dispatch(argv: list[str]) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ErgochainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
