"""Command-line driver: ``lipext verify``, ``lipext compute-e``, ``lipext report``.

Exit codes: 0 when every row passes, 1 when some row fails, 2 on input or
usage errors.  Every run is appended to ``<store>/runs.json`` (default
``./.lipext``), which ``report`` re-serializes.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from ._config import TOL
from .extension.base import HypothesisViolation
from .io import ParseError, load_space, load_subset
from .metric import GeometryError, MetricError, SubsetRef, TooLarge
from .report import NoPriorRun, RunReport, RunStore, render
from .verify import TARGETS, compute_e

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

INPUT_ERRORS = (ParseError, TooLarge, HypothesisViolation, MetricError, GeometryError, NoPriorRun,
                ValueError, OSError)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, trials: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0, help="PCG64 seed (recorded in the report)")
    if trials:
        p.add_argument("--trials", type=int, default=None, help="random functions or pairs per check")
    p.add_argument("--tol", type=float, default=TOL)
    p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--store", type=Path, default=Path(".lipext"), help="directory of the run store")
    p.add_argument("--timing", action="store_true", help="include wall time (breaks byte stability)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipext", description="Certify Lipschitz extension constants.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a construction and certify its constants")
    v.add_argument("target", choices=sorted(TARGETS))
    _common(v)
    v.add_argument("--n", type=int, default=None, help="dimension (grid-interp, cone, net-ball, place-dyadic)")
    v.add_argument("--box", type=int, default=None, help="grid-interp box side")
    v.add_argument("--samples", type=int, default=None, help="off-grid sample points")
    v.add_argument("--instances", type=int, default=None, help="glue-pair instances")
    v.add_argument("--families", type=int, default=None, help="glue-family instances")
    v.add_argument("--sets", type=int, default=None, help="sets per glue family")
    v.add_argument("--dim", type=int, default=None, help="ambient dimension (glue-family, balls-20)")
    v.add_argument("--count", type=int, default=None, help="number of sets (place-dyadic, balls-20)")
    v.add_argument("--dims", type=_int_list, default=None, help="balls-24 subspace dimensions, e.g. 1,2,3")
    v.add_argument("--window", type=int, default=None, help="net-ball window half-width")
    v.add_argument("--R", type=float, default=None, help="net-ball radius")
    v.add_argument("--center", type=_float_list, default=None, help="net-ball centre")
    v.add_argument("--corpus", choices=("uniform", "mcshane"), default=None, help="random function corpus")

    c = sub.add_parser("compute-e", help="extension constant e(S, M) of a finite space")
    _common(c, trials=False)
    c.add_argument("--space", required=True, help="space JSON file")
    c.add_argument("--subset", required=True, help="subset JSON file, or comma-separated indices")

    r = sub.add_parser("report", help="re-serialize recorded runs")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--out", type=Path, default=None)
    r.add_argument("--store", type=Path, default=Path(".lipext"))
    return parser


# flag name -> keyword per target
_TARGET_FLAGS = {
    "glue-pair": ("instances", "trials", "corpus"),
    "glue-family": ("families", "sets", "dim", "trials", "corpus"),
    "grid-interp": ("n", "box", "trials", "samples", "corpus"),
    "cone": ("n", "trials", "samples", "corpus"),
    "net-ball": ("n", "window", "R", "center"),
    "place-dyadic": ("n", "count"),
    "balls-20": ("dim", "count"),
    "balls-24": ("dims",),
}


def _run_verify(args) -> RunReport:
    kwargs = {"seed": args.seed, "tol": args.tol}
    for name in _TARGET_FLAGS[args.target]:
        value = getattr(args, name)
        if value is not None:
            kwargs[name] = value
    return TARGETS[args.target](**kwargs)


def _run_compute_e(args) -> RunReport:
    space = load_space(args.space)
    ref = args.subset
    if Path(ref).exists():
        S = load_subset(ref, space=space)
    else:
        try:
            S = SubsetRef(space, tuple(_int_list(ref)))
        except argparse.ArgumentTypeError as exc:
            raise ParseError(str(exc)) from None
    inputs = {"space": str(args.space), "subset": str(args.subset), "seed": args.seed}
    return compute_e(S, tol=args.tol, inputs=inputs)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            runs = RunStore(args.store).load()
            _emit(render(runs, args.format), args.out)
            return EXIT_OK
        start = time.perf_counter()
        report = _run_verify(args) if args.command == "verify" else _run_compute_e(args)
        report.wall_time = time.perf_counter() - start
        RunStore(args.store).append(report)
        data = report.to_dict(timing=args.timing)
        _emit(render([data], args.format), args.out)
        return EXIT_OK if report.passed else EXIT_FAIL
    except INPUT_ERRORS as exc:
        print(f"lipext: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
