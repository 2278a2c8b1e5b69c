"""Command-line entry point: ``python app.py {test,simulate,figure1,graph-info} [flags]``."""

from __future__ import annotations

import argparse
import sys
from typing import List, NoReturn, Optional, Sequence, Tuple

from pydantic import ValidationError

from src.cli.commands import COMMANDS
from src.errors import GraceError
from src.models import BoundVariant, Correction, GridSpec, Method, PenaltyKind, RunConfig
from src.simulation.design import DEFAULT_NPE, EXTENDED_NPE
from src.simulation.seeds import generate_master_seed
from src.utils.logging import get_logger
from src.utils.parallel import resolve_threads

logger = get_logger("app")

PENALTY_CHOICES = {
    "laplacian": PenaltyKind.LAPLACIAN,
    "normalized": PenaltyKind.NORMALIZED_LAPLACIAN,
    "identity": PenaltyKind.IDENTITY,
}
NPE_PRESETS = {"default": DEFAULT_NPE, "extended": EXTENDED_NPE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        print(f"error: UsageError: {message}", file=sys.stderr)
        raise SystemExit(2)


def _grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except (ValueError, ValidationError) as exc:
        raise argparse.ArgumentTypeError(str(exc).splitlines()[0]) from exc


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _methods(text: str) -> Tuple[Method, ...]:
    names = [name.strip().lower() for name in text.split(",") if name.strip()]
    known = {m.value for m in Method}
    unknown = [name for name in names if name not in known]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown method(s): {', '.join(unknown) or text}")
    return tuple(Method(name) for name in names)


def _npe(text: str) -> Tuple[int, ...]:
    if text in NPE_PRESETS:
        return NPE_PRESETS[text]
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"NPE must be 'default', 'extended' or integers, got '{text}'") from exc


def _floats(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grace-infer", description="Graph-constrained regression inference.")
    parser.add_argument("mode", choices=["test", "simulate", "figure1", "graph-info"])
    parser.add_argument("--x", dest="x_path")
    parser.add_argument("--y", dest="y_path")
    parser.add_argument("--edges", dest="edges_path")
    parser.add_argument("--compare-edges", dest="compare_edges_path")
    parser.add_argument("--method", choices=[m.value for m in Method], default=Method.GRACE.value)
    parser.add_argument("--methods", type=_methods, help="comma-separated methods for simulate")
    parser.add_argument("--penalty", choices=sorted(PENALTY_CHOICES), default="laplacian")
    parser.add_argument("--jitter", type=float)
    parser.add_argument("--xi", type=float, default=0.05)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--correction", choices=[c.value for c in Correction], default=Correction.BY.value)
    parser.add_argument("--bound", choices=[b.value for b in BoundVariant], default=BoundVariant.OFFDIAG.value)
    parser.add_argument("--scale-invariant", action="store_true")
    parser.add_argument("--grid-g", type=_grid, default=GridSpec())
    parser.add_argument("--grid-2", type=_grid, default=GridSpec())
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--seed", type=_seed)
    parser.add_argument("--out", dest="out_dir", default=".")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--replicates", type=int, default=20)
    parser.add_argument("--npe", type=_npe, default=(0,), help="'default', 'extended' or a comma list")
    parser.add_argument("--r2", type=_floats, default=(0.3,))
    parser.add_argument("--hubs", type=int, default=50)
    parser.add_argument("--details", action="store_true", help="write per-replicate rows")
    parser.add_argument("--k", type=float, default=10.0)
    parser.add_argument("--t", type=float, default=0.25)
    parser.add_argument("--beta1", type=float, default=1.0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    seed = args.seed
    seed_generated = seed is None
    if seed_generated:
        seed = generate_master_seed()
    fields = dict(
        mode=args.mode,
        x_path=args.x_path,
        y_path=args.y_path,
        edges_path=args.edges_path,
        compare_edges_path=args.compare_edges_path,
        method=Method(args.method),
        penalty=PENALTY_CHOICES[args.penalty],
        jitter=args.jitter,
        xi=args.xi,
        alpha=args.alpha,
        correction=Correction(args.correction),
        bound=BoundVariant(args.bound),
        scale_invariant=args.scale_invariant,
        grid_g=args.grid_g,
        grid_2=args.grid_2,
        folds=args.folds,
        seed=seed,
        seed_generated=seed_generated,
        out_dir=args.out_dir,
        threads=resolve_threads(args.threads),
        replicates=args.replicates,
        npe_list=args.npe,
        r2_list=args.r2,
        hubs=args.hubs,
        details=args.details,
        k=args.k,
        t=args.t,
        beta1=args.beta1,
    )
    if args.methods is not None:
        fields["methods"] = args.methods
    try:
        return RunConfig(**fields)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise UsageError(f"{where}: {first['msg']}" if where else first["msg"]) from exc


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if config.seed_generated:
            logger.info("No --seed given; using generated seed %d", config.seed)
        written: List = COMMANDS[config.mode](config)
    except UsageError as exc:
        print(f"error: UsageError: {exc}", file=sys.stderr)
        return 2
    except (GraceError, ValueError, OSError) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    for path in written:
        logger.info("Wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
