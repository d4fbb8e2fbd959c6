# -*- coding: utf-8 -*-
"""
expdyn command line.

    python -m src.expdyn classify --lambda 0.3,0 --json -

Exit codes: 0 success, 1 invalid input, 2 numerical failure or an
undecided certification.
"""
import argparse
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from .certifier import CycleCertifier
from .config import ConfigError, ExpDynConfig, get_config, load_config
from .data_models import (
    AnnulusSpec, DensitySweepConfig, Disk, EntryStatsConfig, ExpParameter, GridSquare, RenderSpec, Verdict,
)
from .density_estimator import DensityEstimator
from .exceptions import ExpDynError, PreconditionViolation
from .measure_lab import MeasureLab
from .misiurewicz_solver import MisiurewiczSolver
from .renderer import ParameterPlaneRenderer
from .report_writer import certificate_to_record, to_record, transfer_frame, write_report
from .transfer_engine import TransferEngine

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILED = 2

ENTRY_DOMAIN = Disk(center=0j, radius=1.0)
DEEP_LEFT_RADIUS = 0.9


class UsageError(Exception):
    """Malformed command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def parse_complex(text: str) -> complex:
    """`re,im` -> complex."""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")
    try:
        value = complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from None
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise argparse.ArgumentTypeError(f"non-finite value {text!r}")
    return value


def _float_list(count: Optional[int]):
    def parse(text: str) -> List[float]:
        try:
            values = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
        if count is not None and len(values) != count:
            raise argparse.ArgumentTypeError(f"expected {count} values, got {text!r}")
        return values
    return parse


def _int_pair(text: str) -> List[int]:
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers, got {text!r}") from None
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected two integers, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default="-", help="report path ('-' for stdout)")
    common.add_argument("--config", dest="config_path", default=None, help="key = value config file")
    common.add_argument("--jobs", type=int, default=None, help="parallel workers")
    common.add_argument("--verbose", action="store_true", help="status lines on stderr")

    parser = _Parser(prog="expdyn", description="Numerical laboratory for f(z) = lambda * exp(z)")
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    commands.required = True

    p = commands.add_parser("classify", parents=[common], help="certify an attracting cycle")
    p.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    p.add_argument("--json", dest="json_path", default=None)

    p = commands.add_parser("misiurewicz", parents=[common], help="solve xi_(k+p) = xi_k")
    p.add_argument("--seed", type=parse_complex, required=True)
    p.add_argument("--preperiod", type=int, required=True)
    p.add_argument("--period", type=int, required=True)

    p = commands.add_parser("density", parents=[common], help="hyperbolic share around a parameter")
    p.add_argument("--center", type=parse_complex, required=True)
    p.add_argument("--radii", type=_float_list(None), required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--annulus", action="store_true")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--sectors", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--csv", dest="csv_path", default=None)

    p = commands.add_parser("entry-stats", parents=[common], help="first entries into Re z > x")
    p.add_argument("--lambda0", type=parse_complex, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--tmax", type=int, required=True)
    p.add_argument("--ball", type=parse_complex, default=None,
                   help="sample B(RE,IM, delta0/x^3) instead of the unit disk")
    p.add_argument("--csv", dest="csv_path", default=None)

    p = commands.add_parser("deep-left", parents=[common], help="first entries into Re z <= L1")
    p.add_argument("--lambda0", type=parse_complex, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--L1", dest="level1", type=float, required=True)
    p.add_argument("--L2", dest="level2", type=float, required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--tmax", type=int, default=None)

    p = commands.add_parser("transfer", parents=[common], help="shadow a backward orbit under lambda2")
    p.add_argument("--lambda1", type=parse_complex, required=True)
    p.add_argument("--lambda2", type=parse_complex, required=True)
    p.add_argument("--start", type=parse_complex, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bounds", type=float, default=None, help="level x <= 3 for the bound check")
    p.add_argument("--csv", dest="csv_path", default=None)

    p = commands.add_parser("constants", parents=[common], help="estimate expansion constants")
    p.add_argument("--lambda0", type=parse_complex, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--preperiod", type=int, default=1)
    p.add_argument("--period", type=int, default=1)

    p = commands.add_parser("cascade", parents=[common], help="rightward square cascade")
    p.add_argument("--lambda0", type=parse_complex, required=True)
    p.add_argument("--square", type=_int_pair, required=True, help="J,K lattice indices")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--kmax", type=int, default=10)

    p = commands.add_parser("render", parents=[common], help="parameter-plane PPM")
    p.add_argument("--rect", type=_float_list(4), required=True)
    p.add_argument("--px", type=_int_pair, required=True)
    return parser


# ==================== commands ====================

def _cmd_classify(args: argparse.Namespace, config: ExpDynConfig) -> int:
    result = CycleCertifier(config).classify(args.lam)
    write_report(result, "json", args.json_path if args.json_path is not None else args.out)
    return EXIT_FAILED if result.verdict is Verdict.UNDECIDED else EXIT_OK


def _cmd_misiurewicz(args: argparse.Namespace, config: ExpDynConfig) -> int:
    solver = MisiurewiczSolver(config)
    cert = solver.solve_misiurewicz(args.seed, args.preperiod, args.period)
    report = solver.verify_misiurewicz(cert)
    write_report({"certificate": certificate_to_record(cert), "verification": to_record(report)},
                 "json", args.out)
    return EXIT_OK


def _cmd_density(args: argparse.Namespace, config: ExpDynConfig) -> int:
    template = None
    if args.annulus:
        template = AnnulusSpec(
            center=ExpParameter(lam=args.center),
            gamma=args.gamma if args.gamma is not None else config.density.gamma,
            r=args.radii[0],
            sectors=args.sectors if args.sectors is not None else config.density.sectors,
        )
    cfg = DensitySweepConfig(
        radii=args.radii, samples=args.samples,
        seed=args.seed if args.seed is not None else config.density.seed,
        budget=config.certify.n_max, p_max=config.certify.p_max, annulus=template,
    )
    report = DensityEstimator(config).density_sweep(args.center, cfg)
    if args.csv_path:
        write_report(report, "csv", args.csv_path)
    write_report(report.model_copy(update={"samples": []}), "json", args.out)
    return EXIT_OK


def _cmd_entry_stats(args: argparse.Namespace, config: ExpDynConfig) -> int:
    lab = MeasureLab(config)
    cfg = EntryStatsConfig(x=args.x, grid=args.grid, t_max=args.tmax)
    batch = lab.entry_batch(args.lambda0, ENTRY_DOMAIN if args.ball is None else args.ball, cfg)
    if args.csv_path:
        write_report(batch.to_frame(), "csv", args.csv_path)
    write_report(lab.entry_report(batch, cfg), "json", args.out)
    return EXIT_OK


def _cmd_deep_left(args: argparse.Namespace, config: ExpDynConfig) -> int:
    cfg = EntryStatsConfig(
        x=args.x,
        grid=args.grid if args.grid is not None else config.measure.grid,
        t_max=args.tmax if args.tmax is not None else config.measure.t_max,
    )
    domain = Disk(center=args.lambda0, radius=DEEP_LEFT_RADIUS)
    report = MeasureLab(config).deep_left_stats(args.lambda0, domain, args.x, (args.level1, args.level2), cfg)
    write_report(report, "json", args.out)
    return EXIT_OK


def _cmd_transfer(args: argparse.Namespace, config: ExpDynConfig) -> int:
    engine = TransferEngine(config)
    orbit = engine.backward_orbit_from(args.lambda1, args.start, args.n)
    result = engine.transfer_backward_orbit(orbit, args.lambda2)
    payload: Dict[str, Any] = {
        "result": to_record(result),
        "cocycle_log_ratio": to_record(engine.cocycle_log_ratio(orbit, result)),
    }
    if args.bounds is not None:
        payload["bounds"] = to_record(engine.check_bounds(orbit, result, args.bounds))
    if args.csv_path:
        write_report(transfer_frame(orbit, result), "csv", args.csv_path)
    write_report(payload, "json", args.out)
    return EXIT_OK


def _cmd_constants(args: argparse.Namespace, config: ExpDynConfig) -> int:
    solver = MisiurewiczSolver(config)
    cert = solver.solve_misiurewicz(args.lambda0, args.preperiod, args.period)
    constants = solver.estimate_constants(cert, args.samples)
    write_report({"certificate": certificate_to_record(cert), "constants": to_record(constants)},
                 "json", args.out)
    return EXIT_OK


def _cmd_cascade(args: argparse.Namespace, config: ExpDynConfig) -> int:
    j, k = args.square
    trace = MeasureLab(config).cascade_to_right(args.lambda0, GridSquare(j=j, k=k), args.x, args.kmax)
    write_report(trace, "json", args.out)
    return EXIT_OK


def _cmd_render(args: argparse.Namespace, config: ExpDynConfig) -> int:
    if args.out == "-":
        raise UsageError("render needs --out FILE.ppm")
    spec = RenderSpec(rect=tuple(args.rect), px=tuple(args.px))
    ParameterPlaneRenderer(config).write(spec, args.out)
    return EXIT_OK


COMMANDS = {
    "classify": _cmd_classify,
    "misiurewicz": _cmd_misiurewicz,
    "density": _cmd_density,
    "entry-stats": _cmd_entry_stats,
    "deep-left": _cmd_deep_left,
    "transfer": _cmd_transfer,
    "constants": _cmd_constants,
    "cascade": _cmd_cascade,
    "render": _cmd_render,
}


def run_command(argv: Sequence[str], config: Optional[ExpDynConfig] = None) -> int:
    """Runs one command and returns its exit code."""
    try:
        args = build_parser().parse_args(list(argv))
        config = config or get_config()
        if args.config_path:
            config = load_config(args.config_path, config)
        config = config.with_overrides(
            n_jobs=args.jobs, verbose=True if args.verbose else None,
        )
        return COMMANDS[args.command](args, config)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    except PreconditionViolation as e:
        print(f"❌ invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ExpDynError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED
    except (ValidationError, ConfigError, ValueError) as e:
        print(f"❌ invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"❌ I/O failure: {e}", file=sys.stderr)
        return EXIT_FAILED


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
