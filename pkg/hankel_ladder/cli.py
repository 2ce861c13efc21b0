"""Command-line interface.

    hankel-ladder coeffs --A 1 --B 1 --gamma 1.5 --t 0.5 --nmax 8
    hankel-ladder verify --A 1 --B 1 --gamma 1.5 --t 0.5 --suites all
    hankel-ladder sweep --A 1 --B 0 --gamma 2 --t-from -1 --t-to 1 --t-steps 5
    hankel-ladder asymptotics --A 1 --B 1 --gamma 0.5 --t 0.5 --n-list 16,32,64

Exit status: 0 when every check passes (or the command only computes),
1 on a failed check or a numerical failure, 2 on a usage error,
130 when interrupted.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .asymptotics import QUARTIC_MIN_N, check_asymptotics_R, check_hankel_expansion, check_quartic_balance
from .errors import HankelLadderError, InvalidParameters
from .models import (
    REPORT_COLUMNS,
    Command,
    FDOrder,
    NumericPolicy,
    OdeMethod,
    OutputFormat,
    RunConfig,
    Suite,
    WeightParams,
    sorted_reports,
    to_fraction,
)
from .moments import cross_check
from .pipeline import compute_snapshot
from .reports import (
    ASYMPTOTIC_COLUMNS,
    COEFF_COLUMNS,
    MOMENT_COLUMNS,
    SWEEP_COLUMNS,
    coefficient_rows,
    moment_rows,
    print_summary,
    report_rows,
    status,
    write_table,
)
from .suite import SuiteContext, run_suites, run_sweep

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130


class UsageError(Exception):
    """Raised by the parser instead of exiting, so run() owns the exit code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hankel-ladder",
        description="Orthogonal polynomials, Hankel determinants and identity checks "
        "for the deformed Hermite weight with one jump",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=[c.value for c in Command], help="What to compute")
    parser.add_argument("--A", default="1", help="Amplitude left of the jump (default: 1)")
    parser.add_argument("--B", default="0", help="Jump height (default: 0)")
    parser.add_argument("--gamma", default="0", help="Exponent of |z-t| (default: 0)")
    parser.add_argument("--t", default="0", help="Jump location (default: 0)")
    parser.add_argument("--t-from", dest="t_from", help="First t of a grid")
    parser.add_argument("--t-to", dest="t_to", help="Last t of a grid")
    parser.add_argument("--t-steps", dest="t_steps", type=int, default=None, help="Number of grid points")
    parser.add_argument("--nmax", type=int, default=8, help="Largest degree n (default: 8)")
    parser.add_argument("--prec", type=int, default=512, help="Working precision in bits (default: 512)")
    parser.add_argument("--fd-step", dest="fd_step", default="1e-8", help="Finite-difference step in t (default: 1e-8)")
    parser.add_argument("--fd-order", dest="fd_order", choices=[o.value for o in FDOrder], default=FDOrder.CENTRAL2.value)
    parser.add_argument(
        "--ode-method",
        dest="ode_method",
        choices=[m.value for m in OdeMethod],
        default=OdeMethod.KERNEL.value,
        help="Derivatives of A_n, B_n for the ODE check (default: kernel)",
    )
    parser.add_argument("--quad-tol", dest="quad_tol", default="1e-40", help="Quadrature tolerance (default: 1e-40)")
    parser.add_argument("--suites", default="", help="Comma-separated suites for verify, or 'all'")
    parser.add_argument("--z", default="1+1j,2j,-3+0.5j", help="Complex points for the ladder suite")
    parser.add_argument("--s", default="0.5", help="Hankel-expansion argument (default: 0.5)")
    parser.add_argument("--n-list", dest="n_list", default="16,32,64", help="Degrees for asymptotics (default: 16,32,64)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value)
    parser.add_argument("--out", help="Output file (default: standard output)")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes (default: CPU count)")
    parser.add_argument("--quiet", action="store_true", help="Suppress status lines")
    return parser


def t_grid(t_from: Fraction, t_to: Fraction, steps: int) -> List[Fraction]:
    """Evenly spaced exact grid from t_from to t_to inclusive."""
    if steps < 1:
        raise InvalidParameters(f"--t-steps must be >= 1, got {steps}")
    if steps == 1:
        return [t_from]
    width = (t_to - t_from) / (steps - 1)
    return [t_from + i * width for i in range(steps)]


def _parse_list(text: str, convert, flag: str) -> tuple:
    try:
        return tuple(convert(part.strip()) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise InvalidParameters(f"{flag}: cannot parse {text!r}") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    command = Command(args.command)
    params = WeightParams(A=args.A, B=args.B, gamma=args.gamma, t=args.t)
    policy = NumericPolicy(
        precision_bits=args.prec,
        quad_tol=to_fraction(args.quad_tol, "--quad-tol"),
        fd_step=to_fraction(args.fd_step, "--fd-step"),
    )

    grid = ()
    ranged = (args.t_from, args.t_to, args.t_steps)
    if any(value is not None for value in ranged):
        if not all(value is not None for value in ranged):
            raise InvalidParameters("--t-from, --t-to and --t-steps go together")
        grid = tuple(
            t_grid(to_fraction(args.t_from, "--t-from"), to_fraction(args.t_to, "--t-to"), args.t_steps)
        )

    suites = Suite.parse(args.suites) if args.suites else ()
    config = RunConfig(
        command=command,
        params=params,
        policy=policy,
        n_max=args.nmax,
        t_grid=grid,
        suites=suites,
        output=OutputFormat(args.format),
        out_path=Path(args.out) if args.out else None,
        fd_order=FDOrder(args.fd_order),
        ode_method=OdeMethod(args.ode_method),
        z_points=_parse_list(args.z, complex, "--z"),
        s=to_fraction(args.s, "--s"),
        n_list=_parse_list(args.n_list, int, "--n-list"),
        workers=args.workers,
        quiet=args.quiet,
    )
    if command is Command.VERIFY:
        config.fd.validate_for(policy)
    return config


def _context(config: RunConfig) -> SuiteContext:
    return SuiteContext(
        params=config.params,
        policy=config.policy,
        n_max=config.n_max,
        fd=config.fd,
        z_points=config.z_points,
        ode_method=config.ode_method,
        quiet=config.quiet,
    )


def run(config: RunConfig) -> int:
    """Execute one command and write its table; returns the exit status."""
    quiet = config.quiet
    bits = config.policy.precision_bits
    status(f"🔍 Hankel Ladder v{__version__}: {config.command.value}", quiet)
    status(f"📐 {config.params}, {bits} bits, n_max={config.n_max}", quiet)

    if config.command is Command.MOMENTS:
        table = cross_check(config.n_max, config.params, config.policy)
        write_table(moment_rows(table), MOMENT_COLUMNS, config.output, config.out_path, quiet)
        status(f"✅ {len(table.moments)} moments ({table.backend.value})", quiet)
        return EXIT_OK

    if config.command is Command.COEFFS:
        snap = compute_snapshot(config.params, config.policy, config.n_max, quiet)
        write_table(coefficient_rows(snap.rec, snap.aux), COEFF_COLUMNS, config.output, config.out_path, quiet)
        status(f"✅ coefficients for n = 0..{config.n_max}", quiet)
        return EXIT_OK

    if config.command is Command.SWEEP:
        rows = run_sweep(_context(config), config.t_grid, config.workers)
        write_table(rows, SWEEP_COLUMNS, config.output, config.out_path, quiet)
        status(f"✅ {len(config.t_grid)} grid points", quiet)
        return EXIT_OK

    if config.command is Command.VERIFY:
        reports = run_suites(
            _context(config),
            config.suites,
            config.t_grid,
            config.workers,
            on_progress=lambda message: status(message, quiet),
        )
        write_table(report_rows(reports, bits), REPORT_COLUMNS, config.output, config.out_path, quiet)
        return _verdict(reports, quiet)

    return _run_asymptotics(config)


def _run_asymptotics(config: RunConfig) -> int:
    quiet = config.quiet
    params, policy = config.params, config.policy
    status(f"🔍 large-n checks at n = {', '.join(map(str, config.n_list))}", quiet)
    reports, points = check_asymptotics_R(config.n_list, params.t, params, policy)
    reports += check_hankel_expansion(config.n_list, config.s, params, policy)
    if config.n_list[0] >= QUARTIC_MIN_N:
        reports += check_quartic_balance(config.n_list, params, policy)
    else:
        status("⚠️  quartic balance skipped: needs n >= 16", quiet)
    off = [str(point.n) for point in points if not point.on_branch]
    if off:
        status(
            f"⚠️  R_n is off the sqrt(n) branch of the expansion at n = {', '.join(off)}; "
            "the large-n checks compare against that branch",
            quiet,
        )
    rows = [point.to_row(policy.precision_bits) for point in points]
    write_table(rows, ASYMPTOTIC_COLUMNS, config.output, config.out_path, quiet)
    return _verdict(sorted_reports(reports), quiet)


def _verdict(reports, quiet: bool) -> int:
    print_summary(reports, quiet)
    failed = sum(1 for report in reports if not report.passed)
    if failed:
        status(f"❌ {failed} of {len(reports)} checks failed", quiet)
        return EXIT_FAILED
    status(f"✅ all {len(reports)} checks passed", quiet)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> None:
    parser = build_parser()
    quiet = False
    try:
        args = parser.parse_args(argv)
        quiet = args.quiet
        config = config_from_args(args)
        code = run(config)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"❌ Error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except InvalidParameters as exc:
        print(f"❌ Error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except KeyboardInterrupt:
        status("\n⏹️  Run cancelled by user", quiet)
        code = EXIT_INTERRUPTED
    except HankelLadderError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_FAILED
    sys.exit(code)


if __name__ == "__main__":
    main()
