"""
Command-line front end.

stdout carries the JSON reports; logs go to stderr. Exit codes: 0 success,
1 rejected input or I/O failure, 2 numerical non-convergence, 3 failed
verify check.
"""
import argparse
import logging
import sys

from merosin.config import configure_logging, load_settings
from merosin.errors import MerosinError, NonConvergenceError, OutputError, ValidationError
from merosin.family import ParamPoint
from merosin.orbitlab import (
    OrbitOptions,
    ScanAxis,
    bifurcation_scan,
    chaos_certificate,
    iterate_orbit,
)
from merosin.paramlab import (
    DEFAULT_N_MAX,
    attractor_inventory,
    compute_constants,
    imag_fixed_points,
    imag_two_cycles,
    real_fixed_points,
    regime,
    singular_values,
)
from merosin.render import DEFAULT_SIZE, RenderOptions, Window, basin_fractions, render_grid, write_grid_csv, write_ppm
from merosin.rootkit import TOL_F, TOL_X
from merosin.serialize import (
    constants_from_json,
    constants_to_json,
    dumps,
    read_json,
    to_jsonable,
    write_bifurcation_csv,
    write_json,
)
from merosin.verify import VerifyContext, run_verify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NONCONVERGENCE = 2
EXIT_VERIFY_FAILED = 3


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# --- argument types ---------------------------------------------------------

def _float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _floats(text, count, form):
    parts = text.split(":") if ":" in form else text.split(",")
    if len(parts) != count:
        raise argparse.ArgumentTypeError(f"expected {form}, got {text!r}")
    return [_float(part) for part in parts]


def parse_lambda(text):
    try:
        return ParamPoint(_float(text))
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))


def parse_point(text):
    re_part, im_part = _floats(text, 2, "RE,IM")
    return complex(re_part, im_part)


def parse_range(text):
    lo, hi = _floats(text, 2, "LO:HI")
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError(f"range needs 0 < LO < HI, got {text!r}")
    return lo, hi


def parse_window(text):
    x0, x1, y0, y1 = _floats(text, 4, "X0:X1:Y0:Y1")
    if not (x0 < x1 and y0 < y1):
        raise argparse.ArgumentTypeError(f"window needs X0 < X1 and Y0 < Y1, got {text!r}")
    return x0, x1, y0, y1


def parse_size(text):
    try:
        width, height = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    if width < 1 or height < 1:
        raise argparse.ArgumentTypeError(f"size must be at least 1x1, got {text!r}")
    return width, height


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def non_negative_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be at least 0, got {value}")
    return value


def positive_float(text):
    value = _float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


# --- constants cache --------------------------------------------------------

def load_constants(settings, tol_x=TOL_X, tol_f=TOL_F):
    """
    Constants for the given tolerances, from the JSON cache when present.

    The cache maps "tol_x:tol_f" to a `params` report and is refreshed
    whenever the key is missing or the file cannot be read.
    """
    if not settings.use_cache:
        return compute_constants(tol_x, tol_f)
    key = f"{tol_x!r}:{tol_f!r}"
    path = settings.cache_path
    cache = {}
    if path.exists():
        try:
            cache = read_json(path)
            if not isinstance(cache, dict):
                raise ValidationError("top level is not an object")
            if key in cache:
                constants = constants_from_json(cache[key])
                logger.info(f"Loaded constants from {path}")
                return constants
        except (OSError, ValueError) as e:
            logger.warning(f"Constants cache {path} is unreadable, recomputing: {str(e)}")
            cache = {}
    constants = compute_constants(tol_x, tol_f)
    cache[key] = constants_to_json(constants)
    try:
        write_json(cache, path)
    except OutputError as e:
        logger.warning(f"Could not refresh constants cache: {str(e)}")
    return constants


# --- commands ----------------------------------------------------------------

def emit(report):
    print(dumps(report))


def cmd_params(args, settings):
    emit(constants_to_json(load_constants(settings, args.tol_x, args.tol_f)))
    return EXIT_OK


def cmd_fixed_points(args, settings):
    c = load_constants(settings, args.tol_x, args.tol_f)
    p = args.lam
    emit({
        "lambda": p.lam,
        "regime": regime(p, c),
        "real_fixed_points": real_fixed_points(p),
        "imag_fixed_points": imag_fixed_points(p),
        "imag_two_cycles": imag_two_cycles(p, c),
        "singular_values": singular_values(p, args.n_max),
    })
    return EXIT_OK


def cmd_orbit(args, settings):
    c = load_constants(settings, args.tol_x, args.tol_f)
    p = args.lam
    outcome = iterate_orbit(args.z, p, attractor_inventory(p, c), OrbitOptions.for_parameter(p, c, args.max_iter))
    emit({
        "lambda": p.lam,
        "z0": args.z,
        "status": outcome.status,
        "attractor_id": outcome.attractor_id,
        "iterations": outcome.iterations,
        "final_value": outcome.final_value,
    })
    return EXIT_OK


def cmd_chaos_cert(args, settings):
    report = to_jsonable(chaos_certificate(args.lam))
    report = {"lambda": report.pop("lam"), **report}
    emit(report)
    return EXIT_OK


def cmd_bifurcation(args, settings):
    lo, hi = args.range
    table = bifurcation_scan(args.axis, lo, hi, args.steps, args.transient, args.keep)
    write_bifurcation_csv(table, args.out)
    emit({
        "axis": table.axis,
        "rows": len(table.rows),
        "empty_rows": sum(1 for row in table.rows if not row.ordinates),
        "out": args.out,
    })
    return EXIT_OK


def cmd_render(args, settings):
    c = load_constants(settings, args.tol_x, args.tol_f)
    width, height = args.size
    window = Window(*args.window, width, height)
    grid = render_grid(args.lam, window, RenderOptions(threads=settings.threads, max_iter=args.max_iter), c)
    write_ppm(grid, args.out)
    if args.grid_csv:
        write_grid_csv(grid, args.grid_csv)
    emit({
        "lambda": args.lam.lam,
        "window": window,
        "fractions": basin_fractions(grid),
        "out": args.out,
    })
    return EXIT_OK


def cmd_verify(args, settings):
    c = load_constants(settings, args.tol_x, args.tol_f)
    context = VerifyContext(c, settings.threads)
    if args.tamper_lambda_star is not None:
        logger.warning(f"Replacing lambda* with {args.tamper_lambda_star} before running checks")
        context = context.tampered(args.tamper_lambda_star)
    report = run_verify(context, fast=args.fast)
    emit(report)
    if args.report:
        write_json(report, args.report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


# --- grammar -----------------------------------------------------------------

def build_parser():
    parser = CliArgumentParser(prog="merosin", description="Dynamics of f(z) = sin z / (z^2 + lambda)")
    parser.add_argument("--threads", type=positive_int, help="worker threads (default: MEROSIN_THREADS or CPU count)")
    parser.add_argument("--log-level", help="logging level (default: MEROSIN_LOG_LEVEL or INFO)")
    parser.add_argument("--no-cache", action="store_true", help="do not read or write the constants cache")
    parser.add_argument("--tol-x", type=positive_float, default=TOL_X, help="root bracket tolerance for the constants")
    parser.add_argument("--tol-f", type=positive_float, default=TOL_F, help="root residual tolerance for the constants")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    params = commands.add_parser("params", help="bifurcation constants as JSON")
    params.set_defaults(handler=cmd_params)

    fixed = commands.add_parser("fixed-points", help="fixed points, 2-cycles, singular values and regime")
    fixed.add_argument("--lambda", dest="lam", type=parse_lambda, required=True)
    fixed.add_argument("--n-max", type=positive_int, default=DEFAULT_N_MAX)
    fixed.set_defaults(handler=cmd_fixed_points)

    orbit = commands.add_parser("orbit", help="classify one orbit (write --z=-1,2 for a negative real part)")
    orbit.add_argument("--lambda", dest="lam", type=parse_lambda, required=True)
    orbit.add_argument("--z", type=parse_point, required=True, metavar="RE,IM")
    orbit.add_argument("--max-iter", type=positive_int)
    orbit.set_defaults(handler=cmd_orbit)

    chaos = commands.add_parser("chaos-cert", help="turbulence certificate on [0, pi]")
    chaos.add_argument("--lambda", dest="lam", type=parse_lambda, required=True)
    chaos.set_defaults(handler=cmd_chaos_cert)

    scan = commands.add_parser("bifurcation", help="bifurcation scan on one axis, written as CSV")
    scan.add_argument("--axis", type=ScanAxis, choices=list(ScanAxis), required=True)
    scan.add_argument("--range", type=parse_range, required=True, metavar="LO:HI")
    scan.add_argument("--steps", type=positive_int, required=True)
    scan.add_argument("--transient", type=non_negative_int, default=1000)
    scan.add_argument("--keep", type=positive_int, default=64)
    scan.add_argument("--out", required=True, metavar="CSV")
    scan.set_defaults(handler=cmd_bifurcation)

    render = commands.add_parser("render", help="basin image as binary PPM")
    render.add_argument("--lambda", dest="lam", type=parse_lambda, required=True)
    render.add_argument("--window", type=parse_window, required=True, metavar="X0:X1:Y0:Y1",
                        help="complex-plane window; write --window=-4.7:4.7:-6.3:0 when X0 is negative")
    render.add_argument("--size", type=parse_size, default=DEFAULT_SIZE, metavar="WxH")
    render.add_argument("--out", required=True, metavar="PPM")
    render.add_argument("--grid-csv", metavar="CSV", help="also dump the grid as i,j,label,iterations")
    render.add_argument("--max-iter", type=positive_int)
    render.set_defaults(handler=cmd_render)

    verify = commands.add_parser("verify", help="run the property suite")
    verify.add_argument("--fast", action="store_true", help="skip the figure grids")
    verify.add_argument("--report", metavar="JSON", help="also write the report to a file")
    verify.add_argument("--tamper-lambda-star", type=_float, help=argparse.SUPPRESS)
    verify.set_defaults(handler=cmd_verify)
    return parser


def dispatch(argv=None, environ=None):
    """Parse argv, run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INVALID

    try:
        settings = load_settings(environ).with_overrides(
            threads=args.threads,
            log_level=args.log_level,
            use_cache=False if args.no_cache else None,
        )
    except ValidationError as e:
        print(f"merosin: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    configure_logging(settings.log_level)

    try:
        return args.handler(args, settings)
    except ValidationError as e:
        logger.error(f"Invalid input: {str(e)}")
        return EXIT_INVALID
    except NonConvergenceError as e:
        logger.error(f"Non-convergence: {str(e)}")
        return EXIT_NONCONVERGENCE
    except OutputError as e:
        logger.error(str(e))
        return EXIT_INVALID
    except MerosinError as e:
        logger.error(f"Error: {str(e)}", exc_info=True)
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}", exc_info=True)
        return EXIT_INVALID
