"""Application bootstrap: the cvdyn command line."""
import argparse
import logging
import sys
from concurrent.futures import CancelledError
from typing import Optional, Sequence

from app import __version__
from app.core import commands
from app.core.errors import CvdynError, InvalidArgument
from app.core.scenario import Scenario, load_preset, load_scenario
from app.core.validation import CHECK_NAMES
from app.util import paths
from app.util.app_settings import AppSettings
from app.util.logging_util import setup_logging

log = logging.getLogger("cvdyn.main")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=paths.DEFAULT_OUT_DIR,
                        help="output directory (default: ./%(default)s)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads, 0 = auto (fallback: $CVDYN_THREADS)")
    common.add_argument("--seed", type=int, default=None, help="Monte-Carlo seed (unsigned 64-bit)")
    common.add_argument("--samples", type=int, default=None, help="Monte-Carlo samples per point")
    common.add_argument("--verbose", action="store_true", help="debug logging on the console")
    return common


def _scenario_flags() -> argparse.ArgumentParser:
    scenario = argparse.ArgumentParser(add_help=False)
    source = scenario.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", metavar="PATH", help="scenario TOML file")
    source.add_argument("--preset", metavar="NAME",
                        help="bundled scenario: " + (", ".join(paths.preset_names()) or "none"))
    return scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvdyn",
        description="Gaussian dynamics of two weakly coupled mechanical resonators "
                    "under frequency-jump squeezing protocols.",
    )
    parser.add_argument("--version", action="version", version=f"cvdyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common, scenario = _common_flags(), _scenario_flags()
    sub.add_parser("simulate", parents=[common, scenario],
                   help="trajectory CSV and summary for one scenario")
    sub.add_parser("sweep", parents=[common, scenario],
                   help="final entanglement and phonons over an omega_2/omega_1 grid")
    sub.add_parser("noise", parents=[common, scenario],
                   help="averaged entanglement over a frequency-noise grid and sigma*")
    sub.add_parser("estimate", parents=[common, scenario],
                   help="closed-form couplings, collapse-model bound and collision rate")
    validate = sub.add_parser("validate", parents=[common], help="run the numerical self-checks")
    validate.add_argument("--check", action="append", choices=CHECK_NAMES, dest="checks",
                          help="run only this check (repeatable)")
    validate.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                          help="override a check tolerance (repeatable)")
    return parser


def _parse_tolerances(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise InvalidArgument(f"--tolerance expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InvalidArgument(f"--tolerance {name}: {value!r} is not a number") from None
    return out


def _load(args: argparse.Namespace) -> Scenario:
    if args.preset:
        return load_preset(args.preset)
    return load_scenario(args.config)


def run(args: argparse.Namespace, settings: AppSettings) -> int:
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        raise InvalidArgument("--seed must be an unsigned 64-bit integer")
    if args.samples is not None and args.samples < 1:
        raise InvalidArgument("--samples must be >= 1")
    ctx = commands.RunContext(
        out_dir=args.out,
        threads=settings.threads(args.threads),
        seed=args.seed,
        samples=args.samples,
    )
    if args.command == "validate":
        commands.cmd_validate(ctx, args.checks, _parse_tolerances(args.tolerance))
        return 0
    scenario = _load(args)
    handler = {
        "simulate": commands.cmd_simulate,
        "sweep": commands.cmd_sweep,
        "noise": commands.cmd_noise,
        "estimate": commands.cmd_estimate,
    }[args.command]
    handler(scenario, ctx)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = AppSettings()
    setup_logging(paths.get_log_dir(args.out), settings.verbose(args.verbose))
    log.info("cvdyn %s: %s", __version__, args.command)
    try:
        return run(args, settings)
    except CvdynError as e:
        log.debug("Exit %d: %s", e.exit_code, e)
        print(f"cvdyn: error: {e}", file=sys.stderr)
        return e.exit_code
    except (KeyboardInterrupt, CancelledError):
        log.warning("Interrupted")
        return 130
