"""Command line front end: generate, fig2 and sweep."""

from typing import List, Optional, Union

import argparse
import sys

from .config import OutputFormat, RunConfig, Tolerances
from .decompose import TargetSpec
from .exceptions import (
    ConfigurationError,
    DegenerateStageError,
    SolverConvergenceError,
    TargetSpecError,
    ZeroProbabilityBranchError,
)
from .logging import logger
from .presets import PRESETS, load_target_file, resolve_preset
from .report import Fig2Report, GenerateReport, fig2_report, generate_report
from .sweep import SweepResult, sweep_photon_number, sweep_transmittance

EXIT_OK = 0
EXIT_LOW_FIDELITY = 1
EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3
EXIT_ZERO_PROBABILITY = 4
EXIT_UNEXPECTED = -1

DEFAULT_SWEEP_PRESET = "noon:4"
SWEEPABLE_FAMILIES = ("noon", "uniform")


def cmd_generate(config: RunConfig) -> GenerateReport:
    """Decompose, compile and simulate the configured target.

    Raises:
        TargetSpecError: if no target is configured.
    """
    if config.target is None:
        raise TargetSpecError("generate needs a target, use --target or --preset")
    return generate_report(config.target, config.transmittance, config.tolerances, config.seed)


def cmd_fig2(config: Optional[RunConfig] = None) -> Fig2Report:
    """Simulate the four-photon scheme with symmetric or configured conditioning splitters."""
    config = config or RunConfig()
    return fig2_report(config.transmittance)


def cmd_sweep(
    config: RunConfig,
    axis: str = "transmittance",
    start: float = 0.1,
    stop: float = 0.9,
    steps: int = 9,
    max_n: int = 5,
    family: str = "noon",
) -> SweepResult:
    """Sweep the pipeline along ``axis``.

    Args:
        config: target, tolerances, seed and worker count. The transmittance axis needs a target;
            the photon axis uses ``config.transmittance``.
        axis: ``transmittance`` or ``photons``.
        start: first transmittance.
        stop: last transmittance.
        steps: number of transmittances.
        max_n: largest photon number of the photon axis.
        family: preset family swept along the photon axis.

    Raises:
        TargetSpecError: if the target or family is missing or unknown.
        ConfigurationError: if the axis or its range is invalid.
    """
    if axis == "transmittance":
        if config.target is None:
            raise TargetSpecError("A transmittance sweep needs a target")
        return sweep_transmittance(
            config.target,
            start,
            stop,
            steps,
            tolerances=config.tolerances,
            seed=config.seed,
            max_workers=config.max_workers,
        )
    if axis == "photons":
        if family not in SWEEPABLE_FAMILIES:
            raise TargetSpecError(f"Photon sweeps support {SWEEPABLE_FAMILIES}, got '{family}'")
        return sweep_photon_number(
            max_n,
            factory=PRESETS[family],
            transmittance=config.transmittance,
            tolerances=config.tolerances,
            seed=config.seed,
            max_workers=config.max_workers,
        )
    raise ConfigurationError(f"Unknown sweep axis '{axis}'")


def _target_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--target",
        metavar="TARGET_FILE",
        type=str,
        help='JSON file {"n_total": N, "coefficients": [[re, im], ...]}',
    )
    group.add_argument(
        "--preset",
        metavar="PRESET",
        type=str,
        help="named target: noon:N, uniform:N or fock:N:n",
    )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the ``heralded-fock`` command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--transmittance",
        metavar="T",
        type=float,
        help="conditioning beam splitter transmittance in (0, 1), default 1/sqrt(2)",
    )
    common.add_argument("--seed", type=int, default=0, help="seed of the solver multi-start")
    common.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.TEXT.value,
        help="report format",
    )
    common.add_argument("--out", metavar="FILE", type=str, help="write the output to FILE")

    parser = argparse.ArgumentParser(
        prog="heralded-fock",
        description="Compile and simulate heralded two-mode Fock state generation.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", parents=[common], help="compile a target")
    _target_options(generate)

    commands.add_parser("fig2", parents=[common], help="simulate the four-photon scheme")

    sweep = commands.add_parser("sweep", parents=[common], help="sweep T or N, emit CSV")
    _target_options(sweep)
    sweep.add_argument("--axis", choices=["transmittance", "photons"], default="transmittance")
    sweep.add_argument("--start", type=float, default=0.1, help="first transmittance")
    sweep.add_argument("--stop", type=float, default=0.9, help="last transmittance")
    sweep.add_argument("--steps", type=int, default=9, help="number of transmittances")
    sweep.add_argument("--max-n", type=int, default=5, help="largest photon number")
    return parser


def _target(args: argparse.Namespace) -> Optional[TargetSpec]:
    # the photon axis reads --preset as a family name
    if args.command == "sweep" and args.axis == "photons":
        return None
    if getattr(args, "target", None):
        return load_target_file(args.target)
    if getattr(args, "preset", None):
        return resolve_preset(args.preset)
    if args.command == "sweep" and args.axis == "transmittance":
        return resolve_preset(DEFAULT_SWEEP_PRESET)
    return None


def make_config(args: argparse.Namespace) -> RunConfig:
    """Build the run configuration from parsed arguments and the environment."""
    options = {
        "target": _target(args),
        "tolerances": Tolerances(),
        "output_format": args.format,
        "seed": args.seed,
    }
    if args.transmittance is not None:
        options["transmittance"] = args.transmittance
    return RunConfig(**options)


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        print(text)
        return
    with open(out, "w", encoding="utf-8") as file:
        file.write(text + "\n")


def emit(report: Union[GenerateReport, Fig2Report], config: RunConfig, out: Optional[str]) -> None:
    """Write a report in the configured format."""
    if config.output_format is OutputFormat.STRUCTURED:
        _write(report.to_json(), out)
    else:
        _write(report.render_text(), out)


def emit_sweep(result: SweepResult, out: Optional[str]) -> None:
    """Write sweep rows as CSV, or as parquet when ``out`` ends with ``.parquet``."""
    if out is None:
        sys.stdout.write(result.to_csv())
    elif out.endswith(".parquet"):
        result.to_parquet(out)
    else:
        result.to_csv(out)


def run(args: argparse.Namespace) -> int:
    """Dispatch a parsed command and return its exit code."""
    config = make_config(args)
    if args.command == "generate":
        report = cmd_generate(config)
        emit(report, config, args.out)
        return EXIT_OK if report.passed else EXIT_LOW_FIDELITY
    if args.command == "fig2":
        emit(cmd_fig2(config), config, args.out)
        return EXIT_OK
    family = args.preset.split(":")[0] if args.preset else "noon"
    result = cmd_sweep(
        config, args.axis, args.start, args.stop, args.steps, args.max_n, family=family
    )
    emit_sweep(result, args.out)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the ``heralded-fock`` command."""
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (TargetSpecError, ConfigurationError) as err:
        logger.error(str(err))
        return EXIT_BAD_INPUT
    except (SolverConvergenceError, DegenerateStageError) as err:
        logger.error(f"stage {err.stage}: {err.message}")
        return EXIT_SOLVER
    except ZeroProbabilityBranchError as err:
        logger.error(f"stage {err.stage}: {err.message}")
        return EXIT_ZERO_PROBABILITY
    except Exception as e:
        logger.exception(e)
        return EXIT_UNEXPECTED
