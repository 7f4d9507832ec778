"""Run configuration and numerical tolerances."""

from typing import TYPE_CHECKING, Any, Optional

import math
import os
from enum import Enum

import attr

from .exceptions import ConfigurationError

if TYPE_CHECKING:
    from .decompose import TargetSpec

TRANSMITTANCE_ENV = "HERALDED_FOCK_TRANSMITTANCE"
MAX_WORKERS_ENV = "HERALDED_FOCK_MAX_WORKERS"

SYMMETRIC_TRANSMITTANCE = 1 / math.sqrt(2)
DEFAULT_MAX_WORKERS = 4


class OutputFormat(Enum):
    """Enumeration of report formats."""

    TEXT = "text"
    STRUCTURED = "structured"


def _positive(instance: Any, attribute: Any, value: Any) -> None:
    """Validate that a threshold is strictly positive."""
    if not value > 0:
        raise ConfigurationError(f"{attribute.name} must be positive, got {value}")


def _open_unit_interval(instance: Any, attribute: Any, value: float) -> None:
    """Validate that a transmittance lies strictly between 0 and 1."""
    if not 0 < value < 1:
        raise ConfigurationError(f"{attribute.name} must lie in (0, 1), got {value}")


def _from_env(name: str, default: Any, kind: Any) -> Any:
    value = os.getenv(name)
    if value is None:
        return default
    try:
        return kind(value)
    except ValueError:
        raise ConfigurationError(f"{name} must be a {kind.__name__}, got '{value}'") from None


def default_transmittance() -> float:
    """Conditioning transmittance, overridable from the environment."""
    return _from_env(TRANSMITTANCE_ENV, SYMMETRIC_TRANSMITTANCE, float)


def default_max_workers() -> int:
    """Sweep parallelism, overridable from the environment."""
    return _from_env(MAX_WORKERS_ENV, DEFAULT_MAX_WORKERS, int)


@attr.s(frozen=True, auto_attribs=True)
class Tolerances:
    """Solver and verification thresholds.

    Args:
        solver_residual: largest accepted per-stage matching residual.
        phase_skip: effective angles closer than this to 0 or pi/2 have no meaningful phase.
        angle_match: largest accepted difference, in radians, between a solved effective beam
            splitter and its ideal counterpart.
        fidelity_gap: a run passes when its fidelity is at least ``1 - fidelity_gap``.
        root_cluster: relative distance under which roots are treated as one repeated root.
        root_residual: ``|p(beta)|`` relative to the largest coefficient above which a root is
            logged as inaccurate.
        max_newton_steps: cap on Newton polishing iterations per root.
        grid_theta: multi-start grid size along the stage angle.
        grid_phi: multi-start grid size along the stage phase.
        random_starts: seeded random starts tried after the grid.
    """

    solver_residual: float = attr.ib(default=1e-12, validator=_positive)
    phase_skip: float = attr.ib(default=1e-9, validator=_positive)
    angle_match: float = attr.ib(default=1e-9, validator=_positive)
    fidelity_gap: float = attr.ib(default=1e-8, validator=_positive)
    root_cluster: float = attr.ib(default=1e-7, validator=_positive)
    root_residual: float = attr.ib(default=1e-9, validator=_positive)
    max_newton_steps: int = attr.ib(default=50, validator=_positive)
    grid_theta: int = attr.ib(default=8, validator=_positive)
    grid_phi: int = attr.ib(default=8, validator=_positive)
    random_starts: int = attr.ib(default=16, validator=_positive)

    @property
    def fidelity_threshold(self) -> float:
        """Smallest fidelity a compiled chain may reach and still pass."""
        return 1.0 - self.fidelity_gap


@attr.s(auto_attribs=True)
class RunConfig:
    """Configuration of one generate, fig2 or sweep invocation."""

    target: Optional["TargetSpec"] = attr.ib(default=None)
    transmittance: float = attr.ib(factory=default_transmittance, validator=_open_unit_interval)
    tolerances: Tolerances = attr.ib(factory=Tolerances)
    output_format: OutputFormat = attr.ib(default=OutputFormat.TEXT, converter=OutputFormat)
    seed: int = attr.ib(default=0)
    max_workers: int = attr.ib(factory=default_max_workers, validator=_positive)
