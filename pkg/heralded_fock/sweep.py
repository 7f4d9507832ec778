"""Parameter sweeps over the conditioning transmittance and the photon number."""

from typing import Any, Callable, Dict, Optional, Sequence

import math
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np
import pandas
from pyarrow import Table, parquet

from .config import DEFAULT_MAX_WORKERS, SYMMETRIC_TRANSMITTANCE, Tolerances
from .decompose import TargetSpec
from .exceptions import ConfigurationError, HeraldedFockError
from .logging import logger
from .presets import noon
from .report import generate_report

TRANSMITTANCE_AXIS = "transmittance"
PHOTONS_AXIS = "n_total"
FLOAT_FORMAT = "%.15g"


@attr.s
class SweepResult:
    """Rows of a sweep, one per axis value in axis order.

    Columns are the axis value, ``success_probability``, ``fidelity`` and ``failed``. Failed
    points keep their row with ``failed = 1`` and empty numeric fields.
    """

    axis: str = attr.ib()
    frame: pandas.DataFrame = attr.ib(repr=False)

    def to_pandas(self) -> pandas.DataFrame:
        """Return the rows as a pandas DataFrame."""
        return self.frame.copy()

    def to_csv(self, where: Optional[Any] = None) -> Optional[str]:
        """Write comma-separated rows with a header and 15 significant digits.

        Args:
            where: path or file-like object; the CSV text is returned when omitted.
        """
        return self.frame.to_csv(where, index=False, float_format=FLOAT_FORMAT)

    def to_parquet(self, where: Any) -> None:
        """Serialize the rows to a local parquet file.

        Args:
            where: path of file-like object.
        """
        table = Table.from_pandas(self.frame, preserve_index=False)
        parquet.write_table(table, where)

    @property
    def failures(self) -> int:
        """Number of points whose pipeline raised."""
        return int(self.frame["failed"].sum())

    def is_non_increasing(self) -> bool:
        """Whether the success probability never grows along the axis, failed rows skipped."""
        values = self.frame.loc[self.frame["failed"] == 0, "success_probability"].to_numpy()
        return bool(np.all(np.diff(values) <= 1e-12))


def _evaluate(
    axis: str,
    value: Any,
    target: TargetSpec,
    transmittance: float,
    tolerances: Tolerances,
    seed: int,
) -> Dict[str, Any]:
    try:
        report = generate_report(target, transmittance, tolerances, seed)
    except HeraldedFockError as err:
        logger.warning("sweep point failed", axis=axis, value=value, error=str(err))
        return {axis: value, "success_probability": math.nan, "fidelity": math.nan, "failed": 1}
    return {
        axis: value,
        "success_probability": report.outcome.success_probability,
        "fidelity": report.fidelity,
        "failed": 0,
    }


def _collect(axis: str, rows: Sequence[Dict[str, Any]]) -> SweepResult:
    columns = [axis, "success_probability", "fidelity", "failed"]
    frame = pandas.DataFrame(list(rows), columns=columns)
    result = SweepResult(axis=axis, frame=frame)
    logger.info("sweep finished", axis=axis, points=len(frame), failures=result.failures)
    return result


def sweep_transmittance(
    target: TargetSpec,
    start: float,
    stop: float,
    steps: int,
    tolerances: Tolerances = Tolerances(),
    seed: int = 0,
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> SweepResult:
    """Run the full pipeline on ``target`` for ``steps`` evenly spaced transmittances.

    Raises:
        ConfigurationError: if ``steps`` is not positive or the range leaves (0, 1).
    """
    if steps < 1:
        raise ConfigurationError(f"steps must be positive, got {steps}")
    values = [float(t) for t in np.linspace(start, stop, steps)]
    if not all(0 < t < 1 for t in values):
        raise ConfigurationError(f"transmittance range must lie in (0, 1), got [{start}, {stop}]")

    def point(t: float) -> Dict[str, Any]:
        return _evaluate(TRANSMITTANCE_AXIS, t, target, t, tolerances, seed)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        rows = list(executor.map(point, values))
    return _collect(TRANSMITTANCE_AXIS, rows)


def sweep_photon_number(
    max_n: int,
    factory: Callable[[int], TargetSpec] = noon,
    min_n: int = 1,
    transmittance: float = SYMMETRIC_TRANSMITTANCE,
    tolerances: Tolerances = Tolerances(),
    seed: int = 0,
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> SweepResult:
    """Run the pipeline on ``factory(N)`` for ``N = min_n .. max_n``.

    A success probability that grows with N is logged as a warning, not raised.

    Raises:
        ConfigurationError: if the photon range is empty or starts below 1.
    """
    if not 1 <= min_n <= max_n:
        raise ConfigurationError(
            f"photon range must satisfy 1 <= min_n <= max_n, got {min_n}..{max_n}"
        )

    def point(n_total: int) -> Dict[str, Any]:
        return _evaluate(PHOTONS_AXIS, n_total, factory(n_total), transmittance, tolerances, seed)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        rows = list(executor.map(point, range(min_n, max_n + 1)))
    result = _collect(PHOTONS_AXIS, rows)
    if not result.is_non_increasing():
        logger.warning("success probability is not monotone in N", axis=PHOTONS_AXIS)
    return result
