"""Named target presets and target file loading."""

from typing import Any, Callable, Dict, List

import json
import math

from .decompose import TargetSpec
from .exceptions import TargetSpecError
from .logging import logger


def noon(n_total: int) -> TargetSpec:
    """``(|0,N> - |N,0>)/sqrt 2``, the sign convention of the four-photon scheme."""
    if n_total < 1:
        raise TargetSpecError(f"noon needs N >= 1, got {n_total}")
    coefficients: List[complex] = [0j] * (n_total + 1)
    coefficients[0] += 1 / math.sqrt(2)
    coefficients[n_total] -= 1 / math.sqrt(2)
    return TargetSpec(n_total=n_total, coefficients=coefficients)


def uniform(n_total: int) -> TargetSpec:
    """Equal-weight superposition ``sum_n |n, N - n> / sqrt(N + 1)``."""
    if n_total < 1:
        raise TargetSpecError(f"uniform needs N >= 1, got {n_total}")
    return TargetSpec(n_total=n_total, coefficients=[1.0] * (n_total + 1))


def fock(n_total: int, n: int) -> TargetSpec:
    """Single basis ket ``|n, N - n>``."""
    if n_total < 1:
        raise TargetSpecError(f"fock needs N >= 1, got {n_total}")
    if not 0 <= n <= n_total:
        raise TargetSpecError(f"fock needs 0 <= n <= N, got n={n}, N={n_total}")
    coefficients: List[complex] = [0j] * (n_total + 1)
    coefficients[n] = 1.0
    return TargetSpec(n_total=n_total, coefficients=coefficients)


PRESETS: Dict[str, Callable[..., TargetSpec]] = {
    "noon": noon,
    "uniform": uniform,
    "fock": fock,
}


def resolve_preset(name: str) -> TargetSpec:
    """Build the target named by ``noon:N``, ``uniform:N`` or ``fock:N:n``.

    Raises:
        TargetSpecError: if the name or its arguments cannot be parsed.
    """
    kind, *args = name.strip().split(":")
    factory = PRESETS.get(kind)
    if factory is None:
        raise TargetSpecError(f"Unknown preset '{kind}', expected one of {sorted(PRESETS)}")
    try:
        numbers = [int(arg) for arg in args]
    except ValueError as err:
        raise TargetSpecError(f"Preset arguments must be integers: '{name}'") from err
    try:
        return factory(*numbers)
    except TypeError as err:
        raise TargetSpecError(f"Wrong number of arguments for preset '{name}'") from err


def _coefficient(entry: Any) -> complex:
    if not isinstance(entry, (list, tuple)) or len(entry) != 2:
        raise TargetSpecError(f"Coefficients must be [re, im] pairs, got {entry!r}")
    real, imag = entry
    if isinstance(real, bool) or isinstance(imag, bool):
        raise TargetSpecError(f"Coefficients must be numbers, got {entry!r}")
    try:
        return complex(float(real), float(imag))
    except (TypeError, ValueError) as err:
        raise TargetSpecError(f"Coefficients must be numbers, got {entry!r}") from err


def parse_target(document: Dict[str, Any]) -> TargetSpec:
    """Build a target from ``{"n_total": int, "coefficients": [[re, im], ...]}``.

    Raises:
        TargetSpecError: on missing fields, wrong types or a coefficient count other than N + 1.
    """
    if not isinstance(document, dict):
        raise TargetSpecError("Target document must be a JSON object")
    try:
        n_total, entries = document["n_total"], document["coefficients"]
    except KeyError as err:
        raise TargetSpecError(f"Target document is missing field {err}") from err
    if isinstance(n_total, bool) or not isinstance(n_total, int):
        raise TargetSpecError(f"n_total must be an integer, got {n_total!r}")
    if not isinstance(entries, list):
        raise TargetSpecError("coefficients must be a list of [re, im] pairs")
    return TargetSpec(n_total=n_total, coefficients=[_coefficient(e) for e in entries])


def load_target_file(path: str) -> TargetSpec:
    """Read and validate a JSON target file."""
    try:
        with open(path, "rb") as file:
            document = json.loads(file.read())
    except (OSError, ValueError) as err:
        raise TargetSpecError(f"Cannot read target file '{path}': {err}") from err
    logger.debug("loaded target file", path=path)
    return parse_target(document)
