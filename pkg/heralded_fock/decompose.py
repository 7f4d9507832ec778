"""Factorization of a two-mode N-photon target into single-photon creation factors.

A target ``sum_n C_n |n, N - n>`` equals, up to a constant, the product
``prod_i (a^dagger - beta_i b^dagger) |0>`` where the ``beta_i`` are the roots of the
characteristic polynomial ``p(beta) = sum_n C_n beta^n / sqrt(n! (N - n)!)``. A vanishing leading
coefficient stands for a root at infinity, i.e. a bare ``b^dagger`` factor.
"""

from typing import List, Sequence, Tuple

import cmath
import math

import attr
import numpy as np
from numpy.polynomial import polynomial as P

from .config import Tolerances
from .exceptions import TargetSpecError, ZeroPolynomialError
from .fock import BSParams, FockState, add_photon, make_vacuum, two_mode_state, wrap_phase
from .logging import logger

NORM_WARNING_TOLERANCE = 1e-6
ZERO_COEFFICIENT_TOLERANCE = 1e-14


def _normalize_coefficients(values: Sequence[complex]) -> Tuple[complex, ...]:
    coefficients = np.asarray(values, dtype=complex)
    if coefficients.ndim != 1 or coefficients.size == 0:
        raise TargetSpecError("Coefficients must be a non-empty flat list")
    if not np.all(np.isfinite(coefficients)):
        raise TargetSpecError("Coefficients must be finite")

    norm_sq = float(np.vdot(coefficients, coefficients).real)
    if norm_sq == 0.0:
        raise TargetSpecError("At least one coefficient must be nonzero")
    if abs(norm_sq - 1.0) > NORM_WARNING_TOLERANCE:
        logger.warning("normalizing target coefficients", norm_sq=norm_sq)
    return tuple(complex(c) for c in coefficients / math.sqrt(norm_sq))


@attr.s(frozen=True, auto_attribs=True)
class TargetSpec:
    """Desired state ``sum_n C_n |n>_1 |N - n>_2``, normalized on construction."""

    n_total: int = attr.ib()
    coefficients: Tuple[complex, ...] = attr.ib(converter=_normalize_coefficients)

    @n_total.validator
    def _check_n_total(self, attribute, value):
        if value < 1:
            raise TargetSpecError(f"n_total must be at least 1, got {value}")
        if len(self.coefficients) != value + 1:
            raise TargetSpecError(
                f"Expected {value + 1} coefficients for n_total={value}, "
                f"got {len(self.coefficients)}"
            )

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[complex]) -> "TargetSpec":
        """Build a target whose photon number follows from the coefficient count."""
        return cls(n_total=len(coefficients) - 1, coefficients=coefficients)

    def to_state(self) -> FockState:
        """Two-mode Fock state of the target."""
        return two_mode_state(self.coefficients)


@attr.s(frozen=True, auto_attribs=True)
class Decomposition:
    """Roots of the characteristic polynomial and the ideal beam splitters they map to.

    Args:
        roots: finite roots in the order of ``ideal_params``.
        infinite_roots: number of roots at infinity, each a bare ``b^dagger`` factor.
        ideal_params: one beam splitter per factor, finite roots first.
        scale: ``|p_d| * prod sqrt(1 + |beta_i|^2)``, the constant in front of the beam splitter
            product. Diagnostic only.
    """

    roots: Tuple[complex, ...]
    infinite_roots: int
    ideal_params: Tuple[BSParams, ...]
    scale: float

    @property
    def n_total(self) -> int:
        """Photon number of the decomposed target."""
        return len(self.roots) + self.infinite_roots


def char_poly(target: TargetSpec) -> np.ndarray:
    """Characteristic polynomial coefficients ``p_n = C_n / sqrt(n! (N - n)!)``, lowest first."""
    n_total = target.n_total
    return np.array(
        [
            c / math.sqrt(math.factorial(n) * math.factorial(n_total - n))
            for n, c in enumerate(target.coefficients)
        ],
        dtype=complex,
    )


def _cluster(roots: np.ndarray, tolerance: float) -> List[List[int]]:
    clusters: List[List[int]] = []
    for i, root in enumerate(roots):
        for cluster in clusters:
            anchor = roots[cluster[0]]
            if abs(root - anchor) <= tolerance * max(1.0, abs(anchor)):
                cluster.append(i)
                break
        else:
            clusters.append([i])
    return clusters


def _polish(poly: np.ndarray, root: complex, max_steps: int) -> complex:
    """Newton iterations on ``root``, kept only while they reduce the residual."""
    derivative = P.polyder(poly)
    residual = abs(P.polyval(root, poly))
    for _ in range(max_steps):
        slope = P.polyval(root, derivative)
        if slope == 0 or residual == 0:
            break
        candidate = root - P.polyval(root, poly) / slope
        candidate_residual = abs(P.polyval(candidate, poly))
        if candidate_residual >= residual:
            break
        root, residual = candidate, candidate_residual
    return complex(root)


def find_roots(
    poly: Sequence[complex], tolerances: Tolerances = Tolerances()
) -> Tuple[np.ndarray, int]:
    """Finite roots and the number of roots at infinity of a characteristic polynomial.

    Trailing (highest order) zero coefficients each count as one root at infinity. Leading (lowest
    order) zeros are exact roots at the origin. The remaining roots are eigenvalues of the
    companion matrix, Newton polished; clusters closer than ``tolerances.root_cluster`` are taken
    as one repeated root at their mean. A relative residual above ``tolerances.root_residual`` is
    logged as a warning; the roots are still returned.

    Args:
        poly: coefficients ``p_0 .. p_N``, lowest order first.
        tolerances: clustering, residual and polishing settings.

    Returns:
        The finite roots and the count of infinite roots.

    Raises:
        ZeroPolynomialError: if all coefficients vanish.
    """
    coefficients = np.asarray(poly, dtype=complex)
    largest = float(np.max(np.abs(coefficients))) if coefficients.size else 0.0
    if largest == 0.0:
        raise ZeroPolynomialError("Characteristic polynomial has no nonzero coefficient")

    significant = np.flatnonzero(np.abs(coefficients) > ZERO_COEFFICIENT_TOLERANCE * largest)
    lowest, degree = int(significant[0]), int(significant[-1])
    infinite = len(coefficients) - 1 - degree
    reduced = coefficients[lowest : degree + 1]

    roots = np.zeros(lowest, dtype=complex)
    if len(reduced) > 1:
        eigvals = np.linalg.eigvals(P.polycompanion(reduced))
        for cluster in _cluster(eigvals, tolerances.root_cluster):
            if len(cluster) > 1:
                eigvals[cluster] = np.mean(eigvals[cluster])
            else:
                eigvals[cluster[0]] = _polish(
                    reduced, eigvals[cluster[0]], tolerances.max_newton_steps
                )
        roots = np.concatenate([roots, eigvals])

    worst = max((abs(P.polyval(r, coefficients)) for r in roots), default=0.0) / largest
    if worst > tolerances.root_residual:
        logger.warning("root residual above tolerance", residual=worst)
    logger.debug("find_roots", degree=degree, infinite=infinite, residual=worst)
    return roots, infinite


def _root_order(root: complex) -> Tuple[float, float]:
    phase = round(wrap_phase(cmath.phase(root)), 12)
    # a negative real root may carry a tiny negative imaginary part
    if phase == round(-math.pi, 12):
        phase = round(math.pi, 12)
    return round(abs(root), 12), phase


def sort_roots(roots: Sequence[complex]) -> List[complex]:
    """Deterministic order: by modulus, then by phase in (-pi, pi]."""
    return sorted((complex(r) for r in roots), key=_root_order)


def root_to_bs_params(root: complex) -> BSParams:
    """Beam splitter with ``a^dagger - beta b^dagger = sqrt(1+|beta|^2) B a^dagger B^dagger``."""
    if root == 0:
        return BSParams(theta=0.0, phi=0.0)
    return BSParams(theta=math.atan(abs(root)), phi=wrap_phase(cmath.phase(root)))


def roots_to_bs_params(roots: Sequence[complex], infinite_count: int) -> List[BSParams]:
    """Ideal beam splitter list: finite roots in deterministic order, then roots at infinity."""
    params = [root_to_bs_params(root) for root in sort_roots(roots)]
    return params + [BSParams(theta=math.pi / 2, phi=0.0)] * infinite_count


def decompose(target: TargetSpec, tolerances: Tolerances = Tolerances()) -> Decomposition:
    """Run char_poly, find_roots and roots_to_bs_params on ``target``."""
    poly = char_poly(target)
    roots, infinite = find_roots(poly, tolerances)
    ordered = sort_roots(roots)
    leading = abs(poly[len(poly) - 1 - infinite])
    scale = leading * math.prod(math.sqrt(1 + abs(r) ** 2) for r in ordered)
    return Decomposition(
        roots=tuple(ordered),
        infinite_roots=infinite,
        ideal_params=tuple(roots_to_bs_params(ordered, infinite)),
        scale=scale,
    )


def expand_roots(roots: Sequence[complex], infinite_count: int, leading: complex = 1.0):
    """Expand ``leading * prod (a^dagger - beta_i b^dagger) (b^dagger)^k`` by convolution.

    Returns:
        Coefficient of ``a^dagger^n b^dagger^(N-n)`` at index ``n``, which is the characteristic
        polynomial ``p_n`` of the product state.
    """
    product = np.array([leading], dtype=complex)
    for root in roots:
        product = np.convolve(product, [-root, 1.0])
    for _ in range(infinite_count):
        product = np.convolve(product, [1.0, 0.0])
    return product


def reconstruct_target(decomposition: Decomposition, n_total: int) -> FockState:
    """Apply ``prod (a^dagger - beta_i b^dagger)`` to the two-mode vacuum and normalize."""
    state = make_vacuum(2, n_total)
    for root in decomposition.roots:
        state = add_photon(state, 0) - add_photon(state, 1) * root
    for _ in range(decomposition.infinite_roots):
        state = add_photon(state, 1)
    return state.normalized()
