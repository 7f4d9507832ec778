"""Compile ideal beam splitter lists into physical heralded chain parameters.

The physical chain applies ``B'_1``, then ``Y`` followed by ``B'_2``, and so on up to ``Y``
followed by ``B'_N``, to ``a^dagger |0>`` with ``Y = R a^dagger T^{n_a}``. Moving every
operator onto the vacuum turns the j-th creation operator into ``A_j a^dagger - B_j b^dagger``,
and the conjugated ``b^dagger`` into ``C_j a^dagger + D_j b^dagger``, with

    A_{j+1} = T c A_j - e^{i phi} s C_j
    B_{j+1} = T c B_j + e^{i phi} s D_j
    C_{j+1} = c C_j + T e^{-i phi} s A_j
    D_{j+1} = c D_j - T e^{-i phi} s B_j

for ``c, s, phi`` of stage ``N - j - 1`` and ``A_0 = D_0 = cos theta'_N``,
``B_0 = sin theta'_N e^{i phi'_N}``, ``C_0 = sin theta'_N e^{-i phi'_N}``.
"""

from typing import List, Sequence, Tuple

import cmath
import math

import attr
import numpy as np
from scipy.optimize import least_squares

from .config import SYMMETRIC_TRANSMITTANCE, Tolerances
from .decompose import Decomposition, TargetSpec, decompose
from .exceptions import DegenerateStageError, SolverConvergenceError
from .fock import BSParams, wrap_phase
from .logging import logger

# Sign of the b-term in the D update; the opposite sign disagrees with direct simulation.
D_UPDATE_SIGN = -1

DEGENERATE_RATIO = 1e-15


def _check_transmittance(instance, attribute, value):
    if not 0 < value < 1:
        raise ValueError(f"transmittance must lie in (0, 1), got {value}")


@attr.s(frozen=True, auto_attribs=True)
class SchemeParams:
    """Stage beam splitters ``(theta'_k, phi'_k)``, k = 1..N, and the conditioning ``T``."""

    stages: Tuple[BSParams, ...] = attr.ib(converter=tuple)
    transmittance: float = attr.ib(converter=float, validator=_check_transmittance)

    @stages.validator
    def _check_stages(self, attribute, value):
        if not value:
            raise ValueError("A scheme needs at least one stage")

    @property
    def n_total(self) -> int:
        """Photon number produced by the chain."""
        return len(self.stages)

    @property
    def reflectance(self) -> float:
        """Reflectance ``R = sqrt(1 - T^2)`` of the conditioning beam splitters."""
        return math.sqrt(1.0 - self.transmittance**2)


@attr.s(frozen=True, auto_attribs=True)
class RecursionState:
    """Mixing coefficients after ``index`` recursion steps."""

    a: complex
    b: complex
    c: complex
    d: complex
    index: int = 0

    @classmethod
    def initial(cls, last_stage: BSParams) -> "RecursionState":
        """State of the last stage beam splitter alone."""
        cos, sin = math.cos(last_stage.theta), math.sin(last_stage.theta)
        phase = cmath.exp(1j * last_stage.phi)
        return cls(a=cos, b=sin * phase, c=sin * phase.conjugate(), d=cos, index=0)

    def advance(
        self, theta: float, phi: float, transmittance: float, d_sign: int = D_UPDATE_SIGN
    ) -> "RecursionState":
        """One recursion step through stage ``(theta, phi)`` and its conditioning tap."""
        cos, sin = math.cos(theta), math.sin(theta)
        phase = cmath.exp(1j * phi)
        t = transmittance
        return RecursionState(
            a=t * cos * self.a - phase * sin * self.c,
            b=t * cos * self.b + phase * sin * self.d,
            c=cos * self.c + t * phase.conjugate() * sin * self.a,
            d=cos * self.d + d_sign * t * phase.conjugate() * sin * self.b,
            index=self.index + 1,
        )


@attr.s(frozen=True, auto_attribs=True)
class EffectiveParams:
    """Beam splitters ``(alpha_j, beta_j)``, j = 1..N, the chain emulates on the vacuum."""

    pairs: Tuple[BSParams, ...] = attr.ib(converter=tuple)


def recursion_states(scheme: SchemeParams, d_sign: int = D_UPDATE_SIGN) -> List[RecursionState]:
    """All recursion states ``j = 0 .. N - 1`` of ``scheme``."""
    stages = scheme.stages
    states = [RecursionState.initial(stages[-1])]
    for stage in reversed(stages[:-1]):
        states.append(states[-1].advance(stage.theta, stage.phi, scheme.transmittance, d_sign))
    return states


def _effective_pair(state: RecursionState, stage: int) -> BSParams:
    size = math.hypot(abs(state.a), abs(state.b))
    if size <= DEGENERATE_RATIO * math.hypot(abs(state.c), abs(state.d)):
        raise DegenerateStageError(
            f"Recursion step {state.index} has A = B = 0; no effective angle for stage {stage}",
            stage=stage,
        )
    alpha = math.atan2(abs(state.b), abs(state.a))
    beta = wrap_phase(cmath.phase(state.b * state.a.conjugate()))
    return BSParams(theta=min(alpha, math.pi / 2), phi=beta)


def effective_params(scheme: SchemeParams, d_sign: int = D_UPDATE_SIGN) -> EffectiveParams:
    """Effective beam splitters of the heralded chain.

    ``cos alpha_{N-i} = |A_i| / sqrt(|A_i|^2 + |B_i|^2)`` and
    ``e^{i beta_{N-i}} = B_i |A_i| / (|B_i| A_i)``; ``alpha_N = theta'_N``, ``beta_N = phi'_N``.

    Args:
        scheme: physical chain parameters.
        d_sign: sign of the b-term in the D update.

    Returns:
        Effective parameters ordered ``j = 1 .. N``.

    Raises:
        DegenerateStageError: if a recursion step has ``A_i = B_i = 0``.
    """
    n_total = scheme.n_total
    pairs: List[BSParams] = [BSParams(0.0)] * n_total
    for i, state in enumerate(recursion_states(scheme, d_sign)):
        pairs[n_total - 1 - i] = _effective_pair(state, stage=n_total - i)
    return EffectiveParams(pairs=pairs)


def _alignment(state: RecursionState, ideal: BSParams) -> np.ndarray:
    """Mismatch between ``A a^dagger - B b^dagger`` and the ideal factor, scale free."""
    cos, sin = math.cos(ideal.theta), math.sin(ideal.theta)
    size = max(math.hypot(abs(state.a), abs(state.b)), np.finfo(float).tiny)
    mismatch = (state.a * cmath.exp(1j * ideal.phi) * sin - state.b * cos) / size
    return np.array([mismatch.real, mismatch.imag])


def _starts(
    ideal: BSParams, tolerances: Tolerances, rng: np.random.Generator
) -> List[Tuple[float, float]]:
    starts = [(ideal.theta, ideal.phi)]
    thetas = np.linspace(0, math.pi / 2, tolerances.grid_theta + 2)[1:-1]
    phis = np.linspace(-math.pi, math.pi, tolerances.grid_phi, endpoint=False)
    starts.extend((float(t), float(p)) for t in thetas for p in phis)
    randoms = rng.uniform([0.0, -math.pi], [math.pi / 2, math.pi], (tolerances.random_starts, 2))
    starts.extend((float(t), float(p)) for t, p in randoms)
    return starts


def _solve_stage(
    state: RecursionState,
    ideal: BSParams,
    transmittance: float,
    stage: int,
    tolerances: Tolerances,
    rng: np.random.Generator,
) -> BSParams:
    phase_matters = _phase_matters(ideal.theta, tolerances)

    def residual(x: np.ndarray) -> np.ndarray:
        return _alignment(state.advance(x[0], x[1], transmittance), ideal)

    def offsets(x: np.ndarray) -> np.ndarray:
        step = state.advance(x[0], x[1], transmittance)
        alpha = math.atan2(abs(step.b), abs(step.a))
        beta = cmath.phase(step.b * step.a.conjugate())
        phase = wrap_phase(beta - ideal.phi) if phase_matters else 0.0
        return np.array([alpha - ideal.theta, phase])

    def mismatch(params: BSParams) -> float:
        try:
            pair = _effective_pair(state.advance(params.theta, params.phi, transmittance), stage)
        except DegenerateStageError:
            return math.inf
        return params_mismatch([pair], [ideal], tolerances)

    best, closest = math.inf, math.inf
    for attempt, x0 in enumerate(_starts(ideal, tolerances, rng)):
        result = least_squares(residual, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        worst = float(np.max(np.abs(result.fun)))
        best = min(best, worst)
        if worst > tolerances.solver_residual:
            continue

        params = BSParams.canonical(float(result.x[0]), float(result.x[1]))
        error = mismatch(params)
        if error > tolerances.angle_match:
            # the alignment residual scales phase errors by sin(theta) cos(theta)
            polished = least_squares(
                offsets, result.x, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
            )
            candidate = BSParams.canonical(float(polished.x[0]), float(polished.x[1]))
            candidate_error = mismatch(candidate)
            if candidate_error < error:
                params, error = candidate, candidate_error
        closest = min(closest, error)
        if error <= tolerances.angle_match:
            if attempt:
                logger.warning("stage solved after multi-start", stage=stage, attempt=attempt)
            return params

    if math.isfinite(closest):
        raise SolverConvergenceError(
            f"Stage {stage} did not converge; effective angles off by {closest:.3e} rad",
            stage=stage,
            residual=closest,
        )
    raise SolverConvergenceError(
        f"Stage {stage} did not converge; best residual {best:.3e}", stage=stage, residual=best
    )


def _phase_matters(theta: float, tolerances: Tolerances) -> bool:
    return tolerances.phase_skip <= theta <= math.pi / 2 - tolerances.phase_skip


def params_mismatch(
    actual: Sequence[BSParams], expected: Sequence[BSParams], tolerances: Tolerances = Tolerances()
) -> float:
    """Largest per-component angle difference, phases modulo 2 pi where they are meaningful."""
    worst = 0.0
    for got, want in zip(actual, expected):
        worst = max(worst, abs(got.theta - want.theta))
        if _phase_matters(want.theta, tolerances):
            worst = max(worst, abs(wrap_phase(got.phi - want.phi)))
    return worst


def solve_scheme(
    ideal: Sequence[BSParams],
    transmittance: float = SYMMETRIC_TRANSMITTANCE,
    tolerances: Tolerances = Tolerances(),
    seed: int = 0,
) -> SchemeParams:
    """Find chain parameters whose effective beam splitters equal ``ideal``.

    Stage N is set directly. Each earlier stage adds two real unknowns that enter the next
    recursion step only, so stages are solved one at a time, last to first, starting from the
    ideal angles and falling back to a grid and seeded random starts.

    Args:
        ideal: ideal beam splitters ``(theta_j, phi_j)``, j = 1..N.
        transmittance: conditioning transmittance ``T`` in (0, 1).
        tolerances: solver thresholds.
        seed: seed of the random multi-start.

    Returns:
        Scheme whose ``effective_params`` match ``ideal``.

    Raises:
        SolverConvergenceError: if no start matches a stage to within ``tolerances.angle_match``
            radians.
        ValueError: if ``ideal`` is empty or ``transmittance`` is outside (0, 1).
    """
    if not ideal:
        raise ValueError("At least one ideal beam splitter is required")
    if not 0 < transmittance < 1:
        raise ValueError(f"transmittance must lie in (0, 1), got {transmittance}")

    rng = np.random.default_rng(seed)
    n_total = len(ideal)
    stages: List[BSParams] = [BSParams(0.0)] * n_total
    stages[-1] = ideal[-1]
    state = RecursionState.initial(stages[-1])
    for k in range(n_total - 1, 0, -1):
        stages[k - 1] = _solve_stage(state, ideal[k - 1], transmittance, k, tolerances, rng)
        state = state.advance(stages[k - 1].theta, stages[k - 1].phi, transmittance)
        logger.debug("solve_scheme", stage=k, theta=stages[k - 1].theta, phi=stages[k - 1].phi)

    scheme = SchemeParams(stages=stages, transmittance=transmittance)
    errors = [
        params_mismatch([got], [want], tolerances)
        for got, want in zip(effective_params(scheme).pairs, ideal)
    ]
    mismatch = max(errors)
    logger.info("solve_scheme", n_total=n_total, transmittance=transmittance, mismatch=mismatch)
    if mismatch > tolerances.angle_match:
        stage = errors.index(mismatch) + 1
        raise SolverConvergenceError(
            f"Stage {stage} misses its ideal beam splitter by {mismatch:.3e} rad",
            stage=stage,
            residual=mismatch,
        )
    return scheme


def compile_target(
    target: TargetSpec,
    transmittance: float = SYMMETRIC_TRANSMITTANCE,
    tolerances: Tolerances = Tolerances(),
    seed: int = 0,
) -> Tuple[Decomposition, SchemeParams]:
    """Decompose ``target`` and solve the chain that produces it."""
    decomposition = decompose(target, tolerances)
    scheme = solve_scheme(decomposition.ideal_params, transmittance, tolerances, seed)
    return decomposition, scheme
