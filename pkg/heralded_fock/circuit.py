"""Simulation of the heralded chain and of the simplified four-photon scheme."""

from typing import Dict, List, Optional, Sequence, Tuple

import math

import attr

from .compiler import EffectiveParams, SchemeParams
from .config import SYMMETRIC_TRANSMITTANCE
from .decompose import TargetSpec
from .exceptions import ZeroProbabilityBranchError
from .fock import (
    BSParams,
    FockState,
    add_photon,
    apply_beamsplitter,
    conditional_photon_addition,
    fidelity,
    make_vacuum,
    project_zero,
)
from .logging import logger

SIGNAL, IDLER = 0, 1

FIG2_MODES = 4
CLAIMED_FIG2_PROBABILITY = 1 / 16
COMPETING_SCHEME_PROBABILITY = 3 / 64


@attr.s(auto_attribs=True)
class ConditioningTrace:
    """Squared norms just before and after every heralding detector, in detection order."""

    before: List[float] = attr.ib(factory=list)
    after: List[float] = attr.ib(factory=list)

    def record(self, state: FockState, heralded: FockState, stage: int) -> None:
        """Store the norms around one zero-count detection.

        Raises:
            ZeroProbabilityBranchError: if the detection leaves the zero vector.
        """
        after = heralded.norm_sq()
        if after == 0.0:
            raise ZeroProbabilityBranchError(
                f"Zero-count outcome at detector {stage} has zero probability", stage=stage
            )
        self.before.append(state.norm_sq())
        self.after.append(after)

    @property
    def stage_probabilities(self) -> List[float]:
        """Conditional probability of each zero-count outcome given the earlier ones."""
        return [after / before for before, after in zip(self.before, self.after)]


def success_probability(trace: ConditioningTrace) -> float:
    """Chain rule product of the conditional zero-count probabilities."""
    return math.prod(trace.stage_probabilities)


@attr.s(frozen=True, auto_attribs=True)
class CircuitOutcome:
    """Result of one heralded run.

    Args:
        final_state: normalized output state.
        raw_norm_sq: squared norm of the unnormalized heralded output.
        success_probability: probability that every detector registers zero photons.
        stage_probabilities: per-detector conditional probabilities.
        fidelity_vs_target: overlap with the requested target, when one was given.
        snapshots: named intermediate states, normalized.
    """

    final_state: FockState
    raw_norm_sq: float
    success_probability: float
    stage_probabilities: Tuple[float, ...] = attr.ib(converter=tuple)
    fidelity_vs_target: Optional[float] = None
    snapshots: Dict[str, FockState] = attr.ib(factory=dict, repr=False)

    @property
    def telescoping_gap(self) -> float:
        """Difference between the probability chain and the raw squared norm."""
        return abs(self.success_probability - self.raw_norm_sq)


def _outcome(
    state: FockState,
    trace: ConditioningTrace,
    reference: Optional[FockState],
    snapshots: Optional[Dict[str, FockState]] = None,
) -> CircuitOutcome:
    final = state.normalized()
    outcome = CircuitOutcome(
        final_state=final,
        raw_norm_sq=state.norm_sq(),
        success_probability=success_probability(trace),
        stage_probabilities=trace.stage_probabilities,
        fidelity_vs_target=None if reference is None else fidelity(final, reference),
        snapshots=snapshots or {},
    )
    logger.info(
        "circuit outcome",
        success_probability=outcome.success_probability,
        fidelity=outcome.fidelity_vs_target,
        telescoping_gap=outcome.telescoping_gap,
    )
    return outcome


def run_chain(scheme: SchemeParams, target: Optional[TargetSpec] = None) -> CircuitOutcome:
    """Simulate the heralded chain ``B'_N Y ... Y B'_2 Y B'_1 a^dagger |0>``.

    Args:
        scheme: stage beam splitters and conditioning transmittance.
        target: optional target to report the fidelity against.

    Returns:
        Outcome with one conditional probability per detector (N - 1 of them).

    Raises:
        ZeroProbabilityBranchError: if a heralding step annihilates the state.
    """
    n_total = scheme.n_total
    state = add_photon(make_vacuum(2, n_total), SIGNAL)
    trace = ConditioningTrace()
    for k, stage in enumerate(scheme.stages, start=1):
        state = apply_beamsplitter(state, SIGNAL, IDLER, stage)
        if k < n_total:
            heralded = conditional_photon_addition(state, SIGNAL, scheme.transmittance)
            trace.record(state, heralded, stage=k)
            state = heralded
    return _outcome(state, trace, None if target is None else target.to_state())


def run_effective_chain(effective: EffectiveParams) -> FockState:
    """Normalized product of ``B(alpha_j) a^dagger B^dagger(alpha_j)`` on vacuum, j = 1 first."""
    state = make_vacuum(2, len(effective.pairs))
    for pair in effective.pairs:
        state = apply_beamsplitter(state, SIGNAL, IDLER, pair.inverse())
        state = add_photon(state, SIGNAL)
        state = apply_beamsplitter(state, SIGNAL, IDLER, pair)
    return state.normalized()


@attr.s(frozen=True, auto_attribs=True)
class DetectionPolicy:
    """Ancilla modes whose detectors must register zero photons for a run to be accepted."""

    zero_modes: Tuple[int, ...] = attr.ib(default=(2, 3), converter=tuple)


def fig2_default_angles(
    transmittance: float = SYMMETRIC_TRANSMITTANCE,
) -> Tuple[BSParams, BSParams, BSParams, BSParams]:
    """Beam splitters of the four-photon scheme.

    The first splitter bunches the photon pair into ``(|2,0> - |0,2>)/sqrt 2`` with ``phi = 0``.
    The two conditioning splitters have ``cos(theta) = T`` and ``phi = 0``. The last one needs
    ``phi = pi/2`` to turn ``(|1,3> - |3,1>)/sqrt 2`` into a NOON state; with ``phi = 0`` that input
    is an eigenstate.
    """
    conditioning = BSParams(theta=math.acos(transmittance), phi=0.0)
    return (
        BSParams(theta=math.pi / 4, phi=0.0),
        conditioning,
        conditioning,
        BSParams(theta=math.pi / 4, phi=math.pi / 2),
    )


def _four_mode(kets: Dict[Tuple[int, ...], complex]) -> FockState:
    return FockState.from_kets(kets, modes=FIG2_MODES, cap=4)


def fig2_reference_states() -> Dict[str, FockState]:
    """States the four-photon scheme should pass through, up to global phase."""
    half = 1 / math.sqrt(2)
    return {
        "bs1": _four_mode({(2, 0, 1, 1): half, (0, 2, 1, 1): -half}),
        "heralded": _four_mode({(1, 3, 0, 0): half, (3, 1, 0, 0): -half}),
        "final": _four_mode({(0, 4, 0, 0): half, (4, 0, 0, 0): -half}),
    }


def fig2_oracle_probability(transmittance: float = SYMMETRIC_TRANSMITTANCE) -> float:
    """Heralding probability of the four-photon scheme from ladder algebra alone.

    Each conditioning splitter acts on its signal mode as ``R a^dagger T^{n_a}``. On
    ``(|2,0> - |0,2>)/sqrt 2`` the pair gives ``R^2 T^2 sqrt(3) (|3,1> - |1,3>)/sqrt 2``, so the
    probability is ``3 R^4 T^4``.
    """
    reflectance_sq = 1.0 - transmittance**2
    return 3 * reflectance_sq**2 * transmittance**4


def run_fig2(
    bs_angles: Optional[Sequence[BSParams]] = None,
    detect_policy: DetectionPolicy = DetectionPolicy(),
) -> CircuitOutcome:
    """Simulate the simplified four-photon NOON scheme.

    ``|1,1,1,1>`` enters; BS1 mixes modes 0 and 1, BS2 mixes 0 with ancilla 2, BS3 mixes 1 with
    ancilla 3, the ancilla detectors are required to see no photon, and BS4 mixes 0 and 1.

    Args:
        bs_angles: the four beam splitters, defaults to ``fig2_default_angles()``.
        detect_policy: ancilla modes conditioned on a zero count.

    Returns:
        Outcome with snapshots ``bs1``, ``heralded`` and ``final``.
    """
    bs1, bs2, bs3, bs4 = fig2_default_angles() if bs_angles is None else bs_angles
    state = _four_mode({(1, 1, 1, 1): 1.0})
    snapshots = {}

    state = apply_beamsplitter(state, 0, 1, bs1)
    snapshots["bs1"] = state
    state = apply_beamsplitter(state, 0, 2, bs2)
    state = apply_beamsplitter(state, 1, 3, bs3)

    trace = ConditioningTrace()
    for detector, mode in enumerate(detect_policy.zero_modes, start=1):
        heralded = project_zero(state, mode)
        trace.record(state, heralded, stage=detector)
        state = heralded
    snapshots["heralded"] = state.normalized()

    state = apply_beamsplitter(state, 0, 1, bs4)
    snapshots["final"] = state.normalized()
    return _outcome(state, trace, fig2_reference_states()["final"], snapshots)
