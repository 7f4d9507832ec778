"""Sparse multi-mode bosonic Fock states and the elementary linear-optics operations.

A state is a map from occupation tuples ``(n_1, ..., n_M)`` to complex amplitudes with a cap on
the total photon number. Every operation is a pure function returning a new state.

Beam splitter convention::

    B(theta, phi) = exp(theta e^{-i phi} a^dagger b - theta e^{i phi} a b^dagger)
    B a^dagger B^dagger = cos(theta) a^dagger - e^{i phi} sin(theta) b^dagger
    B b^dagger B^dagger = e^{-i phi} sin(theta) a^dagger + cos(theta) b^dagger

where ``a`` is the first mode of the pair and ``b`` the second.
"""

from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import cmath
import math
from collections import defaultdict
from functools import lru_cache

import attr
import numpy as np

from .exceptions import (
    IncompatibleStatesError,
    InvalidModeError,
    PhotonCapOverflowError,
    ZeroNormError,
)

Ket = Tuple[int, ...]

PRUNE_TOLERANCE = 1e-14
NORMALIZED_TOLERANCE = 1e-10


def wrap_phase(phase: float) -> float:
    """Reduce a phase to the half-open interval (-pi, pi]."""
    wrapped = math.remainder(phase, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


def _check_theta(instance, attribute, value):
    if not 0.0 <= value <= math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2], got {value}")


def _check_phi(instance, attribute, value):
    if not -math.pi < value <= math.pi:
        raise ValueError(f"phi must lie in (-pi, pi], got {value}")


@attr.s(frozen=True, auto_attribs=True)
class BSParams:
    """Beam splitter mixing angle ``theta`` and relative phase ``phi``, in radians."""

    theta: float = attr.ib(converter=float, validator=_check_theta)
    phi: float = attr.ib(default=0.0, converter=float, validator=_check_phi)

    @classmethod
    def canonical(cls, theta: float, phi: float) -> "BSParams":
        """Map any real ``(theta, phi)`` onto an equivalent pair in the canonical ranges.

        Uses ``B(-theta, phi) = B(theta, phi + pi)`` and ``B(theta + pi, phi) = -B(theta, phi)``
        on a fixed photon number, so the result differs from the input by a global sign at most.

        Args:
            theta: any real mixing angle.
            phi: any real phase.

        Returns:
            Parameters with theta in [0, pi/2] and phi in (-pi, pi].
        """
        theta = math.remainder(theta, math.pi)
        if theta < 0:
            theta, phi = -theta, phi + math.pi
        theta = min(theta, math.pi / 2)
        return cls(theta=theta, phi=wrap_phase(phi))

    def inverse(self) -> "BSParams":
        """Parameters of the adjoint beam splitter, ``B(theta, phi + pi)``."""
        return BSParams(theta=self.theta, phi=wrap_phase(self.phi + math.pi))


def _to_amplitudes(values: Mapping[Ket, complex]) -> Dict[Ket, complex]:
    return {tuple(int(n) for n in ket): complex(amp) for ket, amp in values.items()}


@attr.s(frozen=True)
class FockState:
    """Immutable sparse state over ``modes`` spatial modes holding at most ``cap`` photons."""

    modes: int = attr.ib()
    cap: int = attr.ib()
    amplitudes: Dict[Ket, complex] = attr.ib(converter=_to_amplitudes, repr=False)

    def __attrs_post_init__(self):
        if self.modes < 1:
            raise InvalidModeError(f"A state needs at least one mode, got {self.modes}")
        if self.cap < 0:
            raise ValueError(f"Photon cap must be non-negative, got {self.cap}")
        for ket, amp in self.amplitudes.items():
            if len(ket) != self.modes or min(ket) < 0:
                raise InvalidModeError(f"Occupation {ket} does not fit {self.modes} modes")
            if sum(ket) > self.cap:
                raise PhotonCapOverflowError(f"Occupation {ket} exceeds the cap of {self.cap}")
            if not cmath.isfinite(amp):
                raise ValueError(f"Amplitude of {ket} is not finite")

    @classmethod
    def from_kets(cls, kets: Mapping[Ket, complex], modes: int, cap: int) -> "FockState":
        """Build a state from an occupation to amplitude map."""
        return cls(modes=modes, cap=cap, amplitudes=kets)

    def norm_sq(self) -> float:
        """Sum of squared amplitude magnitudes."""
        return math.fsum(abs(amp) ** 2 for amp in self.amplitudes.values())

    def is_normalized(self, tolerance: float = NORMALIZED_TOLERANCE) -> bool:
        """Whether the squared norm is within ``tolerance`` of one."""
        return abs(self.norm_sq() - 1.0) <= tolerance

    def normalized(self) -> "FockState":
        """Return the state scaled to unit norm.

        Raises:
            ZeroNormError: if the state is the zero vector.
        """
        norm_sq = self.norm_sq()
        if norm_sq == 0.0:
            raise ZeroNormError("Cannot normalize the zero vector")
        return self * (1 / math.sqrt(norm_sq))

    def photon_numbers(self) -> List[int]:
        """Sorted distinct total photon numbers present in the state."""
        return sorted({sum(ket) for ket in self.amplitudes})

    def amplitude(self, ket: Sequence[int]) -> complex:
        """Amplitude on ``ket``, zero when absent."""
        return self.amplitudes.get(tuple(ket), 0j)

    def to_dense(self, basis: Sequence[Ket]) -> np.ndarray:
        """Amplitude vector over an explicit list of kets."""
        return np.array([self.amplitude(ket) for ket in basis], dtype=complex)

    def _check_compatible(self, other: "FockState") -> None:
        if (self.modes, self.cap) != (other.modes, other.cap):
            raise IncompatibleStatesError(
                f"States differ in layout: {self.modes} modes/cap {self.cap} "
                f"versus {other.modes} modes/cap {other.cap}"
            )

    def __add__(self, other: "FockState") -> "FockState":
        self._check_compatible(other)
        merged: Dict[Ket, complex] = defaultdict(complex, self.amplitudes)
        for ket, amp in other.amplitudes.items():
            merged[ket] += amp
        return _replace(self, merged)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + other * -1

    def __mul__(self, scalar: complex) -> "FockState":
        return _replace(self, {ket: amp * scalar for ket, amp in self.amplitudes.items()})

    __rmul__ = __mul__


def _prune(amplitudes: Mapping[Ket, complex], tolerance: float = PRUNE_TOLERANCE):
    return {ket: amp for ket, amp in amplitudes.items() if abs(amp) >= tolerance}


def _replace(state: FockState, amplitudes: Mapping[Ket, complex], **changes) -> FockState:
    return attr.evolve(state, amplitudes=_prune(amplitudes), **changes)


def _check_mode(state: FockState, mode: int) -> None:
    if not 0 <= mode < state.modes:
        raise InvalidModeError(f"Mode {mode} out of range [0, {state.modes - 1}]")


def make_vacuum(modes: int, cap: int) -> FockState:
    """Vacuum of ``modes`` modes, the single ket of all zeros with amplitude one."""
    return FockState(modes=modes, cap=cap, amplitudes={(0,) * modes: 1.0})


def two_mode_state(coefficients: Sequence[complex]) -> FockState:
    """Build ``sum_n C_n |n, N - n>`` with ``N = len(coefficients) - 1``.

    Args:
        coefficients: amplitudes ``C_0 .. C_N``; index ``n`` counts photons in the first mode.

    Returns:
        Two-mode state capped at ``N`` photons (not renormalized).
    """
    n_total = len(coefficients) - 1
    kets = {(n, n_total - n): c for n, c in enumerate(coefficients)}
    return FockState(modes=2, cap=n_total, amplitudes=_prune(kets))


def add_photon(state: FockState, mode: int) -> FockState:
    """Apply the creation operator of ``mode``.

    Raises:
        PhotonCapOverflowError: if an occupied ket already holds ``cap`` photons.
    """
    _check_mode(state, mode)
    created = {}
    for ket, amp in state.amplitudes.items():
        if sum(ket) >= state.cap:
            raise PhotonCapOverflowError(
                f"Adding a photon to {ket} would exceed the cap of {state.cap}"
            )
        raised = list(ket)
        raised[mode] += 1
        created[tuple(raised)] = amp * math.sqrt(raised[mode])
    return _replace(state, created)


@lru_cache(maxsize=4096)
def _block_unitary(n: int, theta: float, phi: float) -> np.ndarray:
    """Beam splitter restricted to ``n`` photons in the pair, basis ``|k, n - k>``, k = 0..n."""
    generator = np.zeros((n + 1, n + 1), dtype=complex)
    for k in range(n):
        coupling = theta * math.sqrt((k + 1) * (n - k))
        generator[k + 1, k] = coupling * cmath.exp(-1j * phi)
        generator[k, k + 1] = -coupling * cmath.exp(1j * phi)
    # generator is anti-Hermitian, so -i * generator is Hermitian
    eigvals, eigvecs = np.linalg.eigh(-1j * generator)
    return (eigvecs * np.exp(1j * eigvals)) @ eigvecs.conj().T


def apply_beamsplitter(state: FockState, mode_i: int, mode_j: int, params: BSParams) -> FockState:
    """Apply ``B(theta, phi)`` with ``mode_i`` playing ``a`` and ``mode_j`` playing ``b``.

    Raises:
        InvalidModeError: if a mode is out of range or the two modes coincide.
    """
    _check_mode(state, mode_i)
    _check_mode(state, mode_j)
    if mode_i == mode_j:
        raise InvalidModeError(f"Beam splitter needs two distinct modes, got {mode_i} twice")
    if params.theta == 0.0:
        return state

    blocks: Dict[Tuple[Ket, int], np.ndarray] = {}
    for ket, amp in state.amplitudes.items():
        pair = ket[mode_i] + ket[mode_j]
        rest = list(ket)
        rest[mode_i] = rest[mode_j] = 0
        key = (tuple(rest), pair)
        if key not in blocks:
            blocks[key] = np.zeros(pair + 1, dtype=complex)
        blocks[key][ket[mode_i]] = amp

    mixed: Dict[Ket, complex] = {}
    for (rest, pair), vector in blocks.items():
        out = _block_unitary(pair, params.theta, params.phi) @ vector
        for k, amp in enumerate(out):
            ket = list(rest)
            ket[mode_i], ket[mode_j] = k, pair - k
            mixed[tuple(ket)] = complex(amp)
    return _replace(state, mixed)


def apply_attenuation(state: FockState, mode: int, transmittance: complex) -> FockState:
    """Multiply every amplitude by ``T ** n_mode``, the ``T^{n_a}`` factor of a lossy tap."""
    _check_mode(state, mode)
    if abs(transmittance) > 1:
        raise ValueError(f"|T| must not exceed 1, got {abs(transmittance)}")
    scaled = {ket: amp * transmittance ** ket[mode] for ket, amp in state.amplitudes.items()}
    return _replace(state, scaled)


def project_zero(state: FockState, mode: int) -> FockState:
    """Keep only kets with no photon in ``mode``; the result is left unnormalized."""
    _check_mode(state, mode)
    kept = {ket: amp for ket, amp in state.amplitudes.items() if ket[mode] == 0}
    return _replace(state, kept)


def inner(a: FockState, b: FockState) -> complex:
    """Inner product ``<a|b>``."""
    a._check_compatible(b)  # pylint: disable=protected-access
    overlap = 0j
    for ket, amp in a.amplitudes.items():
        overlap += amp.conjugate() * b.amplitude(ket)
    return overlap


def fidelity(a: FockState, b: FockState) -> float:
    """Global-phase and scale invariant overlap ``|<a|b>|^2 / (|a|^2 |b|^2)``.

    Raises:
        ZeroNormError: if either state is the zero vector.
    """
    norms = a.norm_sq() * b.norm_sq()
    if norms == 0.0:
        raise ZeroNormError("Fidelity is undefined for a zero-norm state")
    return min(1.0, abs(inner(a, b)) ** 2 / norms)


def conditional_photon_addition(state: FockState, mode: int, transmittance: float) -> FockState:
    """Heralded photon addition ``Y = R a^dagger T^{n_a}`` with ``R = sqrt(1 - T^2)``."""
    reflectance = math.sqrt(1.0 - transmittance**2)
    return add_photon(apply_attenuation(state, mode, transmittance), mode) * reflectance


def append_mode(state: FockState, occupation: int = 0) -> FockState:
    """Add a new last mode holding ``occupation`` photons to every ket."""
    kets = {ket + (occupation,): amp for ket, amp in state.amplitudes.items()}
    if any(sum(ket) > state.cap for ket in kets):
        raise PhotonCapOverflowError(
            f"Appending a mode with {occupation} photons would exceed the cap of {state.cap}"
        )
    return _replace(state, kets, modes=state.modes + 1)


def drop_mode(state: FockState, mode: int) -> FockState:
    """Remove a mode that holds no photons in any ket."""
    _check_mode(state, mode)
    if state.modes == 1:
        raise InvalidModeError("Cannot drop the only mode of a state")
    if any(ket[mode] for ket in state.amplitudes):
        raise InvalidModeError(f"Mode {mode} is occupied and cannot be dropped")
    kets = {ket[:mode] + ket[mode + 1 :]: amp for ket, amp in state.amplitudes.items()}
    return _replace(state, kets, modes=state.modes - 1)


def physical_photon_addition(state: FockState, mode: int, transmittance: float) -> FockState:
    """Heralded photon addition realized with an ancilla photon and a zero-count detector.

    The ancilla is mixed with ``mode`` on a beam splitter with ``cos(theta) = T`` and ``phi = 0``
    and the ancilla output is projected onto vacuum, which leaves ``R a^dagger T^{n_a}`` acting
    on the signal.
    """
    ancilla = state.modes
    splitter = BSParams(theta=math.acos(transmittance), phi=0.0)
    mixed = apply_beamsplitter(append_mode(state, occupation=1), mode, ancilla, splitter)
    return drop_mode(project_zero(mixed, ancilla), ancilla)


def basis(modes: int, photons: int) -> Iterable[Ket]:
    """All occupation tuples of ``modes`` modes holding exactly ``photons`` photons."""
    if modes == 1:
        yield (photons,)
        return
    for first in range(photons, -1, -1):
        for rest in basis(modes - 1, photons - first):
            yield (first,) + rest
