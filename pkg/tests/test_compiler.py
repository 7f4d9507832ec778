"""Chain compiler tests."""

import cmath
import math
from types import SimpleNamespace

import numpy as np
import pytest

from heralded_fock import compiler
from heralded_fock.circuit import run_chain, run_effective_chain
from heralded_fock.compiler import (
    D_UPDATE_SIGN,
    RecursionState,
    SchemeParams,
    compile_target,
    effective_params,
    params_mismatch,
    recursion_states,
    solve_scheme,
)
from heralded_fock.config import SYMMETRIC_TRANSMITTANCE, Tolerances
from heralded_fock.decompose import TargetSpec, decompose, expand_roots
from heralded_fock.exceptions import DegenerateStageError, SolverConvergenceError
from heralded_fock.fock import BSParams, fidelity
from heralded_fock.presets import noon

ANGLE_MATCH = Tolerances().angle_match


def _random_scheme(rng, n_total):
    stages = [
        BSParams(theta=rng.uniform(0.05, math.pi / 2 - 0.05), phi=rng.uniform(-math.pi, math.pi))
        for _ in range(n_total)
    ]
    return SchemeParams(stages=stages, transmittance=rng.uniform(0.2, 0.95))


def _chain_agreement(scheme, d_sign=D_UPDATE_SIGN):
    direct = run_chain(scheme).final_state
    emulated = run_effective_chain(effective_params(scheme, d_sign))
    return fidelity(direct, emulated)


def test_scheme_validation():
    """A scheme needs stages and a transmittance strictly inside (0, 1)."""
    with pytest.raises(ValueError):
        SchemeParams(stages=[], transmittance=0.5)
    with pytest.raises(ValueError):
        SchemeParams(stages=[BSParams(0.1)], transmittance=1.0)


def test_scheme_reflectance():
    """R = sqrt(1 - T^2)."""
    scheme = SchemeParams(stages=[BSParams(0.1)], transmittance=0.6)

    assert scheme.reflectance == pytest.approx(0.8)
    assert scheme.n_total == 1


# Recursion


def test_initial_state_of_last_stage():
    """A_0 = D_0 = cos theta', B_0 = sin theta' e^{i phi'}, C_0 = conj phase."""
    state = RecursionState.initial(BSParams(0.3, 0.9))

    assert state.a == pytest.approx(math.cos(0.3))
    assert state.d == pytest.approx(math.cos(0.3))
    assert state.b == pytest.approx(math.sin(0.3) * np.exp(0.9j))
    assert state.c == pytest.approx(math.sin(0.3) * np.exp(-0.9j))


@pytest.mark.parametrize("transmittance", [0.2, SYMMETRIC_TRANSMITTANCE, 0.9])
def test_identity_chain_recursion(transmittance):
    """All theta' = 0 keeps B = 0 and gives A_j = T^j."""
    scheme = SchemeParams(stages=[BSParams(0.0)] * 4, transmittance=transmittance)

    for j, state in enumerate(recursion_states(scheme)):
        assert state.index == j
        assert state.a == pytest.approx(transmittance**j)
        assert state.b == 0
    assert all(p.theta == 0.0 for p in effective_params(scheme).pairs)


def test_single_stage_effective_params():
    """With one stage the effective splitter is the stage itself."""
    scheme = SchemeParams(stages=[BSParams(0.7, -1.2)], transmittance=0.5)
    (pair,) = effective_params(scheme).pairs

    assert pair.theta == pytest.approx(0.7)
    assert pair.phi == pytest.approx(-1.2)


def test_degenerate_recursion_step():
    """A step without a or b component has no effective angle."""
    state = RecursionState(a=0j, b=0j, c=1.0, d=1.0, index=2)

    with pytest.raises(DegenerateStageError) as err:
        compiler._effective_pair(state, stage=3)  # pylint: disable=protected-access
    assert err.value.stage == 3


def test_recursion_matches_direct_simulation(rng):
    """The effective splitters reproduce the heralded chain for 50 random parameter sets."""
    for _ in range(50):
        scheme = _random_scheme(rng, int(rng.integers(1, 6)))

        assert _chain_agreement(scheme) >= 1 - 1e-8


def test_d_update_sign_regression(rng):
    """The minus sign in the D update is the one that agrees with simulation."""
    assert D_UPDATE_SIGN == -1

    worst = min(_chain_agreement(_random_scheme(rng, 4), d_sign=+1) for _ in range(10))
    assert worst < 1 - 1e-6


def test_d_sign_irrelevant_below_three_photons(rng):
    """D first feeds an effective angle at the third recursion step."""
    for _ in range(5):
        scheme = _random_scheme(rng, 2)

        assert _chain_agreement(scheme, d_sign=+1) >= 1 - 1e-8


# Solver


def test_solve_single_stage():
    """N = 1 is solved directly."""
    ideal = [BSParams(0.4, 0.3)]
    scheme = solve_scheme(ideal, 0.5)

    assert scheme.stages == tuple(ideal)


def test_solve_identity_chain():
    """An all-zero ideal list solves to all-zero stages."""
    scheme = solve_scheme([BSParams(0.0)] * 4, 0.6)

    assert all(abs(p.theta) <= 1e-9 for p in scheme.stages)


@pytest.mark.parametrize("transmittance", [0.0, 1.0, -0.3])
def test_solve_rejects_transmittance(transmittance):
    """T must lie strictly between 0 and 1."""
    with pytest.raises(ValueError):
        solve_scheme([BSParams(0.1)] * 2, transmittance)


def test_solve_rejects_empty_list():
    """At least one ideal splitter is required."""
    with pytest.raises(ValueError):
        solve_scheme([])


@pytest.mark.parametrize("n_total", [2, 3, 4, 5])
def test_solved_scheme_reproduces_ideal(make_target, n_total):
    """effective_params(solve_scheme(ideal)) == ideal within 1e-9 rad."""
    for _ in range(5):
        decomposition, scheme = compile_target(make_target(n_total))
        pairs = effective_params(scheme).pairs

        assert params_mismatch(pairs, decomposition.ideal_params) <= 1e-9
        assert all(0 <= p.theta <= math.pi / 2 and -math.pi < p.phi <= math.pi for p in pairs)


@pytest.mark.parametrize("transmittance", [0.3, SYMMETRIC_TRANSMITTANCE, 0.9])
def test_compiled_chain_reaches_target(make_target, transmittance):
    """The heralded output reaches the target for any conditioning transmittance."""
    for n_total in range(1, 6):
        target = make_target(n_total)
        _, scheme = compile_target(target, transmittance)

        assert run_chain(scheme, target).fidelity_vs_target >= 1 - 1e-8


def test_compile_noon_target():
    """The four-photon NOON target compiles at symmetric conditioning."""
    target = noon(4)
    _, scheme = compile_target(target)
    outcome = run_chain(scheme, target)

    assert outcome.fidelity_vs_target >= 1 - 1e-8
    assert outcome.success_probability > 0


def test_compile_is_deterministic(make_target):
    """The same target and seed give bit-identical schemes."""
    target = make_target(4)

    assert compile_target(target, seed=7)[1] == compile_target(target, seed=7)[1]


def test_solver_reports_non_convergence(monkeypatch):
    """A stage no start can match raises with the stage index and residual."""

    def stalled(fun, x0, **kwargs):
        return SimpleNamespace(x=np.asarray(x0, dtype=float), fun=np.array([0.5, 0.0]))

    monkeypatch.setattr(compiler, "least_squares", stalled)
    tolerances = Tolerances(grid_theta=1, grid_phi=1, random_starts=1)

    with pytest.raises(SolverConvergenceError, match="did not converge") as err:
        solve_scheme([BSParams(0.3), BSParams(0.5)], 0.6, tolerances)
    assert err.value.stage == 1
    assert err.value.residual == 0.5


def test_params_mismatch_skips_meaningless_phases():
    """Phases of splitters at theta = 0 or pi/2 are not compared."""
    actual = [BSParams(0.0, 1.0), BSParams(math.pi / 2, -2.0), BSParams(0.3, math.pi)]
    expected = [BSParams(0.0, 0.0), BSParams(math.pi / 2, 0.0), BSParams(0.3, -math.pi + 1e-12)]

    assert params_mismatch(actual, expected) < 1e-11


def _target_from_roots(roots):
    poly = expand_roots(roots, 0)
    n_total = len(roots)
    coefficients = [
        p * math.sqrt(math.factorial(n) * math.factorial(n_total - n)) for n, p in enumerate(poly)
    ]
    return TargetSpec(n_total=n_total, coefficients=coefficients)


@pytest.mark.parametrize("tiny", [1e-6, 1e-7, 1e-8])
def test_small_root_is_matched_or_reported(tiny):
    """A near-zero root with a meaningful phase is either matched to 1e-9 rad or raised."""
    target = _target_from_roots(
        [tiny * cmath.exp(2j), 0.7 * cmath.exp(-0.4j), 1.3 * cmath.exp(1j)]
    )
    decomposition = decompose(target)
    assert min(p.theta for p in decomposition.ideal_params) > Tolerances().phase_skip

    try:
        scheme = solve_scheme(decomposition.ideal_params)
    except SolverConvergenceError as err:
        assert err.residual > 0
        assert 1 <= err.stage <= 3
    else:
        assert params_mismatch(effective_params(scheme).pairs, decomposition.ideal_params) <= (
            ANGLE_MATCH
        )


def test_solver_rejects_stage_with_wrong_angles(monkeypatch):
    """A vanishing residual does not hide effective angles away from the ideal ones."""

    def misaligned(fun, x0, **kwargs):
        x = np.asarray(x0, dtype=float) + [0.0, 1e-3]
        return SimpleNamespace(x=x, fun=np.zeros(2))

    monkeypatch.setattr(compiler, "least_squares", misaligned)
    tolerances = Tolerances(grid_theta=1, grid_phi=1, random_starts=1)

    with pytest.raises(SolverConvergenceError, match="effective angles off") as err:
        solve_scheme([BSParams(0.3), BSParams(0.5)], 0.6, tolerances)
    assert err.value.stage == 1
    assert err.value.residual > ANGLE_MATCH


def test_multi_start_fallback_is_logged(monkeypatch, caplog):
    """A stage solved from a later start logs a warning with the attempt number."""
    solve = compiler.least_squares
    calls = []

    def first_start_stalls(fun, x0, **kwargs):
        calls.append(x0)
        if len(calls) == 1:
            return SimpleNamespace(x=np.asarray(x0, dtype=float), fun=np.array([0.5, 0.0]))
        return solve(fun, x0, **kwargs)

    monkeypatch.setattr(compiler, "least_squares", first_start_stalls)
    ideal = decompose(noon(3)).ideal_params

    scheme = solve_scheme(ideal)

    assert params_mismatch(effective_params(scheme).pairs, ideal) <= ANGLE_MATCH
    assert "stage solved after multi-start" in caplog.text


def test_solving_effective_params_is_self_consistent(rng):
    """Solving for a scheme's own effective splitters gives the same effective splitters."""
    for _ in range(10):
        scheme = _random_scheme(rng, int(rng.integers(2, 6)))
        pairs = effective_params(scheme).pairs

        solved = solve_scheme(pairs, scheme.transmittance)

        assert params_mismatch(effective_params(solved).pairs, pairs) <= 1e-8


def test_root_order_does_not_change_compiled_output(make_target, rng):
    """Any order of the ideal splitters compiles to a chain with the same heralded output."""
    target = make_target(4)
    decomposition, scheme = compile_target(target)
    reference = run_chain(scheme).final_state

    for _ in range(5):
        order = rng.permutation(len(decomposition.ideal_params))
        permuted = [decomposition.ideal_params[i] for i in order]

        output = run_chain(solve_scheme(permuted)).final_state

        assert fidelity(output, reference) >= 1 - 1e-10
