"""Target factorization tests."""

import cmath
import math

import attr
import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from heralded_fock.circuit import run_effective_chain
from heralded_fock.config import Tolerances
from heralded_fock.compiler import EffectiveParams
from heralded_fock.decompose import (
    TargetSpec,
    char_poly,
    decompose,
    expand_roots,
    find_roots,
    reconstruct_target,
    root_to_bs_params,
    roots_to_bs_params,
    sort_roots,
)
from heralded_fock.exceptions import TargetSpecError, ZeroPolynomialError
from heralded_fock.fock import fidelity, wrap_phase
from heralded_fock.presets import fock, noon, uniform


def _assert_roots_match(found, expected):
    remaining = list(expected)
    for root in found:
        closest = min(remaining, key=lambda r: abs(r - root))
        assert abs(closest - root) < 1e-9
        remaining.remove(closest)


# TargetSpec


def test_target_is_normalized_with_warning(caplog):
    """Coefficients off unit norm are rescaled and a warning is logged."""
    target = TargetSpec(n_total=1, coefficients=[3.0, 4.0])

    assert target.coefficients == pytest.approx((0.6, 0.8))
    assert "normalizing target coefficients" in caplog.text


def test_target_needs_photons():
    """N = 0 targets are rejected."""
    with pytest.raises(TargetSpecError, match="n_total must be at least 1"):
        TargetSpec(n_total=0, coefficients=[1.0])


def test_target_coefficient_count():
    """Exactly N + 1 coefficients are required."""
    with pytest.raises(TargetSpecError, match="Expected 4 coefficients"):
        TargetSpec(n_total=3, coefficients=[1.0, 0.0])


def test_target_rejects_zero_vector():
    """An all-zero target has no direction."""
    with pytest.raises(TargetSpecError, match="nonzero"):
        TargetSpec(n_total=2, coefficients=[0.0, 0.0, 0.0])


def test_target_from_coefficients():
    """The photon number follows from the coefficient count."""
    target = TargetSpec.from_coefficients([0.6, 0.0, 0.8])

    assert target.n_total == 2
    assert target.to_state().amplitude((2, 0)) == pytest.approx(0.8)


# Characteristic polynomial and roots


def test_char_poly_of_uniform_target():
    """p_n = C_n / sqrt(n! (N - n)!)."""
    poly = char_poly(uniform(2))
    c = 1 / math.sqrt(3)

    assert poly == pytest.approx([c / math.sqrt(2), c, c / math.sqrt(2)])


def test_hom_target_root():
    """(|0,1> + |1,0>)/sqrt 2 has the single root -1, a balanced splitter with phi = pi."""
    decomposition = decompose(TargetSpec(n_total=1, coefficients=[1.0, 1.0]))

    assert decomposition.roots == pytest.approx((-1.0,))
    (params,) = decomposition.ideal_params
    assert params.theta == pytest.approx(math.pi / 4)
    assert abs(wrap_phase(params.phi - math.pi)) < 1e-12


def test_noon_roots_are_fourth_roots_of_unity():
    """(|0,4> - |4,0>)/sqrt 2 factors over 1, i, -1 and -i."""
    decomposition = decompose(noon(4))

    _assert_roots_match(decomposition.roots, [1, 1j, -1, -1j])
    assert decomposition.infinite_roots == 0
    assert [p.theta for p in decomposition.ideal_params] == pytest.approx([math.pi / 4] * 4)
    phases = [-math.pi / 2, 0.0, math.pi / 2, math.pi]
    for params, phase in zip(decomposition.ideal_params, phases):
        assert abs(wrap_phase(params.phi - phase)) < 1e-9


def test_fock_target_has_zero_and_infinite_roots():
    """|1,2> is a^dagger (b^dagger)^2: one root at zero and two at infinity."""
    decomposition = decompose(fock(3, 1))

    assert decomposition.roots == (0j,)
    assert decomposition.infinite_roots == 2
    assert [(p.theta, p.phi) for p in decomposition.ideal_params] == [
        (0.0, 0.0),
        (math.pi / 2, 0.0),
        (math.pi / 2, 0.0),
    ]


def test_all_b_target_is_all_infinite():
    """|0,N> has every root at infinity."""
    decomposition = decompose(fock(3, 0))

    assert decomposition.roots == ()
    assert decomposition.infinite_roots == 3
    assert decomposition.n_total == 3


def test_find_roots_zero_polynomial():
    """A vanishing polynomial has no factorization."""
    with pytest.raises(ZeroPolynomialError):
        find_roots([0.0, 0.0, 0.0])


def test_find_roots_repeated_root():
    """(x - 0.5)^3 is found as a triple root."""
    roots, infinite = find_roots(expand_roots([0.5, 0.5, 0.5], 0))

    assert infinite == 0
    assert list(roots) == pytest.approx([0.5] * 3, abs=1e-4)


@pytest.mark.parametrize("n_total", [1, 2, 3, 4, 5])
def test_root_residuals(make_target, n_total):
    """Polished roots satisfy |p(beta)| <= 1e-9 relative to the largest coefficient."""
    for _ in range(20):
        poly = char_poly(make_target(n_total))
        roots, infinite = find_roots(poly)

        assert infinite == 0
        assert len(roots) == n_total
        scale = np.max(np.abs(poly))
        assert max(abs(P.polyval(r, poly)) for r in roots) / scale <= 1e-9


def test_sort_roots_by_modulus_then_phase():
    """Order is deterministic and independent of the input order."""
    roots = [2.0, -1.0, 1j, 1.0, -0.5j, 0.0]
    expected = [0.0, -0.5j, 1.0, 1j, -1.0, 2.0]

    assert sort_roots(roots) == expected
    assert sort_roots(list(reversed(roots))) == expected


def test_sort_roots_negative_real_with_tiny_imaginary_part():
    """A root at -1 sorts last among unit roots whatever the sign of its rounding error."""
    assert sort_roots([complex(-1.0, -1e-17), 1j, 1.0])[-1] == complex(-1.0, -1e-17)


def test_root_to_bs_params():
    """theta = atan |beta|, phi = arg beta."""
    params = root_to_bs_params(cmath.rect(2.0, 0.7))

    assert params.theta == pytest.approx(math.atan(2.0))
    assert params.phi == pytest.approx(0.7)
    assert root_to_bs_params(0j) == root_to_bs_params(0.0)


def test_roots_to_bs_params_puts_infinite_roots_last():
    """Finite roots first in sorted order, then theta = pi/2 for each root at infinity."""
    params = roots_to_bs_params([1.0, 0.5], 2)

    assert [p.theta for p in params] == pytest.approx(
        [math.atan(0.5), math.pi / 4, math.pi / 2, math.pi / 2]
    )


# Round trips


@pytest.mark.parametrize("n_total", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("zero_first, zero_last", [(False, False), (True, False), (False, True)])
def test_reconstruction_matches_target(make_target, n_total, zero_first, zero_last):
    """The ladder-operator product of the roots rebuilds the target."""
    if n_total == 1 and (zero_first or zero_last):
        pytest.skip("a single nonzero coefficient is covered by the fock tests")
    for _ in range(10):
        target = make_target(n_total, zero_first=zero_first, zero_last=zero_last)
        decomposition = decompose(target)

        assert decomposition.n_total == n_total
        assert fidelity(reconstruct_target(decomposition, n_total), target.to_state()) >= 1 - 1e-8
        if zero_last:
            assert decomposition.infinite_roots >= 1


@pytest.mark.parametrize("n_total", [1, 2, 3, 4, 5])
def test_convolution_reproduces_polynomial(make_target, n_total):
    """Expanding prod (a^dagger - beta b^dagger) gives back p_n within 1e-8 relative error."""
    for zero_last in (False, True):
        target = make_target(n_total, zero_last=zero_last and n_total > 1)
        poly = char_poly(target)
        decomposition = decompose(target)
        leading = poly[n_total - decomposition.infinite_roots]

        expanded = expand_roots(decomposition.roots, decomposition.infinite_roots, leading)

        assert np.max(np.abs(expanded - poly)) <= 1e-8 * np.max(np.abs(poly))


def test_ideal_params_rebuild_target(make_target):
    """The conjugated creation operators of the ideal splitters rebuild the target."""
    for n_total in range(1, 6):
        target = make_target(n_total)
        decomposition = decompose(target)
        state = run_effective_chain(EffectiveParams(pairs=decomposition.ideal_params))

        assert fidelity(state, target.to_state()) >= 1 - 1e-8


def test_root_order_does_not_change_state(make_target, rng):
    """Any permutation of the roots rebuilds the same state."""
    target = make_target(5)
    decomposition = decompose(target)
    reference = reconstruct_target(decomposition, 5)
    for _ in range(5):
        shuffled = attr.evolve(decomposition, roots=tuple(rng.permutation(decomposition.roots)))

        assert fidelity(reconstruct_target(shuffled, 5), reference) >= 1 - 1e-10


def test_scale_is_product_prefactor(make_target):
    """scale = |p_d| prod sqrt(1 + |beta_i|^2)."""
    target = make_target(3)
    decomposition = decompose(target)
    poly = char_poly(target)

    expected = abs(poly[-1]) * math.prod(math.sqrt(1 + abs(r) ** 2) for r in decomposition.roots)
    assert decomposition.scale == pytest.approx(expected)


def test_root_residual_is_a_warning_threshold(make_target, caplog):
    """Roots above the residual threshold are logged and still returned."""
    poly = char_poly(make_target(5))

    roots, infinite = find_roots(poly, Tolerances(root_residual=1e-300))

    assert len(roots) + infinite == 5
    assert "root residual above tolerance" in caplog.text
