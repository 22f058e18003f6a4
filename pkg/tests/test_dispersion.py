import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import reference_values as ref
from guided_spectra.asymptotics import two_jump_default
from guided_spectra.dispersion import (EVANESCENT, NON_GUIDED, OSCILLATORY, branch_bracket, count_below,
                                       dispersion_residual_1jump, dispersion_residual_zone0, guided_eigenvalues,
                                       guided_eigenvalues_1jump, guided_eigenvalues_2jump, nonguided_eigenvalues,
                                       regular_residual_1jump, spectrum, transverse_quantities, zone_of)
from guided_spectra.errors import PoleProximity, WrongZone
from guided_spectra.medium import FORM_A, FORM_B, LayeredMedium, default_medium

PI2 = math.pi ** 2


def test_transverse_on_barrier():
    tq = transverse_quantities(default_medium(), 3, 18 * PI2)
    assert tq.xi[1] == pytest.approx(0.0, abs=1e-12)
    assert tq.xi[0] == pytest.approx(3 * math.pi, rel=1e-14)


def test_transverse_on_frontier():
    assert transverse_quantities(default_medium(), 1, PI2).xi[0] == 0.0


def test_transverse_substitution():
    tq = transverse_quantities(default_medium(), 2, 5 * PI2)
    assert tq.xi0 == pytest.approx(math.pi, rel=1e-14)
    assert tq.xi1p == pytest.approx(math.pi * math.sqrt(1.5), rel=1e-14)
    assert tq.regime == (OSCILLATORY, EVANESCENT)


@given(st.floats(0.1, 5.0), st.integers(1, 20))
@settings(max_examples=80, deadline=None)
def test_transverse_consistency(t, k):
    m = LayeredMedium(1, 1, (0.3, 0.7), (1, 2, 3))
    lam = t * m.kappa(k)
    tq = transverse_quantities(m, k, lam)
    for c, xi, reg in zip(m.speeds, tq.xi, tq.regime):
        signed = xi * xi if reg == OSCILLATORY else -xi * xi
        assert c * signed == pytest.approx(lam - c * m.kappa(k), rel=1e-12, abs=1e-9 * lam)
        assert (reg == OSCILLATORY) == (lam >= c * m.kappa(k))


def test_guided_k10_frozen():
    # [DERIVED] 40-digit shooting
    s = guided_eigenvalues_1jump(default_medium(FORM_A), 10, 1e-13)
    assert s.Lk == 5
    np.testing.assert_allclose(s.lam, ref.ONE_JUMP_A_K10_GUIDED, rtol=1e-12)
    kappa = s.kappa
    assert np.all((s.lam > kappa) & (s.lam < 2 * kappa))


def test_guided_form_b_frozen():
    s = guided_eigenvalues(default_medium(FORM_B), 10)
    np.testing.assert_allclose(s.lam, ref.ONE_JUMP_B_K10_GUIDED, rtol=1e-12)


def test_k1_has_no_guided_value():
    m = default_medium()
    assert guided_eigenvalues(m, 1).Lk == 0
    lam = np.linspace(m.kappa(1), 2 * m.kappa(1), 2001)[1:-1]
    r = regular_residual_1jump(m, 1, lam)
    assert np.all(r > 0)
    assert count_below(m, 1, 2 * m.kappa(1)) == 0


def test_residual_vanishes_at_roots():
    m = default_medium()
    for lam in ref.ONE_JUMP_A_K10_GUIDED:
        assert abs(dispersion_residual_1jump(m, 10, lam)) < 1e-12 * 1.0
        assert abs(float(regular_residual_1jump(m, 10, lam))) < 1e-12


def test_residual_sign_flip_across_root():
    m = default_medium()
    for ell, lam in enumerate(ref.ONE_JUMP_A_K10_GUIDED, start=1):
        br = branch_bracket(m, 10, ell)
        assert br.lower < lam < br.upper
        lo, hi = dispersion_residual_1jump(m, 10, br.lower * (1 + 1e-9)), \
            dispersion_residual_1jump(m, 10, min(br.upper, 2 * m.kappa(10)) * (1 - 1e-12))
        assert lo < 0 < hi or hi < 0 < lo


def test_pole_proximity():
    m = default_medium()
    br = branch_bracket(m, 10, 1)
    with pytest.raises(PoleProximity):
        dispersion_residual_1jump(m, 10, br.lower)


def test_outside_window():
    with pytest.raises(WrongZone):
        dispersion_residual_1jump(default_medium(), 10, 3 * default_medium().kappa(10))


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 13, 21, 30])
def test_count_matches_integer_part(k):
    # c1 = 5 gives sqrt(c1-1)/2 = 1: every k is the first case and L_k = k
    m = LayeredMedium(1, 1, (0.5,), (1, 5))
    assert guided_eigenvalues(m, k).Lk == math.floor(k * math.sqrt(4) / 2)


def test_two_jump_frozen_and_zones():
    m = two_jump_default()
    s = guided_eigenvalues_2jump(m, 10)
    np.testing.assert_allclose(s.lam, ref.TWO_JUMP_B_K10_GUIDED, rtol=1e-12)
    z0 = s.lam[[z == "GUIDED_0" for z in s.zone]]
    np.testing.assert_allclose(z0, ref.TWO_JUMP_B_K10_ZONE0, rtol=1e-12)
    kappa = m.kappa(10)
    assert np.all((z0 > kappa) & (z0 < 2 * kappa))
    for lam in z0:
        assert abs(dispersion_residual_zone0(m, 10, lam)) < 1e-10


def test_nonguided_frozen():
    m = default_medium()
    s = nonguided_eigenvalues(m, 3, ref.ONE_JUMP_A_K3_FIRST_NONGUIDED[-1] + 1.0)
    np.testing.assert_allclose(s.lam, ref.ONE_JUMP_A_K3_FIRST_NONGUIDED, rtol=1e-12)
    assert set(s.zone) == {NON_GUIDED}
    assert np.all(np.diff(s.lam) > 1e-13 * s.lam[-1])


def test_four_layers_above_barrier():
    m = LayeredMedium(1, 1, (0.25, 0.5, 0.75), (1, 1.5, 2.2, 3), FORM_B)
    s = nonguided_eigenvalues(m, 2, 700)
    np.testing.assert_allclose(s.lam, ref.FOUR_LAYER_B_K2_ABOVE_BARRIER, rtol=1e-12)


@pytest.mark.parametrize("k", [1, 4])
def test_homogeneous_exact(k):
    m = LayeredMedium(1, 1, (), (1,))
    s = nonguided_eigenvalues(m, k, m.kappa(k) + 30.5 * PI2)
    exact = m.kappa(k) + (np.arange(1, 6) * math.pi) ** 2
    np.testing.assert_allclose(s.lam, exact, rtol=1e-13)
    assert np.array_equal(s.ell, np.arange(1, 6))


def test_bracket_soundness():
    m = default_medium()
    for k in range(2, 40, 3):
        s = guided_eigenvalues(m, k)
        for lam, ell in zip(s.lam, s.ell):
            br = branch_bracket(m, k, ell)
            assert br.lower < lam < min(br.upper, 2 * s.kappa)


def test_Lk_monotone_in_k():
    # monotonicity of the guided count is checked, not assumed
    for c1 in (1.5, 2.0, 3.7, 10.0):
        m = LayeredMedium(1, 1, (0.5,), (1, c1))
        counts = [guided_eigenvalues(m, k).Lk for k in range(1, 61)]
        assert all(a <= b for a, b in zip(counts, counts[1:])), (c1, counts)


def test_branch_asymptotics_trend():
    # k (mu^ell - mu_{k,ell}) approaches 2 ell^2 pi/h0^3 sqrt(c1/(c1-1))
    m = default_medium()
    target = 2 * math.pi / 0.5 ** 3 * math.sqrt(2)
    errs = []
    for k in (25, 50, 100, 200):
        lam = guided_eigenvalues(m, k).lam[0]
        br = branch_bracket(m, k, 1)
        errs.append(abs(k * (br.mu_upper - br.mu(lam)) / target - 1))
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.02


def test_spectrum_merges_zones():
    m = default_medium()
    s = spectrum(m, 3, 400)
    assert s.Lk == count_below(m, 3, 2 * m.kappa(3))
    assert np.all(np.diff(s.lam) > 0)
    assert s.zone[-1] == NON_GUIDED
    assert zone_of(m, 3, 1.5 * m.kappa(3)) == "GUIDED"


@given(st.integers(1, 30), st.floats(1.2, 6.0), st.floats(0.2, 0.8))
@settings(max_examples=25, deadline=None)
def test_guided_count_equals_sturm_count(k, c1, h0):
    m = LayeredMedium(1, 1, (h0,), (1, c1), FORM_A)
    s = guided_eigenvalues(m, k)
    assert s.Lk == count_below(m, k, c1 * m.kappa(k))
