import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import reference_values as ref
from guided_spectra.asymptotics import two_jump_default
from guided_spectra.dispersion import guided_eigenvalues, nonguided_eigenvalues
from guided_spectra.errors import NotARoot, WrongZone
from guided_spectra.medium import FORM_B, LayeredMedium, default_medium
from guided_spectra.modes import (EVA, OSC, build_guided, build_guided_1jump, build_nonguided_transfer,
                                  build_zone0_2jump, build_zoneI_2jump, coefficient_bound, sample_profile,
                                  tail_1jump_forms, transfer_matrices, zone0_closed_form, zone0_envelopes,
                                  zoneI_identities)
from guided_spectra.oracle import fd_eigensolve

FOUR = LayeredMedium(1, 1, (0.25, 0.5, 0.75), (1, 1.5, 2.2, 3), FORM_B)


@pytest.fixture(scope="module")
def one_jump_modes():
    m = default_medium()
    return [build_guided_1jump(m, 10, lam, ell) for ell, lam in enumerate(ref.ONE_JUMP_A_K10_GUIDED, 1)]


def test_boundary_and_anchor(one_jump_modes):
    for mode in one_jump_modes:
        assert mode.coeffs.pair[0] == (1.0, 0.0)
        assert mode.evaluate(0.0) == 0.0
        assert abs(mode.evaluate(1.0)) < 1e-12 * mode.max_abs()
        assert mode.interface_mismatch() < 1e-10
        assert mode.coeffs.kind == (OSC, EVA)


def test_tail_closed_forms_agree(one_jump_modes):
    x = np.linspace(0.5, 1.0, 101)
    for mode in one_jump_modes:
        first, second = tail_1jump_forms(mode, x)
        np.testing.assert_allclose(mode.evaluate(x), first, rtol=1e-10, atol=1e-13)
        np.testing.assert_allclose(first, second, rtol=1e-7, atol=1e-12)


def test_amplitude_phase(one_jump_modes):
    mode = one_jump_modes[2]
    r, beta = mode.coeffs.amplitude_phase(0)
    a, b = mode.coeffs.pair[0]
    assert r * r == pytest.approx(a * a + b * b, rel=1e-15)
    x = np.linspace(0, 0.5, 11)
    np.testing.assert_allclose(r * np.cos(mode.tq.xi[0] * x - beta), mode.evaluate(x), atol=1e-14)
    with pytest.raises(WrongZone):
        mode.coeffs.amplitude_phase(1)


def test_residual_inside_layers(one_jump_modes):
    # -c u'' + c kappa u = lam u away from the interface, by centered differences
    mode = one_jump_modes[1]
    m = mode.medium
    hstep = 1e-4
    for x, c in ((0.2, 1.0), (0.8, 2.0)):
        upp = (mode.evaluate(x + hstep) - 2 * mode.evaluate(x) + mode.evaluate(x - hstep)) / hstep ** 2
        lhs = -c * upp + c * m.kappa(10) * mode.evaluate(x)
        assert lhs == pytest.approx(mode.lam * mode.evaluate(x), rel=1e-5, abs=1e-5 * mode.lam * mode.max_abs())


def test_matches_fd_eigenvector(one_jump_modes):
    m = default_medium()
    fd = fd_eigensolve(m, 10, 2 ** 14, count=5, vectors=True)
    for j, mode in enumerate(one_jump_modes):
        u = mode.evaluate(fd.x)
        v = fd.vectors[:, j]
        v = v * (np.dot(u, v) / np.dot(v, v))
        assert np.linalg.norm(u - v) / np.linalg.norm(u) < 1e-6


def test_not_a_root():
    with pytest.raises(NotARoot):
        build_guided_1jump(default_medium(), 10, ref.ONE_JUMP_A_K10_GUIDED[0] * (1 + 1e-4))
    with pytest.raises(WrongZone):
        build_guided_1jump(default_medium(), 10, 3000.0)


def test_homogeneous_mode_is_sine():
    m = LayeredMedium(1, 1, (), (1,))
    kappa = m.kappa(2)
    for ell in (1, 3):
        mode = build_nonguided_transfer(m, 2, kappa + (ell * math.pi) ** 2, ell)
        x = np.linspace(0, 1, 33)
        np.testing.assert_allclose(mode.evaluate(x), np.sin(ell * math.pi * x), atol=1e-14)


def test_evaluate_full_vanishes_on_side(one_jump_modes):
    mode = one_jump_modes[0]
    assert np.all(mode.evaluate_full(0.0, np.linspace(0, 1, 7)) == 0.0)
    assert mode.evaluate_full(0.5, 0.25) == pytest.approx(math.sin(5 * math.pi) * mode.evaluate(0.25))


def test_sample_profile_aligned(one_jump_modes):
    x, u, layer, regime = sample_profile(one_jump_modes[0], 100)
    assert 0.5 in x
    assert layer[0] == 0 and layer[-1] == 1
    assert regime[-1] == EVA


@pytest.fixture(scope="module")
def two_jump():
    m = two_jump_default()
    return m, guided_eigenvalues(m, 10)


def test_zone0_modes(two_jump):
    m, s = two_jump
    for lam, ell, zone in zip(s.lam, s.ell, s.zone):
        if zone != "GUIDED_0":
            continue
        mode = build_zone0_2jump(m, 10, lam, ell)
        assert mode.interface_mismatch() < 1e-10
        x = np.linspace(0, 1, 301)
        np.testing.assert_allclose(mode.evaluate(x), zone0_closed_form(mode, x), rtol=1e-8, atol=1e-12 * mode.max_abs())
        up, lo = zone0_envelopes(mode, x)
        u = np.abs(mode.evaluate(x))
        assert np.all(u <= up * (1 + 1e-12))
        assert np.all(u >= lo * (1 - 1e-12))


def test_zoneI_identities(two_jump):
    m, s = two_jump
    for lam, ell, zone in zip(s.lam, s.ell, s.zone):
        if zone != "GUIDED_I":
            continue
        mode = build_zoneI_2jump(m, 10, lam, ell)
        ids = zoneI_identities(mode)
        assert abs(ids["norm_lower"] - ids["norm_mode"]) < 1e-12 * ids["norm_mode"]
        assert abs(ids["a2_sq"] - ids["a2_sq_formula"]) < 1e-12 * ids["a2_sq"]
        assert abs(mode.evaluate(1.0)) < 1e-12 * mode.max_abs()
        c1, c2 = m.speeds[1:]
        tq = mode.tq
        assert c2 * tq.xi[2] ** 2 + c1 * tq.xi[1] ** 2 == pytest.approx((c2 - c1) * m.kappa(10), rel=1e-12)


def test_two_jump_fd_agreement(two_jump):
    m, s = two_jump
    # second-order FD error of the upper zone-(I) modes is about 2e-6 at 2^14 cells
    fd = fd_eigensolve(m, 10, 2 ** 15, count=len(s.lam), vectors=True)
    for j, (lam, ell) in enumerate(zip(s.lam, s.ell)):
        u = build_guided(m, 10, lam, ell).evaluate(fd.x)
        v = fd.vectors[:, j] * np.sign(np.dot(u, fd.vectors[:, j]))
        v *= np.linalg.norm(u) / np.linalg.norm(v)
        assert np.linalg.norm(u - v) / np.linalg.norm(u) < 1e-6


def test_wrong_zone_constructors(two_jump):
    m, s = two_jump
    with pytest.raises(WrongZone):
        build_zoneI_2jump(m, 10, s.lam[0])
    with pytest.raises(WrongZone):
        build_zone0_2jump(m, 10, s.lam[-1])


def test_overflow_safe_deep_modes():
    # decay rate times thickness far beyond exp overflow of the naive form
    m = LayeredMedium(1, 3, (0.5,), (1, 2))
    s = guided_eigenvalues(m, 400)
    mode = build_guided(m, 400, s.lam[0], 1)
    assert mode.tq.xi[1] * 2.5 > 700
    x = np.linspace(0, 3, 1001)
    assert np.all(np.isfinite(mode.evaluate(x)))
    m = LayeredMedium(1, 1, (0.5,), (1, 2))
    x = np.linspace(0, 1, 1001)
    assert np.all(np.isfinite(mode.evaluate(x)))
    mid = guided_eigenvalues(m, 40)
    mode = build_guided(m, 40, mid.lam[0], 1)
    first, _ = tail_1jump_forms(mode, x[x >= 0.5])
    np.testing.assert_allclose(mode.evaluate(x[x >= 0.5]), first, rtol=1e-9, atol=1e-300)


def test_nonguided_transfer_modes():
    s = nonguided_eigenvalues(FOUR, 2, 700)
    eps = 0.5
    M = coefficient_bound(FOUR, eps)
    for lam, ell in zip(s.lam, s.ell):
        mode = build_nonguided_transfer(FOUR, 2, lam, ell)
        assert abs(mode.evaluate(1.0)) < 1e-10 * mode.max_abs()
        assert mode.interface_mismatch() < 1e-10
        norms = [math.hypot(*p) for p in mode.coeffs.pair]
        for c, r in zip(FOUR.speeds, norms):
            assert 1.0 <= math.sqrt(c / FOUR.speeds[0]) * r * (1 + 1e-12)
        if lam > (FOUR.c_max + eps) * FOUR.kappa(2):
            assert max(norms) <= M * (1 + 1e-12)


def test_transfer_matrix_algebra():
    tm = transfer_matrices(FOUR, 3, 5 * FOUR.kappa(3))
    w = FOUR.weights
    for i, (S, T) in enumerate(zip(tm.S, tm.T)):
        assert np.linalg.det(S) == pytest.approx(-w[i] * tm.xi[i], rel=1e-13)
        assert np.linalg.det(T) == pytest.approx(-w[i + 1] * tm.xi[i + 1], rel=1e-13)
        np.testing.assert_allclose(np.linalg.inv(S) @ S, np.eye(2), atol=1e-13)
        np.testing.assert_allclose(np.linalg.solve(T, S), tm.forward[i], atol=1e-12)
    up, down = tm.norms()
    pu, pd = tm.predicted_norms()
    np.testing.assert_allclose(up, pu, rtol=1e-14)
    np.testing.assert_allclose(down, pd, rtol=1e-14)


@given(st.integers(1, 25), st.floats(1.01, 4.0))
@settings(max_examples=60, deadline=None)
def test_transfer_forward_backward(k, t):
    lam = t * FOUR.c_max * FOUR.kappa(k)
    tm = transfer_matrices(FOUR, k, lam)
    v = np.array([1.0, 0.0])
    for F in tm.forward:
        v = F @ v
    for F in reversed(tm.forward):
        v = np.linalg.solve(F, v)
    np.testing.assert_allclose(v, [1.0, 0.0], atol=1e-12)
    up, down = tm.norms()
    assert all(n >= 1.0 - 1e-14 for n in up + down)


def test_transfer_rejects_guided():
    with pytest.raises(WrongZone):
        transfer_matrices(FOUR, 3, 1.2 * FOUR.kappa(3))
