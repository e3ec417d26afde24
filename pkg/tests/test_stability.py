import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softmode import stability
from softmode.errors import NonConvergence
from softmode.params import BareDetuning, EffectiveDetuning, reference_params
from softmode.stability import (
    build_drift_matrix,
    characteristic_polynomial,
    classify,
    classify_state,
    routh_hurwitz,
)
from softmode.steady_state import solve_steady_state


def eig_stable(poly):
    return bool(np.all(np.roots(poly[::-1]).real < 0))


def test_matrix_structure():
    p = reference_params(power=10e-6, gq_over_gl=-0.3, detuning_mode=EffectiveDetuning(1e9))
    ss = solve_steady_state(p)
    m = build_drift_matrix(p, ss)
    assert m.shape == (4, 4)
    assert list(m[0]) == [0.0, p.omega_m, 0.0, 0.0]
    assert m[2, 2] == m[3, 3] == -p.kappa
    assert m[2, 3] == -m[3, 2] == ss.delta_eff
    assert m[1, 0] == -ss.omega_m_eff and m[1, 1] == -p.gamma_m
    assert m[1, 2] == -ss.g_eff * ss.x_quad and m[1, 3] == -ss.g_eff * ss.p_quad
    assert m[2, 0] == ss.g_eff * ss.p_quad and m[3, 0] == -ss.g_eff * ss.x_quad


def test_zero_drive_block_diagonal():
    p = reference_params(power=0.0, detuning_mode=EffectiveDetuning(3e8))
    m = build_drift_matrix(p, solve_steady_state(p))
    assert not m[:2, 2:].any() and not m[2:, :2].any()


def test_resonant_no_qoc_factorises(ref):
    ss = solve_steady_state(ref)
    poly = characteristic_polynomial(ref, ss)
    k, g, w = ref.kappa, ref.gamma_m, ref.omega_m
    expected = np.polymul([1, 2 * k, k * k], [1, g, w * w])[::-1]
    np.testing.assert_allclose(poly, expected, rtol=1e-14)
    assert routh_hurwitz(poly)


def test_reference_soft_mode_point_is_stable():
    p = reference_params(power=10e-6, gq_over_gl=-0.6)
    m = build_drift_matrix(p, solve_steady_state(p))
    assert np.all(np.linalg.eigvals(m).real < 0)
    assert classify(p).status == stability.STABLE


@pytest.mark.parametrize("mode", [EffectiveDetuning(0.0), EffectiveDetuning(2e9), EffectiveDetuning(-1e9), BareDetuning(4e8)])
@pytest.mark.parametrize("ratio", [0.0, -0.3, 0.5])
def test_closed_form_polynomial_matches_matrix(mode, ratio):
    p = reference_params(power=20e-6, gq_over_gl=ratio, detuning_mode=mode)
    ss = solve_steady_state(p)
    m = build_drift_matrix(p, ss)
    poly = characteristic_polynomial(p, ss)
    # np.poly is an independent route through the eigenvalues
    np.testing.assert_allclose(poly[::-1], np.poly(m).real, rtol=1e-6)
    assert poly[0] == pytest.approx(np.linalg.det(m), rel=1e-9)
    assert -poly[3] == pytest.approx(np.trace(m), rel=1e-12)


def test_det_and_trace_exactly_on_small_scale():
    p = reference_params().replace(
        omega_m=3.0, gamma_m=0.5, kappa=2.0, g_l=0.7, g_q=-0.01, power=1e-19, detuning_mode=EffectiveDetuning(0.8)
    )
    ss = solve_steady_state(p)
    m = build_drift_matrix(p, ss)
    poly = characteristic_polynomial(p, ss)
    assert poly[0] == pytest.approx(np.linalg.det(m), rel=1e-12)
    assert -poly[3] == pytest.approx(np.trace(m), rel=1e-12)


def test_routh_hurwitz_examples():
    assert routh_hurwitz([1, 4, 6, 4, 1])
    poly = [1, 1, 1, 1, 1]
    assert eig_stable(np.array(poly)) is False
    assert routh_hurwitz(poly) is False
    assert routh_hurwitz([0, 4, 6, 4, 1]) is False
    with pytest.raises(ValueError):
        routh_hurwitz([1, math.nan, 1, 1, 1])
    with pytest.raises(ValueError):
        routh_hurwitz([1, 1, 1, 1, 2])


@settings(max_examples=500, deadline=None)
@given(st.lists(st.floats(min_value=-5, max_value=5), min_size=4, max_size=4))
def test_routh_hurwitz_agrees_with_roots(coeffs):
    poly = np.array(coeffs + [1.0])
    roots = np.roots(poly[::-1])
    margin = np.min(np.abs(roots.real))
    if margin < 1e-6:
        return
    assert routh_hurwitz(poly) == eig_stable(poly)


@given(st.lists(st.floats(min_value=-3, max_value=-0.1), min_size=4, max_size=4))
def test_routh_hurwitz_accepts_any_left_half_plane_roots(roots):
    poly = np.poly(roots)[::-1]
    assert routh_hurwitz(poly)


def test_sign_flip_invariance():
    p = reference_params(power=30e-6, gq_over_gl=-0.2, detuning_mode=EffectiveDetuning(-1.5e9))
    ss = solve_steady_state(p)
    flipped = replace(ss, c_s=-ss.c_s, x_quad=-ss.x_quad, p_quad=-ss.p_quad)
    a, b = classify_state(p, ss), classify_state(p, flipped)
    assert a.status == b.status
    np.testing.assert_allclose(a.char_poly, b.char_poly, rtol=1e-15)
    assert a.max_real_part == pytest.approx(b.max_real_part, rel=1e-9)


def test_classify_zero_drive():
    r = classify(reference_params(power=0.0))
    assert r.status == stability.STABLE and r.physical and r.routh_hurwitz_stable and r.eigen_stable


def test_classify_unphysical():
    p = reference_params(power=1e-4, gq_over_gl=-0.5)
    ss_i = p.epsilon**2 / p.kappa**2
    assert 2 * abs(p.g_q) * ss_i > p.omega_m
    r = classify(p)
    assert r.status == stability.UNPHYSICAL
    assert not (r.physical or r.routh_hurwitz_stable or r.eigen_stable)
    assert r.max_real_part > 0


def test_classify_unresolved(monkeypatch):
    def boom(params):
        raise NonConvergence("stuck")

    monkeypatch.setattr(stability, "solve_steady_state", boom)
    r = classify(reference_params())
    assert r.status == stability.UNRESOLVED
    assert r.char_poly is None


def test_marginal_band():
    p = reference_params(power=0.0).replace(gamma_m=1e-12)
    r = classify(p)
    assert r.status == stability.MARGINAL


def _max_real(power, ratio):
    return classify(reference_params(power=power, gq_over_gl=ratio)).max_real_part


def test_transition_power_matches_eigenvalue_bisection():
    ratio = -0.6
    lo, hi = 1e-6, 1e-4
    assert _max_real(lo, ratio) < 0 < _max_real(hi, ratio)
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if _max_real(mid, ratio) < 0:
            lo = mid
        else:
            hi = mid
    eig_edge = lo
    # the edge coincides with ω̃_m = 0: I = ω_m/(2|g_q|) -> P = I ħ ω_p κ / 2
    p = reference_params(gq_over_gl=ratio)
    i_edge = p.omega_m / (2 * abs(p.g_q))
    p_edge = i_edge * p.power / (p.epsilon**2 / p.kappa**2)
    assert eig_edge == pytest.approx(p_edge, rel=1e-6)
    # classification flips across the same edge
    assert classify(reference_params(power=p_edge * 0.999, gq_over_gl=ratio)).status == stability.STABLE
    assert classify(reference_params(power=p_edge * 1.001, gq_over_gl=ratio)).status == stability.UNPHYSICAL


@settings(max_examples=400, deadline=None)
@given(
    st.floats(min_value=-8, max_value=-2),
    st.floats(min_value=-1.0, max_value=0.5),
    st.floats(min_value=-5e9, max_value=5e9),
)
def test_routh_hurwitz_matches_eigenvalues_detuned(log_p, ratio, det):
    p = reference_params(power=10**log_p, gq_over_gl=ratio, detuning_mode=EffectiveDetuning(det))
    r = classify(p)
    if abs(r.max_real_part) <= 1e-6 * p.kappa:
        return
    assert routh_hurwitz(r.char_poly) == (r.max_real_part < 0)


def test_detuned_blue_side_can_be_unstable():
    # Δ̃ < 0 with strong drive: anti-damping
    p = reference_params(power=1e-2, detuning_mode=EffectiveDetuning(-2 * math.pi * 10e6))
    p = p.replace(g_l=2 * math.pi * 2e4)
    r = classify(p)
    assert r.physical
    assert r.status == stability.UNSTABLE
    assert not r.routh_hurwitz_stable and not r.eigen_stable
