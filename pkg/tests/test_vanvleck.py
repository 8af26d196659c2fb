import numpy as np
import pytest
from conftest import OMEGA_Z, biharmonic
from scipy.special import jv

from fluofloq import (
    Backend,
    Branch,
    FloquetDegeneracyError,
    Harmonic,
    Modulation,
    SystemParams,
    VanVleckResonanceError,
    VanVleckValidityWarning,
    fourier_amplitudes,
    solve_floquet,
    transition_elements,
    vanvleck_elements,
    vanvleck_solution,
)
from fluofloq.vanvleck import modulation_phase, theta0

PLUS = Branch.PLUS


def _splitting_error(params, mod):
    return abs(vanvleck_solution(params, mod).Omega_m - solve_floquet(params, mod).splitting)


def test_single_harmonic_is_bessel():
    mod = Modulation(OMEGA_Z, (Harmonic(1, OMEGA_Z),))
    ls = np.arange(-10, 11)
    np.testing.assert_allclose(fourier_amplitudes(mod, 10), jv(ls, 1.0), atol=1e-14)


@pytest.mark.parametrize("p, phi", [(3, 0.0), (3, 0.7), (2, 0.5 * np.pi), (4, 1.3)])
def test_bessel_matches_quadrature(p, phi):
    mod = biharmonic(p, phi)
    np.testing.assert_allclose(
        fourier_amplitudes(mod, 8, "bessel"), fourier_amplitudes(mod, 8, "quadrature"), atol=1e-10
    )


def test_parseval_of_amplitudes(parity_p3):
    amplitudes = fourier_amplitudes(parity_p3[1], 40)
    assert np.sum(np.abs(amplitudes) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_general_modulation_uses_quadrature():
    mod = Modulation(OMEGA_Z, (Harmonic(1, 20.0, 0.4), Harmonic(2, 10.0), Harmonic(5, 5.0, 1.0)))
    amplitudes = fourier_amplitudes(mod, 30)
    assert np.sum(np.abs(amplitudes) ** 2) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        fourier_amplitudes(mod, 5, "bessel")
    with pytest.raises(ValueError):
        fourier_amplitudes(mod, 5, "simpson")


def test_odd_harmonic_amplitude_symmetry():
    mod = biharmonic(3, 0.3 * np.pi)
    big_theta = modulation_phase(mod)
    assert big_theta == pytest.approx(np.sin(0.3 * np.pi) / 3.0)
    amplitudes = fourier_amplitudes(mod, 6)
    ls = np.arange(-6, 7)
    expected = (-1.0) ** np.abs(ls) * np.exp(-2.0j * big_theta) * np.conj(amplitudes)
    np.testing.assert_allclose(amplitudes[::-1], expected, atol=1e-13)


def test_even_harmonic_amplitude_symmetry(quarter_p2):
    amplitudes = fourier_amplitudes(quarter_p2[1], 6)
    ls = np.arange(-6, 7)
    np.testing.assert_allclose(amplitudes, (-1.0) ** np.abs(ls) * amplitudes[::-1], atol=1e-13)


def test_mollow_limit(mollow):
    vv = vanvleck_solution(*mollow)
    assert vv.m == 0
    assert vv.Omega_m == pytest.approx(10.0, abs=1e-12)
    assert vv.quasienergies == pytest.approx((5.0, -5.0))
    assert vv.u == pytest.approx(1.0 / np.sqrt(2.0))
    assert vv.v == pytest.approx(1.0 / np.sqrt(2.0))
    assert vv.B == 1.0
    np.testing.assert_array_equal(vv.P, 0.0)
    np.testing.assert_array_equal(vv.Q, 0.0)
    elems = vanvleck_elements(vv)
    assert elems.backend is Backend.VANVLECK
    np.testing.assert_allclose(np.abs(elems.x_plus[..., elems.l_max]), 0.5, atol=1e-14)
    assert elems.parseval() == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("case", ["parity_p3", "quarter_p2"])
def test_resonant_block_phases(case, request):
    vv = vanvleck_solution(*request.getfixturevalue(case))
    assert abs(vv.u) ** 2 + vv.v**2 == pytest.approx(1.0, abs=1e-14)
    assert vv.v == pytest.approx(vv.u * np.exp(1.0j * vv.theta0), abs=1e-12)
    assert vv.theta0 == pytest.approx(theta0(vv.F))
    a, b = vv.mode_coefficients(PLUS)
    assert np.sum(np.abs(a) ** 2 + np.abs(b) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_odd_harmonic_coefficient_relation():
    vv = vanvleck_solution(SystemParams(10.0), biharmonic(3, 0.25 * np.pi))
    assert vv.theta0 == pytest.approx(vv.Theta, abs=1e-12)
    js = np.arange(-vv.j_max, vv.j_max + 1)
    expected = (-1.0) ** (js + 1) * np.exp(1.0j * vv.Theta) * vv.P
    np.testing.assert_allclose(vv.Q, expected, atol=1e-12 * np.max(np.abs(vv.P)))


def test_even_harmonic_coefficient_relation(quarter_p2):
    vv = vanvleck_solution(*quarter_p2)
    js = np.arange(-vv.j_max, vv.j_max + 1)
    expected = (-1.0) ** (js + 1) * np.exp(-1.0j * vv.theta0) * np.conj(vv.P)
    np.testing.assert_allclose(vv.Q, expected, atol=1e-12 * np.max(np.abs(vv.P)))


def test_first_order_limit(parity_p3):
    params = SystemParams(0.01)
    vv = vanvleck_solution(params, parity_p3[1])
    for j in (1, -1, -3):
        first_order = params.omega_x * vv.amplitude(j) * vv.v / (2.0 * j * OMEGA_Z)
        assert vv.P[j + vv.j_max] == pytest.approx(first_order, rel=1e-2)


def test_splitting_error_scales_cubically(parity_p3):
    omegas = np.array([1.0, 2.0, 4.0, 8.0])
    errors = [_splitting_error(SystemParams(w), parity_p3[1]) for w in omegas]
    slope = np.polyfit(np.log(omegas), np.log(errors), 1)[0]
    assert 2.5 <= slope <= 3.5


def test_resonance_guard():
    with pytest.raises(VanVleckResonanceError):
        vanvleck_solution(SystemParams(10.0, OMEGA_Z), biharmonic(3), m=0)
    assert vanvleck_solution(SystemParams(10.0, OMEGA_Z), biharmonic(3)).m == 1


def test_ambiguous_resonance_warns():
    with pytest.warns(VanVleckValidityWarning):
        vv = vanvleck_solution(SystemParams(10.0, 0.45 * OMEGA_Z), biharmonic(3))
    assert vv.m == 0


def test_degenerate_block():
    with pytest.raises(FloquetDegeneracyError):
        vanvleck_solution(SystemParams(0.0), biharmonic(3))


def test_elements_cutoff(parity_p3):
    vv = vanvleck_solution(*parity_p3, l_max=8)
    with pytest.raises(ValueError):
        vanvleck_elements(vv, l_max=vv.fourier_cutoff)


def test_elements_approach_monodromy(quarter_p2):
    mod = quarter_p2[1]
    params = SystemParams(2.0)
    exact = transition_elements(solve_floquet(params, mod))
    approx = vanvleck_elements(vanvleck_solution(params, mod))
    assert approx.conjugation_residual() < 1e-12
    assert approx.parseval() == pytest.approx(1.0, abs=1e-2)
    for l in (-2, -1, 1, 2):
        reference = exact.element(PLUS, PLUS, l)
        assert abs(approx.element(PLUS, PLUS, l) - reference) < 1e-2 * abs(reference)


def test_lowering_elements_are_built_separately(quarter_p2, detuned_p3):
    assert vanvleck_elements(vanvleck_solution(*detuned_p3)).conjugation_residual() < 1e-12
    mod = quarter_p2[1]
    params = SystemParams(2.0)
    exact = transition_elements(solve_floquet(params, mod))
    approx = vanvleck_elements(vanvleck_solution(params, mod))
    for l in (-2, -1, 1, 2):
        reference = exact.x_minus[PLUS, PLUS, l + exact.l_max]
        assert abs(approx.x_minus[PLUS, PLUS, l + approx.l_max] - reference) < 1e-2 * abs(reference)
        reference = abs(exact.x_minus[PLUS, Branch.MINUS, l + exact.l_max])
        assert abs(abs(approx.x_minus[PLUS, Branch.MINUS, l + approx.l_max]) - reference) < 1e-2 * reference + 1e-4


def _generators(vv, delta):
    """iK₁, iK₂ の行列要素を返す関数の組。|↑, n⟩ と |↓, l⟩ の添字はSambe空間の次数です。"""
    w, m = vv.omega_z, vv.m

    def f(l):
        return vv.omega_x * vv.amplitude(l)

    def d(l):
        return delta + l * w

    span = range(-vv.fourier_cutoff - 8, vv.fourier_cutoff + 9)

    def k1_ud(n, l):
        return 0.0 if n - l == -m else 0.5 * f(n - l) / d(n - l)

    def k1_du(l, n):
        return 0.0 if n - l == -m else -0.5 * np.conj(f(n - l)) / d(n - l)

    def tail(n, l):
        return np.conj(f(l - n - m)) * f(-m) / d(l - n - m) + f(n - l - m) * np.conj(f(-m)) / d(n - l - m)

    def k2_uu(n, l):
        total = sum(
            f(n - k) * np.conj(f(l - k)) / 2.0 * (1.0 / d(n - k) + 1.0 / d(l - k))
            for k in span
            if k not in (n + m, l + m)
        )
        return (total + tail(n, l)) / (4.0 * (n - l) * w)

    def k2_dd(n, l):
        total = sum(
            np.conj(f(k - n)) * f(k - l) / 2.0 * (1.0 / d(k - n) + 1.0 / d(k - l))
            for k in span
            if k not in (l - m, n - m)
        )
        return -(total + tail(n, l)) / (4.0 * (n - l) * w)

    return span, k1_ud, k1_du, k2_uu, k2_dd


def test_coefficients_follow_from_generators(detuned_p3):
    params, mod = detuned_p3
    vv = vanvleck_solution(params, mod)
    span, k1_ud, k1_du, k2_uu, k2_dd = _generators(vv, params.detuning)
    u, v, m = vv.u, vv.v, vv.m
    scale = np.max(np.abs(vv.P))
    for j in (-3, -2, -1, 1, 2, 3):
        # (1 − iK₁ − iK₂ + ½(iK₁)²)(u|↑, 0⟩ + v|↓, m⟩) の |↑, j⟩ と |↓, m+j⟩ の成分
        up = -u * k2_uu(j, 0) - v * k1_ud(j, m) + 0.5 * u * sum(k1_ud(j, l) * k1_du(l, 0) for l in span)
        down = -u * k1_du(m + j, 0) - v * k2_dd(m + j, m) + 0.5 * v * sum(k1_du(m + j, n) * k1_ud(n, m) for n in span)
        assert up == pytest.approx(-vv.P[j + vv.j_max], abs=1e-10 * scale)
        assert down == pytest.approx(vv.Q[j + vv.j_max], abs=1e-10 * scale)
