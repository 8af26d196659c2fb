import numpy as np
import pytest
from conftest import OMEGA_Z

from fluofloq import (
    CorrelationWindowError,
    Modulation,
    SystemParams,
    correlation,
    exact_route,
    exact_spectrum,
    liouvillian,
    parity_chain,
    principal_matrix,
    steady_state_exact,
    symmetric_grid,
)
from fluofloq.exact import PARITY_MATRIX


@pytest.fixture(scope="module")
def mollow_trace():
    return correlation(SystemParams(10.0), Modulation.unmodulated(OMEGA_Z))


def test_liouvillian_preserves_trace(detuned_p3):
    t = np.linspace(0.0, 1.0, 17)
    generator = liouvillian(*detuned_p3, t)
    assert generator.shape == (17, 4, 4)
    np.testing.assert_allclose(generator[:, 2] + generator[:, 3], 0.0, atol=1e-15)


def test_liouvillian_without_drive():
    generator = liouvillian(SystemParams(0.0), Modulation.unmodulated(OMEGA_Z), 0.0)
    values = np.sort(np.linalg.eigvals(generator).real)
    np.testing.assert_allclose(values, [-1.0, -0.5, -0.5, 0.0], atol=1e-14)


def test_liouvillian_parity(parity_p3):
    params, mod = parity_p3
    t = np.linspace(0.0, mod.period, 129)
    shifted = PARITY_MATRIX @ liouvillian(params, mod, t + 0.5 * mod.period) @ PARITY_MATRIX
    np.testing.assert_allclose(shifted, liouvillian(params, mod, t), atol=1e-11)


def test_principal_matrix_basics(parity_p3):
    np.testing.assert_array_equal(principal_matrix(*parity_p3, 0.3, 0.3), np.eye(4))
    with pytest.raises(ValueError):
        principal_matrix(*parity_p3, 0.3, 0.2)


def test_principal_matrix_composition(parity_p3):
    rng = np.random.default_rng(7)
    for _ in range(3):
        t0, t1, t2 = np.sort(rng.uniform(0.0, 0.4, 3))
        composed = principal_matrix(*parity_p3, t1, t2) @ principal_matrix(*parity_p3, t0, t1)
        np.testing.assert_allclose(composed, principal_matrix(*parity_p3, t0, t2), atol=1e-9)


def test_principal_matrix_parity(parity_p3):
    params, mod = parity_p3
    half = 0.5 * mod.period
    shifted = principal_matrix(params, mod, 0.01 + half, 0.05 + half, steps=256)
    np.testing.assert_allclose(
        PARITY_MATRIX @ shifted @ PARITY_MATRIX, principal_matrix(params, mod, 0.01, 0.05, steps=256), atol=1e-9
    )


def test_steady_state_without_drive():
    steady = steady_state_exact(SystemParams(0.0, 3.0), Modulation.unmodulated(OMEGA_Z))
    np.testing.assert_allclose(steady.states, np.tile([0.0, 0.0, 0.0, 1.0], (256, 1)), atol=1e-12)


def test_mollow_steady_state():
    steady = steady_state_exact(SystemParams(10.0), Modulation.unmodulated(OMEGA_Z))
    # Ω²/4 / (κ²/4 + Ω²/2)
    assert steady.mean_excited_population() == pytest.approx(25.0 / 50.25, rel=1e-8)
    assert abs(steady.monodromy_eigenvalue - 1.0) < 1e-10


@pytest.mark.parametrize("case", ["parity_p3", "detuned_p3", "phase0_p2"])
def test_steady_state_is_physical(case, request):
    steady = steady_state_exact(*request.getfixturevalue(case))
    assert steady.trace_defect() < 1e-9
    assert steady.hermiticity_defect() < 1e-9
    assert np.all((steady.pi_plus >= 0.0) & (steady.pi_plus <= 1.0))


def test_parity_chain(parity_p3, detuned_p3):
    chain = parity_chain(*parity_p3)
    assert chain.passes(1e-8)
    broken = parity_chain(*detuned_p3)
    assert broken.liouvillian_residual == pytest.approx(10.0)
    assert broken.steady_state_residual > 1e-3
    assert not broken.passes()


def test_mollow_correlation(mollow_trace):
    trace = mollow_trace
    assert trace.g1[0].real == pytest.approx(trace.steady.mean_excited_population(), abs=1e-10)
    assert trace.imaginary_ratio() < 1e-8
    assert trace.tau_step == pytest.approx(2.0 * np.pi / OMEGA_Z / 256)
    assert trace.tau_grid[-1] >= 40.0
    np.testing.assert_allclose(trace.g1_incoherent + trace.g1_coherent, trace.g1)


def test_mollow_coherent_line(mollow_trace):
    lines = mollow_trace.coherent_lines()
    assert [line.harmonic for line in lines] == [0]
    expected = np.pi * abs(np.mean(mollow_trace.steady.sigma_plus)) ** 2
    assert lines[0].weight == pytest.approx(expected, rel=1e-8)


def test_mollow_exact_peaks(mollow_trace):
    grid = symmetric_grid(4.0 * OMEGA_Z)
    spectrum = exact_spectrum(mollow_trace, grid)
    assert spectrum.route == "exact"
    assert spectrum.asymmetry() < 1e-6
    np.testing.assert_allclose(spectrum.peak_positions(), [-10.0, 0.0, 10.0], atol=grid[1] - grid[0])


def test_chirp_and_direct_sums_agree(mollow_trace):
    uniform = symmetric_grid(20.0, 401)
    irregular = np.append(uniform, 21.37)
    fast = exact_spectrum(mollow_trace, uniform).s_inc
    direct = exact_spectrum(mollow_trace, irregular).s_inc
    np.testing.assert_allclose(direct[:-1], fast, atol=1e-9 * np.max(fast))


def test_apodization_smooths(mollow_trace):
    grid = symmetric_grid(20.0, 401)
    sharp = exact_spectrum(mollow_trace, grid)
    smooth = exact_spectrum(mollow_trace, grid, apodization=0.5)
    assert np.max(smooth.s_inc) < np.max(sharp.s_inc)
    with pytest.raises(ValueError):
        exact_spectrum(mollow_trace, grid, apodization=-1.0)


def test_correlation_window_too_short(mollow):
    with pytest.raises(CorrelationWindowError) as info:
        correlation(*mollow, tau_max=10.0)
    assert info.value.suggested_tau_max == 20.0


@pytest.mark.parametrize(
    "kwargs", [{"n_tprime": 8}, {"n_tprime": 48}, {"tau_max": 5.0}, {"steps_per_period": 128}]
)
def test_correlation_preconditions(mollow, kwargs):
    with pytest.raises(ValueError):
        correlation(*mollow, **kwargs)


def test_parity_makes_correlation_real(parity_p3):
    trace = correlation(*parity_p3)
    assert trace.imaginary_ratio() < 1e-8
    assert trace.g1[0].real == pytest.approx(trace.steady.mean_excited_population(), abs=1e-10)


def test_broken_parity_leaves_imaginary_part(phase0_p2):
    assert correlation(*phase0_p2).imaginary_ratio() > 1e-3


@pytest.mark.slow
def test_exact_route_returns_trace(detuned_p3):
    grid = symmetric_grid(4.0 * OMEGA_Z)
    spectrum, trace = exact_route(*detuned_p3, grid)
    np.testing.assert_array_equal(spectrum.delta_grid, grid)
    assert spectrum.asymmetry() > 1e-2
    assert trace.coherent_lines()
