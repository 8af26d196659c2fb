import numpy as np
import pytest
from conftest import OMEGA_Z, biharmonic

from fluofloq import (
    Harmonic,
    Modulation,
    ParityCase,
    SystemParams,
    classify_parity,
    effective_hamiltonian,
    eval_f,
)
from fluofloq.model import SIGMA_X


def test_eval_f_biharmonic_at_origin():
    assert eval_f(biharmonic(3), 0.0) == pytest.approx(80.0)


@pytest.mark.parametrize("phi", [0.0, 0.3, 0.5 * np.pi, 2.0])
def test_odd_harmonic_flips_sign_over_half_period(phi):
    mod = biharmonic(3, phi)
    t = np.linspace(0.0, mod.period, 333)
    np.testing.assert_allclose(eval_f(mod, t) + eval_f(mod, t + 0.5 * mod.period), 0.0, atol=1e-11)


def test_even_harmonic_is_half_period_invariant():
    mod = biharmonic(2)
    assert eval_f(mod, 0.0) == pytest.approx(80.0)
    assert eval_f(mod, 0.5 * mod.period) == pytest.approx(0.0, abs=1e-12)


def test_modulation_is_periodic_and_callable():
    mod = Modulation(OMEGA_Z, (Harmonic(1, 3.0, 0.2), Harmonic(4, 1.5, -1.0)))
    t = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(mod(t + mod.period), mod(t), atol=1e-11)


def test_phase_integral_differentiates_to_f():
    mod = biharmonic(3, 0.7)
    t = np.linspace(0.0, mod.period, 50)
    h = 1e-6
    derivative = (mod.phase_integral(t + h) - mod.phase_integral(t - h)) / (2.0 * h)
    np.testing.assert_allclose(derivative, eval_f(mod, t), rtol=1e-6, atol=1e-5)
    assert mod.phase_integral(mod.period) == pytest.approx(0.0, abs=1e-12)


def test_biharmonic_form():
    assert biharmonic(3, 0.5 * np.pi, r=0.5).biharmonic_form() == pytest.approx((40.0, 0.5, 3, 0.5 * np.pi))
    assert Modulation(OMEGA_Z, (Harmonic(1, 7.0),)).biharmonic_form() == (7.0, 0.0, 2, 0.0)
    assert Modulation(OMEGA_Z, (Harmonic(2, 7.0),)).biharmonic_form() is None
    assert Modulation.unmodulated(OMEGA_Z).biharmonic_form() is None


def test_invalid_inputs():
    with pytest.raises(ValueError):
        SystemParams(1.0, kappa=0.0)
    with pytest.raises(ValueError):
        SystemParams(-1.0)
    with pytest.raises(ValueError):
        Harmonic(0, 1.0)
    with pytest.raises(ValueError):
        Modulation.biharmonic(OMEGA_Z, 1.0, 1)
    with pytest.raises(ValueError):
        Modulation(0.0)


def test_effective_hamiltonian_limits():
    np.testing.assert_array_equal(effective_hamiltonian(SystemParams(0.0), Modulation.unmodulated(OMEGA_Z), 0.3), 0.0)
    h = effective_hamiltonian(SystemParams(10.0), Modulation.unmodulated(OMEGA_Z), 0.3)
    np.testing.assert_allclose(h, 5.0 * SIGMA_X)


def test_effective_hamiltonian_batches_over_time():
    params, mod = SystemParams(10.0, 2.0), biharmonic(3)
    t = np.linspace(0.0, mod.period, 7)
    batch = effective_hamiltonian(params, mod, t)
    assert batch.shape == (7, 2, 2)
    for k in range(7):
        np.testing.assert_allclose(batch[k], effective_hamiltonian(params, mod, t[k]))
        np.testing.assert_allclose(batch[k], batch[k].conj().T)


def test_hamiltonian_generalized_parity():
    params, mod = SystemParams(10.0), biharmonic(3, 0.4)
    t = np.linspace(0.0, mod.period, 64, endpoint=False)
    shifted = SIGMA_X @ effective_hamiltonian(params, mod, t + 0.5 * mod.period) @ SIGMA_X
    np.testing.assert_allclose(shifted, effective_hamiltonian(params, mod, t), atol=1e-11)


@pytest.mark.parametrize(
    "detuning, p, expected",
    [
        (0.0, 3, ParityCase.PARITY),
        (5.0, 3, ParityCase.DETUNED_ONLY),
        (0.0, 2, ParityCase.WAVEFORM_ONLY),
        (5.0, 2, ParityCase.BOTH_BROKEN),
    ],
)
def test_classify_parity(detuning, p, expected):
    result = classify_parity(SystemParams(10.0, detuning), biharmonic(p))
    assert result.case_label is expected
    assert result.has_generalized_parity == (expected is ParityCase.PARITY)
    assert result.detuning_residual == detuning


def test_classify_parity_multiharmonic():
    odd = Modulation(OMEGA_Z, (Harmonic(1, 20.0), Harmonic(3, 10.0, 0.3), Harmonic(5, 5.0, 1.1)))
    mixed = Modulation(OMEGA_Z, (Harmonic(1, 20.0), Harmonic(2, 10.0), Harmonic(3, 5.0), Harmonic(4, 2.0)))
    assert classify_parity(SystemParams(5.0), odd).has_generalized_parity
    assert classify_parity(SystemParams(5.0), mixed).case_label is ParityCase.WAVEFORM_ONLY
    assert classify_parity(SystemParams(5.0), mixed).waveform_residual > 1.0


def test_classify_parity_rejects_non_positive_tolerance():
    with pytest.raises(ValueError):
        classify_parity(SystemParams(1.0), biharmonic(3), tol=0.0)
