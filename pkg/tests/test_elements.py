import dataclasses

import numpy as np
import pytest
from conftest import OMEGA_Z

from fluofloq import (
    AliasingError,
    Backend,
    Branch,
    Modulation,
    ParityReport,
    SystemParams,
    classify_parity,
    parity_analysis,
    parity_eigenvalues,
    solve_floquet,
    transition_elements,
    vanvleck_elements,
    vanvleck_solution,
    verify_identities,
)

PLUS, MINUS = Branch.PLUS, Branch.MINUS


def _analysis(params, mod):
    sol = solve_floquet(params, mod)
    elems = transition_elements(sol)
    return sol, elems, parity_analysis(sol, elems, classify_parity(params, mod), mod, params)


def test_mollow_elements(mollow):
    elems = transition_elements(solve_floquet(*mollow))
    assert elems.backend is Backend.MONODROMY
    assert elems.harmonics[0] == -16 and elems.harmonics[-1] == 16
    np.testing.assert_allclose(np.abs(elems.x_plus[..., elems.l_max]), 0.5, atol=1e-9)
    others = np.delete(elems.x_plus, elems.l_max, axis=2)
    np.testing.assert_allclose(others, 0.0, atol=1e-9)
    assert elems.parseval() == pytest.approx(1.0, abs=1e-10)
    assert elems.element(PLUS, PLUS, 40) == 0j


def test_undriven_detuned_elements():
    elems = transition_elements(solve_floquet(SystemParams(0.0, 2.0), Modulation.unmodulated(OMEGA_Z)))
    assert elems.element(PLUS, MINUS, 0) == pytest.approx(1.0, abs=1e-12)
    assert abs(elems.element(MINUS, PLUS, 0)) < 1e-12
    assert abs(elems.element(PLUS, PLUS, 0)) < 1e-12


@pytest.mark.parametrize("case", ["parity_p3", "detuned_p3", "phase0_p2", "quarter_p2"])
def test_parseval_and_conjugation(case, request):
    elems = transition_elements(solve_floquet(*request.getfixturevalue(case)))
    assert elems.parseval() == pytest.approx(1.0, abs=1e-8)
    assert elems.conjugation_residual() < 1e-12


def test_l_max_range(parity_p3):
    sol = solve_floquet(*parity_p3)
    for l_max in (0, sol.fourier_cutoff + 1):
        with pytest.raises(ValueError):
            transition_elements(sol, l_max)


def test_aliasing_is_detected(parity_p3):
    with pytest.raises(AliasingError):
        transition_elements(solve_floquet(*parity_p3), l_max=2)


def test_mollow_parity_eigenvalues(mollow):
    sol = solve_floquet(*mollow)
    report = parity_eigenvalues(sol, classify_parity(*mollow))
    assert report.has_lambdas
    assert (report.lambda_plus, report.lambda_minus) == (1.0, -1.0)
    assert report.lambda_residual < 1e-9


def test_generalized_parity_identities(parity_p3):
    _, _, report = _analysis(*parity_p3)
    assert report.has_lambdas
    assert report.lambda_plus * report.lambda_minus == -1.0
    assert report.lambda_residual < 1e-8
    assert report.signed_mirror_residual < 1e-8
    assert report.modulus_mirror_residual < 1e-8
    assert report.even_harmonic_residuals is None


def test_detuning_breaks_magnitude_identity(detuned_p3):
    _, _, report = _analysis(*detuned_p3)
    assert not report.has_lambdas
    assert report.signed_mirror_residual is None
    assert report.modulus_mirror_residual > 1e-4


def test_even_harmonic_without_symmetry(phase0_p2):
    _, _, report = _analysis(*phase0_p2)
    assert report.lambda_plus is None
    assert report.lambda_residual > 1e-2
    assert report.even_harmonic_residuals is None


def test_even_harmonic_relations(quarter_p2):
    _, elems, report = _analysis(*quarter_p2)
    assert report.lambda_residual > 1e-2
    assert report.signed_mirror_residual is None
    assert report.even_harmonic_residuals is not None
    assert max(report.even_harmonic_residuals) < 1e-8
    for l in (1, 2):
        expected = (-1) ** l * elems.element(PLUS, PLUS, l)
        assert elems.element(PLUS, PLUS, -l) == pytest.approx(expected, abs=1e-8)


def _rotate_minus_mode(elems, chi):
    """− モードに位相 e^{iχ} を掛けたときの遷移行列要素を返します。"""
    x_plus = elems.x_plus.copy()
    x_minus = elems.x_minus.copy()
    x_plus[MINUS, PLUS] *= np.exp(-1.0j * chi)
    x_plus[PLUS, MINUS] *= np.exp(1.0j * chi)
    x_minus[MINUS, PLUS] *= np.exp(-1.0j * chi)
    x_minus[PLUS, MINUS] *= np.exp(1.0j * chi)
    return dataclasses.replace(elems, x_plus=x_plus, x_minus=x_minus)


def test_vanvleck_even_harmonic_relations_use_fixed_phases(quarter_p2):
    params, mod = quarter_p2
    elems = vanvleck_elements(vanvleck_solution(params, mod))
    assert elems.backend is Backend.VANVLECK
    bare = ParityReport(None, None, 0.0)
    even_pp, even_mp = verify_identities(elems, bare, mod, params).even_harmonic_residuals
    assert even_pp < 1e-10
    assert even_mp < 1e-10

    rotated = _rotate_minus_mode(elems, 0.3)
    assert rotated.conjugation_residual() < 1e-12
    _, rotated_mp = verify_identities(rotated, bare, mod, params).even_harmonic_residuals
    assert rotated_mp > 1e-2


def test_monodromy_even_harmonic_relations_align_phases(quarter_p2):
    params, mod = quarter_p2
    _, elems, report = _analysis(params, mod)
    rotated = verify_identities(_rotate_minus_mode(elems, 0.3), report, mod, params)
    assert rotated.even_harmonic_residuals[1] == pytest.approx(report.even_harmonic_residuals[1], abs=1e-10)


def test_identities_do_not_depend_on_mode_phases(parity_p3):
    params, mod = parity_p3
    sol, elems, report = _analysis(params, mod)
    phases = np.exp(1.0j * np.array([0.7, -2.1]))
    rotated = dataclasses.replace(sol, modes=sol.modes * phases[:, None, None])
    rotated_elems = transition_elements(rotated)
    np.testing.assert_allclose(np.abs(rotated_elems.x_plus), np.abs(elems.x_plus), atol=1e-14)
    np.testing.assert_allclose(rotated_elems.x_plus[PLUS, PLUS], elems.x_plus[PLUS, PLUS], atol=1e-14)
    rotated_report = parity_analysis(rotated, rotated_elems, classify_parity(params, mod), mod, params)
    assert rotated_report.modulus_mirror_residual == pytest.approx(report.modulus_mirror_residual, abs=1e-12)


def test_verify_identities_rejects_non_finite(parity_p3):
    params, mod = parity_p3
    sol, elems, report = _analysis(params, mod)
    broken = dataclasses.replace(elems, x_plus=np.full_like(elems.x_plus, np.nan))
    with pytest.raises(ValueError):
        verify_identities(broken, report, mod, params)


def test_report_to_dict(parity_p3):
    _, _, report = _analysis(*parity_p3)
    data = report.to_dict()
    assert data["lambda_plus"] in (1.0, -1.0)
    assert data["even_harmonic_residuals"] is None
    assert set(data) == {
        "lambda_plus",
        "lambda_minus",
        "lambda_residual",
        "signed_mirror_residual",
        "modulus_mirror_residual",
        "even_harmonic_residuals",
    }
