import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzyspec import operators, uncertainty
from fuzzyspec.errors import ContractError, InfeasibleError


def variance(op, phi):
    w = op.weights
    phi = phi / np.sqrt(np.sum(w * np.abs(phi) ** 2))
    xphi = op.matrix @ phi
    m = np.real(np.sum(w * np.conj(phi) * xphi))
    return np.sum(w * np.abs(xphi) ** 2) - m * m, m


def test_interval_near_pi():
    op = operators.build_interval_derivative(1, 128)
    res = uncertainty.min_uncertainty(op, 1.0)
    assert abs(res.dx_min - np.pi) / np.pi < 0.01
    assert res.residual < 1e-10


def test_minimizer_reproduces_value():
    op = operators.build_interval_derivative(1, 64)
    res = uncertainty.min_uncertainty(op, -3.0)
    var, m = variance(op, res.minimizer)
    assert m == pytest.approx(-3.0, abs=1e-9)
    assert np.sqrt(var) == pytest.approx(res.dx_min, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_min_is_lower_bound(seed):
    op = operators.build_interval_derivative(1, 32)
    rng = np.random.default_rng(seed)
    B = op.domain.basis
    phi = B @ (rng.standard_normal(B.shape[1]) + 1j * rng.standard_normal(B.shape[1]))
    var, m = variance(op, phi)
    res = uncertainty.min_uncertainty(op, m, FORMS)
    assert res.dx_min <= np.sqrt(var) * (1 + 1e-9) + 1e-12


FORMS = uncertainty._DomainForms(operators.build_interval_derivative(1, 32))


def test_matrix_model_eigenvalues_reach_zero():
    M = operators.random_hermitian(5, 3)
    op = operators.build_matrix_model(M, 0)
    for ev in np.linalg.eigvalsh(M):
        assert uncertainty.min_uncertainty(op, ev).dx_min < 1e-6


def test_infeasible_mean():
    op = operators.build_matrix_model(np.diag([0.0, 1.0, 2.0]).astype(complex), 0)
    with pytest.raises(InfeasibleError) as exc:
        uncertainty.min_uncertainty(op, 5.0)
    assert exc.value.achievable == pytest.approx((0.0, 2.0))


def test_curve_records_skips():
    op = operators.build_matrix_model(np.diag([0.0, 1.0, 2.0]).astype(complex), 0)
    curve = uncertainty.uncertainty_curve(op, [0.5, 3.0])
    assert curve.xi_values == [0.5]
    assert curve.skipped and curve.skipped[0][0] == 3.0


def test_gup_sampling_small(beta_small):
    res = uncertainty.sample_gup(beta_small, 200, seed=1)
    assert res["violations"] == 0
    assert res["robertson_violations"] == 0
    again = uncertainty.sample_gup(beta_small, 200, seed=1)
    assert res == again


def test_gup_margin_positive_for_gaussian():
    m = operators.build_beta_algebra(1.0, 20.0, 512)
    p = m.grid.points
    phi = np.exp(-p**2 / 2).astype(complex)
    phi[[0, -1]] = 0
    out = uncertainty.gup_margin(m, phi)
    assert out["margin"] > 0


def test_beta_minimizer_close_to_bound():
    m = operators.build_beta_algebra(1.0, 40.0, 1024)
    res = uncertainty.min_uncertainty(m.x_op, 0.0)
    out = uncertainty.gup_margin(m, res.minimizer)
    assert res.dx_min == pytest.approx(1.0, rel=0.02)
    assert 0 <= out["margin"] / out["bound"] < 0.02


def test_fuzzyb_sequence(halfline_small):
    seq = uncertainty.fuzzyB_localizing_sequence(operators.build_halfline_derivative(1024, 12.0), 5)
    assert all(b < a for a, b in zip(seq.dx_values, seq.dx_values[1:]))
    assert seq.overlap_matrix.shape == (5, 5)
    assert 0 < seq.overlap_floor <= 1


def test_fuzzyb_requires_fuzzy_b(interval_small):
    with pytest.raises(ContractError):
        uncertainty.fuzzyB_localizing_sequence(interval_small)
