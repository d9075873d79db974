import numpy as np
import pytest

from fuzzyspec import extensions, flows, operators
from fuzzyspec.errors import DimensionError, ParameterError


@pytest.fixture(scope="module")
def spectral_op():
    return operators.build_interval_derivative(1, 128, "spectral")


@pytest.mark.parametrize("backend", [flows.SPECTRAL, flows.ANALYTIC])
def test_full_period_is_phase(spectral_op, backend):
    theta = 1.1
    ext = extensions.extend_by_boundary(spectral_op, extensions.ExtensionParameter.phase(theta))
    S = flows.flow_unitary(ext, 1.0, backend)
    assert S.unitarity_defect() < 1e-10
    assert np.abs(S.matrix - np.exp(-1j * theta) * np.eye(128)).max() < 1e-10


def test_backends_agree_on_grid_shift(spectral_op):
    ext = extensions.extend_by_boundary(spectral_op, extensions.ExtensionParameter.phase(0.4))
    a = 5 / 128
    A = flows.flow_unitary(ext, a, flows.ANALYTIC).matrix
    S = flows.flow_unitary(ext, a, flows.SPECTRAL).matrix
    assert np.abs(A - S).max() < 1e-9


def test_group_law_and_adjoint(spectral_op):
    ext = extensions.extend_by_boundary(spectral_op, extensions.ExtensionParameter.phase(2.0))
    f1 = flows.flow_unitary(ext, 0.3)
    f2 = flows.flow_unitary(ext, 0.45)
    both = flows.flow_unitary(ext, 0.75)
    assert np.abs(flows.compose([f1, f2]) - both.matrix).max() < 1e-10
    assert np.abs(flows.compose([f1, f1.adjoint()]) - np.eye(128)).max() < 1e-10


def test_analytic_requires_grid_multiple(spectral_op):
    ext = extensions.extend_by_boundary(spectral_op, extensions.ExtensionParameter.phase(0.0))
    with pytest.raises(ParameterError):
        flows.flow_unitary(ext, 0.3001, flows.ANALYTIC)


def test_compose_shape_mismatch():
    with pytest.raises(DimensionError):
        flows.compose([np.eye(2), np.eye(3)])


def test_local_phase_identity_when_equal_parameters(spectral_op):
    u = extensions.ExtensionParameter.phase(0.8)
    T = flows.local_phase_op(spectral_op, u, u, 0.25, flows.SPECTRAL)
    assert np.abs(T - np.eye(128)).max() < 1e-9


def test_local_phase_matrix_case():
    op = operators.build_interval_derivative(2, 64, "spectral")
    u = np.diag([1j, 1.0])
    up = np.array([[0, 1], [1, 0]], dtype=complex)
    T = flows.local_phase_op(op, extensions.ExtensionParameter(u),
                             extensions.ExtensionParameter(up), 0.25)
    err = flows.piecewise_errors(T, u, up, 0.25, 64, "derived")
    assert err["identity"] < 1e-12 and err["phase"] < 1e-12


def test_local_phase_rejects_bad_a(spectral_op):
    u = extensions.ExtensionParameter.phase(0.0)
    with pytest.raises(ParameterError):
        flows.local_phase_op(spectral_op, u, u, 1.5)


def test_bump_support():
    lam = np.linspace(0, 1, 101)
    b = flows.bump(lam, 0.2, 0.4)
    assert b[lam <= 0.2].max() < 1e-12 and b[lam >= 0.4].max() < 1e-12
    assert b.max() == pytest.approx(1.0)


def test_algebra_dimension_small():
    op = operators.build_matrix_model(operators.random_hermitian(4, 1), 1, 1)
    assert flows.generated_algebra_dimension(op, 6, 3) == 16
    assert flows.generated_algebra_dimension(op, 0, 3) == 1


def test_algebra_dimension_size_guard():
    op = operators.build_matrix_model(operators.random_hermitian(9, 1), 1, 1)
    with pytest.raises(ParameterError):
        flows.generated_algebra_dimension(op, 2, 1)
