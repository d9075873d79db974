import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzyspec import deficiency, extensions, operators
from fuzzyspec.errors import ConfigurationError, EigenvalueOneError, ParameterError
from fuzzyspec.hilbert import hermitian_defect


def test_parameter_validation():
    with pytest.raises(ParameterError):
        extensions.ExtensionParameter(np.array([[2.0]]))
    p = extensions.ExtensionParameter.phase(0.3)
    assert p.r == 1
    assert json.loads(json.dumps(p.to_json()))["u"][0] == pytest.approx([np.cos(0.3), np.sin(0.3)])


@pytest.mark.parametrize("backend", operators.BACKENDS)
def test_boundary_extension_hermitian(backend):
    op = operators.build_interval_derivative(2, 64, backend)
    u = extensions.ExtensionParameter(np.array([[0, 1j], [1, 0]]))
    ext = extensions.extend_by_boundary(op, u)
    assert hermitian_defect(ext.matrix, ext.weights) < 1e-10


def test_boundary_extension_wrong_size(interval_small):
    with pytest.raises(ConfigurationError):
        extensions.extend_by_boundary(interval_small, extensions.ExtensionParameter(np.eye(2)))


def test_fd_extension_agrees_with_parent(interval_small):
    ext = extensions.extend_by_boundary(interval_small, extensions.ExtensionParameter.phase(1.0))
    assert extensions.parent_agreement(ext, interval_small) < 1e-10


def test_boundary_condition_in_eigenvectors():
    op = operators.build_interval_derivative(1, 128, "spectral")
    theta = 0.9
    ext = extensions.extend_by_boundary(op, extensions.ExtensionParameter.phase(theta))
    sd = extensions.spectrum(ext)
    k = int(np.argmin(np.abs(sd.eigenvalues - theta)))
    phi = ext.to_ambient(sd.eigenvectors[:, k])
    assert np.isclose(phi[0], np.exp(1j * theta) * phi[-1])
    assert np.array_equal(ext.from_ambient(phi), sd.eigenvectors[:, k])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_cayley_extension_extends_parent(seed):
    op = operators.build_matrix_model(operators.random_hermitian(6, seed), 2, seed)
    U = extensions.random_extension_unitaries(op, 1, seed)[0]
    w = op.weights
    assert np.abs(U.conj().T @ (w[:, None] * U) / w[None, :] - np.eye(6)).max() < 1e-10
    rng = np.random.Generator(np.random.PCG64(seed))
    ext = extensions.extend_by_cayley(op, extensions._random_unitary(2, rng))
    assert hermitian_defect(ext.matrix, ext.weights) < 1e-8
    assert extensions.parent_agreement(ext, op) < 1e-8


def test_inverse_cayley_rejects_eigenvalue_one():
    U = np.diag([1.0, -1.0, 1j])
    with pytest.raises(EigenvalueOneError) as exc:
        extensions.inverse_cayley(U, np.ones(3))
    assert abs(abs(exc.value.flat_direction[0]) - 1) < 1e-12


def test_inverse_cayley_of_known_unitary():
    X = np.diag([0.5, -2.0, 3.0])
    U = (X - 1j * np.eye(3)) @ np.linalg.inv(X + 1j * np.eye(3))
    assert np.allclose(extensions.inverse_cayley(U, np.ones(3)), X)


def test_degenerate_extension_multiplicity():
    op = operators.build_interval_derivative(2, 64, "spectral")
    u = extensions.extension_with_degenerate_eigenvalue(op, 1.3)
    sd = extensions.spectrum(extensions.extend_by_boundary(op, u))
    assert sd.multiplicity(1.3) == 2


def test_degenerate_extension_needs_interval():
    op = operators.build_matrix_model(operators.random_hermitian(4, 0), 1)
    with pytest.raises(ConfigurationError):
        extensions.extension_with_degenerate_eigenvalue(op, 0.0)


def test_isospinor_expansion_of_ket():
    op = operators.build_interval_derivative(2, 256)
    kets = extensions.isospinor_kets(op, [0.0, 4.0])
    coeffs = extensions.isospinor_expansion(kets[:, 1, 1], op, [0.0, 4.0])
    assert coeffs.shape == (2, 2)
    assert abs(coeffs[1, 1] - 1) < 1e-12
    assert np.abs(coeffs[:, 0]).max() == 0.0


def test_copy_mixing_is_gauge_map():
    op = operators.build_interval_derivative(2, 32)
    u = np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]])
    d = extensions.verify_gauge_isometry(extensions.copy_mixing(u, op), op)
    assert max(d.values()) < 1e-10


def test_cross_copy_phase_is_not_commuting():
    op = operators.build_interval_derivative(1, 64)
    lam = op.grid.points
    G = np.diag(np.exp(1j * lam))
    d = extensions.verify_gauge_isometry(G, op)
    assert d["isometry_defect"] < 1e-12
    assert d["commutator_defect"] > 0.1


def test_cayley_unitary_shape_check():
    op = operators.build_matrix_model(operators.random_hermitian(6, 1), 2, 1)
    with pytest.raises(ParameterError):
        extensions.cayley_unitary(op, np.eye(3))


def test_extension_json(interval_small):
    ext = extensions.extend_by_boundary(interval_small, extensions.ExtensionParameter.phase(0.0))
    data = ext.to_json(window=10.0)
    assert data["parent"] == interval_small.model_tag
    assert all(abs(x) <= 10.0 for x in data["eigenvalues"])
    assert deficiency.SCHEMA == data["schema"]
