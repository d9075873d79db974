import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzyspec import deficiency, operators
from fuzzyspec.errors import SymmetryError


def test_halfline_exponentials(halfline_small):
    rep = deficiency.deficiency_spaces(halfline_small, deficiency.ODE)
    assert (rep.r_plus, rep.r_minus) == (0, 1)
    assert rep.classification == "fuzzy-B"
    L = 12.0
    assert np.isclose(rep.diagnostics["minus"]["norm_sq"], (1 - np.exp(-2 * L)) / 2, rtol=1e-3)


@pytest.mark.parametrize("r", [1, 2])
def test_interval_fuzzy_a(r):
    rep = deficiency.deficiency_spaces(operators.build_interval_derivative(r, 64))
    assert rep.method == deficiency.ODE
    assert (rep.r_plus, rep.r_minus) == (r, r)
    assert rep.classification == "fuzzy-A"
    assert rep.discrete_indices == (2 * r, 2 * r)


def test_deficiency_vectors_orthogonal_to_range():
    op = operators.build_matrix_model(operators.random_hermitian(8, 2), 2, 2)
    rep = deficiency.deficiency_spaces(op)
    w = op.weights
    B = op.domain.basis
    for sign, space in ((1, rep.basis_plus), (-1, rep.basis_minus)):
        img = op.matrix @ B + sign * 1j * B
        assert np.abs(space.basis.conj().T @ (w[:, None] * img)).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(4, 8), st.integers(0, 1))
def test_matrix_indices_equal_codim(seed, n, codim):
    op = operators.build_matrix_model(operators.random_hermitian(n, seed), codim, seed)
    rep = deficiency.deficiency_spaces(op)
    assert rep.r_plus == rep.r_minus == codim


def test_full_domain_self_adjoint():
    op = operators.build_matrix_model(operators.random_hermitian(5, 1), 0)
    rep = deficiency.deficiency_spaces(op)
    assert rep.classification == "self-adjoint"


def test_mixed_classification():
    a = operators.build_matrix_model(operators.random_hermitian(4, 0), 0)
    b = operators.build_interval_derivative(1, 16)
    rep = deficiency.deficiency_spaces(operators.direct_sum(a, b))
    assert rep.classification == "mixed"
    assert len(rep.block_reports) == 2


def test_report_json_roundtrip(interval_small):
    rep = deficiency.deficiency_spaces(interval_small)
    data = json.loads(json.dumps(rep.to_json()))
    assert data["schema"] == deficiency.SCHEMA
    assert data["r_plus"] == 1


def test_rejects_asymmetric_operator():
    w = np.ones(3)
    from fuzzyspec.hilbert import Grid, Subspace
    op = operators.OperatorOnDomain(np.triu(np.ones((3, 3)), 1).astype(complex),
                                    Subspace.full(w), Grid.uniform(0, 1, 3))
    with pytest.raises(SymmetryError):
        deficiency.deficiency_spaces(op)


def test_cayley_transform_is_isometry():
    op = operators.build_matrix_model(operators.random_hermitian(8, 4), 2, 4)
    S = deficiency.cayley_transform(op)
    assert deficiency.verify_isometry(S) < 1e-10
    assert S.initial_space.dim == 6
