"""Concrete symmetric operators, each bundled with an explicit domain.

Interval models use ``N`` cells, i.e. ``N + 1`` grid points on ``[0, 1]`` per
copy; ambient coefficient vectors are copy-major (index ``i * (N + 1) + k``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ConfigurationError, SymmetryError
from .hilbert import Grid, Subspace, complement, hermitian_defect, orthonormalize

BACKENDS = ("finite-difference", "spectral")
SYMMETRY_TOL = 1e-8
MATRIX_MODEL_GENERATOR = "numpy.random.PCG64"


@dataclass(frozen=True)
class OperatorOnDomain:
    matrix: np.ndarray
    domain: Subspace
    grid: Grid | None
    copies: int = 1
    hbar: float = 1.0
    model_tag: str = "matrix"
    backend: str = "finite-difference"
    blocks: tuple = ()
    params: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        return self.domain.weights

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def family(self) -> str:
        return self.model_tag.split("[", 1)[0]

    @property
    def is_differential(self) -> bool:
        return self.family in ("interval", "halfline")

    def scale(self) -> float:
        return operator_scale(self.matrix, self.weights)

    def restrict(self, domain: Subspace) -> "OperatorOnDomain":
        return OperatorOnDomain(self.matrix, domain, self.grid, self.copies, self.hbar,
                                self.model_tag, self.backend, self.blocks, dict(self.params))


@dataclass(frozen=True)
class BetaAlgebraModel:
    beta: float
    x_op: OperatorOnDomain
    p_op: OperatorOnDomain
    cutoff: float

    @property
    def hbar(self) -> float:
        return self.x_op.hbar

    @property
    def grid(self) -> Grid:
        return self.x_op.grid


def operator_scale(M, weights) -> float:
    """Cheap upper bound on the weighted operator norm (max absolute row sum)."""
    s = np.sqrt(np.asarray(weights, dtype=float))
    A = (s[:, None] * np.asarray(M)) / s[None, :]
    return float(np.abs(A).sum(axis=1).max()) if A.size else 0.0


def central_difference(n_points: int, h: float) -> np.ndarray:
    """First-derivative matrix: central in the interior, one-sided at both ends."""
    D = np.zeros((n_points, n_points))
    k = np.arange(1, n_points - 1)
    D[k, k + 1] = 0.5 / h
    D[k, k - 1] = -0.5 / h
    D[0, :2] = [-1.0 / h, 1.0 / h]
    D[-1, -2:] = [-1.0 / h, 1.0 / h]
    return D


def _vanishing_domain(weights: np.ndarray, zero_at) -> Subspace:
    """Unit-vector basis of grid functions vanishing at the listed indices."""
    keep = np.setdiff1d(np.arange(weights.size), np.asarray(zero_at, dtype=int))
    basis = np.zeros((weights.size, keep.size), dtype=complex)
    basis[keep, np.arange(keep.size)] = 1.0 / np.sqrt(weights[keep])
    return Subspace(basis, weights)


# --- quasi-periodic realizations used by both the parents and the extensions ---

def quasi_periodic_fd(u: np.ndarray, n_cells: int) -> np.ndarray:
    """Central differences for i d/dlambda with ghosts phi(1) = u^-1 phi(0), phi(-h) = u phi(1-h).

    Acts on coordinates ``c[i, k] = phi_i(k h)``, ``k < n_cells``; Hermitian.
    """
    r = u.shape[0]
    h = 1.0 / n_cells
    C = np.zeros((n_cells, n_cells), dtype=complex)
    k = np.arange(n_cells - 1)
    C[k, k + 1] = 0.5j / h
    C[k + 1, k] = -0.5j / h
    X = np.kron(np.eye(r), C)
    last = n_cells - 1
    for i in range(r):
        for j in range(r):
            X[i * n_cells, j * n_cells + last] += -0.5j / h * u[i, j]
            X[i * n_cells + last, j * n_cells] += 0.5j / h * np.conj(u[j, i])
    return X


def _twisted_fourier(theta: float, n_cells: int) -> np.ndarray:
    lam = np.arange(n_cells) / n_cells
    m = np.fft.fftfreq(n_cells, d=1.0 / n_cells)
    F = sla.dft(n_cells, scale="sqrtn")
    E = np.exp(-1j * theta * lam)
    T = F.conj().T @ ((theta - 2 * np.pi * m)[:, None] * F)
    return E[:, None] * T * np.conj(E)[None, :]


def unitary_eig(u: np.ndarray):
    """Phases and orthonormal eigenvectors of a unitary (complex Schur form is diagonal)."""
    T, Q = sla.schur(np.asarray(u, dtype=complex), output="complex")
    return np.angle(np.diag(T)), Q


def quasi_periodic_spectral(u: np.ndarray, n_cells: int) -> np.ndarray:
    """Exact differentiation on the twisted exponentials e^{-i(theta+2 pi n) lambda}."""
    thetas, Q = unitary_eig(u)
    blocks = sla.block_diag(*[_twisted_fourier(t, n_cells) for t in thetas])
    R = np.kron(Q, np.eye(n_cells))
    X = R @ blocks @ R.conj().T
    return 0.5 * (X + X.conj().T)


def boundary_embedding(u: np.ndarray, n_cells: int) -> np.ndarray:
    """Map quasi-periodic coordinates into the ambient (N+1)-point grid; isometric up to factor h."""
    r = u.shape[0]
    n_pts = n_cells + 1
    J = np.zeros((r * n_pts, r * n_cells), dtype=complex)
    for i in range(r):
        J[i * n_pts + np.arange(n_cells), i * n_cells + np.arange(n_cells)] = 1.0
    uinv = np.asarray(u).conj().T
    for i in range(r):
        for j in range(r):
            J[i * n_pts + n_cells, j * n_cells] = uinv[i, j]
    return J


def embed(J: np.ndarray, X: np.ndarray, weights: np.ndarray, h: float) -> np.ndarray:
    """Ambient matrix ``J X J^dagger`` with ``J^dagger = h^-1 J^H W``."""
    return J @ X @ (J.conj().T * weights[None, :]) / h


# --- builders ---

def build_interval_derivative(r: int, N: int, backend: str = "finite-difference",
                              hbar: float = 1.0) -> OperatorOnDomain:
    """X = i d/dlambda on ``r`` copies of [0, 1] with phi vanishing at all 2r endpoints."""
    if N < 16:
        raise ConfigurationError(f"grid: N={N} too small, need N >= 16")
    if r < 1:
        raise ConfigurationError(f"copies: r={r} must be >= 1")
    if backend not in BACKENDS:
        raise ConfigurationError(f"backend: unknown backend {backend!r}")
    grid = Grid.uniform(0.0, 1.0, N + 1)
    weights = np.tile(grid.weights, r)
    if backend == "finite-difference":
        block = 1j * central_difference(N + 1, 1.0 / N)
        matrix = np.kron(np.eye(r), block)
    else:
        one = np.eye(1)
        block = embed(boundary_embedding(one, N), quasi_periodic_spectral(one, N),
                      grid.weights, 1.0 / N)
        matrix = np.kron(np.eye(r), block)
    ends = [i * (N + 1) + e for i in range(r) for e in (0, N)]
    return OperatorOnDomain(hbar * matrix, _vanishing_domain(weights, ends), grid, r, hbar,
                            f"interval[r={r},N={N}]", backend, params={"N": N})


def build_halfline_derivative(N: int, L: float, hbar: float = 1.0) -> OperatorOnDomain:
    """X = i d/dlambda on [0, L] standing in for [0, inf).

    The continuum domain only requires phi(0) = 0.  On the grid the far edge is an
    absorbing truncation: domain functions are also cut to zero at lambda = L so
    that the discrete operator stays symmetric.  This is recorded in the tag.
    """
    if L < 10:
        raise ConfigurationError(f"length: L={L} must be >= 10")
    if N < 16:
        raise ConfigurationError(f"grid: N={N} too small, need N >= 16")
    grid = Grid.uniform(0.0, L, N + 1)
    matrix = hbar * 1j * central_difference(N + 1, L / N)
    domain = _vanishing_domain(grid.weights, [0, N])
    return OperatorOnDomain(matrix, domain, grid, 1, hbar,
                            f"halfline[N={N},L={L:g},far-edge=absorbing-truncation]",
                            "finite-difference", params={"N": N, "L": float(L)})


def build_beta_algebra(beta: float, P: float, N: int, hbar: float = 1.0) -> BetaAlgebraModel:
    """Momentum realization of [x, p] = i hbar (1 + beta p^2) on [-P, P].

    ``x = i hbar (1 + beta p^2) d/dp`` is symmetric for the measure
    dp / (1 + beta p^2); the domain consists of functions vanishing at +-P.
    """
    if not beta > 0:
        raise ConfigurationError("beta: must be > 0")
    if P * np.sqrt(beta) < 10:
        raise ConfigurationError(f"cutoff: P*sqrt(beta)={P * np.sqrt(beta):.3g} must be >= 10")
    if N < 16:
        raise ConfigurationError(f"grid: N={N} too small, need N >= 16")
    grid = Grid.beta_momentum(P, N + 1, beta)
    p = grid.points
    x = hbar * 1j * (1.0 + beta * p**2)[:, None] * central_difference(N + 1, 2 * P / N)
    domain = _vanishing_domain(grid.weights, [0, N])
    params = {"N": N, "beta": float(beta), "P": float(P)}
    x_op = OperatorOnDomain(x.astype(complex), domain, grid, 1, hbar,
                            f"beta-x[beta={beta:g},P={P:g},N={N}]", params=params)
    p_op = OperatorOnDomain(np.diag(p).astype(complex), domain, grid, 1, hbar,
                            f"beta-p[beta={beta:g},P={P:g},N={N}]", params=params)
    return BetaAlgebraModel(float(beta), x_op, p_op, float(P))


def build_matrix_model(M, domain_codim: int, seed: int = 0) -> OperatorOnDomain:
    """Hermitian ``M`` acting on the orthogonal complement of ``r`` seeded random vectors.

    By dimension counting the restricted operator has deficiency indices (r, r).
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    r = int(domain_codim)
    if M.shape != (n, n):
        raise ConfigurationError("matrix must be square")
    if r and n < 2 * r + 2:
        raise ConfigurationError(f"ambient dim {n} must be >= 2r + 2 = {2 * r + 2}")
    weights = np.ones(n)
    defect = hermitian_defect(M, weights)
    if defect > 1e-9:
        raise SymmetryError("matrix model requires a Hermitian matrix", defect)
    grid = Grid(np.arange(n, dtype=float), weights, "lebesgue")
    if r == 0:
        domain = Subspace.full(weights)
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        V = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
        domain = complement(orthonormalize(V, weights))
    return OperatorOnDomain(M, domain, grid, 1, 1.0, f"matrix[N={n},r={r}]",
                            params={"seed": int(seed), "generator": MATRIX_MODEL_GENERATOR,
                                    "codim": r})


def random_hermitian(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + A.conj().T)


def direct_sum(*ops: OperatorOnDomain) -> OperatorOnDomain:
    """Block-diagonal combination; deficiency analysis treats the blocks separately."""
    matrix = sla.block_diag(*[op.matrix for op in ops])
    weights = np.concatenate([op.weights for op in ops])
    basis = sla.block_diag(*[op.domain.basis for op in ops])
    tag = "sum[" + ";".join(op.model_tag for op in ops) + "]"
    return OperatorOnDomain(matrix.astype(complex), Subspace(basis.astype(complex), weights),
                            None, 1, ops[0].hbar, tag, blocks=tuple(ops))


def check_symmetry(op: OperatorOnDomain) -> float:
    """max |<X phi, psi> - <phi, X psi>| over domain basis pairs, relative to ||X||."""
    B = op.domain.basis
    if B.shape[1] == 0:
        return 0.0
    w = op.weights
    XB = op.matrix @ B
    G1 = XB.conj().T @ (w[:, None] * B)
    G2 = B.conj().T @ (w[:, None] * XB)
    scale = op.scale()
    return float(np.abs(G1 - G2).max() / scale) if scale else 0.0


def commutator_test_states(m: BetaAlgebraModel) -> list[np.ndarray]:
    """Gaussians in momentum space supported well inside the cutoff."""
    p = m.grid.points
    s = 1.0 / np.sqrt(m.beta)
    out = []
    for centre in (0.0, s, -s):
        for width in (2.0 * s, 3.0 * s):
            out.append(np.exp(-((p - centre) ** 2) / (2 * width**2)).astype(complex))
    return out


def check_commutator(m: BetaAlgebraModel) -> float:
    """Max relative residual of [x, p] phi - i hbar (1 + beta p^2) phi over the test set."""
    x, p = m.x_op.matrix, m.p_op.matrix
    w = m.grid.weights
    target = 1j * m.hbar * (1.0 + m.beta * m.grid.points**2)
    worst = 0.0
    for phi in commutator_test_states(m):
        lhs = x @ (p @ phi) - p @ (x @ phi)
        res = lhs - target * phi
        rel = np.sqrt(np.sum(w * np.abs(res) ** 2) / np.sum(w * np.abs(phi) ** 2))
        worst = max(worst, float(rel))
    return worst
