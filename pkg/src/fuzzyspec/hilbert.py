"""Weighted Hilbert-space substrate.

Every discretized function lives on a :class:`Grid` whose quadrature weights
define the inner product ``<f, g> = sum_k w_k conj(f_k) g_k``.  Matrices act on
coefficient vectors and are "Hermitian" when ``W M`` is Hermitian, ``W`` being
the diagonal weight matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, SymmetryError

RANK_TOL = 1e-8
CLUSTER_TOL = 1e-9
HERMITIAN_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    weights: np.ndarray
    measure_label: str = "lebesgue"

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 1 or points.shape != weights.shape:
            raise DimensionError("points and weights must be 1-D arrays of equal length")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if points.size > 1 and np.any(np.diff(points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.points.size

    @property
    def spacing(self) -> float:
        return float(self.points[1] - self.points[0])

    @classmethod
    def uniform(cls, start: float, stop: float, n_points: int) -> "Grid":
        """Uniform grid including both ends, trapezoid weights."""
        points = np.linspace(start, stop, n_points)
        h = (stop - start) / (n_points - 1)
        weights = np.full(n_points, h)
        weights[[0, -1]] = h / 2
        return cls(points, weights, "lebesgue")

    @classmethod
    def periodic(cls, start: float, stop: float, n_points: int) -> "Grid":
        """Uniform grid on [start, stop) with equal weights (rectangle = trapezoid for periodic data)."""
        h = (stop - start) / n_points
        return cls(start + h * np.arange(n_points), np.full(n_points, h), "lebesgue")

    @classmethod
    def beta_momentum(cls, cutoff: float, n_points: int, beta: float) -> "Grid":
        """Momentum grid on [-P, P] carrying the measure dp / (1 + beta p^2)."""
        base = cls.uniform(-cutoff, cutoff, n_points)
        return cls(base.points, base.weights / (1.0 + beta * base.points**2), "beta-measure")


def _weights(g) -> np.ndarray:
    return g.weights if isinstance(g, Grid) else np.asarray(g, dtype=float)


def inner_product(phi, psi, g) -> complex:
    w = _weights(g)
    phi = np.asarray(phi)
    psi = np.asarray(psi)
    if phi.shape[0] != w.size or psi.shape[0] != w.size:
        raise DimensionError(
            f"state lengths {phi.shape[0]}, {psi.shape[0]} do not match grid size {w.size}"
        )
    return complex(np.sum(w * np.conj(phi) * psi))


def norm(phi, g) -> float:
    w = _weights(g)
    return float(np.sqrt(np.sum(w * np.abs(phi) ** 2)))


def gram(V, g) -> np.ndarray:
    w = _weights(g)
    return V.conj().T @ (w[:, None] * V)


@dataclass(frozen=True)
class Subspace:
    """Column span with a basis orthonormal in the weighted inner product."""

    basis: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, v: np.ndarray) -> np.ndarray:
        """Weighted orthogonal projection of the column(s) ``v`` onto the span."""
        return self.basis @ (self.basis.conj().T @ (self.weights[:, None] * v if v.ndim == 2
                                                   else self.weights * v))

    def projector(self) -> np.ndarray:
        return self.basis @ (self.basis.conj().T * self.weights[None, :])

    def orthonormality_defect(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.max(np.abs(gram(self.basis, self.weights) - np.eye(self.dim))))

    @classmethod
    def empty(cls, weights) -> "Subspace":
        w = np.asarray(weights, dtype=float)
        return cls(np.zeros((w.size, 0), dtype=complex), w)

    @classmethod
    def full(cls, weights) -> "Subspace":
        w = np.asarray(weights, dtype=float)
        return cls(np.diag(1.0 / np.sqrt(w)).astype(complex), w)


def orthonormalize(V, g, tol: float = RANK_TOL) -> Subspace:
    """Rank-revealing modified Gram-Schmidt (two passes) in the weighted inner product.

    Columns whose residual norm falls below ``tol`` times the largest input
    column norm are dropped.
    """
    w = _weights(g)
    V = np.array(V, dtype=complex, ndmin=2)
    if V.shape[0] != w.size:
        raise DimensionError(f"matrix has {V.shape[0]} rows, grid has {w.size} points")
    norms = np.sqrt(np.sum(w[:, None] * np.abs(V) ** 2, axis=0)) if V.shape[1] else np.zeros(0)
    scale = float(norms.max()) if norms.size else 0.0
    if scale == 0.0:
        return Subspace.empty(w)
    kept: list[np.ndarray] = []
    for j in range(V.shape[1]):
        v = V[:, j].copy()
        for _ in range(2):
            for q in kept:
                v -= q * np.sum(w * np.conj(q) * v)
        nv = np.sqrt(np.sum(w * np.abs(v) ** 2))
        if nv > tol * scale:
            kept.append(v / nv)
    if not kept:
        return Subspace.empty(w)
    return Subspace(np.column_stack(kept), w)


def hermitian_defect(M, g) -> float:
    """Relative defect ``||A - A^H|| / ||A||`` with ``A = W^1/2 M W^-1/2``."""
    s = np.sqrt(_weights(g))
    A = (s[:, None] * M) / s[None, :]
    scale = np.linalg.norm(A) if A.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(A - A.conj().T) / scale)


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self):
        return self.eigenvalues.size

    def window(self, bound: float) -> np.ndarray:
        ev = self.eigenvalues
        return ev[np.abs(ev) <= bound]

    def multiplicity(self, value: float, tol: float = 1e-8) -> int:
        return int(np.count_nonzero(np.abs(self.eigenvalues - value) <= tol))


def _cluster_slices(evals: np.ndarray, tol: float):
    start = 0
    for k in range(1, evals.size + 1):
        if k == evals.size or evals[k] - evals[k - 1] > tol:
            yield slice(start, k)
            start = k


def eigh(M, g, *, check: bool = True) -> SpectralData:
    """Full eigendecomposition of a matrix Hermitian in the weighted inner product.

    Eigenvectors are W-orthonormal. Inside each degenerate cluster (gaps below
    ``1e-9 * ||M||``) the basis is rebuilt by Gram-Schmidt on the projections of
    the coordinate unit vectors, taken in index order, so the output does not
    depend on LAPACK's arbitrary choice within the eigenspace.
    """
    w = _weights(g)
    M = np.asarray(M)
    if M.shape != (w.size, w.size):
        raise DimensionError(f"matrix shape {M.shape} does not match grid size {w.size}")
    s = np.sqrt(w)
    A = (s[:, None] * M) / s[None, :]
    scale = np.linalg.norm(A) if A.size else 0.0
    if check and scale > 0:
        defect = np.linalg.norm(A - A.conj().T) / scale
        if defect > HERMITIAN_TOL:
            raise SymmetryError("matrix is not Hermitian in the weighted inner product", defect)
    A = 0.5 * (A + A.conj().T)
    evals, Q = sla.eigh(A)
    Q = Q.astype(complex, copy=False)
    radius = float(np.abs(evals).max()) if evals.size else 0.0
    for sl in _cluster_slices(evals, CLUSTER_TOL * max(radius, 1.0)):
        k = sl.stop - sl.start
        if k < 2:
            continue
        Qc = Q[:, sl]
        P = Qc @ Qc.conj().T
        new = []
        for col in range(P.shape[1]):
            v = P[:, col].copy()
            for q in new:
                v -= q * np.vdot(q, v)
            nv = np.linalg.norm(v)
            if nv > 1e-6:
                new.append(v / nv)
                if len(new) == k:
                    break
        Q[:, sl] = np.column_stack(new)
    # fix the sign/phase of each vector: largest-magnitude entry real positive
    idx = np.argmax(np.abs(Q), axis=0)
    phase = Q[idx, np.arange(Q.shape[1])]
    Q = Q * (np.abs(phase) / np.where(phase == 0, 1, phase))[None, :]
    return SpectralData(evals, Q / s[:, None])


def complement(S: Subspace) -> Subspace:
    """Weighted orthogonal complement, dim(S) + dim(result) = ambient_dim."""
    w = S.weights
    s = np.sqrt(w)
    if S.dim == 0:
        return Subspace.full(w)
    if S.dim >= S.ambient_dim:
        return Subspace.empty(w)
    Qs = s[:, None] * S.basis  # Euclidean-orthonormal image
    full, _ = np.linalg.qr(np.column_stack([Qs, np.eye(S.ambient_dim)]), mode="reduced")
    comp = full[:, S.dim:S.ambient_dim]
    # re-orthogonalize against S for safety
    comp = comp - Qs @ (Qs.conj().T @ comp)
    comp, _ = np.linalg.qr(comp)
    return Subspace(comp / s[:, None], w)


def subspace_angle(A: Subspace, B: Subspace) -> float:
    """Largest principal angle between two subspaces of equal dimension."""
    if A.dim != B.dim:
        return float(np.pi / 2)
    if A.dim == 0:
        return 0.0
    G = A.basis.conj().T @ (A.weights[:, None] * B.basis)
    sv = np.linalg.svd(G, compute_uv=False)
    return float(np.arccos(np.clip(sv.min(), -1.0, 1.0)))


def span(V, g, tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis of the column span via SVD (fast path for large inputs)."""
    w = _weights(g)
    V = np.asarray(V, dtype=complex)
    if V.shape[1] == 0:
        return Subspace.empty(w)
    s = np.sqrt(w)
    U, sv, _ = np.linalg.svd(s[:, None] * V, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return Subspace.empty(w)
    rank = int(np.count_nonzero(sv > tol * sv[0]))
    return Subspace(U[:, :rank] / s[:, None], w)


def range_complement(V, g, tol: float = RANK_TOL) -> Subspace:
    """Weighted orthogonal complement of the column span of ``V``."""
    w = _weights(g)
    s = np.sqrt(w)
    V = np.asarray(V, dtype=complex)
    if V.shape[1] == 0:
        return Subspace.full(w)
    U, sv, _ = np.linalg.svd(s[:, None] * V, full_matrices=True)
    rank = int(np.count_nonzero(sv > tol * sv[0])) if sv.size and sv[0] > 0 else 0
    return Subspace(U[:, rank:] / s[:, None], w)
