"""Self-adjoint extensions: boundary-condition and inverse-Cayley constructions.

Interval extensions live on quasi-periodic coordinates ``c[i, k] = phi_i(k h)``
(``k < N``, weights ``h``); the value at lambda = 1 is implied by the boundary
relation phi(0) = u phi(1) and restored by :attr:`SelfAdjointExtension.embedding`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .deficiency import CODIM, SCHEMA, cayley_transform, deficiency_spaces
from .errors import ConfigurationError, EigenvalueOneError, ParameterError
from .hilbert import SpectralData, eigh
from .operators import OperatorOnDomain

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class ExtensionParameter:
    u: np.ndarray
    label: str = ""

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.u, dtype=complex))
        if u.shape[0] != u.shape[1]:
            raise ParameterError(f"u must be square, got shape {u.shape}")
        defect = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
        if defect > UNITARY_TOL:
            raise ParameterError(f"u is not unitary (defect {defect:.2e})")
        object.__setattr__(self, "u", u)
        if not self.label:
            object.__setattr__(self, "label", f"u{u.shape[0]}")

    @property
    def r(self) -> int:
        return self.u.shape[0]

    @classmethod
    def phase(cls, theta: float) -> "ExtensionParameter":
        return cls(np.array([[np.exp(1j * theta)]]), f"theta={theta:.17g}")

    def to_json(self) -> dict:
        return {"label": self.label,
                "u": [[float(z.real), float(z.imag)] for z in self.u.ravel()]}


@dataclass
class SelfAdjointExtension:
    matrix: np.ndarray
    weights: np.ndarray
    parameter: ExtensionParameter | None
    parent_tag: str
    embedding: np.ndarray | None = None
    backend: str = "finite-difference"
    n_cells: int | None = None
    spectral: SpectralData | None = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells if self.n_cells else 1.0

    def to_ambient(self, coords: np.ndarray) -> np.ndarray:
        return coords if self.embedding is None else self.embedding @ coords

    def from_ambient(self, phi: np.ndarray) -> np.ndarray:
        """Coordinates of an ambient vector (drops the implied lambda = 1 samples)."""
        if self.embedding is None:
            return phi
        n = self.n_cells
        r = self.matrix.shape[0] // n
        return np.concatenate([phi[i * (n + 1):i * (n + 1) + n] for i in range(r)])

    def to_json(self, window: float | None = None) -> dict:
        sd = spectrum(self)
        ev = sd.eigenvalues if window is None else sd.window(window)
        return {
            "schema": SCHEMA,
            "parent": self.parent_tag,
            "backend": self.backend,
            "parameter": self.parameter.to_json() if self.parameter else None,
            "window": window,
            "eigenvalues": [float(x) for x in ev],
        }


def _check_interval(op: OperatorOnDomain):
    if op.family != "interval":
        raise ConfigurationError(f"expected an interval-derivative model, got {op.model_tag}")


def extend_by_boundary(op: OperatorOnDomain, u: ExtensionParameter) -> SelfAdjointExtension:
    """X_u: i hbar d/dlambda on functions with phi_i(0) = sum_j u_ij phi_j(1)."""
    _check_interval(op)
    if u.r != op.copies:
        raise ConfigurationError(f"u is {u.r}x{u.r} but the model has {op.copies} copies")
    n = op.params["N"]
    if op.backend == "spectral":
        X = ops.quasi_periodic_spectral(u.u, n)
    else:
        X = ops.quasi_periodic_fd(u.u, n)
    return SelfAdjointExtension(op.hbar * X, np.full(X.shape[0], 1.0 / n), u, op.model_tag,
                                ops.boundary_embedding(u.u, n), op.backend, n)


def parent_agreement(ext: SelfAdjointExtension, op: OperatorOnDomain) -> float:
    """Relative mismatch between the extension and its parent on the parent domain.

    For matrix-level extensions this is ``||X_e phi - X phi||`` on the domain basis.
    For grid extensions the comparison is between matrix elements
    ``<psi, X_e phi>`` and ``<psi, X phi>`` for psi, phi in the domain: the parent
    uses one-sided stencils at the endpoints, which only the compression hides.
    """
    B = op.domain.basis
    scale = op.scale()
    if ext.embedding is None:
        diff = ext.matrix @ B - op.matrix @ B
        return float(np.abs(diff).max() / scale)
    Bc = np.vstack([B[i * (ext.n_cells + 1):i * (ext.n_cells + 1) + ext.n_cells]
                    for i in range(op.copies)])
    g_ext = Bc.conj().T @ (ext.weights[:, None] * (ext.matrix @ Bc))
    g_par = B.conj().T @ (op.weights[:, None] * (op.matrix @ B))
    return float(np.abs(g_ext - g_par).max() / scale)


def _random_unitary(r: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))[None, :]


def cayley_unitary(op: OperatorOnDomain, s_prime, report=None) -> np.ndarray:
    """U = S (+) S' on the ambient space, S the Cayley transform and S': L+ -> L-."""
    report = report or deficiency_spaces(op, CODIM)
    bp, bm = report.basis_plus.basis, report.basis_minus.basis
    s_prime = np.atleast_2d(np.asarray(s_prime, dtype=complex))
    if s_prime.shape != (bm.shape[1], bp.shape[1]):
        raise ParameterError(
            f"s_prime must map L+ (dim {bp.shape[1]}) to L- (dim {bm.shape[1]}), got {s_prime.shape}")
    if np.abs(s_prime.conj().T @ s_prime - np.eye(s_prime.shape[1])).max() > 1e-10:
        raise ParameterError("s_prime is not an isometry")
    w = op.weights
    S = cayley_transform(op).matrix
    return S + bm @ s_prime @ (bp.conj().T * w[None, :])


def inverse_cayley(U: np.ndarray, weights: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """X = i (1 + U)(1 - U)^-1; refuses when 1 - U is (numerically) singular."""
    s = np.sqrt(weights)
    V = (s[:, None] * U) / s[None, :]
    n = V.shape[0]
    _, sv, vh = np.linalg.svd(np.eye(n) - V)
    if sv[-1] < tol:
        raise EigenvalueOneError(
            f"U has eigenvalue 1 (smallest singular value of 1-U is {sv[-1]:.2e})",
            vh[-1].conj() / s)
    Xs = 1j * (np.eye(n) + V) @ np.linalg.inv(np.eye(n) - V)
    Xs = 0.5 * (Xs + Xs.conj().T)
    return Xs * s[None, :] / s[:, None]


def extend_by_cayley(op: OperatorOnDomain, s_prime, report=None) -> SelfAdjointExtension:
    """Inverse Cayley transform of the unitary completion S (+) S'."""
    U = cayley_unitary(op, s_prime, report)
    X = inverse_cayley(U, op.weights)
    s_prime = np.atleast_2d(np.asarray(s_prime, dtype=complex))
    param = ExtensionParameter(s_prime, "s_prime") if s_prime.size else None
    return SelfAdjointExtension(X, op.weights.copy(), param, op.model_tag, backend="cayley")


def random_extension_unitaries(op: OperatorOnDomain, count: int, seed: int = 0) -> list[np.ndarray]:
    report = deficiency_spaces(op, CODIM)
    rng = np.random.Generator(np.random.PCG64(seed))
    return [cayley_unitary(op, _random_unitary(report.r_plus, rng), report) for _ in range(count)]


def spectrum(ext: SelfAdjointExtension) -> SpectralData:
    """Spectral data of the extension, computed once and cached on the instance."""
    if ext.spectral is None:
        ext.spectral = eigh(ext.matrix, ext.weights)
    return ext.spectral


def extension_with_degenerate_eigenvalue(op: OperatorOnDomain, xi: float) -> ExtensionParameter:
    """u = exp(i xi / hbar) * identity: every copy then admits exp(-i xi lambda / hbar)."""
    _check_interval(op)
    u = np.exp(1j * xi / op.hbar) * np.eye(op.copies)
    return ExtensionParameter(u, f"degenerate@xi={xi:.17g}")


def isospinor_kets(op: OperatorOnDomain, xi_grid) -> np.ndarray:
    """Normalized |xi, i> = exp(-i xi lambda / hbar) on copy i; shape (ambient, len(xi), r)."""
    _check_interval(op)
    lam = op.grid.points
    n_pts = lam.size
    xi = np.asarray(xi_grid, dtype=float)
    wave = np.exp(-1j * np.outer(lam, xi) / op.hbar)
    wave /= np.sqrt(np.sum(op.grid.weights[:, None] * np.abs(wave) ** 2, axis=0))[None, :]
    kets = np.zeros((op.ambient_dim, xi.size, op.copies), dtype=complex)
    for i in range(op.copies):
        kets[i * n_pts:(i + 1) * n_pts, :, i] = wave
    return kets


def isospinor_expansion(phi, op: OperatorOnDomain, xi_grid) -> np.ndarray:
    """phi_i(xi) = <xi, i | phi> as an array of shape (len(xi_grid), r)."""
    kets = isospinor_kets(op, xi_grid)
    w = op.weights
    return np.einsum("axr,a->xr", kets.conj(), w * np.asarray(phi))


def verify_gauge_isometry(G, op: OperatorOnDomain) -> dict:
    """Defects of G as a gauge map: commutation with X, domain preservation, isometry."""
    G = np.asarray(G)
    B = op.domain.basis
    w = op.weights
    X = op.matrix
    GB = G @ B
    comm = G @ (X @ B) - X @ GB
    outside = GB - op.domain.project(GB)
    col_norm = lambda M: np.sqrt(np.sum(w[:, None] * np.abs(M) ** 2, axis=0))  # noqa: E731
    iso = np.abs(col_norm(GB) - col_norm(B))
    return {
        "commutator_defect": float(col_norm(comm).max()),
        "domain_preservation_defect": float(col_norm(outside).max()),
        "isometry_defect": float(iso.max()),
    }


def copy_mixing(u, op: OperatorOnDomain) -> np.ndarray:
    """Constant U(r) rotation of the copy index, identity along lambda."""
    return np.kron(np.asarray(u, dtype=complex), np.eye(op.grid.points.size))
