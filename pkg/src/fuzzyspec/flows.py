"""Flow unitaries S_u(a) = exp(-i a X_u / hbar), compositions and the local phase operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .extensions import (ExtensionParameter, SelfAdjointExtension, extend_by_boundary,
                         random_extension_unitaries, spectrum)
from .operators import OperatorOnDomain

SPECTRAL = "spectral-exponential"
ANALYTIC = "analytic-wrap"


@dataclass(frozen=True)
class FlowUnitary:
    matrix: np.ndarray
    parameter_a: float
    extension_label: str
    backend: str
    weights: np.ndarray

    def unitarity_defect(self) -> float:
        U = self.matrix
        w = self.weights
        G = U.conj().T @ (w[:, None] * U) / w[None, :]
        return float(np.abs(G - np.eye(U.shape[0])).max())

    def adjoint(self) -> "FlowUnitary":
        w = self.weights
        Ud = (self.matrix.conj().T * w[None, :]) / w[:, None]
        return FlowUnitary(Ud, -self.parameter_a, self.extension_label, self.backend, w)


def wrap_translation(u: np.ndarray, n_cells: int, shift: int) -> np.ndarray:
    """Exact translation phi(lambda) -> phi(lambda + shift h) with phi(lambda + 1) = u^-1 phi(lambda)."""
    u = np.atleast_2d(u)
    r = u.shape[0]
    uinv = u.conj().T
    T = np.zeros((r * n_cells, r * n_cells), dtype=complex)
    for k in range(n_cells):
        q, src = divmod(k + shift, n_cells)
        factor = np.linalg.matrix_power(uinv if q >= 0 else u, abs(q))
        for i in range(r):
            for j in range(r):
                T[i * n_cells + k, j * n_cells + src] = factor[i, j]
    return T


def flow_unitary(ext: SelfAdjointExtension, a: float, backend: str = SPECTRAL,
                 hbar: float = 1.0) -> FlowUnitary:
    label = ext.parameter.label if ext.parameter is not None else ext.parent_tag
    if backend == SPECTRAL:
        sd = spectrum(ext)
        V = sd.eigenvectors
        phases = np.exp(-1j * a * sd.eigenvalues / hbar)
        U = (V * phases[None, :]) @ (V.conj().T * ext.weights[None, :])
    elif backend == ANALYTIC:
        if ext.n_cells is None or ext.parameter is None:
            raise ParameterError("analytic-wrap backend needs an interval boundary extension")
        steps = a * ext.n_cells
        shift = int(round(steps))
        if abs(steps - shift) > 1e-9:
            raise ParameterError(f"a={a} is not a multiple of the grid spacing 1/{ext.n_cells}")
        U = wrap_translation(ext.parameter.u, ext.n_cells, shift)
    else:
        raise ParameterError(f"unknown backend {backend!r}")
    return FlowUnitary(U, float(a), label, backend, ext.weights)


def compose(flows) -> np.ndarray:
    """Ordered product; the rightmost factor acts first."""
    mats = [f.matrix if isinstance(f, FlowUnitary) else np.asarray(f) for f in flows]
    if not mats:
        raise DimensionError("nothing to compose")
    out = mats[0]
    for m in mats[1:]:
        if m.shape != out.shape:
            raise DimensionError(f"cannot compose shapes {out.shape} and {m.shape}")
        out = out @ m
    return out


def local_phase_op(op: OperatorOnDomain, u: ExtensionParameter, u_prime: ExtensionParameter,
                   a: float, backend: str = ANALYTIC) -> np.ndarray:
    """T = S_{u'}(-a) S_u(a) on the interval coordinates (see :func:`phase_law`)."""
    if not 0 < a < 1:
        raise ParameterError(f"a={a} must lie in (0, 1)")
    fwd = flow_unitary(extend_by_boundary(op, u), a, backend, op.hbar)
    back = flow_unitary(extend_by_boundary(op, u_prime), -a, backend, op.hbar)
    return compose([back, fwd])


def phase_law(u, u_prime, a: float, law: str = "derived"):
    """Piecewise action of T as (identity interval, phase interval, phase matrix).

    ``derived``: what exp(-i a X_u) with X = i d/dlambda and phi(0) = u phi(1)
    produce, i.e. phi(lambda) -> phi(lambda + a) and phi(lambda + 1) = u^-1 phi(lambda).
    ``stated``: identity on (0, 1 - a) and (u')^-1 u on (1 - a, 1).
    """
    u = np.atleast_2d(u)
    up = np.atleast_2d(u_prime)
    if law == "derived":
        return (a, 1.0), (0.0, a), up @ u.conj().T
    if law == "stated":
        return (0.0, 1.0 - a), (1.0 - a, 1.0), up.conj().T @ u
    raise ValueError(f"unknown law {law!r}")


def bump(lam: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Squared-cosine bump supported on [lo, hi]."""
    c, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    out = np.cos(0.5 * np.pi * (lam - c) / half) ** 2
    out[np.abs(lam - c) >= half] = 0.0
    return out


def piecewise_errors(T: np.ndarray, u, u_prime, a: float, n_cells: int,
                     law: str = "derived", margin_cells: int = 2, seed: int = 0) -> dict:
    """Sup error of T against a piecewise law on bumps kept away from {0, 1-a, a, 1}.

    Each bump is tensored with a seeded random copy-space vector, so matrix
    phases are tested on generic isospin directions.
    """
    u = np.atleast_2d(u)
    r = u.shape[0]
    h = 1.0 / n_cells
    lam = np.arange(n_cells) * h
    ident, rot, phase = phase_law(u, u_prime, a, law)
    rng = np.random.Generator(np.random.PCG64(seed))
    m = (margin_cells + 1) * h
    cuts = sorted({0.0, a, 1.0 - a, 1.0})
    out = {"identity": 0.0, "phase": 0.0, "profile": np.zeros(r * n_cells)}
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 2 * m + 4 * h:
            continue
        mid = 0.5 * (lo + hi)
        if ident[0] <= mid <= ident[1]:
            key, M = "identity", np.eye(r)
        elif rot[0] <= mid <= rot[1]:
            key, M = "phase", phase
        else:
            continue
        b = bump(lam, lo + m, hi - m)
        v = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        v /= np.linalg.norm(v)
        phi = np.kron(v, b)
        expected = np.kron(M @ v, b)
        err = np.abs(T @ phi - expected)
        out[key] = max(out[key], float(err.max()))
        out["profile"] = np.maximum(out["profile"], err)
    return out


def generated_algebra_dimension(model: OperatorOnDomain, max_word_length: int,
                                extension_set_size: int, seed: int = 0,
                                tol: float = 1e-8) -> int:
    """Dimension of the linear span of words (length <= L) in extension unitaries and adjoints.

    Breadth-first; a word whose matrix is already in the span is not extended,
    which leaves the span unchanged because every continuation of it is a
    combination of continuations of shorter or equal words.
    """
    n = model.ambient_dim
    if n > 8:
        raise ParameterError(f"ambient dim {n} exceeds 8")
    w = model.weights
    gens = []
    for U in random_extension_unitaries(model, extension_set_size, seed):
        gens.append(U)
        gens.append((U.conj().T * w[None, :]) / w[:, None])
    basis: list[np.ndarray] = []

    def add(M) -> bool:
        v = M.ravel().astype(complex)
        for _ in range(2):
            for q in basis:
                v = v - q * np.vdot(q, v)
        nv = np.linalg.norm(v)
        if nv > tol * max(np.linalg.norm(M), 1.0):
            basis.append(v / nv)
            return True
        return False

    frontier = [np.eye(n, dtype=complex)]
    add(frontier[0])
    for _ in range(max_word_length):
        if len(basis) == n * n:
            break
        nxt = []
        for word in frontier:
            for g in gens:
                cand = g @ word
                if add(cand):
                    nxt.append(cand)
        frontier = nxt
        if not frontier:
            break
    return len(basis)
