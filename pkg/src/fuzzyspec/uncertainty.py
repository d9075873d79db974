"""Minimal position uncertainty, the GUP check for the beta algebra, fuzzy-B localization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import brentq

from .deficiency import deficiency_spaces
from .errors import ContractError, FuzzyspecError, InfeasibleError
from .hilbert import CLUSTER_TOL
from .operators import BetaAlgebraModel, OperatorOnDomain

log = logging.getLogger(__name__)

EDGE_WARN = 1e-4


@dataclass(frozen=True)
class UncertaintyResult:
    dx_min: float
    minimizer: np.ndarray
    residual: float
    mean: float


@dataclass
class UncertaintyCurve:
    xi_values: list[float]
    dx_min: list[float]
    solver_residuals: list[float]
    model_tag: str
    skipped: list[tuple[float, str]] = field(default_factory=list)

    def rows(self):
        return list(zip(self.xi_values, self.dx_min, self.solver_residuals))


@dataclass
class LocalizationSequence:
    states: list[np.ndarray]
    dx_values: list[float]
    overlap_matrix: np.ndarray
    centers: tuple[float, float]
    widths: list[float]
    warnings: list[str] = field(default_factory=list)

    @property
    def overlap_floor(self) -> float:
        return float(np.abs(np.diag(self.overlap_matrix)).min())


class _DomainForms:
    """Quadratic forms of X on the domain coordinates: <X> and ||X phi||^2."""

    def __init__(self, op: OperatorOnDomain):
        B = op.domain.basis
        w = op.weights
        XB = op.matrix @ B
        self.B = B
        self.A = B.conj().T @ (w[:, None] * XB)
        self.A = 0.5 * (self.A + self.A.conj().T)
        self.Q2 = XB.conj().T @ (w[:, None] * XB)
        self.Q2 = 0.5 * (self.Q2 + self.Q2.conj().T)
        self.bandwidth = _bandwidth(self.Q2)
        self.scale = float(np.abs(self.A).sum(axis=1).max()) if self.A.size else 1.0

    def ground(self, xi: float, kappa: float) -> np.ndarray:
        H = self.Q2 + (kappa - 2.0 * xi) * self.A
        k = H.shape[0]
        b = self.bandwidth
        if k > 64 and b <= 8:
            band = np.zeros((b + 1, k), dtype=complex)
            for d in range(b + 1):
                band[b - d, d:] = np.diagonal(H, d)
            _, v = sla.eig_banded(band, lower=False, select="i", select_range=(0, 0))
        else:
            _, v = sla.eigh(H, subset_by_index=[0, 0])
        return v[:, 0]

    def mean(self, c: np.ndarray) -> float:
        return float(np.real(np.vdot(c, self.A @ c)))

    def second(self, c: np.ndarray) -> float:
        return float(np.real(np.vdot(c, self.Q2 @ c)))


def _bandwidth(M: np.ndarray) -> int:
    rows, cols = np.nonzero(np.abs(M) > 1e-14 * max(np.abs(M).max(), 1e-300))
    return int(np.abs(rows - cols).max()) if rows.size else 0


def _mix_to_mean(forms: _DomainForms, ca, cb, xi):
    """Unit vector in span{ca, cb} with mean exactly xi (ca above, cb below)."""
    ov = np.vdot(ca, cb)
    if abs(ov) > 0:
        cb = cb * np.conj(ov) / abs(ov)

    def state(t):
        v = np.cos(t) * ca + np.sin(t) * cb
        return v / np.linalg.norm(v)

    fa, fb = forms.mean(ca) - xi, forms.mean(cb) - xi
    if fa == 0:
        return ca
    if fb == 0:
        return cb
    t = brentq(lambda t: forms.mean(state(t)) - xi, 0.0, 0.5 * np.pi, xtol=1e-15)
    return state(t)


def _edge_minimizer(forms: _DomainForms, evals, evecs, end, xi) -> UncertaintyResult:
    """At an extreme mean only the top (bottom) eigenspace of A is admissible."""
    tol = CLUSTER_TOL * max(forms.scale, 1.0)
    E = evecs[:, np.abs(evals - end) <= tol]
    _, v = sla.eigh(E.conj().T @ forms.Q2 @ E, subset_by_index=[0, 0])
    c = E @ v[:, 0]
    m = forms.mean(c)
    var = forms.second(c) - m * m
    return UncertaintyResult(float(np.sqrt(max(var, 0.0))), forms.B @ c, abs(m - xi), m)


def min_uncertainty(op: OperatorOnDomain, xi: float, op_forms: _DomainForms | None = None
                    ) -> UncertaintyResult:
    """Smallest standard deviation of X over unit domain states with <X> = xi.

    Ground states of ||(X - xi) phi||^2 + kappa <(X - xi)> on the domain are
    tracked in the multiplier kappa; the mean of the ground state decreases with
    kappa, so a bracketing root search pins the kappa where the mean equals xi.
    Any jump left at the root (degenerate ground state) is closed by mixing the
    two one-sided ground states.
    """
    forms = op_forms or _DomainForms(op)
    evals, evecs = sla.eigh(forms.A)
    lo, hi = float(evals[0]), float(evals[-1])
    edge = 1e-10 * max(forms.scale, 1.0)
    if not lo - edge <= xi <= hi + edge:
        raise InfeasibleError(f"xi={xi} is not reachable on the domain", (lo, hi))
    for end in (lo, hi):
        if abs(xi - end) <= edge:
            return _edge_minimizer(forms, evals, evecs, end, xi)

    def f(kappa):
        return forms.mean(forms.ground(xi, kappa)) - xi

    f0 = f(0.0)
    if f0 == 0.0:
        a = b = 0.0
    else:
        step = forms.scale * 1e-3 * (1 if f0 > 0 else -1)
        a, b = 0.0, step
        fb = f(b)
        tries = 0
        while np.sign(fb) == np.sign(f0) and fb != 0.0:
            a, b = b, 2 * b
            fb = f(b)
            tries += 1
            if tries > 80:
                raise InfeasibleError(f"could not bracket the multiplier for xi={xi}", (lo, hi))
        if fb == 0.0:
            a = b
        else:
            root = brentq(f, min(a, b), max(a, b), xtol=1e-14 * forms.scale, rtol=1e-15,
                          maxiter=200)
            d = max(abs(root), forms.scale) * 1e-13
            a, b = root - d, root + d
    ca = forms.ground(xi, a)
    cb = forms.ground(xi, b)
    if forms.mean(ca) < forms.mean(cb):
        ca, cb = cb, ca
    if (forms.mean(ca) - xi) * (forms.mean(cb) - xi) > 0:
        # both on one side: keep the closer one
        c = min((ca, cb), key=lambda v: abs(forms.mean(v) - xi))
    else:
        c = _mix_to_mean(forms, ca, cb, xi)
    m = forms.mean(c)
    var = forms.second(c) - m * m
    phi = forms.B @ c
    return UncertaintyResult(float(np.sqrt(max(var, 0.0))), phi, abs(m - xi), m)


def uncertainty_curve(op: OperatorOnDomain, xi_grid) -> UncertaintyCurve:
    forms = _DomainForms(op)
    curve = UncertaintyCurve([], [], [], op.model_tag)
    for xi in xi_grid:
        try:
            res = min_uncertainty(op, float(xi), forms)
        except FuzzyspecError as exc:
            curve.skipped.append((float(xi), str(exc)))
            continue
        curve.xi_values.append(float(xi))
        curve.dx_min.append(res.dx_min)
        curve.solver_residuals.append(res.residual)
    return curve


def _moments(m: BetaAlgebraModel, states: np.ndarray):
    """Rows of ``states`` are normalized domain states; returns dx, dp, robertson bound."""
    w = m.grid.weights
    p = m.grid.points
    x = sp.csr_matrix(m.x_op.matrix)
    xs = (x @ states.T).T
    mean_x = np.real(np.sum(w * np.conj(states) * xs, axis=1))
    x2 = np.sum(w * np.abs(xs) ** 2, axis=1)
    prob = w * np.abs(states) ** 2
    mean_p = prob @ p
    p2 = prob @ p**2
    dx = np.sqrt(np.maximum(x2 - mean_x**2, 0.0))
    dp = np.sqrt(np.maximum(p2 - mean_p**2, 0.0))
    # |<[x, p]>| / 2 evaluated with the discrete operators
    ps = states * p[None, :]
    comm = (x @ ps.T).T - p[None, :] * xs
    robertson = 0.5 * np.abs(np.sum(w * np.conj(states) * comm, axis=1))
    return dx, dp, robertson


def gup_margin(m: BetaAlgebraModel, phi: np.ndarray) -> dict:
    """dx dp - (hbar/2)(1 + beta dp^2) for a single state."""
    phi = phi / np.sqrt(np.sum(m.grid.weights * np.abs(phi) ** 2))
    dx, dp, rob = _moments(m, phi[None, :])
    bound = 0.5 * m.hbar * (1 + m.beta * dp[0] ** 2)
    return {"dx": float(dx[0]), "dp": float(dp[0]), "bound": float(bound),
            "margin": float(dx[0] * dp[0] - bound), "robertson": float(rob[0])}


def random_domain_states(m: BetaAlgebraModel, n_states: int, seed: int) -> np.ndarray:
    """Seeded superpositions of the lowest N/8 sine modes vanishing at +-P, normalized."""
    p = m.grid.points
    P = m.cutoff
    n_modes = max(1, (p.size - 1) // 8)
    k = np.arange(1, n_modes + 1)
    modes = np.sin(np.outer(k, np.pi * (p + P) / (2 * P)))
    modes[:, [0, -1]] = 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    coeff = rng.standard_normal((n_states, n_modes)) + 1j * rng.standard_normal((n_states, n_modes))
    states = coeff @ modes
    states /= np.sqrt(np.sum(m.grid.weights * np.abs(states) ** 2, axis=1))[:, None]
    return states


def sample_gup(m: BetaAlgebraModel, n_states: int, seed: int = 0, chunk: int = 1000) -> dict:
    """Count violations of dx dp >= (hbar/2)(1 + beta dp^2) over random domain states."""
    min_margin = np.inf
    min_rel = np.inf
    violations = 0
    robertson_violations = 0
    done = 0
    rng_seed = np.random.SeedSequence(seed)
    for sub in rng_seed.spawn(-(-n_states // chunk)):
        count = min(chunk, n_states - done)
        states = random_domain_states(m, count, int(sub.generate_state(1)[0]))
        dx, dp, rob = _moments(m, states)
        bound = 0.5 * m.hbar * (1 + m.beta * dp**2)
        margin = dx * dp - bound
        violations += int(np.count_nonzero(margin < -1e-9 * bound))
        robertson_violations += int(np.count_nonzero(dx * dp < rob * (1 - 1e-9)))
        min_margin = min(min_margin, float(margin.min()))
        min_rel = min(min_rel, float((margin / bound).min()))
        done += count
    return {"min_margin": min_margin, "min_relative_margin": min_rel, "violations": violations,
            "robertson_violations": robertson_violations, "n_states": n_states, "seed": seed}


def fuzzyB_localizing_sequence(op: OperatorOnDomain, n: int = 6,
                               centers: tuple[float, float] = (0.0, 1.0)) -> LocalizationSequence:
    """Domain states of dyadically growing width with shrinking Delta X.

    Profiles (lambda/s) exp(-lambda/s) exp(-i xi lambda / hbar) vanish at the
    origin and have mean xi; their spread in X falls like hbar/s.
    """
    report = deficiency_spaces(op, discrete=False)
    if report.classification != "fuzzy-B":
        raise ContractError(f"model {op.model_tag} is {report.classification}, not fuzzy-B")
    lam = op.grid.points
    w = op.weights
    L = lam[-1]
    s_max = L / 14.0
    widths = [s_max * 2.0 ** (j - (n - 1)) for j in range(n)]
    warnings = []

    def state(s, xi):
        f = (lam / s) * np.exp(-lam / s) * np.exp(-1j * xi * lam / op.hbar)
        edge = abs(f[-1]) / np.abs(f).max()
        if edge > EDGE_WARN:
            warnings.append(f"width {s:.4g}: |phi(L)|/max = {edge:.2e} exceeds {EDGE_WARN:g}")
            log.warning(warnings[-1])
        f = op.domain.project(f.astype(complex))
        return f / np.sqrt(np.sum(w * np.abs(f) ** 2))

    first = [state(s, centers[0]) for s in widths]
    second = [state(s, centers[1]) for s in widths]
    dx = []
    for phi in first:
        xphi = op.matrix @ phi
        mean = np.real(np.sum(w * np.conj(phi) * xphi))
        dx.append(float(np.sqrt(max(np.sum(w * np.abs(xphi) ** 2) - mean**2, 0.0))))
    overlap = np.array([[abs(np.sum(w * np.conj(a) * b)) for b in second] for a in first])
    return LocalizationSequence(first, dx, overlap, centers, widths, warnings)
