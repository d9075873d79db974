"""Deficiency spaces, the Cayley transform and short-distance classification.

Sign convention (fixed everywhere in the package)::

    L+ = ((X + i) D)^perp = ker(X* - i)
    L- = ((X - i) D)^perp = ker(X* + i)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import ContractError, NumericalRankError, SymmetryError
from .hilbert import Subspace, norm, orthonormalize, range_complement, span
from .operators import SYMMETRY_TOL, OperatorOnDomain, check_symmetry

SCHEMA = "fuzzyspec/1"
CODIM = "subspace-codimension"
ODE = "ode-normalizability"
CLASSES = ("self-adjoint", "fuzzy-A", "fuzzy-B", "mixed")


@dataclass(frozen=True)
class DeficiencyReport:
    r_plus: int
    r_minus: int
    basis_plus: Subspace
    basis_minus: Subspace
    method: str
    classification: str
    discrete_indices: tuple[int, int] | None = None
    block_reports: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def indices(self) -> tuple[int, int]:
        return (self.r_plus, self.r_minus)

    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA,
            "r_plus": self.r_plus,
            "r_minus": self.r_minus,
            "method": self.method,
            "classification": self.classification,
            # invariant-subspace decomposition is not attempted
            "simplicity_tested": False,
        }
        if self.discrete_indices is not None:
            out["discrete_r_plus"], out["discrete_r_minus"] = map(int, self.discrete_indices)
        if self.block_reports:
            out["blocks"] = [b.to_json() for b in self.block_reports]
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


@dataclass(frozen=True)
class PartialIsometry:
    matrix: np.ndarray
    initial_space: Subspace
    final_space: Subspace

    @property
    def weights(self):
        return self.initial_space.weights


def classify_indices(r_plus: int, r_minus: int) -> str:
    if r_plus == r_minus == 0:
        return "self-adjoint"
    return "fuzzy-A" if r_plus == r_minus else "fuzzy-B"


def _require_symmetric(op: OperatorOnDomain):
    defect = check_symmetry(op)
    if defect > SYMMETRY_TOL:
        raise SymmetryError(f"operator {op.model_tag} is not symmetric on its domain", defect)


def codimension_spaces(op: OperatorOnDomain) -> tuple[Subspace, Subspace]:
    """(L+, L-) as weighted complements of (X +- i) applied to the domain basis."""
    B = op.domain.basis
    XB = op.matrix @ B
    return (range_complement(XB + 1j * B, op.weights),
            range_complement(XB - 1j * B, op.weights))


def _normalizable(f: np.ndarray, points: np.ndarray, bounded: bool,
                  rel: float = 0.01) -> tuple[bool, dict]:
    dens = np.abs(f) ** 2
    full = float(trapezoid(dens, points))
    if bounded:
        return True, {"norm_sq": full}
    half = points <= points[-1] / 2
    part = float(trapezoid(dens[half], points[half]))
    return abs(full - part) <= rel * full, {"norm_sq": full, "norm_sq_half": part}


def ode_spaces(op: OperatorOnDomain) -> tuple[Subspace, Subspace, dict]:
    """Closed-form kernels of X* -+ i for X = i hbar d/dlambda, one pair per copy.

    (X* - i) phi = 0 gives phi = exp(+lambda / hbar), (X* + i) phi = 0 gives
    exp(-lambda / hbar).  A solution counts if it is square integrable; on the
    truncated half-line that means its norm over [0, L] agrees with the norm
    over [0, L/2] to 1%.
    """
    if not op.is_differential:
        raise ContractError(f"ode-normalizability needs a differential model, got {op.model_tag}")
    lam = op.grid.points
    bounded = op.family == "interval"
    n_pts = lam.size
    plus, minus, diag = [], [], {}
    for sign, cols, key in ((+1, plus, "plus"), (-1, minus, "minus")):
        f = np.exp(sign * lam / op.hbar)
        ok, info = _normalizable(f, lam, bounded)
        diag[key] = dict(info, normalizable=ok)
        if not ok:
            continue
        for i in range(op.copies):
            v = np.zeros(op.ambient_dim, dtype=complex)
            v[i * n_pts:(i + 1) * n_pts] = f
            cols.append(v)
    ambient_w = op.weights

    def build(cols):
        return orthonormalize(np.column_stack(cols), ambient_w) if cols else Subspace.empty(ambient_w)

    return build(plus), build(minus), diag


def deficiency_spaces(op: OperatorOnDomain, method: str | None = None,
                      discrete: bool = True) -> DeficiencyReport:
    """Deficiency indices and orthonormal bases of L+-.

    Differential models default to the closed-form ODE count (continuum values);
    matrix models use the codimension count.  Both numbers are kept in the report
    unless ``discrete=False`` skips the (SVD-heavy) codimension count for the
    ODE method.
    """
    _require_symmetric(op)
    if op.blocks:
        reports = tuple(deficiency_spaces(b, method, discrete) for b in op.blocks)
        return _combine(op, reports)
    if method is None:
        method = ODE if op.is_differential else CODIM
    if method not in (ODE, CODIM):
        raise ValueError(f"unknown method {method!r}")
    counts = None
    if method == CODIM or discrete:
        lp, lm = codimension_spaces(op)
        counts = (lp.dim, lm.dim)
    diagnostics = {}
    if method == ODE:
        lp, lm, diagnostics = ode_spaces(op)
    return DeficiencyReport(lp.dim, lm.dim, lp, lm, method, classify_indices(lp.dim, lm.dim),
                            counts, diagnostics=diagnostics)


def _combine(op: OperatorOnDomain, reports) -> DeficiencyReport:
    w = op.weights

    def stack(attr):
        cols, row = [], 0
        for blk, rep in zip(op.blocks, reports):
            sub = getattr(rep, attr).basis
            pad = np.zeros((w.size, sub.shape[1]), dtype=complex)
            pad[row:row + blk.ambient_dim] = sub
            cols.append(pad)
            row += blk.ambient_dim
        return Subspace(np.hstack(cols), w)

    rp = sum(r.r_plus for r in reports)
    rm = sum(r.r_minus for r in reports)
    methods = {r.method for r in reports}
    method = ODE if ODE in methods else CODIM
    kinds = {r.classification for r in reports}
    label = "mixed" if len(kinds) > 1 else classify_indices(rp, rm)
    if all(r.discrete_indices is not None for r in reports):
        discrete = tuple(int(sum(r.discrete_indices[k] for r in reports)) for k in (0, 1))
    else:
        discrete = None
    return DeficiencyReport(rp, rm, stack("basis_plus"), stack("basis_minus"), method, label,
                            discrete, block_reports=reports)


def classify(report: DeficiencyReport, op: OperatorOnDomain | None = None) -> str:
    """self-adjoint / fuzzy-A / fuzzy-B, or mixed when blocks disagree.

    Mixed detection is limited to block-diagonal models built with ``direct_sum``.
    """
    if op is not None and op.blocks:
        reports = report.block_reports or tuple(deficiency_spaces(b) for b in op.blocks)
        kinds = {r.classification for r in reports}
        if len(kinds) > 1:
            return "mixed"
    return classify_indices(report.r_plus, report.r_minus)


def cayley_transform(op: OperatorOnDomain) -> PartialIsometry:
    """S = (X - i)(X + i)^-1 as a partial isometry from (X+i)D onto (X-i)D."""
    _require_symmetric(op)
    w = op.weights
    B = op.domain.basis
    XB = op.matrix @ B
    A = XB + 1j * B
    C = XB - 1j * B
    G = A.conj().T @ (w[:, None] * A)
    # ||(X+i) phi||^2 >= ||phi||^2, so G >= identity on the domain coordinates
    if B.shape[1] and np.linalg.eigvalsh(G).min() < 0.5:
        raise NumericalRankError("(X + i) lost rank on the domain")
    S = C @ np.linalg.solve(G, A.conj().T * w[None, :]) if B.shape[1] else np.zeros_like(op.matrix)
    return PartialIsometry(S, span(A, w), span(C, w))


def verify_isometry(S: PartialIsometry, samples: int = 64, seed: int = 0) -> float:
    """max | ||S phi|| - ||phi|| | over seeded random unit vectors of the initial space."""
    Q = S.initial_space.basis
    if Q.shape[1] == 0:
        return 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    w = S.weights
    worst = 0.0
    for _ in range(samples):
        c = rng.standard_normal(Q.shape[1]) + 1j * rng.standard_normal(Q.shape[1])
        phi = Q @ (c / np.linalg.norm(c))
        worst = max(worst, abs(norm(S.matrix @ phi, w) - norm(phi, w)))
    return float(worst)
