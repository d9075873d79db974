"""Batch driver: ``fuzzyspec <command> --config <path> [--out <dir>] [--seed N]``.

Exit codes: 0 success, 1 numerical failure (an ``error.json`` report is written),
2 configuration error.  Seed precedence: ``--seed`` > ``FUZZYSPEC_SEED`` > config.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import deficiency, extensions, flows, operators, uncertainty
from .errors import ConfigurationError, FuzzyspecError
from .output import emit_plot_script, write_csv, write_json

log = logging.getLogger("fuzzyspec")

COMMANDS = ("analyze", "spectrum", "flow", "uncertainty-curve", "gup", "generate-algebra",
            "fuzzyb-demo")
MODELS = ("interval", "halfline", "beta", "matrix")
VALID = {
    "analyze": {"interval", "halfline", "beta", "matrix"},
    "spectrum": {"interval", "matrix"},
    "flow": {"interval"},
    "uncertainty-curve": {"interval", "beta", "matrix"},
    "gup": {"beta"},
    "generate-algebra": {"matrix"},
    "fuzzyb-demo": {"halfline"},
}
TOP_KEYS = {"command", "model", "parameters", "output_dir", "hbar"}

_XI = {"xi_min": float, "xi_max": float, "xi_step": float}
PARAM_KEYS = {
    "interval": {"copies": int, "grid": int, "backend": str, "theta": float,
                 "theta_prime": float, "u": list, "u_prime": list, "a": float,
                 "flow_backend": str, "window": float, "seed": int, **_XI},
    "halfline": {"grid": int, "length": float, "n_scales": int, "centers": list, "seed": int},
    "beta": {"beta": float, "cutoff": float, "grid": int, "n_states": int, "seed": int, **_XI},
    "matrix": {"dim": int, "codim": int, "matrix": list, "s_prime": list, "words": int,
               "extensions": int, "seed": int, **_XI},
}
DEFAULTS = {
    "interval": {"copies": 1, "grid": 256, "backend": "finite-difference", "theta": 0.0,
                 "a": 0.25, "flow_backend": flows.ANALYTIC},
    "halfline": {"grid": 2048, "length": 12.0, "n_scales": 6, "centers": [0.0, 1.0]},
    "beta": {"beta": 1.0, "cutoff": 20.0, "grid": 1024, "n_states": 10000},
    "matrix": {"dim": 6, "codim": 1, "words": 6, "extensions": 3},
}


@dataclass
class RunConfig:
    command: str
    model: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "fuzzyspec-out"
    hbar: float = 1.0

    @property
    def seed(self) -> int:
        return int(self.parameters.get("seed", 0))

    def canonical(self) -> dict:
        return {"command": self.command, "model": self.model, "parameters": self.parameters,
                "hbar": self.hbar}

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _fail(path: str, msg: str):
    raise ConfigurationError(f"{path}: {msg}")


def _check_type(path, value, kind):
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind in (str, list) and isinstance(value, kind):
        return value
    _fail(path, f"expected {kind.__name__}, got {type(value).__name__}")


def _complex_matrix(path, rows) -> np.ndarray:
    """Rows of [re, im] pairs, or a flat row-major list of pairs for a square matrix."""
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError):
        _fail(path, "expected nested lists of [re, im] pairs")
    if arr.ndim == 2 and arr.shape[1] == 2:
        n = int(round(np.sqrt(arr.shape[0])))
        if n * n != arr.shape[0]:
            _fail(path, f"{arr.shape[0]} entries do not form a square matrix")
        arr = arr.reshape(n, n, 2)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        _fail(path, "expected a square matrix of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a JSON run configuration (unknown keys are errors)."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        _fail("<root>", "expected a JSON object")
    for key in raw:
        if key not in TOP_KEYS:
            _fail(key, "unknown key")
    cmd = raw.get("command", command)
    if command is not None and cmd != command:
        _fail("command", f"config says {cmd!r} but {command!r} was requested")
    if cmd not in COMMANDS:
        _fail("command", f"must be one of {', '.join(COMMANDS)}")
    model = raw.get("model")
    if model not in MODELS:
        _fail("model", f"must be one of {', '.join(MODELS)}")
    if model not in VALID[cmd]:
        _fail("model", f"command {cmd!r} does not accept model {model!r}")
    params_in = raw.get("parameters", {})
    if not isinstance(params_in, dict):
        _fail("parameters", "expected an object")
    allowed = PARAM_KEYS[model]
    params = dict(DEFAULTS[model])
    for key, value in params_in.items():
        path = f"parameters.{key}"
        if key not in allowed:
            _fail(path, "unknown key")
        params[key] = _check_type(path, value, allowed[key])
    hbar = _check_type("hbar", raw.get("hbar", 1.0), float)
    if not hbar > 0:
        _fail("hbar", "must be > 0")
    out = raw.get("output_dir", "fuzzyspec-out")
    if not isinstance(out, str):
        _fail("output_dir", "expected a string path")
    _validate(model, cmd, params)
    return RunConfig(cmd, model, params, out, hbar)


def _validate(model: str, cmd: str, p: dict):
    def positive(key, strict=True):
        if key in p and not (p[key] > 0 if strict else p[key] >= 0):
            _fail(f"parameters.{key}", "must be > 0" if strict else "must be >= 0")

    if "grid" in p and p["grid"] < 16:
        _fail("parameters.grid", "must be >= 16")
    if model == "interval":
        positive("copies")
        if p["backend"] not in operators.BACKENDS:
            _fail("parameters.backend", f"must be one of {', '.join(operators.BACKENDS)}")
        if p["flow_backend"] not in (flows.ANALYTIC, flows.SPECTRAL):
            _fail("parameters.flow_backend", f"must be {flows.ANALYTIC!r} or {flows.SPECTRAL!r}")
        if cmd == "flow" and not 0 < p["a"] < 1:
            _fail("parameters.a", "must lie in (0, 1)")
        for key in ("u", "u_prime"):
            if key in p:
                m = _complex_matrix(f"parameters.{key}", p[key])
                if m.shape[0] != p["copies"]:
                    _fail(f"parameters.{key}", f"must be {p['copies']}x{p['copies']}")
                if np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() > 1e-10:
                    _fail(f"parameters.{key}", "must be unitary")
    if model == "halfline":
        if p["length"] < 10:
            _fail("parameters.length", "must be >= 10")
        positive("n_scales")
        if len(p["centers"]) != 2:
            _fail("parameters.centers", "expected two localization centres")
    if model == "beta":
        positive("beta")
        positive("cutoff")
        positive("n_states")
        if p["cutoff"] * np.sqrt(p["beta"]) < 10:
            _fail("parameters.cutoff", "cutoff * sqrt(beta) must be >= 10")
    if model == "matrix":
        positive("dim")
        positive("codim", strict=False)
        positive("extensions")
        positive("words", strict=False)
        if "matrix" in p:
            m = _complex_matrix("parameters.matrix", p["matrix"])
            if m.shape[0] != p["dim"]:
                _fail("parameters.matrix", f"must be {p['dim']}x{p['dim']}")
        if p["codim"] and p["dim"] < 2 * p["codim"] + 2:
            _fail("parameters.dim", "must be >= 2 * codim + 2")
        if cmd == "generate-algebra" and p["dim"] > 8:
            _fail("parameters.dim", "must be <= 8 for generate-algebra")
    if "xi_step" in p:
        positive("xi_step")


# --- model construction ---

def _param_u(p, key, theta_key, r):
    if key in p:
        return extensions.ExtensionParameter(_complex_matrix(key, p[key]), key)
    theta = p.get(theta_key, 0.0)
    return extensions.ExtensionParameter(np.exp(1j * theta) * np.eye(r), f"{theta_key}={theta:.17g}")


def build_model(cfg: RunConfig):
    p = cfg.parameters
    if cfg.model == "interval":
        return operators.build_interval_derivative(p["copies"], p["grid"], p["backend"], cfg.hbar)
    if cfg.model == "halfline":
        return operators.build_halfline_derivative(p["grid"], p["length"], cfg.hbar)
    if cfg.model == "beta":
        return operators.build_beta_algebra(p["beta"], p["cutoff"], p["grid"], cfg.hbar)
    if "matrix" in p:
        M = _complex_matrix("parameters.matrix", p["matrix"])
    else:
        M = operators.random_hermitian(p["dim"], cfg.seed)
    return operators.build_matrix_model(M, p["codim"], cfg.seed)


def _xi_grid(p, default):
    lo = p.get("xi_min", default[0])
    hi = p.get("xi_max", default[1])
    step = p.get("xi_step", default[2])
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(max(n, 0))


# --- commands ---

def _analyze(cfg, model, out, meta):
    op = model.x_op if isinstance(model, operators.BetaAlgebraModel) else model
    report = deficiency.deficiency_spaces(op)
    payload = report.to_json()
    payload["symmetry_defect"] = operators.check_symmetry(op)
    payload["model_tag"] = op.model_tag
    if op.params.get("generator"):
        payload["domain_generator"] = op.params["generator"]
    if isinstance(model, operators.BetaAlgebraModel):
        payload["commutator_residual"] = operators.check_commutator(model)
    return [write_json(out / "deficiency.json", payload, meta)]


def _spectrum(cfg, op, out, meta):
    p = cfg.parameters
    if cfg.model == "interval":
        u = _param_u(p, "u", "theta", op.copies)
        ext = extensions.extend_by_boundary(op, u)
        window = p.get("window", p["grid"] / 4)
    else:
        report = deficiency.deficiency_spaces(op, deficiency.CODIM)
        if "s_prime" in p:
            s_prime = _complex_matrix("parameters.s_prime", p["s_prime"])
        else:
            rng = np.random.Generator(np.random.PCG64(cfg.seed))
            s_prime = extensions._random_unitary(report.r_plus, rng)
        ext = extensions.extend_by_cayley(op, s_prime, report)
        window = None
    sd = extensions.spectrum(ext)
    ev = sd.eigenvalues if window is None else sd.window(window)
    files = [write_json(out / "spectrum.json", ext.to_json(window), meta)]
    files.append(write_csv(out / "spectrum.csv", ["index", "eigenvalue"],
                           [(i, e) for i, e in enumerate(ev)], meta))
    return files


def _flow(cfg, op, out, meta):
    p = cfg.parameters
    u = _param_u(p, "u", "theta", op.copies)
    up = _param_u(p, "u_prime", "theta_prime", op.copies)
    a = p["a"]
    T = flows.local_phase_op(op, u, up, a, p["flow_backend"])
    n = op.params["N"]
    derived = flows.piecewise_errors(T, u.u, up.u, a, n, "derived", seed=cfg.seed)
    stated = flows.piecewise_errors(T, u.u, up.u, a, n, "stated", seed=cfg.seed)
    lam = np.arange(n) / n
    rows = []
    for i in range(op.copies):
        for k in range(n):
            rows.append((lam[k], i, derived["profile"][i * n + k], stated["profile"][i * n + k]))
    csv_path = write_csv(out / "flow.csv", ["lambda", "copy", "error", "error_stated_law"],
                         rows, meta)
    summary = {
        "a": a, "backend": p["flow_backend"],
        "u": u.to_json(), "u_prime": up.to_json(),
        "derived_law": {"identity_max_error": derived["identity"],
                        "phase_max_error": derived["phase"]},
        "stated_law": {"identity_max_error": stated["identity"],
                       "phase_max_error": stated["phase"]},
    }
    files = [csv_path, write_json(out / "flow.json", summary, meta)]
    (out / "flow.gp").write_text(emit_plot_script([csv_path], "flow error profile", ycol=3))
    return files + [out / "flow.gp"]


def _uncertainty(cfg, model, out, meta):
    p = cfg.parameters
    if cfg.model == "beta":
        op = model.x_op
        scale = cfg.hbar * np.sqrt(p["beta"])
        grid = _xi_grid(p, (-2 * scale, 2 * scale, scale / 2))
    elif cfg.model == "interval":
        op = model
        grid = _xi_grid(p, (-10.0, 10.0, 2.5))
    else:
        op = model
        ev = np.linalg.eigvalsh(op.matrix)
        grid = _xi_grid(p, (float(ev[0]), float(ev[-1]), (ev[-1] - ev[0]) / 20))
    curve = uncertainty.uncertainty_curve(op, grid)
    csv_path = write_csv(out / "uncertainty.csv", ["xi", "dx_min", "residual"], curve.rows(), meta)
    summary = {
        "model_tag": curve.model_tag,
        "min_dx": min(curve.dx_min) if curve.dx_min else None,
        "skipped": [{"xi": x, "reason": why} for x, why in curve.skipped],
    }
    if cfg.model == "beta":
        summary["hbar_sqrt_beta"] = cfg.hbar * np.sqrt(p["beta"])
    files = [csv_path, write_json(out / "uncertainty.json", summary, meta)]
    (out / "uncertainty.gp").write_text(emit_plot_script([csv_path], "minimal uncertainty"))
    return files + [out / "uncertainty.gp"]


def _gup(cfg, model, out, meta):
    report = uncertainty.sample_gup(model, cfg.parameters["n_states"], cfg.seed)
    return [write_json(out / "gup.json", report, meta)]


def _algebra(cfg, op, out, meta):
    p = cfg.parameters
    dims = [flows.generated_algebra_dimension(op, L, p["extensions"], cfg.seed)
            for L in range(p["words"] + 1)]
    payload = {"dimension": dims[-1], "target": op.ambient_dim ** 2,
               "dimension_by_word_length": dims}
    return [write_json(out / "algebra.json", payload, meta)]


def _fuzzyb(cfg, op, out, meta):
    p = cfg.parameters
    seq = uncertainty.fuzzyB_localizing_sequence(op, p["n_scales"], tuple(p["centers"]))
    rows = [(s, d, seq.overlap_matrix[j, j]) for j, (s, d) in enumerate(zip(seq.widths,
                                                                          seq.dx_values))]
    csv_path = write_csv(out / "fuzzyb.csv", ["width", "dx", "overlap"], rows, meta)
    payload = {"widths": seq.widths, "dx_values": seq.dx_values,
               "overlap_matrix": seq.overlap_matrix, "overlap_floor": seq.overlap_floor,
               "centers": list(seq.centers), "warnings": seq.warnings}
    return [csv_path, write_json(out / "fuzzyb.json", payload, meta)]


HANDLERS = {"analyze": _analyze, "spectrum": _spectrum, "flow": _flow,
            "uncertainty-curve": _uncertainty, "gup": _gup, "generate-algebra": _algebra,
            "fuzzyb-demo": _fuzzyb}


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> int:
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"config_hash": cfg.digest(), "seed": cfg.seed}
    try:
        model = build_model(cfg)
        files = HANDLERS[cfg.command](cfg, model, out, meta)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (FuzzyspecError, np.linalg.LinAlgError, FloatingPointError) as exc:
        write_json(out / "error.json", {"error": type(exc).__name__, "message": str(exc),
                                        "command": cfg.command}, meta)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    for f in files:
        log.info("wrote %s", f)
    return 0


def resolve_seed(cfg: RunConfig, flag: int | None) -> RunConfig:
    env = os.environ.get("FUZZYSPEC_SEED")
    if flag is not None:
        cfg.parameters["seed"] = int(flag)
    elif env not in (None, ""):
        try:
            cfg.parameters["seed"] = int(env)
        except ValueError:
            raise ConfigurationError(f"FUZZYSPEC_SEED: not an integer: {env!r}") from None
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fuzzyspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--seed", type=int, default=None)
    ps = sub.add_parser("plot-script", help="gnuplot script overlaying CSV results")
    ps.add_argument("csv", nargs="+", type=Path)
    ps.add_argument("--out", type=Path, default=None)
    ps.add_argument("--ycol", type=int, default=2)
    ps.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "plot-script":
        try:
            text = emit_plot_script(args.csv, ycol=args.ycol)
        except FileNotFoundError as exc:
            print(f"missing result files: {exc}", file=sys.stderr)
            return 1
        if args.out:
            args.out.write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"configuration error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = resolve_seed(parse_config(text, args.command), args.seed)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
