"""Configuration-driven experiment runner.

Config files are flat INI key-value text with one section per module;
complex numbers are written like ``2+1i`` (``j`` also accepted).  Runs are
deterministic for a fixed config and seed: outputs carry no timestamps and
all randomness flows from one counter-based generator.

Subcommands: ``run <config>``, ``validate <config>``, ``report <dir>``.
Exit codes: 0 pass, 2 config error, 3 check failure, 4 numerical error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import betaflow, dynamics, lax
from .curve import ModelParams
from .errors import CheckFailure, ConfigurationError, Cp1laxError
from .geometry import geometry_tensors, tensors_to_json
from .lie import AlgebraData, make_algebra

EXPERIMENTS = ("geometry-check", "identity-check", "simulate", "lax-scan",
               "charges", "beta-flow")


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    t = t.replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse complex number {text!r}") from exc


@dataclass
class ExperimentConfig:
    algebra_name: str
    algebra_n: int
    p1: complex
    p2: complex
    eps: float
    alpha_prime: complex
    contour_nodes: int
    n1: int
    n2: int
    l1: float
    l2: float
    init: str
    amplitude: float
    amplitude2: float
    modes: int
    csv_path: str
    z_samples: list
    k_powers: int
    row_stride: int
    drift_tol: float
    flow_quad_nodes: int
    flow_d_eps: float
    experiment: str
    seed: int
    output_dir: str
    raw_text: str = field(repr=False, default="")

    def params(self) -> ModelParams:
        return ModelParams(p1=self.p1, p2=self.p2, eps=self.eps,
                           alpha_prime=self.alpha_prime)

    def algebra(self) -> AlgebraData:
        return make_algebra(self.algebra_name, self.algebra_n)

    def content_hash(self) -> str:
        """Git-style blob hash of the config text."""
        blob = b"blob %d\0%s" % (len(self.raw_text), self.raw_text.encode())
        return hashlib.sha1(blob).hexdigest()


def _get(cp, section, key, caster, default=None):
    if not cp.has_section(section) and default is None:
        raise ConfigurationError(f"missing config section [{section}]")
    if not cp.has_option(section, key):
        if default is not None:
            return default
        raise ConfigurationError(f"missing config key {key!r} in section [{section}]")
    raw = cp.get(section, key)
    try:
        return caster(raw)
    except ConfigurationError:
        raise
    except Exception as exc:
        raise ConfigurationError(f"bad value for [{section}] {key} = {raw!r}: {exc}") from exc


def validate_config(path: str) -> ExperimentConfig:
    """Parse and validate a config file, raising precise field-level errors."""
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {path}")
    text = p.read_text()
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc

    cfg = ExperimentConfig(
        algebra_name=_get(cp, "algebra", "name", str.strip),
        algebra_n=_get(cp, "algebra", "n", int, default=2),
        p1=_get(cp, "curve", "p1", parse_complex),
        p2=_get(cp, "curve", "p2", parse_complex),
        eps=_get(cp, "curve", "eps", float),
        alpha_prime=_get(cp, "curve", "alpha_prime", parse_complex,
                         default=4j * np.pi),
        contour_nodes=_get(cp, "contour", "nodes", int, default=512),
        n1=_get(cp, "lattice", "n1", int, default=64),
        n2=_get(cp, "lattice", "n2", int, default=64),
        l1=_get(cp, "lattice", "l1", float, default=1.0),
        l2=_get(cp, "lattice", "l2", float, default=1.0),
        init=_get(cp, "lattice", "init", str.strip, default="random-fourier"),
        amplitude=_get(cp, "lattice", "amplitude", float, default=0.2),
        amplitude2=_get(cp, "lattice", "amplitude2", float, default=0.25),
        modes=_get(cp, "lattice", "modes", int, default=2),
        csv_path=_get(cp, "lattice", "csv", str.strip, default=""),
        z_samples=_get(cp, "lax", "z_samples",
                       lambda s: [parse_complex(tok) for tok in s.split(",") if tok.strip()],
                       default=[]),
        k_powers=_get(cp, "lax", "k_powers", int, default=0),
        row_stride=_get(cp, "lax", "row_stride", int, default=8),
        drift_tol=_get(cp, "lax", "drift_tol", float, default=1e-3),
        flow_quad_nodes=_get(cp, "flow", "quad_nodes", int, default=256),
        flow_d_eps=_get(cp, "flow", "d_eps", float, default=1e-4),
        experiment=_get(cp, "run", "experiment", str.strip),
        seed=_get(cp, "run", "seed", int, default=0),
        output_dir=_get(cp, "run", "output_dir", str.strip, default="out"),
        raw_text=text,
    )
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"unknown experiment {cfg.experiment!r}; expected one of {EXPERIMENTS}")
    cfg.params()   # enforces the marked-point and contour-separation invariants
    cfg.algebra()  # enforces the algebra id
    if cfg.init not in ("random-fourier", "constant", "csv"):
        raise ConfigurationError(f"unknown lattice init {cfg.init!r}")
    if cfg.init == "csv" and not cfg.csv_path:
        raise ConfigurationError("lattice init 'csv' requires the [lattice] csv key")
    return cfg


# ---------------------------------------------------------------------------
# experiment implementations
# ---------------------------------------------------------------------------

def _check(name, value, tol):
    return {"name": name, "value": float(value), "tolerance": float(tol),
            "pass": bool(value <= tol)}


def _closed_metric(params, algebra):
    return 2j * np.pi * (params.p1 - params.p2) * algebra.kappa


def _closed_omega(params, algebra):
    return (-(2j * np.pi / 3.0) * (params.p1 + params.p2)
            * np.einsum("abd,dc->abc", algebra.f, algebra.kappa))


def _run_geometry_check(cfg: ExperimentConfig, outdir: Path) -> list:
    params, algebra = cfg.params(), cfg.algebra()
    tensors = geometry_tensors(params, algebra, cfg.contour_nodes)
    (outdir / "geometry.json").write_text(tensors_to_json(tensors))
    gc = _closed_metric(params, algebra)
    oc = _closed_omega(params, algebra)
    gscale = np.max(np.abs(gc))
    checks = [
        _check("metric_vs_closed_form_rel",
               np.max(np.abs(tensors.g - gc)) / gscale, 1e-8),
        _check("threeform_vs_closed_form_rel",
               np.max(np.abs(tensors.omega3 - oc)) / gscale, 1e-8),
        _check("threeform_antisymmetry",
               np.max(np.abs(tensors.omega3 + np.transpose(tensors.omega3, (1, 0, 2)))) / gscale,
               1e-10),
        _check("metric_symmetry",
               np.max(np.abs(tensors.g - tensors.g.T)) / gscale, 1e-12),
    ]
    half = ModelParams(p1=params.p1, p2=params.p2, eps=params.eps / 2,
                       alpha_prime=params.alpha_prime)
    g_half = geometry_tensors(half, algebra, cfg.contour_nodes).g
    checks.append(_check("metric_eps_independence_rel",
                         np.max(np.abs(g_half - tensors.g)) / gscale, 1e-8))
    return checks


def _run_identity_check(cfg: ExperimentConfig, outdir: Path) -> list:
    params, algebra = cfg.params(), cfg.algebra()
    tensors = geometry_tensors(params, algebra, cfg.contour_nodes)
    report = lax.verify_main_theorem_identities(params, algebra, tensors,
                                                cfg.contour_nodes)
    (outdir / "identity_report.json").write_text(json.dumps(report, sort_keys=True))
    return [_check(f"identity_{name}_rel", blk["max_rel_error"], report["tolerance"])
            for name, blk in report["blocks"].items()]


def _build_initial(cfg: ExperimentConfig, algebra, coeffs):
    if cfg.init == "constant":
        return dynamics.initial_constant(algebra, cfg.n1)
    if cfg.init == "random-fourier":
        return dynamics.initial_random_fourier(
            algebra, coeffs, cfg.n1, cfg.l1, amplitude=cfg.amplitude,
            amplitude2=cfg.amplitude2, modes=cfg.modes, seed=cfg.seed)
    lam, seed_vec = _read_initial_csv(cfg.csv_path, algebra.dim)
    return dynamics.initial_from_arrays(algebra, coeffs, lam, seed_vec, cfg.l1)


def _read_initial_csv(path: str, dim: int):
    """CSV rows: i1, component, lam_re, lam_im[, seed_re, seed_im]."""
    rows = list(csv.reader(Path(path).open()))
    body = [r for r in rows if r and not r[0].startswith("#")]
    n1 = 1 + max(int(r[0]) for r in body)
    lam = np.zeros((n1, dim), dtype=np.complex128)
    seed_vec = np.zeros(dim, dtype=np.complex128)
    for r in body:
        i, a = int(r[0]), int(r[1])
        lam[i, a] = float(r[2]) + 1j * float(r[3])
        if len(r) >= 6:
            seed_vec[a] = float(r[4]) + 1j * float(r[5])
    return lam, seed_vec


def _solve_from_config(cfg: ExperimentConfig):
    params, algebra = cfg.params(), cfg.algebra()
    tensors = geometry_tensors(params, algebra, cfg.contour_nodes)
    coeffs = dynamics.derive_eom_coefficients(params, algebra, tensors)
    initial = _build_initial(cfg, algebra, coeffs)
    field = dynamics.solve(initial, cfg.n2 - 1, coeffs, algebra,
                           h1=cfg.l1 / cfg.n1, h2=cfg.l2 / cfg.n2)
    return params, algebra, tensors, coeffs, field


def _write_current_csv(path: Path, arr: np.ndarray) -> None:
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["i1", "i2", "component", "re", "im"])
        n1, n2, dim = arr.shape
        for i1 in range(n1):
            for i2 in range(n2):
                for a in range(dim):
                    v = arr[i1, i2, a]
                    wr.writerow([i1, i2, a, repr(float(v.real)), repr(float(v.imag))])


def _run_simulate(cfg: ExperimentConfig, outdir: Path) -> list:
    params, algebra, tensors, coeffs, field = _solve_from_config(cfg)
    _write_current_csv(outdir / "trajectory_j1.csv", field.j1)
    _write_current_csv(outdir / "trajectory_j2.csv", field.j2)
    res = float(np.max(np.abs(dynamics.eom_residual(field, coeffs))))
    mc = float(np.max(np.abs(dynamics.mc_residual(field))))
    energy = dynamics.energy_rows(field)
    drift = float(np.max(np.abs(energy - energy[0])) / max(1.0, abs(energy[0])))
    hscale = max(field.h1, field.h2) ** 2
    scale = float(np.max(np.abs(field.j1))) or 1.0
    return [
        _check("eom_residual_scaled", res / scale, 200.0 * hscale),
        _check("mc_residual_scaled", mc / scale, 200.0 * hscale),
        _check("energy_drift_rel", drift, 200.0 * hscale),
    ]


def _run_lax_scan(cfg: ExperimentConfig, outdir: Path) -> list:
    params, algebra, tensors, coeffs, field = _solve_from_config(cfg)
    jets = dynamics.lattice_jets(field)
    z_list = cfg.z_samples or _default_z_grid(params)
    rows, worst = [], 0.0
    for z in z_list:
        sample = lax.lax_sample(params, algebra, z, cfg.contour_nodes)
        res = np.max(np.abs(lax.flatness_residual(sample, jets)))
        worst = max(worst, float(res))
        rows.append((z, sample.region, sample.alpha_scalar, sample.beta_scalar,
                     float(res)))
    with (outdir / "lax_samples.csv").open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["z_re", "z_im", "region", "alpha_re", "alpha_im",
                     "beta_re", "beta_im", "flatness_residual_max"])
        for z, region, a_sc, b_sc, res in rows:
            wr.writerow([repr(z.real), repr(z.imag), region,
                         repr(a_sc.real), repr(a_sc.imag),
                         repr(b_sc.real), repr(b_sc.imag), repr(res)])
    hscale = max(field.h1, field.h2) ** 2
    scale = float(np.max(np.abs(field.j1))) or 1.0
    return [_check("flatness_residual_scaled", worst / scale, 200.0 * hscale)]


def _default_z_grid(params: ModelParams) -> list:
    p1, p2 = complex(params.p1), complex(params.p2)
    eps = params.eps
    inner = [p1 + 0.5 * eps, p1 - 0.45 * eps, p1 + 0.4j * eps]
    span = abs(p1 - p2)
    outer = [p1 + 2.5 * eps, p1 - 2.2 * eps * 1j + 0.3 * eps, p1 + 0.8 * span]
    return [z for z in inner + outer if abs(z) > 1e-9 and abs(z - p2) > 1e-9]


def _run_charges(cfg: ExperimentConfig, outdir: Path) -> list:
    params, algebra, tensors, coeffs, field = _solve_from_config(cfg)
    z_list = cfg.z_samples or _default_z_grid(params)
    table = lax.charge_scan(field, params, z_list, cfg.k_powers, cfg.row_stride)
    with (outdir / "charges.csv").open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["z_re", "z_im", "k", "t2_index", "value_re", "value_im", "drift"])
        for z, k, n, val, drift in table:
            wr.writerow([repr(z.real), repr(z.imag), k, n,
                         repr(val.real), repr(val.imag), repr(drift)])
    worst = max((row[4] for row in table), default=0.0)
    return [_check("charge_drift_rel", worst, cfg.drift_tol)]


def _run_beta_flow(cfg: ExperimentConfig, outdir: Path) -> list:
    params, algebra = cfg.params(), cfg.algebra()
    report = betaflow.beta_check(params, algebra, cfg.contour_nodes)
    state = betaflow.flow_state(params, quad_nodes=cfg.flow_quad_nodes)
    d_eps = cfg.flow_d_eps
    plus = betaflow.flow_step(state, d_eps, cfg.flow_quad_nodes)
    minus = betaflow.flow_step(state, -d_eps, cfg.flow_quad_nodes)
    dp2 = (plus.P2 - minus.P2) / (2 * d_eps)
    p1_move = abs(plus.P1 - state.P1)
    report["dP2_deps"] = [dp2.real, dp2.imag]
    (outdir / "beta_report.json").write_text(json.dumps(report, sort_keys=True))
    return [
        _check("contraction_identity", report["contraction_identity_residual"], 1e-12),
        _check("beta_vs_metric_rel", report["beta_vs_metric_rel"], 1e-10),
        _check("flow_match_rel", report["flow_match_rel"], 1e-10),
        _check("wzw_factor_exact", abs(report["wzw_factor_exact"]), 0.0),
        _check("dP2_deps_minus_one", abs(dp2 - 1.0), 1e-6),
        _check("P1_flow_invariance", p1_move, 1e-12),
    ]


_RUNNERS = {
    "geometry-check": _run_geometry_check,
    "identity-check": _run_identity_check,
    "simulate": _run_simulate,
    "lax-scan": _run_lax_scan,
    "charges": _run_charges,
    "beta-flow": _run_beta_flow,
}


def run(cfg: ExperimentConfig) -> int:
    """Execute the configured experiment; returns the process exit code."""
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        checks = _RUNNERS[cfg.experiment](cfg, outdir)
        status = "pass" if all(c["pass"] for c in checks) else "fail"
        summary = {
            "experiment": cfg.experiment,
            "config_hash": cfg.content_hash(),
            "seed": cfg.seed,
            "checks": checks,
            "status": status,
        }
        (outdir / "summary.json").write_text(json.dumps(summary, sort_keys=True))
        return 0 if status == "pass" else CheckFailure.exit_code
    except Cp1laxError as exc:
        summary = {
            "experiment": cfg.experiment,
            "config_hash": cfg.content_hash(),
            "seed": cfg.seed,
            "error": {"type": type(exc).__name__, "message": str(exc)},
            "status": "error",
        }
        (outdir / "summary.json").write_text(json.dumps(summary, sort_keys=True))
        return exc.exit_code


def _cmd_report(directory: str) -> int:
    path = Path(directory) / "summary.json"
    if not path.exists():
        print(f"no summary.json under {directory}", file=sys.stderr)
        return ConfigurationError.exit_code
    summary = json.loads(path.read_text())
    print(f"experiment: {summary['experiment']}  status: {summary['status']}"
          f"  config: {summary['config_hash'][:12]}")
    for chk in summary.get("checks", []):
        flag = "PASS" if chk["pass"] else "FAIL"
        print(f"  [{flag}] {chk['name']}: {chk['value']:.3e} (tol {chk['tolerance']:.1e})")
    if "error" in summary:
        kind = summary["error"]["type"]
        print(f"  error: {kind}: {summary['error']['message']}")
        return ConfigurationError.exit_code if kind == "ConfigurationError" else 4
    return 0 if summary["status"] == "pass" else CheckFailure.exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cp1lax",
                                     description="sigma-model laboratory experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment in a config file")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_rep = sub.add_parser("report", help="print the summary of an output directory")
    p_rep.add_argument("directory")
    args = parser.parse_args(argv)

    try:
        if args.command == "validate":
            cfg = validate_config(args.config)
            echo = {k: (repr(v) if isinstance(v, complex) else v)
                    for k, v in vars(cfg).items() if k not in ("raw_text",)}
            print(json.dumps(echo, sort_keys=True, default=str))
            return 0
        if args.command == "run":
            cfg = validate_config(args.config)
            return run(cfg)
        return _cmd_report(args.directory)
    except Cp1laxError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
