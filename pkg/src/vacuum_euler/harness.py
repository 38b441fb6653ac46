"""Run configuration, scenario construction and study drivers."""

from __future__ import annotations

import copy
import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .calculus import CorpusRow, interpolation_corpus
from .diff import stability_ratio
from .energy import conserved_quantities, fit_gronwall_constant
from .errors import ConfigError, ContinuationViolation
from .oracle import AffineOrbit, affine_state, integrate_affine, orbit_at, orbit_csv_rows
from .regularize import regularization_study
from .state import FluidState, Grid, Params, resample, sample_fields, snapshot_from_json, snapshot_to_json
from .stepper import StepConfig, cfl_timestep, evolve_linearized, run

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION, EXIT_CHECK = 0, 2, 3, 4

# ---------------------------------------------------------------------------
# schema


def _num(lo=None, hi=None, lo_open=True, hi_open=True, nullable=False, integer=False):
    def check(path, v):
        if v is None and nullable:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(path, f"expected a number, got {v!r}")
        if integer and (not float(v).is_integer()):
            raise ConfigError(path, "expected an integer")
        v = int(v) if integer else float(v)
        if not math.isfinite(v):
            raise ConfigError(path, "must be finite")
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise ConfigError(path, f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (v >= hi if hi_open else v > hi):
            raise ConfigError(path, f"must be {'<' if hi_open else '<='} {hi}")
        return v
    return check


def _choice(*options):
    def check(path, v):
        if v not in options:
            raise ConfigError(path, f"must be one of {list(options)}")
        return v
    return check


def _string(path, v):
    if not isinstance(v, str) or not v:
        raise ConfigError(path, "expected a nonempty string")
    return v


def _opt_string(path, v):
    return None if v is None else _string(path, v)


def _phase(path, v):
    if v == "random":
        return v
    return _num()(path, v)


def _num_list(path, v):
    if not isinstance(v, list) or len(v) < 2:
        raise ConfigError(path, "expected a list of at least two numbers")
    return [_num(lo=0)(f"{path}[{i}]", x) for i, x in enumerate(v)]


def _range_pair(path, v):
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError(path, "expected [low, high]")
    lo, hi = (_num()(f"{path}[{i}]", x) for i, x in enumerate(v))
    if not lo < hi:
        raise ConfigError(path, "low must be below high")
    return [lo, hi]


SCHEMA: dict[str, Any] = {
    "scenario": (_choice("affine", "perturbed_affine", "custom_snapshot"), "affine"),
    "params": {
        "beta": (_num(lo=0), 1.0),
        "eps_star": (_num(lo=0, hi=0.5), 0.01),
    },
    "initial": {
        "a": (_num(), 0.0),
        "b": (_num(lo=0), 0.5),
        "r": (_num(lo=0), 1.0),
        "sigma_bar": (_num(lo=0), 1.0),
        "amplitude": (_num(lo=-1, hi=1), 0.1),
        "wavenumber": (_num(), 2.0),
        "phase": (_phase, 0.0),
        "snapshot": (_opt_string, None),
    },
    "step": {
        "eps": (_num(lo=0, nullable=True), None),
        "cfl_safety": (_num(lo=0, hi=1, hi_open=False), 0.5),
        "clamp_tol": (_num(lo=0), 1e-10),
        "uniform_count": (_num(lo=8, lo_open=False, nullable=True, integer=True), None),
        "c_min": (_num(lo=0, lo_open=False), 1e-3),
        "kernel_moments": (_num(lo=0, hi=6, lo_open=False, hi_open=False, integer=True), 4),
    },
    "T": (_num(lo=0, lo_open=False), 0.1),
    "node_count": (_num(lo=8, lo_open=False, integer=True), 401),
    "outputs": (_string, "out"),
    "seed": (_num(lo=0, lo_open=False, integer=True), 0),
    "diagnostics": {
        "report_every": (_num(lo=1, lo_open=False, integer=True), 1),
        "snapshot_every": (_num(lo=1, lo_open=False, integer=True), 1),
    },
    "checks": {
        "e_phys_drift": (_num(lo=0), 1e-2),
        "entropy_drift": (_num(lo=0), 1e-2),
        "gronwall_ceiling": (_num(lo=0), 20.0),
    },
    "convergence": {
        "eps_list": (_num_list, [1e-3, 5e-4, 2.5e-4]),
        "ratio_range": (_range_pair, [1.7, 2.3]),
    },
    "compare": {
        "db": (_num(lo=0), 1e-3),
        "ceiling": (_num(lo=0), 10.0),
    },
    "linearize": {
        "delta": (_num(lo=0), 1e-3),
        "ceiling": (_num(lo=0), 10.0),
    },
    "regstudy": {
        "h_min": (_num(lo=0, lo_open=False, integer=True), 2),
        "h_max": (_num(lo=0, integer=True), 6),
        "k": (_num(lo=1, lo_open=False, integer=True), 1),
        "nodes": (_num(lo=64, lo_open=False, integer=True), 1601),
        "wavenumber": (_num(), 5.0),
        "slope_ceiling": (_num(), -1.6),
    },
    "interp": {
        "nodes": (_num(lo=64, lo_open=False, integer=True), 400),
        "tolerance": (_num(lo=0), 0.1),
    },
}


def _validate(schema: dict, doc: Any, path: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(path or "<root>", "expected an object")
    unknown = sorted(set(doc) - set(schema))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    out = {}
    for key, spec in schema.items():
        sub = f"{path}.{key}" if path else key
        if isinstance(spec, dict):
            out[key] = _validate(spec, doc.get(key, {}), sub)
        else:
            check, default = spec
            out[key] = check(sub, doc[key]) if key in doc else copy.deepcopy(default)
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``data`` holds every field with defaults filled in."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def scenario(self) -> str:
        return self.data["scenario"]

    @property
    def params(self) -> Params:
        return Params(beta=self.data["params"]["beta"], eps_star=self.data["params"]["eps_star"])

    @property
    def T(self) -> float:
        return self.data["T"]

    @property
    def node_count(self) -> int:
        return self.data["node_count"]

    @property
    def outputs(self) -> str:
        return self.data["outputs"]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    def step_config(self, state: FluidState, eps: float | None = None) -> StepConfig:
        st = self.data["step"]
        if eps is None:
            eps = st["eps"] if st["eps"] is not None else cfl_timestep(state, st["cfl_safety"])
        return StepConfig(eps=eps, cfl_safety=st["cfl_safety"], clamp_tol=st["clamp_tol"],
                          uniform_count=st["uniform_count"], c_min=st["c_min"],
                          kernel_moments=st["kernel_moments"])

    def with_overrides(self, **kw) -> "RunConfig":
        d = copy.deepcopy(self.data)
        for path, value in kw.items():
            node = d
            keys = path.split(".")
            for k in keys[:-1]:
                node = node[k]
            node[keys[-1]] = value
        return parse_config(json.dumps(d))

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"malformed JSON: {exc}") from None
    data = _validate(SCHEMA, doc, "")
    if data["scenario"] == "custom_snapshot":
        snap = data["initial"]["snapshot"]
        if snap is None:
            raise ConfigError("initial.snapshot", "required for custom_snapshot")
        if not os.path.isfile(snap):
            raise ConfigError("initial.snapshot", f"file not found: {snap}")
    if data["node_count"] < 64:
        raise ConfigError("node_count", "simulation scenarios need at least 64 nodes")
    if data["regstudy"]["h_max"] - data["regstudy"]["h_min"] < 3:
        raise ConfigError("regstudy.h_max", "a study needs at least four scale indices")
    return RunConfig(data)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    return parse_config(text)


# ---------------------------------------------------------------------------
# scenarios


def initial_orbit(cfg: RunConfig) -> AffineOrbit:
    ini = cfg["initial"]
    return AffineOrbit(ini["a"], ini["b"], ini["r"], ini["sigma_bar"], cfg.params)


def initial_state(cfg: RunConfig, db: float = 0.0, nodes: int | None = None) -> FluidState:
    """Initial data of the configured scenario; ``db`` shifts the affine b (or scales a snapshot's q by 1 + db)."""
    n = nodes or cfg.node_count
    ini = cfg["initial"]
    if cfg.scenario == "custom_snapshot":
        st = snapshot_from_json(Path(ini["snapshot"]).read_text().strip().splitlines()[0], cfg.params.eps_star)
        if st.params.beta != cfg.params.beta:
            raise ConfigError("params.beta", "differs from the snapshot's beta")
        if n != st.grid.n:
            st = resample(st, Grid.uniform(st.grid.left, st.grid.right, n))
        return st.replace(q=st.q * (1 + db))
    orbit = initial_orbit(cfg)
    orbit = AffineOrbit(orbit.a, orbit.b + db, orbit.r, orbit.sigma_bar, orbit.params)
    st = affine_state(orbit, n)
    if cfg.scenario == "perturbed_affine":
        phase = ini["phase"]
        if phase == "random":
            phase = float(np.random.default_rng(cfg.seed).uniform(0, 2 * np.pi))
        sigma = ini["sigma_bar"] * (1 + ini["amplitude"] * np.sin(ini["wavenumber"] * st.x + phase))
        st = st.replace(sigma=sigma)
    return st


# ---------------------------------------------------------------------------
# output helpers


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg.outputs)
    p.mkdir(parents=True, exist_ok=True)
    return p


def sup_error_q(state: FluidState, exact: AffineOrbit) -> float:
    """sup |q - q_exact| over both grids, each q zero-extended outside its domain."""
    pts = np.union1d(state.x, np.linspace(-exact.r, exact.r, state.grid.n))
    qn, _, _ = sample_fields(state, pts)
    return float(np.max(np.abs(qn - np.maximum(exact.q(pts), 0.0))))


def relative_drift(values) -> float:
    v = np.asarray(values, float)
    return float(np.max(np.abs(v - v[0])) / abs(v[0]))


# ---------------------------------------------------------------------------
# drivers; each returns (exit status, summary dict)


def simulate(cfg: RunConfig, eps: float | None = None) -> tuple[int, dict]:
    out = _outdir(cfg)
    st0 = initial_state(cfg)
    scfg = cfg.step_config(st0, eps)
    diag = cfg["diagnostics"]
    traj = run(st0, cfg.T, scfg, report_every=diag["report_every"], snapshot_every=diag["snapshot_every"])
    with (out / "snapshots.jsonl").open("w") as fh:
        for s in traj.snapshots:
            fh.write(snapshot_to_json(s) + "\n")
    _write_csv(out / "energy.csv", traj.reports[0].CSV_HEADER, [r.csv_row() for r in traj.reports])
    e = [r.e_phys for r in traj.reports]
    m = [r.entropy_mass for r in traj.reports]
    t = [r.t for r in traj.reports]
    e2 = [r.e2k[1].total for r in traj.reports]
    b = [r.controls.b for r in traj.reports]
    summary = {
        "scenario": cfg.scenario, "eps": scfg.eps, "h": scfg.h, "T": cfg.T, "t_final": traj.final.t,
        "steps": len(traj.snapshots) - 1 if diag["snapshot_every"] == 1 else None,
        "e_phys_drift": relative_drift(e), "entropy_drift": relative_drift(m),
        "gronwall_c_fit": fit_gronwall_constant(t, e2, b),
        "gronwall_c_lstsq": fit_gronwall_constant(t, e2, b, "lstsq"),
        "violation": traj.violation,
    }
    ck = cfg["checks"]
    summary["checks_passed"] = (traj.violation is None
                                and summary["e_phys_drift"] <= ck["e_phys_drift"]
                                and summary["entropy_drift"] <= ck["entropy_drift"]
                                and summary["gronwall_c_fit"] <= ck["gronwall_ceiling"])
    _write_json(out / "summary.json", summary)
    if traj.violation is not None:
        return EXIT_VIOLATION, summary
    return (EXIT_OK if summary["checks_passed"] else EXIT_CHECK), summary


def convergence(cfg: RunConfig, eps_list=None) -> tuple[int, dict]:
    if cfg.scenario != "affine":
        raise ConfigError("scenario", "convergence studies need the affine oracle")
    out = _outdir(cfg)
    eps_list = eps_list or cfg["convergence"]["eps_list"]
    st0 = initial_state(cfg)
    exact = orbit_at(initial_orbit(cfg), cfg.T)
    errors = []
    for eps in eps_list:
        traj = run(st0, cfg.T, cfg.step_config(st0, eps), reporter=None)
        if traj.violation is not None:
            summary = {"violation": traj.violation, "eps": eps}
            _write_json(out / "summary.json", summary)
            return EXIT_VIOLATION, summary
        errors.append(sup_error_q(traj.final, exact))
    ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    lo, hi = cfg["convergence"]["ratio_range"]
    summary = {"eps": list(eps_list), "errors": errors, "ratios": ratios,
               "checks_passed": all(lo <= r <= hi for r in ratios)}
    _write_csv(out / "convergence.csv", ("eps", "sup_error_q"), zip(eps_list, errors))
    _write_json(out / "summary.json", summary)
    return (EXIT_OK if summary["checks_passed"] else EXIT_CHECK), summary


def compare(cfg: RunConfig, eps: float | None = None) -> tuple[int, dict]:
    out = _outdir(cfg)
    s1 = initial_state(cfg)
    s2 = initial_state(cfg, cfg["compare"]["db"])
    scfg = cfg.step_config(s1, eps)
    t1 = run(s1, cfg.T, scfg, reporter=None)
    t2 = run(s2, cfg.T, scfg, reporter=None)
    for tr in (t1, t2):
        if tr.violation is not None:
            summary = {"violation": tr.violation}
            _write_json(out / "summary.json", summary)
            return EXIT_VIOLATION, summary
    rep = stability_ratio(t1, t2)
    (out / "compare.json").write_text(rep.to_json() + "\n")
    (out / "compare.csv").write_text(rep.to_csv())
    ok = rep.ratio is None or rep.ratio <= cfg["compare"]["ceiling"]
    ok = ok and all(r["d_reduced"] <= r["d_full"] for r in rep.per_time)
    summary = {"d0": rep.d0, "d_sup": rep.d_sup, "ratio": rep.ratio, "mode": rep.mode, "checks_passed": ok}
    _write_json(out / "summary.json", summary)
    return (EXIT_OK if ok else EXIT_CHECK), summary


def linearize(cfg: RunConfig, eps: float | None = None) -> tuple[int, dict]:
    out = _outdir(cfg)
    st0 = initial_state(cfg)
    traj = run(st0, cfg.T, cfg.step_config(st0, eps), reporter=None)
    if traj.violation is not None:
        summary = {"violation": traj.violation}
        _write_json(out / "summary.json", summary)
        return EXIT_VIOLATION, summary
    delta = cfg["linearize"]["delta"]
    zero = np.zeros_like(st0.q)
    samples = evolve_linearized(traj, delta * st0.q, zero, zero)
    t = [s.t for s in samples]
    e = [s.e_lin for s in samples]
    b = [s.b_lin for s in samples]
    _write_csv(out / "linearized.csv", ("t", "e_lin", "b_lin"), zip(t, e, b))
    c_fit = fit_gronwall_constant(t, e, b)
    summary = {"c_fit": c_fit, "c_lstsq": fit_gronwall_constant(t, e, b, "lstsq"), "e_lin0": e[0],
               "e_lin_final": e[-1], "checks_passed": c_fit <= cfg["linearize"]["ceiling"]}
    _write_json(out / "summary.json", summary)
    return (EXIT_OK if summary["checks_passed"] else EXIT_CHECK), summary


def regstudy(cfg: RunConfig, nodes: int | None = None) -> tuple[int, dict]:
    out = _outdir(cfg)
    rs = cfg["regstudy"]
    st = initial_state(cfg, nodes=nodes or rs["nodes"])
    f = st.q * np.sin(rs["wavenumber"] * st.x)
    res = regularization_study(f, st, rs["k"], range(rs["h_min"], rs["h_max"] + 1))
    (out / "regstudy.csv").write_text(res.to_csv())
    ok = res.status == "ExactlyReproduced" or (res.error_slope <= rs["slope_ceiling"]
                                               and res.diff_slope <= rs["slope_ceiling"])
    summary = dict(res.footer(), checks_passed=ok)
    _write_json(out / "summary.json", summary)
    return (EXIT_OK if ok else EXIT_CHECK), summary


def oracle(cfg: RunConfig) -> tuple[int, dict]:
    out = _outdir(cfg)
    T = cfg.T
    hist = integrate_affine(initial_orbit(cfg), T, T / 1000)
    rows = orbit_csv_rows(hist)
    _write_csv(out / "oracle.csv", ("t", "a", "b", "r", "br_power_invariant"), rows)
    inv = [r[4] for r in rows]
    summary = {"error_estimate": hist.error_estimate, "invariant_drift": relative_drift(inv), "checks_passed": True}
    _write_json(out / "summary.json", summary)
    return EXIT_OK, summary


def _hardy_state(n: int, params: Params) -> FluidState:
    g = Grid.uniform(0.0, 1.0, n)
    x = g.nodes
    q = x * (1 - x)
    q[0] = q[-1] = 0.0
    return FluidState(g, q, np.zeros(n), np.ones(n), params)


def interp_check(cfg: RunConfig, nodes: int | None = None) -> tuple[int, dict]:
    out = _outdir(cfg)
    n = nodes or cfg["interp"]["nodes"]
    base = initial_state(cfg)
    maxima = []
    rows_by_n: dict[int, list[CorpusRow]] = {}
    for m in (n, 2 * n):
        st = resample(base, Grid.uniform(base.grid.left, base.grid.right, m))
        rows = interpolation_corpus(st, _hardy_state(m, cfg.params))
        rows_by_n[m] = rows
        maxima.append(max(r.ratio for r in rows))
    _write_csv(out / "interp.csv", CorpusRow.CSV_HEADER, [r.csv_fields() for r in rows_by_n[n]])
    finite = all(math.isfinite(r.ratio) for rows in rows_by_n.values() for r in rows)
    stable = abs(maxima[1] / maxima[0] - 1) <= cfg["interp"]["tolerance"]
    summary = {"max_ratio": maxima[0], "max_ratio_refined": maxima[1], "all_finite": finite,
               "checks_passed": finite and stable}
    _write_json(out / "summary.json", summary)
    return (EXIT_OK if summary["checks_passed"] else EXIT_CHECK), summary


DRIVERS: dict[str, Callable[..., tuple[int, dict]]] = {
    "simulate": simulate,
    "convergence": convergence,
    "compare": compare,
    "linearize": linearize,
    "regstudy": regstudy,
    "oracle": oracle,
    "interp-check": interp_check,
}


def run_scenario(cfg: RunConfig, command: str = "simulate", **kw) -> tuple[int, dict]:
    """Execute one driver, turning aborts into exit codes with a written record."""
    try:
        return DRIVERS[command](cfg, **kw)
    except ContinuationViolation as exc:
        out = _outdir(cfg)
        summary = {"violation": exc.record()}
        _write_json(out / "summary.json", summary)
        return EXIT_VIOLATION, summary
