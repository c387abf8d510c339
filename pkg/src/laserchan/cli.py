"""Command-line front end.

    laserchan evolve   --config scenario.json [--out DIR]
    laserchan validate --config scenario.json
    laserchan steady   --g 1 --kappa 2

Exit codes: 0 success, 1 invalid input or failed check, 2 truncation overflow.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    MAX_DIM,
    LaserParams,
    equivalent_temperature,
    evolve_auto,
    evolve_diagonal,
    evolve_fock,
    t_coeffs,
    trace_defect,
)
from .entropy import coherent_entropy, steady_entropy
from .errors import LaserChanError, TruncationError
from .fock import (
    coherent_mixture,
    coherent_required_dim,
    coherent_state,
    diagonal_to_matrix,
    expect_a2dag_a2,
    expect_n,
    number_state,
    offdiag_ratio,
    thermal_required_dim,
    thermal_state,
    validate_diagonal,
    von_neumann_entropy,
)
from .heisenberg import expected_n, g2
from .lindblad import integrate

DEFAULT_MAX_DIM = 2048
CSV_COLUMNS = ("t", "n_mean", "n2_normal", "g2", "entropy_nats", "trace_defect", "offdiag_ratio")
G2_MIN_MEAN = 1e-12
DEFAULT_TOLERANCES = {
    "tail": 1e-10,
    "diag": 1e-8,
    "frobenius": 1e-6,
    "observable": 1e-6,
    "entropy": 1e-6,
    "diagonal_path": 1e-10,
}
STATE_FIELDS = {
    "number": ("n",),
    "coherent": ("re", "im"),
    "thermal": ("nbar",),
    "diagonal": ("probs",),
    "coherent_mixture": ("weights", "amps"),
}


class ConfigError(LaserChanError):
    """Scenario file is unreadable or has an invalid field."""


@dataclass
class ScenarioConfig:
    g: float
    kappa: float
    t_grid: list[float]
    initial_state: dict
    out_dim: int = 64
    max_dim: int | None = None
    auto_grow: bool = True
    workers: int = 1
    tolerances: dict = field(default_factory=dict)

    @property
    def params(self) -> LaserParams:
        return LaserParams(self.g, self.kappa)

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def ceiling(self) -> int:
        if self.max_dim is not None:
            return int(self.max_dim)
        env = os.environ.get("LASERCHAN_MAX_DIM")
        if env:
            try:
                return int(env)
            except ValueError as err:
                raise ConfigError(f"LASERCHAN_MAX_DIM: expected an integer, got {env!r}") from err
        return DEFAULT_MAX_DIM

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a JSON object")
        known = {"g", "kappa", "t_grid", "initial_state", "out_dim", "max_dim", "auto_grow", "workers", "tolerances"}
        extra = sorted(set(raw) - known)
        if extra:
            raise ConfigError(f"config: unknown field(s) {', '.join(extra)}")
        for key in ("g", "kappa", "t_grid", "initial_state"):
            if key not in raw:
                raise ConfigError(f"{key}: required field is missing")
        g = _number(raw, "g", minimum=0.0)
        kappa = _number(raw, "kappa", minimum=0.0)
        if g == 0 and kappa == 0:
            raise ConfigError("g, kappa: gain and loss cannot both be zero")
        t_grid = _parse_grid(raw["t_grid"])
        state = raw["initial_state"]
        if not isinstance(state, dict) or state.get("type") not in STATE_FIELDS:
            raise ConfigError(f"initial_state.type: must be one of {', '.join(STATE_FIELDS)}")
        for f in STATE_FIELDS[state["type"]]:
            if f not in state and not (state["type"] == "coherent" and f == "im"):
                raise ConfigError(f"initial_state.{f}: required for type {state['type']!r}")
        out_dim = raw.get("out_dim", 64)
        if not isinstance(out_dim, int) or isinstance(out_dim, bool) or out_dim < 2:
            raise ConfigError(f"out_dim: must be an integer >= 2, got {out_dim!r}")
        max_dim = raw.get("max_dim")
        if max_dim is not None and (not isinstance(max_dim, int) or max_dim < 2):
            raise ConfigError(f"max_dim: must be an integer >= 2, got {max_dim!r}")
        workers = raw.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError(f"workers: must be a positive integer, got {workers!r}")
        tolerances = raw.get("tolerances", {})
        if not isinstance(tolerances, dict):
            raise ConfigError("tolerances: must be an object")
        for k, v in tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"tolerances.{k}: unknown tolerance (known: {', '.join(DEFAULT_TOLERANCES)})")
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerances.{k}: must be a positive number")
        return cls(g, kappa, t_grid, dict(state), out_dim, max_dim, bool(raw.get("auto_grow", True)), workers, tolerances)


def _number(raw, key, minimum=None):
    v = raw[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ConfigError(f"{key}: expected a finite number, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {v!r}")
    return float(v)


def _parse_grid(raw) -> list[float]:
    if isinstance(raw, dict):
        try:
            grid = np.linspace(float(raw["start"]), float(raw["stop"]), int(raw["num"])).tolist()
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError("t_grid: object form needs numeric start, stop and num") from err
    elif isinstance(raw, list) and raw:
        if not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in raw):
            raise ConfigError("t_grid: entries must be numbers")
        grid = [float(t) for t in raw]
    else:
        raise ConfigError("t_grid: expected a non-empty list or {start, stop, num}")
    if any(not math.isfinite(t) or t < 0 for t in grid):
        raise ConfigError("t_grid: times must be finite and non-negative")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigError("t_grid: times must be ascending")
    return grid


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"{path}: cannot read config ({err.strerror})") from err
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err
    return ScenarioConfig.from_dict(raw)


def build_initial_state(entry: dict):
    """Return ``(state, is_diagonal)``; diagonal states are probability vectors."""
    kind = entry["type"]
    try:
        if kind == "number":
            n = entry["n"]
            if not isinstance(n, int) or n < 0:
                raise ConfigError(f"initial_state.n: must be a non-negative integer, got {n!r}")
            p = np.zeros(n + 1)
            p[n] = 1.0
            return p, True
        if kind == "thermal":
            nbar = float(entry["nbar"])
            return thermal_state(nbar, max(thermal_required_dim(nbar), 1)), True
        if kind == "diagonal":
            p = validate_diagonal(entry["probs"])
            return p / p.sum(), True
        if kind == "coherent":
            z = complex(float(entry["re"]), float(entry.get("im", 0.0)))
            return coherent_state(z, coherent_required_dim(z)), False
        if kind == "coherent_mixture":
            amps = [_complex(a) for a in entry["amps"]]
            dim = max(coherent_required_dim(z) for z in amps) if amps else 1
            return coherent_mixture(entry["weights"], amps, dim), False
    except ConfigError:
        raise
    except (LaserChanError, TypeError, ValueError) as err:
        raise ConfigError(f"initial_state: {err}") from err
    raise ConfigError(f"initial_state.type: unknown type {kind!r}")


def _complex(a):
    if isinstance(a, (list, tuple)) and len(a) == 2:
        return complex(float(a[0]), float(a[1]))
    if isinstance(a, dict):
        return complex(float(a.get("re", 0.0)), float(a.get("im", 0.0)))
    return complex(float(a))


@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    n_mean: float
    n2_normal: float
    g2: float | None
    entropy_nats: float
    trace_defect: float
    offdiag_ratio: float

    @classmethod
    def from_state(cls, t, state) -> "TimeSeriesRecord":
        n = expect_n(state)
        n2 = expect_a2dag_a2(state)
        return cls(
            t=float(t),
            n_mean=n,
            n2_normal=n2,
            g2=(n2 / n**2) if n >= G2_MIN_MEAN else None,
            entropy_nats=von_neumann_entropy(state),
            trace_defect=trace_defect(state),
            offdiag_ratio=offdiag_ratio(state),
        )


def _fmt(x):
    return "" if x is None else format(float(x), ".17g")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _evolve_point(cfg: ScenarioConfig, state, diagonal: bool, t: float):
    fn = evolve_diagonal if diagonal else evolve_fock
    kw = {"tail_tol": cfg.tol("tail"), "diag_tol": cfg.tol("diag")}
    ceiling = cfg.ceiling() if diagonal else min(cfg.ceiling(), MAX_DIM)
    start = min(max(cfg.out_dim, 2), ceiling)
    if not cfg.auto_grow:
        return fn(state, cfg.params, t, start, **kw), start
    return evolve_auto(fn, state, cfg.params, t, start, max_dim=ceiling, **kw)


def run_evolve(cfg: ScenarioConfig):
    """Evolve the scenario over its time grid; returns ``(records, dims_used)``."""
    state, diagonal = build_initial_state(cfg.initial_state)

    def point(t):
        rho, dim = _evolve_point(cfg, state, diagonal, t)
        return TimeSeriesRecord.from_state(t, rho), dim

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(point, cfg.t_grid))
    else:
        results = [point(t) for t in cfg.t_grid]
    return [r for r, _ in results], [d for _, d in results]


def cmd_evolve(cfg: ScenarioConfig, out_dir=None, stdout=None) -> int:
    records, dims = run_evolve(cfg)
    text = records_to_csv(records)
    if out_dir is None:
        (stdout or sys.stdout).write(text)
        return 0
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "timeseries.csv").write_text(text)
    summary = {
        "version": __version__,
        "g": cfg.g,
        "kappa": cfg.kappa,
        "regime": cfg.params.regime.value,
        "initial_state": cfg.initial_state,
        "out_dim_used": dims,
        "final": asdict(records[-1]),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def _check(name, t, value, tol):
    return {"name": name, "t": t, "value": float(value), "tol": tol, "passed": bool(value <= tol)}


def run_validate(cfg: ScenarioConfig) -> dict:
    """Compare the Kraus solution with the RK4 oracle and the closed forms."""
    params = cfg.params
    state, diagonal = build_initial_state(cfg.initial_state)
    rho0 = diagonal_to_matrix(state) if diagonal else state
    n0 = expect_n(rho0)
    g2_0 = expect_a2dag_a2(rho0) / n0**2 if n0 > 0 else None
    checks = []
    kw = {"tail_tol": cfg.tol("tail"), "diag_tol": cfg.tol("diag")}
    for t in cfg.t_grid:
        try:
            rho_t = evolve_fock(rho0, params, t, cfg.out_dim, **kw)
        except TruncationError as err:
            return {
                "passed": False,
                "truncation": {"t": t, "out_dim": cfg.out_dim, "suggested_out_dim": err.required_dim,
                               "trace_defect": err.trace_defect, "message": str(err)},
                "checks": checks,
                "max_discrepancy": _maxima(checks),
            }
        rk = integrate(rho0, params, t, dim=cfg.out_dim)
        checks.append(_check("kraus_vs_rk4_frobenius", t, np.linalg.norm(rho_t - rk), cfg.tol("frobenius")))
        n_num = expect_n(rho_t)
        n_cf = expected_n(params, t, n0)
        checks.append(_check("n_mean_closed_form", t, abs(n_num - n_cf) / max(1.0, abs(n_cf)), cfg.tol("observable")))
        if g2_0 is not None and n_num >= G2_MIN_MEAN:
            g2_num = expect_a2dag_a2(rho_t) / n_num**2
            checks.append(_check("g2_closed_form", t, abs(g2_num - g2(params, t, n0, g2_0)), cfg.tol("observable")))
        if diagonal:
            p_t = evolve_diagonal(state, params, t, cfg.out_dim, check=False)
            diff = np.max(np.abs(p_t - np.real(np.diagonal(rho_t))))
            checks.append(_check("diagonal_fast_path", t, diff, cfg.tol("diagonal_path")))
        if cfg.initial_state["type"] == "coherent":
            diff = abs(von_neumann_entropy(rho_t) - coherent_entropy(params, t))
            checks.append(_check("coherent_entropy_closed_form", t, diff, cfg.tol("entropy")))
    balanced = any(t_coeffs(params, t).balanced_branch and t > 0 for t in cfg.t_grid)
    return {
        "passed": all(c["passed"] for c in checks),
        "balanced_branch_exercised": balanced,
        "checks": checks,
        "max_discrepancy": _maxima(checks),
    }


def _maxima(checks):
    out = {}
    for c in checks:
        out[c["name"]] = max(out.get(c["name"], 0.0), c["value"])
    return out


def cmd_steady(g: float, kappa: float) -> dict:
    params = LaserParams(g, kappa)
    return {
        "g": g,
        "kappa": kappa,
        "n_mean": g / (kappa - g) if kappa > g else None,
        "g2": 2.0,
        "entropy_nats": steady_entropy(params),
        "temperature": equivalent_temperature(params),
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="laserchan", description="Laser-channel evolution via its Kraus-form solution")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("evolve", help="evolve a scenario and write its time series")
    ev.add_argument("--config", required=True)
    ev.add_argument("--out", default=None, help="output directory (CSV to stdout if omitted)")
    va = sub.add_parser("validate", help="cross-check Kraus evolution against RK4 and closed forms")
    va.add_argument("--config", required=True)
    st = sub.add_parser("steady", help="steady-state observables for kappa > g")
    st.add_argument("--g", type=float, required=True)
    st.add_argument("--kappa", type=float, required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "evolve":
            return cmd_evolve(load_config(args.config), args.out)
        if args.command == "validate":
            report = run_validate(load_config(args.config))
            print(json.dumps(report, indent=2, sort_keys=True))
            if "truncation" in report:
                return 2
            return 0 if report["passed"] else 1
        if args.command == "steady":
            print(json.dumps(cmd_steady(args.g, args.kappa), indent=2, sort_keys=True))
            return 0
    except TruncationError as err:
        hint = f" (suggested out_dim >= {err.required_dim})" if err.required_dim and "out_dim >=" not in str(err) else ""
        print(f"laserchan: truncation overflow: {err}{hint}", file=sys.stderr)
        return 2
    except LaserChanError as err:
        print(f"laserchan: {err}", file=sys.stderr)
        return 1
    return 1
