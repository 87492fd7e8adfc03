"""Experiment configs, single runs, parameter sweeps and batch verification.

Configs are JSON documents. A scheduling config::

    {"problem": "scheduling",
     "matrix": [[0.2, 0.16, 0.14], ...],        # or "random": {...}
     "horizon": 3,                               # optional, <= #columns
     "run_oracle": true, "oracle_cap": 10000000,
     "tolerance": 1e-12, "seed": 0,
     "reference": {"beta2": 0.7816}}             # optional printed values

``"random": {"N": 5, "K": 3, "value_range": [0.05, 0.25],
"stage_decreasing": false}`` draws the matrix from ``seed``.

A coverage config replaces the matrix with a grid::

    {"problem": "coverage", "horizon": 5,
     "grid": {"width": 25, "height": 20, "lambda": 1.0, "mass_kind": "linear"}}

or ``"grid": {"points": [[x, y], ...], "mass": [...], "lambda": 1.0}``.

A sweep spec wraps a base config::

    {"param": "lambda", "values": [0.5, 1, 2, 4], "base": {...}}

A verification batch (``verify`` only) replaces the instance with
``"batch": {"count": 500, "N_max": 6, "K_max": 4, "value_range": [...]}``.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels
from .bounds import (DEFAULT_TOL, Verdict, certify, check_assumptions,
                     check_string_submodular, compute_bounds)
from .core import DEFAULT_ORACLE_CAP, brute_force_optimum, greedy_solve
from .errors import ConfigError, EnumerationTooLarge, StrGreedyError
from .problems import (SuccessMatrix, coverage_constraint, coverage_objective,
                       point_grid, random_scheduling_instance, rectangular_grid,
                       scheduling_constraint, scheduling_objective)

CSV_COLUMNS = ("param_value", "K", "lambda", "f_greedy", "alpha_G", "beta0",
               "beta_nemhauser", "beta1", "beta2", "beta_stepwise", "a1", "a2",
               "a3", "ratio", "runtime_ms")

PROBLEMS = ("scheduling", "coverage")
SWEEP_PARAMS = ("lambda", "K")
# printed reference figures are given to 4 decimals
REFERENCE_TOL = 5e-5

EXIT_OK, EXIT_CONFIG, EXIT_CERT = 0, 1, 2


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _line_of(text, key):
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _need(d, key, kind, where, text=None, default=...):
    if key not in d:
        if default is ...:
            raise ConfigError("missing required field", f"{where}{key}",
                              _line_of(text, where.rstrip(".").split(".")[-1]) if where else None)
        return default
    val = d[key]
    ok = isinstance(val, kind) and not (kind in (int, (int, float)) and isinstance(val, bool))
    if not ok:
        name = getattr(kind, "__name__", None) or "/".join(k.__name__ for k in kind)
        raise ConfigError(f"expected {name}, got {type(val).__name__}",
                          f"{where}{key}", _line_of(text, key))
    return val


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    horizon: int
    matrix: tuple | None = None
    random: dict | None = None
    grid: dict | None = None
    batch: dict | None = None
    run_oracle: bool = True
    oracle_cap: int = DEFAULT_ORACLE_CAP
    tolerance: float = DEFAULT_TOL
    seed: int = 0
    all_optima: bool = False
    reference: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d, text=None):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"problem", "horizon", "matrix", "random", "grid", "batch",
                 "run_oracle", "oracle_cap", "tolerance", "seed", "all_optima",
                 "reference", "name", "comment"}
        for k in d:
            if k not in known:
                raise ConfigError("unknown field", k, _line_of(text, k))
        problem = _need(d, "problem", str, "", text)
        if problem not in PROBLEMS:
            raise ConfigError(f"must be one of {PROBLEMS}", "problem",
                              _line_of(text, "problem"))
        kw = dict(
            run_oracle=_need(d, "run_oracle", bool, "", text, True),
            oracle_cap=_need(d, "oracle_cap", (int, float), "", text, DEFAULT_ORACLE_CAP),
            tolerance=float(_need(d, "tolerance", (int, float), "", text, DEFAULT_TOL)),
            seed=_need(d, "seed", int, "", text, 0),
            all_optima=_need(d, "all_optima", bool, "", text, False),
            reference=_need(d, "reference", dict, "", text, {}),
        )
        kw["oracle_cap"] = int(kw["oracle_cap"])
        if kw["oracle_cap"] < 1:
            raise ConfigError("must be positive", "oracle_cap", _line_of(text, "oracle_cap"))
        if kw["tolerance"] < 0:
            raise ConfigError("must be nonnegative", "tolerance", _line_of(text, "tolerance"))
        horizon = d.get("horizon")
        if horizon is not None:
            horizon = _need(d, "horizon", int, "", text)
            if horizon < 1:
                raise ConfigError("must be >= 1", "horizon", _line_of(text, "horizon"))

        sources = [k for k in ("matrix", "random", "grid", "batch") if k in d]
        if len(sources) != 1:
            raise ConfigError("exactly one of matrix/random/grid/batch is required",
                              None, None)
        src = sources[0]
        if problem == "scheduling" and src == "grid":
            raise ConfigError("scheduling configs take matrix, random or batch", "grid",
                              _line_of(text, "grid"))
        if problem == "coverage" and src != "grid":
            raise ConfigError("coverage configs take a grid", src, _line_of(text, src))

        if src == "matrix":
            rows = _need(d, "matrix", list, "", text)
            try:
                m = SuccessMatrix(rows)
            except (ValueError, TypeError) as exc:
                raise ConfigError(str(exc), "matrix", _line_of(text, "matrix")) from None
            horizon = horizon if horizon is not None else m.K
            if horizon > m.K:
                raise ConfigError(f"exceeds the {m.K} stage columns", "horizon",
                                  _line_of(text, "horizon"))
            kw["matrix"] = tuple(tuple(r) for r in m.tolist())
        elif src == "random":
            r = _need(d, "random", dict, "", text)
            N = _need(r, "N", int, "random.", text)
            K = _need(r, "K", int, "random.", text)
            vr = _need(r, "value_range", list, "random.", text, [0.05, 0.95])
            if len(vr) != 2:
                raise ConfigError("expected [low, high]", "random.value_range",
                                  _line_of(text, "value_range"))
            sd = _need(r, "stage_decreasing", bool, "random.", text, False)
            if not N >= K >= 1:
                raise ConfigError("need N >= K >= 1", "random", _line_of(text, "random"))
            horizon = horizon if horizon is not None else K
            if horizon > K:
                raise ConfigError(f"exceeds random.K = {K}", "horizon",
                                  _line_of(text, "horizon"))
            kw["random"] = {"N": N, "K": K, "value_range": [float(v) for v in vr],
                            "stage_decreasing": sd}
        elif src == "grid":
            g = _need(d, "grid", dict, "", text)
            lam = float(_need(g, "lambda", (int, float), "grid.", text))
            if lam <= 0:
                raise ConfigError("must be positive", "grid.lambda", _line_of(text, "lambda"))
            if "points" in g:
                pts = _need(g, "points", list, "grid.", text)
                mass = _need(g, "mass", list, "grid.", text, [1.0] * len(pts))
                try:
                    grid = point_grid(pts, mass, lam)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(str(exc), "grid.points", _line_of(text, "points")) from None
                kw["grid"] = {"points": grid.points.tolist(),
                              "mass": grid.mass.tolist(), "lambda": lam}
                n = grid.n
            else:
                w = _need(g, "width", int, "grid.", text)
                h = _need(g, "height", int, "grid.", text)
                mk = _need(g, "mass_kind", str, "grid.", text, "uniform")
                if w < 1 or h < 1:
                    raise ConfigError("grid must be at least 1x1", "grid", _line_of(text, "grid"))
                if mk not in ("uniform", "linear"):
                    raise ConfigError("must be 'uniform' or 'linear'", "grid.mass_kind",
                                      _line_of(text, "mass_kind"))
                kw["grid"] = {"width": w, "height": h, "lambda": lam, "mass_kind": mk}
                n = w * h
            if horizon is None:
                raise ConfigError("missing required field", "horizon", None)
            if horizon > n:
                raise ConfigError(f"exceeds the {n} feasible points", "horizon",
                                  _line_of(text, "horizon"))
        else:
            b = _need(d, "batch", dict, "", text)
            kw["batch"] = {
                "count": _need(b, "count", int, "batch.", text),
                "N_max": _need(b, "N_max", int, "batch.", text),
                "K_max": _need(b, "K_max", int, "batch.", text),
                "value_range": [float(v) for v in
                                _need(b, "value_range", list, "batch.", text, [0.05, 0.95])],
            }
            if kw["batch"]["count"] < 1 or kw["batch"]["K_max"] < 1 \
                    or kw["batch"]["N_max"] < kw["batch"]["K_max"]:
                raise ConfigError("need count >= 1 and N_max >= K_max >= 1", "batch",
                                  _line_of(text, "batch"))
            horizon = horizon if horizon is not None else kw["batch"]["K_max"]
        return cls(problem=problem, horizon=horizon, **kw)

    def to_dict(self):
        d = {"problem": self.problem, "horizon": self.horizon}
        for k in ("matrix", "random", "grid", "batch"):
            v = getattr(self, k)
            if v is not None:
                d[k] = [list(r) for r in v] if k == "matrix" else copy.deepcopy(v)
        d.update(run_oracle=self.run_oracle, oracle_cap=self.oracle_cap,
                 tolerance=self.tolerance, seed=self.seed,
                 all_optima=self.all_optima)
        if self.reference:
            d["reference"] = dict(self.reference)
        return d

    @property
    def decay(self):
        return None if self.grid is None else self.grid["lambda"]

    def with_param(self, param, value):
        """Copy with the swept parameter replaced."""
        if param == "K":
            if float(value) != int(value):
                raise ConfigError("K values must be integers", "values")
            return ExperimentConfig.from_dict({**self.to_dict(), "horizon": int(value)})
        if param == "lambda":
            if self.grid is None:
                raise ConfigError("lambda sweeps need a coverage config", "param")
            d = self.to_dict()
            d["grid"] = {**d["grid"], "lambda": float(value)}
            return ExperimentConfig.from_dict(d)
        raise ConfigError(f"must be one of {SWEEP_PARAMS}", "param")


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple
    base: ExperimentConfig

    @classmethod
    def from_dict(cls, d, text=None):
        if not isinstance(d, dict):
            raise ConfigError("sweep spec must be a JSON object")
        param = _need(d, "param", str, "", text)
        if param not in SWEEP_PARAMS:
            raise ConfigError(f"must be one of {SWEEP_PARAMS}", "param", _line_of(text, "param"))
        values = _need(d, "values", list, "", text)
        if not values or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                 for v in values):
            raise ConfigError("must be a non-empty list of numbers", "values",
                              _line_of(text, "values"))
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("must be strictly increasing", "values", _line_of(text, "values"))
        base = ExperimentConfig.from_dict(_need(d, "base", dict, "", text), text)
        if base.batch is not None:
            raise ConfigError("sweeps need a single instance, not a batch", "base.batch")
        return cls(param, tuple(values), base)


def _read_json(path):
    path = str(path)
    if path.startswith("bundled:"):
        name = path[len("bundled:"):]
        if not name.endswith(".json"):
            name += ".json"
        entry = resources.files("strgreedy.data").joinpath(name)
        if not entry.is_file():
            available = sorted(p.name[:-5] for p in resources.files("strgreedy.data").iterdir()
                               if p.name.endswith(".json"))
            raise ConfigError(f"no bundled config {name[:-5]!r}; available: "
                              + ", ".join(available))
        text = entry.read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})",
                          line=exc.lineno) from None


def load_config(path) -> ExperimentConfig:
    d, text = _read_json(path)
    return ExperimentConfig.from_dict(d, text)


def load_sweep(path) -> SweepSpec:
    d, text = _read_json(path)
    return SweepSpec.from_dict(d, text)


def bundled(name) -> str:
    """Path spec for a bundled fixture, usable wherever a config path is."""
    return f"bundled:{name}"


# ---------------------------------------------------------------------------
# Instance construction and single runs
# ---------------------------------------------------------------------------

def build_instance(config: ExperimentConfig):
    """Return ``(objective, constraint)`` for a config."""
    if config.problem == "scheduling":
        if config.matrix is not None:
            p = np.asarray(config.matrix)
        elif config.random is not None:
            r = config.random
            p = random_scheduling_instance(config.seed, r["N"], r["K"],
                                           tuple(r["value_range"]),
                                           r["stage_decreasing"]).p
        else:
            raise ConfigError("batch configs describe many instances; use verify", "batch")
        m = SuccessMatrix(p[:, :config.horizon])
        return scheduling_objective(m), scheduling_constraint(m)
    g = config.grid
    if "points" in g:
        grid = point_grid(g["points"], g["mass"], g["lambda"])
    else:
        grid = rectangular_grid(g["width"], g["height"], g["lambda"], g["mass_kind"])
    return coverage_objective(grid, config.horizon), coverage_constraint(grid, config.horizon)


@dataclass
class RunResult:
    config: ExperimentConfig
    trace: object
    bounds: object
    assumptions: object
    optimum: object = None
    certification: object = None
    submodular: object = None
    runtime_ms: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def ratio(self):
        return None if self.certification is None else self.certification.ratio

    def reference_comparison(self):
        """Compare printed reference figures with computed values."""
        out = {}
        for name, ref in self.config.reference.items():
            if name == "ratio":
                got = self.ratio
            else:
                got = getattr(self.bounds, name, None)
            if got is None:
                out[name] = {"reference": ref, "computed": None, "matches": False}
                continue
            diff = got - ref
            out[name] = {"reference": ref, "computed": got, "abs_diff": abs(diff),
                         "matches": abs(diff) <= REFERENCE_TOL}
        return out

    def to_dict(self):
        sub = None
        if self.submodular is not None:
            s = self.submodular
            sub = {"holds": s.holds, "n_checked": s.n_checked}
            if not s.holds:
                sub.update(condition=s.condition, A=list(s.A), B=list(s.B), j=s.j,
                           lhs=s.lhs, rhs=s.rhs)
        return {
            "config": self.config.to_dict(),
            "backend": _kernels.BACKEND,
            "trace": self.trace.to_dict(),
            "bounds": self.bounds.to_dict(),
            "assumptions": self.assumptions.to_dict(),
            "optimum": None if self.optimum is None else self.optimum.to_dict(),
            "certification": (None if self.certification is None
                              else self.certification.to_dict()),
            "string_submodular": sub,
            "reference_comparison": self.reference_comparison(),
            "warnings": list(self.warnings) + list(self.bounds.warnings),
        }

    @property
    def exit_code(self):
        if self.certification is not None and not self.certification.ok:
            return EXIT_CERT
        return EXIT_OK


def run(config: ExperimentConfig, check_submodular: bool | None = None) -> RunResult:
    """Greedy, bounds and assumption checks; oracle and certification when enabled.

    If the oracle would exceed ``oracle_cap`` the run downgrades to bounds
    only and records a warning.
    """
    objective, constraint = build_instance(config)
    t0 = time.perf_counter()
    trace = greedy_solve(objective, constraint)
    bounds = compute_bounds(trace)
    warnings = []
    optimum = cert = sub = None
    if config.run_oracle:
        try:
            optimum = brute_force_optimum(objective, constraint, cap=config.oracle_cap)
        except EnumerationTooLarge as exc:
            warnings.append(f"oracle skipped: {exc}")
    assumptions = check_assumptions(trace, objective, constraint, optimum,
                                    config.tolerance, config.all_optima)
    if optimum is not None:
        cert = certify(trace, optimum, bounds, assumptions)
        if check_submodular is None or check_submodular:
            sub = check_string_submodular(objective, constraint, config.tolerance,
                                          config.oracle_cap)
    runtime = (time.perf_counter() - t0) * 1e3
    return RunResult(config, trace, bounds, assumptions, optimum, cert, sub,
                     runtime, warnings)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Verdict):
        return x.value
    if isinstance(x, float) and not math.isfinite(x):
        return ""
    return format(float(x), ".10g")


def csv_row(result: RunResult, param_value=None, timing: bool = False) -> dict:
    b, a = result.bounds, result.assumptions
    return {
        "param_value": _fmt(param_value),
        "K": _fmt(b.K),
        "lambda": _fmt(result.config.decay),
        "f_greedy": _fmt(b.greedy_value),
        "alpha_G": _fmt(b.alpha_G),
        "beta0": _fmt(b.beta0),
        "beta_nemhauser": _fmt(b.beta_nemhauser),
        "beta1": _fmt(b.beta1),
        "beta2": _fmt(b.beta2),
        "beta_stepwise": _fmt(b.beta_stepwise),
        "a1": a.a1.verdict.value,
        "a2": a.a2.verdict.value,
        "a3": a.a3.verdict.value,
        "ratio": _fmt(result.ratio),
        "runtime_ms": _fmt(result.runtime_ms) if timing else "",
    }


def write_csv(rows, path=None) -> str:
    """Header plus rows in :data:`CSV_COLUMNS` order, LF line endings."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="")
    return text


def write_run(result: RunResult, out_dir, timing: bool = False):
    """Write ``report.json`` and ``summary.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(result.to_dict(), indent=2) + "\n",
                                     encoding="utf-8")
    write_csv([csv_row(result, timing=timing)], out / "summary.csv")
    return out / "report.json", out / "summary.csv"


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sweep(spec: SweepSpec, workers: int = 1, timing: bool = False,
          check_submodular: bool = False):
    """Run one experiment per swept value; rows come back in sweep order."""
    configs = [spec.base.with_param(spec.param, v) for v in spec.values]

    def one(cfg):
        return run(cfg, check_submodular=check_submodular)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, configs))
    else:
        results = [one(c) for c in configs]
    rows = [csv_row(r, v, timing) for r, v in zip(results, spec.values)]
    return results, rows


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass
class BatchSummary:
    count: int = 0
    supported: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    assumption_counts: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations


def batch_configs(config: ExperimentConfig):
    """Expand a batch config into seeded random scheduling configs.

    Instance ``i`` uses seed ``config.seed + i``; its horizon and pool size
    are drawn from the same seed, and every other instance is made
    stage-decreasing.
    """
    b = config.batch
    for i in range(b["count"]):
        seed = config.seed + i
        rng = np.random.default_rng([seed, 1])
        K = int(rng.integers(1, b["K_max"] + 1))
        N = int(rng.integers(K, b["N_max"] + 1))
        yield ExperimentConfig(
            problem="scheduling", horizon=K,
            random={"N": N, "K": K, "value_range": list(b["value_range"]),
                    "stage_decreasing": i % 2 == 0},
            run_oracle=True, oracle_cap=config.oracle_cap,
            tolerance=config.tolerance, seed=seed, all_optima=config.all_optima)


def verify_batch(config: ExperimentConfig) -> BatchSummary:
    summary = BatchSummary()
    for cfg in batch_configs(config):
        res = run(cfg, check_submodular=False)
        summary.count += 1
        key = "".join("1" if v is Verdict.HOLDS else "0"
                      for v in res.assumptions.verdicts)
        summary.assumption_counts[key] = summary.assumption_counts.get(key, 0) + 1
        for c in res.certification.checks:
            if c.supported:
                summary.supported[c.name] = summary.supported.get(c.name, 0) + 1
            if c.certified is False:
                summary.violations.append((cfg.seed, c.name, c.value, res.ratio))
    return summary


def format_certification(result: RunResult) -> str:
    cert = result.certification
    lines = [f"ratio f(G)/f(O) = {cert.ratio:.10g}  "
             f"(greedy {cert.greedy_value:.10g}, optimum {cert.optimum_value:.10g})",
             "assumptions: " + "  ".join(f"{c.name}={c.verdict.value}" for c in
                                         (result.assumptions.a1, result.assumptions.a2,
                                          result.assumptions.a3))]
    for c in cert.checks:
        if c.value is None:
            lines.append(f"{c.name:<15} undefined")
            continue
        status = {True: "PASS", False: "FAIL", None: "uncertified"}[c.certified]
        lines.append(f"{c.name:<15} {c.value:.10g}  {status:<11} margin {c.margin:+.10g}")
    for name, cmp_ in result.reference_comparison().items():
        flag = "matches" if cmp_["matches"] else "MISMATCH"
        lines.append(f"reference {name}: printed {cmp_['reference']} computed "
                     f"{_fmt(cmp_['computed'])} -> {flag}")
    return "\n".join(lines)


__all__ = [
    "CSV_COLUMNS", "ExperimentConfig", "SweepSpec", "RunResult", "BatchSummary",
    "load_config", "load_sweep", "bundled", "build_instance", "run", "sweep",
    "csv_row", "write_csv", "write_run", "verify_batch", "batch_configs",
    "format_certification", "EXIT_OK", "EXIT_CONFIG", "EXIT_CERT",
    "StrGreedyError",
]
