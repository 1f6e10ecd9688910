"""Benchmark orchestration: synthetic datasets, budgeted optimizer sweeps,
and deterministic reports.

Seeding rule (documented contract): the master seed feeds a SeedSequence
whose children are, in order, [profile-generation, measurement-noise,
repetition 0, repetition 1, ...].  Every method in repetition r receives the
same child seed, so GD's random start, PSO's first particle, and BO's
initial design are paired across methods — the ordering comparison is
paired by construction.

Report layout: the ``results`` section contains only deterministic content
(rows, aggregates, config echo) and is what the byte-identity guarantee
covers; wall-clock data lives in ``meta``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .baselines import GdConfig, PsoConfig, gradient_descent, pso, random_search
from .bayesopt import BoRunConfig, OptimizationResult, export_trace, run_bo
from .ecm import bulk_stoichiometry, simulate
from .errors import ConfigError, DataError, SocWindowViolation
from .identify import (
    IdentificationDataset,
    ParameterBox,
    VoltageFitObjective,
    default_box,
    save_dataset,
)
from .ocv import OcvCurve
from .params import CellParameters, load_parameter_file, reference_cell_path
from .profiles import CurrentProfile, VoltageSeries, noise_cycle_profile, staircase_profile

SOC_HARD_WINDOW = (0.05, 0.95)   # violation is an error
METHODS = ("bo", "gd", "pso")


def one_c_current(params: CellParameters) -> float:
    """1C in amps: limiting-electrode capacity over one hour."""
    q_p = params.F * params.eps_am_p * params.L_p * params.A * params.c_max_p
    q_n = params.F * params.eps_am_n * params.L_n * params.A * params.c_max_n
    return min(q_p, q_n) / 3600.0


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class ProfileSpec:
    """One excitation waveform request."""

    kind: str            # "rcid-like" or "drive-cycle-like"
    duration_s: float
    dt_s: float

    def __post_init__(self):
        if self.kind not in ("rcid-like", "drive-cycle-like"):
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.dt_s <= 0.0:
            raise ConfigError("profile dt_s must be positive")
        if self.duration_s < 100.0 * self.dt_s:
            raise ConfigError("profile duration_s must be at least 100*dt_s")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "ProfileSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown profile-spec keys: {sorted(unknown)}")
        missing = known - set(raw)
        if missing:
            raise ConfigError(f"profile spec missing keys: {sorted(missing)}")
        return cls(kind=raw["kind"], duration_s=float(raw["duration_s"]),
                   dt_s=float(raw["dt_s"]))


@dataclass(frozen=True)
class ExperimentConfig:
    """Full benchmark specification (JSON-mirrored field for field)."""

    box: ParameterBox
    parameter_file: str | None = None        # None -> packaged reference cell
    methods: tuple[str, ...] = METHODS
    budget: int = 50
    repetitions: int = 10
    noise_sigma_v: float = 0.0
    master_seed: int = 20260817
    s0: int = 10
    train_profiles: tuple[ProfileSpec, ...] = (
        ProfileSpec(kind="rcid-like", duration_s=3600.0, dt_s=1.0),)
    test_profiles: tuple[ProfileSpec, ...] = (
        ProfileSpec(kind="drive-cycle-like", duration_s=1800.0, dt_s=1.0),)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.budget < 2:
            raise ConfigError("budget must be >= 2")
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        bad = [m for m in self.methods if m not in METHODS + ("random",)]
        if bad:
            raise ConfigError(f"unknown methods: {bad}")
        if self.noise_sigma_v < 0.0:
            raise ConfigError("noise_sigma_v must be >= 0")
        if not 1 <= self.s0 <= self.budget:
            raise ConfigError("need 1 <= s0 <= budget")
        if not self.train_profiles or not self.test_profiles:
            raise ConfigError("train and test profile lists must be non-empty")

    def to_dict(self) -> dict:
        return {
            "parameter_file": self.parameter_file,
            "box": self.box.to_dict(),
            "methods": list(self.methods),
            "budget": self.budget,
            "repetitions": self.repetitions,
            "noise_sigma_v": self.noise_sigma_v,
            "master_seed": self.master_seed,
            "s0": self.s0,
            "train_profiles": [p.to_dict() for p in self.train_profiles],
            "test_profiles": [p.to_dict() for p in self.test_profiles],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {"parameter_file", "box", "methods", "budget", "repetitions",
                 "noise_sigma_v", "master_seed", "s0", "train_profiles",
                 "test_profiles"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        if "box" in raw:
            try:
                kwargs["box"] = ParameterBox.from_dict(raw["box"])
            except DataError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            kwargs["box"] = default_box()
        if "parameter_file" in raw:
            kwargs["parameter_file"] = raw["parameter_file"]
        if "methods" in raw:
            kwargs["methods"] = tuple(raw["methods"])
        for key in ("budget", "repetitions", "s0", "master_seed"):
            if key in raw:
                kwargs[key] = int(raw[key])
        if "noise_sigma_v" in raw:
            kwargs["noise_sigma_v"] = float(raw["noise_sigma_v"])
        for key in ("train_profiles", "test_profiles"):
            if key in raw:
                kwargs[key] = tuple(ProfileSpec.from_dict(p) for p in raw[key])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return cls.from_dict(raw)


def default_config(**overrides) -> ExperimentConfig:
    base = ExperimentConfig(box=default_box())
    return dataclasses.replace(base, **overrides) if overrides else base


def resolve_cell(config: ExperimentConfig) -> tuple[CellParameters, OcvCurve, OcvCurve, dict]:
    """Load the configured (or packaged) cell and its OCV tables."""
    path = Path(config.parameter_file) if config.parameter_file else reference_cell_path()
    params, ocv_p_path, ocv_n_path = load_parameter_file(path)
    ocv_p = OcvCurve.from_csv(ocv_p_path)
    ocv_n = OcvCurve.from_csv(ocv_n_path)
    provenance = {
        "parameter_file": str(path),
        "parameter_sha256": _sha256(path),
        "ocv_cathode_sha256": _sha256(ocv_p_path),
        "ocv_anode_sha256": _sha256(ocv_n_path),
    }
    return params, ocv_p, ocv_n, provenance


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# synthetic data

def generate_profile(kind: str, duration: float, dt: float, seed,
                     params: CellParameters) -> CurrentProfile:
    """Build an excitation and verify it respects the SOC window.

    The bulk stoichiometry of both electrodes must stay inside
    SOC_HARD_WINDOW under the given cell's capacity, else
    SocWindowViolation.
    """
    i_1c = one_c_current(params)
    if kind == "rcid-like":
        profile = staircase_profile(i_1c, dt=dt, duration=duration)
    elif kind == "drive-cycle-like":
        profile = noise_cycle_profile(i_1c, seed, dt=dt, duration=duration)
    else:
        raise ConfigError(f"unknown profile kind {kind!r}")
    if duration < 100.0 * dt:
        raise ConfigError("duration must be at least 100*dt")

    lo, hi = SOC_HARD_WINDOW
    for electrode in ("p", "n"):
        x = bulk_stoichiometry(params, electrode, profile)
        if np.any(x <= lo) or np.any(x >= hi):
            raise SocWindowViolation(
                f"profile kind {kind!r} drives electrode {electrode} bulk "
                f"stoichiometry to {x[np.argmax(np.abs(x - 0.5))]:.3f}, outside "
                f"({lo}, {hi})")
    return profile


def generate_synthetic_dataset(
    truth: CellParameters, ocv_p: OcvCurve, ocv_n: OcvCurve,
    train_profiles: list[CurrentProfile], test_profiles: list[CurrentProfile],
    noise_sigma_v: float, seed,
) -> tuple[IdentificationDataset, IdentificationDataset, dict]:
    """Simulate the truth cell and add seeded Gaussian measurement noise.

    Returns (train, test, meta); meta records the truth parameters so
    recovered thetas can be scored.
    """
    if noise_sigma_v < 0.0:
        raise ConfigError("noise_sigma_v must be >= 0")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(len(train_profiles) + len(test_profiles))

    def measure(profile, child):
        clean = simulate(truth, ocv_p, ocv_n, profile)
        noise = np.random.default_rng(child).normal(0.0, noise_sigma_v,
                                                    size=clean.n)
        return VoltageSeries(dt=profile.dt, volts=clean.volts + noise)

    train = IdentificationDataset(
        profiles=tuple(train_profiles),
        voltages=tuple(measure(u, c) for u, c in
                       zip(train_profiles, children[:len(train_profiles)])),
        role="train")
    test = IdentificationDataset(
        profiles=tuple(test_profiles),
        voltages=tuple(measure(u, c) for u, c in
                       zip(test_profiles, children[len(train_profiles):])),
        role="test")
    meta = {
        "truth": {"k_p": truth.k_p, "k_n": truth.k_n, "D_e": truth.D_e},
        "noise_sigma_v": noise_sigma_v,
    }
    return train, test, meta


class CountingObjective:
    """Hard evaluation-budget guard around a unit-cube objective."""

    def __init__(self, fn, limit: int | None = None):
        self.fn = fn
        self.limit = limit
        self.count = 0

    def __call__(self, point):
        if self.limit is not None and self.count >= self.limit:
            raise RuntimeError(
                f"objective evaluation budget ({self.limit}) exceeded")
        self.count += 1
        return self.fn(point)


# ---------------------------------------------------------------------------
# benchmark protocol

@dataclass(frozen=True)
class BenchmarkReport:
    """Deterministic results body plus non-deterministic meta."""

    results: dict
    meta: dict = field(default_factory=dict)

    def body_bytes(self) -> bytes:
        """Canonical serialization of the deterministic section."""
        return json.dumps(self.results, sort_keys=True,
                          separators=(",", ":")).encode()

    def save(self, path) -> None:
        doc = {"meta": self.meta, "results": self.results}
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "BenchmarkReport":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise DataError(f"report not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"report {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or "results" not in doc:
            raise DataError(f"report {path} lacks a results section")
        report = cls(results=doc["results"], meta=doc.get("meta", {}))
        report.validate()
        return report

    def validate(self) -> None:
        """Recompute aggregates from raw rows; DataError on any mismatch."""
        rows = self.results.get("rows")
        aggregates = self.results.get("aggregates")
        if rows is None or aggregates is None:
            raise DataError("report lacks rows or aggregates")
        recomputed = _aggregate_rows(rows)
        for method, stats in recomputed.items():
            stored = aggregates.get(method)
            if stored is None:
                raise DataError(f"aggregates missing method {method!r}")
            for key, value in stats.items():
                got = stored.get(key)
                ok = (got is None and value is None) or (
                    got is not None and value is not None
                    and np.isclose(got, value, rtol=1e-12, atol=1e-15))
                if not ok:
                    raise DataError(
                        f"aggregate {method}.{key} = {got} does not match "
                        f"rows (expected {value})")
        if set(aggregates) != set(recomputed):
            raise DataError("aggregates list methods not present in rows")


def _aggregate_rows(rows) -> dict:
    methods = sorted({row["method"] for row in rows})
    out = {}
    for method in methods:
        ok_rows = [r for r in rows if r["method"] == method and not r["failed"]]
        stats = {}
        for col, key in (("train_loss_V2", "train"), ("test_loss_V2", "test")):
            vals = np.array([r[col] for r in ok_rows], dtype=float)
            if vals.size == 0:
                stats[f"{key}_mean"] = None
                stats[f"{key}_var"] = None
            else:
                stats[f"{key}_mean"] = float(np.mean(vals))
                stats[f"{key}_var"] = (float(np.var(vals, ddof=1))
                                       if vals.size > 1 else 0.0)
        stats["n_ok"] = len(ok_rows)
        out[method] = stats
    return out


def _run_method(method: str, objective, box: ParameterBox, budget: int,
                seed, s0: int) -> OptimizationResult:
    if method == "bo":
        return run_bo(objective, BoRunConfig(box=box, budget=budget,
                                             seed=seed, s0=s0))
    if method == "gd":
        return gradient_descent(objective, box,
                                GdConfig(budget=budget, seed=seed))
    if method == "pso":
        return pso(objective, box, PsoConfig(budget=budget, seed=seed))
    if method == "random":
        return random_search(objective, box, budget, seed)
    raise ConfigError(f"unknown method {method!r}")


def run_benchmark(config: ExperimentConfig,
                  out_dir=None) -> BenchmarkReport:
    """Full protocol: data generation, method x repetition sweep, report.

    Per-repetition failures are recorded with a failure flag and excluded
    from aggregates; the sweep never aborts.  When out_dir is given, every
    optimizer trace is exported there as CSV alongside the report.
    """
    t_start = time.perf_counter()
    params, ocv_p, ocv_n, provenance = resolve_cell(config)

    root = np.random.SeedSequence(config.master_seed)
    profile_ss, noise_ss, *rep_seeds = root.spawn(2 + config.repetitions)
    profile_children = profile_ss.spawn(
        len(config.train_profiles) + len(config.test_profiles))

    train_profiles = [
        generate_profile(spec.kind, spec.duration_s, spec.dt_s, child, params)
        for spec, child in zip(config.train_profiles, profile_children)]
    test_profiles = [
        generate_profile(spec.kind, spec.duration_s, spec.dt_s, child, params)
        for spec, child in zip(config.test_profiles,
                               profile_children[len(config.train_profiles):])]

    train_ds, test_ds, data_meta = generate_synthetic_dataset(
        params, ocv_p, ocv_n, train_profiles, test_profiles,
        config.noise_sigma_v, noise_ss)

    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    wall_rows = []
    for rep in range(config.repetitions):
        for method in config.methods:
            row = {"method": method, "rep": rep, "failed": False,
                   "train_loss_V2": None, "test_loss_V2": None,
                   "evaluations": None, "theta": None}
            t_rep = time.perf_counter()
            try:
                train_obj = VoltageFitObjective(params, ocv_p, ocv_n,
                                                config.box, train_ds)
                counter = CountingObjective(train_obj.unit,
                                            limit=config.budget)
                result = _run_method(method, counter, config.box,
                                     config.budget, rep_seeds[rep], config.s0)
                test_obj = VoltageFitObjective(params, ocv_p, ocv_n,
                                               config.box, test_ds)
                test_loss = test_obj(result.best_theta).loss
                row.update(
                    train_loss_V2=result.best_loss,
                    test_loss_V2=test_loss,
                    evaluations=result.evaluations_used,
                    theta={name: float(v) for name, v in
                           zip(config.box.names, result.best_theta)},
                )
                if counter.count != result.evaluations_used:
                    raise RuntimeError(
                        f"trace records {result.evaluations_used} evaluations "
                        f"but the objective saw {counter.count}")
                if out_dir is not None:
                    export_trace(result, config.box,
                                 out_dir / f"trace_{method}_rep{rep}.csv")
            except Exception as exc:  # record, never abort the sweep
                row["failed"] = True
                row["error"] = f"{type(exc).__name__}: {exc}"
            wall_rows.append({"method": method, "rep": rep,
                              "seconds": time.perf_counter() - t_rep})
            rows.append(row)

    results = {
        "config": config.to_dict(),
        "provenance": provenance,
        "truth": data_meta["truth"],
        "rows": rows,
        "aggregates": _aggregate_rows(rows),
        "profile_lengths": {
            "train": [p.n for p in train_profiles],
            "test": [p.n for p in test_profiles],
        },
    }
    time_stats = {}
    for method in config.methods:
        secs = np.array([w["seconds"] for w in wall_rows
                         if w["method"] == method])
        time_stats[method] = {
            "mean": float(np.mean(secs)),
            "var": float(np.var(secs, ddof=1)) if secs.size > 1 else 0.0,
        }
    meta = {
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "total_seconds": time.perf_counter() - t_start,
        "wall_times": wall_rows,
        "time_stats": time_stats,
        "body_sha256": "",
    }
    report = BenchmarkReport(results=results, meta=meta)
    meta["body_sha256"] = hashlib.sha256(report.body_bytes()).hexdigest()
    if out_dir is not None:
        report.save(out_dir / "report.json")
        save_dataset(out_dir / "dataset", train_ds, test_ds,
                     extra_meta=data_meta)
    return report


# ---------------------------------------------------------------------------
# exports

def export_report(report: BenchmarkReport, out_dir, formats=("csv", "json"),
                  with_traces: bool = True) -> list[Path]:
    """Write the summary table, per-repetition rows, and voltage-error traces.

    Returns the list of files written.  The summary mirrors the mean/variance
    table layout (wall time, training loss, testing loss); the box-plot file
    holds one row per method x repetition.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = []

    if "json" in formats:
        path = out_dir / "report.json"
        report.save(path)
        written.append(path)

    if "csv" in formats:
        aggregates = report.results["aggregates"]
        time_stats = report.meta.get("time_stats", {})
        path = out_dir / "summary.csv"
        with open(path, "w") as fh:
            fh.write("method,time_mean_s,time_var_s2,train_mean_V2,"
                     "train_var_V4,test_mean_V2,test_var_V4\n")
            for method in report.results["config"]["methods"]:
                agg = aggregates[method]
                ts = time_stats.get(method, {"mean": float("nan"),
                                             "var": float("nan")})
                fh.write(
                    f"{method},{ts['mean']:.6g},{ts['var']:.6g},"
                    f"{_fmt(agg['train_mean'])},{_fmt(agg['train_var'])},"
                    f"{_fmt(agg['test_mean'])},{_fmt(agg['test_var'])}\n")
        written.append(path)

        path = out_dir / "repetitions.csv"
        with open(path, "w") as fh:
            fh.write("method,rep,failed,train_loss_V2,test_loss_V2,"
                     "evaluations\n")
            for row in report.results["rows"]:
                fh.write(f"{row['method']},{row['rep']},"
                         f"{int(row['failed'])},{_fmt(row['train_loss_V2'])},"
                         f"{_fmt(row['test_loss_V2'])},"
                         f"{row['evaluations'] if row['evaluations'] is not None else ''}\n")
        written.append(path)

    if with_traces:
        written.extend(_export_voltage_traces(report, out_dir))
    return written


def _fmt(value) -> str:
    return "" if value is None else f"{value:.12g}"


def _export_voltage_traces(report: BenchmarkReport, out_dir: Path) -> list[Path]:
    """Per-run measured-vs-model test-set traces (voltage-fit analogues)."""
    config = ExperimentConfig.from_dict(report.results["config"])
    params, ocv_p, ocv_n, _ = resolve_cell(config)

    root = np.random.SeedSequence(config.master_seed)
    profile_ss, noise_ss, *_ = root.spawn(2 + config.repetitions)
    profile_children = profile_ss.spawn(
        len(config.train_profiles) + len(config.test_profiles))
    train_profiles = [
        generate_profile(s.kind, s.duration_s, s.dt_s, c, params)
        for s, c in zip(config.train_profiles, profile_children)]
    test_profiles = [
        generate_profile(s.kind, s.duration_s, s.dt_s, c, params)
        for s, c in zip(config.test_profiles,
                        profile_children[len(config.train_profiles):])]
    _, test_ds, _ = generate_synthetic_dataset(
        params, ocv_p, ocv_n, train_profiles, test_profiles,
        config.noise_sigma_v, noise_ss)

    trace_dir = out_dir / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for row in report.results["rows"]:
        if row["failed"] or row["theta"] is None:
            continue
        theta = row["theta"]
        fitted = params.replace(k_p=theta["k_p"], k_n=theta["k_n"],
                                D_e=theta["D_e"])
        for i, (profile, measured) in enumerate(
                zip(test_ds.profiles, test_ds.voltages)):
            sim = simulate(fitted, ocv_p, ocv_n, profile)
            path = trace_dir / (f"voltage_{row['method']}_rep{row['rep']}"
                                f"_test{i}.csv")
            table = np.column_stack([profile.t, profile.current,
                                     measured.volts, sim.volts,
                                     sim.volts - measured.volts])
            np.savetxt(path, table, delimiter=",", comments="",
                       header="time_s,current_A,voltage_meas_V,"
                              "voltage_model_V,error_V", fmt="%.9g")
            written.append(path)
    return written
