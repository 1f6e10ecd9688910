"""Command-line interface.

Verbs: simulate, gen-data, identify, bench, report.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime failure.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from .baselines import GdConfig, PsoConfig, gradient_descent, pso, random_search
from .bayesopt import BoRunConfig, export_trace, run_bo
from .bench import (
    BenchmarkReport,
    CountingObjective,
    ExperimentConfig,
    default_config,
    export_report,
    generate_profile,
    resolve_cell,
    run_benchmark,
)
from .ecm import simulate
from .errors import CellIdentError, ConfigError, DataError
from .identify import (
    VoltageFitObjective,
    load_dataset,
    load_profile_csv,
    save_dataset,
    save_profile_csv,
)
from .profiles import CurrentProfile, VoltageSeries


def _exit_codes(fn):
    """Map the error hierarchy onto documented process exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(3)
        except (CellIdentError, Exception) as exc:  # noqa: BLE001
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(4)

    return wrapper


@click.group()
def main():
    """Identify lithium-ion cell parameters from current/voltage series."""


def _load_config(config_path) -> ExperimentConfig:
    if config_path is None:
        return default_config()
    return ExperimentConfig.from_json(config_path)


def _apply_overrides(config: ExperimentConfig, seed, budget, reps,
                     method) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        changes["master_seed"] = seed
    if budget is not None:
        changes["budget"] = budget
        changes["s0"] = min(config.s0, budget)  # keep the BO design feasible
    if reps is not None:
        changes["repetitions"] = reps
    if method is not None and method != "all":
        changes["methods"] = (method,)
    return dataclasses.replace(config, **changes) if changes else config


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Experiment config JSON (for the cell/parameter file).")
@click.option("--profile", "profile_path", type=click.Path(), default=None,
              help="Input CSV with columns time_s,current_A.")
@click.option("--kind", type=click.Choice(["rcid-like", "drive-cycle-like"]),
              default=None, help="Generate the excitation instead of reading it.")
@click.option("--duration", type=float, default=3600.0, show_default=True)
@click.option("--dt", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="Output voltage CSV.")
@_exit_codes
def simulate_cmd(config_path, profile_path, kind, duration, dt, seed, out_path):
    """Simulate terminal voltage for a current profile."""
    config = _load_config(config_path)
    params, ocv_p, ocv_n, _ = resolve_cell(config)
    if (profile_path is None) == (kind is None):
        raise ConfigError("give exactly one of --profile or --kind")
    if profile_path is not None:
        profile, _ = _read_current_csv(profile_path)
    else:
        profile = generate_profile(kind, duration, dt, seed, params)
    volts = simulate(params, ocv_p, ocv_n, profile)
    save_profile_csv(out_path, profile, volts)
    click.echo(f"wrote {profile.n} samples to {out_path}")


main.add_command(simulate_cmd, name="simulate")


def _read_current_csv(path) -> tuple[CurrentProfile, VoltageSeries | None]:
    path = Path(path)
    try:
        table = np.genfromtxt(path, delimiter=",", names=True)
    except FileNotFoundError as exc:
        raise DataError(f"profile file not found: {path}") from exc
    except ValueError as exc:
        raise DataError(f"profile file {path} is malformed: {exc}") from exc
    names = set(table.dtype.names or ())
    if not {"time_s", "current_A"} <= names:
        raise DataError(f"{path} needs columns time_s,current_A")
    t = np.atleast_1d(table["time_s"])
    if t.size < 2:
        raise DataError(f"{path} needs at least two samples")
    steps = np.diff(t)
    dt = float(steps[0])
    if not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise DataError(f"{path} is not uniformly sampled")
    profile = CurrentProfile(dt=dt, current=np.atleast_1d(table["current_A"]))
    volts = None
    if "voltage_V" in names:
        volts = VoltageSeries(dt=dt, volts=np.atleast_1d(table["voltage_V"]))
    return profile, volts


@main.command("gen-data")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_exit_codes
def gen_data_cmd(config_path, seed, out_dir):
    """Generate a synthetic train/test dataset (CSV files + manifest)."""
    config = _apply_overrides(_load_config(config_path), seed, None, None, None)
    params, ocv_p, ocv_n, _ = resolve_cell(config)

    from .bench import generate_synthetic_dataset  # local import: avoids cycle confusion in docs

    root = np.random.SeedSequence(config.master_seed)
    profile_ss, noise_ss, *_ = root.spawn(2 + config.repetitions)
    children = profile_ss.spawn(len(config.train_profiles) + len(config.test_profiles))
    train_profiles = [generate_profile(s.kind, s.duration_s, s.dt_s, c, params)
                      for s, c in zip(config.train_profiles, children)]
    test_profiles = [generate_profile(s.kind, s.duration_s, s.dt_s, c, params)
                     for s, c in zip(config.test_profiles,
                                     children[len(config.train_profiles):])]
    train, test, meta = generate_synthetic_dataset(
        params, ocv_p, ocv_n, train_profiles, test_profiles,
        config.noise_sigma_v, noise_ss)
    manifest = save_dataset(out_dir, train, test, extra_meta=meta)
    click.echo(f"wrote dataset manifest {manifest}")


@main.command("identify")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--data", "manifest_path", type=click.Path(), required=True,
              help="Dataset manifest from gen-data.")
@click.option("--method", type=click.Choice(["bo", "gd", "pso", "random"]),
              default="bo", show_default=True)
@click.option("--budget", type=int, default=None, help="Evaluation budget.")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_exit_codes
def identify_cmd(config_path, manifest_path, method, budget, seed, out_dir):
    """Fit (k_p, k_n, D_e) to a dataset with one optimizer."""
    config = _apply_overrides(_load_config(config_path), seed, budget, None, None)
    params, ocv_p, ocv_n, _ = resolve_cell(config)
    train, test, _ = load_dataset(manifest_path)

    box = config.box
    train_obj = VoltageFitObjective(params, ocv_p, ocv_n, box, train)
    counter = CountingObjective(train_obj.unit, limit=config.budget)
    seed_value = config.master_seed
    if method == "bo":
        result = run_bo(counter, BoRunConfig(box=box, budget=config.budget,
                                             seed=seed_value, s0=config.s0))
    elif method == "gd":
        result = gradient_descent(counter, box,
                                  GdConfig(budget=config.budget, seed=seed_value))
    elif method == "pso":
        result = pso(counter, box, PsoConfig(budget=config.budget,
                                             seed=seed_value))
    else:
        result = random_search(counter, box, config.budget, seed_value)

    test_obj = VoltageFitObjective(params, ocv_p, ocv_n, box, test)
    test_loss = test_obj(result.best_theta).loss

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_trace(result, box, out / "trace.csv")
    best = {
        "method": method,
        "theta": {name: float(v) for name, v in zip(box.names,
                                                    result.best_theta)},
        "train_loss_V2": result.best_loss,
        "test_loss_V2": test_loss,
        "evaluations": result.evaluations_used,
    }
    (out / "best_theta.json").write_text(json.dumps(best, indent=2,
                                                    sort_keys=True) + "\n")
    click.echo(f"{method}: train loss {result.best_loss:.6g} V^2, "
               f"test loss {test_loss:.6g} V^2 "
               f"({result.evaluations_used} evaluations)")


@main.command("bench")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--budget", type=int, default=None)
@click.option("--reps", type=int, default=None)
@click.option("--method", type=click.Choice(["bo", "gd", "pso", "all"]),
              default="all", show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_exit_codes
def bench_cmd(config_path, seed, budget, reps, method, out_dir):
    """Run the full benchmark protocol and write the report."""
    config = _apply_overrides(_load_config(config_path), seed, budget, reps,
                              method)
    report = run_benchmark(config, out_dir=out_dir)
    export_report(report, out_dir, formats=("csv", "json"))
    for method_name in config.methods:
        agg = report.results["aggregates"][method_name]
        click.echo(f"{method_name}: test loss mean {_show(agg['test_mean'])} "
                   f"V^2, var {_show(agg['test_var'])} V^4")
    click.echo(f"report written to {Path(out_dir) / 'report.json'}")


def _show(value) -> str:
    return "n/a" if value is None else f"{value:.6g}"


@main.command("report")
@click.option("--report", "report_path", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--format", "formats", type=click.Choice(["csv", "json", "all"]),
              default="all", show_default=True)
@click.option("--traces/--no-traces", default=True, show_default=True,
              help="Also regenerate per-run voltage-error traces.")
@_exit_codes
def report_cmd(report_path, out_dir, formats, traces):
    """Re-export an existing report to CSV/JSON."""
    report = BenchmarkReport.load(report_path)
    wanted = ("csv", "json") if formats == "all" else (formats,)
    written = export_report(report, out_dir, formats=wanted, with_traces=traces)
    click.echo(f"wrote {len(written)} files under {out_dir}")


if __name__ == "__main__":
    main()
