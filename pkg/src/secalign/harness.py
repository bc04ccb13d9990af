"""Experiment recipes, result persistence and seed management.

Each recipe sweeps one axis (noise dimension, iteration count, power split
or transmit power), producing :class:`ResultRecord` objects that serialize
to a CSV (one row per sweep point, byte-stable across reruns) and a JSON
file (full records, including timestamps). Recipes default to 10 seeds and
record every raw value; summary tables shown by the CLI use medians.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .alignment import SolverSettings, detect_cancellation, lm_ia_solve, meb_ia_solve
from .channel import NetworkConfig, generate_channels, parse_config_text
from .errors import ConfigurationError
from .feasibility import lm_necessary_condition, meb_necessary_condition
from .secrecy import (
    PowerProfile,
    SecrecyModel,
    isotropic_theta,
    rs_of_theta,
    solve_w,
    sop_closed_form,
    srm_solve,
    theta_high_snr,
    with_theta,
)

__all__ = [
    "ExperimentSpec",
    "ResultRecord",
    "run_experiment",
    "compare_isotropic",
    "default_spec",
    "load_spec",
    "secrecy_model_from_solution",
    "write_records_csv",
    "write_records_json",
    "records_from_json",
    "rows_from_records",
    "RECIPES",
    "db_to_linear",
]

VERSION = "0.1.0"


def db_to_linear(db):
    """Power in linear units; noise power is normalized to one."""
    return 10.0 ** (db / 10.0)


#: The desk-scale benchmark layout used by the alignment recipes.
BENCHMARK_CONFIG_TEXT = "Ma=12 Nb=2 da={da} K=4 Mk=9 Nk=4 dk=2 L=16"

#: Layouts for the boundary table, where the counting bound is tight for
#: the first two and strictly loose for the last two.
BOUNDARY_CONFIG_TEXTS = (
    "Ma=12 Nb=2 da=1 K=4 Mk=9 Nk=4 dk=2 L=16",
    "Ma=11 Nb=2 da=1 K=4 Mk=9 Nk=4 dk=2 L=16",
    "Ma=10 Nb=2 da=1 K=4 Mk=9 Nk=4 dk=2 L=16",
    "Ma=11 Nb=2 da=1 K=3 Mk=9 Nk=4 dk=2 L=16",
    "Ma=10 Nb=2 da=1 K=3 Mk=9 Nk=4 dk=2 L=16",
)


@dataclass
class ExperimentSpec:
    """Sweep definition: configs, seeds, solver and secrecy settings."""

    name: str
    configs: tuple = ()
    seeds: tuple = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9)
    settings: SolverSettings = field(default_factory=SolverSettings)
    schemes: tuple = ("LM", "MEB")
    da_values: tuple | None = None
    theta_grid: tuple | None = None
    pa_grid_db: tuple | None = None
    pk_grid_db: tuple | None = None
    pa_db: float = 20.0
    pk_db: float | None = None
    eps_th: float = 0.1
    L: int | None = None
    sigma2: float | None = None
    samples: int = 0
    restarts: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        self.configs = tuple(self.configs)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ConfigurationError("experiment spec needs at least one seed")
        for cfg in self.configs:
            if not isinstance(cfg, NetworkConfig):
                raise ConfigurationError("configs must be NetworkConfig instances")

    def config_with_da(self, config, da):
        return NetworkConfig(
            Ma=config.Ma, Nb=config.Nb, da=da, K=config.K,
            Mk=config.Mk, Nk=config.Nk, dk=config.dk, L=config.L,
        )


@dataclass
class ResultRecord:
    """One sweep series: experiment name, config fingerprint, seed, data."""

    experiment: str
    config: str
    seed: int
    series: dict
    created: str = ""
    version: str = VERSION

    def __post_init__(self):
        if not self.created:
            self.created = datetime.datetime.now(datetime.timezone.utc).isoformat()
        lengths = {len(v) for v in self.series.values()}
        if len(lengths) > 1:
            raise ConfigurationError(f"series lengths differ: { {k: len(v) for k, v in self.series.items()} }")


def _solve(scheme, channels, config, settings, seed, restarts):
    solver = lm_ia_solve if scheme == "LM" else meb_ia_solve
    return solver(channels, config, settings, seed=seed, restarts=restarts)


def _recipe_leakage_vs_an_dim(spec):
    """Leakage and main-channel gain versus the noise dimension."""
    records = []
    for base in spec.configs:
        da_values = spec.da_values or tuple(range(1, min(8, base.Ma - 1) + 1))
        for scheme in spec.schemes:
            for seed in spec.seeds:
                series = {k: [] for k in (
                    "scheme", "da", "leakage", "gain", "iterations", "converged",
                    "cancelled", "analytic_ok",
                )}
                for da in da_values:
                    config = spec.config_with_da(base, da)
                    channels = generate_channels(config, seed)
                    sol = _solve(scheme, channels, config, spec.settings, seed, spec.restarts)
                    check = detect_cancellation(channels, sol)
                    report = (lm_necessary_condition if scheme == "LM" else meb_necessary_condition)(config)
                    series["scheme"].append(scheme)
                    series["da"].append(da)
                    series["leakage"].append(sol.leakage)
                    series["gain"].append(check.gain)
                    series["iterations"].append(sol.iterations)
                    series["converged"].append(sol.converged)
                    series["cancelled"].append(check.cancelled)
                    series["analytic_ok"].append(report.satisfied)
                records.append(ResultRecord(spec.name, base.to_text(), seed, series))
    return records


def _recipe_leakage_vs_iteration(spec):
    """Leakage trace of each scheme on a fixed configuration."""
    records = []
    for config in spec.configs:
        for scheme in spec.schemes:
            for seed in spec.seeds:
                channels = generate_channels(config, seed)
                sol = _solve(scheme, channels, config, spec.settings, seed, spec.restarts)
                series = {
                    "scheme": [scheme] * len(sol.leakage_trace),
                    "iteration": list(range(1, len(sol.leakage_trace) + 1)),
                    "leakage": [float(x) for x in sol.leakage_trace],
                }
                records.append(ResultRecord(spec.name, config.to_text(), seed, series))
    return records


def _recipe_boundary_table(spec):
    """Analytic bound versus simulated feasibility for the cured scheme."""
    records = []
    for base in spec.configs:
        analytic = meb_necessary_condition(spec.config_with_da(base, 1)).da_max
        # one step past the counting bound so a loose bound shows its gap
        da_values = spec.da_values or tuple(range(1, min(analytic + 1, base.Ma - 1) + 1))
        for seed in spec.seeds:
            series = {k: [] for k in ("da", "analytic_ok", "leakage", "feasible")}
            for da in da_values:
                config = spec.config_with_da(base, da)
                channels = generate_channels(config, seed)
                sol = meb_ia_solve(channels, config, spec.settings, seed=seed, restarts=spec.restarts)
                series["da"].append(da)
                series["analytic_ok"].append(da <= analytic)
                series["leakage"].append(sol.leakage)
                series["feasible"].append(sol.leakage < spec.settings.feasibility_tol)
            records.append(ResultRecord(spec.name, base.to_text(), seed, series))
    return records


def _spec_model(spec, config, theta, pa, pk):
    profile = PowerProfile(Pa=pa, Pk=(pk,) * config.K, theta=theta)
    return SecrecyModel(
        power=profile,
        alpha_a=config.da,
        alpha_k=config.dk,
        L=spec.L or config.L,
        eps_th=spec.eps_th,
        sigma2=spec.sigma2 if spec.sigma2 is not None else _sigma2_from_solve(spec, config),
    )


_SIGMA2_CACHE = {}


def _sigma2_from_solve(spec, config):
    key = (config.to_text(), spec.seeds[0])
    if key not in _SIGMA2_CACHE:
        channels = generate_channels(config, spec.seeds[0])
        sol = meb_ia_solve(channels, config, spec.settings, seed=spec.seeds[0])
        _SIGMA2_CACHE[key] = secrecy_sigma2(channels, sol)
    return _SIGMA2_CACHE[key]


def secrecy_sigma2(channels, sol, cancellation_threshold=1e-8):
    """Main-channel gain from a converged solution; refuses cancelled filters."""
    check = detect_cancellation(channels, sol, cancellation_threshold)
    if check.cancelled:
        raise ConfigurationError(
            "solution exhibits confidential-signal cancellation "
            f"(gain {check.gain:.3e}); its filters cannot carry a secrecy design"
        )
    if sol.sigma_max is not None:
        return float(sol.sigma_max) ** 2
    return check.gain


def secrecy_model_from_solution(channels, sol, theta, Pa, Pk, L, eps_th, Rb=None):
    """Build a :class:`SecrecyModel` on top of converged alignment filters."""
    sigma2 = secrecy_sigma2(channels, sol)
    profile = PowerProfile(Pa=Pa, Pk=tuple(Pk), theta=theta)
    return SecrecyModel(
        power=profile,
        alpha_a=np.asarray(sol.Wa).shape[1],
        alpha_k=tuple(np.asarray(v).shape[1] for v in sol.Vk),
        L=L,
        eps_th=eps_th,
        sigma2=sigma2,
        Rb=Rb,
    )


def _recipe_rate_vs_theta(spec):
    """Secrecy rate across the power-split grid at fixed powers."""
    records = []
    pa = db_to_linear(spec.pa_db)
    pk = db_to_linear(spec.pk_db if spec.pk_db is not None else spec.pa_db)
    thetas = spec.theta_grid or tuple(np.linspace(0.01, 1.0, 100))
    for config in spec.configs:
        base = _spec_model(spec, config, 1.0, pa, pk)
        series = {k: [] for k in ("theta", "w", "Rs", "eps_closed", "eps_mc", "stderr")}
        for theta in thetas:
            model = with_theta(base, theta)
            w = solve_w(theta, model)
            rs = max(rs_of_theta(theta, model), 0.0)
            if theta > 0.0:
                # Recover the implied codeword rate so the closed form can
                # be evaluated as a self-check; it reproduces eps_th at the
                # root. Suspended points (theta = 0) carry no outage.
                rb = rs + math.log2(1.0 + theta * w)
                model_rb = SecrecyModel(
                    power=model.power, alpha_a=model.alpha_a, alpha_k=model.alpha_k,
                    L=model.L, eps_th=model.eps_th, sigma2=model.sigma2, Rb=rb,
                )
                eps_closed = sop_closed_form(model_rb, rs)
            else:
                eps_closed = None
            series["theta"].append(float(theta))
            series["w"].append(w)
            series["Rs"].append(rs)
            series["eps_closed"].append(eps_closed)
            series["eps_mc"].append(None)
            series["stderr"].append(None)
        records.append(ResultRecord(spec.name, config.to_text(), spec.seeds[0], series))
    return records


def _recipe_srm_vs_alice_power(spec):
    """Optimal power split and rate across an Alice-power sweep."""
    records = []
    grid = spec.pa_grid_db or tuple(range(0, 61, 5))
    for config in spec.configs:
        series = {k: [] for k in (
            "pa_db", "theta_star", "Rs_star", "branch", "w_star", "theta_high_snr",
        )}
        for pa_db in grid:
            pa = db_to_linear(pa_db)
            pk = db_to_linear(spec.pk_db) if spec.pk_db is not None else pa
            model = _spec_model(spec, config, 1.0, pa, pk)
            sol = srm_solve(model)
            series["pa_db"].append(float(pa_db))
            series["theta_star"].append(sol.theta_star)
            series["Rs_star"].append(sol.Rs_star)
            series["branch"].append(sol.branch.value)
            series["w_star"].append(sol.w_star)
            series["theta_high_snr"].append(theta_high_snr(model))
        records.append(ResultRecord(spec.name, config.to_text(), spec.seeds[0], series))
    return records


def _recipe_srm_vs_pair_power(spec):
    """Optimal power split and rate as the interferers' power grows."""
    records = []
    grid = spec.pk_grid_db or tuple(range(0, 61, 5))
    pa = db_to_linear(spec.pa_db)
    for config in spec.configs:
        series = {k: [] for k in ("pk_db", "theta_star", "Rs_star", "branch", "w_star")}
        for pk_db in grid:
            model = _spec_model(spec, config, 1.0, pa, db_to_linear(pk_db))
            sol = srm_solve(model)
            series["pk_db"].append(float(pk_db))
            series["theta_star"].append(sol.theta_star)
            series["Rs_star"].append(sol.Rs_star)
            series["branch"].append(sol.branch.value)
            series["w_star"].append(sol.w_star)
        records.append(ResultRecord(spec.name, config.to_text(), spec.seeds[0], series))
    return records


def compare_isotropic(spec) -> ResultRecord:
    """Optimized power split versus the isotropic heuristic over a power sweep.

    The isotropic transmit covariance spreads Alice's power uniformly over
    the beam and noise subspaces, i.e. theta = 1 / (1 + da). The optimized
    rate can never fall below it; both stay under the beamforming capacity
    log2(1 + gamma_B).
    """
    config = spec.configs[0]
    grid = spec.pa_grid_db or tuple(range(0, 41, 2))
    series = {k: [] for k in (
        "pa_db", "theta_star", "rs_optimal", "theta_iso", "rs_iso", "rs_upper",
    )}
    for pa_db in grid:
        pa = db_to_linear(pa_db)
        pk = db_to_linear(spec.pk_db) if spec.pk_db is not None else pa
        model = _spec_model(spec, config, 1.0, pa, pk)
        sol = srm_solve(model)
        t_iso = isotropic_theta(config.da)
        rs_iso = max(rs_of_theta(t_iso, with_theta(model, t_iso)), 0.0)
        series["pa_db"].append(float(pa_db))
        series["theta_star"].append(sol.theta_star)
        series["rs_optimal"].append(sol.Rs_star)
        series["theta_iso"].append(t_iso)
        series["rs_iso"].append(rs_iso)
        series["rs_upper"].append(math.log2(1.0 + model.gamma_B))
    return ResultRecord(spec.name, config.to_text(), spec.seeds[0], series)


def _recipe_isotropic_comparison(spec):
    return [compare_isotropic(spec)]


RECIPES = {
    "leakage-vs-an-dim": _recipe_leakage_vs_an_dim,
    "leakage-vs-iteration": _recipe_leakage_vs_iteration,
    "meb-boundary-table": _recipe_boundary_table,
    "rate-vs-theta": _recipe_rate_vs_theta,
    "srm-vs-alice-power": _recipe_srm_vs_alice_power,
    "srm-vs-pair-power": _recipe_srm_vs_pair_power,
    "isotropic-comparison": _recipe_isotropic_comparison,
}


def default_spec(name, **overrides) -> ExperimentSpec:
    """Canonical desk-scale spec for a named recipe."""
    if name not in RECIPES:
        raise ConfigurationError(f"unknown recipe {name!r}; choose from {sorted(RECIPES)}")
    defaults = dict(name=name)
    if name == "meb-boundary-table":
        defaults["configs"] = tuple(
            parse_config_text(text)[0] for text in BOUNDARY_CONFIG_TEXTS
        )
        defaults["settings"] = SolverSettings(max_iterations=6000, convergence_tol=1e-11)
    else:
        defaults["configs"] = (parse_config_text(BENCHMARK_CONFIG_TEXT.format(da=4))[0],)
    if name == "leakage-vs-an-dim":
        defaults["settings"] = SolverSettings(max_iterations=4000, convergence_tol=1e-13)
    if name in ("rate-vs-theta", "srm-vs-alice-power", "srm-vs-pair-power", "isotropic-comparison"):
        defaults["sigma2"] = 16.0
        defaults["eps_th"] = 0.1
    if name == "srm-vs-alice-power":
        defaults["pk_db"] = 20.0
    if name == "rate-vs-theta":
        defaults["pa_db"] = 20.0
        defaults["pk_db"] = 20.0
    defaults.update(overrides)
    return ExperimentSpec(**defaults)


def run_experiment(spec: ExperimentSpec):
    """Execute a recipe; write CSV/JSON when ``spec.out_dir`` is set."""
    if spec.name not in RECIPES:
        raise ConfigurationError(f"unknown recipe {spec.name!r}; choose from {sorted(RECIPES)}")
    records = RECIPES[spec.name](spec)
    if spec.out_dir is not None:
        out = Path(spec.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_records_csv(records, out / f"{spec.name}.csv")
            write_records_json(records, out / f"{spec.name}.json")
        except OSError as exc:
            raise OSError(f"cannot write experiment output under {out}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Persistence. The CSV holds one row per sweep point and is byte-identical
# across reruns of the same spec+seeds (no timestamps, repr-stable floats).
# ---------------------------------------------------------------------------


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_from_records(records):
    """Flatten records to (header, rows) with one row per sweep point."""
    keys = []
    for record in records:
        for k in record.series:
            if k not in keys:
                keys.append(k)
    header = ["experiment", "config", "seed"] + keys
    rows = []
    for record in records:
        n = len(next(iter(record.series.values()))) if record.series else 0
        for i in range(n):
            row = [record.experiment, record.config, str(record.seed)]
            for k in keys:
                row.append(_cell(record.series[k][i]) if k in record.series else "")
            rows.append(row)
    return header, rows


def write_records_csv(records, path):
    header, rows = rows_from_records(records)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_records_json(records, path):
    payload = [
        {
            "experiment": r.experiment,
            "config": r.config,
            "seed": r.seed,
            "series": {k: list(v) for k, v in r.series.items()},
            "created": r.created,
            "version": r.version,
        }
        for r in records
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def records_from_json(path):
    with open(path) as fh:
        payload = json.load(fh)
    return [
        ResultRecord(
            experiment=item["experiment"],
            config=item["config"],
            seed=item["seed"],
            series=item["series"],
            created=item["created"],
            version=item["version"],
        )
        for item in payload
    ]


def load_spec(path) -> ExperimentSpec:
    """Read an :class:`ExperimentSpec` from a JSON file.

    Configs are given in the key-value text format; solver settings as an
    object with the :class:`SolverSettings` field names.
    """
    with open(path) as fh:
        payload = json.load(fh)
    kwargs = dict(payload)
    if "configs" in kwargs:
        kwargs["configs"] = tuple(parse_config_text(t)[0] for t in kwargs["configs"])
    if "settings" in kwargs and isinstance(kwargs["settings"], dict):
        kwargs["settings"] = SolverSettings(**kwargs["settings"])
    for key in ("seeds", "schemes", "da_values", "theta_grid", "pa_grid_db", "pk_grid_db"):
        if key in kwargs and kwargs[key] is not None:
            kwargs[key] = tuple(kwargs[key])
    return ExperimentSpec(**kwargs)


def median_boundary_summary(records):
    """Per-(config, da) median leakage table for the boundary recipe."""
    grouped = {}
    for record in records:
        for da, leak in zip(record.series["da"], record.series["leakage"]):
            grouped.setdefault((record.config, da), []).append(leak)
    return {
        key: statistics.median(values) for key, values in sorted(grouped.items())
    }
