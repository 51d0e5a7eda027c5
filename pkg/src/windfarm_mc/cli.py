"""Batch front-end: INI campaign config, simulate/curve/compare/stats commands, CSV artifacts.

Exit codes: 0 success, 1 runtime failure, 2 missing config file, 3 malformed
config syntax, 4 unknown config key/section, 5 invalid parameter value.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import math
import os
import sys

import numpy as np

from . import engine, power_curve, stats, wind
from .engine import SimConfig, run_campaign, simulate_farm, simulate_static, substream
from .errors import ModelError
from .turbine import DEG_TO_RAD, RPM_TO_RAD_S, TurbineParams, calibrated
from .wind import ArmaParams, WindModelParams

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG_MISSING = 2
EXIT_CONFIG_SYNTAX = 3
EXIT_CONFIG_UNKNOWN_KEY = 4
EXIT_CONFIG_INVALID = 5


class ConfigError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


_WIND_KEYS = {
    "turbulence_length_scale_m",
    "kappa",
    "target_annual_mean_mps",
    "mean_targeting",
    "arma_phi",
    "arma_theta",
    "arma_sigma_alpha",
    "arma_base_mean_mps",
    "arma_base_std_mps",
}
_TURBINE_KEYS = {
    "rotor_radius_m",
    "inertia_kgm2",
    "omega_min_rpm",
    "omega_nom_rpm",
    "p_nom_w",
    "v_nom_mps",
    "v_cut_in_mps",
    "v_restart_mps",
    "v5_cutoff_mps",
    "v60_cutoff_mps",
    "air_density_kgm3",
    "generator_efficiency",
    "pitch_gain",
    "theta_max_deg",
    "pitch_rate_min_deg_s",
    "pitch_rate_max_deg_s",
    "cp_coeffs",
}
_ENGINE_KEYS = {
    "duration_hours",
    "dt_s",
    "n_turbines",
    "seed",
    "record_stride_s",
    "mech_substeps",
    "n_replicates",
    "warmup_hours",
    "workers",
}
_CURVE_KEYS = {"v_step_mps", "static_cutout_mps"}
_STATS_KEYS = {"v_bin_mps", "p_bin_w"}

_SECTIONS = {
    "wind_model": _WIND_KEYS,
    "turbine": _TURBINE_KEYS,
    "mc_engine": _ENGINE_KEYS,
    "steady_curve": _CURVE_KEYS,
    "stats": _STATS_KEYS,
}


def _float(section, key, raw) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}", EXIT_CONFIG_INVALID)
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key}: must be finite", EXIT_CONFIG_INVALID)
    return value


def _int(section, key, raw) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not an integer: {raw!r}", EXIT_CONFIG_INVALID)


def _float_tuple(section, key, raw) -> tuple:
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not a number list: {raw!r}", EXIT_CONFIG_INVALID)


def parse_config(path: str | None) -> dict:
    """Read the INI campaign file; every value defaults to the built-in model constants."""
    raw: dict[str, dict[str, str]] = {name: {} for name in _SECTIONS}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}", EXIT_CONFIG_MISSING)
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (configparser.Error, UnicodeDecodeError) as exc:
            raise ConfigError(f"malformed config {path}: {exc}", EXIT_CONFIG_SYNTAX)
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section [{section}]", EXIT_CONFIG_UNKNOWN_KEY)
            for key, value in parser.items(section):
                if key not in _SECTIONS[section]:
                    raise ConfigError(
                        f"unknown key {key!r} in section [{section}]", EXIT_CONFIG_UNKNOWN_KEY
                    )
                raw[section][key] = value
    return raw


def _build_wind(values: dict[str, str]) -> WindModelParams:
    s = "wind_model"
    arma_kwargs = {}
    if "arma_phi" in values:
        arma_kwargs["phi"] = _float_tuple(s, "arma_phi", values["arma_phi"])
    if "arma_theta" in values:
        arma_kwargs["theta"] = _float_tuple(s, "arma_theta", values["arma_theta"])
    if "arma_sigma_alpha" in values:
        arma_kwargs["sigma_alpha"] = _float(s, "arma_sigma_alpha", values["arma_sigma_alpha"])
    if "arma_base_mean_mps" in values:
        arma_kwargs["mean"] = _float(s, "arma_base_mean_mps", values["arma_base_mean_mps"])
    if "arma_base_std_mps" in values:
        arma_kwargs["std"] = _float(s, "arma_base_std_mps", values["arma_base_std_mps"])
    kwargs = {}
    if "turbulence_length_scale_m" in values:
        kwargs["length_scale"] = _float(s, "turbulence_length_scale_m", values["turbulence_length_scale_m"])
    if "kappa" in values:
        kwargs["kappa"] = _float(s, "kappa", values["kappa"])
    if "target_annual_mean_mps" in values:
        kwargs["target_annual_mean"] = _float(s, "target_annual_mean_mps", values["target_annual_mean_mps"])
    if "mean_targeting" in values:
        kwargs["mean_targeting"] = values["mean_targeting"].strip()
    try:
        return WindModelParams(arma=ArmaParams(**arma_kwargs), **kwargs)
    except ValueError as exc:
        raise ConfigError(f"[wind_model] {exc}", EXIT_CONFIG_INVALID)


def _build_turbine(values: dict[str, str]) -> TurbineParams:
    s = "turbine"
    kwargs = {}
    scalar = {
        "rotor_radius_m": "radius",
        "inertia_kgm2": "inertia",
        "p_nom_w": "p_nom",
        "v_nom_mps": "v_nom",
        "v_cut_in_mps": "v_cut_in",
        "v_restart_mps": "v_restart",
        "v5_cutoff_mps": "v5_cutoff",
        "v60_cutoff_mps": "v60_cutoff",
        "air_density_kgm3": "rho",
        "generator_efficiency": "eta",
        "pitch_gain": "k2",
    }
    for key, attr in scalar.items():
        if key in values:
            kwargs[attr] = _float(s, key, values[key])
    # Unit conversions happen here only; everything downstream is SI.
    if "omega_min_rpm" in values:
        kwargs["omega_min"] = _float(s, "omega_min_rpm", values["omega_min_rpm"]) * RPM_TO_RAD_S
    if "omega_nom_rpm" in values:
        kwargs["omega_nom"] = _float(s, "omega_nom_rpm", values["omega_nom_rpm"]) * RPM_TO_RAD_S
    if "theta_max_deg" in values:
        kwargs["theta_max"] = _float(s, "theta_max_deg", values["theta_max_deg"]) * DEG_TO_RAD
    if "pitch_rate_min_deg_s" in values:
        kwargs["pitch_rate_min"] = _float(s, "pitch_rate_min_deg_s", values["pitch_rate_min_deg_s"]) * DEG_TO_RAD
    if "pitch_rate_max_deg_s" in values:
        kwargs["pitch_rate_max"] = _float(s, "pitch_rate_max_deg_s", values["pitch_rate_max_deg_s"]) * DEG_TO_RAD
    if "cp_coeffs" in values:
        kwargs["cp_coeffs"] = _float_tuple(s, "cp_coeffs", values["cp_coeffs"])
    try:
        return calibrated(TurbineParams(**kwargs))
    except (ValueError, ModelError) as exc:
        raise ConfigError(f"[turbine] {exc}", EXIT_CONFIG_INVALID)


def build_sim_config(raw: dict, args: argparse.Namespace) -> SimConfig:
    """Resolve config file + command-line overrides into a SimConfig."""
    wind_params = _build_wind(raw["wind_model"])
    turbine_params = _build_turbine(raw["turbine"])
    e = raw["mc_engine"]
    s = "mc_engine"
    duration_h = _float(s, "duration_hours", e["duration_hours"]) if "duration_hours" in e else 8760.0
    dt = _float(s, "dt_s", e["dt_s"]) if "dt_s" in e else 1.0
    n_turbines = _int(s, "n_turbines", e["n_turbines"]) if "n_turbines" in e else 1
    seed = _int(s, "seed", e["seed"]) if "seed" in e else 0
    stride_s = _float(s, "record_stride_s", e["record_stride_s"]) if "record_stride_s" in e else 10.0
    substeps = _int(s, "mech_substeps", e["mech_substeps"]) if "mech_substeps" in e else None
    replicates = _int(s, "n_replicates", e["n_replicates"]) if "n_replicates" in e else 1
    warmup_h = _float(s, "warmup_hours", e["warmup_hours"]) if "warmup_hours" in e else 1.0
    workers = _int(s, "workers", e["workers"]) if "workers" in e else 1

    if getattr(args, "mean", None) is not None:
        wind_params = dataclasses.replace(wind_params, target_annual_mean=args.mean)
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    if getattr(args, "turbines", None) is not None:
        n_turbines = args.turbines
    if getattr(args, "duration_hours", None) is not None:
        duration_h = args.duration_hours
    if getattr(args, "dt", None) is not None:
        dt = args.dt
    if getattr(args, "workers", None) is not None:
        workers = args.workers
    if getattr(args, "replicates", None) is not None:
        replicates = args.replicates

    try:
        return SimConfig(
            duration_s=duration_h * 3600.0,
            dt=dt,
            n_turbines=n_turbines,
            seed=seed,
            wind=wind_params,
            turbine=turbine_params,
            record_stride=max(1, round(stride_s / dt)),
            mech_substeps=substeps,
            n_replicates=replicates,
            warmup_s=warmup_h * 3600.0,
            n_workers=workers,
        )
    except ValueError as exc:
        raise ConfigError(f"[mc_engine] {exc}", EXIT_CONFIG_INVALID)


def _curve_options(raw: dict) -> dict:
    c = raw["steady_curve"]
    out = {}
    if "v_step_mps" in c:
        out["v_step"] = _float("steady_curve", "v_step_mps", c["v_step_mps"])
    if "static_cutout_mps" in c:
        out["cutout"] = _float("steady_curve", "static_cutout_mps", c["static_cutout_mps"])
    return out


def _stats_bins(raw: dict, turbine: TurbineParams):
    v_edges, p_edges = stats.default_bins(turbine)
    st = raw["stats"]
    if "v_bin_mps" in st:
        dv = _float("stats", "v_bin_mps", st["v_bin_mps"])
        v_edges = np.arange(0.0, 30.0 + dv, dv)
    if "p_bin_w" in st:
        dp = _float("stats", "p_bin_w", st["p_bin_w"])
        p_max = dp * np.ceil(1.2 * turbine.eta * turbine.p_nom / dp)
        p_edges = np.arange(0.0, p_max + dp, dp)
    return v_edges, p_edges


class OutputSet:
    """Tracks the files a command writes so partial output is removed on failure."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.paths: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.paths.append(p)
        return p

    def discard(self) -> None:
        for p in self.paths:
            if os.path.exists(p):
                os.remove(p)


def _write_trace_csv(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t_s,turbine,mode,omega_radps,theta_rad,v_mps,p_out_w\n")
        for i in range(trace.n_turbines):
            mode = trace.mode[i] if trace.mode is not None else None
            omega = trace.omega[i] if trace.omega is not None else None
            theta = trace.theta[i] if trace.theta is not None else None
            for k in range(trace.times.size):
                m = int(mode[k]) if mode is not None else -1
                om = repr(float(omega[k])) if omega is not None else ""
                th = repr(float(theta[k])) if theta is not None else ""
                fh.write(
                    f"{float(trace.times[k])!r},{i},{m},{om},{th},"
                    f"{float(trace.wind[i, k])!r},{float(trace.power[i, k])!r}\n"
                )


def _write_summary(path, pairs) -> None:
    with open(path, "w") as fh:
        for key, value in pairs:
            fh.write(f"{key} = {value}\n")


def _config_echo(config: SimConfig) -> list:
    return [
        ("seed", config.seed),
        ("n_turbines", config.n_turbines),
        ("duration_hours", config.duration_s / 3600.0),
        ("dt_s", config.dt),
        ("record_stride_ticks", config.record_stride),
        ("mech_substeps", config.mech_substeps),
        ("n_replicates", config.n_replicates),
        ("warmup_hours", config.warmup_s / 3600.0),
        ("target_annual_mean_mps", config.wind.target_annual_mean),
        ("mean_targeting", config.wind.mean_targeting),
    ]


def cmd_curve(args) -> int:
    raw = parse_config(args.config)
    config = build_sim_config(raw, args)
    out = OutputSet(args.out_dir)
    try:
        curve = power_curve.build_curve(config.turbine, **_curve_options(raw))
        power_curve.export_curve_csv(out.path("power_curve.csv"), curve)
        if args.cp_surface:
            from .turbine import export_cp_surface_csv

            export_cp_surface_csv(out.path("cp_surface.csv"), config.turbine)
    except Exception:
        out.discard()
        raise
    return EXIT_OK


def cmd_simulate(args) -> int:
    raw = parse_config(args.config)
    config = build_sim_config(raw, args)
    out = OutputSet(args.out_dir)
    try:
        summary_pairs = [("command", "simulate"), ("model", args.model)]
        summary_pairs += _config_echo(config)
        if args.model in ("dynamic", "both"):
            trace = simulate_farm(config)
            _write_trace_csv(out.path("trace.csv"), trace)
            dist = stats.ecdf(trace.warm_samples(config.warmup_s))
            stats.export_cdf_csv(out.path("cdf_dynamic.csv"), dist)
            for key, value in stats.summary(trace, config.turbine).items():
                summary_pairs.append((f"dynamic_{key}", value))
        if args.model in ("static", "both"):
            curve = power_curve.build_curve(config.turbine, **_curve_options(raw))
            trace = simulate_static(config, curve)
            _write_trace_csv(out.path("trace_static.csv"), trace)
            dist = stats.ecdf(trace.warm_samples(config.warmup_s))
            stats.export_cdf_csv(out.path("cdf_static.csv"), dist)
            for key, value in stats.summary(trace, config.turbine).items():
                summary_pairs.append((f"static_{key}", value))
        if args.dump_wind:
            slow = engine._slow_series(config, 0)
            rng = substream(config.seed, 0, engine.ROLE_TURBULENCE, 0)
            wind.dump_series_csv(
                out.path("wind.csv"), config.wind, slow, rng, min(config.duration_s, 86400.0)
            )
        _write_summary(out.path("summary.txt"), summary_pairs)
    except Exception:
        out.discard()
        raise
    return EXIT_OK


def cmd_compare(args) -> int:
    raw = parse_config(args.config)
    config = build_sim_config(raw, args)
    out = OutputSet(args.out_dir)
    try:
        curve = power_curve.build_curve(config.turbine, **_curve_options(raw))
        v_edges, p_edges = _stats_bins(raw, config.turbine)
        result = run_campaign(config, curve=curve, v_edges=v_edges, p_edges=p_edges)
        stats.export_cdf_csv(out.path("cdf_dynamic.csv"), result.dynamic)
        stats.export_cdf_csv(out.path("cdf_static.csv"), result.static)
        stats.export_joint_hist_csv(out.path("joint_hist.csv"), result.joint)
        pairs = [("command", "compare")] + _config_echo(config)
        pairs += sorted(result.metrics.items())
        _write_summary(out.path("summary.txt"), pairs)
    except Exception:
        out.discard()
        raise
    return EXIT_OK


def cmd_stats(args) -> int:
    raw = parse_config(args.config)
    config = build_sim_config(raw, args)
    out = OutputSet(args.out_dir)
    try:
        data = np.genfromtxt(args.trace, delimiter=",", names=True)
        if data.size == 0:
            raise ConfigError(f"empty trace file: {args.trace}", EXIT_CONFIG_INVALID)
        p = np.atleast_1d(data["p_out_w"])
        t = np.atleast_1d(data["t_s"])
        keep = t >= config.warmup_s
        dist = stats.ecdf(p[keep] if keep.any() else p)
        stats.export_cdf_csv(out.path("cdf_from_trace.csv"), dist)
        rated = config.turbine.eta * config.turbine.p_nom
        pairs = [
            ("command", "stats"),
            ("trace", args.trace),
            ("n_samples", dist.n),
            ("mean_power_w", float(dist.samples.mean())),
            ("capacity_factor", float(dist.samples.mean() / rated)),
            ("p_zero", float(np.mean(dist.samples < stats.ZERO_POWER_THRESHOLD_W))),
        ]
        _write_summary(out.path("summary.txt"), pairs)
    except OSError as exc:
        out.discard()
        raise ConfigError(f"cannot read trace: {exc}", EXIT_CONFIG_MISSING)
    except Exception:
        out.discard()
        raise
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windfarm-mc",
        description="Monte-Carlo simulation of wind farm power output",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="INI campaign config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--mean", type=float, default=None, help="target annual mean wind, m/s")
        p.add_argument("--turbines", type=int, default=None)
        p.add_argument("--duration-hours", dest="duration_hours", type=float, default=None)
        p.add_argument("--dt", type=float, default=None, help="tick length, s")
        p.add_argument("--out-dir", dest="out_dir", default="out")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--replicates", type=int, default=None)

    p_sim = sub.add_parser("simulate", help="run a campaign and write traces")
    common(p_sim)
    p_sim.add_argument("--model", choices=("dynamic", "static", "both"), default="dynamic")
    p_sim.add_argument("--dump-wind", action="store_true", help="also write a wind series CSV")
    p_sim.set_defaults(fn=cmd_simulate)

    p_curve = sub.add_parser("curve", help="write the steady-state power curve")
    common(p_curve)
    p_curve.add_argument("--cp-surface", action="store_true", help="also export the Cp surface")
    p_curve.set_defaults(fn=cmd_curve)

    p_cmp = sub.add_parser("compare", help="paired dynamic/static comparison")
    common(p_cmp)
    p_cmp.set_defaults(fn=cmd_compare)

    p_stats = sub.add_parser("stats", help="summarize an existing trace CSV")
    common(p_stats)
    p_stats.add_argument("--trace", required=True, help="trace.csv produced by simulate")
    p_stats.set_defaults(fn=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
