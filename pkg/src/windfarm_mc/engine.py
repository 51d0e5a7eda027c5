"""Campaign orchestration: seeded streams, turbine/farm simulation, paired comparisons.

Randomness discipline: every stream is a counter-based Philox generator keyed
by (seed, replicate, role, turbine); the slow wind series is shared across a
farm while each turbine gets its own turbulence stream.  Results are therefore
byte-identical for a given (seed, config) regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels, stats
from .errors import IntegrationDomainError, SimulationDivergedError
from ._kernels import (
    ERR_DOMAIN,
    ERR_DT_UNSTABLE,
    S_ERRCODE,
    S_MODE,
    S_OMEGA,
    S_SUM5,
    S_SUM60,
    STATE_SIZE,
)
from .control import WINDOW_LONG_S, WINDOW_SHORT_S
from .power_curve import PowerCurve, build_curve, static_power_array
from .stats import EmpiricalDistribution, JointHistogram, ecdf, joint_hist, ks_distance
from .turbine import TurbineParams, default_turbine_params
from .wind import SECONDS_PER_HOUR, SlowWindSeries, WindModelParams, generate_slow_series

ROLE_SLOW = 0
ROLE_TURBULENCE = 1

# Mechanical substep target (s); the drive-train/pitch loop is stiffer than the
# wind sampling interval and explicit Euler needs the finer step.
MECH_SUBSTEP_TARGET_S = 0.05

CHUNK_TICKS = 262_144


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a named role in the campaign."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))
    )


@dataclass(frozen=True)
class SimConfig:
    duration_s: float = 8760 * 3600.0
    dt: float = 1.0
    n_turbines: int = 1
    seed: int = 0
    wind: WindModelParams = field(default_factory=WindModelParams)
    turbine: TurbineParams = field(default_factory=default_turbine_params)
    record_stride: Optional[int] = None
    mech_substeps: Optional[int] = None
    n_replicates: int = 1
    warmup_s: float = 3600.0
    n_workers: int = 1
    record_mech: Optional[bool] = None

    def __post_init__(self):
        if not self.duration_s >= 3600.0:
            raise ValueError(f"duration must be at least one hour, got {self.duration_s}")
        if self.n_turbines < 1:
            raise ValueError(f"n_turbines must be >= 1, got {self.n_turbines}")
        if self.n_replicates < 1:
            raise ValueError(f"n_replicates must be >= 1, got {self.n_replicates}")
        if self.n_workers < 1:
            raise ValueError(f"n_workers must be >= 1, got {self.n_workers}")
        if not 0.0 <= self.warmup_s < self.duration_s:
            raise ValueError("warmup must be shorter than the run")
        # The engine tick owns dt; keep the wind parameters in step with it.
        if self.wind.dt != self.dt:
            object.__setattr__(self, "wind", replace(self.wind, dt=self.dt))
        if self.record_stride is None:
            object.__setattr__(self, "record_stride", max(1, round(10.0 / self.dt)))
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.mech_substeps is None:
            object.__setattr__(
                self, "mech_substeps", max(1, round(self.dt / MECH_SUBSTEP_TARGET_S))
            )
        if self.mech_substeps < 1:
            raise ValueError(f"mech_substeps must be >= 1, got {self.mech_substeps}")
        if self.record_mech is None:
            object.__setattr__(self, "record_mech", self.n_turbines == 1)

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration_s / self.dt))

    @property
    def n_hours(self) -> int:
        return int(math.ceil(self.duration_s / SECONDS_PER_HOUR))


@dataclass
class PowerTrace:
    """Recorded samples of a simulation run."""

    times: np.ndarray
    power: np.ndarray  # (n_turbines, n_samples)
    wind: np.ndarray  # (n_turbines, n_samples)
    farm_total: np.ndarray
    dt: float
    stride: int
    mode: Optional[np.ndarray] = None
    omega: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.power.shape != self.wind.shape or self.power.shape[1] != self.times.size:
            raise ValueError("trace arrays are inconsistent")

    @property
    def n_turbines(self) -> int:
        return self.power.shape[0]

    def warm_samples(self, warmup_s: float) -> np.ndarray:
        """Per-turbine-normalized farm power after the warm-up period."""
        keep = self.times >= warmup_s
        return self.farm_total[keep] / self.n_turbines


def _slow_series(config: SimConfig, replicate: int) -> SlowWindSeries:
    rng = substream(config.seed, replicate, ROLE_SLOW)
    return generate_slow_series(config.wind, rng, config.n_hours)


def _n_records(config: SimConfig) -> int:
    return (config.n_ticks + config.record_stride - 1) // config.record_stride


def _run_dynamic_single(config: SimConfig, hourly: np.ndarray, turbine_index: int, replicate: int):
    rng = substream(config.seed, replicate, ROLE_TURBULENCE, turbine_index)
    n_ticks = config.n_ticks
    n_rec = _n_records(config)
    rec_t = np.empty(n_rec)
    rec_v = np.empty(n_rec)
    rec_p = np.empty(n_rec)
    rec_mode = np.empty(n_rec, dtype=np.int8)
    rec_omega = np.empty(n_rec)
    rec_theta = np.empty(n_rec)

    state = np.zeros(STATE_SIZE)
    n5 = max(1, math.ceil(WINDOW_SHORT_S / config.dt))
    n60 = max(1, math.ceil(WINDOW_LONG_S / config.dt))
    v0 = hourly[0]
    buf5 = np.full(n5, v0)
    buf60 = np.full(n60, v0)
    state[S_SUM5] = v0 * n5
    state[S_SUM60] = v0 * n60

    tp = config.turbine.packed
    start = 0
    while start < n_ticks:
        n = min(CHUNK_TICKS, n_ticks - start)
        xi = rng.standard_normal(n)
        err_tick = _kernels.run_dynamic_chunk(
            start,
            n,
            config.dt,
            config.mech_substeps,
            hourly,
            xi,
            tp,
            config.wind.length_scale,
            config.wind.kappa,
            state,
            buf5,
            buf60,
            config.record_stride,
            rec_t,
            rec_v,
            rec_p,
            rec_mode,
            rec_omega,
            rec_theta,
        )
        if err_tick >= 0:
            t_err = err_tick * config.dt
            if state[S_ERRCODE] == ERR_DT_UNSTABLE:
                raise ValueError(
                    f"dt={config.dt} unstable for the turbulence timescale at t={t_err}"
                )
            if state[S_ERRCODE] == ERR_DOMAIN:
                raise IntegrationDomainError(
                    f"rotor speed left the integration domain at t={t_err}s "
                    f"(mode={int(state[S_MODE])}, omega={state[S_OMEGA]!r})"
                )
            raise SimulationDivergedError(
                t=t_err, mode=int(state[S_MODE]), omega=state[S_OMEGA]
            )
        start += n
    return rec_t, rec_v, rec_p, rec_mode, rec_omega, rec_theta


def _run_wind_single(config: SimConfig, hourly: np.ndarray, turbine_index: int, replicate: int):
    rng = substream(config.seed, replicate, ROLE_TURBULENCE, turbine_index)
    n_ticks = config.n_ticks
    n_rec = _n_records(config)
    rec_t = np.empty(n_rec)
    rec_v = np.empty(n_rec)
    wstate = np.zeros(1)
    start = 0
    while start < n_ticks:
        n = min(CHUNK_TICKS, n_ticks - start)
        xi = rng.standard_normal(n)
        err_tick = _kernels.run_wind_chunk(
            start,
            n,
            config.dt,
            hourly,
            xi,
            config.wind.length_scale,
            config.wind.kappa,
            wstate,
            config.record_stride,
            rec_t,
            rec_v,
        )
        if err_tick >= 0:
            raise ValueError(f"wind generation failed at t={err_tick * config.dt}")
        start += n
    return rec_t, rec_v


def _map_turbines(config: SimConfig, fn, indices):
    if config.n_workers > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=config.n_workers) as pool:
            return list(pool.map(fn, indices))
    return [fn(i) for i in indices]


def simulate_farm(
    config: SimConfig, replicate: int = 0, slow: Optional[SlowWindSeries] = None
) -> PowerTrace:
    """Dynamic-model run: shared slow wind, independent turbulence per turbine."""
    if slow is None:
        slow = _slow_series(config, replicate)
    hourly = slow.hourly_means
    if slow.end_time < config.duration_s:
        raise ValueError("slow wind series shorter than the run")

    results = _map_turbines(
        config, lambda i: _run_dynamic_single(config, hourly, i, replicate), range(config.n_turbines)
    )
    times = results[0][0]
    wind = np.stack([r[1] for r in results])
    power = np.stack([r[2] for r in results])
    trace = PowerTrace(
        times=times,
        power=power,
        wind=wind,
        farm_total=power.sum(axis=0),
        dt=config.dt,
        stride=config.record_stride,
    )
    if config.record_mech:
        trace.mode = np.stack([r[3] for r in results])
        trace.omega = np.stack([r[4] for r in results])
        trace.theta = np.stack([r[5] for r in results])
    return trace


def simulate_turbine(
    config: SimConfig, replicate: int = 0, slow: Optional[SlowWindSeries] = None
) -> PowerTrace:
    """Single-turbine dynamic run (a one-turbine farm)."""
    if config.n_turbines != 1:
        config = replace(config, n_turbines=1, record_mech=config.record_mech)
    return simulate_farm(config, replicate=replicate, slow=slow)


def simulate_static(
    config: SimConfig,
    curve: PowerCurve,
    replicate: int = 0,
    slow: Optional[SlowWindSeries] = None,
) -> PowerTrace:
    """Static-model run: identical wind pipeline, power read off the steady curve."""
    if slow is None:
        slow = _slow_series(config, replicate)
    hourly = slow.hourly_means
    if slow.end_time < config.duration_s:
        raise ValueError("slow wind series shorter than the run")

    results = _map_turbines(
        config, lambda i: _run_wind_single(config, hourly, i, replicate), range(config.n_turbines)
    )
    times = results[0][0]
    wind = np.stack([r[1] for r in results])
    power = np.stack([static_power_array(w, curve) for w in wind])
    return PowerTrace(
        times=times,
        power=power,
        wind=wind,
        farm_total=power.sum(axis=0),
        dt=config.dt,
        stride=config.record_stride,
    )


@dataclass
class CampaignResult:
    dynamic: EmpiricalDistribution
    static: EmpiricalDistribution
    joint: JointHistogram
    ks: float
    metrics: dict


def run_campaign(
    config: SimConfig,
    curve: Optional[PowerCurve] = None,
    v_edges=None,
    p_edges=None,
) -> CampaignResult:
    """Paired dynamic/static campaign on identical wind streams.

    Distributions pool the per-turbine-normalized farm output over all
    replicates, after discarding the warm-up period; the joint histogram pools
    per-turbine (wind, power) pairs of the dynamic model.
    """
    if curve is None:
        curve = build_curve(config.turbine)
    if v_edges is None or p_edges is None:
        dv, dp = stats.default_bins(config.turbine)
        v_edges = v_edges if v_edges is not None else dv
        p_edges = p_edges if p_edges is not None else dp

    dyn_samples = []
    sta_samples = []
    joint_counts = None
    for r in range(config.n_replicates):
        slow = _slow_series(config, r)
        dyn = simulate_farm(config, replicate=r, slow=slow)
        sta = simulate_static(config, curve, replicate=r, slow=slow)
        keep = dyn.times >= config.warmup_s
        dyn_samples.append(dyn.warm_samples(config.warmup_s))
        sta_samples.append(sta.warm_samples(config.warmup_s))
        h = joint_hist(
            dyn.wind[:, keep].ravel(), dyn.power[:, keep].ravel(), v_edges, p_edges
        )
        joint_counts = h.counts if joint_counts is None else joint_counts + h.counts

    dyn_dist = ecdf(np.concatenate(dyn_samples))
    sta_dist = ecdf(np.concatenate(sta_samples))
    joint = JointHistogram(v_edges=v_edges, p_edges=p_edges, counts=joint_counts)
    ks = ks_distance(dyn_dist, sta_dist)

    rated = config.turbine.eta * config.turbine.p_nom
    metrics = {
        "ks_distance": ks,
        "n_samples": dyn_dist.n,
        "dynamic_mean_w": float(dyn_dist.samples.mean()),
        "static_mean_w": float(sta_dist.samples.mean()),
        "dynamic_capacity_factor": float(dyn_dist.samples.mean() / rated),
        "static_capacity_factor": float(sta_dist.samples.mean() / rated),
        "dynamic_p_zero": float(np.mean(dyn_dist.samples < stats.ZERO_POWER_THRESHOLD_W)),
        "static_p_zero": float(np.mean(sta_dist.samples < stats.ZERO_POWER_THRESHOLD_W)),
    }
    return CampaignResult(dynamic=dyn_dist, static=sta_dist, joint=joint, ks=ks, metrics=metrics)
