"""Synthetic wind speed: hourly ARMA(3,2) slow component plus Ornstein-Uhlenbeck turbulence.

The instantaneous wind is v(t) = vbar(t) + w(t).  vbar comes from an hourly
ARMA series (reflected at zero, linearly interpolated in time), w from an OU
process whose standard deviation is kappa * vbar and whose correlation time is
T = L / vbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularTimescaleError

SECONDS_PER_HOUR = 3600.0

# Floor applied to vbar when forming T = L / vbar; below cut-in the turbine is
# idle anyway, so only the decay timescale matters near zero wind.
VBAR_FLOOR = 0.1

# Hours of ARMA spin-up discarded so the series starts near stationarity.
ARMA_BURN_IN = 256


@dataclass(frozen=True)
class ArmaParams:
    """Hourly ARMA(3,2) model of the normalized wind series y.

    y_t = sum(phi_i * y_{t-i}) + a_t + sum(theta_j * a_{t-j}), a_t ~ N(0, sigma_alpha^2).

    Defaults are the coefficients fitted to hourly records from a Canadian
    prairie site, with the site's annual mean and standard deviation in m/s.
    """

    phi: tuple[float, float, float] = (1.1772, 0.1001, -0.3572)
    theta: tuple[float, float] = (-0.5030, -0.2924)
    sigma_alpha: float = 0.524760
    mean: float = 5.46
    std: float = 2.6944

    def __post_init__(self):
        if len(self.phi) != 3 or len(self.theta) != 2:
            raise ValueError("ARMA model is order (3, 2): need 3 phi and 2 theta")
        if not all(math.isfinite(c) for c in (*self.phi, *self.theta)):
            raise ValueError("non-finite ARMA coefficient")
        if not self.sigma_alpha > 0:
            raise ValueError(f"sigma_alpha must be > 0, got {self.sigma_alpha}")
        if not self.std > 0:
            raise ValueError(f"std must be > 0, got {self.std}")
        if not self.mean > 0:
            raise ValueError(f"mean must be > 0, got {self.mean}")
        # Stationarity: roots of 1 - phi1 z - phi2 z^2 - phi3 z^3 outside unit circle.
        p1, p2, p3 = self.phi
        roots = np.roots([-p3, -p2, -p1, 1.0])
        if np.any(np.abs(roots) <= 1.0 + 1e-12):
            raise ValueError(f"AR polynomial is not stationary (root moduli {np.abs(roots)})")


@dataclass(frozen=True)
class WindModelParams:
    """Parameters of the two-timescale wind process.

    mean_targeting selects how the hourly series is pinned to
    target_annual_mean: "shift" replaces the base mean by the target before
    reflection, "scale" multiplies the reflected series by
    target_annual_mean / arma.mean.
    """

    length_scale: float = 300.0
    kappa: float = 0.15
    target_annual_mean: float = 5.46
    dt: float = 1.0
    arma: ArmaParams = field(default_factory=ArmaParams)
    mean_targeting: str = "shift"

    def __post_init__(self):
        if not self.length_scale > 0:
            raise ValueError(f"length_scale must be > 0, got {self.length_scale}")
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError(f"kappa must be in [0, 1), got {self.kappa}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.target_annual_mean > 0:
            raise ValueError(f"target_annual_mean must be > 0, got {self.target_annual_mean}")
        if self.mean_targeting not in ("shift", "scale"):
            raise ValueError(f"mean_targeting must be 'shift' or 'scale', got {self.mean_targeting!r}")


@dataclass(frozen=True)
class SlowWindSeries:
    """Hourly mean wind speeds, linearly interpolated in continuous time."""

    hourly_means: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.hourly_means, dtype=np.float64)
        object.__setattr__(self, "hourly_means", values)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("need at least two hourly nodes to interpolate")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("hourly means must be finite and non-negative")

    @property
    def end_time(self) -> float:
        return self.start_time + SECONDS_PER_HOUR * (self.hourly_means.size - 1)


@dataclass(frozen=True)
class TurbulenceState:
    """Current fast wind fluctuation w, m/s."""

    w: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.w):
            raise ValueError(f"turbulence state must be finite, got {self.w}")


def arma_step(history, innov_history, alpha: float, params: ArmaParams) -> float:
    """One ARMA(3,2) update.

    history[0] is y_{t-1}, history[2] is y_{t-3}; innov_history[0] is a_{t-1}.
    """
    if len(history) != 3 or len(innov_history) != 2:
        raise ValueError("history must hold 3 y values and 2 innovations")
    vals = (*history, *innov_history, alpha)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("non-finite ARMA input")
    y = 0.0
    for c, h in zip(params.phi, history):
        y += c * h
    y += alpha
    for c, a in zip(params.theta, innov_history):
        y += c * a
    return y


def hourly_mean_from_y(y: float, arma: ArmaParams, scale: float = 1.0) -> float:
    """Map a normalized ARMA value to an hourly mean wind speed, m/s.

    Reflection at zero is an absolute value; scale retargets the annual mean.
    """
    if not math.isfinite(y):
        raise ValueError(f"y must be finite, got {y}")
    if not scale > 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    return scale * abs(arma.mean + arma.std * y)


def generate_slow_series(
    params: WindModelParams, rng: np.random.Generator, n_hours: int
) -> SlowWindSeries:
    """Generate n_hours + 1 hourly nodes (interpolation needs a closing node)."""
    if n_hours < 1:
        raise ValueError("need at least one hour")
    arma = params.arma
    n = ARMA_BURN_IN + n_hours + 1
    innov = rng.standard_normal(n) * arma.sigma_alpha
    y = np.zeros(n)
    p1, p2, p3 = arma.phi
    t1, t2 = arma.theta
    for t in range(n):
        acc = 0.0
        if t >= 1:
            acc += p1 * y[t - 1]
        if t >= 2:
            acc += p2 * y[t - 2]
        if t >= 3:
            acc += p3 * y[t - 3]
        acc += innov[t]
        if t >= 1:
            acc += t1 * innov[t - 1]
        if t >= 2:
            acc += t2 * innov[t - 2]
        y[t] = acc
    y = y[ARMA_BURN_IN:]
    if params.mean_targeting == "shift":
        hourly = np.abs(params.target_annual_mean + arma.std * y)
    else:
        hourly = (params.target_annual_mean / arma.mean) * np.abs(arma.mean + arma.std * y)
    return SlowWindSeries(hourly_means=hourly)


def interpolate_slow(series: SlowWindSeries, t: float) -> float:
    """Piecewise-linear hourly interpolation; exact at nodes."""
    if t < series.start_time or t > series.end_time:
        raise ValueError(
            f"t={t} outside series range [{series.start_time}, {series.end_time}]"
        )
    x = (t - series.start_time) / SECONDS_PER_HOUR
    k = min(int(x), series.hourly_means.size - 2)
    frac = x - k
    h = series.hourly_means
    return h[k] + (h[k + 1] - h[k]) * frac


def ou_step(
    state: TurbulenceState,
    vbar: float,
    dt: float,
    xi: float,
    params: WindModelParams,
) -> TurbulenceState:
    """Euler-Maruyama update of the turbulence process.

    w' = w - (w / T) dt + kappa * vbar * sqrt(2 / T) * sqrt(dt) * xi,
    with T = L / vbar (vbar floored at VBAR_FLOOR for the timescale only).
    """
    if not vbar > 0:
        raise SingularTimescaleError(f"vbar must be > 0, got {vbar}")
    T = params.length_scale / max(vbar, VBAR_FLOOR)
    if dt >= T / 2:
        raise ValueError(f"dt={dt} too large for turbulence timescale T={T}")
    w = state.w
    w_new = w - (w / T) * dt + params.kappa * vbar * math.sqrt(2.0 / T) * math.sqrt(dt) * xi
    return TurbulenceState(w=w_new)


def sample_wind(vbar: float, w: float) -> float:
    """Instantaneous wind speed, clamped at zero."""
    if not (math.isfinite(vbar) and math.isfinite(w)):
        raise ValueError("non-finite wind components")
    return max(vbar + w, 0.0)


def dump_series_csv(
    path,
    params: WindModelParams,
    series: SlowWindSeries,
    rng: np.random.Generator,
    duration_s: float,
) -> None:
    """Write a generated wind trace as CSV: t_s, vbar_mps, w_mps, v_mps."""
    n_ticks = int(round(duration_s / params.dt))
    state = TurbulenceState()
    with open(path, "w", newline="") as fh:
        fh.write("t_s,vbar_mps,w_mps,v_mps\n")
        for i in range(n_ticks):
            t = i * params.dt
            vbar = float(interpolate_slow(series, t))
            state = ou_step(state, max(vbar, 1e-12), params.dt, rng.standard_normal(), params)
            v = sample_wind(vbar, state.w)
            fh.write(f"{t!r},{vbar!r},{float(state.w)!r},{float(v)!r}\n")
