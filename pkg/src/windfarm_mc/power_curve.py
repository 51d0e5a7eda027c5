"""Steady-state power curve: the static wind-to-power map of the same turbine."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelInconsistencyError
from .turbine import TurbineParams, _aero_power, _mode1_power_ref

ROOT_TOL_FRACTION = 1e-6
ROOT_MAX_ITER = 200


@dataclass(frozen=True)
class PowerCurve:
    """Tabulated grid power versus wind speed, with the thresholds used to build it."""

    v_grid: np.ndarray
    p_values: np.ndarray
    v_cut_in: float
    v_cut_out: float

    def __post_init__(self):
        v = np.asarray(self.v_grid, dtype=np.float64)
        p = np.asarray(self.p_values, dtype=np.float64)
        object.__setattr__(self, "v_grid", v)
        object.__setattr__(self, "p_values", p)
        if v.ndim != 1 or v.size != p.size or v.size < 2:
            raise ValueError("v_grid and p_values must be matching 1-D arrays")
        if np.any(np.diff(v) <= 0):
            raise ValueError("v_grid must be strictly ascending")
        if np.any(p < 0):
            raise ValueError("curve power must be non-negative")


def _mode1_equilibrium(v: float, params: TurbineParams) -> float:
    """Rotor speed where captured power balances the partial-load reference.

    Bisection on [omega_min, omega_nom]; the residual at the returned speed is
    below ROOT_TOL_FRACTION * p_nom.
    """
    tp = params.packed
    tol = ROOT_TOL_FRACTION * params.p_nom

    def f(om: float) -> float:
        return _aero_power(v, om, 0.0, tp) - _mode1_power_ref(om, tp)

    lo, hi = params.omega_min, params.omega_nom
    f_lo, f_hi = f(lo), f(hi)
    if abs(f_lo) < tol:
        return lo
    if abs(f_hi) < tol:
        return hi
    if f_lo * f_hi > 0:
        raise ModelInconsistencyError(
            f"equilibrium not bracketed at v={v} (f={f_lo:.3g}, {f_hi:.3g})"
        )
    mid = 0.5 * (lo + hi)
    for _ in range(ROOT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < tol:
            return mid
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    if abs(f(mid)) >= tol:
        raise ModelInconsistencyError(f"equilibrium residual above tolerance at v={v}")
    return mid


def equilibrium_power(v: float, params: TurbineParams, cutout: float | None = None) -> float:
    """Long-run grid power under constant wind v, W.

    Zero outside [v_cut_in, cutout] (a constant wind above the slow cut-off
    limit trips the averages); the partial-load equilibrium between cut-in and
    rated wind; rated grid power above rated wind where the pitch absorbs the
    surplus.
    """
    if v < 0:
        raise ValueError(f"v must be >= 0, got {v}")
    if cutout is None:
        cutout = params.v60_cutoff
    if v < params.v_cut_in or v > cutout:
        return 0.0
    if v > params.v_nom:
        return params.eta * params.p_nom
    omega = _mode1_equilibrium(v, params)
    return params.eta * _mode1_power_ref(omega, params.packed)


def build_curve(
    params: TurbineParams, v_step: float = 0.5, cutout: float | None = None
) -> PowerCurve:
    """Tabulate equilibrium_power on [0, v5_cutoff + 2] with spacing v_step."""
    if not v_step > 0:
        raise ValueError(f"v_step must be > 0, got {v_step}")
    if cutout is None:
        cutout = params.v60_cutoff
    v_max = params.v5_cutoff + 2.0
    n = int(round(v_max / v_step)) + 1
    v_grid = np.arange(n) * v_step
    p_values = np.array([equilibrium_power(v, params, cutout) for v in v_grid])
    return PowerCurve(v_grid=v_grid, p_values=p_values, v_cut_in=params.v_cut_in, v_cut_out=cutout)


def static_power(v: float, curve: PowerCurve) -> float:
    """Linear interpolation on the curve grid; exactly zero outside the operating band."""
    if v < curve.v_cut_in or v > curve.v_cut_out:
        return 0.0
    return float(np.interp(v, curve.v_grid, curve.p_values))


def static_power_array(v: np.ndarray, curve: PowerCurve) -> np.ndarray:
    """Vectorized static_power."""
    v = np.asarray(v, dtype=np.float64)
    p = np.interp(v, curve.v_grid, curve.p_values)
    p[(v < curve.v_cut_in) | (v > curve.v_cut_out)] = 0.0
    return p


def export_curve_csv(path, curve: PowerCurve) -> None:
    """Write the curve as CSV: v_mps, p_out_w."""
    with open(path, "w", newline="") as fh:
        fh.write("v_mps,p_out_w\n")
        for v, p in zip(curve.v_grid, curve.p_values):
            fh.write(f"{float(v)!r},{float(p)!r}\n")
