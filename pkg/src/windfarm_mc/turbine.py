"""Single-turbine continuous dynamics: rotor aerodynamics, drive train, pitch actuator.

All quantities are SI (rad/s, W, m/s); unit conversions happen at config load.
The scalar formulas live in numba-compiled functions operating on a packed
parameter vector so the Monte-Carlo kernels and the Python API share one
implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from numba import njit

from .errors import CalibrationError, IntegrationDomainError

BETZ_LIMIT = 16.0 / 27.0

RPM_TO_RAD_S = 2.0 * math.pi / 60.0
DEG_TO_RAD = math.pi / 180.0

# Indices into the packed parameter vector consumed by the numba kernels.
(
    P_RADIUS,
    P_INERTIA,
    P_OMEGA_MIN,
    P_OMEGA_NOM,
    P_P_NOM,
    P_V_NOM,
    P_V_CUT_IN,
    P_V_RESTART,
    P_V5_CUTOFF,
    P_V60_CUTOFF,
    P_RHO,
    P_ETA,
    P_K2,
    P_THETA_MAX,
    P_RATE_MIN,
    P_RATE_MAX,
    P_CP_C1,
    P_CP_C2,
    P_CP_C3,
    P_CP_C4,
    P_CP_C5,
    P_CP_C6,
    P_CP_C7,
    P_CP_SCALE,
) = range(24)
PACKED_SIZE = 24


@dataclass(frozen=True)
class TurbineParams:
    """Physical and control constants of one DFIG turbine.

    cp_coeffs are the coefficients (c1..c7) of the exponential power-coefficient
    approximation Cp = c1 (c2/Lam - c3 th - c4) exp(-c5/Lam) with
    1/Lam = 1/(lambda + c6 th) - c7/(th^3 + 1), th the pitch angle in degrees.
    cp_scale calibrates the surface so the rated point is self-consistent.
    """

    radius: float = 37.5
    inertia: float = 1.4e6
    omega_min: float = 9.0 * RPM_TO_RAD_S
    omega_nom: float = 18.0 * RPM_TO_RAD_S
    p_nom: float = 2.03e6
    v_nom: float = 14.0
    v_cut_in: float = 3.5
    v_restart: float = 19.0
    v5_cutoff: float = 25.0
    v60_cutoff: float = 20.0
    rho: float = 1.134
    eta: float = 0.9
    k2: float = 100.0
    theta_max: float = 30.0 * DEG_TO_RAD
    pitch_rate_min: float = -10.0 * DEG_TO_RAD
    pitch_rate_max: float = 10.0 * DEG_TO_RAD
    cp_coeffs: tuple[float, ...] = (0.22, 116.0, 0.4, 5.0, 12.5, 0.08, 0.035)
    cp_scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_nom:
            raise ValueError("need 0 < omega_min < omega_nom")
        if not 0 < self.v_cut_in < self.v_nom < self.v60_cutoff <= self.v5_cutoff:
            raise ValueError("need 0 < v_cut_in < v_nom < v60_cutoff <= v5_cutoff")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if not self.inertia > 0:
            raise ValueError(f"inertia must be > 0, got {self.inertia}")
        if not self.pitch_rate_min < 0 < self.pitch_rate_max:
            raise ValueError("pitch rate limits must straddle zero")
        if not (self.radius > 0 and self.rho > 0 and self.p_nom > 0):
            raise ValueError("radius, rho and p_nom must be > 0")
        if not 0 < self.theta_max <= math.pi / 2:
            raise ValueError(f"theta_max out of range: {self.theta_max}")
        if len(self.cp_coeffs) != 7:
            raise ValueError("cp_coeffs must have 7 entries")
        if not self.cp_scale > 0:
            raise ValueError(f"cp_scale must be > 0, got {self.cp_scale}")

    @cached_property
    def packed(self) -> np.ndarray:
        out = np.empty(PACKED_SIZE, dtype=np.float64)
        out[P_RADIUS] = self.radius
        out[P_INERTIA] = self.inertia
        out[P_OMEGA_MIN] = self.omega_min
        out[P_OMEGA_NOM] = self.omega_nom
        out[P_P_NOM] = self.p_nom
        out[P_V_NOM] = self.v_nom
        out[P_V_CUT_IN] = self.v_cut_in
        out[P_V_RESTART] = self.v_restart
        out[P_V5_CUTOFF] = self.v5_cutoff
        out[P_V60_CUTOFF] = self.v60_cutoff
        out[P_RHO] = self.rho
        out[P_ETA] = self.eta
        out[P_K2] = self.k2
        out[P_THETA_MAX] = self.theta_max
        out[P_RATE_MIN] = self.pitch_rate_min
        out[P_RATE_MAX] = self.pitch_rate_max
        out[P_CP_C1 : P_CP_C7 + 1] = self.cp_coeffs
        out[P_CP_SCALE] = self.cp_scale
        out.setflags(write=False)
        return out


@dataclass(frozen=True)
class MechState:
    """Mechanical state: rotor speed omega (rad/s) and pitch angle theta (rad)."""

    omega: float
    theta: float = 0.0


@njit(cache=True, nogil=True)
def _cp(lam, theta, tp):
    """Power coefficient; theta in radians, converted to degrees internally."""
    th = theta * (180.0 / math.pi)
    den = lam + tp[P_CP_C6] * th
    if den <= 1e-12:
        return 0.0
    inv_lam = 1.0 / den - tp[P_CP_C7] / (th * th * th + 1.0)
    raw = tp[P_CP_C1] * (tp[P_CP_C2] * inv_lam - tp[P_CP_C3] * th - tp[P_CP_C4]) * math.exp(
        -tp[P_CP_C5] * inv_lam
    )
    value = tp[P_CP_SCALE] * raw
    if value < 0.0:
        return 0.0
    if value > BETZ_LIMIT:
        return BETZ_LIMIT
    return value


@njit(cache=True, nogil=True)
def _aero_power(v, omega, theta, tp):
    if v <= 0.0:
        return 0.0
    lam = tp[P_RADIUS] * omega / v
    r = tp[P_RADIUS]
    return 0.5 * math.pi * tp[P_RHO] * r * r * _cp(lam, theta, tp) * v * v * v


@njit(cache=True, nogil=True)
def _mode1_power_ref(omega, tp):
    om = min(max(omega, tp[P_OMEGA_MIN]), tp[P_OMEGA_NOM])
    frac = (om - tp[P_OMEGA_MIN]) / (tp[P_OMEGA_NOM] - tp[P_OMEGA_MIN])
    v1 = frac * (tp[P_V_NOM] - tp[P_V_CUT_IN]) + tp[P_V_CUT_IN]
    lam = tp[P_RADIUS] * om / v1
    r = tp[P_RADIUS]
    return 0.5 * math.pi * tp[P_RHO] * r * r * _cp(lam, 0.0, tp) * v1 * v1 * v1


@njit(cache=True, nogil=True)
def _mode2_power_ref(omega, tp):
    return omega / tp[P_OMEGA_NOM] * tp[P_P_NOM]


@njit(cache=True, nogil=True)
def _pitch_rate(theta, omega, tp):
    if theta <= 0.0 and omega <= tp[P_OMEGA_NOM]:
        return 0.0
    if theta >= tp[P_THETA_MAX] and omega >= tp[P_OMEGA_NOM]:
        return 0.0
    rate = tp[P_K2] * (omega - tp[P_OMEGA_NOM])
    return min(tp[P_RATE_MAX], max(tp[P_RATE_MIN], rate))


@njit(cache=True, nogil=True)
def _drivetrain_step(omega, theta, p_m, p_g, dt, tp):
    omega_new = omega + dt * (p_m - p_g) / (tp[P_INERTIA] * omega)
    theta_new = theta + dt * _pitch_rate(theta, omega, tp)
    theta_new = min(max(theta_new, 0.0), tp[P_THETA_MAX])
    return omega_new, theta_new


def tip_speed_ratio(omega: float, v: float, params: TurbineParams) -> float:
    """lambda = R * omega / v; undefined for v <= 0."""
    if not v > 0:
        raise ValueError(f"tip-speed ratio undefined for v={v}")
    return params.radius * omega / v


def cp(lam: float, theta: float, params: TurbineParams) -> float:
    """Power coefficient in [0, 16/27] at tip-speed ratio lam, pitch theta (rad)."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if not 0 <= theta <= params.theta_max:
        raise ValueError(f"theta={theta} outside [0, {params.theta_max}]")
    return _cp(lam, theta, params.packed)


def aero_power(v: float, omega: float, theta: float, params: TurbineParams) -> float:
    """Mechanical power captured from the wind, W."""
    if v < 0:
        raise ValueError(f"v must be >= 0, got {v}")
    return _aero_power(v, omega, theta, params.packed)


def calibrate_cp(params: TurbineParams) -> float:
    """cp_scale such that rated wind at nominal rotor speed yields p_nom.

    Raises CalibrationError if the required power coefficient exceeds the
    Betz limit or the uncalibrated surface is non-positive at the rated point.
    """
    r = params.radius
    cp_needed = params.p_nom / (0.5 * math.pi * params.rho * r * r * params.v_nom**3)
    if cp_needed > BETZ_LIMIT:
        raise CalibrationError(
            f"rated point needs Cp={cp_needed:.4f} beyond the Betz limit {BETZ_LIMIT:.4f}"
        )
    base = replace(params, cp_scale=1.0)
    lam_nom = params.radius * params.omega_nom / params.v_nom
    cp_raw = _cp(lam_nom, 0.0, base.packed)
    if cp_raw <= 0:
        raise CalibrationError(f"uncalibrated Cp at the rated point is {cp_raw}")
    return cp_needed / cp_raw


def calibrated(params: TurbineParams) -> TurbineParams:
    """Copy of params with cp_scale set by calibrate_cp."""
    return replace(params, cp_scale=calibrate_cp(params))


def default_turbine_params() -> TurbineParams:
    return calibrated(TurbineParams())


def mode1_power_ref(omega: float, params: TurbineParams) -> float:
    """Partial-load generator power reference, W.

    The reference maps omega linearly onto a wind speed between cut-in and
    rated and returns the aerodynamic power at that point; omega is clamped to
    [omega_min, omega_nom].
    """
    return _mode1_power_ref(omega, params.packed)


def mode2_power_ref(omega: float, params: TurbineParams) -> float:
    """Full-load generator power reference, W: p_nom scaled by omega/omega_nom."""
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    return _mode2_power_ref(omega, params.packed)


def pitch_rate(theta: float, omega: float, params: TurbineParams) -> float:
    """Saturated proportional pitch rate, rad/s; zero at the two hold boundaries."""
    if not 0 <= theta <= params.theta_max:
        raise ValueError(f"theta={theta} outside [0, {params.theta_max}]")
    return _pitch_rate(theta, omega, params.packed)


def drivetrain_step(
    state: MechState, p_m: float, p_g: float, dt: float, params: TurbineParams
) -> MechState:
    """Explicit-Euler update of rotor speed and pitch over dt seconds."""
    if state.omega < 0.5 * params.omega_min:
        raise IntegrationDomainError(
            f"omega={state.omega} below half of omega_min; mode machine should have stopped"
        )
    omega, theta = _drivetrain_step(state.omega, state.theta, p_m, p_g, dt, params.packed)
    return MechState(omega=omega, theta=theta)


def grid_power(p_g: float, params: TurbineParams) -> float:
    """Active power injected into the grid, W."""
    if p_g < 0:
        raise ValueError(f"p_g must be >= 0, got {p_g}")
    return params.eta * p_g


def export_cp_surface_csv(path, params: TurbineParams, n_lambda=151, n_theta=31) -> None:
    """Tabulate the calibrated Cp surface as CSV: lambda, theta_deg, cp."""
    lams = np.linspace(0.0, 15.0, n_lambda)
    thetas = np.linspace(0.0, params.theta_max, n_theta)
    tp = params.packed
    with open(path, "w", newline="") as fh:
        fh.write("lambda,theta_deg,cp\n")
        for lam in lams:
            for th in thetas:
                fh.write(f"{float(lam)!r},{float(th / DEG_TO_RAD)!r},{_cp(lam, th, tp)!r}\n")
