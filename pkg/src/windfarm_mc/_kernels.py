"""Fused per-tick simulation kernels.

These mirror, operation for operation, the reference implementations in
`wind.ou_step`, `control.MovingAverages`, `control.transition` and
`control.step`; an equality test keeps the two paths in sync.  State is packed
in small float64 arrays so year-long campaigns run at numba speed.
"""

from __future__ import annotations

import math

from numba import njit

from .control import SPEED_GUARD_FRACTION
from .turbine import (
    P_ETA,
    P_OMEGA_MIN,
    P_OMEGA_NOM,
    P_V5_CUTOFF,
    P_V60_CUTOFF,
    P_V_CUT_IN,
    P_V_RESTART,
    _aero_power,
    _drivetrain_step,
    _mode1_power_ref,
    _mode2_power_ref,
)
from .wind import VBAR_FLOOR

# State-vector slots shared between the engine and the kernels.
(
    S_W,
    S_MODE,
    S_OMEGA,
    S_THETA,
    S_LATCH,
    S_SUM5,
    S_IDX5,
    S_SUM60,
    S_IDX60,
    S_ERRCODE,
) = range(10)
STATE_SIZE = 10

ERR_NONFINITE = 1.0
ERR_DT_UNSTABLE = 2.0
ERR_DOMAIN = 3.0

SECONDS_PER_HOUR = 3600.0


@njit(cache=True, nogil=True)
def _interp_hourly(hourly, t):
    x = t / SECONDS_PER_HOUR
    k = int(x)
    last = hourly.shape[0] - 2
    if k > last:
        k = last
    frac = x - k
    return hourly[k] + (hourly[k + 1] - hourly[k]) * frac


@njit(cache=True, nogil=True)
def _ou_update(w, vbar, dt, xi, length_scale, kappa):
    T = length_scale / max(vbar, VBAR_FLOOR)
    return w - (w / T) * dt + kappa * vbar * math.sqrt(2.0 / T) * math.sqrt(dt) * xi


@njit(cache=True, nogil=True)
def run_dynamic_chunk(
    start_tick,
    n_ticks,
    dt,
    n_sub,
    hourly,
    xi,
    tp,
    length_scale,
    kappa,
    state,
    buf5,
    buf60,
    stride,
    rec_t,
    rec_v,
    rec_p,
    rec_mode,
    rec_omega,
    rec_theta,
):
    """Advance one turbine n_ticks; returns -1 or the global tick of failure."""
    w = state[S_W]
    mode = int(state[S_MODE])
    omega = state[S_OMEGA]
    theta = state[S_THETA]
    latch = state[S_LATCH]
    sum5 = state[S_SUM5]
    idx5 = int(state[S_IDX5])
    sum60 = state[S_SUM60]
    idx60 = int(state[S_IDX60])
    n5 = buf5.shape[0]
    n60 = buf60.shape[0]
    h = dt / n_sub

    for i in range(n_ticks):
        gi = start_tick + i
        t = gi * dt

        # Wind sample for this tick.
        vbar = _interp_hourly(hourly, t)
        T = length_scale / max(vbar, VBAR_FLOOR)
        if dt >= T / 2.0:
            state[S_ERRCODE] = ERR_DT_UNSTABLE
            return gi
        w = _ou_update(w, vbar, dt, xi[i], length_scale, kappa)
        v = max(vbar + w, 0.0)

        # Moving averages over the short and long windows.
        sum5 += v - buf5[idx5]
        buf5[idx5] = v
        idx5 = (idx5 + 1) % n5
        sum60 += v - buf60[idx60]
        buf60[idx60] = v
        idx60 = (idx60 + 1) % n60
        m5 = sum5 / n5
        m60 = sum60 / n60

        # At most one discrete transition; cut-off first.
        cut = m5 > tp[P_V5_CUTOFF] or m60 > tp[P_V60_CUTOFF]
        if mode == 0:
            if (
                m60 >= tp[P_V_CUT_IN]
                and m5 <= tp[P_V5_CUTOFF]
                and m60 <= tp[P_V60_CUTOFF]
                and (latch == 0.0 or m60 <= tp[P_V_RESTART])
            ):
                mode = 1
                omega = tp[P_OMEGA_MIN]
                theta = 0.0
                latch = 0.0
        elif mode == 1:
            if cut:
                mode = 0
                latch = 1.0
            elif omega < SPEED_GUARD_FRACTION * tp[P_OMEGA_MIN]:
                mode = 0
            elif omega > tp[P_OMEGA_NOM]:
                mode = 2
        else:
            if cut:
                mode = 0
                latch = 1.0
            elif omega < SPEED_GUARD_FRACTION * tp[P_OMEGA_NOM]:
                mode = 1

        # Continuous update within the tick.
        if mode == 0:
            p_out = 0.0
        else:
            p_g_sum = 0.0
            for _ in range(n_sub):
                if mode == 1:
                    p_g = _mode1_power_ref(omega, tp)
                else:
                    p_g = _mode2_power_ref(omega, tp)
                p_m = _aero_power(v, omega, theta, tp)
                if omega < 0.5 * tp[P_OMEGA_MIN]:
                    state[S_ERRCODE] = ERR_DOMAIN
                    state[S_MODE] = mode
                    state[S_OMEGA] = omega
                    return gi
                omega, theta = _drivetrain_step(omega, theta, p_m, p_g, h, tp)
                p_g_sum += p_g
            p_out = tp[P_ETA] * (p_g_sum / n_sub)
            if not math.isfinite(omega):
                state[S_ERRCODE] = ERR_NONFINITE
                state[S_MODE] = mode
                state[S_OMEGA] = omega
                return gi
        if not math.isfinite(w):
            state[S_ERRCODE] = ERR_NONFINITE
            state[S_MODE] = mode
            state[S_OMEGA] = omega
            return gi

        if gi % stride == 0:
            k = gi // stride
            rec_t[k] = t
            rec_v[k] = v
            rec_p[k] = p_out
            rec_mode[k] = mode
            if mode == 0:
                rec_omega[k] = math.nan
                rec_theta[k] = math.nan
            else:
                rec_omega[k] = omega
                rec_theta[k] = theta

    state[S_W] = w
    state[S_MODE] = mode
    state[S_OMEGA] = omega
    state[S_THETA] = theta
    state[S_LATCH] = latch
    state[S_SUM5] = sum5
    state[S_IDX5] = idx5
    state[S_SUM60] = sum60
    state[S_IDX60] = idx60
    return -1


@njit(cache=True, nogil=True)
def run_wind_chunk(
    start_tick,
    n_ticks,
    dt,
    hourly,
    xi,
    length_scale,
    kappa,
    wstate,
    stride,
    rec_t,
    rec_v,
):
    """Wind-only pipeline (for the static model); same draws as the dynamic run."""
    w = wstate[0]
    for i in range(n_ticks):
        gi = start_tick + i
        t = gi * dt
        vbar = _interp_hourly(hourly, t)
        T = length_scale / max(vbar, VBAR_FLOOR)
        if dt >= T / 2.0:
            return gi
        w = _ou_update(w, vbar, dt, xi[i], length_scale, kappa)
        v = max(vbar + w, 0.0)
        if not math.isfinite(w):
            return gi
        if gi % stride == 0:
            k = gi // stride
            rec_t[k] = t
            rec_v[k] = v
    wstate[0] = w
    return -1
