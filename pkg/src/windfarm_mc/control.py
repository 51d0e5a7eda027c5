"""Three-mode supervisory control of one turbine.

Mode NO_LOAD: stopped, no power, mechanical state not integrated.
Mode PARTIAL_LOAD: rotor-speed control through the partial-load power reference.
Mode FULL_LOAD: rated-power tracking with the pitch controller active.

Guards act on moving averages of the sampled wind over the last 5 s and 60 s;
a high-wind trip latches until the 60 s average falls below the restart speed.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from .turbine import (
    MechState,
    TurbineParams,
    aero_power,
    drivetrain_step,
    grid_power,
    mode1_power_ref,
    mode2_power_ref,
)

WINDOW_SHORT_S = 5.0
WINDOW_LONG_S = 60.0

# Hysteresis factor on the rotor-speed exit guards.
SPEED_GUARD_FRACTION = 0.95


class Mode(IntEnum):
    NO_LOAD = 0
    PARTIAL_LOAD = 1
    FULL_LOAD = 2


class MovingAverages:
    """Ring buffers of the sampled wind over the short and long windows."""

    def __init__(self, dt: float, prefill: float = 0.0):
        if not dt > 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        self.dt = dt
        n_short = max(1, math.ceil(WINDOW_SHORT_S / dt))
        n_long = max(1, math.ceil(WINDOW_LONG_S / dt))
        self._short = deque([prefill] * n_short, maxlen=n_short)
        self._long = deque([prefill] * n_long, maxlen=n_long)
        self._sum_short = prefill * n_short
        self._sum_long = prefill * n_long

    def update(self, v: float) -> None:
        self._sum_short += v - self._short[0]
        self._short.append(v)
        self._sum_long += v - self._long[0]
        self._long.append(v)

    @property
    def mean5(self) -> float:
        return self._sum_short / len(self._short)

    @property
    def mean60(self) -> float:
        return self._sum_long / len(self._long)


def cutoff_condition(mean5: float, mean60: float, params: TurbineParams) -> bool:
    """High-wind trip: short average above the fast limit or long average above the slow limit."""
    return mean5 > params.v5_cutoff or mean60 > params.v60_cutoff


def startup_condition(
    mean5: float, mean60: float, latch: bool, params: TurbineParams
) -> bool:
    """Normal-functioning window, with restart hysteresis after a high-wind trip."""
    return (
        mean60 >= params.v_cut_in
        and mean5 <= params.v5_cutoff
        and mean60 <= params.v60_cutoff
        and (not latch or mean60 <= params.v_restart)
    )


@dataclass
class HybridState:
    mode: Mode
    mech: Optional[MechState]
    avgs: MovingAverages
    cutoff_latch: bool = False

    @classmethod
    def initial(cls, dt: float, v0: float) -> "HybridState":
        """Stopped turbine with averaging buffers prefilled at the first wind sample."""
        return cls(mode=Mode.NO_LOAD, mech=None, avgs=MovingAverages(dt, prefill=v0))


def transition(state: HybridState, params: TurbineParams) -> HybridState:
    """Apply at most one discrete transition; cut-off takes priority.

    Mutates and returns state.
    """
    m5, m60 = state.avgs.mean5, state.avgs.mean60
    if state.mode == Mode.NO_LOAD:
        if startup_condition(m5, m60, state.cutoff_latch, params):
            state.mode = Mode.PARTIAL_LOAD
            state.mech = MechState(omega=params.omega_min, theta=0.0)
            state.cutoff_latch = False
    elif state.mode == Mode.PARTIAL_LOAD:
        if cutoff_condition(m5, m60, params):
            state.mode = Mode.NO_LOAD
            state.mech = None
            state.cutoff_latch = True
        elif state.mech.omega < SPEED_GUARD_FRACTION * params.omega_min:
            # Low-wind stall exit; not a high-wind trip, so no latch.
            state.mode = Mode.NO_LOAD
            state.mech = None
        elif state.mech.omega > params.omega_nom:
            state.mode = Mode.FULL_LOAD
    else:
        if cutoff_condition(m5, m60, params):
            state.mode = Mode.NO_LOAD
            state.mech = None
            state.cutoff_latch = True
        elif state.mech.omega < SPEED_GUARD_FRACTION * params.omega_nom:
            state.mode = Mode.PARTIAL_LOAD
    return state


def step(
    state: HybridState,
    v: float,
    dt: float,
    params: TurbineParams,
    substeps: int = 1,
) -> tuple[HybridState, float]:
    """One control tick: update averages, transition, integrate, return grid power.

    The wind sample v is held constant over the tick; the drive train and pitch
    are advanced in `substeps` Euler steps of dt/substeps because their
    timescales are shorter than the wind sampling interval.  The returned power
    is the tick average of the generator reference times the grid efficiency.
    """
    state.avgs.update(v)
    state = transition(state, params)
    if state.mode == Mode.NO_LOAD:
        return state, 0.0
    h = dt / substeps
    mech = state.mech
    p_g_sum = 0.0
    for _ in range(substeps):
        if state.mode == Mode.PARTIAL_LOAD:
            p_g = mode1_power_ref(mech.omega, params)
        else:
            p_g = mode2_power_ref(mech.omega, params)
        p_m = aero_power(v, mech.omega, mech.theta, params)
        mech = drivetrain_step(mech, p_m, p_g, h, params)
        p_g_sum += p_g
    state.mech = mech
    return state, grid_power(p_g_sum / substeps, params)
