"""Monte-Carlo simulation of wind farm power output.

A two-timescale synthetic wind process (hourly ARMA means plus
Ornstein-Uhlenbeck turbulence) drives a three-mode model of a variable-speed
pitch-controlled turbine; annual output distributions are compared against the
turbine's steady-state power curve.
"""

from .control import HybridState, Mode, MovingAverages, step
from .engine import (
    CampaignResult,
    PowerTrace,
    SimConfig,
    run_campaign,
    simulate_farm,
    simulate_static,
    simulate_turbine,
    substream,
)
from .power_curve import PowerCurve, build_curve, equilibrium_power, static_power
from .stats import EmpiricalDistribution, JointHistogram, ecdf, evaluate, joint_hist, ks_distance
from .turbine import MechState, TurbineParams, calibrate_cp, calibrated, default_turbine_params
from .wind import ArmaParams, SlowWindSeries, TurbulenceState, WindModelParams

__version__ = "0.1.0"

__all__ = [
    "ArmaParams",
    "CampaignResult",
    "EmpiricalDistribution",
    "HybridState",
    "JointHistogram",
    "MechState",
    "Mode",
    "MovingAverages",
    "PowerCurve",
    "PowerTrace",
    "SimConfig",
    "SlowWindSeries",
    "TurbineParams",
    "TurbulenceState",
    "WindModelParams",
    "build_curve",
    "calibrate_cp",
    "calibrated",
    "default_turbine_params",
    "ecdf",
    "equilibrium_power",
    "evaluate",
    "joint_hist",
    "ks_distance",
    "run_campaign",
    "simulate_farm",
    "simulate_static",
    "simulate_turbine",
    "static_power",
    "step",
    "substream",
]
