import numpy as np
import pytest

from windfarm_mc.engine import SimConfig
from windfarm_mc.turbine import default_turbine_params
from windfarm_mc.wind import SlowWindSeries, WindModelParams


@pytest.fixture(scope="session")
def params():
    return default_turbine_params()


@pytest.fixture
def make_constant_wind_config(params):
    """Config factory for constant-wind runs (no turbulence, flat slow series)."""

    def _make(v, duration_s=2 * 3600.0, dt=1.0, seed=1, **kwargs):
        wind = WindModelParams(kappa=0.0, target_annual_mean=v)
        config = SimConfig(
            duration_s=duration_s,
            dt=dt,
            seed=seed,
            wind=wind,
            turbine=params,
            warmup_s=kwargs.pop("warmup_s", 3600.0),
            record_stride=kwargs.pop("record_stride", 1),
            **kwargs,
        )
        n_hours = int(np.ceil(duration_s / 3600.0)) + 1
        slow = SlowWindSeries(hourly_means=np.full(n_hours + 1, float(v)))
        return config, slow

    return _make
