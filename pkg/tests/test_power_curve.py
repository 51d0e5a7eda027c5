import numpy as np
import pytest

from windfarm_mc.errors import ModelInconsistencyError
from windfarm_mc.power_curve import (
    PowerCurve,
    _mode1_equilibrium,
    build_curve,
    equilibrium_power,
    static_power,
    static_power_array,
)
from windfarm_mc.turbine import _aero_power, _mode1_power_ref


@pytest.fixture(scope="module")
def curve(params):
    return build_curve(params, v_step=0.5)


def test_zero_below_cut_in(params):
    assert equilibrium_power(3.4, params) == 0.0
    assert equilibrium_power(0.0, params) == 0.0


def test_rated_point(params):
    assert equilibrium_power(14.0, params) == pytest.approx(1.827e6, rel=0.01)


def test_zero_above_static_cutout(params):
    assert equilibrium_power(21.0, params) == 0.0
    # configurable cut-out keeps the fast threshold available
    assert equilibrium_power(21.0, params, cutout=25.0) == pytest.approx(1.827e6, rel=1e-3)


def test_full_load_band_is_rated(params):
    for v in (14.5, 17.0, 20.0):
        assert equilibrium_power(v, params) == pytest.approx(1.827e6, rel=1e-6)


def test_equilibrium_residual_below_tolerance(params):
    tp = params.packed
    for v in np.linspace(3.6, 13.9, 25):
        omega = _mode1_equilibrium(v, params)
        residual = abs(_aero_power(v, omega, 0.0, tp) - _mode1_power_ref(omega, tp))
        assert residual < 1e-6 * params.p_nom


def test_equilibrium_not_bracketed_below_cut_in(params):
    with pytest.raises(ModelInconsistencyError):
        _mode1_equilibrium(3.0, params)


def test_build_curve_grid(curve):
    assert curve.v_grid.size == 55
    assert curve.v_grid[0] == 0.0
    assert curve.v_grid[-1] == pytest.approx(27.0)


def test_curve_invariants(curve, params):
    assert np.all(np.diff(curve.v_grid) > 0)
    rated = params.eta * params.p_nom
    assert np.all(curve.p_values <= rated * 1.001)
    assert np.all(curve.p_values >= 0)
    below = curve.v_grid < params.v_cut_in
    above = curve.v_grid > curve.v_cut_out
    assert np.all(curve.p_values[below] == 0)
    assert np.all(curve.p_values[above] == 0)
    band = (curve.v_grid >= params.v_cut_in) & (curve.v_grid <= params.v_nom)
    assert np.all(np.diff(curve.p_values[band]) >= -1e-9)


def test_static_power_node_lookup(curve):
    k = 20
    assert static_power(float(curve.v_grid[k]), curve) == curve.p_values[k]


def test_static_power_outside_band(curve):
    assert static_power(40.0, curve) == 0.0
    assert static_power(1.0, curve) == 0.0
    assert static_power(curve.v_cut_out + 0.01, curve) == 0.0


def test_static_power_midpoint_average(curve):
    v = 0.5 * (curve.v_grid[16] + curve.v_grid[17])
    expected = 0.5 * (curve.p_values[16] + curve.p_values[17])
    assert static_power(float(v), curve) == pytest.approx(expected)


def test_static_power_array_matches_scalar(curve):
    rng = np.random.default_rng(12)
    vs = rng.uniform(0.0, 30.0, 200)
    arr = static_power_array(vs, curve)
    for v, p in zip(vs, arr):
        assert p == pytest.approx(static_power(float(v), curve))


def test_grid_refinement_stable(params):
    """Refining the tabulation grid barely moves the mean static power."""
    rng = np.random.default_rng(3)
    winds = np.abs(rng.normal(10.0, 2.1, 20000))
    coarse = build_curve(params, v_step=0.5)
    fine = build_curve(params, v_step=0.1)
    mean_coarse = static_power_array(winds, coarse).mean()
    mean_fine = static_power_array(winds, fine).mean()
    assert abs(mean_coarse - mean_fine) / mean_fine < 0.005


def test_static_samples_sit_on_the_curve(curve):
    """Joint histogram of static-model samples only fills cells near the curve."""
    from windfarm_mc.stats import joint_hist

    rng = np.random.default_rng(8)
    v = rng.uniform(0.0, 27.0, 5000)
    p = static_power_array(v, curve)
    v_edges = np.arange(0.0, 30.5, 0.5)
    p_edges = np.arange(0.0, 2.05e6, 5e4)
    h = joint_hist(v, p, v_edges, p_edges)
    p_bin = p_edges[1] - p_edges[0]
    for i in range(v_edges.size - 1):
        occupied = np.flatnonzero(h.counts[i])
        if occupied.size == 0:
            continue
        centre = 0.5 * (v_edges[i] + v_edges[i + 1])
        expected = static_power(float(centre), curve)
        for j in occupied:
            mid = 0.5 * (p_edges[j] + p_edges[j + 1])
            assert abs(mid - expected) <= 1.5 * p_bin + abs(
                static_power(float(v_edges[i]), curve)
                - static_power(float(v_edges[i + 1]), curve)
            )


def test_power_curve_validation():
    with pytest.raises(ValueError):
        PowerCurve(v_grid=np.array([1.0, 1.0]), p_values=np.array([0.0, 0.0]),
                   v_cut_in=3.5, v_cut_out=20.0)
    with pytest.raises(ValueError):
        PowerCurve(v_grid=np.array([1.0, 2.0]), p_values=np.array([0.0, -1.0]),
                   v_cut_in=3.5, v_cut_out=20.0)
