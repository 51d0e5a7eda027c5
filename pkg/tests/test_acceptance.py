"""Acceptance suite: one test per release criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
The monthly campaigns use desk-scale durations (720 h) with three independent
seeds; tolerances are fixed here, not tuned at run time.
"""

import copy
import filecmp
import math
import time

import numpy as np
import pytest

from windfarm_mc import _kernels
from windfarm_mc.cli import main as cli_main
from windfarm_mc.control import HybridState, Mode, step
from windfarm_mc.engine import SimConfig, run_campaign, simulate_farm, simulate_turbine
from windfarm_mc.power_curve import build_curve, equilibrium_power
from windfarm_mc.stats import ecdf, evaluate, ks_distance
from windfarm_mc.turbine import BETZ_LIMIT, cp
from windfarm_mc.wind import SlowWindSeries, WindModelParams

MONTH_S = 720 * 3600.0
SEEDS = (11, 22, 33)
RATED_OUT_W = 1.827e6


def _report(criterion, passed, detail):
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    assert passed, f"{criterion}: {detail}"


def month_config(params, mean, seed, **kwargs):
    return SimConfig(
        duration_s=MONTH_S,
        dt=kwargs.pop("dt", 1.0),
        seed=seed,
        wind=WindModelParams(target_annual_mean=mean),
        turbine=params,
        **kwargs,
    )


@pytest.fixture(scope="module")
def curve(params):
    return build_curve(params)


@pytest.fixture(scope="module")
def monthly_campaigns(params, curve):
    """Paired single-turbine month runs for each (annual mean, seed)."""
    out = {}
    for mean in (5.46, 10.0):
        for seed in SEEDS:
            cfg = month_config(params, mean, seed)
            out[(mean, seed)] = run_campaign(cfg, curve=curve)
    return out


def test_criterion_1_nominal_point_anchor(params):
    """Calibrated steady-state output at rated wind speed."""
    t0 = time.perf_counter()
    p_out = equilibrium_power(14.0, params)
    elapsed = time.perf_counter() - t0
    ok = abs(p_out - RATED_OUT_W) <= 0.01 * RATED_OUT_W and elapsed < 1.0
    _report(
        "criterion 1 (nominal point)",
        ok,
        f"equilibrium_power(14) = {p_out / 1e6:.4f} MW vs 1.827 MW +-1%, {elapsed * 1e3:.1f} ms",
    )


def test_criterion_2_cutoff_anchors(params):
    """Trip timing at 26 and 21 m/s; restart hysteresis at 19.5 and 18 m/s."""
    base = HybridState.initial(1.0, 15.0)
    for _ in range(400):
        base, _ = step(base, 15.0, 1.0, params, substeps=20)
    assert base.mode == Mode.FULL_LOAD

    def ticks_to_stop(v, limit):
        state = copy.deepcopy(base)
        for k in range(1, limit + 1):
            state, _ = step(state, v, 1.0, params, substeps=20)
            if state.mode == Mode.NO_LOAD:
                return k, state
        return None, state

    t26, tripped = ticks_to_stop(26.0, 10)
    t21, tripped21 = ticks_to_stop(21.0, 100)

    # Let the storm fill the averaging windows before the wind settles.
    for _ in range(120):
        tripped, _ = step(tripped, 26.0, 1.0, params, substeps=20)
    assert tripped.mode == Mode.NO_LOAD

    stays_down = True
    s195 = copy.deepcopy(tripped)
    for _ in range(600):
        s195, p = step(s195, 19.5, 1.0, params, substeps=20)
        stays_down = stays_down and s195.mode == Mode.NO_LOAD and p == 0.0

    restarts = False
    s18 = copy.deepcopy(tripped)
    for _ in range(600):
        s18, _ = step(s18, 18.0, 1.0, params, substeps=20)
        if s18.mode != Mode.NO_LOAD:
            restarts = True
            break

    ok = (
        t26 is not None
        and t26 <= 5
        and t21 is not None
        and t21 <= 60
        and tripped.cutoff_latch
        and tripped21.cutoff_latch
        and stays_down
        and restarts
    )
    _report(
        "criterion 2 (cut-off anchors)",
        ok,
        f"26 m/s trip at {t26} s (<=5), 21 m/s at {t21} s (<=60), "
        f"19.5 m/s stays stopped: {stays_down}, 18 m/s restarts: {restarts}",
    )


def test_criterion_3_ou_statistics():
    """Turbulence std and lag-T autocorrelation at a fixed 10 m/s mean."""
    n = 2_000_000
    dt, vbar, length_scale, kappa = 1.0, 10.0, 300.0, 0.15
    hourly = np.full(int(n * dt / 3600.0) + 2, vbar)
    rng = np.random.default_rng(314)
    rec_t = np.empty(n)
    rec_v = np.empty(n)
    wstate = np.zeros(1)
    status = _kernels.run_wind_chunk(
        0, n, dt, hourly, rng.standard_normal(n), length_scale, kappa, wstate, 1, rec_t, rec_v
    )
    assert status == -1
    w = rec_v - vbar
    w = w[10_000:]  # discard spin-up
    std = w.std()
    lag = int(round(length_scale / vbar / dt))  # one correlation time = 30 s
    autocorr = np.corrcoef(w[:-lag], w[lag:])[0, 1]
    ok = abs(std - 1.5) <= 0.02 * 1.5 and abs(autocorr - math.exp(-1)) <= 0.05
    _report(
        "criterion 3 (OU statistics)",
        ok,
        f"std = {std:.4f} vs 1.5 +-2%, lag-{lag}s autocorr = {autocorr:.4f} vs e^-1 +-0.05 "
        f"over {w.size} steps",
    )


def test_criterion_4_dynamic_static_consistency(params):
    """Long-run dynamic output equals the steady-state curve under constant wind."""
    worst = 0.0
    details = []
    for v in (5.0, 8.0, 11.0, 14.0, 17.0):
        wind = WindModelParams(kappa=0.0, target_annual_mean=v)
        cfg = SimConfig(
            duration_s=3 * 3600.0, dt=1.0, seed=1, wind=wind, turbine=params,
            warmup_s=3600.0, record_stride=1,
        )
        slow = SlowWindSeries(hourly_means=np.full(5, v))
        trace = simulate_turbine(cfg, slow=slow)
        dyn = trace.warm_samples(cfg.warmup_s).mean()
        eq = equilibrium_power(v, params)
        rel = abs(dyn - eq) / eq
        worst = max(worst, rel)
        details.append(f"v={v}: {rel * 100:.3f}%")
    ok = worst <= 0.01
    _report(
        "criterion 4 (dynamic/static consistency)",
        ok,
        f"max deviation {worst * 100:.3f}% (<=1%); " + ", ".join(details),
    )


def test_criterion_5_low_mean_distributions_agree(monthly_campaigns):
    """One month at 5.46 m/s annual mean: pooled-seed KS distance at most 0.05."""
    dyn = np.concatenate([monthly_campaigns[(5.46, s)].dynamic.samples for s in SEEDS])
    sta = np.concatenate([monthly_campaigns[(5.46, s)].static.samples for s in SEEDS])
    ks = ks_distance(ecdf(dyn), ecdf(sta))
    ok = ks <= 0.05
    _report(
        "criterion 5 (5.46 m/s distribution match)",
        ok,
        f"pooled KS = {ks:.4f} (<= 0.05) over {dyn.size} samples, 3 seeds",
    )


def test_criterion_6_high_mean_behaviour(monthly_campaigns):
    """10 m/s mean: near-zero idle probability, larger dynamic/static gap than 5.46."""
    dyn10 = np.concatenate([monthly_campaigns[(10.0, s)].dynamic.samples for s in SEEDS])
    p_zero = float(np.mean(dyn10 < 1.0))
    wins = sum(
        1
        for s in SEEDS
        if monthly_campaigns[(10.0, s)].ks >= monthly_campaigns[(5.46, s)].ks
    )
    ok = p_zero < 0.01 and wins >= 2
    per_seed = ", ".join(
        f"seed {s}: {monthly_campaigns[(10.0, s)].ks:.4f} vs {monthly_campaigns[(5.46, s)].ks:.4f}"
        for s in SEEDS
    )
    _report(
        "criterion 6 (10 m/s behaviour)",
        ok,
        f"P(P_out < 1 W) = {p_zero:.5f} (< 0.01); KS(10) >= KS(5.46) in {wins}/3 seeds ({per_seed})",
    )


def test_criterion_7_farm_smoothing(params):
    """Ten-turbine farm output, normalized per turbine, varies no more than one turbine's."""
    cfg1 = month_config(params, 10.0, 7)
    cfg10 = month_config(params, 10.0, 7, n_turbines=10, n_workers=4)
    s1 = simulate_turbine(cfg1).warm_samples(cfg1.warmup_s)
    s10 = simulate_farm(cfg10).warm_samples(cfg10.warmup_s)
    ok = s10.std() <= s1.std()
    _report(
        "criterion 7 (farm smoothing)",
        ok,
        f"normalized farm std = {s10.std() / 1e3:.1f} kW <= single-turbine std = {s1.std() / 1e3:.1f} kW",
    )


def test_criterion_8a_dt_refinement(params):
    """Halving the tick length moves the monthly mean power by less than 1%."""
    means = {}
    for dt in (1.0, 0.5):
        cfg = month_config(params, 10.0, 5, dt=dt)
        means[dt] = simulate_turbine(cfg).warm_samples(cfg.warmup_s).mean()
    rel = abs(means[1.0] - means[0.5]) / means[0.5]
    ok = rel < 0.01
    _report(
        "criterion 8a (dt refinement)",
        ok,
        f"monthly mean power changes {rel * 100:.3f}% for dt 1 s -> 0.5 s (< 1%)",
    )


def test_criterion_8b_drivetrain_local_error(params):
    """One Euler step agrees with a fine-step oracle at second order."""
    from windfarm_mc.turbine import MechState, aero_power, drivetrain_step, mode1_power_ref

    def rhs(omega):
        return (aero_power(10.0, omega, 0.0, params) - mode1_power_ref(omega, params)) / (
            params.inertia * omega
        )

    def fine(omega0, h, n):
        om = omega0
        for _ in range(n):
            om += (h / n) * rhs(om)
        return om

    omega0 = 1.3
    errs = []
    for h in (0.8, 0.4):
        coarse = drivetrain_step(
            MechState(omega=omega0, theta=0.0),
            aero_power(10.0, omega0, 0.0, params),
            mode1_power_ref(omega0, params),
            h,
            params,
        ).omega
        errs.append(abs(coarse - fine(omega0, h, 1024)))
    ratio = errs[0] / errs[1]
    ok = 2.5 <= ratio <= 6.0
    _report(
        "criterion 8b (drive-train local error)",
        ok,
        f"error ratio when halving dt = {ratio:.2f} (~4 expected for O(dt^2))",
    )


def test_criterion_8c_betz_bound(params):
    """Power coefficient stays within the physical bound on a dense grid."""
    lams = np.linspace(0.0, 15.0, 150)
    thetas = np.linspace(0.0, params.theta_max, 30)
    values = np.array([cp(l, t, params) for l in lams for t in thetas])
    ok = values.min() >= 0.0 and values.max() <= BETZ_LIMIT
    _report(
        "criterion 8c (Betz bound)",
        ok,
        f"Cp in [{values.min():.4f}, {values.max():.4f}] on a 150x30 grid (limit {BETZ_LIMIT:.4f})",
    )


def test_criterion_8d_ecdf_oracle():
    """Empirical CDF evaluation matches a brute-force count at 100 query points."""
    rng = np.random.default_rng(17)
    samples = rng.normal(1e6, 4e5, 1000)
    dist = ecdf(samples)
    queries = rng.uniform(samples.min() - 1e5, samples.max() + 1e5, 100)
    max_err = max(
        abs(evaluate(dist, float(x)) - np.sum(samples <= x) / samples.size) for x in queries
    )
    ok = max_err < 1e-12
    _report("criterion 8d (ECDF oracle)", ok, f"max |F - brute force| = {max_err:.2e}")


def test_criterion_9_byte_identical_outputs(tmp_path):
    """Repeated compare runs are byte-identical, with the worker count varied."""
    outs = []
    for name, workers in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / name
        code = cli_main(
            [
                "compare", "--out-dir", str(out), "--duration-hours", "4",
                "--seed", "99", "--turbines", "2", "--mean", "10",
                "--workers", workers,
            ]
        )
        assert code == 0
        outs.append(out)
    names = ("cdf_dynamic.csv", "cdf_static.csv", "joint_hist.csv", "summary.txt")
    same = all(
        filecmp.cmp(outs[0] / n, other / n, shallow=False) for other in outs[1:] for n in names
    )
    _report(
        "criterion 9 (determinism)",
        same,
        f"{len(names)} artifacts byte-identical across reruns and worker counts 1 vs 4",
    )
