"""Empirical distributions and comparison metrics for simulated power output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Outputs below this are counted as "no production" (floating-noise guard).
ZERO_POWER_THRESHOLD_W = 1.0


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted-sample representation of an empirical CDF."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("need a non-empty 1-D sample array")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")

    @property
    def n(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class JointHistogram:
    """2-D counts of paired (wind, power) samples."""

    v_edges: np.ndarray
    p_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        for name in ("v_edges", "p_edges"):
            e = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, e)
            if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
                raise ValueError(f"{name} must be strictly ascending with >= 2 entries")
        c = np.asarray(self.counts)
        object.__setattr__(self, "counts", c)
        if c.shape != (self.v_edges.size - 1, self.p_edges.size - 1):
            raise ValueError("counts shape does not match the bin edges")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def ecdf(samples) -> EmpiricalDistribution:
    """Build the empirical distribution from raw samples."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    return EmpiricalDistribution(samples=s)


def evaluate(dist: EmpiricalDistribution, x) -> float | np.ndarray:
    """Right-continuous empirical CDF: F(x) = #(samples <= x) / n."""
    idx = np.searchsorted(dist.samples, x, side="right")
    out = idx / dist.n
    return float(out) if np.isscalar(x) else out


def quantile(dist: EmpiricalDistribution, q: float) -> float:
    """Inverse of the empirical CDF (order statistic)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    k = max(0, int(np.ceil(q * dist.n)) - 1)
    return float(dist.samples[min(k, dist.n - 1)])


def ks_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Sup-norm distance between two empirical CDFs over their merged support."""
    support = np.concatenate([a.samples, b.samples])
    fa = np.searchsorted(a.samples, support, side="right") / a.n
    fb = np.searchsorted(b.samples, support, side="right") / b.n
    return float(np.max(np.abs(fa - fb)))


def joint_hist(v_samples, p_samples, v_edges, p_edges) -> JointHistogram:
    """2-D histogram of paired samples; out-of-range pairs land in the boundary bins."""
    v = np.asarray(v_samples, dtype=np.float64)
    p = np.asarray(p_samples, dtype=np.float64)
    if v.shape != p.shape:
        raise ValueError(f"paired samples must match: {v.shape} vs {p.shape}")
    v_edges = np.asarray(v_edges, dtype=np.float64)
    p_edges = np.asarray(p_edges, dtype=np.float64)
    v = np.clip(v, v_edges[0], v_edges[-1])
    p = np.clip(p, p_edges[0], p_edges[-1])
    counts, _, _ = np.histogram2d(v, p, bins=(v_edges, p_edges))
    return JointHistogram(v_edges=v_edges, p_edges=p_edges, counts=counts.astype(np.int64))


def default_bins(params) -> tuple[np.ndarray, np.ndarray]:
    """Presentation binning: 0.5 m/s wind bins over [0, 30], 50 kW power bins."""
    v_edges = np.arange(0.0, 30.0 + 0.5, 0.5)
    p_max = 50e3 * np.ceil(1.2 * params.eta * params.p_nom / 50e3)
    p_edges = np.arange(0.0, p_max + 50e3, 50e3)
    return v_edges, p_edges


def summary(trace, params) -> dict:
    """Headline metrics of a power trace.

    Capacity factor normalizes by the farm's rated grid power; the zero-output
    probability uses ZERO_POWER_THRESHOLD_W on the farm total.
    """
    farm = trace.farm_total
    if farm.size == 0:
        raise ValueError("empty trace")
    n_turbines = trace.power.shape[0]
    rated = n_turbines * params.eta * params.p_nom
    out = {
        "mean_power_w": float(farm.mean()),
        "capacity_factor": float(farm.mean() / rated),
        "p_zero": float(np.mean(farm < ZERO_POWER_THRESHOLD_W)),
        "n_samples": int(farm.size),
    }
    if trace.mode is not None:
        modes = trace.mode
        total = modes.size
        for m, name in ((0, "no_load"), (1, "partial_load"), (2, "full_load")):
            out[f"occupancy_{name}"] = float(np.count_nonzero(modes == m) / total)
    return out


def export_cdf_csv(path, dist: EmpiricalDistribution) -> None:
    """Write the CDF steps as CSV: x_w, F."""
    xs, counts = np.unique(dist.samples, return_counts=True)
    f = np.cumsum(counts) / dist.n
    with open(path, "w", newline="") as fh:
        fh.write("x_w,F\n")
        for x, y in zip(xs, f):
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def export_joint_hist_csv(path, hist: JointHistogram) -> None:
    """Write the joint histogram as CSV: v_lo, v_hi, p_lo, p_hi, count."""
    with open(path, "w", newline="") as fh:
        fh.write("v_lo_mps,v_hi_mps,p_lo_w,p_hi_w,count\n")
        for i in range(hist.v_edges.size - 1):
            for j in range(hist.p_edges.size - 1):
                c = int(hist.counts[i, j])
                if c == 0:
                    continue
                fh.write(
                    f"{float(hist.v_edges[i])!r},{float(hist.v_edges[i + 1])!r},"
                    f"{float(hist.p_edges[j])!r},{float(hist.p_edges[j + 1])!r},{c}\n"
                )
