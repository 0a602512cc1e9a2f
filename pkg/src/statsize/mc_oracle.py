"""Monte Carlo reference for circuit-delay percentiles.

Every edge delay is drawn independently from its continuous truncated
Gaussian (no time grid), then a longest-path pass runs over all samples at
once.  The result is independent of the discretization it is used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ssta_engine import SstaResult, TimingModel
from .stat_dist import percentile


@dataclass
class McResult:
    samples: int
    seed: int
    sorted_delays: np.ndarray

    def percentile(self, p: float) -> float:
        return empirical_percentile(self, p)

    def mean(self) -> float:
        return float(self.sorted_delays.mean())


def _truncated_normal(rng, mean: float, sigma: float, k: float, n: int) -> np.ndarray:
    # rejection sampling; at k = 3 about 0.3% of draws are redrawn
    z = rng.standard_normal(n)
    bad = np.flatnonzero(np.abs(z) > k)
    while bad.size:
        z[bad] = rng.standard_normal(bad.size)
        bad = bad[np.abs(z[bad]) > k]
    return mean + sigma * z


def sample_circuit_delays(model: TimingModel, sizes=None, n: int = 100_000,
                          seed: int = 0) -> McResult:
    """Sample ``n`` circuit delays under independent per-edge variation."""
    if n < 1:
        raise ValueError("n must be at least 1")
    sizes = model.sizes_list(sizes)
    g = model.graph
    vm = model.vm
    rng = np.random.default_rng(seed)
    nominal = [model.nominal_gate_delay(gi, sizes) for gi in range(len(model.cells))]
    # free each arrival array once all its readers are done
    remaining = [len(f) for f in g.fanout]
    arr = [None] * g.n_nodes
    zeros = np.zeros(n)
    for i in g.topo_order():
        if i in model.pi_time:
            arr[i] = np.full(n, model.pi_time[i])
        elif not g.fanin[i]:
            arr[i] = zeros
        else:
            gi = g.driver[i]
            acc = None
            for u in g.fanin[i]:
                a = arr[u]
                if gi >= 0:
                    mu = nominal[gi]
                    a = a + _truncated_normal(rng, mu, vm.sigma_frac * mu, vm.trunc_k, n)
                acc = a.copy() if acc is None else np.maximum(acc, a, out=acc)
                remaining[u] -= 1
                if remaining[u] == 0 and u != i:
                    arr[u] = None
            arr[i] = acc
    delays = np.sort(arr[g.nf])
    return McResult(samples=n, seed=seed, sorted_delays=delays)


def empirical_percentile(result: McResult, p: float) -> float:
    """Nearest-rank order statistic: the ceil(p * n)-th smallest sample."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    n = result.samples
    if n < 1.0 / (1.0 - p) - 1e-9:
        raise ValueError(f"{n} samples are too few for p={p}; need at least {math.ceil(1 / (1 - p))}")
    k = max(1, math.ceil(p * n - 1e-9))
    return float(result.sorted_delays[k - 1])


def dkw_epsilon(n: int, alpha: float = 0.01) -> float:
    """Half-width of the uniform confidence band on the empirical CDF."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def validate_bound(ssta: SstaResult, mc: McResult, p: float = 0.99, alpha: float = 0.01) -> dict:
    """Compare the SSTA p-percentile with Monte Carlo.

    ``band`` is the time interval spanned by the empirical quantiles at
    p -/+ the DKW epsilon, so it is the sampling uncertainty expressed in time.
    """
    t_ssta = percentile(ssta.sink, p)
    t_mc = empirical_percentile(mc, p)
    eps = dkw_epsilon(mc.samples, alpha)
    lo_p, hi_p = max(p - eps, 1e-12), min(p + eps, 1 - 1e-12)
    d = mc.sorted_delays
    t_lo = float(d[max(0, math.ceil(lo_p * mc.samples) - 1)])
    t_hi = float(d[min(mc.samples - 1, math.ceil(hi_p * mc.samples) - 1)])
    return {
        "p": p,
        "t_ssta": t_ssta,
        "t_mc": t_mc,
        "gap": t_ssta - t_mc,
        "gap_fraction": (t_ssta - t_mc) / t_mc if t_mc else 0.0,
        "band": (t_lo, t_hi),
        "epsilon": eps,
        "conservative": t_ssta >= t_lo,
    }
