"""Shared instance generators and comparison helpers."""

from __future__ import annotations

import numpy as np

import wsnpl as w
from wsnpl.experiments import TopologyParams, _draw_network

ACCEPTANCE_SEED = 20260809


def paper_range_instance(i: int, norm: str = w.L1, master: int = ACCEPTANCE_SEED,
                         k_max: int = 20) -> w.ProblemSpec:
    """Seeded random feasible instance drawn from paper-like parameter ranges.

    Distances come from the uniform topology law with a random spread and a
    random mean in [20, 160] m; the distortion target sits a random factor
    in [1.02, 10] above the instance's floor so shut-offs actually occur.
    """
    ss = np.random.SeedSequence(master, spawn_key=(7, i))
    rng = np.random.default_rng(ss)
    k = int(rng.integers(1, k_max + 1))
    params = TopologyParams(k=k, r_ratio=float(rng.uniform(0.0, 0.55)),
                            mean_distance=float(rng.uniform(20.0, 160.0)))
    net = _draw_network(params, rng)
    d0 = w.distortion_floor(net) * float(rng.uniform(1.02, 10.0))
    return w.ProblemSpec(network=net, d0=d0, norm=norm)


def max_alpha_reldiff(*alphas) -> float:
    """Worst pairwise per-sensor relative gain difference.

    The denominator carries a floor of 1e-12 times the allocation scale so
    that a sensor sitting numerically at zero in one method and at a
    float-crumb value in another does not register as a 100% discrepancy.
    """
    arrays = [np.asarray(a, dtype=float) for a in alphas]
    scale = max(float(np.max(a)) for a in arrays)
    worst = 0.0
    for i in range(len(arrays)):
        for j in range(i + 1, len(arrays)):
            a, b = arrays[i], arrays[j]
            den = np.maximum(np.abs(a), np.abs(b)) + 1e-12 * scale
            worst = max(worst, float(np.max(np.abs(a - b) / den)))
    return worst


def micro_networks():
    """The three worked micro-instances used throughout the suite."""
    k1 = w.NetworkInstance(w=1.0, sensors=(
        w.SensorSpec(sigma2=0.01, gain=1e-3, xi2=1e-12),))
    k2 = w.NetworkInstance(w=1.0, sensors=(
        w.SensorSpec(sigma2=0.01, gain=1e-3, xi2=1e-12),
        w.SensorSpec(sigma2=0.04, gain=1e-3, xi2=1e-12)))
    shutoff = w.NetworkInstance(w=1.0, sensors=(
        w.SensorSpec(sigma2=0.01, gain=1e-3, xi2=1e-12),
        w.SensorSpec(sigma2=0.01, gain=1e-14, xi2=1e-12)))
    return k1, k2, shutoff
