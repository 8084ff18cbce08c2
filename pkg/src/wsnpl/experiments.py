"""Random topologies, Monte-Carlo model validation, and distance sweeps.

Distances are drawn uniformly on [mu(1 - sqrt(3) R), mu(1 + sqrt(3) R)],
the simplest bounded law whose mean is mu and whose std/mean ratio is
exactly R; observation-noise variances are uniform on a configured range.
The sweep harness pairs the optimal and uniform allocations on identical
instances, derives one child seed per (R, run, attempt) so results are
byte-identical at any parallelism, and redraws infeasible instances with
a bumped attempt index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import alloc_l1, alloc_l2
from .errors import ConfigError, InfeasibleError
from .model import (L1, NORMS, Allocation, NetworkInstance, ProblemSpec,
                    SensorSpec, analytic_mse, blue_weights, channel_gain,
                    db_to_linear, dbm_to_watts, distortion_floor)
from .oracles import relative_power_savings, solve_uniform

#: Positivity of the uniform distance support requires sqrt(3) R < 1.
R_RATIO_MAX = 0.55

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
NOISE_KINDS = (GAUSSIAN, UNIFORM)

_PILOT_TAG = 0
_RUN_TAG = 1
_MAX_REDRAWS_PER_RUN = 200


@dataclass(frozen=True)
class TopologyParams:
    """Recipe for one random network draw."""

    k: int
    r_ratio: float = 0.0           # std(d) / mean(d)
    mean_distance: float = 80.0    # metres
    g0_db: float = -30.0           # path gain at 1 m
    exponent: float = 3.5
    xi2_dbm: float = -90.0
    sigma2_min: float = 0.01
    sigma2_max: float = 0.08
    w: float = 1.0
    bandwidth: float = 1.0e4
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"sensor count must be >= 1, got {self.k}")
        if not 0.0 <= self.r_ratio <= R_RATIO_MAX:
            raise ValueError(
                f"r_ratio must lie in [0, {R_RATIO_MAX}] to keep distances "
                f"positive, got {self.r_ratio}")
        if not (0.0 < self.sigma2_min <= self.sigma2_max):
            raise ValueError("need 0 < sigma2_min <= sigma2_max")
        if not (self.mean_distance > 0.0):
            raise ValueError("mean_distance must be positive")
        if not (self.w > 0.0 and self.bandwidth > 0.0):
            raise ValueError("w and bandwidth must be positive")


def _draw_network(p: TopologyParams, rng: np.random.Generator) -> NetworkInstance:
    half = math.sqrt(3.0) * p.r_ratio * p.mean_distance
    d = rng.uniform(p.mean_distance - half, p.mean_distance + half, p.k)
    sigma2 = rng.uniform(p.sigma2_min, p.sigma2_max, p.k)
    gains = channel_gain(d, db_to_linear(p.g0_db), p.exponent)
    xi2 = dbm_to_watts(p.xi2_dbm)
    sensors = tuple(
        SensorSpec(sigma2=float(s), gain=float(g), xi2=xi2, distance=float(dd))
        for s, g, dd in zip(sigma2, np.atleast_1d(gains), d))
    return NetworkInstance(w=p.w, sensors=sensors, bandwidth=p.bandwidth)


def generate_topology(p: TopologyParams) -> NetworkInstance:
    """Deterministic network draw from the params' own seed."""
    return _draw_network(p, np.random.default_rng(p.seed))


@dataclass(frozen=True)
class McEstimationReport:
    trials: int
    empirical_mse: float
    analytic_mse: float            # target at the simulated noise scale
    empirical_bias: float
    noise_kind: str
    noise_scale: float = 1.0


def simulate_estimation(net: NetworkInstance, alloc: Allocation, trials: int,
                        theta: float, noise_kind: str = GAUSSIAN,
                        seed: int = 0, noise_scale: float = 1.0) -> McEstimationReport:
    """Monte-Carlo check of the fused estimator against its analytic variance.

    Per trial, y_k = sqrt(alpha_k g_k)(theta + n_k) + n_ck with observation
    noise of the requested shape (variance sigma2_k) and gaussian channel
    noise (variance xi2_k); both are multiplied by ``noise_scale`` so a
    zero scale recovers theta exactly.  The estimator variance depends on
    second moments only, so gaussian and uniform shapes share the target.
    """
    if abs(theta) > net.w:
        raise ValueError(f"|theta| must not exceed the amplitude bound {net.w}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if noise_kind not in NOISE_KINDS:
        raise ValueError(f"noise_kind must be one of {NOISE_KINDS}, got {noise_kind!r}")
    weights = blue_weights(alloc, net)   # raises NoEstimatorError on all-zero
    h = np.sqrt(np.asarray(alloc.alpha) * net.gains())
    obs_std = np.sqrt(net.sigma2s()) * noise_scale
    ch_std = np.sqrt(net.xi2s()) * noise_scale

    rng = np.random.default_rng(seed)
    chunk = 1 << 16
    err_sum = 0.0
    sq_sum = 0.0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        if noise_kind == GAUSSIAN:
            obs = rng.standard_normal((n, net.k)) * obs_std
        else:
            obs = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), (n, net.k)) * obs_std
        ch = rng.standard_normal((n, net.k)) * ch_std
        est = ((theta + obs) * h + ch) @ weights
        err = est - theta
        err_sum += float(np.sum(err))
        sq_sum += float(np.sum(err * err))
        done += n
    return McEstimationReport(
        trials=trials,
        empirical_mse=sq_sum / trials,
        analytic_mse=analytic_mse(alloc, net) * noise_scale ** 2,
        empirical_bias=err_sum / trials,
        noise_kind=noise_kind,
        noise_scale=noise_scale)


@dataclass(frozen=True)
class SweepRow:
    r_ratio: float
    runs: int
    mean_savings: float
    std_savings: float
    mean_active: float
    std_active: float
    mean_j_opt: float
    mean_j_uniform: float
    infeasible_redraws: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    d0: float
    d0_policy: str
    norm: str
    master_seed: int


def default_sweep_d0(params: TopologyParams, master_seed: int,
                     pilots: int = 1000) -> float:
    """Default target: 1.1x the median distortion floor of R=0 pilot draws."""
    base = replace(params, r_ratio=0.0)
    floors = np.empty(pilots)
    for i in range(pilots):
        rng = np.random.default_rng(
            np.random.SeedSequence(master_seed, spawn_key=(_PILOT_TAG, i)))
        floors[i] = distortion_floor(_draw_network(base, rng))
    return 1.1 * float(np.median(floors))


def _solve_pair(prob: ProblemSpec):
    if prob.norm == L1:
        opt = alloc_l1.solve_l1(prob)
    else:
        opt = alloc_l2.solve_l2(prob)
    uni = solve_uniform(prob).allocation
    return opt, uni


def _one_run(params: TopologyParams, ri: int, run: int, master_seed: int,
             d0: float, norm: str):
    for attempt in range(_MAX_REDRAWS_PER_RUN):
        rng = np.random.default_rng(
            np.random.SeedSequence(master_seed, spawn_key=(_RUN_TAG, ri, run, attempt)))
        net = _draw_network(params, rng)
        prob = ProblemSpec(network=net, d0=d0, norm=norm)
        try:
            opt, uni = _solve_pair(prob)
        except InfeasibleError:
            continue
        savings = relative_power_savings(opt.objective, uni.objective)
        return savings, opt.active_count, opt.objective, uni.objective, attempt
    raise ConfigError(
        f"{_MAX_REDRAWS_PER_RUN} consecutive infeasible draws at R="
        f"{params.r_ratio}; the distortion target {d0} is too aggressive "
        "for the topology law")


def sweep_r(params: TopologyParams, r_values, runs: int, norm: str = L1,
            master_seed: int = 0, d0: float | None = None,
            threads: int = 1) -> SweepResult:
    """Paired optimal-vs-uniform statistics over a grid of distance spreads."""
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    r_values = [float(r) for r in r_values]
    if not r_values:
        raise ValueError("r_values must not be empty")
    if d0 is None:
        d0 = default_sweep_d0(params, master_seed)
        d0_policy = "1.1x-median-pilot-floor"
    else:
        d0_policy = "explicit"

    rows = []
    for ri, r in enumerate(r_values):
        pr = replace(params, r_ratio=r)

        def task(run: int, _pr=pr, _ri=ri):
            return _one_run(_pr, _ri, run, master_seed, d0, norm)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(task, range(runs)))
        else:
            results = [task(run) for run in range(runs)]

        redraws = sum(res[4] for res in results)
        if redraws > runs:
            raise ConfigError(
                f"more than half of all draws at R={r} were infeasible "
                f"({redraws} redraws over {runs} runs); the distortion "
                f"target {d0} is too aggressive for the topology law")
        savings = np.array([res[0] for res in results])
        active = np.array([res[1] for res in results], dtype=float)
        j_opt = np.array([res[2] for res in results])
        j_uni = np.array([res[3] for res in results])
        rows.append(SweepRow(
            r_ratio=r, runs=runs,
            mean_savings=float(np.mean(savings)),
            std_savings=float(np.std(savings)),
            mean_active=float(np.mean(active)),
            std_active=float(np.std(active)),
            mean_j_opt=float(np.mean(j_opt)),
            mean_j_uniform=float(np.mean(j_uni)),
            infeasible_redraws=redraws))
    return SweepResult(rows=tuple(rows), d0=d0, d0_policy=d0_policy,
                       norm=norm, master_seed=master_seed)
