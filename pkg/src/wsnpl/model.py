"""Discrete amplify-and-forward network model.

Each sensor observes theta corrupted by zero-mean noise of variance
sigma2, scales the observation by an amplifier power gain alpha, and the
fusion center receives y_k = sqrt(alpha_k g_k) (theta + n_k) + n_ck over
a channel with power gain g_k and additive noise of variance xi2_k.  The
fusion center combines the y_k with the minimum-variance unbiased linear
estimator.  This module holds the data types, unit conversions, the
estimator, its analytic variance, and the power bookkeeping; the
allocation solvers live in ``alloc_l1``/``alloc_l2``.

All library-level quantities are linear (gains as ratios, powers in
watts); dB/dBm conversion happens at the config boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoEstimatorError

L1 = "l1"
L2 = "l2"
NORMS = (L1, L2)

#: Relative margin by which the distortion target must clear the floor.
FEASIBILITY_MARGIN = 1e-12


def db_to_linear(x):
    """dB -> linear power ratio."""
    return 10.0 ** (x / 10.0)


def dbm_to_watts(x):
    """dBm -> watts."""
    return 10.0 ** ((x - 30.0) / 10.0)


def channel_gain(d, g0: float, exponent: float):
    """Power-law path gain g = g0 * d**(-exponent), all linear units."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance must be positive")
    if g0 <= 0.0:
        raise ValueError("reference gain must be positive")
    out = g0 * d ** (-exponent)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SensorSpec:
    """Physical description of one sensor and its uplink channel."""

    sigma2: float                 # observation-noise variance (signal units^2)
    gain: float                   # channel power gain, linear
    xi2: float                    # channel-noise variance (watts)
    distance: float | None = None  # metres; informational once gain is fixed

    def __post_init__(self):
        if not (self.sigma2 > 0.0):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not (self.gain > 0.0):
            raise ValueError(f"gain must be positive, got {self.gain}")
        if not (self.xi2 > 0.0):
            raise ValueError(f"xi2 must be positive, got {self.xi2}")
        if self.distance is not None and not (self.distance > 0.0):
            raise ValueError(f"distance must be positive, got {self.distance}")


@dataclass(frozen=True)
class NetworkInstance:
    """Amplitude bound plus an ordered list of sensors (index = sensor id)."""

    w: float                      # source amplitude bound, |theta| <= w
    sensors: tuple[SensorSpec, ...]
    bandwidth: float = 1.0e4      # Hz, carried for bandwidth accounting only

    def __post_init__(self):
        if not (self.w > 0.0):
            raise ValueError(f"amplitude bound w must be positive, got {self.w}")
        if len(self.sensors) == 0:
            raise ValueError("network needs at least one sensor")
        if not (self.bandwidth > 0.0):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        object.__setattr__(self, "sensors", tuple(self.sensors))

    @property
    def k(self) -> int:
        return len(self.sensors)

    def sigma2s(self) -> np.ndarray:
        return np.array([s.sigma2 for s in self.sensors])

    def gains(self) -> np.ndarray:
        return np.array([s.gain for s in self.sensors])

    def xi2s(self) -> np.ndarray:
        return np.array([s.xi2 for s in self.sensors])

    def distances(self) -> np.ndarray:
        """Per-sensor distance, NaN where unspecified."""
        return np.array([math.nan if s.distance is None else s.distance
                         for s in self.sensors])


@dataclass(frozen=True)
class ProblemSpec:
    """One allocation problem: a network, a distortion target, a norm."""

    network: NetworkInstance
    d0: float                     # distortion target (signal units^2)
    norm: str = L1

    def __post_init__(self):
        if not (self.d0 > 0.0):
            raise ValueError(f"distortion target must be positive, got {self.d0}")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")


@dataclass(frozen=True)
class Allocation:
    """Solver output: per-sensor gains, effective precisions, and powers.

    ``lambda0`` is the multiplier of the sum-precision constraint under
    the solved norm (for the total-power problem it equals (w*eta0)^2).
    ``fallback`` marks instances where the closed form handed off to the
    bisection solver (see ``alloc_l1``).
    """

    alpha: np.ndarray             # per-sensor amplifier power gains, >= 0
    r: np.ndarray                 # per-sensor effective precisions
    active_count: int
    lambda0: float
    objective: float
    node_powers: np.ndarray       # physical bound 4 w^2 alpha_k, watts
    norm: str = L1
    fallback: bool = field(default=False, compare=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float).copy()
        r = np.asarray(self.r, dtype=float).copy()
        powers = np.asarray(self.node_powers, dtype=float).copy()
        for arr in (alpha, r, powers):
            arr.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "node_powers", powers)
        if np.any(alpha < 0.0):
            raise ValueError("amplifier gains must be nonnegative")


def precision_from_alpha(alpha, net: NetworkInstance) -> np.ndarray:
    """Effective precision r_k = alpha g / (sigma2 alpha g + xi2); 0 when alpha is 0."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (net.k,):
        raise ValueError(f"alpha has shape {alpha.shape}, expected ({net.k},)")
    ag = alpha * net.gains()
    return ag / (net.sigma2s() * ag + net.xi2s())


def alpha_from_precision(r, net: NetworkInstance) -> np.ndarray:
    """Invert the precision map: alpha_k = (xi2/g) r / (1 - sigma2 r)."""
    r = np.asarray(r, dtype=float)
    if r.shape != (net.k,):
        raise ValueError(f"r has shape {r.shape}, expected ({net.k},)")
    slack = 1.0 - net.sigma2s() * r
    if np.any(r < 0.0) or np.any(slack <= 0.0):
        raise ValueError("precisions must satisfy 0 <= r < 1/sigma2")
    return np.where(r > 0.0, net.xi2s() / net.gains() * r / slack, 0.0)


def power_metrics(alpha, net: NetworkInstance, norm: str = L1):
    """Objective and node powers for a gain vector.

    The optimization objective is built from the per-node terms w^2 alpha_k
    (summed for the total-power norm, sum of squares for the squared norm),
    while the reported physical per-node power is the transmit bound
    4 w^2 alpha_k; the factor 4 is deliberate and both are exposed.
    """
    alpha = np.asarray(alpha, dtype=float)
    terms = net.w ** 2 * alpha
    node_powers = 4.0 * terms
    if norm == L1:
        objective = float(np.sum(terms))
    elif norm == L2:
        objective = float(np.sum(terms ** 2))
    else:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    return objective, node_powers


def make_allocation(net: NetworkInstance, r=None, alpha=None, norm: str = L1,
                    lambda0: float = math.nan, fallback: bool = False) -> Allocation:
    """Build a consistent Allocation from either a precision or a gain vector."""
    if (r is None) == (alpha is None):
        raise ValueError("provide exactly one of r or alpha")
    if alpha is None:
        alpha = alpha_from_precision(r, net)
    else:
        alpha = np.asarray(alpha, dtype=float)
        r = precision_from_alpha(alpha, net)
    objective, node_powers = power_metrics(alpha, net, norm)
    return Allocation(alpha=alpha, r=np.asarray(r, dtype=float),
                      active_count=int(np.count_nonzero(alpha > 0.0)),
                      lambda0=lambda0, objective=objective,
                      node_powers=node_powers, norm=norm, fallback=fallback)


def analytic_mse(alloc: Allocation, net: NetworkInstance) -> float:
    """Estimator variance (sum of effective precisions, inverted).

    Returns +inf for an all-zero allocation so optimizers can probe it.
    """
    alpha = np.asarray(alloc.alpha, dtype=float)
    if alpha.shape != (net.k,):
        raise ValueError(f"allocation has {alpha.shape[0]} sensors, network has {net.k}")
    total = float(np.sum(precision_from_alpha(alpha, net)))
    if total <= 0.0:
        return math.inf
    return 1.0 / total


def distortion_floor(net: NetworkInstance) -> float:
    """Infimum achievable distortion (all channels noiseless): 1 / sum(1/sigma2)."""
    return 1.0 / float(np.sum(1.0 / net.sigma2s()))


def blue_weights(alloc: Allocation, net: NetworkInstance) -> np.ndarray:
    """Linear fusion weights: theta_hat = weights . y, with sum(w_k h_k) = 1."""
    alpha = np.asarray(alloc.alpha, dtype=float)
    h = np.sqrt(alpha * net.gains())
    rkk = net.sigma2s() * alpha * net.gains() + net.xi2s()
    total = float(np.sum(h * h / rkk))
    if total <= 0.0:
        raise NoEstimatorError("all amplifier gains are zero; nothing to fuse")
    return h / rkk / total


def blue_estimate(y, alloc: Allocation, net: NetworkInstance) -> float:
    """Minimum-variance unbiased linear estimate of theta from one sample vector."""
    y = np.asarray(y, dtype=float)
    if y.shape != (net.k,):
        raise ValueError(f"sample vector has shape {y.shape}, expected ({net.k},)")
    return float(blue_weights(alloc, net) @ y)
