"""Closed-form minimum-total-power allocator.

The total-power problem becomes convex in the effective precisions r_k,
and its KKT conditions have a water-filling solution: rank sensors by the
noise-to-gain ratio xi2/g (best channel first), find the active prefix
length K1 from a threshold scan, then set

    r_k = (1/sigma2_k) (1 - w sqrt(xi2_k/g_k) / sqrt(lambda0))+
    alpha_k = (xi2_k / (g_k sigma2_k)) (sqrt(g_k/xi2_k) eta0 - 1)   k <= K1

with eta0 = A(K1)/B(K1) and lambda0 = (w eta0)^2, where A and B are the
prefix sums defined below.  Sensors past the prefix are shut off.

The printed threshold test f(M) = sqrt(xi2_M/g_M) A(M)/B(M) < 1 is kept
verbatim (including its B(M) <= 0 sentinel), but it is not dimensionless
and misidentifies the prefix whenever sensors actually shut off, so the
solver verifies every candidate (clamp support equals the prefix, tight
sum) and rescues failures with a self-consistent prefix scan: the valid
K1 is the M whose own multiplier eta0(M) = A(M)/B(M) clamps exactly M
sensors on.  If even that fails, the solver transparently hands off to
the independent multiplier-bisection oracle and flags the result; every
path must leave sum(r) tight against 1/D0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracles
from .errors import ConsistencyError, InfeasibleError
from .model import (FEASIBILITY_MARGIN, L1, Allocation, NetworkInstance,
                    ProblemSpec, distortion_floor, make_allocation)

#: |sum(r) * d0 - 1| allowed on the closed-form path before falling back.
TIGHTNESS_TOL = 1e-10


@dataclass(frozen=True)
class RankedNetwork:
    """Sensors reordered so that xi2/g is nondecreasing (best channel first)."""

    net: NetworkInstance
    order: np.ndarray             # order[pos] = original sensor index
    ratios: np.ndarray            # xi2/g in rank order

    def __post_init__(self):
        object.__setattr__(self, "order", np.asarray(self.order, dtype=int))
        object.__setattr__(self, "ratios", np.asarray(self.ratios, dtype=float))

    def sigma2s(self) -> np.ndarray:
        return self.net.sigma2s()[self.order]


@dataclass(frozen=True)
class ThresholdState:
    """Prefix sums and threshold values from one scan.

    a[m-1] = A(m) = sum_{j<=m} sqrt(xi2_j/g_j)/sigma2_j
    bsum[m-1] = B(m) = sum_{j<=m} 1/sigma2_j - 1/d0
    f[m-1] = f(m) = sqrt(xi2_m/g_m) A(m)/B(m), -inf sentinel when B(m) <= 0

    ``crossings`` lists every m with f(m) < 1 and f(m+1) >= 1 (m = K counts
    when f stays below 1 throughout).  ``k1`` is the selected prefix length
    when the scan found exactly one crossing, else None.  ``degenerate``
    marks patterns the closed form cannot serve: no unique crossing, or
    B(K1) <= 0 at the crossing.
    """

    a: np.ndarray
    bsum: np.ndarray
    f: np.ndarray
    crossings: tuple[int, ...]
    k1: int | None
    eta0: float
    lambda0: float
    degenerate: bool


def rank_by_channel(net: NetworkInstance) -> RankedNetwork:
    """Stable sort by xi2/g ascending; ties keep original sensor order."""
    ratios = net.xi2s() / net.gains()
    order = np.argsort(ratios, kind="stable")
    return RankedNetwork(net=net, order=order, ratios=ratios[order])


def _prefix_sums(ranked: RankedNetwork, d0: float):
    sigma2 = ranked.sigma2s()
    sqrt_ratio = np.sqrt(ranked.ratios)
    a = np.cumsum(sqrt_ratio / sigma2)
    bsum = np.cumsum(1.0 / sigma2) - 1.0 / d0
    return sqrt_ratio, a, bsum


def threshold_f(m: int, ranked: RankedNetwork, d0: float) -> float:
    """Threshold value f(m); -inf when B(m) <= 0 (prefix m cannot meet d0)."""
    k = ranked.net.k
    if not 1 <= m <= k:
        raise ValueError(f"m must be in [1, {k}], got {m}")
    sqrt_ratio, a, bsum = _prefix_sums(ranked, d0)
    if bsum[m - 1] <= 0.0:
        return -math.inf
    return float(sqrt_ratio[m - 1] * a[m - 1] / bsum[m - 1])


def threshold_state(ranked: RankedNetwork, d0: float, w: float = 1.0) -> ThresholdState:
    """Scan f(1..K), record every crossing, and derive eta0/lambda0."""
    net = ranked.net
    floor = distortion_floor(net)
    if d0 <= floor * (1.0 + FEASIBILITY_MARGIN):
        raise InfeasibleError(
            f"distortion target {d0!r} does not clear the floor {floor!r}",
            floor=floor)
    sqrt_ratio, a, bsum = _prefix_sums(ranked, d0)
    f = np.where(bsum > 0.0, sqrt_ratio * a / np.where(bsum > 0.0, bsum, 1.0),
                 -math.inf)

    below = f < 1.0
    crossings = [m + 1 for m in range(net.k - 1) if below[m] and not below[m + 1]]
    if bool(np.all(below)):
        crossings.append(net.k)

    if len(crossings) == 1:
        k1 = crossings[0]
        degenerate = bsum[k1 - 1] <= 0.0
    else:
        k1 = None
        degenerate = True
    if k1 is not None and not degenerate:
        eta0 = float(a[k1 - 1] / bsum[k1 - 1])
        lambda0 = (w * eta0) ** 2
    else:
        eta0 = math.nan
        lambda0 = math.nan
    return ThresholdState(a=a, bsum=bsum, f=f, crossings=tuple(crossings),
                          k1=k1, eta0=eta0, lambda0=lambda0,
                          degenerate=degenerate)


def find_active_count(ranked: RankedNetwork, d0: float) -> int:
    """Unique prefix length K1 with f(K1) < 1 <= f(K1+1) (K when f stays below 1).

    Raises ConsistencyError when the scan does not identify a usable unique
    crossing (multiple crossings, none at all, or B(K1) <= 0); ``solve_l1``
    treats those instances via the bisection fallback instead.
    """
    state = threshold_state(ranked, d0)
    if len(state.crossings) > 1:
        raise ConsistencyError(
            f"threshold scan found multiple crossings {state.crossings}; "
            "the active count is not unique")
    if state.k1 is None:
        raise ConsistencyError("threshold scan found no crossing")
    if state.degenerate:
        raise ConsistencyError(
            f"B(K1) <= 0 at the located crossing K1={state.k1}; "
            "bisection fallback required")
    return state.k1


def _self_consistent_k1(ranked: RankedNetwork, d0: float):
    """Prefix length whose own multiplier reproduces exactly that prefix.

    The clamp at eta0(M) = A(M)/B(M) activates precisely the sensors with
    sqrt(xi2/g) < eta0(M); the optimum is the M whose clamp support has
    size M.  This scan rescues instances where the printed threshold test
    picks an inconsistent prefix (see the module docstring).
    """
    sqrt_ratio, a, bsum = _prefix_sums(ranked, d0)
    for m in range(1, ranked.net.k + 1):
        if bsum[m - 1] <= 0.0:
            continue
        eta = float(a[m - 1] / bsum[m - 1])
        support = int(np.searchsorted(sqrt_ratio, eta, side="left"))
        if support == m:
            return m, eta
    return None


def _closed_form(ranked: RankedNetwork, k1: int, eta0: float,
                 lambda0: float, d0: float) -> Allocation | None:
    """Evaluate the KKT formulas; None when the result is not self-consistent."""
    net = ranked.net
    sigma2 = ranked.sigma2s()
    sqrt_ratio = np.sqrt(ranked.ratios)

    r_ranked = np.maximum(0.0, 1.0 - sqrt_ratio / eta0) / sigma2
    # Active set must be exactly the rank prefix 1..K1.
    positive = r_ranked > 0.0
    if int(np.count_nonzero(positive)) != k1 or not bool(np.all(positive[:k1])):
        return None
    if abs(float(np.sum(r_ranked)) * d0 - 1.0) > TIGHTNESS_TOL:
        return None

    alpha_ranked = np.zeros(net.k)
    prefix = slice(0, k1)
    alpha_ranked[prefix] = (ranked.ratios[prefix] / sigma2[prefix]
                            * (eta0 / sqrt_ratio[prefix] - 1.0))

    alpha = np.zeros(net.k)
    r = np.zeros(net.k)
    alpha[ranked.order] = alpha_ranked
    r[ranked.order] = r_ranked
    alloc = make_allocation(net, alpha=alpha, norm=L1, lambda0=lambda0)
    # The gain map must reproduce the clamped precisions.
    if not np.allclose(alloc.r, r, rtol=1e-9, atol=0.0):
        return None
    return alloc


def solve_l1(prob: ProblemSpec) -> Allocation:
    """Minimum-total-power allocation meeting the distortion target."""
    if prob.norm != L1:
        raise ValueError(f"solve_l1 requires norm {L1!r}, got {prob.norm!r}")
    net = prob.network
    ranked = rank_by_channel(net)
    state = threshold_state(ranked, prob.d0, net.w)

    if not state.degenerate:
        alloc = _closed_form(ranked, state.k1, state.eta0, state.lambda0,
                             prob.d0)
        if alloc is not None:
            return alloc

    consistent = _self_consistent_k1(ranked, prob.d0)
    if consistent is not None:
        k1, eta0 = consistent
        alloc = _closed_form(ranked, k1, eta0, (net.w * eta0) ** 2, prob.d0)
        if alloc is not None:
            return alloc

    report = oracles.solve_l1_bisection(prob, tol=1e-12)
    base = report.allocation
    return Allocation(alpha=base.alpha, r=base.r, active_count=base.active_count,
                      lambda0=base.lambda0, objective=base.objective,
                      node_powers=base.node_powers, norm=base.norm, fallback=True)
