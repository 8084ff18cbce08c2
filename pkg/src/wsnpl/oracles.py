"""Independent solvers and baseline metrics.

These routines validate the closed-form allocator by entirely different
computational routes: bisection on the KKT multiplier, projected descent
on the convex precision-space program, exhaustive grid search for tiny
networks, and the uniform-power baseline.  None of them share code with
the threshold scan in ``alloc_l1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, ConvergenceError, InfeasibleError
from .model import (FEASIBILITY_MARGIN, L1, Allocation, NetworkInstance,
                    ProblemSpec, distortion_floor, make_allocation)
from .objectives import r_space_objective

ANALOG_SSB_FDMA = "analog_ssb_fdma"
DIGITAL_TDMA = "digital_tdma"

#: Relative cap keeping projected-descent iterates strictly below 1/sigma2.
BOX_SHRINK = 1e-9


@dataclass(frozen=True)
class OracleReport:
    allocation: Allocation
    iterations: int
    max_abs_constraint_violation: float
    method: str


def _check_feasible(net: NetworkInstance, d0: float) -> float:
    floor = distortion_floor(net)
    if d0 <= floor * (1.0 + FEASIBILITY_MARGIN):
        raise InfeasibleError(
            f"distortion target {d0!r} does not clear the floor {floor!r}",
            floor=floor)
    return floor


def solve_l1_bisection(prob: ProblemSpec, tol: float = 1e-10) -> OracleReport:
    """Solve the total-power problem by bisecting the KKT multiplier.

    The clamped precision sum sum_k (1/sigma2_k)(1 - w sqrt(xi2_k/g_k)/s)+
    is nondecreasing in s = sqrt(lambda0), so the unique s with a tight
    distortion constraint is found by bisection on a bracket whose upper
    end provably deactivates every clamp.
    """
    if prob.norm != L1:
        raise ValueError(f"bisection oracle requires norm {L1!r}, got {prob.norm!r}")
    net = prob.network
    _check_feasible(net, prob.d0)
    sigma2 = net.sigma2s()
    sqrt_ratio = np.sqrt(net.xi2s() / net.gains())
    inv_sigma2 = 1.0 / sigma2
    total_precision = float(np.sum(inv_sigma2))
    target = 1.0 / prob.d0

    def r_of(s: float) -> np.ndarray:
        return inv_sigma2 * np.maximum(0.0, 1.0 - net.w * sqrt_ratio / s)

    s_hi = net.w * float(np.max(sqrt_ratio)) * total_precision / (
        total_precision - target)
    s_lo = 0.0
    iterations = 0
    for _ in range(200):
        iterations += 1
        mid = 0.5 * (s_lo + s_hi)
        if float(np.sum(r_of(mid))) < target:
            s_lo = mid
        else:
            s_hi = mid
        if s_hi - s_lo <= 4e-16 * s_hi:
            break
    s = s_hi
    r = r_of(s)
    violation = abs(float(np.sum(r)) * prob.d0 - 1.0)
    if violation > tol:
        raise ConvergenceError(
            f"multiplier bisection stalled with constraint violation {violation:g}",
            residual=violation)
    alloc = make_allocation(net, r=r, norm=L1, lambda0=s * s)
    return OracleReport(allocation=alloc, iterations=iterations,
                        max_abs_constraint_violation=violation,
                        method="bisection")


def project_capped_simplex(y, ub, target: float, weights=None) -> np.ndarray:
    """Project y onto {x : sum(x) = target, 0 <= x <= ub}.

    With diagonal metric weights d the projection is clip(y - tau d, 0, ub)
    for the shift tau making the sum hit the target; the sum is monotone in
    tau, so tau comes from bisection plus one exact redistribution over the
    strictly-inside coordinates.
    """
    y = np.asarray(y, dtype=float)
    ub = np.asarray(ub, dtype=float)
    d = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    if target > float(np.sum(ub)) * (1.0 + 1e-15):
        raise InfeasibleError(
            f"projection target {target!r} exceeds the box capacity",
            floor=math.nan)

    tau_lo = float(np.min((y - ub) / d))   # everything at the cap
    tau_hi = float(np.max(y / d))          # everything at zero
    for _ in range(200):
        mid = 0.5 * (tau_lo + tau_hi)
        if float(np.sum(np.clip(y - mid * d, 0.0, ub))) >= target:
            tau_lo = mid
        else:
            tau_hi = mid
    x = np.clip(y - tau_lo * d, 0.0, ub)
    for _ in range(3):
        gap = target - float(np.sum(x))
        free = (x > 0.0) & (x < ub)
        if gap == 0.0 or not np.any(free):
            break
        x[free] += gap * d[free] / float(np.sum(d[free]))
        x = np.clip(x, 0.0, ub)
    return x


def projected_descent(prob: ProblemSpec, norm: str | None = None,
                      steps: int = 4000, tol: float = 1e-9) -> OracleReport:
    """Diagonally preconditioned projected-gradient descent in r-space.

    Uses only the objective derivatives and the capped-simplex projection,
    so it is independent of any closed-form structure.  Shut-off sensors
    land on exact zeros through the projection clip.
    """
    norm = prob.norm if norm is None else norm
    net = prob.network
    _check_feasible(net, prob.d0)
    obj = r_space_objective(net, norm)
    sigma2 = net.sigma2s()
    ub = (1.0 - BOX_SHRINK) / sigma2
    target = 1.0 / prob.d0
    if target > float(np.sum(ub)):
        raise InfeasibleError(
            "distortion target is too close to the floor for the shrunken box",
            floor=distortion_floor(net))

    x = project_capped_simplex((distortion_floor(net) / prob.d0) / sigma2,
                               ub, target)
    fx = obj.value(x)
    iterations = 0
    stalls = 0
    for _ in range(steps):
        iterations += 1
        g = obj.grad(x)
        d = 1.0 / obj.hess_diag(x)
        step = 1.0
        z, fz = x, fx
        for _ in range(80):
            cand = project_capped_simplex(x - step * d * g, ub, target,
                                          weights=d)
            fcand = obj.value(cand)
            if fcand <= fx + 1e-4 * float(g @ (cand - x)):
                z, fz = cand, fcand
                break
            step *= 0.5
        moved = float(np.max(np.abs(z - x)))
        stalled = fx - fz <= 1e-17 * (1.0 + abs(fx))
        x, fx = z, fz
        if moved <= 1e-13 * (1.0 + float(np.max(np.abs(x)))):
            break
        if stalled:
            stalls += 1
            if stalls >= 3:
                break
        else:
            stalls = 0
    else:
        raise ConvergenceError(
            f"projected descent did not settle within {steps} steps",
            residual=float(np.max(np.abs(obj.grad(x)))))
    # Projection arithmetic can leave crumbs of order eps*max(x) on
    # shut-off coordinates; fold them into the largest coordinate so
    # inactive sensors end on exact zeros without moving the sum.
    crumbs = (x > 0.0) & (x < 1e-14 * float(np.max(x)))
    if np.any(crumbs):
        x[int(np.argmax(x))] += float(np.sum(x[crumbs]))
        x[crumbs] = 0.0
    violation = abs(float(np.sum(x)) * prob.d0 - 1.0)
    alloc = make_allocation(net, r=x, norm=norm)
    return OracleReport(allocation=alloc, iterations=iterations,
                        max_abs_constraint_violation=violation,
                        method="projected_descent")


def grid_search(prob: ProblemSpec, norm: str | None = None,
                resolution: float = 1e-5) -> OracleReport:
    """Exhaustive refined grid search; K <= 3 only.

    The sum constraint eliminates the last coordinate, leaving a 0-, 1- or
    2-dimensional convex problem that coarse-to-fine scanning solves to a
    final step below ``resolution`` times the initial box width.
    """
    norm = prob.norm if norm is None else norm
    net = prob.network
    if net.k > 3:
        raise ValueError(f"grid oracle supports K <= 3, got K = {net.k}")
    _check_feasible(net, prob.d0)
    obj = r_space_objective(net, norm)
    sigma2 = net.sigma2s()
    ub = (1.0 - 1e-12) / sigma2
    target = 1.0 / prob.d0

    if net.k == 1:
        r = np.array([target])
        alloc = make_allocation(net, r=r, norm=norm)
        return OracleReport(allocation=alloc, iterations=1,
                            max_abs_constraint_violation=0.0, method="grid")

    nfree = net.k - 1
    lo = np.zeros(nfree)
    hi = np.minimum(ub[:nfree], target)
    widths0 = hi - lo
    npts = 4001 if nfree == 1 else 121

    best = project_capped_simplex((distortion_floor(net) / prob.d0) / sigma2,
                                  ub, target)[:nfree]
    best_val = _grid_value(obj, best[None, :], target, ub)[0]
    passes = 0
    step = widths0 / (npts - 1)
    while True:
        passes += 1
        axes = [np.linspace(lo[i], hi[i], npts) for i in range(nfree)]
        if nfree == 1:
            pts = axes[0][:, None]
        else:
            g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
            pts = np.column_stack([g0.ravel(), g1.ravel()])
        vals = _grid_value(obj, pts, target, ub)
        idx = int(np.argmin(vals))
        if vals[idx] < best_val:
            best_val = vals[idx]
            best = pts[idx]
        step = (hi - lo) / (npts - 1)
        if np.all(step <= resolution * widths0) and passes >= 3:
            break
        lo = np.maximum(0.0, best - 1.5 * step)
        hi = np.minimum(np.minimum(ub[:nfree], target), best + 1.5 * step)
        if passes >= 40:
            break

    r = np.append(best, target - float(np.sum(best)))
    alloc = make_allocation(net, r=r, norm=norm)
    return OracleReport(allocation=alloc, iterations=passes,
                        max_abs_constraint_violation=0.0, method="grid")


def _grid_value(obj, pts: np.ndarray, target: float, ub: np.ndarray) -> np.ndarray:
    last = target - np.sum(pts, axis=1)
    full = np.column_stack([pts, last])
    ok = np.all((full >= 0.0) & (full <= ub), axis=1)
    vals = np.where(ok, obj.value(np.where(ok[:, None], full, 0.0)), math.inf)
    return vals


def solve_uniform(prob: ProblemSpec) -> OracleReport:
    """Minimal common amplifier gain meeting the target (all sensors equal).

    Distortion is strictly decreasing in the shared gain, so plain
    bisection on the gain is exact.
    """
    net = prob.network
    _check_feasible(net, prob.d0)
    sigma2 = net.sigma2s()
    noise_over_gain = net.xi2s() / net.gains()

    def mse(alpha: float) -> float:
        return 1.0 / float(np.sum(1.0 / (sigma2 + noise_over_gain / alpha)))

    hi = 1.0
    iterations = 0
    for _ in range(200):
        if mse(hi) <= prob.d0:
            break
        hi *= 4.0
        iterations += 1
    else:
        raise ConvergenceError("uniform gain bracket did not close",
                               residual=mse(hi))
    lo = 0.0
    for _ in range(200):
        iterations += 1
        mid = 0.5 * (lo + hi)
        if mid <= 0.0 or mse(mid) > prob.d0:
            lo = mid
        else:
            hi = mid
    alpha = hi
    violation = abs(mse(alpha) / prob.d0 - 1.0)
    alloc = make_allocation(net, alpha=np.full(net.k, alpha), norm=prob.norm,
                            lambda0=math.nan)
    return OracleReport(allocation=alloc, iterations=iterations,
                        max_abs_constraint_violation=violation,
                        method="uniform")


def relative_power_savings(j_opt: float, j_uniform: float) -> float:
    """Fractional saving (j_uniform - j_opt)/j_uniform, in [0, 1)."""
    if not (j_uniform > 0.0):
        raise ValueError(f"uniform objective must be positive, got {j_uniform}")
    if j_opt > j_uniform * (1.0 + 1e-9):
        raise ConsistencyError(
            f"optimized objective {j_opt!r} exceeds the uniform baseline "
            f"{j_uniform!r}")
    return max(0.0, (j_uniform - j_opt) / j_uniform)


def average_node_lifetime(node_powers, e0: float) -> tuple[float, int]:
    """Mean battery lifetime e0/P over draining nodes.

    Returns (finite_mean, idle_count): nodes with zero power never drain;
    they are excluded from the finite mean and counted separately.  With
    no draining node at all the finite mean is +inf.
    """
    if not (e0 > 0.0):
        raise ValueError(f"battery energy must be positive, got {e0}")
    powers = np.asarray(node_powers, dtype=float)
    if np.any(powers < 0.0):
        raise ValueError("node powers must be nonnegative")
    draining = powers > 0.0
    idle = int(powers.size - np.count_nonzero(draining))
    if idle == powers.size:
        return math.inf, idle
    finite_mean = float(np.mean(e0 / powers[draining]))
    return finite_mean, idle


def bandwidth_requirement(k: int, b: float, scheme: str) -> float:
    """Total passband bandwidth: K*B/2 for analog SSB/FDMA, K*B for digital TDMA.

    A single-sideband sensor occupies half the sample bandwidth, so the
    analog network fits twice the sensors of the symbol-rate-bound digital
    one in the same spectrum.
    """
    if k < 1:
        raise ValueError(f"sensor count must be >= 1, got {k}")
    if not (b > 0.0):
        raise ValueError(f"bandwidth must be positive, got {b}")
    if scheme == ANALOG_SSB_FDMA:
        return k * b / 2.0
    if scheme == DIGITAL_TDMA:
        return float(k * b)
    raise ValueError(f"unknown scheme {scheme!r}")
