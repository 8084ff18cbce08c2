"""Squared-norm power minimization via a log-barrier interior method.

The squared-norm objective sum_k (w^2 alpha_k)^2 maps to a smooth convex
function of the precisions over {sum r >= 1/D0, 0 <= r_k < 1/sigma2_k};
the objective is increasing in every coordinate, so the sum constraint
binds and we solve the equality-constrained barrier subproblems

    minimize  t * f(r)/f0 - sum log r_k - sum log(1/sigma2_k - r_k)
    such that sum r = 1/D0

with an infeasible-start Newton method (diagonal Hessian plus one dense
row, solved in closed form).  The multiplier path is followed until the
scale-free KKT residual drops below the requested tolerance.  Unlike the
total-power problem the gradient vanishes at r_k = 0, so the optimum
never shuts a sensor off exactly; negligible coordinates are zeroed at
the end to produce clean inactive entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InfeasibleError
from .model import (FEASIBILITY_MARGIN, L2, Allocation, ProblemSpec,
                    distortion_floor, make_allocation)
from .objectives import r_space_objective

#: Coordinates below this fraction of their box width count as shut off.
INACTIVE_FRACTION = 1e-14


@dataclass(frozen=True)
class L2SolverOptions:
    kkt_tolerance: float = 1e-9
    max_iterations: int = 200          # outer barrier stages
    barrier_decrease: float = 0.1      # t <- t / barrier_decrease per stage
    initial_margin: float = 0.05       # start clipped to (1-margin)/sigma2

    def __post_init__(self):
        if not (self.kkt_tolerance > 0.0):
            raise ValueError("kkt_tolerance must be positive")
        if not 0.0 < self.barrier_decrease < 1.0:
            raise ValueError("barrier_decrease must lie in (0, 1)")
        if not 0.0 < self.initial_margin < 1.0:
            raise ValueError("initial_margin must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def kkt_residual_l2(r, prob: ProblemSpec) -> float:
    """Scale-free optimality residual at a strictly interior point.

    Stationarity requires every partial derivative of the squared-norm
    objective to match the sum-constraint multiplier mu; the residual is
    the largest relative deviation from the mean gradient plus the
    relative slack of the sum constraint.  Zero exactly at the optimum.
    """
    net = prob.network
    r = np.asarray(r, dtype=float)
    if r.shape != (net.k,):
        raise ValueError(f"r has shape {r.shape}, expected ({net.k},)")
    ub = 1.0 / net.sigma2s()
    if np.any(r <= 0.0) or np.any(r >= ub):
        raise ValueError("r must lie strictly inside the box (0, 1/sigma2)")
    grad = r_space_objective(net, L2).grad(r)
    mu = float(np.mean(grad))
    stationarity = float(np.max(np.abs(grad - mu))) / mu
    primal = abs(float(np.sum(r)) * prob.d0 - 1.0)
    return stationarity + primal


def solve_l2(prob: ProblemSpec, opts: L2SolverOptions | None = None) -> Allocation:
    """Minimize the squared norm of the per-node power terms."""
    if prob.norm != L2:
        raise ValueError(f"solve_l2 requires norm {L2!r}, got {prob.norm!r}")
    opts = L2SolverOptions() if opts is None else opts
    net = prob.network
    floor = distortion_floor(net)
    if prob.d0 <= floor * (1.0 + FEASIBILITY_MARGIN):
        raise InfeasibleError(
            f"distortion target {prob.d0!r} does not clear the floor {floor!r}",
            floor=floor)

    obj = r_space_objective(net, L2)
    sigma2 = net.sigma2s()
    ub = 1.0 / sigma2
    target = 1.0 / prob.d0

    # Proportional-to-precision start: r0 = c/sigma2 sums to the target and
    # sits strictly inside the box because c = floor/d0 < 1; the clip only
    # bites for targets within initial_margin of the floor, and the Newton
    # step restores the sum constraint from such a start.
    scale = min(floor / prob.d0, 1.0 - opts.initial_margin)
    r = scale / sigma2
    f0 = obj.value(r)

    t = 1.0
    nu = 0.0
    residual = math.inf
    for _ in range(opts.max_iterations):
        r, nu = _center(obj, f0, r, nu, t, ub, target)
        residual = kkt_residual_l2(r, prob)
        if residual <= opts.kkt_tolerance:
            cleaned = np.where(r < INACTIVE_FRACTION * ub, 0.0, r)
            mu = float(np.mean(obj.grad(r)))
            return make_allocation(net, r=cleaned, norm=L2, lambda0=mu)
        t /= opts.barrier_decrease
        nu /= opts.barrier_decrease
    raise ConvergenceError(
        f"barrier method exhausted {opts.max_iterations} stages with "
        f"KKT residual {residual:.3e}", residual=residual)


def _center(obj, f0: float, r: np.ndarray, nu: float, t: float,
            ub: np.ndarray, target: float, max_newton: int = 60):
    """Newton-center the barrier subproblem at parameter t.

    Solves the KKT system of the equality-constrained barrier problem for
    (step, multiplier) jointly; the residual-norm backtracking accepts
    infeasible starts and restores sum(r) = target along the way.
    """
    for _ in range(max_newton):
        grad = t * obj.grad(r) / f0 - 1.0 / r + 1.0 / (ub - r)
        hess = t * obj.hess_diag(r) / f0 + 1.0 / r ** 2 + 1.0 / (ub - r) ** 2
        dual = grad + nu
        primal = float(np.sum(r)) - target
        norm0 = math.sqrt(float(dual @ dual) + primal * primal)
        scale = 1.0 + float(np.max(np.abs(grad)))
        if norm0 <= 1e-11 * scale:
            break

        inv_h = 1.0 / hess
        dnu = (primal - float(np.sum(dual * inv_h))) / float(np.sum(inv_h))
        dr = -(dual + dnu) * inv_h

        neg = dr < 0.0
        pos = dr > 0.0
        caps = np.concatenate([r[neg] / -dr[neg], (ub - r)[pos] / dr[pos]])
        step = 1.0 if caps.size == 0 else min(1.0, 0.99 * float(np.min(caps)))
        accepted = False
        for _ in range(60):
            r_new = r + step * dr
            nu_new = nu + step * dnu
            dual_new = (t * obj.grad(r_new) / f0 - 1.0 / r_new
                        + 1.0 / (ub - r_new) + nu_new)
            primal_new = float(np.sum(r_new)) - target
            norm_new = math.sqrt(float(dual_new @ dual_new)
                                 + primal_new * primal_new)
            if norm_new <= (1.0 - 1e-4 * step) * norm0:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        r = r + step * dr
        nu = nu + step * dnu
    return r, nu
