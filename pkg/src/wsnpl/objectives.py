"""Power objectives as functions of the precision vector r.

Substituting r_k = 1/(sigma2_k + xi2_k/(g_k alpha_k)) turns the per-node
objective term w^2 alpha_k into c_k r_k/(1 - sigma2_k r_k) with
c_k = w^2 xi2_k / g_k, which is convex and increasing on [0, 1/sigma2_k).
The squared-norm objective sums the squares of the same terms.  The
solvers and oracles all consume these callables; values and derivatives
are vectorized over leading axes so grid oracles can batch-evaluate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import L1, L2, NORMS, NetworkInstance


@dataclass(frozen=True)
class RSpaceObjective:
    coeff: np.ndarray            # c_k = w^2 xi2_k / g_k
    sigma2: np.ndarray
    norm: str

    def value(self, r) -> np.ndarray | float:
        r = np.asarray(r, dtype=float)
        slack = 1.0 - self.sigma2 * r
        term = self.coeff * r / slack
        if self.norm == L2:
            term = term ** 2
        out = np.sum(term, axis=-1)
        return float(out) if out.ndim == 0 else out

    def grad(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        slack = 1.0 - self.sigma2 * r
        if self.norm == L1:
            return self.coeff / slack ** 2
        return 2.0 * self.coeff ** 2 * r / slack ** 3

    def hess_diag(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        slack = 1.0 - self.sigma2 * r
        if self.norm == L1:
            return 2.0 * self.coeff * self.sigma2 / slack ** 3
        return 2.0 * self.coeff ** 2 * (1.0 + 2.0 * self.sigma2 * r) / slack ** 4


def r_space_objective(net: NetworkInstance, norm: str) -> RSpaceObjective:
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    coeff = net.w ** 2 * net.xi2s() / net.gains()
    return RSpaceObjective(coeff=coeff, sigma2=net.sigma2s(), norm=norm)
