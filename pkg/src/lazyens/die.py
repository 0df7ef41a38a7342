"""Maximum-entropy distribution over a finite value set with a fixed mean.

The solution is ``p_k = exp(-beta A_k) / Z``; ``beta`` is the root of the
strictly decreasing map ``beta -> E_beta[A]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateValues, InfeasibleMean, NoConvergence


@dataclass(frozen=True)
class GibbsDie:
    values: np.ndarray
    beta: float
    probs: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.values @ self.probs)

    @property
    def entropy(self) -> float:
        return shannon_entropy(self.probs)


def gibbs_probs(values, beta: float) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    e = -beta * a
    w = np.exp(e - e.max())
    return w / w.sum()


def _mean_and_var(a: np.ndarray, beta: float) -> tuple[float, float]:
    p = gibbs_probs(a, beta)
    m = float(a @ p)
    return m, float(p @ (a - m) ** 2)


def shannon_entropy(p) -> float:
    """``-sum p log p`` in nats, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz @ np.log(nz)))


def solve_beta(values, mean: float, tol: float = 1e-13, max_iter: int = 200) -> GibbsDie:
    """Inverse temperature reproducing ``mean`` as the Gibbs average of ``values``.

    Brackets the root by doubling from ``[-1, 1]``, then runs Newton steps
    that fall back to bisection whenever they leave the bracket.
    """
    a = np.asarray(values, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise DegenerateValues("need at least two values")
    if not np.all(np.isfinite(a)) or not math.isfinite(mean):
        raise ValueError("values and mean must be finite")
    lo_a, hi_a = float(a.min()), float(a.max())
    if lo_a == hi_a:
        raise DegenerateValues("all values are equal")
    if not lo_a < mean < hi_a:
        raise InfeasibleMean(f"mean {mean} is outside the open interval ({lo_a}, {hi_a})")

    # scale-free tolerance on the mean
    mtol = tol * max(1.0, abs(lo_a), abs(hi_a))

    def f(beta):
        m, v = _mean_and_var(a, beta)
        return m - mean, v

    lo, hi = -1.0, 1.0
    while f(lo)[0] < 0:
        lo *= 2.0
        if lo < -1e300:
            raise NoConvergence("could not bracket beta from below")
    while f(hi)[0] > 0:
        hi *= 2.0
        if hi > 1e300:
            raise NoConvergence("could not bracket beta from above")

    beta = 0.0 if lo < 0.0 < hi else 0.5 * (lo + hi)
    for _ in range(max_iter):
        r, v = f(beta)
        if abs(r) <= mtol:
            return GibbsDie(a, beta, gibbs_probs(a, beta))
        # mean is decreasing in beta
        if r > 0:
            lo = beta
        else:
            hi = beta
        cand = beta + r / v if v > 0 else math.nan
        beta = cand if lo < cand < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(beta)):
            return GibbsDie(a, beta, gibbs_probs(a, beta))
    raise NoConvergence(f"beta iteration did not converge in {max_iter} steps")
