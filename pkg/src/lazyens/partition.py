"""Partition function of the Gibbs ensemble on the complex unit sphere.

For a Hermitian ``B`` with eigenvalues ``b`` the normalized sphere integral
``Z(b) = E[exp(-<phi|B|phi>)]`` depends only on ``t_k = |phi_k|^2`` in the
eigenbasis, and ``t`` is uniform on the probability simplex.  Simplex
integrals of exponentials are divided differences of ``exp`` (Hermite-Genocchi),
which gives, with ``x = -b``::

    Z(b)                 = (n-1)! exp[x_1..x_n]
    E[t_k e^{-b.t}] / Z  = exp[x, x_k] / exp[x]
    E[t_i t_j e^{-b.t}]/Z = (1 + [i == j]) exp[x, x_i, x_j] / exp[x]

where ``exp[...]`` is the divided difference over the listed nodes (repeated
nodes are confluent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_TAYLOR_EXTRA = 30


def _as_nodes(nodes) -> np.ndarray:
    x = np.atleast_1d(np.asarray(nodes, dtype=float))
    if x.size == 0:
        raise ValueError("need at least one node")
    if not np.all(np.isfinite(x)):
        raise ValueError("nodes must be finite")
    return x


def log_divided_diff_exp_batch(nodes) -> np.ndarray:
    """Log of the divided difference of ``exp`` for each row of ``nodes``.

    ``nodes`` has shape ``(k, m)``.  Uses the bidiagonal matrix whose diagonal
    holds the nodes and superdiagonal holds ones: the top-right entry of its
    exponential is the divided difference.  The exponential is computed by
    scaling and squaring with the nodes shifted to be non-negative, so every
    Taylor term and every product is entrywise non-negative and there is no
    cancellation.  After each squaring the superdiagonal scaling is undone
    (entry ``(i, j)`` times ``2**(i - j)``) and the matrix is renormalized by
    its largest entry, so the result cannot overflow.
    """
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValueError("nodes must have shape (k, m) with m >= 1")
    if not np.all(np.isfinite(x)):
        raise ValueError("nodes must be finite")
    k, m = x.shape
    shift = x.min(axis=1)
    z = x - shift[:, None]
    if m == 1:
        return shift.copy()

    zmax = float(z.max())
    s = 0 if zmax <= 0.5 else int(math.ceil(math.log2(zmax / 0.5)))
    w = z / 2.0**s

    eye = np.eye(m)
    a = np.zeros((k, m, m))
    a[:, np.arange(m), np.arange(m)] = w
    a[:, np.arange(m - 1), np.arange(1, m)] = 1.0

    f = np.broadcast_to(eye, (k, m, m)).copy()
    for j in range(m + _TAYLOR_EXTRA, 0, -1):
        f = eye + (a @ f) / j

    ii, jj = np.indices((m, m))
    halving = np.where(jj >= ii, 2.0 ** (ii - jj).astype(float), 0.0)
    logscale = np.zeros(k)
    for _ in range(s):
        f = (f @ f) * halving
        top = f.max(axis=(1, 2))
        f /= top[:, None, None]
        logscale = 2.0 * logscale + np.log(top)
    return shift + logscale + np.log(f[:, 0, m - 1])


def log_divided_diff_exp(nodes) -> float:
    """Log of the (possibly confluent) divided difference of ``exp``."""
    x = _as_nodes(nodes)
    return float(log_divided_diff_exp_batch(x[None, :])[0])


def divided_diff_exp(nodes, multiplicities=None) -> float:
    """Divided difference of ``x -> e^x`` over ``nodes``.

    Repeated nodes give the confluent (Hermite) divided difference; they can be
    passed literally or via ``multiplicities``.

    >>> round(divided_diff_exp([0.0, 1.0]), 12) == round(math.e - 1, 12)
    True
    """
    x = _as_nodes(nodes)
    if multiplicities is not None:
        x = np.repeat(x, np.asarray(multiplicities, dtype=int))
    return math.exp(log_divided_diff_exp(x))


def divided_diff_exp_naive(nodes) -> float:
    """Textbook recursion for pairwise distinct nodes.  Loses accuracy when
    nodes cluster; kept as a cross-check for well separated nodes."""
    x = _as_nodes(nodes)
    if len(np.unique(x)) != len(x):
        raise ValueError("naive recursion needs distinct nodes")
    col = np.exp(x)
    for level in range(1, len(x)):
        col = (col[1:] - col[:-1]) / (x[level:] - x[:-level])
    return float(col[0])


@dataclass(frozen=True)
class PartitionValue:
    """``log Z(b)`` with its derivatives.

    ``weights`` are the ensemble-average eigenvalues ``E_mu[t_k]``, i.e. minus
    the gradient of ``log Z``.  ``hessian`` is the Hessian of ``log Z``, equal
    to the covariance of ``t`` under the tilted simplex law.
    """

    log_z: float
    weights: np.ndarray
    hessian: np.ndarray | None = None

    @property
    def gradient(self) -> np.ndarray:
        return -self.weights


def _eigen_input(b) -> np.ndarray:
    b = _as_nodes(b)
    return b


def log_partition(b) -> float:
    """``log Z(b)`` for the normalized unitary-invariant sphere measure."""
    x = -_eigen_input(b)
    n = len(x)
    return math.lgamma(n) + log_divided_diff_exp(x)


def _weights(x: np.ndarray, log_base: float) -> np.ndarray:
    n = len(x)
    ext = np.concatenate([np.broadcast_to(x, (n, n)), x[:, None]], axis=1)
    return np.exp(log_divided_diff_exp_batch(ext) - log_base)


def partition_gradient(b) -> np.ndarray:
    """``g_k = E[t_k e^{-b.t}] / Z(b)``; sums to one, equals ``-d log Z / d b_k``."""
    x = -_eigen_input(b)
    if len(x) == 1:
        return np.ones(1)
    g = _weights(x, log_divided_diff_exp(x))
    return g / g.sum()


def _second_moments(x: np.ndarray, log_base: float) -> np.ndarray:
    n = len(x)
    iu, ju = np.triu_indices(n)
    base = np.broadcast_to(x, (len(iu), n))
    ext = np.concatenate([base, x[iu, None], x[ju, None]], axis=1)
    vals = np.exp(log_divided_diff_exp_batch(ext) - log_base)
    vals = vals * np.where(iu == ju, 2.0, 1.0)
    out = np.empty((n, n))
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out


def partition_hessian(b) -> np.ndarray:
    """Hessian of ``log Z(b)``: ``Cov(t_i, t_j)`` under the tilted simplex law.

    Symmetric positive semidefinite; ``(1, ..., 1)`` is its null direction.
    """
    return partition(b, order=2).hessian


def partition(b, order: int = 2) -> PartitionValue:
    """Evaluate ``log Z``, weights and (for ``order=2``) the Hessian together."""
    x = -_eigen_input(b)
    n = len(x)
    log_base = log_divided_diff_exp(x)
    log_z = math.lgamma(n) + log_base
    if n == 1:
        return PartitionValue(log_z, np.ones(1), np.zeros((1, 1)) if order >= 2 else None)
    g = _weights(x, log_base)
    hess = None
    if order >= 2:
        mom = _second_moments(x, log_base)
        hess = mom - np.outer(g, g)
        hess = 0.5 * (hess + hess.T)
    return PartitionValue(log_z, g / g.sum(), hess)
