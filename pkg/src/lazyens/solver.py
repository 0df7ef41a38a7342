"""Maximum-entropy ("lazy") ensemble for a given density matrix.

The ensemble has density ``mu(phi) = exp(-<phi|B|phi>) / Z(B)`` on the unit
sphere.  ``B`` is found by minimizing the convex dual in ``Y = -B``::

    D(Y) = Z(-Y) - Tr(Y rho)

whose stationarity condition is ``E_mu[|phi><phi|] * Z = rho``.  Taking the
trace shows the minimizer has ``Z = 1``.  Since the ensemble average commutes
with unitary conjugation, the optimal ``B`` is diagonal in the eigenbasis of
``rho`` and the problem reduces to ``n`` eigenvalues.  The reduced problem is
solved as ``min_y log Z(-y) - y . lambda`` (same minimizer up to the shift
fixed by ``Z = 1``, and far better conditioned than ``D`` itself), with
safeguarded Newton steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import MismatchedState, NoConvergence
from .hermitian import (
    DensityMatrix,
    SpectralDecomposition,
    as_hermitian,
    eigh,
    validate_density,
)
from .partition import log_partition, partition, partition_gradient

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 200
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    pure_newton_decrement: float = 1e-10


@dataclass(frozen=True)
class LazyEnsemble:
    """Gibbs ensemble on pure states with Hermitian parameter ``B``."""

    B: np.ndarray
    spectral: SpectralDecomposition
    log_z: float

    @classmethod
    def from_matrix(cls, B) -> "LazyEnsemble":
        b = as_hermitian(B)
        sd = eigh(b)
        return cls._build(sd)

    @classmethod
    def from_eigen(cls, values, vectors) -> "LazyEnsemble":
        values = np.asarray(values, dtype=float)
        order = np.argsort(values, kind="stable")
        sd = SpectralDecomposition(values[order], np.asarray(vectors, dtype=complex)[:, order])
        return cls._build(sd)

    @classmethod
    def _build(cls, sd: SpectralDecomposition) -> "LazyEnsemble":
        B = sd.reconstruct()
        B.setflags(write=False)
        return cls(B, sd, log_partition(sd.eigenvalues))

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectral.eigenvalues

    @property
    def absorbed_B(self) -> np.ndarray:
        """``B + log Z(B) I``, the parameter whose partition function is one."""
        return self.B + self.log_z * np.eye(self.n)

    def log_density(self, states: np.ndarray) -> np.ndarray:
        """``ln mu(phi)`` for unit vectors stored as rows of ``states``."""
        states = np.atleast_2d(states)
        quad = np.einsum("si,ij,sj->s", states.conj(), self.B, states).real
        return -quad - self.log_z


@dataclass
class SolveReport:
    iterations: int
    grad_norm: float
    dual_value: float
    converged: bool
    y_min_nonpositive: bool
    y_max_nonnegative: bool
    y_range_bounded: bool
    y_range: float
    range_bound: float
    history: list = field(default_factory=list, repr=False)

    @property
    def bounds_ok(self) -> bool:
        return self.y_min_nonpositive and self.y_max_nonnegative and self.y_range_bounded

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "dual_value": self.dual_value,
            "converged": self.converged,
            "bounds_check": {
                "y_min_nonpositive": self.y_min_nonpositive,
                "y_max_nonnegative": self.y_max_nonnegative,
                "y_range_bounded": self.y_range_bounded,
                "y_range": self.y_range,
                "range_bound": self.range_bound,
            },
        }


def dual_objective(y, lam) -> float:
    """``Z(-y) - y . lam``: the reduced dual, convex in ``y``."""
    y = np.asarray(y, dtype=float)
    return float(np.exp(log_partition(-y)) - y @ np.asarray(lam, dtype=float))


def _reduced_objective(y: np.ndarray, lam: np.ndarray) -> float:
    return log_partition(-y) - float(y @ lam)


def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    n = len(grad)
    # H annihilates (1,...,1); adding the rank-one term makes it definite
    # without changing the step, since grad sums to zero
    try:
        chol = np.linalg.cholesky(hess + np.ones((n, n)) / n)
    except np.linalg.LinAlgError:
        return -grad
    step = -np.linalg.solve(chol.conj().T, np.linalg.solve(chol, grad))
    if not np.all(np.isfinite(step)) or step @ grad >= 0:
        return -grad
    return step


def solve_reduced(lam, config: SolverConfig = SolverConfig(), y0=None):
    """Find ``y`` with ``E[t] = lam`` under the law ``∝ exp(y . t)`` on the simplex.

    Returns ``(y, report)`` with ``y`` shifted so that ``Z(-y) = 1``.
    """
    lam = np.asarray(lam, dtype=float)
    n = len(lam)
    y = np.zeros(n) if y0 is None else np.array(y0, dtype=float)
    history = []
    it = 0
    grad_norm = np.inf
    converged = False
    while True:
        pv = partition(-y, order=2)
        grad = pv.weights - lam
        grad_norm = float(np.max(np.abs(grad)))
        fval = pv.log_z - float(y @ lam)
        history.append((fval, grad_norm))
        if grad_norm <= config.tol:
            converged = True
            break
        if it >= config.max_iter:
            break
        d = _newton_direction(pv.hessian, grad)
        slope = float(grad @ d)
        step = 1.0
        # inside the quadratic region objective decreases fall below roundoff
        # and Armijo can no longer see them; take pure Newton steps there
        backtracks = 0 if -slope <= config.pure_newton_decrement else config.max_backtracks
        for _ in range(backtracks):
            trial = y + step * d
            if _reduced_objective(trial, lam) <= fval + config.armijo * step * slope:
                break
            step *= config.backtrack
        else:
            log.debug("line search stalled at iteration %d", it)
        y = y + step * d
        it += 1
    # log Z(-(y - c)) = log Z(-y) - c, so this shift makes Z = 1
    y = y - log_partition(-y)
    report = _make_report(y, lam, it, grad_norm, converged, history)
    if not converged:
        raise NoConvergence(
            f"dual gradient {grad_norm:.3e} > tol {config.tol:.1e} after {it} iterations",
            payload=(y, report),
        )
    return y, report


def _make_report(y, lam, it, grad_norm, converged, history) -> SolveReport:
    lam_min = float(np.min(lam))
    y_range = float(np.max(y) - np.min(y))
    bound = 2.0 / lam_min if lam_min > 0 else np.inf
    slack = 1e-9
    return SolveReport(
        iterations=it,
        grad_norm=grad_norm,
        dual_value=dual_objective(y, lam),
        converged=converged,
        y_min_nonpositive=bool(np.min(y) <= slack),
        y_max_nonnegative=bool(np.max(y) >= -slack),
        y_range_bounded=bool(y_range <= bound + slack),
        y_range=y_range,
        range_bound=bound,
        history=history,
    )


def _as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else validate_density(rho)


def solve(rho, tol: float = 1e-10, max_iter: int = 200, y0=None) -> tuple[LazyEnsemble, SolveReport]:
    """Lazy ensemble averaging to ``rho``.

    ``tol`` bounds the max-norm of the reduced dual gradient ``|g_k - lambda_k|``.
    ``y0`` is an optional initial iterate for the eigenvalues of ``Y = -B``
    (ordered like the ascending eigenvalues of ``rho``).  On
    :class:`NoConvergence` the payload is ``(LazyEnsemble, SolveReport)`` for
    the last iterate.
    """
    rho = _as_density(rho)
    if tol <= 0:
        raise ValueError("tol must be positive")
    config = SolverConfig(tol=tol, max_iter=max_iter)
    lam = rho.eigenvalues
    u = rho.eigenvectors
    try:
        y, report = solve_reduced(lam, config, y0)
    except NoConvergence as exc:
        y, report = exc.payload
        exc.payload = (LazyEnsemble.from_eigen(-y, u), report)
        raise
    return LazyEnsemble.from_eigen(-y, u), report


def ensemble_average(ens: LazyEnsemble) -> DensityMatrix:
    """``∫ mu(phi) |phi><phi| dphi`` for the ensemble ``ens``."""
    g = partition_gradient(ens.eigenvalues)
    u = ens.spectral.eigenvectors
    order = np.argsort(g, kind="stable")
    sd = SpectralDecomposition(g[order], u[:, order])
    return DensityMatrix(sd.reconstruct(), sd)


def kl_from_uniform(ens: LazyEnsemble, rho, tol: float = 1e-8) -> float:
    """Kullback-Leibler divergence of ``ens`` from the uniform ensemble, nats.

    Uses ``KL = -Tr(B rho) - log Z(B)``; ``rho`` must be the ensemble's average.
    """
    rho_m = rho.matrix if isinstance(rho, DensityMatrix) else as_hermitian(rho)
    avg = ensemble_average(ens).matrix
    err = float(np.linalg.norm(avg - rho_m))
    if err > tol:
        raise MismatchedState(f"ensemble average differs from rho by {err:.3e} (Frobenius)")
    return float(-np.trace(ens.B @ rho_m).real - ens.log_z)
