"""Hermitian matrix helpers: cyclic Jacobi eigensolver, conjugation, and
density-matrix validation.

Everything here works on plain ``numpy`` arrays.  Validated objects
(:class:`SpectralDecomposition`, :class:`DensityMatrix`) hold read-only copies
so they can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    Degenerate,
    NoConvergence,
    NotHermitian,
    NotPositive,
    NotSquare,
    NotUnitary,
    NotUnitTrace,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
DEGENERACY_TOL = 1e-10
UNITARY_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self, values=None) -> np.ndarray:
        """Return ``U diag(values) U^dagger`` (defaults to the eigenvalues)."""
        u = self.eigenvectors
        v = self.eigenvalues if values is None else np.asarray(values)
        return hermitian_part((u * v) @ u.conj().T)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive, unit-trace matrix with its spectral data."""

    matrix: np.ndarray
    spectral: SpectralDecomposition

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectral.eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.spectral.eigenvectors

    @property
    def min_eigenvalue(self) -> float:
        return float(self.spectral.eigenvalues[0])


def as_square(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotSquare(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotSquare("matrix has non-finite entries")
    return a


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def as_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Check Hermiticity entrywise to ``tol`` and return the exact symmetrization."""
    a = as_square(m)
    err = float(np.max(np.abs(a - a.conj().T)))
    if err > tol:
        raise NotHermitian(f"max |m_ij - conj(m_ji)| = {err:.3e} exceeds {tol:.1e}")
    return hermitian_part(a)


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    r = abs(apq)
    phase = apq / r
    tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # V = D R D^dagger with D = diag(1, conj(phase)) acting on (p, q)
    rot = np.array([[c, s * phase], [-s * np.conj(phase), c]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ rot
    a[idx, :] = rot.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ rot


def eigh(m, tol: float = 1e-15, max_sweeps: int = 60) -> SpectralDecomposition:
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Sweeps over all off-diagonal pivots until the off-diagonal Frobenius
    norm drops below ``tol * ||m||_F``.  Raises :class:`NoConvergence` when
    ``max_sweeps`` is exhausted.
    """
    a = as_hermitian(m)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    # 1e-15 is below roundoff for larger n; never ask for better than ~n ulps
    target = max(tol, 4.0 * n * np.finfo(float).eps) * scale
    sweeps = 0
    iu = np.triu_indices(n, 1)
    while True:
        off = np.sqrt(2.0) * float(np.linalg.norm(a[iu]))
        if off <= target:
            break
        if sweeps >= max_sweeps:
            raise NoConvergence(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})",
                payload=(np.real(np.diag(a)).copy(), v.copy()),
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > 1e-300:
                    _jacobi_rotate(a, v, p, q)
        sweeps += 1
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order], sweeps)


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))) <= tol


def conjugate(m, u, tol: float = UNITARY_TOL) -> np.ndarray:
    """Return ``u m u^dagger`` for Hermitian ``m`` and unitary ``u``."""
    a = as_hermitian(m)
    u = as_square(u)
    if u.shape != a.shape:
        raise NotUnitary(f"shape mismatch: {u.shape} vs {a.shape}")
    if not is_unitary(u, tol):
        raise NotUnitary("u^dagger u differs from identity")
    return hermitian_part(u @ a @ u.conj().T)


def validate_density(
    m,
    tol: float = DEGENERACY_TOL,
    *,
    hermitian_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    positivity_tol: float = POSITIVITY_TOL,
) -> DensityMatrix:
    """Validate ``m`` as a nondegenerate density matrix.

    Raises, in this order of checks, :class:`NotSquare`,
    :class:`NotHermitian`, :class:`NotUnitTrace`, :class:`NotPositive`
    (an eigenvalue below ``-positivity_tol``) and :class:`Degenerate`
    (smallest eigenvalue ``<= tol``).
    """
    a = as_hermitian(m, hermitian_tol)
    tr = float(np.trace(a).real)
    if abs(tr - 1.0) > trace_tol:
        raise NotUnitTrace(f"trace is {tr:.12g}, expected 1")
    sd = eigh(a)
    lmin = float(sd.eigenvalues[0])
    if lmin < -positivity_tol:
        raise NotPositive(f"smallest eigenvalue {lmin:.3e} is negative")
    if lmin <= tol:
        raise Degenerate(f"smallest eigenvalue {lmin:.3e} <= {tol:.1e}; density matrix is degenerate")
    return DensityMatrix(a, sd)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(n: int, rng: np.random.Generator, min_eigenvalue: float = 0.0) -> np.ndarray:
    """Random density matrix with spectrum bounded below by ``min_eigenvalue``
    in a Haar-random eigenbasis."""
    if min_eigenvalue * n >= 1.0:
        raise ValueError("min_eigenvalue * n must be < 1")
    w = rng.dirichlet(np.ones(n))
    lam = min_eigenvalue + (1.0 - n * min_eigenvalue) * w
    u = random_unitary(n, rng)
    return hermitian_part((u * lam) @ u.conj().T)
