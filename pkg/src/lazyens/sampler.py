"""Exact sampling from a lazy ensemble and Monte Carlo cross-checks.

Sampling works in the eigenbasis of ``B``: ``t = |phi_k|^2`` is drawn from the
tilted simplex law ``∝ exp(-b . t)`` by rejection against the uniform simplex
(envelope ``exp(-min(b))``), phases are independent and uniform, and the
amplitude vector is rotated back by the eigenvector matrix.

Random streams
--------------
The sample index range is cut into fixed chunks of :data:`CHUNK` draws.
Chunk ``c`` of a run with seed ``s`` uses a Philox4x64 generator (counter
based) keyed by ``SeedSequence([s, c])``.  Chunks are independent of how many
worker threads process them and are merged in chunk order, so the result
does not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .solver import LazyEnsemble

CHUNK = 1 << 16
THREADS_ENV = "LAZYENS_THREADS"


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Philox generator for chunk ``index`` of the run seeded by ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _chunks(count: int) -> list[tuple[int, int]]:
    return [(c, min(CHUNK, count - c * CHUNK)) for c in range(-(-count // CHUNK))]


def _map_chunks(fn, count: int, workers: int | None):
    chunks = _chunks(count)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(chunks) == 1:
        return [fn(c, m) for c, m in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cm: fn(*cm), chunks))


def uniform_states(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-uniform unit vectors in C^n, one per row."""
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_uniform_state(n: int, rng: np.random.Generator | int) -> np.ndarray:
    """One Haar-uniform unit vector (normalized standard complex normal)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = stream(int(rng))
    return uniform_states(n, 1, rng)[0]


def uniform_simplex(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    e = rng.standard_exponential((count, n))
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class SampleBatch:
    """Seeded draws from an ensemble with projector-average statistics.

    ``stderr_re``/``stderr_im`` are the entrywise standard errors of the real
    and imaginary parts of ``empirical_mean``.
    """

    seed: int
    count: int
    states: np.ndarray | None
    empirical_mean: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    proposals: int

    @property
    def accept_rate(self) -> float:
        return self.count / self.proposals

    @property
    def n(self) -> int:
        return self.empirical_mean.shape[0]

    def z_scores(self, rho) -> tuple[np.ndarray, np.ndarray]:
        """Entrywise z-scores of ``empirical_mean - rho`` (real, imaginary)."""
        diff = self.empirical_mean - np.asarray(rho, dtype=complex)
        return _safe_ratio(diff.real, self.stderr_re), _safe_ratio(diff.imag, self.stderr_im)

    def max_abs_z(self, rho) -> float:
        zr, zi = self.z_scores(rho)
        return float(max(np.max(np.abs(zr)), np.max(np.abs(zi))))


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # zero s.e. happens for exactly determined entries (imaginary diagonal, B = 0 with n = 1)
    out = np.zeros_like(num)
    pos = den > 0
    out[pos] = num[pos] / den[pos]
    bad = ~pos & (np.abs(num) > 1e-12)
    out[bad] = np.inf
    return out


def _projector_sums(states: np.ndarray):
    s1 = states.T @ states.conj()
    mod2 = np.abs(states) ** 2
    sq = states**2
    a = mod2.T @ mod2
    c = (sq.T @ sq.conj()).real
    return s1, 0.5 * (a + c), 0.5 * (a - c)


def _draw_tilted(shifted_b: np.ndarray, m: int, rng: np.random.Generator):
    n = len(shifted_b)
    out = np.empty((m, n))
    filled = 0
    proposals = 0
    rate = 1.0
    while filled < m:
        k = int((m - filled) / max(rate, 1e-6) * 1.1) + 16
        k = min(k, 1 << 20)
        t = uniform_simplex(n, k, rng)
        u = rng.random(k)
        idx = np.flatnonzero(u < np.exp(-(t @ shifted_b)))
        take = min(len(idx), m - filled)
        out[filled : filled + take] = t[idx[:take]]
        # proposals past the last one used are not counted
        proposals += int(idx[take - 1]) + 1 if take < len(idx) else k
        filled += take
        rate = max(filled / proposals, 1e-6) if proposals else 1.0
    return out, proposals


def sample(
    ens: LazyEnsemble,
    count: int,
    seed: int,
    *,
    keep_states: bool = True,
    workers: int | None = None,
) -> SampleBatch:
    """Draw ``count`` i.i.d. states from ``ens``; deterministic in ``seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    b = ens.eigenvalues
    u = ens.spectral.eigenvectors
    shifted = b - b.min()
    n = len(b)

    def run(c: int, m: int):
        rng = stream(seed, c)
        t, props = _draw_tilted(shifted, m, rng)
        theta = rng.uniform(0.0, 2.0 * np.pi, (m, n))
        amps = np.sqrt(t) * np.exp(1j * theta)
        states = amps @ u.T
        return states, props, _projector_sums(states)

    parts = _map_chunks(run, count, workers)
    s1 = np.zeros((n, n), dtype=complex)
    s2re = np.zeros((n, n))
    s2im = np.zeros((n, n))
    proposals = 0
    for _, props, (a1, a2, a3) in parts:
        s1 += a1
        s2re += a2
        s2im += a3
        proposals += props
    mean = s1 / count
    mean = 0.5 * (mean + mean.conj().T)
    var_re = np.maximum(s2re / count - mean.real**2, 0.0)
    var_im = np.maximum(s2im / count - mean.imag**2, 0.0)
    states = np.concatenate([p[0] for p in parts]) if keep_states else None
    return SampleBatch(
        seed=seed,
        count=count,
        states=states,
        empirical_mean=mean,
        stderr_re=np.sqrt(var_re / count),
        stderr_im=np.sqrt(var_im / count),
        proposals=proposals,
    )


def estimate_kl(ens: LazyEnsemble, batch: SampleBatch) -> tuple[float, float]:
    """Sample mean and standard error of ``ln mu(phi)`` over the batch."""
    if batch.states is None:
        raise ValueError("batch was drawn with keep_states=False")
    ld = ens.log_density(batch.states)
    se = float(ld.std(ddof=1) / np.sqrt(len(ld))) if len(ld) > 1 else 0.0
    return float(ld.mean()), se


def mc_partition_oracle(b, count: int, seed: int, *, workers: int | None = None):
    """Monte Carlo ``Z(b) = E[exp(-sum_k b_k |phi_k|^2)]`` over Haar-uniform
    sphere draws.

    ``b`` may be a single vector or a ``(k, n)`` stack evaluated on the same
    draws; returns ``(estimate, std_error)`` with matching shape.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    bb = np.atleast_2d(np.asarray(b, dtype=float))
    n = bb.shape[1]

    def run(c: int, m: int):
        t = np.abs(uniform_states(n, m, stream(seed, c))) ** 2
        w = np.exp(-(t @ bb.T))
        return w.sum(axis=0), (w * w).sum(axis=0)

    parts = _map_chunks(run, count, workers)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    est = s1 / count
    var = np.maximum(s2 / count - est**2, 0.0)
    se = np.sqrt(var / max(count - 1, 1))
    if np.ndim(b) == 1:
        return float(est[0]), float(se[0])
    return est, se


def write_states_csv(path, batch: SampleBatch) -> None:
    """Dump states as rows of ``2n`` reals (re, im interleaved) after a header
    line ``n,count,seed``."""
    if batch.states is None:
        raise ValueError("batch has no stored states")
    n = batch.n
    inter = np.empty((batch.count, 2 * n))
    inter[:, 0::2] = batch.states.real
    inter[:, 1::2] = batch.states.imag
    with open(path, "w") as fh:
        fh.write(f"# n={n},count={batch.count},seed={batch.seed}\n")
        np.savetxt(fh, inter, fmt="%.17g", delimiter=",")


def read_states_csv(path) -> tuple[dict, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().lstrip("#").strip()
        meta = {k: int(v) for k, v in (kv.split("=") for kv in header.split(","))}
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    states = data[:, 0::2] + 1j * data[:, 1::2]
    return meta, states
