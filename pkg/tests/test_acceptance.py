"""Exit criteria.  Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL
line per criterion is printed in the terminal summary."""

import json
import math
import time

import numpy as np
import pytest

from lazyens.cli import main
from lazyens.hermitian import random_density
from lazyens.matrix_io import save_matrix
from lazyens.partition import (
    divided_diff_exp,
    log_partition,
    partition_gradient,
    partition_hessian,
)
from lazyens.sampler import estimate_kl, mc_partition_oracle, sample
from lazyens.solver import ensemble_average, kl_from_uniform, solve
from oracles import central_gradient, central_jacobian, simplex_quadrature_3, z_two_point

PRINTED_BETA = 0.3710
PRINTED_PROBS = np.array([0.3476, 0.2396, 0.1654, 0.1143, 0.0788, 0.0543])


def run_cli(capsys, argv):
    t0 = time.perf_counter()
    code = main(argv + ["--json"])
    elapsed = time.perf_counter() - t0
    return code, json.loads(capsys.readouterr().out), elapsed


def test_c1_printed_die_numbers(capsys, criterion):
    main(["die", "--values", "1,2,3,4,5,6", "--mean", "2.5", "--json"])  # warm-up
    capsys.readouterr()
    code, rep, elapsed = run_cli(capsys, ["die", "--values", "1,2,3,4,5,6", "--mean", "2.5"])
    beta_err = abs(rep["beta"] - PRINTED_BETA)
    prob_err = np.abs(np.array(rep["probs"]) - PRINTED_PROBS)
    ok = code == 0 and beta_err <= 5e-4 and np.all(prob_err <= 1e-4) and elapsed < 0.1
    criterion(
        "C1 die M=2.5",
        ok,
        f"beta={rep['beta']:.6f} (err {beta_err:.1e} <= 5e-4: {beta_err <= 5e-4}); "
        f"max prob err {prob_err.max():.2e} <= 1e-4: {bool(np.all(prob_err <= 1e-4))} "
        f"(entries over: {np.flatnonzero(prob_err > 1e-4).tolist()}); {elapsed * 1e3:.1f} ms",
    )
    assert code == 0
    assert beta_err <= 5e-4
    assert elapsed < 0.1
    np.testing.assert_allclose(rep["probs"], PRINTED_PROBS, rtol=0, atol=1e-4)


def test_c2_laplace_case(capsys, criterion):
    code, rep, elapsed = run_cli(capsys, ["die", "--values", "1,2,3,4,5,6", "--mean", "3.5"])
    perr = np.abs(np.array(rep["probs"]) - 1 / 6).max()
    ok = code == 0 and abs(rep["beta"]) <= 1e-10 and perr <= 1e-12 and elapsed < 0.1
    criterion("C2 die M=3.5", ok, f"|beta|={abs(rep['beta']):.1e}, max |p-1/6|={perr:.1e}, {elapsed * 1e3:.1f} ms")
    assert ok


def test_c3_uniform_quantum_state(criterion):
    worst = {"B": 0.0, "logZ": 0.0, "kl": 0.0, "t": 0.0}
    for n in range(2, 9):
        rho = np.eye(n) / n
        t0 = time.perf_counter()
        ens, _ = solve(rho)
        kl = kl_from_uniform(ens, rho)
        dt = time.perf_counter() - t0
        worst["B"] = max(worst["B"], np.linalg.norm(ens.B))
        worst["logZ"] = max(worst["logZ"], abs(ens.log_z))
        worst["kl"] = max(worst["kl"], abs(kl))
        worst["t"] = max(worst["t"], dt)
    ok = worst["B"] <= 1e-8 and worst["logZ"] <= 1e-10 and worst["kl"] <= 1e-10 and worst["t"] < 0.1
    criterion(
        "C3 uniform rho, n=2..8",
        ok,
        f"max ||B||_F={worst['B']:.1e}, |logZ|={worst['logZ']:.1e}, |KL|={worst['kl']:.1e}, "
        f"slowest {worst['t'] * 1e3:.1f} ms",
    )
    assert ok


@pytest.fixture(scope="module")
def random_solves():
    rng = np.random.default_rng(4)
    cases = []
    t0 = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(2, 9))
        rho = random_density(n, rng, 0.02)
        ens, rep = solve(rho)
        cases.append((rho, ens, rep))
    total = time.perf_counter() - t0
    return cases, total


def test_c4_roundtrip(random_solves, criterion):
    cases, total = random_solves
    resid = max(np.linalg.norm(ensemble_average(ens).matrix - rho) for rho, ens, _ in cases)
    comm = max(np.linalg.norm(ens.B @ rho - rho @ ens.B) for rho, ens, _ in cases)
    ok = resid <= 1e-8 and comm <= 1e-8 and total < 10
    criterion(
        "C4 roundtrip, 100 random rho",
        ok,
        f"max residual {resid:.1e}, max commutator {comm:.1e}, total {total:.2f} s",
    )
    assert ok


def test_c5_eigenvalue_bounds(random_solves, criterion):
    cases, _ = random_solves
    fails = 0
    tightest = 0.0
    for rho, ens, _ in cases:
        y = np.sort(-ens.eigenvalues)
        lmin = np.linalg.eigvalsh(rho)[0]
        good = y[0] <= 1e-9 and y[-1] >= -1e-9 and y[-1] - y[0] <= 2 / lmin + 1e-9
        fails += not good
        tightest = max(tightest, (y[-1] - y[0]) * lmin / 2)
    criterion("C5 bounds on y", fails == 0, f"{fails} violations; max (y_n-y_1)/(2/lambda_1) = {tightest:.3f}")
    assert fails == 0


def test_c6_partition_function(criterion):
    rng = np.random.default_rng(6)
    # (a) two-point closed form
    err_a = 0.0
    for _ in range(100):
        b = rng.uniform(-10, 10, 2)
        err_a = max(err_a, abs(math.exp(log_partition(b)) / z_two_point(*b) - 1))
    # (b) three-point quadrature
    err_b = 0.0
    for b in [np.array([1.0, 2.0, 5.0])] + [rng.uniform(-6, 6, 3) for _ in range(5)]:
        err_b = max(err_b, abs(math.exp(log_partition(b)) / simplex_quadrature_3(b) - 1))
    # (c) sphere Monte Carlo, 1e7 draws
    zmax = 0.0
    for n in (2, 3, 4):
        b = rng.uniform(-10, 10, n)
        est, se = mc_partition_oracle(b, 10**7, 60 + n)
        zmax = max(zmax, abs(est - math.exp(log_partition(b))) / se)
    # (d) clustered nodes against the coincidence limit
    err_d = 0.0
    for gap in (1e-10, 1e-11, 1e-12):
        for a in (-4.0, 0.0, 3.0):
            limit = divided_diff_exp([a, a])
            err_d = max(err_d, abs(divided_diff_exp([a, a + gap]) / limit - 1))
            limit3 = divided_diff_exp([a, a, a, a - 2.0])
            err_d = max(err_d, abs(divided_diff_exp([a, a + gap, a - gap, a - 2.0]) / limit3 - 1))
            lz = log_partition([a, a, 1.5, -2.0])
            err_d = max(err_d, abs(log_partition([a, a + gap, 1.5, -2.0]) - lz))
    ok = err_a <= 1e-12 and err_b <= 1e-10 and zmax <= 4 and err_d <= 1e-9
    criterion(
        "C6 partition function",
        ok,
        f"(a) {err_a:.1e} (b) {err_b:.1e} (c) max z {zmax:.2f} (d) {err_d:.1e}",
    )
    assert ok


def test_c7_finite_differences(criterion):
    rng = np.random.default_rng(7)
    eg = eh = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 7))
        b = rng.uniform(-5, 5, n)
        g = -central_gradient(log_partition, b, 1e-5)
        h = -central_jacobian(partition_gradient, b, 1e-5)
        eg = max(eg, np.abs(g - partition_gradient(b)).max())
        eh = max(eh, np.abs(h - partition_hessian(b)).max())
    ok = eg <= 1e-6 and eh <= 1e-5
    criterion("C7 gradient/Hessian vs finite differences", ok, f"grad {eg:.1e}, hessian {eh:.1e}")
    assert ok


def test_c8_sampler_verification(capsys, tmp_path, criterion):
    t0 = time.perf_counter()
    rhos = {"diag(0.7,0.3)": np.diag([0.7, 0.3]), "random n=4": random_density(4, np.random.default_rng(8), 0.05)}
    details = []
    ok = True
    for seed, (name, rho) in enumerate(rhos.items(), start=1):
        path = tmp_path / f"rho{seed}.json"
        save_matrix(path, rho)
        code, rep, _ = run_cli(capsys, ["verify", str(path), "--count", "1000000", "--seed", str(seed)])
        ens, _ = solve(rho)
        est, se = estimate_kl(ens, sample(ens, 10**6, 100 + seed))
        kl_z = abs(est - kl_from_uniform(ens, rho)) / se
        ok &= code == 0 and rep["max_abs_z"] <= 4 and kl_z <= 4
        details.append(f"{name}: max|z|={rep['max_abs_z']:.2f}, KL z={kl_z:.2f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    criterion("C8 sampler verification", ok, "; ".join(details) + f"; {elapsed:.1f} s")
    assert ok


def test_c9_determinism(capsys, tmp_path, criterion):
    rho = random_density(3, np.random.default_rng(9), 0.05)
    ens, _ = solve(rho)
    a = sample(ens, 100_000, 77)
    b = sample(ens, 100_000, 77, workers=4)
    same_batch = a.states.tobytes() == b.states.tobytes() and a.empirical_mean.tobytes() == b.empirical_mean.tobytes()
    path = tmp_path / "rho.json"
    save_matrix(path, rho)
    outputs = []
    for _ in range(2):
        for argv in (["solve", str(path)], ["verify", str(path), "--count", "50000", "--seed", "5"],
                     ["zfun", "--b", "0.3,1,2"], ["die", "--mean", "2.5"]):
            main(argv + ["--json"])
            outputs.append(capsys.readouterr().out)
    same_cli = outputs[:4] == outputs[4:]
    ok = same_batch and same_cli
    criterion("C9 determinism", ok, f"batches identical: {same_batch}, CLI reports identical: {same_cli}")
    assert ok
