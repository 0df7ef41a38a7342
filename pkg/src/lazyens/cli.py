"""Command-line front end.

Exit codes: 0 ok, 2 invalid input, 3 solver did not converge, 4 statistical
check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .die import shannon_entropy, solve_beta
from .errors import NoConvergence, ValidationError
from .hermitian import validate_density
from .matrix_io import load_matrix, matrix_to_json
from .partition import partition
from .sampler import estimate_kl, sample, write_states_csv
from .solver import kl_from_uniform, solve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_STATISTICAL = 4

Z_THRESHOLD = 4.0
LOW_POWER_COUNT = 1000

COMMANDS = ("solve", "die", "sample", "verify", "zfun")


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    output: str | None = None
    tol: float = 1e-10
    max_iter: int = 200
    seed: int = 0
    count: int = 1_000_000
    workers: int | None = None
    as_json: bool = False
    values: list | None = None
    mean: float | None = None
    b: list | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


class InputError(Exception):
    pass


def _floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"--{name}: cannot parse {text!r} as comma-separated numbers") from exc
    if not vals or not np.all(np.isfinite(vals)):
        raise InputError(f"--{name}: need at least one finite number")
    return vals


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _emit(cfg: RunConfig, report: dict, lines: list[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text + "\n")
    if cfg.as_json:
        print(text)
    else:
        print("\n".join(lines))


def _solve_report(ens, rep, rho) -> dict:
    out = {
        "B": matrix_to_json(ens.B),
        "absorbedB": matrix_to_json(ens.absorbed_B),
        "logZ": ens.log_z,
        "iterations": rep.iterations,
        "converged": rep.converged,
    }
    out.update({k: v for k, v in rep.as_dict().items() if k not in out})
    try:
        out["kl"] = kl_from_uniform(ens, rho, tol=1e-6)
    except ValidationError:
        out["kl"] = None
    return out


def _solve_lines(report: dict, ens) -> list[str]:
    bc = report["bounds_check"]
    lines = [
        f"iterations      {report['iterations']}",
        f"converged       {report['converged']}",
        f"grad_norm       {report['grad_norm']:.3e}",
        f"logZ            {_fmt(report['logZ'])}",
        f"kl (nats)       {_fmt(report['kl']) if report['kl'] is not None else 'n/a'}",
        f"eig(B)          {' '.join(_fmt(v) for v in ens.eigenvalues)}",
        f"bounds          y1<=0 {bc['y_min_nonpositive']}  yn>=0 {bc['y_max_nonnegative']}  "
        f"range {_fmt(bc['y_range'])} <= {_fmt(bc['range_bound'])} {bc['y_range_bounded']}",
    ]
    return lines


def _load_rho(path):
    return validate_density(load_matrix(path))


def cmd_solve(cfg: RunConfig) -> int:
    rho = _load_rho(cfg.inputs[0])
    code = EXIT_OK
    try:
        ens, rep = solve(rho, tol=cfg.tol, max_iter=cfg.max_iter)
    except NoConvergence as exc:
        ens, rep = exc.payload
        print(f"warning: {exc}", file=sys.stderr)
        code = EXIT_CONVERGENCE
    report = _solve_report(ens, rep, rho)
    _emit(cfg, report, _solve_lines(report, ens))
    return code


def cmd_die(cfg: RunConfig) -> int:
    values = cfg.values or [1, 2, 3, 4, 5, 6]
    d = solve_beta(values, cfg.mean)
    report = {
        "values": list(map(float, d.values)),
        "mean": cfg.mean,
        "beta": d.beta,
        "probs": d.probs.tolist(),
        "entropy": shannon_entropy(d.probs),
    }
    lines = [f"beta     {d.beta:.10f}", "value    p"]
    lines += [f"{_fmt(a):<8} {p:.10f}" for a, p in zip(d.values, d.probs)]
    lines.append(f"entropy  {report['entropy']:.10f} nats")
    _emit(cfg, report, lines)
    return EXIT_OK


def cmd_zfun(cfg: RunConfig) -> int:
    pv = partition(cfg.b, order=2)
    report = {
        "b": list(cfg.b),
        "logZ": pv.log_z,
        "gradient": pv.weights.tolist(),
        "hessian": pv.hessian.tolist(),
    }
    lines = [
        f"logZ      {_fmt(pv.log_z)}",
        f"gradient  {' '.join(_fmt(v) for v in pv.weights)}   (= -dlogZ/db)",
        "hessian",
    ]
    lines += ["  " + " ".join(f"{v: .12g}" for v in row) for row in pv.hessian]
    _emit(cfg, report, lines)
    return EXIT_OK


def _sampled(cfg: RunConfig, keep_states: bool):
    rho = _load_rho(cfg.inputs[0])
    ens, _ = solve(rho, tol=cfg.tol, max_iter=cfg.max_iter)
    batch = sample(ens, cfg.count, cfg.seed, keep_states=keep_states, workers=cfg.workers)
    return rho, ens, batch


def cmd_sample(cfg: RunConfig) -> int:
    rho, ens, batch = _sampled(cfg, keep_states=cfg.output is not None)
    if cfg.output:
        write_states_csv(cfg.output, batch)
    report = {
        "count": batch.count,
        "seed": batch.seed,
        "accept_rate": batch.accept_rate,
        "empirical_mean": matrix_to_json(batch.empirical_mean),
        "max_abs_z": batch.max_abs_z(rho.matrix),
    }
    lines = [
        f"count        {batch.count}",
        f"seed         {batch.seed}",
        f"accept_rate  {batch.accept_rate:.6f}",
        f"max |z|      {report['max_abs_z']:.6f}",
    ]
    if cfg.as_json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.count < LOW_POWER_COUNT:
        print(
            f"warning: count={cfg.count} is too small for a meaningful check "
            f"(use at least {LOW_POWER_COUNT})",
            file=sys.stderr,
        )
    rho, ens, batch = _sampled(cfg, keep_states=True)
    zr, zi = batch.z_scores(rho.matrix)
    max_z = batch.max_abs_z(rho.matrix)
    kl = kl_from_uniform(ens, rho, tol=1e-6)
    kl_est, kl_se = estimate_kl(ens, batch)
    kl_z = 0.0 if kl_se == 0 else (kl_est - kl) / kl_se
    passed = max_z <= Z_THRESHOLD and abs(kl_z) <= Z_THRESHOLD
    report = {
        "count": batch.count,
        "seed": batch.seed,
        "accept_rate": batch.accept_rate,
        "max_abs_z": max_z,
        "z_re": zr.tolist(),
        "z_im": zi.tolist(),
        "kl": kl,
        "kl_estimate": kl_est,
        "kl_stderr": kl_se,
        "kl_z": kl_z,
        "passed": passed,
    }
    lines = [
        f"count        {batch.count}",
        f"accept_rate  {batch.accept_rate:.6f}",
        f"max |z|      {max_z:.6f}   (threshold {Z_THRESHOLD})",
        f"kl exact     {kl:.10f}",
        f"kl estimate  {kl_est:.10f} +- {kl_se:.3e}  (z = {kl_z:.3f})",
        "PASS" if passed else "FAIL",
    ]
    _emit(cfg, report, lines)
    return EXIT_OK if passed else EXIT_STATISTICAL


HANDLERS = {
    "solve": cmd_solve,
    "die": cmd_die,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "zfun": cmd_zfun,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lazyens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, solver=True):
        p.add_argument("--json", dest="as_json", action="store_true", help="JSON to stdout")
        if solver:
            p.add_argument("--tol", type=float, default=1e-10)
            p.add_argument("--max-iter", type=int, default=200)

    p = sub.add_parser("solve", help="lazy ensemble for a density matrix")
    p.add_argument("rho", help="density matrix JSON file")
    p.add_argument("--out", help="write the JSON report here")
    common(p)

    p = sub.add_parser("die", help="maximum-entropy die for a given mean")
    p.add_argument("--values", default="1,2,3,4,5,6")
    p.add_argument("--mean", required=True, type=float)
    p.add_argument("--out")
    common(p, solver=False)

    for name, default_count in (("sample", 10_000), ("verify", 1_000_000)):
        p = sub.add_parser(name, help="sample the lazy ensemble" if name == "sample" else
                           "solve, sample and compare the empirical mean to rho")
        p.add_argument("rho")
        p.add_argument("--count", type=int, default=default_count)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", help="state dump (sample) or JSON report (verify)")
        common(p)

    p = sub.add_parser("zfun", help="log partition function, gradient and Hessian")
    p.add_argument("--b", required=True, help="comma-separated eigenvalues of B")
    p.add_argument("--out")
    common(p, solver=False)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    kw = dict(command=args.command, as_json=args.as_json, output=getattr(args, "out", None))
    if hasattr(args, "rho"):
        kw["inputs"] = [args.rho]
    for name in ("tol", "max_iter", "seed", "count", "workers", "mean"):
        if getattr(args, name, None) is not None:
            kw[name] = getattr(args, name)
    if args.command == "die":
        kw["values"] = _floats(args.values, "values")
    if args.command == "zfun":
        kw["b"] = _floats(args.b, "b")
    if kw.get("count", 1) < 1:
        raise InputError("--count must be >= 1")
    if kw.get("seed", 0) < 0:
        raise InputError("--seed must be non-negative")
    try:
        return RunConfig(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except (InputError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
