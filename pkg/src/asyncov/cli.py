"""Batch command-line interface.

Subcommands: ``estimate`` (covariance/correlation from a trade table),
``simulate`` (synthetic panels in the same table formats), ``nufft-check``
(tolerance sweep printing PASS/FAIL per cell), ``epps`` (dt sweeps with
error bars) and ``bench`` (the benchmark experiments).

Conventions shared by every command: exit code 0 on success, 1 on a
runtime error (with a machine-readable JSON object on stderr), 2 on a
usage error; every output file starts with a metadata block holding
the full effective configuration; floats are serialised with 17
significant digits so golden files are byte-stable; ``--config`` files
hold ``key=value`` lines overridden by explicit flags; the seed falls
back to the ``ASYNCOV_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numba
import numpy as np

from . import __version__, bench, epps
from .errors import AsyncovError
from .estimator import EstimatorConfig, covariance_matrix, dt_to_n
from .fourier import coeffs_forloop
from .nufft import KERNELS, canonical_kernel, make_plan, nufft_type1, relative_l2_error
from .simulate import (
    RNG_ALGORITHM,
    GbmSpec,
    gbm_paths,
    regular_nonsynchronous,
    sample_arrivals,
    sample_missing,
)
from .tickdata import EventSeries, ReturnSeries, ingest_taq, log_returns, rescale_times

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_metadata(fh, meta: dict):
    for key, value in meta.items():
        fh.write(f"# {key}={_fmt(value)}\n")


def _write_csv(path, meta: dict, fieldnames, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_metadata(fh, meta)
        fh.write(",".join(fieldnames) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) if row[k] is not None else "" for k in fieldnames) + "\n")


def _file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise AsyncovError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _seed_default() -> int:
    return int(os.environ.get("ASYNCOV_SEED", "0"))


def _parse_n_mode(text: str) -> dict:
    if text == "nyquist":
        return {"n_mode": "nyquist"}
    if text.startswith("fixed:"):
        return {"n_mode": "fixed", "fixed_n": int(text.split(":", 1)[1])}
    if text.startswith("dt:"):
        return {"n_mode": "dt", "dt": float(text.split(":", 1)[1])}
    raise AsyncovError(f"cannot parse n-mode {text!r}; use nyquist|fixed:N|dt:SECONDS")


def _matrix_json(matrix: np.ndarray) -> list:
    return [[float(v) for v in row] for row in matrix]


def _cmd_estimate(args) -> int:
    events = ingest_taq(args.input, schema=args.schema)
    panel = rescale_times(events)
    returns = [log_returns(s, panel) for s in events]
    config = EstimatorConfig(
        basis=args.basis,
        engine=args.engine,
        kernel=args.kernel,
        epsilon=args.eps,
        pairwise_n=args.pairwise_n,
        **_parse_n_mode(args.n_mode),
    )
    estimate = covariance_matrix(returns, config, t_span=panel.t_span)
    meta = {
        "command": "estimate",
        "asyncov_version": __version__,
        "input": str(args.input),
        "input_sha256": _file_sha256(args.input),
        "basis": config.basis,
        "engine": config.engine,
        "kernel": config.kernel if config.engine == "nufft" else "",
        "epsilon": config.epsilon if config.engine == "nufft" else "",
        "n_mode": args.n_mode,
        "pairwise_n": config.pairwise_n,
        "t_span": panel.t_span,
        "n_used": estimate.n_used
        if isinstance(estimate.n_used, int)
        else "pairwise",
        "assets": ",".join(estimate.asset_ids),
    }
    for flag in ("pairwise_dirichlet_psd", "zfft_asynchronous_input"):
        meta[flag] = flag in estimate.warnings
    if args.format == "json":
        payload = {
            "metadata": meta,
            "assets": list(estimate.asset_ids),
            "sigma": _matrix_json(estimate.sigma),
            "corr": _matrix_json(estimate.corr),
        }
        if not isinstance(estimate.n_used, int):
            payload["n_used"] = [[int(v) for v in row] for row in estimate.n_used]
        text = json.dumps(payload, indent=2, sort_keys=True)
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            _write_metadata(fh, meta)
            ids = estimate.asset_ids
            for name, matrix in (("sigma", estimate.sigma), ("corr", estimate.corr)):
                fh.write(f"{name}," + ",".join(ids) + "\n")
                for asset, row in zip(ids, matrix):
                    fh.write(asset + "," + ",".join(_fmt(float(v)) for v in row) + "\n")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    d = len(args.s0)
    spec = GbmSpec(
        n=args.n,
        mu=np.asarray(args.mu, dtype=float),
        sigma_mat=np.asarray(json.loads(args.sigma), dtype=float),
        s0=np.asarray(args.s0, dtype=float),
        dt=args.dt,
        seed=args.seed,
    )
    if spec.d != d:
        raise AsyncovError("sigma dimensions disagree with s0/mu")
    prices, times = gbm_paths(spec)
    scheme = args.asynchrony
    if scheme == "none":
        events = [EventSeries(f"A{i+1}", times, prices[i]) for i in range(d)]
    elif scheme.startswith("missing:"):
        events = sample_missing(prices, times, float(scheme.split(":", 1)[1]), args.seed)
    elif scheme.startswith("arrivals:"):
        lam = [1.0 / float(v) for v in scheme.split(":", 1)[1].split(",")]
        if len(lam) != d:
            raise AsyncovError(f"need {d} arrival means, got {len(lam)}")
        events = sample_arrivals(prices, times, lam, args.seed)
    elif scheme == "regular":
        events = regular_nonsynchronous(prices, times)
    else:
        raise AsyncovError(f"cannot parse asynchrony {scheme!r}")
    sidecar = {
        "command": "simulate",
        "asyncov_version": __version__,
        "rng": RNG_ALGORITHM,
        "seed": args.seed,
        "n": args.n,
        "d": d,
        "mu": list(map(float, args.mu)),
        "sigma": json.loads(args.sigma),
        "s0": list(map(float, args.s0)),
        "dt": args.dt,
        "asynchrony": scheme,
        "layout": args.layout,
    }
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        if args.layout == "long":
            fh.write("asset,time,price,volume\n")
            for s in events:
                for t, p in zip(s.times, s.prices):
                    fh.write(f"{s.asset_id},{_fmt(float(t))},{_fmt(float(p))},1\n")
        else:
            ids = [s.asset_id for s in events]
            lookup = [dict(zip(s.times, s.prices)) for s in events]
            all_times = sorted({float(t) for s in events for t in s.times})
            fh.write("time," + ",".join(ids) + "\n")
            for t in all_times:
                cells = [
                    _fmt(float(table[t])) if t in table else ""
                    for table in lookup
                ]
                fh.write(_fmt(t) + "," + ",".join(cells) + "\n")
    Path(str(args.out) + ".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return EXIT_OK


def _cmd_nufft_check(args) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((args.seed, 99))))
    n = args.n
    t = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
    t[0] = 0.0
    deltas = rng.normal(0.0, 0.01, n)
    series = ReturnSeries("check", t, deltas)
    n_cutoff = args.n_modes
    reference = coeffs_forloop(series, n_cutoff)
    failures = 0
    print("kernel,epsilon,m_sp,rel_l2_error,status")
    for kernel in KERNELS:
        for eps in args.eps:
            plan = make_plan(kernel, 2 * n_cutoff + 1, eps)
            if args.debug_shrink_width:
                plan = _shrunk_plan(
                    kernel, 2 * n_cutoff + 1, eps, plan.m_sp - args.debug_shrink_width
                )
            err = relative_l2_error(nufft_type1(plan, series), reference)
            ok = err <= eps
            failures += 0 if ok else 1
            print(f"{kernel},{eps:.0e},{plan.m_sp},{err:.6e},{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if failures == 0 else EXIT_RUNTIME


def _shrunk_plan(kernel, n_modes, epsilon, m_sp):
    import dataclasses

    from . import nufft as _nufft

    plan = make_plan(kernel, n_modes, epsilon)
    if kernel == "gaussian":
        # width enters tau, so rebuild the dependent constants too
        lam = _nufft.SIGMA * _nufft.SIGMA * m_sp / (_nufft.SIGMA * (_nufft.SIGMA - 0.5))
        tau = np.pi * lam / (plan.m_r * plan.m_r)
        ks = np.arange(-plan.n_cutoff, plan.n_cutoff + 1)
        phi_hat = np.sqrt(2 * np.pi) * np.exp(-(ks.astype(float) ** 2) * tau)
        scale = np.sqrt(2 * np.pi) * np.sqrt(np.pi / tau) / plan.m_r
        return dataclasses.replace(
            plan, m_sp=m_sp, tau=tau, t1=np.pi / lam, phi_hat=phi_hat, deconv_scale=scale
        )
    return dataclasses.replace(plan, m_sp=m_sp)


def _cmd_epps(args) -> int:
    events = ingest_taq(args.input, schema=args.schema)
    config = EstimatorConfig(
        basis=args.basis, engine=args.engine, kernel=args.kernel, epsilon=args.eps
    )
    dts = args.dt_grid
    if args.bootstrap_blocks:
        curves = epps.block_bootstrap(
            events, dts, config, n_blocks=args.bootstrap_blocks
        )
    else:
        curves = epps.epps_curve(events, dts, config)
    meta = {
        "command": "epps",
        "asyncov_version": __version__,
        "input": str(args.input),
        "input_sha256": _file_sha256(args.input),
        "basis": args.basis,
        "engine": args.engine,
        "bootstrap_blocks": args.bootstrap_blocks or "",
        "theoretical_c": args.theoretical_c if args.theoretical_c is not None else "",
        "theoretical_lambda": args.theoretical_lambda
        if args.theoretical_lambda is not None
        else "",
    }
    fields = ["pair", "dt", "n_modes", "rho_mean", "rho_err", "basis"]
    with_theory = args.theoretical_c is not None and args.theoretical_lambda is not None
    if with_theory:
        fields.append("rho_theoretical")
    t_min = min(s.times[0] for s in events)
    t_max = max(s.times[-1] for s in events)
    rows = []
    for curve in curves:
        for dt, mean, err in zip(curve.dt_values, curve.rho_mean, curve.rho_err):
            row = {
                "pair": "/".join(curve.pair),
                "dt": float(dt),
                "n_modes": dt_to_n(t_max - t_min, float(dt)),
                "rho_mean": float(mean),
                "rho_err": float(err),
                "basis": curve.basis,
            }
            if with_theory:
                row["rho_theoretical"] = epps.epps_theoretical(
                    args.theoretical_c, args.theoretical_lambda, float(dt)
                )
            rows.append(row)
    _write_csv(args.out, meta, fields, rows)
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.experiment == "timing":
        n_values = args.n_values or [2**k for k in range(10, 17 if args.full_scale else 14)]
        header, rows = bench.timing_sweep(
            args.engines, n_values, d_values=args.d_values, bases=args.bases,
            seed=args.seed, reps=args.reps,
        )
    elif args.experiment == "accuracy":
        header, rows = bench.accuracy_sweep(
            args.engines,
            args.eps,
            args.scenario,
            bases=args.bases,
            reps=args.reps,
            seed=args.seed,
        )
    elif args.experiment == "mse-bias":
        header, rows = bench.mse_bias(
            args.n_cutoffs, reps=args.reps, basis=args.bases[0],
            engine=args.engines[0], seed=args.seed,
        )
    elif args.experiment == "sensitivity":
        header, rows = bench.sensitivity(
            reps=args.reps, engine=args.engines[0], bases=args.bases, seed=args.seed,
        )
    else:
        raise AsyncovError(f"unknown experiment {args.experiment!r}")
    _write_csv(args.out, header, list(rows[0].keys()), rows)
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("--config", help="key=value config file (flags win)")
    parser.add_argument("--threads", type=int, default=1,
                        help="compiled-loop threads (default 1 for determinism)")
    parser.add_argument("--seed", type=int, default=_seed_default(),
                        help="RNG seed (env ASYNCOV_SEED is the fallback)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asyncov",
        description="Integrated covariance estimation for asynchronous event data",
    )
    parser.add_argument("--version", action="version", version=f"asyncov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate covariance/correlation from a trade table")
    p.add_argument("input")
    p.add_argument("--schema", choices=["auto", "long", "wide"], default="auto")
    p.add_argument("--basis", choices=["dirichlet", "fejer"], default="dirichlet")
    p.add_argument("--engine", choices=["forloop", "vectorised", "zfft", "nufft"],
                   default="nufft")
    p.add_argument("--kernel", default="gaussian",
                   help="nufft kernel: gaussian|kb|es (aliases accepted)")
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--n-mode", default="nyquist", help="nyquist|fixed:N|dt:SECONDS")
    p.add_argument("--pairwise-n", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("simulate", help="simulate a correlated price panel")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", type=float, nargs="+", required=True)
    p.add_argument("--sigma", required=True, help="covariance matrix as JSON rows")
    p.add_argument("--s0", type=float, nargs="+", required=True)
    p.add_argument("--dt", type=float, default=1.0 / 86400.0)
    p.add_argument("--asynchrony", default="none",
                   help="none|missing:FRAC|arrivals:M1,M2,...|regular")
    p.add_argument("--layout", choices=["long", "wide"], default="wide")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("nufft-check", help="tolerance sweep with PASS/FAIL per cell")
    p.add_argument("--n", type=int, default=1000, help="random source points")
    p.add_argument("--n-modes", type=int, default=166, help="mode cutoff N")
    p.add_argument("--eps", type=float, nargs="+",
                   default=[1e-4, 1e-6, 1e-8, 1e-10, 1e-12])
    p.add_argument("--debug-shrink-width", type=int, default=0,
                   help="shrink m_sp by this much to demonstrate failure")
    _add_common(p)
    p.set_defaults(func=_cmd_nufft_check)

    p = sub.add_parser("epps", help="correlation vs sampling interval")
    p.add_argument("input")
    p.add_argument("--schema", choices=["auto", "long", "wide"], default="auto")
    p.add_argument("--basis", choices=["dirichlet", "fejer"], default="dirichlet")
    p.add_argument("--engine", choices=["forloop", "vectorised", "zfft", "nufft"],
                   default="nufft")
    p.add_argument("--kernel", default="gaussian")
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--dt-grid", type=float, nargs="+", required=True)
    p.add_argument("--bootstrap-blocks", type=int, default=0,
                   help="leave-one-block-out error bars with this many blocks")
    p.add_argument("--theoretical-c", type=float, default=None)
    p.add_argument("--theoretical-lambda", type=float, default=None)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_epps)

    p = sub.add_parser("bench", help="run a benchmark experiment")
    p.add_argument("experiment", choices=["timing", "accuracy", "mse-bias", "sensitivity"])
    p.add_argument("--engines", nargs="+", default=["nufft:gaussian"])
    p.add_argument("--bases", nargs="+", default=["dirichlet"])
    p.add_argument("--eps", type=float, nargs="+", default=[1e-12])
    p.add_argument("--scenario", choices=list(bench.SCENARIOS), default="synchronous")
    p.add_argument("--n-values", type=int, nargs="+", default=None)
    p.add_argument("--d-values", type=int, nargs="+", default=[2])
    p.add_argument("--n-cutoffs", type=int, nargs="+", default=[1, 5, 10, 25, 50])
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--full-scale", action="store_true")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_bench)
    return parser


def _apply_config_file(parser, argv):
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        return argv
    values = _load_config_file(path)
    # config values become defaults; explicit flags still win
    extra = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if flag not in argv:
            extra.extend([flag, value])
    # insert after the subcommand so argparse routes them correctly
    return argv + extra


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", None):
        numba.set_num_threads(max(1, args.threads))
    try:
        return args.func(args)
    except (AsyncovError, ZeroDivisionError, OSError, ValueError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
