"""Batch command line: simulate, estimate, solve, factor, identify, repro.

Every subcommand reads an optional run file of key = value lines, applies
explicit flags on top, echoes the effective configuration, and writes CSV
and JSON artifacts plus a manifest into the output directory. Exit codes:
0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Optional

import numpy as np

from . import io as gio
from . import lags as lagmod
from . import repro as repromod
from .cepstral import estimate_gen_cepstral
from .consistency import MCConfig, _extended_circulant, assumption2_report, mc_estimator_study
from .dualopt import SolverConfig, moment_residuals, solve_dual
from .errors import NumericalError
from .factorization import bauer_factorize_1d, factorize_2d_separable
from .pipeline import CascadeModel, IdentificationConfig, identify_cascade
from .signal import RationalFilter, SampleRecord, cascade_apply, gen_periodic_gaussian, gen_white_noise
from .spectra import biased_covariances, periodogram


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _int_tuple(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_tuple(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


_BOOL = argparse.BooleanOptionalAction

_DEFAULTS = {
    "simulate": {
        "process": "arma",
        "shape": (1024,),
        "seed": 0,
        "variance": 1.0,
        "b": (1.0,),
        "a": (1.0,),
        "b2": None,
        "a2": None,
        "nu": 1,
        "burn_in": 0,
        "circulant_base": None,
        "format": "csv",
        "out": ".",
    },
    "moments": {
        "samples": None,
        "alpha": 0.5,
        "nu": None,
        "radius": 2,
        "correction": True,
        "dense": None,
        "out": ".",
    },
    "mc-study": {
        "process": "white-circular",
        "sizes": (512, 1024, 2048, 4096),
        "trials": 200,
        "alpha": 0.5,
        "seed": 0,
        "correction": True,
        "variance": 1.0,
        "lags": (0, 1),
        "b": None,
        "a": None,
        "circulant_base": None,
        "out": ".",
    },
    "fig1": {
        "Ns": (64, 128, 256, 512),
        "probes": (0.25, 0.5, 0.75),
        "b": (1.0, -1.0, 0.8),
        "a": (1.0, -1.6, 0.81),
        "out": ".",
    },
    "solve": {
        "moments": None,
        "lam": 1e-6,
        "grid": None,
        "tol": 1e-6,
        "max_iter": 200_000,
        "step_init": 1.0,
        "out": ".",
    },
    "factor": {
        "solution": None,
        "tol": 1e-8,
        "out": ".",
    },
    "identify": {
        "samples": None,
        "nu": 2,
        "radius": None,
        "lam": 1e-6,
        "grid": None,
        "tol": 1e-6,
        "max_iter": 200_000,
        "correction": True,
        "dense": None,
        "out": ".",
    },
    "repro": {
        "N": None,
        "seed": 7,
        "lam": 1e-6,
        "tol": 1e-6,
        "max_iter": 200_000,
        "grid": (30, 30),
        "out": ".",
    },
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="gencep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--run-file", default=None, help="key = value config file")
        p.add_argument("--out", default=None, help="output directory")
        return p

    p = add("simulate", "generate a sample record and write it out")
    p.add_argument("--process", default=None,
                   choices=["white-real", "white-circular", "circulant", "arma", "cascade"])
    p.add_argument("--shape", type=_int_tuple, default=None, help="sample shape, e.g. 4096 or 100,100")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--variance", type=float, default=None)
    p.add_argument("--b", type=_float_tuple, default=None, help="numerator coefficients")
    p.add_argument("--a", type=_float_tuple, default=None, help="denominator coefficients")
    p.add_argument("--b2", type=_float_tuple, default=None, help="axis-2 numerator (2-d separable)")
    p.add_argument("--a2", type=_float_tuple, default=None, help="axis-2 denominator (2-d separable)")
    p.add_argument("--nu", type=int, default=None, help="number of cascaded passes")
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--circulant-base", type=_float_tuple, default=None)
    p.add_argument("--format", default=None, choices=["csv", "bin"])
    p.set_defaults(handler=_cmd_simulate)

    p = add("moments", "estimate covariances and generalized cepstra from samples")
    p.add_argument("--samples", default=None, help="input sample file (csv or bin)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--nu", type=int, default=None, help="cascade order; sets alpha = 1 - 1/nu")
    p.add_argument("--radius", type=int, default=None, help="lag box radius")
    p.add_argument("--correction", action=_BOOL, default=None)
    p.add_argument("--dense", type=_int_tuple, default=None, help="zero-padded periodogram grid")
    p.set_defaults(handler=_cmd_moments)

    p = add("mc-study", "Monte Carlo mean/variance study of the cepstral estimator")
    p.add_argument("--process", default=None,
                   choices=["white-circular", "white-real", "circulant", "arma"])
    p.add_argument("--sizes", type=_int_tuple, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--correction", action=_BOOL, default=None)
    p.add_argument("--variance", type=float, default=None)
    p.add_argument("--lags", type=_int_tuple, default=None, help="tracked lags")
    p.add_argument("--b", type=_float_tuple, default=None)
    p.add_argument("--a", type=_float_tuple, default=None)
    p.add_argument("--circulant-base", type=_float_tuple, default=None)
    p.set_defaults(handler=_cmd_mc_study)

    p = add("fig1", "correlation-sum growth table for spectral components")
    p.add_argument("--Ns", type=_int_tuple, default=None)
    p.add_argument("--probes", type=_float_tuple, default=None, help="probe fractions of N")
    p.add_argument("--b", type=_float_tuple, default=None)
    p.add_argument("--a", type=_float_tuple, default=None)
    p.set_defaults(handler=_cmd_fig1)

    p = add("solve", "run the dual solver on a moments file")
    p.add_argument("--moments", default=None, help="moments JSON produced by the moments command")
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--grid", type=_int_tuple, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--step-init", type=float, default=None)
    p.set_defaults(handler=_cmd_solve)

    p = add("factor", "spectrally factor a dual solution into a model")
    p.add_argument("--solution", default=None, help="solution JSON produced by solve")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(handler=_cmd_factor)

    p = add("identify", "full pipeline: samples to identified cascade model")
    p.add_argument("--samples", default=None)
    p.add_argument("--nu", type=int, default=None)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--grid", type=_int_tuple, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--correction", action=_BOOL, default=None)
    p.add_argument("--dense", type=_int_tuple, default=None)
    p.set_defaults(handler=_cmd_identify)

    p = add("repro", "rerun the reference experiments")
    p.add_argument("which", choices=["one-d", "two-d"])
    p.add_argument("--N", type=_int_tuple, default=None, help="sample sizes (side lengths in 2-d)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--grid", type=_int_tuple, default=None, help="solver grid (2-d)")
    p.set_defaults(handler=_cmd_repro)

    return parser


def _effective_config(name: str, args: argparse.Namespace) -> dict:
    defaults = _DEFAULTS[name]
    config = dict(defaults)
    run_path = getattr(args, "run_file", None)
    if run_path:
        overrides = gio.read_run_file(run_path)
        unknown = sorted(set(overrides) - set(defaults))
        if unknown:
            raise _UsageError(f"unknown run-file keys for {name}: {', '.join(unknown)}")
        config.update(overrides)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _echo(config: dict) -> None:
    for key in sorted(config):
        value = config[key]
        if isinstance(value, (tuple, list)):
            value = ",".join(str(v) for v in value)
        print(f"{key} = {value}")


def _outdir(config: dict) -> str:
    out = str(config["out"])
    os.makedirs(out, exist_ok=True)
    return out


def _as_shape(value) -> tuple:
    if np.isscalar(value):
        return (int(value),)
    return tuple(int(v) for v in value)


def _coeff_array(value, axis2=None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if axis2 is not None:
        arr = np.outer(arr, np.atleast_1d(np.asarray(axis2, dtype=np.float64)))
    return arr


def _cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("simulate", args)
    _echo(config)
    out = _outdir(config)
    shape = _as_shape(config["shape"])
    process = config["process"]
    seed = int(config["seed"])
    variance = float(config["variance"])
    if process in ("white-real", "white-circular"):
        kind = "real" if process == "white-real" else "circular"
        record = gen_white_noise(shape, variance, seed, kind=kind)
    elif process == "circulant":
        if len(shape) != 1:
            raise _UsageError("circulant simulation is 1-d")
        base = config["circulant_base"]
        if base is None:
            raise _UsageError("circulant process requires --circulant-base")
        record = gen_periodic_gaussian(_extended_circulant(np.asarray(base, dtype=np.float64), shape[0]), seed)
    elif process in ("arma", "cascade"):
        b = _coeff_array(config["b"], config["b2"] if len(shape) == 2 else None)
        a = _coeff_array(config["a"], config["a2"] if len(shape) == 2 else None)
        if len(shape) == 2 and (b.ndim != 2 or a.ndim != 2):
            raise _UsageError("2-d simulation needs --b2 and --a2 axis factors")
        filt = RationalFilter(b, a)
        nu = int(config["nu"]) if process == "cascade" else 1
        if nu < 1:
            raise _UsageError("nu must be >= 1")
        burn = int(config["burn_in"])
        noise = gen_white_noise(tuple(n + burn for n in shape), variance, seed, kind="real")
        record = cascade_apply(filt, nu, noise, burn_in=burn)
    else:  # pragma: no cover - argparse restricts choices
        raise _UsageError(f"unknown process {process!r}")
    ext = "bin" if config["format"] == "bin" else "csv"
    path = os.path.join(out, f"samples.{ext}")
    gio.write_samples(record, path)
    gio.write_manifest(os.path.join(out, "manifest.json"), "simulate", config,
                       elapsed=time.perf_counter() - t0)
    print(f"wrote {path} ({record.size} samples)")
    return 0


def _resolve_alpha_nu(config) -> tuple:
    nu = config.get("nu")
    if nu is not None:
        nu = int(nu)
        if nu < 2:
            raise _UsageError("nu must be an integer >= 2")
        return 1.0 - 1.0 / nu, nu
    alpha = float(config["alpha"])
    guess = 1.0 / (1.0 - alpha) if alpha < 1.0 else 0.0
    nu = int(round(guess)) if guess >= 2.0 and abs(guess - round(guess)) <= 1e-9 else None
    return alpha, nu


def _cmd_moments(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("moments", args)
    if not config["samples"]:
        raise _UsageError("--samples is required")
    _echo(config)
    out = _outdir(config)
    record = gio.read_samples(config["samples"])
    alpha, nu = _resolve_alpha_nu(config)
    lag_list = lagmod.lag_box(int(config["radius"]), record.d)
    cov = biased_covariances(record, lag_list)
    dense = config["dense"]
    pg = periodogram(record, dense=_as_shape(dense) if dense is not None else None)
    cep = estimate_gen_cepstral(pg, alpha, lag_list, corrected=bool(config["correction"]))
    gio.write_covariances_csv(cov, os.path.join(out, "covariances.csv"))
    gio.write_cepstra_csv(cep, os.path.join(out, "cepstra.csv"))
    if nu is not None:
        gio.write_moments_json(cov, cep, nu, os.path.join(out, "moments.json"))
    else:
        print("note: alpha does not match an integer cascade order; moments.json skipped")
    gio.write_manifest(os.path.join(out, "manifest.json"), "moments", config,
                       elapsed=time.perf_counter() - t0)
    print(f"wrote covariances.csv and cepstra.csv under {out}")
    return 0


def _cmd_mc_study(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("mc-study", args)
    _echo(config)
    out = _outdir(config)
    filt = None
    if config["b"] is not None or config["a"] is not None:
        filt = RationalFilter(
            _coeff_array(config["b"] if config["b"] is not None else (1.0,)),
            _coeff_array(config["a"] if config["a"] is not None else (1.0,)),
        )
    base = config["circulant_base"]
    mc = MCConfig(
        process=config["process"],
        sizes=_as_shape(config["sizes"]),
        trials=int(config["trials"]),
        alpha=float(config["alpha"]),
        seed=int(config["seed"]),
        corrected=bool(config["correction"]),
        variance=float(config["variance"]),
        circulant_base=np.asarray(base, dtype=np.float64) if base is not None else None,
        filt=filt,
        track_lags=_as_shape(config["lags"]),
    )
    report = mc_estimator_study(mc)
    rows = []
    for r in report.rows:
        rows.append([
            mc.process, float(mc.alpha), int(mc.corrected), r.size, r.lag[0], mc.trials,
            float(r.emp_mean.real), float(r.emp_mean.imag), float(r.emp_var),
            "" if r.theo_mean is None else float(r.theo_mean.real),
            "" if r.theo_mean is None else float(r.theo_mean.imag),
            "" if r.theo_var is None else float(r.theo_var),
        ])
    gio.write_table_csv(
        os.path.join(out, "mc_report.csv"),
        ["process", "alpha", "corrected", "size", "lag", "trials",
         "emp_mean_re", "emp_mean_im", "emp_var", "theo_mean_re", "theo_mean_im", "theo_var"],
        rows,
    )
    gio.write_manifest(os.path.join(out, "manifest.json"), "mc-study", config,
                       elapsed=time.perf_counter() - t0)
    print(f"wrote mc_report.csv under {out} ({len(rows)} rows)")
    return 0


def _cmd_fig1(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("fig1", args)
    _echo(config)
    out = _outdir(config)
    filt = RationalFilter(_coeff_array(config["b"]), _coeff_array(config["a"]))
    report = assumption2_report(filt, _as_shape(config["Ns"]), probes=tuple(config["probes"]))
    rows = []
    for row in report.rows:
        for frac in report.probes:
            l1, total = row.sums[frac]
            rows.append([row.size, float(frac), l1, float(total), float(total) / row.size,
                         float(row.gamma)])
    gio.write_table_csv(
        os.path.join(out, "fig1.csv"),
        ["N", "probe", "ell1", "corr_sum", "corr_sum_per_n", "max_component_var"],
        rows,
    )
    gio.write_manifest(os.path.join(out, "manifest.json"), "fig1", config,
                       elapsed=time.perf_counter() - t0)
    print(f"wrote fig1.csv under {out}; growth check "
          f"{'passed' if report.consistent else 'failed'}")
    return 0


def _cmd_solve(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("solve", args)
    if not config["moments"]:
        raise _UsageError("--moments is required")
    _echo(config)
    out = _outdir(config)
    data = gio.read_moments_json(config["moments"])
    grid = config["grid"]
    if grid is None:
        grid = (512,) if data.d == 1 else (64, 64)
    solver = SolverConfig(
        lam=float(config["lam"]),
        grid_shape=_as_shape(grid),
        tol=float(config["tol"]),
        max_iter=int(config["max_iter"]),
        step_init=float(config["step_init"]),
    )
    solution = solve_dual(data, solver)
    gio.write_solution_json(solution, os.path.join(out, "solution.json"))
    gio.write_trace_csv(solution, os.path.join(out, "trace.csv"))
    res = moment_residuals(solution, data)
    gio.write_manifest(os.path.join(out, "manifest.json"), "solve", config,
                       elapsed=time.perf_counter() - t0)
    print(f"iterations = {solution.iterations}, gradient norm = {solution.grad_norm:.3e}")
    print(f"residuals: covariance = {res.covariance_norm:.3e}, cepstral = {res.cepstral_norm:.3e}")
    if not solution.converged:
        print("solver did not reach the requested tolerance", file=sys.stderr)
        return 2
    return 0


def _cmd_factor(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("factor", args)
    if not config["solution"]:
        raise _UsageError("--solution is required")
    _echo(config)
    out = _outdir(config)
    solution = gio.read_solution_json(config["solution"])
    tol = float(config["tol"])
    if solution.p.d == 1:
        fp = bauer_factorize_1d(solution.p, tol=tol)
        fq = bauer_factorize_1d(solution.q, tol=tol)
    else:
        fp = factorize_2d_separable(solution.p, tol=tol)
        fq = factorize_2d_separable(solution.q, tol=tol)
    model = CascadeModel(solution.nu, fp.coefficients, fq.coefficients, provenance="identified")
    gio.write_factor_json(fp, os.path.join(out, "factor_p.json"))
    gio.write_factor_json(fq, os.path.join(out, "factor_q.json"))
    gio.write_model_json(model, os.path.join(out, "model.json"),
                         extras={"residual_p": fp.residual, "residual_q": fq.residual})
    gio.write_manifest(os.path.join(out, "manifest.json"), "factor", config,
                       elapsed=time.perf_counter() - t0)
    print(f"wrote model.json under {out} "
          f"(factor residuals {fp.residual:.3e}, {fq.residual:.3e})")
    return 0


def _cmd_identify(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("identify", args)
    if not config["samples"]:
        raise _UsageError("--samples is required")
    nu = int(config["nu"])
    if nu < 2:
        raise _UsageError("nu must be an integer >= 2")
    _echo(config)
    out = _outdir(config)
    record = gio.read_samples(config["samples"])
    dense = config["dense"]
    ident = IdentificationConfig(
        lag_radius=config["radius"],
        grid_shape=_as_shape(config["grid"]) if config["grid"] is not None else None,
        lam=float(config["lam"]),
        tol=float(config["tol"]),
        max_iter=int(config["max_iter"]),
        corrected=bool(config["correction"]),
        dense=_as_shape(dense) if dense is not None else None,
    )
    model, report = identify_cascade(record, nu, ident)
    gio.write_covariances_csv(report.covariances, os.path.join(out, "covariances.csv"))
    gio.write_cepstra_csv(report.cepstra, os.path.join(out, "cepstra.csv"))
    gio.write_moments_json(report.covariances, report.cepstra, nu, os.path.join(out, "moments.json"))
    gio.write_solution_json(report.solution, os.path.join(out, "solution.json"))
    gio.write_trace_csv(report.solution, os.path.join(out, "trace.csv"))
    if report.factor_p is not None:
        gio.write_factor_json(report.factor_p, os.path.join(out, "factor_p.json"))
    if report.factor_q is not None:
        gio.write_factor_json(report.factor_q, os.path.join(out, "factor_q.json"))
    if model is not None:
        extras = {"warnings": report.warnings}
        if report.residuals is not None:
            extras["covariance_residual"] = report.residuals.covariance_norm
            extras["cepstral_residual"] = report.residuals.cepstral_norm
        gio.write_model_json(model, os.path.join(out, "model.json"), extras=extras)
    gio.write_manifest(os.path.join(out, "manifest.json"), "identify", config,
                       elapsed=time.perf_counter() - t0)
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    if model is None or report.failed or not report.solution.converged:
        print("identification did not complete cleanly", file=sys.stderr)
        return 2
    print(f"wrote model.json under {out}")
    return 0


def _cmd_repro(args) -> int:
    t0 = time.perf_counter()
    config = _effective_config("repro", args)
    which = args.which
    sizes = config["N"]
    if sizes is None:
        sizes = repromod.ONE_D_SIZES if which == "one-d" else repromod.TWO_D_SIZES
    sizes = _as_shape(sizes)
    config["N"] = sizes
    _echo(config)
    out = _outdir(config)
    common = dict(
        seed=int(config["seed"]),
        lam=float(config["lam"]),
        tol=float(config["tol"]),
        max_iter=int(config["max_iter"]),
    )
    if which == "one-d":
        result = repromod.run_one_d(sizes, **common)
    else:
        result = repromod.run_two_d(sizes, grid=_as_shape(config["grid"]), **common)
    rows = []
    for r in result.rows:
        rows.append([
            r.size[0],
            float(r.cov_err), float(r.cep_err_corrected), float(r.cep_err_uncorrected),
            "" if r.param_err is None else float(r.param_err),
            "" if r.spectrum_rel_err is None else float(r.spectrum_rel_err),
            r.iterations, float(r.grad_norm), int(r.converged),
        ])
    gio.write_table_csv(
        os.path.join(out, "errors.csv"),
        ["N", "cov_err", "cep_err_corrected", "cep_err_uncorrected",
         "param_err", "spectrum_rel_err", "iterations", "grad_norm", "converged"],
        rows,
    )
    combined = [["cov", *lag, float(result.covariances[lag].real), float(result.covariances[lag].imag)]
                for lag in result.covariances.lags()]
    combined += [["cep", *lag, float(result.cepstra[lag].real), float(result.cepstra[lag].imag)]
                 for lag in result.cepstra.lags()]
    d = result.truth.d
    gio.write_table_csv(
        os.path.join(out, "moments.csv"),
        ["kind"] + [f"k{j + 1}" for j in range(d)] + ["re", "im"],
        combined,
    )
    gio.write_trace_csv(result.report.solution, os.path.join(out, "trace.csv"))
    if result.model is not None:
        gio.write_model_json(result.model, os.path.join(out, "model.json"))
    gio.write_manifest(os.path.join(out, "manifest.json"), f"repro {which}", config,
                       elapsed=time.perf_counter() - t0)
    for r in result.rows:
        perr = "n/a" if r.param_err is None else f"{r.param_err:.4f}"
        label = "x".join(str(n) for n in r.size)
        print(f"N = {label}: parameter error {perr}, "
              f"moment errors {r.cov_err:.4f}/{r.cep_err_corrected:.4f}")
    if result.model is None:
        print("identification failed at the largest size", file=sys.stderr)
        return 2
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            parser.print_usage(sys.stderr)
            return 1
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
