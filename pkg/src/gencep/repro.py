"""Reference experiments: third-order cascade in 1-d, separable cascade in 2-d.

Each driver simulates one realization per sample size (a single long draw,
truncated to nested prefixes), estimates moments, solves the dual, factors
the result, and tabulates moment, parameter and spectrum errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lags as lagmod
from .cepstral import (
    GenCepstralSet,
    estimate_gen_cepstral,
    true_covariances,
    true_gen_cepstral,
)
from .pipeline import CascadeModel, IdentificationConfig, identify_cascade, parameter_error, spectrum_error
from .signal import SampleRecord, cascade_apply, gen_white_noise
from .spectra import CovarianceSet, FrequencyGrid, periodogram

ONE_D_SIZES = (100, 500, 2500, 10000)
TWO_D_SIZES = (30, 60, 100)
_BURN_1D = 200
_BURN_2D = 50


def true_model_1d() -> CascadeModel:
    """Third-order cascade: poles 0.5 e^(+-i pi/3), zeros -0.8 and 0.6."""
    a = np.array([1.0, -0.5, 0.25])
    b = np.array([1.0, 0.2, -0.48]) / np.sqrt(1.2704)
    return CascadeModel(3, b, a, provenance="specified")


def true_model_2d() -> CascadeModel:
    """Separable two-subsystem cascade on the quarter plane."""
    a = np.outer([1.0, -0.5], [1.0, -0.7])
    b = np.outer([1.0, -0.6], [1.0, -0.8]) / np.sqrt(2.2304)
    return CascadeModel(2, b, a, provenance="specified")


def spectrum_fn(model: CascadeModel):
    """True power spectrum of a cascade model as a callable on angle meshes."""

    def phi(*mesh):
        bv = np.zeros(np.broadcast(*mesh).shape, dtype=np.complex128)
        av = np.zeros_like(bv)
        for idx, coef in np.ndenumerate(model.b):
            bv += coef * np.exp(-1j * sum(k * m for k, m in zip(idx, mesh)))
        for idx, coef in np.ndenumerate(model.a):
            av += coef * np.exp(-1j * sum(k * m for k, m in zip(idx, mesh)))
        return (np.abs(bv) ** 2 / np.abs(av) ** 2) ** model.nu

    return phi


def true_moments(model: CascadeModel, lag_list, quad_size=None):
    """Quadrature values of the true covariances and generalized cepstra."""
    phi = spectrum_fn(model)
    alpha = 1.0 - 1.0 / model.nu
    cov = true_covariances(phi, lag_list, quad_size=quad_size, d=model.d)
    cep = true_gen_cepstral(phi, alpha, lag_list, quad_size=quad_size, d=model.d)
    return cov, cep


def _moment_gap(est, truth, lag_list) -> float:
    total = 0.0
    for lag in lag_list:
        total += abs(est[lag] - truth[lag]) ** 2
    return float(np.sqrt(total))


def covariance_gap(est: CovarianceSet, truth: CovarianceSet, lag_list) -> float:
    """Error over the zero lag and one representative of each conjugate pair."""
    kept = [k for k in lag_list if lagmod.is_zero(k) or lagmod.is_positive(k)]
    return _moment_gap(est, truth, kept)


def cepstral_gap(est: GenCepstralSet, truth: GenCepstralSet, lag_list) -> float:
    """Error over one representative of each conjugate pair, zero lag excluded."""
    kept = [k for k in lag_list if lagmod.is_positive(k)]
    return _moment_gap(est, truth, kept)


@dataclass
class ExperimentRow:
    """Error summary for one sample size."""

    size: tuple
    cov_err: float
    cep_err_corrected: float
    cep_err_uncorrected: float
    param_err: Optional[float]
    spectrum_rel_err: Optional[float]
    iterations: int
    grad_norm: float
    converged: bool


@dataclass
class ExperimentResult:
    """Rows for every size plus the artifacts of the largest-size run."""

    truth: CascadeModel
    rows: list
    covariances: CovarianceSet
    cepstra: GenCepstralSet
    model: Optional[CascadeModel]
    report: object


def _simulate_prefixes(model: CascadeModel, max_shape: tuple, seed, burn: int) -> np.ndarray:
    full_shape = tuple(n + burn for n in max_shape)
    noise = gen_white_noise(full_shape, 1.0, seed, kind="real")
    filt = model.subsystem()
    out = cascade_apply(filt, model.nu, noise, burn_in=burn)
    return out.data


def _run_sizes(model, shapes, seed, lam, tol, max_iter, grid_shape, spectrum_grid, quad_size):
    d = model.d
    radius = 2 if d == 1 else 1
    lag_list = lagmod.lag_box(radius, d)
    truth_cov, truth_cep = true_moments(model, lag_list, quad_size=quad_size)
    alpha = 1.0 - 1.0 / model.nu
    data_full = _simulate_prefixes(model, shapes[-1], seed, _BURN_1D if d == 1 else _BURN_2D)
    sgrid = FrequencyGrid(spectrum_grid)
    truth_spectrum = model.spectrum(sgrid)

    rows = []
    last = None
    for shape in shapes:
        sl = tuple(slice(0, n) for n in shape)
        record = SampleRecord(np.ascontiguousarray(data_full[sl]), is_real=True, seed=seed)
        config = IdentificationConfig(
            lag_radius=radius,
            grid_shape=grid_shape if grid_shape is not None else (shape if d == 1 else None),
            lam=lam,
            tol=tol,
            max_iter=max_iter,
            corrected=True,
        )
        fitted, report = identify_cascade(record, model.nu, config)
        raw_cep = estimate_gen_cepstral(periodogram(record), alpha, lag_list, corrected=False)
        cov_err = covariance_gap(report.covariances, truth_cov, lag_list)
        cep_err = cepstral_gap(report.cepstra, truth_cep, lag_list)
        cep_err_raw = cepstral_gap(raw_cep, truth_cep, lag_list)
        if fitted is not None:
            perr = parameter_error(fitted, model)
            serr = spectrum_error(fitted.spectrum(sgrid), truth_spectrum, sgrid)["rel_l2"]
        else:
            perr = None
            serr = None
        sol = report.solution
        rows.append(
            ExperimentRow(
                size=shape,
                cov_err=cov_err,
                cep_err_corrected=cep_err,
                cep_err_uncorrected=cep_err_raw,
                param_err=perr,
                spectrum_rel_err=serr,
                iterations=sol.iterations,
                grad_norm=sol.grad_norm,
                converged=sol.converged,
            )
        )
        last = report
    return ExperimentResult(
        truth=model,
        rows=rows,
        covariances=last.covariances,
        cepstra=last.cepstra,
        model=last.model,
        report=last,
    )


def run_one_d(
    sizes=ONE_D_SIZES,
    seed=7,
    lam: float = 1e-6,
    tol: float = 1e-6,
    max_iter: int = 200_000,
    spectrum_grid: int = 2048,
) -> ExperimentResult:
    """1-d experiment: solver grid K = N, lag radius 2, third-order cascade."""
    sizes = tuple(sorted(int(n) for n in np.atleast_1d(np.asarray(sizes, dtype=int))))
    shapes = [(n,) for n in sizes]
    model = true_model_1d()
    return _run_sizes(
        model, shapes, seed, lam, tol, max_iter,
        grid_shape=None, spectrum_grid=(spectrum_grid,), quad_size=2 ** 14,
    )


def run_two_d(
    sizes=TWO_D_SIZES,
    seed=7,
    lam: float = 1e-6,
    tol: float = 1e-6,
    max_iter: int = 200_000,
    grid=(30, 30),
) -> ExperimentResult:
    """2-d experiment: square fields, solver grid (30, 30), lag radius 1."""
    sizes = tuple(sorted(int(n) for n in np.atleast_1d(np.asarray(sizes, dtype=int))))
    shapes = [(n, n) for n in sizes]
    model = true_model_2d()
    return _run_sizes(
        model, shapes, seed, lam, tol, max_iter,
        grid_shape=tuple(grid), spectrum_grid=tuple(grid), quad_size=2 ** 9,
    )


def median_parameter_error(model: CascadeModel, shape, seeds, lam=1e-6, tol=1e-6,
                           max_iter=200_000, grid_shape=None) -> dict:
    """Identify on independent realizations and summarize the errors."""
    d = model.d
    radius = 2 if d == 1 else 1
    burn = _BURN_1D if d == 1 else _BURN_2D
    sgrid = FrequencyGrid(grid_shape if (d == 2 and grid_shape is not None) else
                          ((2048,) if d == 1 else (30, 30)))
    truth_spectrum = model.spectrum(sgrid)
    param_errors = []
    spectrum_errors = []
    for seed in seeds:
        data = _simulate_prefixes(model, shape, seed, burn)
        record = SampleRecord(data, is_real=True, seed=seed)
        config = IdentificationConfig(
            lag_radius=radius,
            grid_shape=grid_shape if grid_shape is not None else (shape if d == 1 else None),
            lam=lam, tol=tol, max_iter=max_iter,
        )
        fitted, report = identify_cascade(record, model.nu, config)
        if fitted is None:
            raise RuntimeError(f"identification failed for seed {seed}: {report.failure}")
        param_errors.append(parameter_error(fitted, model))
        spectrum_errors.append(spectrum_error(fitted.spectrum(sgrid), truth_spectrum, sgrid)["rel_l2"])
    return {
        "param_errors": param_errors,
        "median_param_error": float(np.median(param_errors)),
        "spectrum_errors": spectrum_errors,
        "median_spectrum_error": float(np.median(spectrum_errors)),
    }
