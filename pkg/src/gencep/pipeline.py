"""End-to-end identification of cascade linear systems from output samples.

A cascade model is nu identical minimum-phase rational subsystems in series
driven by unit white noise. Identification estimates covariance and
corrected generalized cepstral moments from the samples, solves the
regularized dual problem for the spectrum (P/Q)^nu, and spectrally factors
P and Q into the subsystem numerator and denominator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.signal

from . import lags as lagmod
from .cepstral import GenCepstralSet, estimate_gen_cepstral
from .dualopt import (
    DualSolution,
    MomentData,
    MomentResiduals,
    SolverConfig,
    moment_residuals,
    optimal_spectrum,
    solve_dual,
)
from .errors import NumericalError, StabilityError
from .factorization import SpectralFactor, bauer_factorize_1d, factorize_2d_separable
from .signal import RationalFilter, SampleRecord
from .spectra import CovarianceSet, FrequencyGrid, biased_covariances, periodogram


def _poly_values(coeffs: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """Values of sum_k c_k exp(-i <k, theta>) for causal coefficient arrays."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.ndim == 1:
        e = np.exp(-1j * np.outer(np.arange(coeffs.size), grid.axis_nodes(0)))
        return coeffs @ e
    e1 = np.exp(-1j * np.outer(np.arange(coeffs.shape[0]), grid.axis_nodes(0)))
    e2 = np.exp(-1j * np.outer(np.arange(coeffs.shape[1]), grid.axis_nodes(1)))
    return e1.T @ coeffs @ e2


@dataclass
class CascadeModel:
    """nu identical subsystems b/a in series, driven by unit white noise.

    Specified (ground-truth) models must carry the a0 = 1 normalization.
    Identified models keep the raw minimum-phase factors, whose leading
    coefficients are real positive but not rescaled; the output spectrum is
    |b(theta)|^(2 nu) / |a(theta)|^(2 nu) either way.
    """

    nu: int
    b: np.ndarray
    a: np.ndarray
    provenance: str = "specified"

    def __post_init__(self) -> None:
        if self.nu < 2 or self.nu != int(self.nu):
            raise ValueError(f"cascade order nu must be an integer >= 2, got {self.nu}")
        self.nu = int(self.nu)
        self.b = np.atleast_1d(np.asarray(self.b, dtype=np.complex128))
        self.a = np.atleast_1d(np.asarray(self.a, dtype=np.complex128))
        if self.b.ndim != self.a.ndim or self.b.ndim not in (1, 2):
            raise ValueError("b and a must both be vectors (d=1) or matrices (d=2)")
        if self.provenance not in ("specified", "identified"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        lead_a = self.a.flat[0]
        if self.provenance == "specified" and abs(lead_a - 1.0) > 1e-9:
            raise ValueError(f"specified models require a0 = 1, got {lead_a}")
        if lead_a.real <= 0.0:
            raise ValueError(f"leading denominator coefficient must be positive, got {lead_a}")

    @property
    def d(self) -> int:
        return self.b.ndim

    def subsystem(self) -> RationalFilter:
        return RationalFilter(self.b, self.a)

    def is_real(self) -> bool:
        return bool(np.all(self.b.imag == 0.0) and np.all(self.a.imag == 0.0))

    def spectrum(self, grid) -> np.ndarray:
        """Output power spectrum on a frequency grid."""
        if not isinstance(grid, FrequencyGrid):
            grid = FrequencyGrid(grid)
        if grid.d != self.d:
            raise ValueError(f"grid dimension {grid.d} != model dimension {self.d}")
        bv = np.abs(_poly_values(self.b, grid)) ** 2
        av = np.abs(_poly_values(self.a, grid)) ** 2
        if av.min() <= 0.0:
            raise StabilityError("denominator vanishes on the grid; model is not stable")
        return (bv / av) ** self.nu


@dataclass
class IdentificationConfig:
    """Controls for identify_cascade.

    lag_radius defaults to 2 in one dimension and 1 in two; grid_shape
    defaults to the sample length (d = 1) or (30, 30) (d = 2).
    """

    lag_radius: Optional[int] = None
    grid_shape: object = None
    lam: float = 1e-6
    tol: float = 1e-6
    max_iter: int = 200_000
    corrected: bool = True
    dense: object = None
    real_coefficients: Optional[bool] = None
    factor_tol: float = 1e-8

    def resolved_radius(self, d: int) -> int:
        if self.lag_radius is not None:
            return int(self.lag_radius)
        return 2 if d == 1 else 1

    def resolved_grid(self, shape: tuple) -> FrequencyGrid:
        if isinstance(self.grid_shape, FrequencyGrid):
            return self.grid_shape
        if self.grid_shape is not None:
            g = self.grid_shape
            return FrequencyGrid((int(g),) * len(shape) if np.isscalar(g) else g)
        if len(shape) == 1:
            return FrequencyGrid(shape)
        return FrequencyGrid((30,) * len(shape))


@dataclass
class RunReport:
    """Everything identify_cascade produced, including partial results."""

    covariances: Optional[CovarianceSet] = None
    cepstra: Optional[GenCepstralSet] = None
    solution: Optional[DualSolution] = None
    residuals: Optional[MomentResiduals] = None
    spectrum: Optional[np.ndarray] = None
    factor_p: Optional[SpectralFactor] = None
    factor_q: Optional[SpectralFactor] = None
    model: Optional[CascadeModel] = None
    warnings: list = field(default_factory=list)
    failed: bool = False
    failure: Optional[str] = None


def identify_cascade(
    samples,
    nu: int,
    config: Optional[IdentificationConfig] = None,
) -> tuple:
    """Identify a cascade model from output samples.

    Returns (model, report); on solver non-convergence or factorization
    failure the report carries the partial results and model may be None.
    """
    config = config or IdentificationConfig()
    record = samples if isinstance(samples, SampleRecord) else SampleRecord(np.asarray(samples))
    d = record.d
    report = RunReport()
    lag_list = lagmod.lag_box(config.resolved_radius(d), d)
    report.covariances = biased_covariances(record, lag_list)
    alpha = 1.0 - 1.0 / nu
    pg = periodogram(record, dense=config.dense)
    report.cepstra = estimate_gen_cepstral(pg, alpha, lag_list, corrected=config.corrected)
    data = MomentData(report.covariances, report.cepstra, nu)
    grid = config.resolved_grid(record.shape)
    solver = SolverConfig(
        lam=config.lam,
        grid_shape=grid,
        tol=config.tol,
        max_iter=config.max_iter,
        real_coefficients=config.real_coefficients,
    )
    solution = solve_dual(data, solver)
    report.solution = solution
    if not solution.converged:
        report.warnings.append(
            f"dual solver stopped at gradient norm {solution.grad_norm:.3e} "
            f"after {solution.iterations} iterations without reaching {config.tol:g}"
        )
    try:
        report.residuals = moment_residuals(solution, data)
        report.spectrum = optimal_spectrum(solution)
        if d == 1:
            report.factor_p = bauer_factorize_1d(solution.p, tol=config.factor_tol)
            report.factor_q = bauer_factorize_1d(solution.q, tol=config.factor_tol)
        else:
            # Estimated polynomials are only approximately separable, so the
            # factorizer projects onto the closest rank-one coefficient matrix.
            report.factor_p = factorize_2d_separable(solution.p, tol=config.factor_tol, project=True)
            report.factor_q = factorize_2d_separable(solution.q, tol=config.factor_tol, project=True)
            for name, factor in (("numerator", report.factor_p), ("denominator", report.factor_q)):
                ratio = factor.diagnostics.get("svd_ratio", 0.0)
                if ratio > 1e-6:
                    report.warnings.append(
                        f"{name} projected to separable form "
                        f"(singular value ratio {ratio:.2e})"
                    )
        report.model = CascadeModel(
            nu,
            report.factor_p.coefficients,
            report.factor_q.coefficients,
            provenance="identified",
        )
    except NumericalError as exc:
        report.failed = True
        report.failure = str(exc)
        report.warnings.append(f"identification incomplete: {exc}")
    return report.model, report


def whiten_input(y, u, ar_order: int):
    """Remove the spectral shape of a non-white input from observed output.

    Fits an autoregressive shaping filter to the input u by solving the
    covariance (Yule-Walker) equations, then applies its inverse (the AR
    polynomial over the prediction-error gain) to y. Returns the whitened
    record and a dict with the fitted polynomial and gain.
    """
    y_rec = y if isinstance(y, SampleRecord) else SampleRecord(np.asarray(y))
    u_rec = u if isinstance(u, SampleRecord) else SampleRecord(np.asarray(u))
    if y_rec.d != 1 or u_rec.d != 1:
        raise ValueError("input whitening is implemented for 1-d samples")
    order = int(ar_order)
    if order < 1 or order >= u_rec.size:
        raise ValueError(f"ar_order must lie in [1, {u_rec.size - 1}], got {ar_order}")
    cov = biased_covariances(u_rec, range(order + 1))
    col = np.array([cov[(k,)] for k in range(order)])
    rhs = -np.array([cov[(k,)] for k in range(1, order + 1)])
    ar_tail = scipy.linalg.solve_toeplitz((col, col.conj()), rhs)
    ar = np.concatenate([[1.0 + 0.0j], ar_tail])
    sigma2 = (cov[(0,)] + np.dot(ar_tail, np.array([cov[(k,)] for k in range(1, order + 1)]).conj())).real
    if sigma2 <= 0.0:
        raise NumericalError(f"non-positive prediction error variance {sigma2:.6g}")
    if np.any(_root_radii_safe(ar) >= 1.0 - 1e-9):
        raise StabilityError("fitted input model is not minimum phase; cannot invert")
    data = scipy.signal.lfilter(ar, [1.0], y_rec.data) / np.sqrt(sigma2)
    is_real = y_rec.is_real and bool(np.all(np.abs(ar.imag) == 0.0))
    if is_real:
        data = data.real
    record = SampleRecord(
        data, is_real=is_real, seed=y_rec.seed, generator_tag=f"whitened({y_rec.generator_tag})"
    )
    return record, {"ar": ar, "sigma2": float(sigma2)}


def _root_radii_safe(coeffs: np.ndarray) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.complex128), "b")
    if c.size <= 1:
        return np.array([0.0])
    return np.abs(np.roots(c))


def _sign_canonical(arr: np.ndarray) -> np.ndarray:
    lead = arr.flat[0]
    if lead.real < 0.0:
        return -arr
    return arr


def parameter_error(model: CascadeModel, truth: CascadeModel) -> float:
    """Norm of the stacked coefficient differences [a - a_true, b - b_true].

    Both factor signs are canonicalized (leading coefficient positive)
    before differencing, since spectral factors are unique only up to sign.
    """
    if model.d != truth.d or model.b.shape != truth.b.shape or model.a.shape != truth.a.shape:
        raise ValueError(
            f"model shapes {model.b.shape}/{model.a.shape} do not match "
            f"truth {truth.b.shape}/{truth.a.shape}"
        )
    da = _sign_canonical(model.a) - _sign_canonical(truth.a)
    db = _sign_canonical(model.b) - _sign_canonical(truth.b)
    return float(np.sqrt(np.sum(np.abs(da) ** 2) + np.sum(np.abs(db) ** 2)))


def spectrum_error(estimate: np.ndarray, truth, grid) -> dict:
    """Pointwise and cumulative errors of a spectrum estimate.

    truth may be an array on the same grid or a callable on mesh arrays.
    rel_l2 is the cumulative relative error |estimate - truth| / |truth| in
    the Frobenius sense.
    """
    if not isinstance(grid, FrequencyGrid):
        grid = FrequencyGrid(grid)
    estimate = np.asarray(estimate, dtype=np.float64)
    if estimate.shape != grid.shape:
        raise ValueError(f"estimate shape {estimate.shape} does not match grid {grid.shape}")
    if callable(truth):
        truth_values = np.asarray(truth(*grid.mesh()), dtype=np.float64)
    else:
        truth_values = np.asarray(truth, dtype=np.float64)
    if truth_values.shape != grid.shape:
        raise ValueError("truth values do not match the grid shape")
    if truth_values.min() <= 0.0:
        raise ValueError("true spectrum must be positive for relative errors")
    diff = estimate - truth_values
    return {
        "max_abs": float(np.abs(diff).max()),
        "max_rel": float((np.abs(diff) / truth_values).max()),
        "rel_l2": float(np.linalg.norm(diff) / np.linalg.norm(truth_values)),
    }
