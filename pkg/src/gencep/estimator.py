"""Estimator-style facades over the identification pipeline.

CascadeIdentifier wraps identify_cascade with a fit/get_params interface;
CepstralFeatures turns batches of series into generalized cepstral feature
vectors. Both follow scikit-learn conventions so they compose with its
model-selection and pipeline utilities.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .cepstral import estimate_gen_cepstral
from .errors import FactorizationError
from .pipeline import IdentificationConfig, identify_cascade
from .signal import SampleRecord
from .spectra import FrequencyGrid, periodogram


def _check_sample_array(X, *, allow_complex: bool, max_dim: int = 2) -> np.ndarray:
    arr = np.asarray(X)
    if arr.dtype == object:
        raise ValueError("sample array has object dtype; pass numeric data")
    if np.iscomplexobj(arr):
        if not allow_complex:
            if np.any(arr.imag != 0.0):
                raise ValueError("complex samples are not supported here")
            arr = arr.real.astype(np.float64)
        else:
            arr = arr.astype(np.complex128)
    else:
        arr = arr.astype(np.float64)
    if arr.ndim < 1 or arr.ndim > max_dim:
        raise ValueError(f"expected 1 to {max_dim} dimensional samples, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError("sample array is empty")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError("samples contain non-finite values")
    return arr


class CascadeIdentifier(BaseEstimator):
    """Fit a cascade linear system to one realization of its output.

    Parameters mirror IdentificationConfig. fit accepts a 1-d array (a time
    series) or a 2-d array (a field on a rectangle) and exposes the result
    as model_, solution_ and report_.
    """

    def __init__(
        self,
        nu: int = 2,
        lag_radius: Optional[int] = None,
        lam: float = 1e-6,
        grid_shape=None,
        tol: float = 1e-6,
        max_iter: int = 200_000,
        corrected: bool = True,
    ):
        self.nu = nu
        self.lag_radius = lag_radius
        self.lam = lam
        self.grid_shape = grid_shape
        self.tol = tol
        self.max_iter = max_iter
        self.corrected = corrected

    def fit(self, X, y=None):
        arr = _check_sample_array(X, allow_complex=True)
        config = IdentificationConfig(
            lag_radius=self.lag_radius,
            grid_shape=self.grid_shape,
            lam=self.lam,
            tol=self.tol,
            max_iter=self.max_iter,
            corrected=self.corrected,
        )
        record = SampleRecord(arr, is_real=not np.iscomplexobj(arr))
        model, report = identify_cascade(record, self.nu, config)
        if model is None:
            raise FactorizationError(report.failure or "identification failed")
        self.model_ = model
        self.report_ = report
        self.solution_ = report.solution
        return self

    def predict_spectrum(self, grid_shape=None) -> np.ndarray:
        """Model power spectrum on a uniform grid (defaults to the solve grid)."""
        if not hasattr(self, "model_"):
            raise AttributeError("CascadeIdentifier is not fitted yet; call fit first")
        if grid_shape is None:
            grid = FrequencyGrid(self.solution_.grid_shape)
        elif isinstance(grid_shape, FrequencyGrid):
            grid = grid_shape
        else:
            grid = FrequencyGrid(grid_shape)
        return self.model_.spectrum(grid)


class CepstralFeatures(TransformerMixin, BaseEstimator):
    """Map each real time series row to its first n_lags cepstral moments.

    The features are the corrected (or raw) generalized cepstral estimates
    at lags 0 .. n_lags-1; for real series these are real up to rounding, so
    the transform returns their real parts.
    """

    def __init__(self, alpha: float = 0.5, n_lags: int = 8, corrected: bool = True, dense=None):
        self.alpha = alpha
        self.n_lags = n_lags
        self.corrected = corrected
        self.dense = dense

    def fit(self, X, y=None):
        arr = _check_sample_array(X, allow_complex=False)
        arr = np.atleast_2d(arr)
        if arr.shape[1] <= self.n_lags:
            raise ValueError(
                f"series of length {arr.shape[1]} cannot supply {self.n_lags} lags"
            )
        self.n_features_in_ = arr.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "n_features_in_"):
            raise AttributeError("CepstralFeatures is not fitted yet; call fit first")
        arr = np.atleast_2d(_check_sample_array(X, allow_complex=False))
        if arr.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected series of length {self.n_features_in_}, got {arr.shape[1]}"
            )
        lag_list = [(k,) for k in range(self.n_lags)]
        out = np.empty((arr.shape[0], self.n_lags), dtype=np.float64)
        for i, row in enumerate(arr):
            pg = periodogram(SampleRecord(row, is_real=True), dense=self.dense)
            cep = estimate_gen_cepstral(pg, self.alpha, lag_list, corrected=self.corrected)
            out[i] = np.array([cep[lag] for lag in lag_list]).real
        return out
