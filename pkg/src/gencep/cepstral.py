"""Generalized cepstral coefficients: definitions, quadrature, estimation.

The generalized logarithm s_a(x) = (x^a - 1) / a interpolates between
log (a = 0) and x - 1 (a = 1). For a in (0, 1) the coefficients of
s_a(spectrum) admit a periodogram-power estimator whose multiplicative bias
1 / Gamma(a + 1) is removed by the corrected variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lags as lagmod
from .errors import DefinitenessError
from .numerics import _as_alpha_value, gamma_fn
from .spectra import CovarianceSet, FrequencyGrid, PeriodogramValues

_QUAD_DEFAULT_1D = 1 << 14
_QUAD_DEFAULT_2D = 1 << 9


@dataclass
class GenCepstralSet:
    """Hermitian lag-indexed generalized cepstral coefficients.

    corrected marks whether the small-sample bias correction was applied;
    exact quadrature values also carry corrected = True since the correction
    is asymptotically the identity there.
    """

    alpha: float
    d: int
    values: dict
    corrected: bool = True

    def __post_init__(self) -> None:
        self.alpha = _as_alpha_value(self.alpha)
        normalized = {lagmod.as_lag(k, self.d): complex(v) for k, v in self.values.items()}
        self.values = lagmod.hermitian_fill(normalized)

    def lags(self) -> list:
        return sorted(self.values.keys())

    def __getitem__(self, k) -> complex:
        return self.values[lagmod.as_lag(k, self.d)]

    def __contains__(self, k) -> bool:
        return lagmod.as_lag(k, self.d) in self.values

    def __len__(self) -> int:
        return len(self.values)


def gen_log(x, alpha: float):
    """Generalized logarithm (x^alpha - 1) / alpha, log x at alpha = 0."""
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"gen_log power must lie in [0, 1], got {alpha}")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise ValueError("gen_log requires positive arguments")
    if alpha == 0.0:
        out = np.log(x)
    else:
        out = (x**alpha - 1.0) / alpha
    return float(out) if out.ndim == 0 else out


def correction_constant(alpha) -> float:
    """Bias correction C = 1 / Gamma(alpha + 1), > 1 on (0, 1)."""
    a = _as_alpha_value(alpha)
    return 1.0 / gamma_fn(a + 1.0)


def _quad_grid(lag_list: list, quad_size, d: int) -> FrequencyGrid:
    if quad_size is None:
        quad_size = _QUAD_DEFAULT_1D if d == 1 else _QUAD_DEFAULT_2D
    if np.isscalar(quad_size):
        quad_size = (int(quad_size),) * d
    max_lag = max(abs(kj) for k in lag_list for kj in k)
    if any(q <= 2 * max_lag for q in quad_size):
        raise ValueError(f"quadrature grid {quad_size} too small for lags up to {max_lag}")
    return FrequencyGrid(quad_size)


def _eval_spectrum(phi, grid: FrequencyGrid) -> np.ndarray:
    values = np.asarray(phi(*grid.mesh()), dtype=np.float64)
    if values.shape != grid.shape:
        raise ValueError(f"spectrum callable returned shape {values.shape}, grid {grid.shape}")
    if values.min() <= 0.0:
        worst = np.unravel_index(int(values.argmin()), values.shape)
        raise DefinitenessError(f"spectrum is not positive at grid node {worst}: {values.min():.6g}")
    return values


def _grid_coefficients(values: np.ndarray, lag_list: list, grid_shape: tuple) -> dict:
    """Grid means of values * exp(i <k, theta>) for each lag, Hermitian-paired."""
    transform = np.fft.ifftn(values)
    out: dict = {}
    for k in lag_list:
        mk = lagmod.neg(k)
        if mk in out:
            out[k] = out[mk].conjugate()
            continue
        idx = tuple(kj % gj for kj, gj in zip(k, grid_shape))
        midx = tuple((-kj) % gj for kj, gj in zip(k, grid_shape))
        out[k] = 0.5 * (transform[idx] + transform[midx].conjugate())
    return out


def true_gen_cepstral(phi, alpha, lag_list, quad_size=None, d: int | None = None) -> GenCepstralSet:
    """Generalized cepstra of a known positive spectrum by grid quadrature.

    phi is called with one mesh array per axis and must return positive
    values. Defaults: 2^14 nodes for d = 1, 2^9 per axis for d = 2.
    """
    a = _as_alpha_value(alpha)
    lag_list = lagmod.normalize_lags(lag_list, d)
    d = len(lag_list[0])
    grid = _quad_grid(lag_list, quad_size, d)
    powered = _eval_spectrum(phi, grid) ** a
    coeffs = _grid_coefficients(powered, lag_list, grid.shape)
    zero = (0,) * d
    values = {k: v / a for k, v in coeffs.items() if k != zero}
    if zero in coeffs:
        values[zero] = (coeffs[zero].real - 1.0) / a
    return GenCepstralSet(a, d, values, corrected=True)


def true_covariances(phi, lag_list, quad_size=None, d: int | None = None) -> CovarianceSet:
    """Covariances of a known spectrum by grid quadrature."""
    lag_list = lagmod.normalize_lags(lag_list, d)
    d = len(lag_list[0])
    grid = _quad_grid(lag_list, quad_size, d)
    values = _eval_spectrum(phi, grid)
    return CovarianceSet(d, _grid_coefficients(values, lag_list, grid.shape))


def estimate_gen_cepstral(
    pg: PeriodogramValues,
    alpha,
    lag_list,
    corrected: bool = True,
) -> GenCepstralSet:
    """Generalized cepstral estimates from periodogram powers.

    Grid means of the alpha-th periodogram power replace the integrals of
    the exact definition; zero periodogram nodes contribute zero. With
    corrected = True the k != 0 estimates are scaled by
    C = 1 / Gamma(alpha + 1) and the zero-lag estimate is mapped through
    m0 -> C m0 + (C - 1) / alpha, which removes the asymptotic bias.
    """
    a = _as_alpha_value(alpha)
    lag_list = lagmod.normalize_lags(lag_list, pg.d)
    for k in lag_list:
        for kj, gj in zip(k, pg.grid.shape):
            if abs(kj) >= gj:
                raise ValueError(f"lag {k} is aliased on grid {pg.grid.shape}")
    powered = pg.values**a
    coeffs = _grid_coefficients(powered, lag_list, pg.grid.shape)
    zero = (0,) * pg.d
    values = {k: v / a for k, v in coeffs.items() if k != zero}
    if zero in coeffs:
        values[zero] = (coeffs[zero].real - 1.0) / a
    if corrected:
        c = correction_constant(a)
        values = {k: c * v for k, v in values.items()}
        if zero in values:
            values[zero] = values[zero] + (c - 1.0) / a
    return GenCepstralSet(a, pg.d, values, corrected=corrected)
