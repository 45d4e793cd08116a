"""Periodograms, biased covariances, and their exact grid relations.

The periodogram of a size-N sample, evaluated on a dense uniform grid with at
least 2N-1 nodes per axis, carries exactly the biased covariance estimates;
this module implements both directions plus lag-windowed smoothing for
comparison studies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lags as lagmod
from .signal import SampleRecord


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid theta_l = 2 pi l / K_j per axis, l = 0..K_j - 1."""

    shape: tuple

    def __init__(self, shape) -> None:
        if np.isscalar(shape):
            shape = (int(shape),)
        shape = tuple(int(n) for n in shape)
        if not shape or any(n < 1 for n in shape):
            raise ValueError(f"grid shape must have positive sizes, got {shape}")
        object.__setattr__(self, "shape", shape)

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    def axis_nodes(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return 2.0 * np.pi * np.arange(n) / n

    def mesh(self) -> list:
        return np.meshgrid(*[self.axis_nodes(j) for j in range(self.d)], indexing="ij")

    def angle(self, k) -> np.ndarray:
        """Inner product <k, theta> over the grid."""
        k = lagmod.as_lag(k, self.d)
        out = np.zeros(self.shape)
        for kj, axis in zip(k, range(self.d)):
            if kj != 0:
                shape = [1] * self.d
                shape[axis] = self.shape[axis]
                out = out + kj * self.axis_nodes(axis).reshape(shape)
        return out


@dataclass
class PeriodogramValues:
    """Nonnegative periodogram values on a frequency grid.

    sample_shape records the size of the originating sample, which bounds
    the lag content and gates exact covariance recovery.
    """

    grid: FrequencyGrid
    values: np.ndarray
    sample_shape: tuple

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"value shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        self.sample_shape = tuple(int(n) for n in self.sample_shape)
        if len(self.sample_shape) != self.grid.d:
            raise ValueError("sample_shape dimension does not match grid")
        peak = self.values.max(initial=0.0)
        if self.values.min(initial=0.0) < -1e-10 * max(peak, 1.0):
            raise ValueError(f"periodogram values must be nonnegative, min {self.values.min()}")
        np.clip(self.values, 0.0, None, out=self.values)

    @property
    def d(self) -> int:
        return self.grid.d


@dataclass
class CovarianceSet:
    """Hermitian lag-indexed covariances, c[-k] = conj(c[k]), c[0] real >= 0."""

    d: int
    values: dict

    def __post_init__(self) -> None:
        normalized = {lagmod.as_lag(k, self.d): complex(v) for k, v in self.values.items()}
        self.values = lagmod.hermitian_fill(normalized)
        zero = (0,) * self.d
        if zero in self.values and self.values[zero].real < 0.0:
            raise ValueError(f"zero-lag covariance must be >= 0, got {self.values[zero]}")

    def lags(self) -> list:
        return sorted(self.values.keys())

    def __getitem__(self, k) -> complex:
        return self.values[lagmod.as_lag(k, self.d)]

    def __contains__(self, k) -> bool:
        return lagmod.as_lag(k, self.d) in self.values

    def __len__(self) -> int:
        return len(self.values)


def periodogram(record: SampleRecord, dense=None) -> PeriodogramValues:
    """Squared-modulus DFT of the sample over the sample count.

    dense, when given, zero-pads the transform to a larger grid (per-axis
    sizes >= the sample sizes), evaluating the same function on more nodes.
    """
    data = record.data
    if dense is None:
        grid_shape = data.shape
    else:
        if np.isscalar(dense):
            dense = (int(dense),) * data.ndim
        grid_shape = tuple(int(n) for n in dense)
        if len(grid_shape) != data.ndim:
            raise ValueError(f"dense shape {grid_shape} does not match sample dimension")
        if any(k < n for k, n in zip(grid_shape, data.shape)):
            raise ValueError(f"dense shape {grid_shape} must cover sample shape {data.shape}")
    transform = np.fft.fftn(data, s=grid_shape, axes=range(data.ndim))
    values = (transform.real**2 + transform.imag**2) / record.size
    return PeriodogramValues(FrequencyGrid(grid_shape), values, data.shape)


def biased_covariances(record: SampleRecord, lag_list) -> CovarianceSet:
    """Biased covariance estimates over the given lags.

    c_hat[k] = (1 / |N|) sum over t of y[t + k] conj(y[t]), summing the
    overlap of the sample box with its k-shift; the divisor is always the
    full sample count.
    """
    data = record.data
    d = data.ndim
    requested = lagmod.normalize_lags(lag_list, d)
    for k in requested:
        if any(abs(kj) >= nj for kj, nj in zip(k, data.shape)):
            raise ValueError(f"lag {k} out of range for sample shape {data.shape}")
    values: dict = {}
    for k in requested:
        mk = lagmod.neg(k)
        if mk in values:
            values[k] = values[mk].conjugate()
            continue
        values[k] = _lagged_product(data, k) / record.size
    return CovarianceSet(d, values)


def _lagged_product(data: np.ndarray, k: tuple) -> complex:
    src = []
    dst = []
    for kj, nj in zip(k, data.shape):
        lo = max(0, -kj)
        hi = nj - max(0, kj)
        if hi <= lo:
            return 0.0 + 0.0j
        src.append(slice(lo, hi))
        dst.append(slice(lo + kj, hi + kj))
    # vdot conjugates its first argument: sum conj(y_t) y_{t+k}
    return complex(np.vdot(data[tuple(src)], data[tuple(dst)]))


def covariances_from_periodogram(pg: PeriodogramValues, lag_list) -> CovarianceSet:
    """Recover biased covariances as grid means of the periodogram.

    Exact (to rounding) when every grid size is >= 2 N_j - 1, since the
    periodogram is a trigonometric polynomial of degree N_j - 1 per axis.
    """
    for kj, nj in zip(pg.grid.shape, pg.sample_shape):
        if kj < 2 * nj - 1:
            raise ValueError(
                f"grid size {kj} < 2*{nj}-1; dense periodogram required for exact recovery"
            )
    requested = lagmod.normalize_lags(lag_list, pg.d)
    spectrum_mean = np.fft.ifftn(pg.values)
    values: dict = {}
    for k in requested:
        mk = lagmod.neg(k)
        if mk in values:
            values[k] = values[mk].conjugate()
            continue
        idx = tuple(kj % gj for kj, gj in zip(k, pg.grid.shape))
        midx = tuple((-kj) % gj for kj, gj in zip(k, pg.grid.shape))
        values[k] = 0.5 * (spectrum_mean[idx] + spectrum_mean[midx].conjugate())
    return CovarianceSet(pg.d, values)


def _window_weights(kind: str, lags_abs: np.ndarray, m: int) -> np.ndarray:
    x = lags_abs / float(m)
    if kind == "rectangular":
        return (lags_abs <= m).astype(np.float64)
    if kind == "bartlett":
        return np.where(lags_abs <= m, 1.0 - x, 0.0)
    if kind == "parzen":
        inner = 1.0 - 6.0 * x**2 + 6.0 * x**3
        outer = 2.0 * (1.0 - x) ** 3
        w = np.where(x <= 0.5, inner, outer)
        return np.where(lags_abs <= m, w, 0.0)
    raise ValueError(f"unknown window {kind!r}, expected rectangular, bartlett or parzen")


def windowed_periodogram(
    record: SampleRecord,
    window: str = "bartlett",
    truncation: Optional[int] = None,
) -> PeriodogramValues:
    """Lag-windowed spectrum estimate on the native grid (1-d only).

    Default truncation point is N // 5 except for the rectangular window,
    which keeps every lag and therefore reproduces the periodogram.
    """
    if record.d != 1:
        raise ValueError("windowed periodogram is implemented for 1-d samples")
    n = record.size
    if truncation is None:
        truncation = n - 1 if window == "rectangular" else max(1, n // 5)
    if not (1 <= truncation <= n - 1) and n > 1:
        raise ValueError(f"truncation must lie in [1, {n - 1}], got {truncation}")
    # Full biased covariance sequence via a length >= 2N-1 transform.
    nfft = 1
    while nfft < 2 * n:
        nfft *= 2
    spec = np.fft.fft(record.data, nfft)
    acf = np.fft.ifft(spec.real**2 + spec.imag**2)[:n] / n
    k = np.arange(n)
    w = _window_weights(window, k, truncation)
    terms = w * acf
    folded = terms.copy()
    if n > 1:
        # lag -k contributes at grid index n - k
        folded[1:] += terms[1:].conjugate()[::-1]
    values = np.fft.fft(folded)
    peak = np.abs(values.real).max() if n else 1.0
    if np.abs(values.imag).max(initial=0.0) > 1e-8 * max(peak, 1.0):
        raise ValueError("windowed spectrum has a non-real residue; data inconsistent")
    return PeriodogramValues(FrequencyGrid((n,)), np.clip(values.real, 0.0, None), (n,))
