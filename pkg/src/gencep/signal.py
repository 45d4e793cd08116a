"""Sample generation and deterministic transforms.

Covers the discrete Fourier transform pair, seeded noise generation, rational
(ARMA-type) filtering in one and two dimensions, exact circulant-embedding
generation of periodic Gaussian processes, and cascades of identical
subsystems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.signal

from .errors import DefinitenessError, SeparabilityError, StabilityError

_STABILITY_MARGIN = 1e-9
_RANK1_TOL = 1e-8


@dataclass
class SampleRecord:
    """A finite sample of a process (d = 1) or random field (d = 2).

    data holds complex values; real-valued processes carry zero imaginary
    parts and is_real = True. seed and generator_tag record provenance.
    """

    data: np.ndarray
    is_real: bool = False
    seed: Optional[int] = None
    generator_tag: str = ""

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim < 1 or any(n < 1 for n in self.data.shape):
            raise ValueError(f"sample array must be non-empty, got shape {self.data.shape}")
        if self.is_real and np.any(self.data.imag != 0.0):
            raise ValueError("is_real set but data has nonzero imaginary parts")

    @property
    def d(self) -> int:
        return self.data.ndim

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size


@dataclass
class RationalFilter:
    """Rational transfer function in nonpositive powers of z.

    For d = 1, b and a are coefficient vectors [c0, c1, ...] of
    c0 + c1 z^-1 + ... . For d = 2 they are coefficient matrices indexed by
    (z1^-k1, z2^-k2); filtering and stability require both to be separable
    (rank one).
    """

    b: np.ndarray
    a: np.ndarray

    def __post_init__(self) -> None:
        self.b = np.atleast_1d(np.asarray(self.b, dtype=np.complex128))
        self.a = np.atleast_1d(np.asarray(self.a, dtype=np.complex128))
        if self.b.ndim != self.a.ndim:
            raise ValueError("numerator and denominator must share dimension")
        if self.b.ndim not in (1, 2):
            raise ValueError(f"only d = 1 and d = 2 filters supported, got d = {self.b.ndim}")
        if self.a.flat[0] == 0.0:
            raise ValueError("denominator leading coefficient must be nonzero")

    @property
    def d(self) -> int:
        return self.b.ndim

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.b.imag == 0.0) and np.all(self.a.imag == 0.0))

    def pole_radii(self) -> np.ndarray:
        """Moduli of denominator roots (both axes pooled for d = 2)."""
        if self.d == 1:
            return _root_radii(self.a)
        a1, a2 = separable_factors(self.a)
        return np.concatenate([_root_radii(a1), _root_radii(a2)])

    def is_stable(self) -> bool:
        radii = self.pole_radii()
        return bool(radii.size == 0 or radii.max() < 1.0 - _STABILITY_MARGIN)

    def assert_stable(self) -> None:
        if not self.is_stable():
            radii = self.pole_radii()
            raise StabilityError(
                f"denominator root radius {radii.max():.12g} >= {1.0 - _STABILITY_MARGIN}"
            )


def _root_radii(coeffs: np.ndarray) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.complex128), "b")
    if c.size <= 1:
        return np.array([])
    return np.abs(np.roots(c))


def separable_factors(m: np.ndarray, tol: float = _RANK1_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Split a rank-one coefficient matrix m into vectors (u, v), m = u v^T.

    Raises SeparabilityError when the second singular value exceeds
    tol * first.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim = {m.ndim}")
    u_mat, s, vh = np.linalg.svd(m)
    if s[0] == 0.0:
        raise ValueError("zero coefficient matrix is not factorable")
    if s.size > 1 and s[1] > tol * s[0]:
        raise SeparabilityError(
            f"coefficient matrix not separable: singular value ratio {s[1] / s[0]:.3e} > {tol:g}"
        )
    root = np.sqrt(s[0])
    u = u_mat[:, 0] * root
    v = vh[0] * root
    # Rotate so the leading entry of u is real positive; the product u v^T
    # is unchanged.
    if u[0] != 0.0:
        phase = u[0] / abs(u[0])
        u = u / phase
        v = v * phase
    if np.all(np.abs(u.imag) <= 1e-14 * np.abs(u).max()) and np.all(
        np.abs(v.imag) <= 1e-14 * np.abs(v).max()
    ):
        u = u.real.astype(np.complex128)
        v = v.real.astype(np.complex128)
    return u, v


def dft(x: np.ndarray) -> np.ndarray:
    """DFT with kernel exp(-i 2 pi t l / N), matching the defining sum."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError(f"dft expects a 1-d array, got ndim = {x.ndim}")
    return np.fft.fft(x)


def idft(y: np.ndarray) -> np.ndarray:
    """Inverse DFT, (1/N) sum with conjugate kernel."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"idft expects a 1-d array, got ndim = {y.ndim}")
    return np.fft.ifft(y)


def dft_nd(x: np.ndarray) -> np.ndarray:
    """Multidimensional DFT, separable product of per-axis kernels."""
    return np.fft.fftn(np.asarray(x))


def gen_white_noise(
    shape,
    variance: float = 1.0,
    seed: Optional[int] = None,
    kind: str = "real",
) -> SampleRecord:
    """Gaussian white noise, either real or circular complex.

    Circular complex draws put variance/2 into each of the real and
    imaginary parts, so E|y|^2 = variance and E y^2 = 0.
    """
    if np.isscalar(shape):
        shape = (int(shape),)
    shape = tuple(int(n) for n in shape)
    if variance <= 0.0:
        raise ValueError(f"variance must be positive, got {variance}")
    rng = np.random.default_rng(seed)
    if kind == "real":
        data = rng.standard_normal(shape) * np.sqrt(variance)
        return SampleRecord(data, is_real=True, seed=seed, generator_tag=f"white-real(var={variance:g})")
    if kind == "circular":
        parts = rng.standard_normal((2,) + shape)
        data = (parts[0] + 1j * parts[1]) * np.sqrt(variance / 2.0)
        return SampleRecord(data, is_real=False, seed=seed, generator_tag=f"white-circular(var={variance:g})")
    raise ValueError(f"unknown noise kind {kind!r}, expected 'real' or 'circular'")


def impulse_response(filt: RationalFilter, length) -> np.ndarray:
    """Leading impulse-response coefficients of the filter.

    For d = 2 the filter must be separable and the response is the outer
    product of the per-axis responses.
    """
    filt.assert_stable()
    if filt.d == 1:
        n = int(length)
        if n < 1:
            raise ValueError(f"length must be >= 1, got {length}")
        pulse = np.zeros(n, dtype=np.complex128)
        pulse[0] = 1.0
        w = scipy.signal.lfilter(filt.b, filt.a, pulse)
        return w.real if filt.is_real else w
    b1, b2 = separable_factors(filt.b)
    a1, a2 = separable_factors(filt.a)
    n1, n2 = (length, length) if np.isscalar(length) else length
    w1 = impulse_response(RationalFilter(b1, a1), n1)
    w2 = impulse_response(RationalFilter(b2, a2), n2)
    w = np.outer(w1, w2)
    return w.real if filt.is_real else w


def filter_apply(filt: RationalFilter, x, burn_in: int = 0) -> SampleRecord:
    """Run samples through the filter with zero initial conditions.

    burn_in drops that many leading samples along every axis after
    filtering; the default keeps everything.
    """
    filt.assert_stable()
    record = x if isinstance(x, SampleRecord) else SampleRecord(np.asarray(x))
    if record.d != filt.d:
        raise ValueError(f"sample dimension {record.d} != filter dimension {filt.d}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    if any(n <= burn_in for n in record.shape):
        raise ValueError(f"burn_in {burn_in} leaves no samples for shape {record.shape}")
    data = record.data
    if filt.d == 1:
        y = scipy.signal.lfilter(filt.b, filt.a, data)
        y = y[burn_in:]
    else:
        b1, b2 = separable_factors(filt.b)
        a1, a2 = separable_factors(filt.a)
        y = scipy.signal.lfilter(b1, a1, data, axis=0)
        y = scipy.signal.lfilter(b2, a2, y, axis=1)
        y = y[burn_in:, burn_in:]
    is_real = record.is_real and filt.is_real
    if is_real:
        y = y.real
    return SampleRecord(
        y,
        is_real=is_real,
        seed=record.seed,
        generator_tag=f"filtered({record.generator_tag})",
    )


def cascade_apply(filt: RationalFilter, nu: int, x, burn_in: int = 0) -> SampleRecord:
    """Pass samples through nu identical copies of the filter in series."""
    if nu < 1 or nu != int(nu):
        raise ValueError(f"cascade order nu must be a positive integer, got {nu}")
    record = x if isinstance(x, SampleRecord) else SampleRecord(np.asarray(x))
    for _ in range(int(nu)):
        record = filter_apply(filt, record)
    if burn_in > 0:
        sliced = record.data[(slice(burn_in, None),) * record.d]
        record = SampleRecord(
            sliced, is_real=record.is_real, seed=record.seed, generator_tag=record.generator_tag
        )
    record.generator_tag = f"cascade(nu={int(nu)}, {record.generator_tag})"
    return record


def gen_periodic_gaussian(c, seed: Optional[int] = None) -> SampleRecord:
    """Exact draw of a zero-mean periodic Gaussian process.

    c is the circulant covariance sequence (length N, c[(t-s) mod N] is the
    covariance of y_t and y_s). The DFT of c must be a positive spectrum;
    offending entries are reported. The draw is complex circular with
    normalized spectral component variances exactly equal to that DFT.
    """
    c = np.asarray(c, dtype=np.complex128)
    if c.ndim != 1 or c.size < 1:
        raise ValueError(f"covariance sequence must be a non-empty vector, got shape {c.shape}")
    n = c.size
    lam = np.fft.fft(c)
    scale = np.abs(lam).max()
    if scale == 0.0:
        raise DefinitenessError("covariance sequence transforms to the zero spectrum")
    bad_imag = np.nonzero(np.abs(lam.imag) > 1e-10 * scale)[0]
    if bad_imag.size:
        raise DefinitenessError(
            f"circulant eigenvalue {bad_imag[0]} has imaginary part "
            f"{lam.imag[bad_imag[0]]:.3e}; covariance sequence is not Hermitian"
        )
    bad = np.nonzero(lam.real <= 0.0)[0]
    if bad.size:
        raise DefinitenessError(
            f"circulant eigenvalue {bad[0]} is {lam.real[bad[0]]:.6g} <= 0; "
            "covariance sequence is not positive definite"
        )
    rng = np.random.default_rng(seed)
    parts = rng.standard_normal((2, n))
    g = (parts[0] + 1j * parts[1]) / np.sqrt(2.0)
    y = np.fft.ifft(np.sqrt(lam.real) * g) * np.sqrt(n)
    return SampleRecord(y, is_real=False, seed=seed, generator_tag="periodic-gaussian")
