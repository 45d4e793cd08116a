"""Integer lag tuples and Hermitian lag-indexed coefficient maps.

Lags index Fourier coefficients of real-valued functions on the d-torus, so
coefficient maps satisfy value[-k] = conj(value[k]). A single representative
per +/- pair is the lexicographically positive one.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np


def as_lag(k, d: int | None = None) -> tuple[int, ...]:
    """Normalize an int or tuple lag to a tuple of ints."""
    if np.isscalar(k):
        lag = (int(k),)
    else:
        lag = tuple(int(v) for v in k)
    if d is not None and len(lag) != d:
        raise ValueError(f"lag {lag} has dimension {len(lag)}, expected {d}")
    return lag


def neg(k: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-v for v in k)


def is_zero(k: tuple[int, ...]) -> bool:
    return all(v == 0 for v in k)


def is_positive(k: tuple[int, ...]) -> bool:
    """True when the first nonzero component is positive."""
    for v in k:
        if v != 0:
            return v > 0
    return False


def lag_box(radius, d: int) -> list[tuple[int, ...]]:
    """All lags with |k_j| <= radius_j, ordered lexicographically."""
    radii = (radius,) * d if np.isscalar(radius) else tuple(radius)
    if len(radii) != d:
        raise ValueError(f"radius {radius} does not match dimension {d}")
    if any(r < 0 for r in radii):
        raise ValueError(f"radii must be non-negative, got {radii}")
    grids = np.meshgrid(*[np.arange(-r, r + 1) for r in radii], indexing="ij")
    return [tuple(int(v) for v in point) for point in np.stack(grids, axis=-1).reshape(-1, d)]


def normalize_lags(lags: Iterable, d: int | None = None) -> list[tuple[int, ...]]:
    """Normalize and deduplicate lags, inferring dimension when not given."""
    out: list[tuple[int, ...]] = []
    seen = set()
    for k in lags:
        lag = as_lag(k, d)
        if d is None:
            d = len(lag)
        if lag not in seen:
            seen.add(lag)
            out.append(lag)
    if not out:
        raise ValueError("at least one lag is required")
    return out


def positive_half(lags: Iterable[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Sorted lexicographically positive representatives (zero excluded)."""
    return sorted({k for k in lags if is_positive(k)})


def hermitian_fill(values: dict, tol: float = 1e-9) -> dict:
    """Complete a lag map with conjugate pairs and check consistency.

    Zero-lag entries are forced real; a conflict between provided k and -k
    entries above tol (relative) is an error.
    """
    scale = max((abs(v) for v in values.values()), default=0.0)
    out: dict[tuple[int, ...], complex] = {}
    for k, v in values.items():
        v = complex(v)
        if is_zero(k):
            if abs(v.imag) > tol * max(scale, 1.0):
                raise ValueError(f"zero-lag value {v} must be real")
            out[k] = complex(v.real, 0.0)
            continue
        mk = neg(k)
        if mk in values and abs(complex(values[mk]) - v.conjugate()) > tol * max(scale, 1.0):
            raise ValueError(f"values at {k} and {mk} are not conjugate: {v} vs {values[mk]}")
        if is_positive(k):
            out[k] = v
            out[mk] = v.conjugate()
        elif mk not in values:
            out[mk] = v.conjugate()
            out[k] = v
    return out
