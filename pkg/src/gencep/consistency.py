"""Finite-sample verification machinery for the cepstral estimator.

Exact power moments of exponential periodogram ordinates, cross moments of
correlated ordinates through the Gauss hypergeometric diagonal, exact
finite-start component covariances of filtered white noise, and seeded Monte
Carlo studies of the estimator against those formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import lags as lagmod
from .cepstral import correction_constant, estimate_gen_cepstral
from .numerics import _as_alpha_value, gamma_fn, hyp2f1_diag
from .signal import RationalFilter, SampleRecord, gen_periodic_gaussian, gen_white_noise, impulse_response
from .spectra import periodogram


def theoretical_power_moments(lam, alpha) -> tuple:
    """Mean and variance of X^alpha for X exponential with mean lam.

    mean = lam^a Gamma(1 + a), var = lam^(2a) (Gamma(1 + 2a) - Gamma(1 + a)^2).
    Vectorized over lam.
    """
    a = _as_alpha_value(alpha)
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam <= 0.0):
        raise ValueError("component variances must be positive")
    g1 = gamma_fn(1.0 + a)
    g2 = gamma_fn(1.0 + 2.0 * a)
    mean = lam**a * g1
    var = lam ** (2.0 * a) * (g2 - g1 * g1)
    if mean.ndim == 0:
        return float(mean), float(var)
    return mean, var


def cross_power_moment(lam1: float, lam2: float, r: complex, alpha) -> float:
    """E[X1^a X2^a] for jointly circular exponential-modulus ordinates.

    X_i = |Y_i|^2 with (Y_1, Y_2) jointly circular Gaussian, var lam_i and
    cross covariance r. Equals
    lam1^a lam2^a Gamma(1+a)^2 2F1(-a, -a; 1; rho^2), rho^2 = |r|^2/(lam1 lam2).
    """
    a = _as_alpha_value(alpha)
    if lam1 <= 0.0 or lam2 <= 0.0:
        raise ValueError("component variances must be positive")
    rho2 = abs(r) ** 2 / (lam1 * lam2)
    if rho2 > 1.0 + 1e-12:
        raise ValueError(f"cross covariance exceeds Cauchy-Schwarz bound: rho^2 = {rho2}")
    rho2 = min(rho2, 1.0)
    g1 = gamma_fn(1.0 + a)
    return (lam1 * lam2) ** a * g1 * g1 * hyp2f1_diag(a, rho2)


def _component_rows(filt: RationalFilter, n: int, rows) -> np.ndarray:
    """Rows H[l, s] with E[Ybar_l1 conj(Ybar_l2)] = (1/n) sum_s H[l1,s] conj(H[l2,s]).

    Uses the finite-start convolution structure: with S_l(L) the partial sum
    of w_u e^(-i theta_l u) over u < L, H[l, s] = e^(-i theta_l s) S_l(n - s).
    """
    if filt.d != 1:
        raise ValueError("component covariances are defined for 1-d filters")
    w = impulse_response(filt, n).astype(np.complex128)
    u = np.arange(n)
    out = np.empty((len(rows), n), dtype=np.complex128)
    for i, ell in enumerate(rows):
        kernel = np.exp(-2j * np.pi * (int(ell) % n) * u / n)
        partial = np.cumsum(kernel * w)
        out[i] = kernel * partial[::-1]
    return out


def spectral_component_covariance(filt: RationalFilter, n: int, l1: int, l2: int) -> complex:
    """Exact E[Ybar_l1 conj(Ybar_l2)] for unit white noise started at t = 0."""
    h = _component_rows(filt, int(n), (l1, l2))
    return complex(np.vdot(h[1], h[0]) / n)


def correlation_sum(filt: RationalFilter, n: int, l1: int) -> float:
    """Sum over l2 of the squared modulus correlation of components l1, l2.

    The l2 = l1 term contributes exactly 1, so the sum is >= 1.
    """
    n = int(n)
    h = _component_rows(filt, n, range(n))
    lam = np.mean(np.abs(h) ** 2, axis=1)
    row = h[int(l1) % n] @ h.conj().T / n
    rho2 = np.abs(row) ** 2 / (lam[int(l1) % n] * lam)
    return float(np.sum(rho2))


def variance_bound(lams, alpha) -> float:
    """Constant-in-n variance bound (C1 / (a n)^2) (sum lam^a)^2.

    Valid for arbitrarily correlated circular components; for lam constant
    the bound does not shrink with n, unlike the independent-component
    variance.
    """
    a = _as_alpha_value(alpha)
    lams = np.asarray(lams, dtype=np.float64)
    if lams.ndim != 1 or lams.size == 0 or np.any(lams <= 0.0):
        raise ValueError("lams must be a vector of positive variances")
    n = lams.size
    c1 = gamma_fn(1.0 + 2.0 * a) - gamma_fn(1.0 + a) ** 2
    return float(c1 / (a * n) ** 2 * np.sum(lams**a) ** 2)


def _independent_variance(lams: np.ndarray, alpha: float) -> float:
    """Exact estimator variance when components are independent."""
    a = float(alpha)
    n = lams.size
    c1 = gamma_fn(1.0 + 2.0 * a) - gamma_fn(1.0 + a) ** 2
    return float(c1 / (a * n) ** 2 * np.sum(lams ** (2.0 * a)))


@dataclass
class Assumption2Row:
    size: int
    gamma: float
    sums: dict
    ratio: float


@dataclass
class Assumption2Report:
    """Growth diagnostics of component correlations across sample sizes.

    consistent is True when the max probed correlation sum grows strictly
    slower than n and the largest component variance stays bounded.
    """

    rows: list
    consistent: bool
    probes: tuple


def assumption2_report(filt: RationalFilter, sizes, probes=(0.25, 0.5, 0.75)) -> Assumption2Report:
    rows = []
    for n in sizes:
        n = int(n)
        h = _component_rows(filt, n, range(n))
        lam = np.mean(np.abs(h) ** 2, axis=1)
        sums = {}
        for frac in probes:
            l1 = int(round(frac * n)) % n
            row = h[l1] @ h.conj().T / n
            rho2 = np.abs(row) ** 2 / (lam[l1] * lam)
            sums[frac] = (l1, float(np.sum(rho2)))
        ratio = max(s for _, s in sums.values()) / n
        rows.append(Assumption2Row(n, float(lam.max()), sums, ratio))
    ratios = [r.ratio for r in rows]
    gammas = [r.gamma for r in rows]
    consistent = all(b < a for a, b in zip(ratios, ratios[1:])) and max(gammas) <= 2.0 * min(gammas)
    return Assumption2Report(rows, consistent, tuple(probes))


@dataclass
class MCConfig:
    """Monte Carlo study configuration.

    process is one of 'white-circular', 'white-real', 'circulant', 'arma'.
    circulant_base is a short covariance prefix [c0, c1, ...] extended
    symmetrically to each size; filt drives the 'arma' process.
    """

    process: str
    sizes: tuple
    trials: int
    alpha: float
    seed: int
    corrected: bool = True
    variance: float = 1.0
    circulant_base: Optional[np.ndarray] = None
    filt: Optional[RationalFilter] = None
    track_lags: tuple = (0, 1)

    def __post_init__(self) -> None:
        known = {"white-circular", "white-real", "circulant", "arma"}
        if self.process not in known:
            raise ValueError(f"unknown process {self.process!r}, expected one of {sorted(known)}")
        self.sizes = tuple(int(n) for n in self.sizes)
        if not self.sizes or any(n < 2 for n in self.sizes):
            raise ValueError("sizes must be integers >= 2")
        if self.trials < 2:
            raise ValueError("at least two trials are required for a variance")
        self.alpha = _as_alpha_value(self.alpha)
        if self.process == "circulant" and self.circulant_base is None:
            raise ValueError("circulant process requires circulant_base")
        if self.process == "arma" and self.filt is None:
            raise ValueError("arma process requires filt")


@dataclass
class MomentRow:
    size: int
    lag: tuple
    emp_mean: complex
    emp_var: float
    theo_mean: Optional[complex]
    theo_var: Optional[float]


@dataclass
class MomentReport:
    config: MCConfig
    rows: list = field(default_factory=list)

    def row(self, size: int, lag) -> MomentRow:
        key = lagmod.as_lag(lag, 1)
        for r in self.rows:
            if r.size == int(size) and r.lag == key:
                return r
        raise KeyError(f"no row for size {size}, lag {lag}")


def _extended_circulant(base: np.ndarray, n: int) -> np.ndarray:
    base = np.asarray(base, dtype=np.float64)
    if base.ndim != 1 or base.size < 1:
        raise ValueError("circulant base must be a vector")
    if base.size > n // 2 + 1:
        raise ValueError(f"circulant base length {base.size} too long for size {n}")
    c = np.zeros(n)
    c[: base.size] = base
    c[n - base.size + 1 :] += base[1:][::-1]
    return c


def _component_variances(config: MCConfig, n: int) -> Optional[np.ndarray]:
    if config.process == "white-circular":
        return np.full(n, config.variance)
    if config.process == "circulant":
        lam = np.fft.fft(_extended_circulant(config.circulant_base, n))
        if np.any(lam.real <= 0.0):
            raise ValueError("circulant base is not positive definite at this size")
        return lam.real
    return None


def _draw(config: MCConfig, n: int, seed) -> SampleRecord:
    if config.process == "white-circular":
        return gen_white_noise(n, config.variance, seed, kind="circular")
    if config.process == "white-real":
        return gen_white_noise(n, config.variance, seed, kind="real")
    if config.process == "circulant":
        return gen_periodic_gaussian(_extended_circulant(config.circulant_base, n), seed)
    noise = gen_white_noise(n, config.variance, seed, kind="real")
    from .signal import filter_apply

    return filter_apply(config.filt, noise)


def mc_estimator_study(config: MCConfig) -> MomentReport:
    """Empirical moments of the cepstral estimator over seeded trials.

    Variance is the scalar E|m_hat - E m_hat|^2. Exact finite-size means and
    variances are attached for processes with independent circular
    components (white-circular, circulant); other processes get None.
    """
    a = config.alpha
    c = correction_constant(a)
    track = [lagmod.as_lag(k, 1) for k in config.track_lags]
    report = MomentReport(config)
    root = np.random.SeedSequence(config.seed)
    size_seqs = root.spawn(len(config.sizes))
    for n, size_seq in zip(config.sizes, size_seqs):
        draws = {k: np.empty(config.trials, dtype=np.complex128) for k in track}
        for t, trial_seq in enumerate(size_seq.spawn(config.trials)):
            record = _draw(config, n, trial_seq)
            est = estimate_gen_cepstral(periodogram(record), a, track, corrected=config.corrected)
            for k in track:
                draws[k][t] = est[k]
        lam = _component_variances(config, n)
        for k in track:
            values = draws[k]
            emp_mean = complex(values.mean())
            emp_var = float(np.sum(np.abs(values - emp_mean) ** 2) / (config.trials - 1))
            theo_mean = theo_var = None
            if lam is not None:
                powered = lam**a
                g1 = gamma_fn(1.0 + a)
                if k == (0,):
                    theo_mean = complex((g1 * powered.mean() - 1.0) / a)
                else:
                    theo_mean = complex(g1 / a * np.fft.ifft(powered)[k[0] % n])
                theo_var = _independent_variance(lam, a)
                if config.corrected:
                    theo_mean = c * theo_mean + ((c - 1.0) / a if k == (0,) else 0.0)
                    theo_var = c * c * theo_var
            report.rows.append(MomentRow(n, k, emp_mean, emp_var, theo_mean, theo_var))
    return report
