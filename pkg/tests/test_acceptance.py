"""Acceptance gates, one test per shipped guarantee.

Each test is a single pass/fail line under `pytest -v`; tolerances are the
documented gates, not the tighter values the unit suites use. The one-
dimensional identification gate on parameter accuracy is stricter than the
statistical floor of the estimation problem at the stated sample size; see
README.md for the measured values.
"""

import math

import numpy as np
import pytest
from scipy.special import hyp2f1

from gencep.cepstral import correction_constant, estimate_gen_cepstral, GenCepstralSet
from gencep.consistency import (
    MCConfig,
    assumption2_report,
    cross_power_moment,
    mc_estimator_study,
    theoretical_power_moments,
)
from gencep.dualopt import (
    DualParameterization,
    MomentData,
    SolverConfig,
    TrigPoly,
    dual_gradient,
    dual_objective,
    solve_dual,
)
from gencep.factorization import (
    bauer_factorize_1d,
    factorize_2d_separable,
    min_phase_roots_1d,
)
from gencep.pipeline import (
    CascadeModel,
    IdentificationConfig,
    identify_cascade,
    parameter_error,
    spectrum_error,
)
from gencep.signal import RationalFilter, SampleRecord, cascade_apply, gen_white_noise
from gencep.spectra import (
    CovarianceSet,
    FrequencyGrid,
    biased_covariances,
    covariances_from_periodogram,
    periodogram,
)


def test_correction_constants():
    """1/Gamma(5/3) and 2/sqrt(pi) to four decimals."""
    assert correction_constant(2.0 / 3.0) == pytest.approx(1.1077, abs=1e-4)
    assert correction_constant(0.5) == pytest.approx(1.1284, abs=1e-4)


def test_exponential_half_power_moments():
    """Mean and variance of sqrt(X), X unit exponential, over 1e6 draws."""
    mean_t, var_t = theoretical_power_moments(1.0, 0.5)
    assert mean_t == pytest.approx(math.sqrt(math.pi) / 2.0, abs=1e-14)
    assert var_t == pytest.approx(1.0 - math.pi / 4.0, abs=1e-14)

    n = 1_000_000
    y = np.sqrt(np.random.default_rng(20260815).exponential(1.0, size=n))
    # E[Y^k] = Gamma(1 + k/2) gives the exact fourth central moment
    ey = [math.gamma(1.0 + 0.5 * k) for k in range(5)]
    m4 = ey[4] - 4 * mean_t * ey[3] + 6 * mean_t**2 * ey[2] - 4 * mean_t**3 * ey[1] + mean_t**4
    se_mean = math.sqrt(var_t / n)
    se_var = math.sqrt((m4 - var_t**2) / n)
    assert abs(y.mean() - mean_t) <= 3.0 * se_mean
    assert abs(y.var() - var_t) <= 3.0 * se_var


def test_hypergeometric_gamma_identity():
    """2F1(-a, -a; 1; 1) equals Gamma(2a+1) / Gamma(a+1)^2."""
    for alpha in np.arange(0.1, 0.95, 0.1):
        lhs = hyp2f1(-alpha, -alpha, 1.0, 1.0)
        rhs = math.gamma(2.0 * alpha + 1.0) / math.gamma(alpha + 1.0) ** 2
        assert abs(lhs - rhs) <= 1e-10
        # the fully correlated cross moment reduces to the same quantity
        assert abs(cross_power_moment(1.0, 1.0, 1.0, alpha) - rhs * math.gamma(alpha + 1.0) ** 2) <= 1e-10


def test_white_circular_cepstral_consistency():
    """Corrected lag-1 estimate: vanishing mean, variance shrinking with N."""
    config = MCConfig(
        process="white-circular",
        sizes=(512, 4096),
        trials=500,
        alpha=0.5,
        seed=2026,
        corrected=True,
        track_lags=(0, 1),
    )
    report = mc_estimator_study(config)
    small = report.row(512, 1)
    large = report.row(4096, 1)
    assert abs(large.emp_mean) <= 0.01
    assert large.emp_var <= 0.25 * small.emp_var


def test_uncorrected_bias_ratio():
    """Uncorrected over corrected trial means equals Gamma(alpha + 1)."""
    base = dict(
        process="circulant",
        sizes=(512,),
        trials=200,
        alpha=0.5,
        seed=7,
        circulant_base=np.array([1.0, 0.3]),
        track_lags=(1,),
    )
    raw = mc_estimator_study(MCConfig(corrected=False, **base)).row(512, 1)
    fixed = mc_estimator_study(MCConfig(corrected=True, **base)).row(512, 1)
    ratio = (raw.emp_mean / fixed.emp_mean).real
    assert ratio == pytest.approx(math.gamma(1.5), rel=0.03)


def test_dense_grid_covariance_recovery():
    """Grid means on 2N-1 nodes reproduce every biased covariance."""
    n = 32
    lag_list = [(k,) for k in range(-(n - 1), n)]
    for seed in range(5):
        rng = np.random.default_rng(seed)
        for kind in ("real", "circular"):
            data = rng.normal(size=n)
            if kind == "circular":
                data = data + 1j * rng.normal(size=n)
            record = SampleRecord(data)
            direct = biased_covariances(record, lag_list)
            via_grid = covariances_from_periodogram(periodogram(record, dense=(2 * n - 1,)), lag_list)
            worst = max(abs(direct[k] - via_grid[k]) for k in lag_list)
            assert worst <= 1e-9


def test_component_correlation_growth():
    """Correlation sums at the 3N/4 component grow strictly slower than N."""
    filt = RationalFilter([1.0, -1.0, 0.8], [1.0, -1.6, 0.81])
    report = assumption2_report(filt, sizes=(64, 128, 256, 512), probes=(0.75,))
    sums = [row.sums[0.75][1] for row in report.rows]
    per_n = [s / row.size for s, row in zip(sums, report.rows)]
    assert sums[-1] / sums[0] <= 1.5
    assert all(b < a for a, b in zip(per_n, per_n[1:]))
    assert report.consistent


def _finite_difference_gap(data, real_mode, seed, grid, lam=1e-4, h=1e-6):
    """Relative gap between analytic dual gradient and central differences."""
    rng = np.random.default_rng(seed)
    layout = DualParameterization(data, real_mode)
    pos = layout.pos

    def make_polys(x):
        pc = {(0,) * data.d: 1.0}
        qc = {(0,) * data.d: x[0]}
        i = 1
        for coeffs in (qc, pc):
            for k in pos:
                re = x[i]
                i += 1
                im = 0.0
                if not real_mode:
                    im = x[i]
                    i += 1
                coeffs[k] = complex(re, im)
        return TrigPoly(data.d, pc), TrigPoly(data.d, qc)

    x = np.zeros(layout.size)
    x[0] = 1.0
    x += rng.uniform(-0.04, 0.04, size=layout.size)
    p, q = make_polys(x)
    grad = dual_gradient(data, p, q, lam, grid, real_coefficients=real_mode)
    fd = np.empty_like(grad)
    for i in range(layout.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd[i] = (
            dual_objective(data, *make_polys(xp), lam, grid)
            - dual_objective(data, *make_polys(xm), lam, grid)
        ) / (2.0 * h)
    return np.linalg.norm(grad - fd) / max(np.linalg.norm(grad), 1.0)


def test_dual_gradient_matches_finite_differences():
    """Analytic gradient vs central differences at 20 random feasible points."""
    one_d = MomentData(
        CovarianceSet(1, {(0,): 1.0, (1,): 0.3 + 0.2j, (-1,): 0.3 - 0.2j}),
        GenCepstralSet(2.0 / 3.0, 1, {(1,): 0.2 + 0.05j, (-1,): 0.2 - 0.05j}),
        nu=3,
    )
    cov2 = {(0, 0): 1.0}
    cep2 = {}
    for k, c, m in (((0, 1), 0.25, 0.15), ((1, 0), -0.2, 0.1), ((1, 1), 0.1, 0.05), ((1, -1), 0.12, -0.08)):
        cov2[k], cov2[(-k[0], -k[1])] = c, c
        cep2[k], cep2[(-k[0], -k[1])] = m, m
    two_d = MomentData(CovarianceSet(2, cov2), GenCepstralSet(0.5, 2, cep2), nu=2)

    for seed in range(10):
        assert _finite_difference_gap(one_d, real_mode=False, seed=seed, grid=48) <= 1e-5
        assert _finite_difference_gap(two_d, real_mode=True, seed=100 + seed, grid=(12, 12)) <= 1e-5


def test_white_moments_fixed_point():
    """White covariances and zero cepstra leave the flat spectrum in place."""
    data = MomentData(
        CovarianceSet(1, {(0,): 1.0, (1,): 0.0, (-1,): 0.0}),
        GenCepstralSet(2.0 / 3.0, 1, {(1,): 0.0, (-1,): 0.0}),
        nu=3,
    )
    solution = solve_dual(data, SolverConfig(lam=1e-6, grid_shape=128))
    assert solution.converged
    assert abs(solution.q[(0,)] - 1.0) <= 1e-3
    assert abs(solution.p[(1,)]) <= 1e-3
    assert abs(solution.q[(1,)]) <= 1e-3
    assert solution.grad_norm <= 1e-6


def _identification_errors(truth, nu, sample_shape, burn_in, config, seeds, error_grid):
    filt = truth.subsystem()
    shape = tuple(s + burn_in for s in sample_shape)
    perrs, serrs = [], []
    for seed in seeds:
        noise = gen_white_noise(shape, seed=seed)
        samples = cascade_apply(filt, nu, noise, burn_in=burn_in)
        model, _ = identify_cascade(samples, nu, config)
        assert model is not None
        perrs.append(parameter_error(model, truth))
        truth_spectrum = truth.spectrum(error_grid)
        serrs.append(spectrum_error(model.spectrum(error_grid), truth_spectrum, error_grid)["rel_l2"])
    return float(np.median(perrs)), float(np.median(serrs))


def test_one_d_cascade_identification():
    """Third-order cascade from 1e4 samples: spectrum and parameter gates."""
    truth = CascadeModel(3, [0.8872, 0.1774, -0.4259], [1.0, -0.5, 0.25])
    config = IdentificationConfig(lam=1e-6, grid_shape=10_000)
    perr, serr = _identification_errors(
        truth, 3, (10_000,), 200, config, seeds=range(5), error_grid=FrequencyGrid((512,))
    )
    assert serr <= 0.05, f"median relative spectrum error {serr:.4f} exceeds 0.05"
    assert perr <= 0.05, (
        f"median parameter error {perr:.4f} exceeds 0.05 "
        f"(median relative spectrum error {serr:.4f} is within its 0.05 gate)"
    )


def test_two_d_cascade_identification():
    """Separable second-order cascade from a 100 x 100 field."""
    a = np.outer([1.0, -0.5], [1.0, -0.7])
    b = np.outer([1.0, -0.6], [1.0, -0.8]) / math.sqrt(2.2304)
    truth = CascadeModel(2, b, a)
    config = IdentificationConfig(lam=1e-6, grid_shape=(30, 30))
    perr, serr = _identification_errors(
        truth, 2, (100, 100), 20, config, seeds=range(3), error_grid=FrequencyGrid((30, 30))
    )
    assert perr <= 0.3, f"median parameter error {perr:.4f} exceeds 0.3"
    assert serr <= 0.10, f"median relative spectrum error {serr:.4f} exceeds 0.10"


def test_factorization_round_trips():
    """Random positive polynomials factor exactly by both 1-d routes; 2-d outer products round-trip."""
    rng = np.random.default_rng(41)
    theta = 2.0 * np.pi * np.arange(4096) / 4096
    for _ in range(50):
        degree = int(rng.integers(0, 7))
        bvec = rng.uniform(-1.0, 1.0, size=degree + 1)
        bvec[0] += 2.0 + degree
        p = np.array([np.dot(bvec[k:], bvec[: bvec.size - k]) for k in range(degree + 1)])
        factor = bauer_factorize_1d(p)
        target = np.full(theta.size, p[0])
        for k in range(1, p.size):
            target += 2.0 * p[k] * np.cos(k * theta)
        values = np.zeros(theta.size, dtype=np.complex128)
        for k, bk in enumerate(factor.coefficients):
            values += bk * np.exp(-1j * k * theta)
        assert np.max(np.abs(np.abs(values) ** 2 - target)) <= 1e-7
        via_roots = min_phase_roots_1d(p)
        assert np.max(np.abs(factor.coefficients - via_roots.coefficients)) <= 1e-6

    axes = [
        (np.array([1.0, -0.6]) / math.sqrt(2.2304), np.array([1.0, -0.8])),
        (np.array([2.1, 0.4, -0.3]), np.array([1.5, -0.5])),
        (np.array([3.0, 1.0, 0.2, -0.1]), np.array([2.0, 0.3, 0.4])),
    ]
    for b1, b2 in axes:
        auto1 = np.convolve(b1, b1[::-1])
        auto2 = np.convolve(b2, b2[::-1])
        factor = factorize_2d_separable(np.outer(auto1, auto2))
        assert np.max(np.abs(factor.coefficients - np.outer(b1, b2))) <= 1e-8
