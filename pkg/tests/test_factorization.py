"""Spectral factorization: Cholesky route vs root route, separable 2-d."""

import numpy as np
import pytest

from gencep.dualopt import TrigPoly
from gencep.errors import DefinitenessError, FactorizationError, SeparabilityError
from gencep.factorization import (
    bauer_factorize_1d,
    factorability_check_2d,
    factorize_2d_separable,
    min_phase_roots_1d,
)
from gencep.spectra import CovarianceSet


def random_positive_poly(rng: np.random.Generator, degree: int, real: bool = True) -> np.ndarray:
    """Positive-lag coefficients of |b(theta)|^2 for a random stable b."""
    b = rng.uniform(-1.0, 1.0, size=degree + 1)
    if not real:
        b = b + 1j * rng.uniform(-1.0, 1.0, size=degree + 1)
    b[0] += 2.0 + degree  # keep the factor minimum phase and the poly positive
    p = np.array([np.dot(b[k:], b[:b.size - k].conj()) for k in range(degree + 1)])
    p[0] = p[0].real
    return p


def laurent_values(p_pos: np.ndarray, size: int = 4096) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(size) / size
    vals = np.full(size, p_pos[0].real)
    for k in range(1, p_pos.size):
        vals += 2.0 * (p_pos[k].real * np.cos(k * theta) + p_pos[k].imag * np.sin(k * theta))
    return vals


def factor_values(b: np.ndarray, size: int = 4096) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(size) / size
    acc = np.zeros(size, dtype=np.complex128)
    for k, bk in enumerate(np.ravel(b)):
        acc += bk * np.exp(-1j * k * theta)
    return np.abs(acc) ** 2


class TestBauer1D:
    def test_constant_polynomial(self):
        factor = bauer_factorize_1d(np.array([4.0]))
        assert factor.coefficients == pytest.approx([2.0])
        assert factor.residual == 0.0

    def test_random_real_roundtrip(self):
        rng = np.random.default_rng(17)
        for degree in (1, 2, 4, 6):
            p = random_positive_poly(rng, degree)
            factor = bauer_factorize_1d(p)
            assert factor.residual <= 1e-8
            assert np.max(np.abs(factor_values(factor.coefficients) - laurent_values(p))) <= 1e-7
            assert factor.coefficients[0] > 0.0

    def test_complex_coefficients(self):
        rng = np.random.default_rng(23)
        p = random_positive_poly(rng, 3, real=False)
        factor = bauer_factorize_1d(p)
        assert factor.residual <= 1e-8

    def test_agrees_with_root_route(self):
        rng = np.random.default_rng(29)
        for degree in (1, 3, 5):
            p = random_positive_poly(rng, degree)
            bauer = bauer_factorize_1d(p)
            roots = min_phase_roots_1d(p)
            assert np.max(np.abs(bauer.coefficients - roots.coefficients)) <= 1e-6

    def test_accepts_trig_poly_input(self):
        poly = TrigPoly(1, {(0,): 2.0, (1,): 0.5})
        factor = bauer_factorize_1d(poly)
        assert factor.residual <= 1e-10

    def test_rejects_indefinite(self):
        with pytest.raises(DefinitenessError):
            bauer_factorize_1d(np.array([1.0, 0.8]))  # 1 + 1.6 cos has negative values

    def test_rejects_zero_polynomial(self):
        with pytest.raises(ValueError):
            bauer_factorize_1d(np.array([0.0, 0.0]))


class TestRootRoute1D:
    def test_known_factor(self):
        """|1 - 0.5 z^-1|^2 = 1.25 - cos(theta) has p = [1.25, -0.5]."""
        factor = min_phase_roots_1d(np.array([1.25, -0.5]))
        assert factor.coefficients == pytest.approx([1.0, -0.5], abs=1e-10)

    def test_root_on_circle_rejected(self):
        # |1 - z^-1|^2 = 2 - 2 cos has a unit-circle root; positivity fails first,
        # so shift mass off zero only at the lag-1 coefficient.
        with pytest.raises((FactorizationError, DefinitenessError)):
            min_phase_roots_1d(np.array([2.0, -1.0]))

    def test_min_phase_selection(self):
        rng = np.random.default_rng(31)
        p = random_positive_poly(rng, 4)
        factor = min_phase_roots_1d(p)
        roots = np.roots(factor.coefficients)
        assert np.all(np.abs(roots) < 1.0)


class TestSeparable2D:
    def test_outer_product_roundtrip(self):
        b1 = np.array([1.0, -0.6])
        b2 = np.array([1.0, -0.8])
        scale = 1.0 / np.sqrt(2.2304)
        b = scale * np.outer(b1, b2)
        p1 = np.array([np.dot(b1[k:], b1[: b1.size - k]) for k in range(2)])
        p2 = np.array([np.dot(b2[k:], b2[: b2.size - k]) for k in range(2)])
        poly = {}
        for k1 in (-1, 0, 1):
            for k2 in (-1, 0, 1):
                v1 = p1[abs(k1)] * scale
                v2 = p2[abs(k2)] * scale
                poly[(k1, k2)] = v1 * v2
        factor = factorize_2d_separable(TrigPoly(2, poly))
        assert factor.residual <= 1e-8
        got = np.abs(factor.coefficients)
        assert got == pytest.approx(np.abs(b), abs=1e-8)
        assert np.linalg.norm(factor.coefficients) == pytest.approx(1.0, abs=1e-8)

    def test_strict_mode_rejects_nearly_separable(self):
        rng = np.random.default_rng(37)
        base = np.outer([0.2, 2.0, 0.2], [0.3, 3.0, 0.3])
        noisy = base + 0.01 * rng.standard_normal(base.shape)
        noisy = 0.5 * (noisy + noisy[::-1, ::-1])  # keep Hermitian symmetry
        with pytest.raises(SeparabilityError):
            factorize_2d_separable(noisy)

    def test_project_mode_accepts_nearly_separable(self):
        rng = np.random.default_rng(37)
        base = np.outer([0.2, 2.0, 0.2], [0.3, 3.0, 0.3])
        noisy = base + 0.01 * rng.standard_normal(base.shape)
        noisy = 0.5 * (noisy + noisy[::-1, ::-1])
        factor = factorize_2d_separable(noisy, project=True)
        assert factor.diagnostics["projected"] is True
        assert factor.diagnostics["svd_ratio"] > 1e-8
        # quality gate against the projected target is tight even though the
        # residual against the noisy input is not
        assert factor.diagnostics["projection_residual"] <= 1e-8
        assert factor.residual > 1e-4

    def test_far_from_rank_one_rejected_even_with_projection(self):
        """Singular value ratio 1 / 1.5 > 0.5 exceeds the projection sanity bound."""
        mat = np.diag([1.0, 1.5, 1.0]).astype(float)
        with pytest.raises(SeparabilityError):
            factorize_2d_separable(mat, project=True)

    def test_even_shape_rejected(self):
        with pytest.raises(ValueError):
            factorize_2d_separable(np.ones((2, 3)))

    def test_indefinite_axis_rejected(self):
        mat = np.outer([-1.0, 0.1, -1.0], [-1.0, 0.1, -1.0])
        with pytest.raises(DefinitenessError):
            factorize_2d_separable(mat)


class TestFactorabilityCheck:
    def test_separable_flags(self):
        mat = np.outer([0.25, 1.0, 0.25], [0.3, 2.0, 0.3])
        report = factorability_check_2d(mat)
        assert report["separable"] is True
        assert report["positive"] is True
        assert report["general_condition_checked"] is False

    def test_non_separable_flags(self):
        mat = np.diag([0.2, 4.0, 0.2]).astype(float)
        report = factorability_check_2d(mat)
        assert report["separable"] is False
        assert report["svd_ratio"] > 1e-3

    def test_covariance_rank_reported(self):
        cov = CovarianceSet(
            2,
            {
                (0, 0): 2.0,
                (1, 0): 0.5,
                (0, 1): 0.4,
                (1, 1): 0.1,
                (1, -1): 0.1,
                (2, 0): 0.1,
                (0, 2): 0.1,
                (2, 1): 0.0,
                (1, 2): 0.0,
                (2, 2): 0.0,
                (2, -1): 0.0,
                (-1, 2): 0.0,
                (2, -2): 0.0,
            },
        )
        mat = np.outer([0.25, 1.0, 0.25], [0.3, 2.0, 0.3])
        report = factorability_check_2d(mat, covariances=cov)
        assert report["covariance_rank"] is not None
        assert report["covariance_rank"] >= 1
