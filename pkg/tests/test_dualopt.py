"""Dual objective, gradient, and descent: finite differences and fixed points."""

import numpy as np
import pytest

from gencep.cepstral import GenCepstralSet, true_covariances, true_gen_cepstral
from gencep.dualopt import (
    DualParameterization,
    MomentData,
    SolverConfig,
    TrigPoly,
    dual_gradient,
    dual_objective,
    eval_trig_poly,
    moment_residuals,
    optimal_spectrum,
    solve_dual,
)
from gencep.errors import InfeasiblePointError
from gencep.lags import lag_box
from gencep.spectra import CovarianceSet, FrequencyGrid


def naive_trig_values(coeffs: dict, grid: FrequencyGrid) -> np.ndarray:
    """Direct sum over every stored lag, real part taken at the end."""
    out = np.zeros(grid.shape, dtype=np.complex128)
    for k, c in coeffs.items():
        out += c * np.exp(-1j * grid.angle(k))
    assert np.abs(out.imag).max() < 1e-12
    return out.real


def white_data(nu: int = 2, d: int = 1) -> MomentData:
    box = lag_box(1, d)
    zero = (0,) * d
    cov = CovarianceSet(d, {k: (1.0 if k == zero else 0.0) for k in box})
    cep = GenCepstralSet(1.0 - 1.0 / nu, d, {k: 0.0 for k in box})
    return MomentData(cov, cep, nu)


def complex_data() -> MomentData:
    cov = CovarianceSet(1, {(0,): 2.0, (1,): 0.3 + 0.2j})
    cep = GenCepstralSet(0.5, 1, {(0,): 0.2, (1,): 0.1 + 0.05j})
    return MomentData(cov, cep, 2)


class TestTrigPoly:
    def test_eval_matches_naive_sum(self):
        poly = TrigPoly(1, {(0,): 1.5, (1,): 0.3 - 0.2j, (2,): -0.1 + 0.05j})
        grid = FrequencyGrid(16)
        assert np.allclose(eval_trig_poly(poly, grid), naive_trig_values(poly.coeffs, grid))

    def test_eval_two_d(self):
        poly = TrigPoly(2, {(0, 0): 2.0, (1, 0): 0.25, (0, 1): -0.1j, (1, -1): 0.2 + 0.1j})
        grid = FrequencyGrid((8, 6))
        assert np.allclose(eval_trig_poly(poly, grid), naive_trig_values(poly.coeffs, grid))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            eval_trig_poly(TrigPoly(1, {(0,): 1.0}), FrequencyGrid((4, 4)))

    def test_is_real(self):
        assert TrigPoly(1, {(0,): 1.0, (1,): 0.5}).is_real()
        assert not TrigPoly(1, {(0,): 1.0, (1,): 0.5j}).is_real()


class TestMomentData:
    def test_rejects_small_nu(self):
        with pytest.raises(ValueError):
            MomentData(white_data().covariances, white_data().cepstra, 1)

    def test_rejects_alpha_mismatch(self):
        base = white_data(nu=2)
        with pytest.raises(ValueError):
            MomentData(base.covariances, base.cepstra, 3)

    def test_requires_zero_lag(self):
        cov = CovarianceSet(1, {(1,): 0.1})
        cep = GenCepstralSet(0.5, 1, {(1,): 0.0})
        with pytest.raises(ValueError):
            MomentData(cov, cep, 2)

    def test_requires_cepstra_on_nonzero_lags(self):
        cov = CovarianceSet(1, {(0,): 1.0, (1,): 0.2})
        cep = GenCepstralSet(0.5, 1, {})
        with pytest.raises(ValueError):
            MomentData(cov, cep, 2)

    def test_warns_when_order_too_small_for_dimension(self):
        cov = CovarianceSet(3, {(0, 0, 0): 1.0})
        cep = GenCepstralSet(0.5, 3, {})
        with pytest.warns(UserWarning):
            MomentData(cov, cep, 2)

    def test_alpha_and_positive_lags(self):
        data = white_data(nu=4)
        assert data.alpha == pytest.approx(0.75)
        assert data.positive_lags() == [(1,)]


class TestObjective:
    def test_trivial_point_value(self):
        """At P = Q = 1 with nu = 2 the objective is 1 + lam + c0."""
        data = white_data()
        p = TrigPoly(1, {(0,): 1.0})
        q = TrigPoly(1, {(0,): 1.0})
        lam = 1e-3
        value = dual_objective(data, p, q, lam, grid=64)
        assert value == pytest.approx(1.0 + lam + 1.0, abs=1e-14)

    def test_general_nu_trivial_point(self):
        data = white_data(nu=3)
        p = TrigPoly(1, {(0,): 1.0})
        q = TrigPoly(1, {(0,): 1.0})
        value = dual_objective(data, p, q, 0.0, grid=64)
        assert value == pytest.approx(0.5 + 1.0, abs=1e-14)

    def test_infeasible_point_raises(self):
        data = white_data()
        p = TrigPoly(1, {(0,): 1.0, (1,): 0.8})
        q = TrigPoly(1, {(0,): 1.0})
        with pytest.raises(InfeasiblePointError):
            dual_objective(data, p, q, 1e-6, grid=64)


class TestGradient:
    def _fd_check(self, data, real_mode, seed, nu_grid=48, h=1e-6):
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
        grad = dual_gradient(data, p, q, 1e-4, nu_grid, real_coefficients=real_mode)
        fd = np.empty_like(grad)
        for i in range(layout.size):
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            fp = dual_objective(data, make_polys(xp)[0], make_polys(xp)[1], 1e-4, nu_grid)
            fm = dual_objective(data, make_polys(xm)[0], make_polys(xm)[1], 1e-4, nu_grid)
            fd[i] = (fp - fm) / (2.0 * h)
        denom = max(np.linalg.norm(grad), 1.0)
        assert np.linalg.norm(grad - fd) / denom <= 1e-6

    def test_real_mode_one_d(self):
        self._fd_check(white_data(nu=3), real_mode=True, seed=1)

    def test_complex_mode_one_d(self):
        self._fd_check(complex_data(), real_mode=False, seed=2)

    def test_real_mode_two_d(self):
        self._fd_check(white_data(nu=2, d=2), real_mode=True, seed=3, nu_grid=(12, 12))


class TestSolveDual:
    def test_white_moments_are_a_fixed_point(self):
        data = white_data()
        sol = solve_dual(data, SolverConfig(lam=0.0, grid_shape=128))
        assert sol.converged
        assert sol.iterations == 0
        assert sol.q[(0,)].real == pytest.approx(1.0, abs=1e-12)
        assert abs(sol.p[(1,)]) <= 1e-12 and abs(sol.q[(1,)]) <= 1e-12
        res = moment_residuals(sol, data)
        assert res.covariance_norm <= 1e-12
        assert np.allclose(optimal_spectrum(sol), 1.0)

    def test_objective_trace_is_monotone(self):
        data = self._arma_data()
        sol = solve_dual(data, SolverConfig(lam=1e-6, grid_shape=256, tol=1e-6))
        assert sol.converged
        objective = sol.trace[:, 1]
        assert np.all(np.diff(objective) <= 1e-14)

    def test_recovers_in_class_spectrum(self):
        """Truth of the exact (P/Q)^nu form is recovered through its moments."""
        nu = 2

        def phi(theta):
            return ((1.0 - 0.4 * np.cos(theta)) / (0.9 + 0.2 * np.cos(theta))) ** nu

        box = lag_box(1, 1)
        data = MomentData(
            true_covariances(phi, box), true_gen_cepstral(phi, 1.0 - 1.0 / nu, box), nu
        )
        sol = solve_dual(data, SolverConfig(lam=1e-6, grid_shape=512, tol=1e-10))
        assert sol.converged
        assert sol.p[(1,)].real == pytest.approx(-0.2, abs=1e-4)
        assert sol.q[(0,)].real == pytest.approx(0.9, abs=1e-4)
        assert sol.q[(1,)].real == pytest.approx(0.1, abs=1e-4)
        grid = FrequencyGrid(512)
        rel = np.abs(optimal_spectrum(sol) - phi(grid.mesh()[0])) / phi(grid.mesh()[0])
        assert rel.max() <= 1e-4

    def test_max_iter_zero_reports_not_converged(self):
        sol = solve_dual(self._arma_data(), SolverConfig(grid_shape=64, max_iter=0))
        assert not sol.converged
        assert sol.iterations == 0
        assert sol.trace.shape == (1, 4)

    def test_infeasible_init_raises(self):
        data = white_data()
        bad_p = TrigPoly(1, {(0,): 1.0, (1,): 0.9})
        q = TrigPoly(1, {(0,): 1.0})
        with pytest.raises(InfeasiblePointError):
            solve_dual(data, SolverConfig(grid_shape=64), init=(bad_p, q))

    def test_grid_is_required(self):
        with pytest.raises(ValueError):
            solve_dual(white_data())

    def test_real_mode_detected_from_data(self):
        sol = solve_dual(white_data(), SolverConfig(grid_shape=32))
        assert sol.real_coefficients is True
        sol = solve_dual(complex_data(), SolverConfig(grid_shape=64, max_iter=5))
        assert sol.real_coefficients is False

    @staticmethod
    def _arma_data() -> MomentData:
        def phi(theta):
            z = np.exp(-1j * theta)
            return np.abs(1.0 + 0.4 * z) ** 2 / np.abs(1.0 - 0.5 * z) ** 2

        box = lag_box(1, 1)
        return MomentData(true_covariances(phi, box), true_gen_cepstral(phi, 0.5, box), 2)


class TestParameterization:
    def test_pack_unpack_roundtrip_complex(self):
        data = complex_data()
        layout = DualParameterization(data, real_coefficients=False)
        p = TrigPoly(1, {(0,): 1.0, (1,): 0.1 - 0.05j})
        q = TrigPoly(1, {(0,): 0.8, (1,): -0.02 + 0.03j})
        p2, q2 = layout.unpack(layout.pack(p, q))
        assert p2[(1,)] == pytest.approx(p[(1,)])
        assert q2[(1,)] == pytest.approx(q[(1,)])
        assert q2[(0,)] == pytest.approx(q[(0,)])

    def test_pack_requires_unit_constant(self):
        data = white_data()
        layout = DualParameterization(data, real_coefficients=True)
        p = TrigPoly(1, {(0,): 2.0})
        with pytest.raises(ValueError):
            layout.pack(p, TrigPoly(1, {(0,): 1.0}))

    def test_describe_matches_size(self):
        layout = DualParameterization(complex_data(), real_coefficients=False)
        assert len(layout.describe()) == layout.size
