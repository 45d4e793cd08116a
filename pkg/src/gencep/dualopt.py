"""Regularized dual of the covariance-and-cepstral moment problem.

The primal seeks the spectrum maximizing a generalized entropy subject to
covariance constraints on a lag set and generalized cepstral constraints on
the nonzero lags. The dual decision variables are two trigonometric
polynomials P (unit constant term) and Q (free), the candidate spectrum is
(P/Q)^nu, and a barrier weighted by lam keeps P positive. This module
evaluates the discretized dual objective and gradient and minimizes them by
Armijo-backtracking gradient descent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lags as lagmod
from .cepstral import GenCepstralSet
from .errors import InfeasiblePointError
from .spectra import CovarianceSet, FrequencyGrid


@dataclass
class TrigPoly:
    """Hermitian trigonometric polynomial sum_k c_k exp(-i <k, theta>)."""

    d: int
    coeffs: dict

    def __post_init__(self) -> None:
        normalized = {lagmod.as_lag(k, self.d): complex(v) for k, v in self.coeffs.items()}
        self.coeffs = lagmod.hermitian_fill(normalized)

    def lags(self) -> list:
        return sorted(self.coeffs.keys())

    def __getitem__(self, k) -> complex:
        return self.coeffs.get(lagmod.as_lag(k, self.d), 0.0 + 0.0j)

    def is_real(self, tol: float = 1e-10) -> bool:
        scale = max(abs(v) for v in self.coeffs.values())
        return all(abs(v.imag) <= tol * max(scale, 1.0) for v in self.coeffs.values())


def eval_trig_poly(poly: TrigPoly, grid: FrequencyGrid) -> np.ndarray:
    """Real values of the polynomial on the grid."""
    if grid.d != poly.d:
        raise ValueError(f"grid dimension {grid.d} != polynomial dimension {poly.d}")
    zero = (0,) * poly.d
    out = np.full(grid.shape, poly[zero].real)
    for k in lagmod.positive_half(poly.lags()):
        c = poly[k]
        if c == 0.0:
            continue
        angle = grid.angle(k)
        out = out + 2.0 * (c.real * np.cos(angle) + c.imag * np.sin(angle))
    return out


@dataclass
class MomentData:
    """Covariance and cepstral moments feeding the dual problem.

    The covariance lag set must be symmetric and contain 0; cepstra must
    cover its nonzero lags with power alpha = 1 - 1/nu. The zero-lag
    cepstral value, if present, is ignored by the dual. For unique positive
    solvability nu should be >= d/2 + 1; smaller values only draw a warning
    since the regularized problem can still be attempted.
    """

    covariances: CovarianceSet
    cepstra: GenCepstralSet
    nu: int

    def __post_init__(self) -> None:
        if self.nu < 2 or self.nu != int(self.nu):
            raise ValueError(f"cascade order nu must be an integer >= 2, got {self.nu}")
        self.nu = int(self.nu)
        if self.cepstra.d != self.covariances.d:
            raise ValueError("covariances and cepstra have different dimensions")
        alpha = 1.0 - 1.0 / self.nu
        if abs(self.cepstra.alpha - alpha) > 1e-9:
            raise ValueError(
                f"cepstra power {self.cepstra.alpha} does not match 1 - 1/nu = {alpha}"
            )
        zero = (0,) * self.d
        if zero not in self.covariances:
            raise ValueError("covariance set must contain the zero lag")
        for k in self.covariances.lags():
            if lagmod.neg(k) not in self.covariances:
                raise ValueError(f"covariance lag set is not symmetric at {k}")
            if k != zero and k not in self.cepstra:
                raise ValueError(f"cepstral value missing for lag {k}")
        if self.nu < self.d / 2.0 + 1.0:
            warnings.warn(
                f"nu = {self.nu} < d/2 + 1 = {self.d / 2 + 1}; "
                "positive dual solvability is not guaranteed",
                stacklevel=2,
            )

    @property
    def d(self) -> int:
        return self.covariances.d

    @property
    def alpha(self) -> float:
        return 1.0 - 1.0 / self.nu

    def positive_lags(self) -> list:
        return lagmod.positive_half(self.covariances.lags())

    def is_real(self, tol: float = 1e-10) -> bool:
        scale = max(abs(self.covariances[k]) for k in self.covariances.lags())
        ok_c = all(
            abs(self.covariances[k].imag) <= tol * max(scale, 1.0)
            for k in self.covariances.lags()
        )
        mscale = max((abs(self.cepstra[k]) for k in self.cepstra.lags()), default=0.0)
        ok_m = all(
            abs(self.cepstra[k].imag) <= tol * max(mscale, 1.0) for k in self.cepstra.lags()
        )
        return ok_c and ok_m


class DualParameterization:
    """Packing of the free dual coefficients into a real vector.

    Order: q at lag 0 (real), then per positive covariance lag the real
    (and, unless real_coefficients, imaginary) part of q_k, then the same
    for p_k. The zero-lag coefficient of P stays fixed at 1.
    """

    def __init__(self, data: MomentData, real_coefficients: bool) -> None:
        self.d = data.d
        self.real = bool(real_coefficients)
        self.pos = data.positive_lags()
        per_lag = 1 if self.real else 2
        self.size = 1 + 2 * per_lag * len(self.pos)

    def describe(self) -> list:
        parts = ("re",) if self.real else ("re", "im")
        entries = [("q", (0,) * self.d, "re")]
        for block in ("q", "p"):
            for k in self.pos:
                for part in parts:
                    entries.append((block, k, part))
        return entries

    def pack(self, p: TrigPoly, q: TrigPoly) -> np.ndarray:
        zero = (0,) * self.d
        if abs(p[zero] - 1.0) > 1e-12:
            raise ValueError(f"P must have unit constant term, got {p[zero]}")
        x = np.empty(self.size)
        x[0] = q[zero].real
        i = 1
        for poly in (q, p):
            for k in self.pos:
                x[i] = poly[k].real
                i += 1
                if not self.real:
                    x[i] = poly[k].imag
                    i += 1
        return x

    def unpack(self, x: np.ndarray) -> tuple:
        zero = (0,) * self.d
        npos = len(self.pos)
        per_lag = 1 if self.real else 2
        qc = {zero: complex(x[0])}
        pc = {zero: 1.0 + 0.0j}
        for coeffs, offset in ((qc, 1), (pc, 1 + per_lag * npos)):
            for j, k in enumerate(self.pos):
                base = offset + per_lag * j
                re = x[base]
                im = x[base + 1] if not self.real else 0.0
                coeffs[k] = complex(re, im)
        return TrigPoly(self.d, pc), TrigPoly(self.d, qc)


class _DualProblem:
    """Vectorized objective/gradient on a fixed frequency grid."""

    def __init__(self, data: MomentData, lam: float, grid: FrequencyGrid, real_coefficients: bool):
        if lam < 0.0:
            raise ValueError(f"regularization weight must be >= 0, got {lam}")
        if grid.d != data.d:
            raise ValueError(f"grid dimension {grid.d} != data dimension {data.d}")
        self.data = data
        self.lam = float(lam)
        self.grid = grid
        self.layout = DualParameterization(data, real_coefficients)
        self.nu = data.nu
        pos = self.layout.pos
        g = grid.node_count
        self.cos = np.empty((len(pos), g))
        self.sin = np.empty((len(pos), g))
        for i, k in enumerate(pos):
            angle = grid.angle(k).ravel()
            self.cos[i] = np.cos(angle)
            self.sin[i] = np.sin(angle)
        zero = (0,) * data.d
        self.c0 = data.covariances[zero].real
        self.c_re = np.array([data.covariances[k].real for k in pos])
        self.c_im = np.array([data.covariances[k].imag for k in pos])
        self.m_re = np.array([data.cepstra[k].real for k in pos])
        self.m_im = np.array([data.cepstra[k].imag for k in pos])

    def _split(self, x: np.ndarray):
        npos = len(self.layout.pos)
        if self.layout.real:
            xq = x[1 : 1 + npos]
            yq = np.zeros(npos)
            xp = x[1 + npos :]
            yp = np.zeros(npos)
        else:
            q_part = x[1 : 1 + 2 * npos]
            p_part = x[1 + 2 * npos :]
            xq, yq = q_part[0::2], q_part[1::2]
            xp, yp = p_part[0::2], p_part[1::2]
        return x[0], xq, yq, xp, yp

    def fields(self, x: np.ndarray):
        q0, xq, yq, xp, yp = self._split(x)
        qv = q0 + 2.0 * (xq @ self.cos + yq @ self.sin)
        pv = 1.0 + 2.0 * (xp @ self.cos + yp @ self.sin)
        return pv, qv

    def feasible(self, x: np.ndarray) -> bool:
        pv, qv = self.fields(x)
        return bool(pv.min() > 0.0 and qv.min() > 0.0)

    def _check_fields(self, x: np.ndarray):
        pv, qv = self.fields(x)
        for name, v in (("P", pv), ("Q", qv)):
            if v.min() <= 0.0:
                node = np.unravel_index(int(v.argmin()), self.grid.shape)
                raise InfeasiblePointError(
                    f"{name} is {v.min():.6g} <= 0 at grid node {node}"
                )
        return pv, qv

    def value(self, x: np.ndarray) -> float:
        pv, qv = self._check_fields(x)
        q0, xq, yq, xp, yp = self._split(x)
        nu = self.nu
        ratio_term = np.mean(pv**nu * qv ** (1 - nu)) / (nu - 1)
        barrier = self.lam / (nu - 1) * np.mean(pv ** (1 - nu))
        inner_c = q0 * self.c0 + 2.0 * (xq @ self.c_re + yq @ self.c_im)
        inner_m = 2.0 * (xp @ self.m_re + yp @ self.m_im)
        return float(ratio_term + inner_c - inner_m + barrier)

    def value_and_grad(self, x: np.ndarray):
        pv, qv = self._check_fields(x)
        q0, xq, yq, xp, yp = self._split(x)
        nu = self.nu
        g = pv.size
        ratio = pv / qv
        r_nu = ratio**nu
        ratio_term = np.mean(r_nu * qv) / (nu - 1)
        p_neg = pv ** (-nu)
        barrier = self.lam / (nu - 1) * np.mean(p_neg * pv)
        inner_c = q0 * self.c0 + 2.0 * (xq @ self.c_re + yq @ self.c_im)
        inner_m = 2.0 * (xp @ self.m_re + yp @ self.m_im)
        value = float(ratio_term + inner_c - inner_m + barrier)

        grad = np.empty(self.layout.size)
        grad[0] = -np.mean(r_nu) + self.c0
        # weights for the p-block: nu/(nu-1) (P/Q)^(nu-1) - lam P^(-nu)
        w_p = (nu / (nu - 1)) * ratio ** (nu - 1) - self.lam * p_neg
        cos_r = self.cos @ r_nu / g
        sin_r = self.sin @ r_nu / g
        cos_p = self.cos @ w_p / g
        sin_p = self.sin @ w_p / g
        gq_re = -2.0 * cos_r + 2.0 * self.c_re
        gq_im = -2.0 * sin_r + 2.0 * self.c_im
        gp_re = 2.0 * cos_p - 2.0 * self.m_re
        gp_im = 2.0 * sin_p - 2.0 * self.m_im
        npos = len(self.layout.pos)
        if self.layout.real:
            grad[1 : 1 + npos] = gq_re
            grad[1 + npos :] = gp_re
        else:
            grad[1 : 1 + 2 * npos : 2] = gq_re
            grad[2 : 1 + 2 * npos : 2] = gq_im
            grad[1 + 2 * npos :: 2] = gp_re
            grad[2 + 2 * npos :: 2] = gp_im
        return value, grad


def _default_grid(data: MomentData, grid) -> FrequencyGrid:
    if isinstance(grid, FrequencyGrid):
        return grid
    if grid is None:
        raise ValueError("a frequency grid (shape or FrequencyGrid) is required")
    return FrequencyGrid(grid)


def dual_objective(data: MomentData, p: TrigPoly, q: TrigPoly, lam: float, grid) -> float:
    """Discretized dual objective at (p, q)."""
    grid = _default_grid(data, grid)
    real = data.is_real() and p.is_real() and q.is_real()
    problem = _DualProblem(data, lam, grid, real_coefficients=real)
    return problem.value(problem.layout.pack(p, q))


def dual_gradient(
    data: MomentData,
    p: TrigPoly,
    q: TrigPoly,
    lam: float,
    grid,
    real_coefficients: Optional[bool] = None,
) -> np.ndarray:
    """Gradient of the dual objective in DualParameterization order."""
    grid = _default_grid(data, grid)
    if real_coefficients is None:
        real_coefficients = data.is_real() and p.is_real() and q.is_real()
    problem = _DualProblem(data, lam, grid, real_coefficients)
    _, grad = problem.value_and_grad(problem.layout.pack(p, q))
    return grad


@dataclass
class SolverConfig:
    """Gradient descent controls for the dual problem."""

    lam: float = 1e-6
    grid_shape: object = None
    tol: float = 1e-6
    max_iter: int = 200_000
    step_init: float = 1.0
    armijo_factor: float = 0.5
    armijo_c: float = 1e-4
    min_step: float = 1e-18
    real_coefficients: Optional[bool] = None


@dataclass
class DualSolution:
    """Result of a dual solve; non-convergence is recorded, not raised."""

    p: TrigPoly
    q: TrigPoly
    nu: int
    converged: bool
    iterations: int
    grad_norm: float
    objective: float
    lam: float
    grid_shape: tuple
    real_coefficients: bool
    trace: np.ndarray


def solve_dual(
    data: MomentData,
    config: Optional[SolverConfig] = None,
    init: Optional[tuple] = None,
) -> DualSolution:
    """Minimize the regularized dual by Armijo-backtracking gradient descent.

    Starts from Q = 1, P = 1 unless init = (p, q) is given. Steps that leave
    the positivity region are rejected by the same halving as failed
    sufficient-decrease tests. Termination: gradient norm <= tol, or
    max_iter, or a fully stalled line search.
    """
    config = config or SolverConfig()
    grid = _default_grid(data, config.grid_shape)
    real = config.real_coefficients
    if real is None:
        real = data.is_real()
    problem = _DualProblem(data, config.lam, grid, real)
    layout = problem.layout
    zero = (0,) * data.d
    if init is None:
        x = np.zeros(layout.size)
        x[0] = 1.0
    else:
        p0, q0 = init
        x = layout.pack(p0, q0)
    if not problem.feasible(x):
        problem._check_fields(x)

    f, g = problem.value_and_grad(x)
    trace = []
    step = 0.0
    iterations = 0
    gnorm = float(np.linalg.norm(g))
    converged = False
    for it in range(config.max_iter):
        iterations = it
        gnorm = float(np.linalg.norm(g))
        trace.append((it, f, gnorm, step))
        if gnorm <= config.tol:
            converged = True
            break
        step = config.step_init
        gsq = gnorm * gnorm
        accepted = False
        while step >= config.min_step:
            candidate = x - step * g
            if problem.feasible(candidate):
                f_new = problem.value(candidate)
                if f_new <= f - config.armijo_c * step * gsq:
                    accepted = True
                    break
            step *= config.armijo_factor
        if not accepted:
            break
        x = candidate
        f, g = problem.value_and_grad(x)
    else:
        iterations = config.max_iter
        gnorm = float(np.linalg.norm(g))
        trace.append((config.max_iter, f, gnorm, step))
    if not converged:
        gnorm = float(np.linalg.norm(g))
        converged = gnorm <= config.tol
    p, q = layout.unpack(x)
    return DualSolution(
        p=p,
        q=q,
        nu=data.nu,
        converged=converged,
        iterations=iterations,
        grad_norm=gnorm,
        objective=f,
        lam=config.lam,
        grid_shape=grid.shape,
        real_coefficients=real,
        trace=np.array(trace, dtype=np.float64).reshape(-1, 4),
    )


def optimal_spectrum(solution: DualSolution, grid=None) -> np.ndarray:
    """Values of the solved spectrum (P/Q)^nu on a grid.

    Defaults to the grid the solve used. Raises InfeasiblePointError if
    either polynomial fails positivity on the requested grid.
    """
    if grid is None:
        grid = FrequencyGrid(solution.grid_shape)
    elif not isinstance(grid, FrequencyGrid):
        grid = FrequencyGrid(grid)
    pv = eval_trig_poly(solution.p, grid)
    qv = eval_trig_poly(solution.q, grid)
    for name, v in (("P", pv), ("Q", qv)):
        if v.min() <= 0.0:
            node = np.unravel_index(int(v.argmin()), grid.shape)
            raise InfeasiblePointError(f"{name} is {v.min():.6g} <= 0 at grid node {node}")
    return (pv / qv) ** solution.nu


@dataclass
class MomentResiduals:
    """Violations of the moment constraints by the solved spectrum."""

    covariance_norm: float
    cepstral_norm: float
    covariance_by_lag: dict
    cepstral_by_lag: dict


def moment_residuals(solution: DualSolution, data: MomentData, grid=None) -> MomentResiduals:
    """Grid-mean moment mismatches of the solved spectrum.

    At an exact stationary point the covariance residuals vanish while the
    cepstral residuals retain an O(lam) regularization offset.
    """
    from .cepstral import _grid_coefficients

    if grid is None:
        grid = FrequencyGrid(solution.grid_shape)
    elif not isinstance(grid, FrequencyGrid):
        grid = FrequencyGrid(grid)
    phi = optimal_spectrum(solution, grid)
    alpha = data.alpha
    cov_lags = data.covariances.lags()
    cov_hat = _grid_coefficients(phi, cov_lags, grid.shape)
    cov_res = {k: cov_hat[k] - data.covariances[k] for k in cov_lags}
    zero = (0,) * data.d
    cep_lags = [k for k in cov_lags if k != zero]
    cep_hat = _grid_coefficients(phi**alpha, cep_lags, grid.shape)
    cep_res = {k: cep_hat[k] / alpha - data.cepstra[k] for k in cep_lags}
    cov_norm = float(np.sqrt(sum(abs(v) ** 2 for v in cov_res.values())))
    cep_norm = float(np.sqrt(sum(abs(v) ** 2 for v in cep_res.values())))
    return MomentResiduals(cov_norm, cep_norm, cov_res, cep_res)
