"""Shrinking entropy, conjugate-heat weights, and monotonicity checks.

Two testbeds share this module.

* The homogeneous cylinder flow: every spatial integral collapses to a
  product, the weight u(t) solves a scalar linear ODE, and the entropy
  and its two derivative routes (finite difference vs the curvature
  formula) are closed-form products.  Sphere convention here follows the
  flow module: Ric(sphere factor) = half the metric, R = 1/lam.
* The explicit warped solitons at a single time: the conjugate-heat
  identity and the pointwise monotonicity identity are checked on the
  self-similar pullback family, time derivatives by central differences.
  Sphere convention here is the unit sphere of the warped module; the
  data must pass convention_check with soliton constant 2 * lambda_ode,
  and the identities assume that constant equals one, so only the two
  canonical profiles (and rescalings with the same constant) qualify.

Norms are raw index contractions throughout: |H|^2 = 6 h^2 for H = h dV,
H2 = 2 h^2 g, |sigma|^2 = 2 (h' - f' h)^2 for the twisted codifferential
2-form, |M|^2 = sum of squared eigenvalues of the symmetric tensor M.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .cylinder import CylinderTrajectory
from .ioutil import atomic_write_text, to_csv_text
from .warped import (
    RadialProfile,
    ResidualReport,
    WarpedSolitonData,
    convention_check,
    cylinder_soliton,
    laplacian_radial,
    scalar_curvature,
    torsion_norm_sq,
    twisted_flux_norm_sq,
)

__all__ = [
    "EntropyConfig",
    "HeatWeight",
    "HeatWeightPath",
    "EntropyTrace",
    "conjugate_heat_homogeneous",
    "mass",
    "entropy_eval",
    "entropy_derivative_check",
    "soliton_heat_check",
    "pointwise_monotonicity_check",
]

SPHERE_AREA = 8.0 * np.pi  # area of the Ric = g/2 sphere (radius sqrt 2)


@dataclass(frozen=True)
class EntropyConfig:
    """Reference time for tau = T_ref - t, dimension, declared initial mass."""

    T_ref: float
    n: int = 3
    mass0: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.T_ref):
            raise ValueError("T_ref must be finite")
        if self.n != 3:
            raise ValueError("only n = 3 geometries are supported")
        if self.mass0 is not None and not self.mass0 > 0:
            raise ValueError("mass0 must be positive")


@dataclass(frozen=True)
class HeatWeight:
    """One homogeneous conjugate-heat sample; f is derived from (u, tau)."""

    u: float
    tau: float

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError("weight must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def f(self) -> float:
        # u = (4 pi tau)^{-3/2} e^{-f}, inverted
        return -math.log(self.u) - 1.5 * math.log(4.0 * math.pi * self.tau)


@dataclass
class HeatWeightPath:
    """Weight u(t) along a flow, with dense evaluation between samples."""

    times: np.ndarray
    u: np.ndarray
    T_ref: float
    u0: float
    _dense: object = field(repr=False, default=None)

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, i: int) -> HeatWeight:
        return HeatWeight(u=float(self.u[i]), tau=float(self.T_ref - self.times[i]))

    def u_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.u0 == 0.0:
            return np.zeros_like(t)
        return np.asarray(self._dense(t), dtype=float).reshape(t.shape)


def conjugate_heat_homogeneous(
    traj: CylinderTrajectory,
    u0: float,
    T_ref: Optional[float] = None,
    rtol: float = 1e-13,
    atol: Optional[float] = None,
) -> HeatWeightPath:
    """Solve u' = (1/lam - (3/2) h^2) u along the trajectory.

    This integrates the conjugate-heat reduction as its own initial value
    problem over the trajectory's dense output; it does not reuse the
    flow identity (ln u)' = -(ln lam beta)', so mass conservation stays a
    genuine two-route check downstream.

    T_ref defaults to the detected singular time.  u0 = 0 short-circuits
    to the zero solution of the linear equation.
    """
    u0 = float(u0)
    if u0 < 0:
        raise ValueError("u0 must be nonnegative")
    if T_ref is None:
        if traj.T_sing is None:
            raise ValueError("trajectory has no singular time; pass T_ref")
        T_ref = traj.T_sing
    T_ref = float(T_ref)

    if u0 == 0.0:
        return HeatWeightPath(
            times=traj.times, u=np.zeros_like(traj.times), T_ref=T_ref, u0=0.0
        )

    def rhs(t, y):
        lam, h = traj.state_at(t)[:2]
        return (1.0 / lam - 1.5 * h * h) * y

    res = solve_ivp(
        rhs,
        (traj.times[0], traj.t_end),
        np.array([u0]),
        method="RK45",
        rtol=rtol,
        atol=u0 * 1e-14 if atol is None else atol,
        dense_output=True,
        t_eval=traj.times,
    )
    if not res.success:
        raise RuntimeError("conjugate-heat integration failed: " + res.message)
    return HeatWeightPath(
        times=traj.times,
        u=res.y[0],
        T_ref=T_ref,
        u0=u0,
        _dense=lambda t: res.sol(t)[0],
    )


def mass(
    traj: CylinderTrajectory,
    weights: HeatWeightPath,
    L0: float = 2.0 * np.pi,
    times=None,
) -> np.ndarray:
    """Total weight u(t) V(t), V = 8 pi lam L0 beta.  Constant in exact arithmetic."""
    if times is None:
        times = weights.times
    times = np.asarray(times, dtype=float)
    lam, _, beta, _ = traj.state_at(times)
    return weights.u_at(times) * SPHERE_AREA * lam * float(L0) * beta


@dataclass
class EntropyTrace:
    """Entropy samples with the two derivative routes and their gap."""

    times: np.ndarray
    tau: np.ndarray
    W: np.ndarray
    dW_fd: np.ndarray
    dW_formula: np.ndarray
    gap: np.ndarray
    mass: np.ndarray
    fd_step: Optional[float] = None
    tolerance: Optional[float] = None
    first_term_zero: bool = False

    def to_csv(self, path: Optional[str] = None) -> str:
        header = ["t", "tau", "W", "dW_fd", "dW_formula", "gap"]
        rows = (
            [self.times[i], self.tau[i], self.W[i], self.dW_fd[i],
             self.dW_formula[i], self.gap[i]]
            for i in range(self.times.size)
        )
        text = to_csv_text(header, rows)
        if path is not None:
            atomic_write_text(path, text)
        return text


def _check_tau(tau: np.ndarray):
    if np.any(tau <= 0):
        raise ValueError("tau = T_ref - t must stay positive on the samples")


def _w_values(traj, weights, T_ref, L0, times):
    times = np.asarray(times, dtype=float)
    tau = T_ref - times
    _check_tau(tau)
    lam, h = traj.state_at(times)[:2]
    u = weights.u_at(times)
    if np.any(u <= 0):
        raise ValueError("entropy needs a positive weight")
    m = mass(traj, weights, L0=L0, times=times)
    f = -np.log(u) - 1.5 * np.log(4.0 * np.pi * tau)
    W = (tau * (1.0 / lam - 0.5 * h * h) + f - 3.0) * m
    return times, tau, lam, h, m, W


def entropy_eval(
    traj: CylinderTrajectory,
    weights: HeatWeightPath,
    config: Optional[EntropyConfig] = None,
    L0: float = 2.0 * np.pi,
    times=None,
) -> EntropyTrace:
    """Shrinking entropy along the flow.

    Homogeneous reduction: W = [tau (1/lam - h^2/2) + f - 3] mass with
    f = -ln u - (3/2) ln(4 pi tau).  Only W is filled; the derivative
    columns are NaN until entropy_derivative_check runs.
    """
    if config is None:
        config = EntropyConfig(T_ref=weights.T_ref)
    if times is None:
        times = weights.times
    times, tau, lam, h, m, W = _w_values(traj, weights, config.T_ref, L0, times)
    if config.mass0 is not None:
        drift = abs(m[0] - config.mass0) / config.mass0
        if drift > 1e-9:
            raise ValueError("declared mass0 does not match the weight path")
    nan = np.full_like(W, np.nan)
    return EntropyTrace(
        times=times,
        tau=tau,
        W=W,
        dW_fd=nan.copy(),
        dW_formula=nan.copy(),
        gap=nan.copy(),
        mass=m,
        # tau (1/lam - h^2/2) vanishes iff lam h^2 = 2; flag, never reached
        # from lam0 h0^2 <= 1/2
        first_term_zero=bool(np.any(np.abs(lam * h * h - 2.0) < 1e-9)),
    )


def entropy_derivative_check(
    traj: CylinderTrajectory,
    weights: HeatWeightPath,
    config: Optional[EntropyConfig] = None,
    dt: float = 1e-4,
    L0: float = 2.0 * np.pi,
    times=None,
) -> EntropyTrace:
    """Central finite difference of W against the curvature formula.

    dW_formula = [2 tau (2 A_s^2 + A_r^2) - h^2] mass with
    A_s = 1/(2 lam) - h^2/2 - 1/(2 tau) on the two sphere directions and
    A_r = -h^2/2 - 1/(2 tau) on the circle direction; the -h^2 term is
    -|H|^2/6, and the homogeneous reduction kills the twisted-flux term.
    Raises if the worst gap exceeds max(1e-6, 10 dt^2 scale).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if config is None:
        config = EntropyConfig(T_ref=weights.T_ref)
    t0, t1 = float(weights.times[0]), float(traj.t_end)
    if times is None:
        # default window keeps tau well clear of the step so the central
        # difference stays meaningful; explicit times override
        keep = (
            (weights.times - dt >= t0)
            & (weights.times + dt <= t1)
            & (config.T_ref - weights.times >= 50.0 * dt)
        )
        times = weights.times[keep]
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("no sample times admit the finite-difference stencil")
    if np.any(times - dt < t0) or np.any(times + dt > t1):
        raise ValueError("finite-difference stencil leaves the trajectory")

    times, tau, lam, h, m, W = _w_values(traj, weights, config.T_ref, L0, times)
    Wp = _w_values(traj, weights, config.T_ref, L0, times + dt)[5]
    Wm = _w_values(traj, weights, config.T_ref, L0, times - dt)[5]
    dW_fd = (Wp - Wm) / (2.0 * dt)

    h2 = h * h
    A_s = 0.5 / lam - 0.5 * h2 - 0.5 / tau
    A_r = -0.5 * h2 - 0.5 / tau
    dW_formula = (2.0 * tau * (2.0 * A_s**2 + A_r**2) - h2) * m

    gap = np.abs(dW_fd - dW_formula)
    # truncation of the central difference is W''' dt^2 / 6 and the
    # potential contributes mass / tau^3 to W''', hence the tau_min term
    tau_min = float(np.min(tau))
    scale = max(
        1.0,
        float(np.max(np.abs(W))),
        float(np.max(np.abs(dW_formula))),
        float(np.max(m)) * (1.0 + 1.0 / tau_min) ** 3,
    )
    tol = max(1e-6, 10.0 * dt * dt * scale)
    worst = float(np.max(gap))
    if worst > tol:
        raise ValueError(
            "derivative routes disagree: gap %.3e exceeds tolerance %.3e" % (worst, tol)
        )
    return EntropyTrace(
        times=times,
        tau=tau,
        W=W,
        dW_fd=dW_fd,
        dW_formula=dW_formula,
        gap=gap,
        mass=m,
        fd_step=dt,
        tolerance=tol,
        first_term_zero=bool(np.any(np.abs(lam * h2 - 2.0) < 1e-9)),
    )


# ---------------------------------------------------------------------------
# pointwise checks on the explicit solitons


def _require_soliton(data: WarpedSolitonData, grid: np.ndarray, dt: float):
    grid = np.asarray(grid, dtype=float)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValueError("grid must be a finite 1-d array")
    if np.max(np.abs(grid)) > 5.0 + 1e-12:
        raise ValueError("soliton checks are restricted to |r| <= 5")
    if np.any(data.phi(grid) <= 0):
        raise ValueError("phi must be positive on the grid")
    report = convention_check(data, grid)
    if not report:
        raise ValueError("data is not a soliton: " + report.message)
    if abs(data.lambda_soliton - 1.0) > 1e-9:
        raise ValueError("heat identities assume soliton constant 1")
    return grid


def _dilation_exponent(data: WarpedSolitonData, grid: np.ndarray) -> float:
    # The pullback family needs the dilation flow of grad f to be linear,
    # i.e. a quadratic potential.  Both canonical solitons qualify.
    fpp = data.f.d2(grid)
    kappa = float(np.mean(fpp))
    if np.max(np.abs(fpp - kappa)) > 1e-9:
        raise ValueError("pullback family requires a quadratic potential")
    return kappa


def _fixed_form_coefficient(data: WarpedSolitonData, grid: np.ndarray) -> float:
    # H = c dr ^ (unit-sphere area form) with c = h phi^2 constant makes H
    # closed and codifferential-free at every time of the family.
    c = data.h(grid) * data.phi(grid) ** 2
    c0 = float(np.mean(c))
    if np.max(np.abs(c - c0)) > 1e-9:
        raise ValueError("torsion form must have constant coefficient h phi^2")
    return c0


def soliton_heat_check(
    grid,
    dt: float,
    data: Optional[WarpedSolitonData] = None,
) -> ResidualReport:
    """Potential form of the conjugate heat equation on a soliton at t = 0.

    Left side: d/dt of the pullback potential f_t(r) = f(r (1-t)^{-kappa})
    by central differences.  Right side, closed form:
    -Lap f + |grad f|^2 - R + |H|^2/4 + 3/(2 (1-t)).
    """
    if data is None:
        data = cylinder_soliton()
    grid = _require_soliton(data, np.asarray(grid, dtype=float), dt)
    kappa = _dilation_exponent(data, grid)

    def f_at(t):
        return data.f(grid * (1.0 - t) ** (-kappa))

    lhs = (f_at(dt) - f_at(-dt)) / (2.0 * dt)
    grad2 = data.f.d1(grid) ** 2
    rhs = (
        -laplacian_radial(data.f, data.phi, grid)
        + grad2
        - scalar_curvature(data.phi, grid)
        + 0.25 * torsion_norm_sq(data.h(grid))
        + 1.5
    )
    return ResidualReport(
        grid=grid,
        residuals={"heat_identity": lhs - rhs},
        meta={"dt": dt, "kappa": kappa},
    )


def _family_v(data: WarpedSolitonData, r: np.ndarray, t: float, kappa: float, c: float):
    """v = [tau (2 Lap f - |grad f|^2 + R - |H|^2/12) + f - 3] u on the
    self-similar family g_t = tau^{1-2kappa} dr^2 + tau phi(s)^2 g_sphere,
    s = r tau^{-kappa}, with the torsion kept as the fixed coordinate form."""
    tau = 1.0 - t
    s = r * tau ** (-kappa)
    a2 = tau ** (1.0 - 2.0 * kappa)  # radial metric coefficient
    phi0, dphi0, ddphi0 = data.phi(s), data.phi.d1(s), data.phi.d2(s)
    sq = np.sqrt(tau)
    phi = sq * phi0
    dphi = sq * dphi0 * tau ** (-kappa)
    ddphi = sq * ddphi0 * tau ** (-2.0 * kappa)

    f = data.f(s)
    df = data.f.d1(s) * tau ** (-kappa)
    ddf = data.f.d2(s) * tau ** (-2.0 * kappa)

    lap_f = (ddf + 2.0 * (dphi / phi) * df) / a2
    grad2 = df * df / a2
    R = -4.0 * (ddphi / a2) / phi + 2.0 * (1.0 - dphi * dphi / a2) / (phi * phi)
    h_t = c / (np.sqrt(a2) * phi * phi)
    u = (4.0 * np.pi * tau) ** (-1.5) * np.exp(-f)
    v = (tau * (2.0 * lap_f - grad2 + R - 0.5 * h_t * h_t) + f - 3.0) * u
    return v, u, R, h_t


def pointwise_monotonicity_check(
    grid,
    dt: float,
    data: Optional[WarpedSolitonData] = None,
    dr: float = 2e-3,
) -> ResidualReport:
    """Conjugate-heat operator applied to the entropy density at t = 0.

    LHS: box* v = -dv/dt - Lap v + (R - |H|^2/4) v with dv/dt by central
    differences along the pullback family and Lap v from a fourth-order
    radial stencil of the t = 0 slice.  RHS, closed form on the soliton:
    -(2 tau |M|^2 + (tau/2) |sigma|^2 - |H|^2/6) u where
    M = Ric - H^2/4 + Hess f - g/(2 tau) and sigma is the twisted
    codifferential of H.
    """
    if data is None:
        data = cylinder_soliton()
    grid = _require_soliton(data, np.asarray(grid, dtype=float), dt)
    kappa = _dilation_exponent(data, grid)
    c = _fixed_form_coefficient(data, grid)
    if not dr > 0:
        raise ValueError("dr must be positive")
    stencil = grid[None, :] + dr * np.arange(-2, 3)[:, None]
    if np.any(data.phi(stencil.ravel()) <= 0):
        raise ValueError("radial stencil leaves the phi > 0 region")

    v_plus = _family_v(data, grid, dt, kappa, c)[0]
    v_minus = _family_v(data, grid, -dt, kappa, c)[0]
    dv_dt = (v_plus - v_minus) / (2.0 * dt)

    v0, u0, R0, h0 = _family_v(data, grid, 0.0, kappa, c)
    vs = _family_v(data, stencil, 0.0, kappa, c)[0]
    d1 = (-vs[4] + 8.0 * vs[3] - 8.0 * vs[1] + vs[0]) / (12.0 * dr)
    d2 = (-vs[4] + 16.0 * vs[3] - 30.0 * vs[2] + 16.0 * vs[1] - vs[0]) / (
        12.0 * dr * dr
    )
    lap_v = d2 + 2.0 * (data.phi.d1(grid) / data.phi(grid)) * d1

    lhs = -dv_dt - lap_v + (R0 - 1.5 * h0 * h0) * v0

    # closed-form right side at t = 0, tau = 1
    phi, dphi, ddphi = data.phi(grid), data.phi.d1(grid), data.phi.d2(grid)
    h = data.h(grid)
    df, ddf = data.f.d1(grid), data.f.d2(grid)
    ric_r = -2.0 * ddphi / phi
    ric_s = (1.0 - dphi**2 - phi * ddphi) / (phi * phi)
    m_r = ric_r - 0.5 * h * h + ddf - 0.5
    m_s = ric_s - 0.5 * h * h + dphi * df / phi - 0.5
    M2 = m_r * m_r + 2.0 * m_s * m_s
    sigma2 = twisted_flux_norm_sq(data, grid)
    rhs = -(2.0 * M2 + 0.5 * sigma2 - h * h) * u0

    return ResidualReport(
        grid=grid,
        residuals={"pointwise_monotonicity": lhs - rhs},
        meta={"dt": dt, "dr": dr, "kappa": kappa, "torsion_coefficient": c},
    )
