"""Radial profile equation with prescribed behavior at infinity.

Solves g'' + (1 + beta*g^2/rho + 1/(4 rho^2)) g = 0 backward from a far
terminal point seeded by a closed-form asymptotic profile, and by the
fixed-point scheme that repeatedly inverts the free linearized operator
through its forward fundamental solution.  Both methods target the same
mathematical object (the solution matching the seed at the terminal
point), so their difference measures pure numerical error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, solve_ivp

from .coeffring import CoeffRing, constant_profile
from .errors import ContractionFailure, RhoOutOfRange, StepFailure
from .ladder import build_ladder
from .oscillatory import ExpansionEvaluator, d_rho


@dataclass(frozen=True)
class OdeParams:
    """Scattering data (a, b), coupling beta, and the working rho range."""

    a: float
    b: float = 0.0
    beta: float = 0.0
    rho_min: float = 10.0
    rho_max: float = 1.0e4

    def __post_init__(self):
        if self.rho_min < 1.0:
            raise RhoOutOfRange("rho_min must be >= 1")
        if self.rho_max <= self.rho_min:
            raise ValueError("need rho_max > rho_min")

    @property
    def delta(self) -> float:
        return 0.375 * self.beta * self.a**2

    def phase(self, rho):
        return rho + self.delta * np.log(rho) + self.b


@dataclass
class OdeSolution:
    grid: np.ndarray
    g: np.ndarray
    g_dot: np.ndarray
    method: str
    seed_order: str
    info: dict = field(default_factory=dict)


def _check_rho(rho):
    if np.any(np.asarray(rho) < 1.0):
        raise RhoOutOfRange("profiles are defined for rho >= 1")


def leading_profile(params: OdeParams, rho):
    """The zeroth profile a*cos(phase) and its rho-derivative."""
    _check_rho(rho)
    rho = np.asarray(rho, dtype=float)
    d = params.delta
    phi = params.phase(rho)
    g = params.a * np.cos(phi)
    g_dot = -params.a * (1.0 + d / rho) * np.sin(phi)
    return g, g_dot


def leading_profile_ddot(params: OdeParams, rho):
    rho = np.asarray(rho, dtype=float)
    d = params.delta
    phi = params.phase(rho)
    return (
        -params.a * (1.0 + d / rho) ** 2 * np.cos(phi)
        + params.a * d / rho**2 * np.sin(phi)
    )


def corrected_profile(params: OdeParams, rho):
    """First-corrected profile with the (d/12 rho)*a*cos(3 phase) term."""
    _check_rho(rho)
    rho = np.asarray(rho, dtype=float)
    d = params.delta
    phi = params.phase(rho)
    c = d * params.a / 12.0
    g0, g0_dot = leading_profile(params, rho)
    g = g0 + c / rho * np.cos(3 * phi)
    g_dot = g0_dot + c * (
        -np.cos(3 * phi) / rho**2 - 3.0 * (1.0 + d / rho) / rho * np.sin(3 * phi)
    )
    return g, g_dot


def corrected_profile_ddot(params: OdeParams, rho):
    rho = np.asarray(rho, dtype=float)
    d = params.delta
    phi = params.phase(rho)
    c = d * params.a / 12.0
    pr = 1.0 + d / rho
    return leading_profile_ddot(params, rho) + c * (
        2.0 / rho**3 * np.cos(3 * phi)
        + 6.0 * pr / rho**2 * np.sin(3 * phi)
        + 3.0 * d / rho**3 * np.sin(3 * phi)
        - 9.0 * pr**2 / rho * np.cos(3 * phi)
    )


def profile_residual(params: OdeParams, g, g_ddot, rho):
    rho = np.asarray(rho, dtype=float)
    return g_ddot + (1.0 + params.beta * g**2 / rho + 0.25 / rho**2) * g


def closed_form(params: OdeParams, kind: str) -> Callable:
    """Triple-valued callable (g, g_dot, g_ddot) for an analytic profile."""
    if kind == "g0":
        return lambda rho: (*leading_profile(params, rho), leading_profile_ddot(params, rho))
    if kind == "g1":
        return lambda rho: (*corrected_profile(params, rho), corrected_profile_ddot(params, rho))
    raise ValueError(f"unknown closed form {kind!r}")


def apply_L_numeric(params: OdeParams, g_fn: Callable) -> Callable:
    """Residual of a twice-differentiable profile as a function of rho.

    ``g_fn(rho)`` must return (g, g_dot, g_ddot); splines of a numeric
    solution qualify, with the caveat that their residual reflects
    interpolation error unless the grid resolves the oscillation well.
    """

    def residual(rho):
        g, _, g_ddot = g_fn(rho)
        return profile_residual(params, g, g_ddot, rho)

    return residual


# ---------------------------------------------------------------------------
# Seeding from the constant-generator ladder
# ---------------------------------------------------------------------------


def _beta_fraction(beta: float) -> Fraction:
    frac = Fraction(str(beta)) if not isinstance(beta, Fraction) else beta
    if float(frac) != float(beta):
        raise ValueError(f"beta {beta!r} has no exact short rational form")
    return frac


@lru_cache(maxsize=16)
def _constant_ladder(beta_str: str, order: int, jmax: int):
    ring = CoeffRing(Fraction(beta_str), max_order=jmax)
    return build_ladder(ring, order, jmax=jmax, constant_generators=True)


def ladder_profile(params: OdeParams, order: int, jmax: int = 8) -> Callable:
    """(g, g_dot) of the order-k radial ladder profile, any k >= 0."""
    frac = _beta_fraction(params.beta)
    lad = _constant_ladder(str(frac), order, jmax)
    prof = constant_profile(params.a, params.b)
    level = lad.level(order).field
    ev = ExpansionEvaluator(level, prof, np.array([0.0]))
    ev_dot = ExpansionEvaluator(d_rho(level), prof, np.array([0.0]))

    def seed(rho: float):
        return float(ev(rho)[0]), float(ev_dot(rho)[0])

    return seed


def seed_values(params: OdeParams, seed: str, rho: float):
    """Terminal data for a named seed: g0, g1, or g<k> from the ladder."""
    if seed == "g0":
        g, gd = leading_profile(params, rho)
        return float(g), float(gd)
    if seed == "g1":
        g, gd = corrected_profile(params, rho)
        return float(g), float(gd)
    if seed.startswith("g") and seed[1:].isdigit():
        return ladder_profile(params, int(seed[1:]))(rho)
    raise ValueError(f"unknown seed {seed!r}")


# ---------------------------------------------------------------------------
# Backward integration from the terminal point
# ---------------------------------------------------------------------------


def _rhs(params: OdeParams):
    beta = params.beta

    def rhs(rho, y):
        g, gd = y
        return (gd, -(1.0 + beta * g * g / rho + 0.25 / (rho * rho)) * g)

    return rhs


def default_grid(params: OdeParams, n: int = 2000) -> np.ndarray:
    return np.geomspace(params.rho_min, params.rho_max, n)


def solve_backward(
    params: OdeParams,
    seed: str = "g1",
    rho_terminal: float | None = None,
    grid: np.ndarray | None = None,
    rtol: float = 1.0e-10,
    atol: float = 1.0e-12,
) -> OdeSolution:
    """Integrate the profile equation backward from seeded terminal data."""
    if rho_terminal is None:
        rho_terminal = 2.0 * params.rho_max
    if rho_terminal < params.rho_max:
        raise ValueError("rho_terminal must lie at or past rho_max")
    if grid is None:
        grid = default_grid(params)
    grid = np.asarray(grid, dtype=float)
    y0 = seed_values(params, seed, rho_terminal)
    sol = solve_ivp(
        _rhs(params),
        (rho_terminal, grid[0]),
        y0,
        method="DOP853",
        t_eval=grid[::-1],
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StepFailure(sol.message)
    return OdeSolution(
        grid=grid,
        g=sol.y[0][::-1].copy(),
        g_dot=sol.y[1][::-1].copy(),
        method="BackwardRK",
        seed_order=seed,
        info={"rho_terminal": rho_terminal, "rtol": rtol, "atol": atol},
    )


def terminal_truncation_estimate(
    params: OdeParams,
    seed: str,
    rho_terminal: float,
    grid: np.ndarray | None = None,
    **kwargs,
) -> float:
    """Terminal-point-doubling comparison: sup difference over the grid."""
    s1 = solve_backward(params, seed, rho_terminal, grid, **kwargs)
    s2 = solve_backward(params, seed, 2.0 * rho_terminal, s1.grid, **kwargs)
    return float(
        np.max(np.abs(s1.g - s2.g) + np.abs(s1.g_dot - s2.g_dot))
    )


# ---------------------------------------------------------------------------
# Linearized operator: fundamental solution and the fixed-point scheme
# ---------------------------------------------------------------------------


def _linear_rhs(rho, y):
    g, gd = y
    return (gd, -(1.0 + 0.25 / (rho * rho)) * g)


def fundamental_solution(
    s: float, rho: np.ndarray, rtol: float = 1.0e-10, atol: float = 1.0e-12
) -> np.ndarray:
    """Forward fundamental solution of the free linearized operator.

    Integrates from data (0, 1) at the source point s down to the
    requested evaluation points rho <= s.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho > s):
        raise ValueError("evaluation points must satisfy rho <= s")
    sol = solve_ivp(
        _linear_rhs,
        (s, float(rho.min())),
        (0.0, 1.0),
        method="DOP853",
        t_eval=np.sort(rho)[::-1],
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StepFailure(sol.message)
    vals = sol.y[0][::-1]
    order = np.argsort(rho)
    out = np.empty_like(rho)
    out[order] = vals
    return out


def _linear_basis(grid: np.ndarray, rtol=1.0e-12, atol=1.0e-14):
    """Two independent solutions of the free linearized equation on the grid.

    Data (1, 0) and (0, 1) at the right endpoint; their Wronskian is
    exactly 1 (no first-order term), so the fundamental solution for any
    source point s is E_s(rho) = u1(s) u2(rho) - u2(s) u1(rho).
    """
    R = grid[-1]
    out = []
    for y0 in ((1.0, 0.0), (0.0, 1.0)):
        sol = solve_ivp(
            _linear_rhs,
            (R, grid[0]),
            y0,
            method="DOP853",
            t_eval=grid[::-1],
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise StepFailure(sol.message)
        out.append((sol.y[0][::-1].copy(), sol.y[1][::-1].copy()))
    (u1, u1d), (u2, u2d) = out
    return u1, u1d, u2, u2d


def _tail_integral(grid: np.ndarray, f: np.ndarray) -> np.ndarray:
    """J(rho_i) = integral of f from rho_i to the right endpoint."""
    c = cumulative_simpson(f, x=grid, initial=0.0)
    return c[-1] - c


def solve_linearized_at_infinity(
    grid: np.ndarray, f_vals: np.ndarray, basis=None
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the free linearized equation with source f, vanishing at the top.

    Quadrature realization of g(rho) = -int_rho^R E_s(rho) f(s) ds with the
    fundamental-solution kernel expanded over the two-solution basis.
    """
    if basis is None:
        basis = _linear_basis(grid)
    u1, u1d, u2, u2d = basis
    i1 = _tail_integral(grid, u1 * f_vals)
    i2 = _tail_integral(grid, u2 * f_vals)
    g = -(u2 * i1 - u1 * i2)
    g_dot = -(u2d * i1 - u1d * i2)
    return g, g_dot


def picard_solve(
    params: OdeParams,
    iterations: int,
    rho_grid: np.ndarray,
    tol: float = 1.0e-13,
    contraction_limit: float = 1.0,
) -> OdeSolution:
    """Fixed-point iteration around the corrected profile.

    Each iterate solves the free linearized equation with source
    -(beta/rho) * (3 g1^2 + 3 g1 h + h^2) h - residual(g1) and vanishing
    data at the top of the grid, through the fundamental-solution
    quadrature.  Returns g1 + h_final; diagnostics (iterate sup norms,
    contraction ratios, energy-inequality margins) ride along in info.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    grid = np.asarray(rho_grid, dtype=float)
    _check_rho(grid)
    beta = params.beta
    g1, g1_dot = corrected_profile(params, grid)
    lg1 = profile_residual(params, g1, corrected_profile_ddot(params, grid), grid)
    basis = _linear_basis(grid)

    h = np.zeros_like(grid)
    h_dot = np.zeros_like(grid)
    sups: list[float] = []
    ratios: list[float] = []
    energy_margins: list[float] = []
    prev_change = None
    for _ in range(iterations):
        big_g = 3.0 * g1**2 + 3.0 * g1 * h + h**2
        f = -(beta / grid) * big_g * h - lg1
        h_new, h_dot_new = solve_linearized_at_infinity(grid, f, basis)
        # Energy inequality for the linear solve with vanishing top data:
        # sqrt(h^2 + h_dot^2) <= 2 * tail integral of |f|, up to quadrature.
        bound = 2.0 * _tail_integral(grid, np.abs(f))
        energy_margins.append(
            float(np.max(np.hypot(h_new, h_dot_new) - bound))
        )
        change = float(np.max(np.abs(h_new - h)))
        if prev_change is not None and prev_change > tol:
            ratio = change / prev_change
            ratios.append(ratio)
            if ratio > contraction_limit:
                raise ContractionFailure(
                    f"iterate change ratio {ratio:.3f} exceeds "
                    f"{contraction_limit}"
                )
        prev_change = change
        h, h_dot = h_new, h_dot_new
        sups.append(float(np.max(np.abs(h))))
        if change < tol:
            break
    return OdeSolution(
        grid=grid,
        g=g1 + h,
        g_dot=g1_dot + h_dot,
        method="PicardIntegral",
        seed_order="g1",
        info={
            "iterate_sups": sups,
            "contraction_ratios": ratios,
            "energy_margins": energy_margins,
            "h": h,
            "h_dot": h_dot,
        },
    )


# ---------------------------------------------------------------------------
# Envelope sampling for decay measurements
# ---------------------------------------------------------------------------


def phase_space_envelope(diff: np.ndarray, diff_dot: np.ndarray) -> np.ndarray:
    """sqrt(dg^2 + dg_dot^2): oscillation-free size of a profile difference."""
    return np.hypot(diff, diff_dot)


def period_max(fn: Callable, rho_points: np.ndarray, samples: int = 9) -> np.ndarray:
    """Max of |fn| over one oscillation period after each requested point."""
    out = np.empty(len(rho_points))
    offsets = np.linspace(0.0, 2.0 * math.pi, samples)
    for idx, r in enumerate(rho_points):
        out[idx] = float(np.max(np.abs(fn(r + offsets))))
    return out
