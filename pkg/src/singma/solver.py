"""Discrete convex solutions of det D^2 u = f(u, Du, x), u = 0 on the boundary.

The singular right-hand sides are handled exactly the way the underlying
approximation scheme suggests: replace |u| by |u| + eps, solve the monotone
wide-stencil problem for frozen coefficients by damped nonlinear
Gauss-Seidel sweeps, and drive eps down a geometric schedule to a floor.
Optionally the solve cascades through coarser grids first (bilinear
prolongation), which only changes the initial guess at each level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import barriers as bar
from .geometry import Domain, boundary_distances, contains_origin_interior, unit_ball_volume, volume
from .grid import GridSpec, build_grid, discrete_gradient, gauss_seidel_sweep, ma_apply, second_differences

__all__ = [
    "SolveConfig",
    "DiscreteSolution",
    "ConvergenceError",
    "epsilon_zero",
    "john_volume_constant",
    "lower_bound_constant",
    "solve",
    "interpolate",
]


def john_volume_constant(n: int) -> float:
    """C(n) = 4^n n^(2n) |B_1|^2 from the normalized-domain volume comparison."""
    return 4.0**n * float(n) ** (2 * n) * unit_ball_volume(n) ** 2


def epsilon_zero(n: int, p: float, area: float) -> float:
    """Largest regularization size eps0 with eps0^n (2 eps0)^p C(n) < area^2 / 2.

    Solved by bisection; the returned value is backed off by a relative
    1e-6 so the strict inequality holds with slack factor >= 0.999.
    """
    if p < 0.0 or area <= 0.0:
        raise ValueError("need p >= 0 and area > 0")
    target = 0.5 * area**2 / john_volume_constant(n)

    def excess(e: float) -> float:
        return e**n * (2.0 * e) ** p - target

    hi = 1.0
    while excess(hi) < 0.0:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo * (1.0 - 1e-6)


def lower_bound_constant(n: int, p: float) -> float:
    """c(n, p) = (2^p C(n))^(-1/(n+p)) in ||u||_inf >= c(n,p) |Omega|^(2/(n+p))."""
    return (2.0**p * john_volume_constant(n)) ** (-1.0 / (n + p))


@dataclass(frozen=True)
class SolveConfig:
    h: float
    stencil_width: int = 2
    epsilon0: float | None = None  # None -> epsilon_zero for the singular kinds
    epsilon_ratio: float = 0.5
    epsilon_floor: float = 1e-8
    damping: float = 0.5
    tol: float = 1e-8
    stage_tol: float | None = None  # update tolerance at non-final eps stages
    max_outer: int = 2000  # fixed-point iterations per eps stage
    sweeps_per_outer: int = 3
    init: str = "auto"  # auto | cone | zero
    grad_floor: float = 1e-8
    cascade_levels: int = 0

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.epsilon_floor < 0.0:
            raise ValueError("epsilon floor must be >= 0")
        if not 0.0 < self.epsilon_ratio < 1.0:
            raise ValueError("epsilon ratio must lie in (0, 1)")


@dataclass
class DiscreteSolution:
    grid: GridSpec
    values: np.ndarray
    rhs: bar.RhsSpec
    epsilon_final: float
    iterations: int
    residual_norm: float
    update_norm: float
    converged: bool
    sweeps: int
    floor_active: bool
    min_second_difference: float

    def interpolate(self, pts) -> np.ndarray:
        return interpolate(self.grid, self.values, pts)

    def gradient(self) -> np.ndarray:
        return discrete_gradient(self.grid, self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, solution: DiscreteSolution):
        super().__init__(message)
        self.solution = solution


def interpolate(grid: GridSpec, values: np.ndarray, pts) -> np.ndarray:
    """Bilinear interpolation; nodes outside the mask contribute the boundary value 0."""
    pts = np.asarray(pts, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    h = grid.h
    fi = np.floor(pts[:, 0] / h).astype(np.int64)
    fj = np.floor(pts[:, 1] / h).astype(np.int64)
    sx = pts[:, 0] / h - fi
    sy = pts[:, 1] / h - fj
    out = np.zeros(pts.shape[0])
    for di, wi in ((0, 1.0 - sx), (1, sx)):
        for dj, wj in ((0, 1.0 - sy), (1, sy)):
            ti = fi + di - grid.origin[0]
            tj = fj + dj - grid.origin[1]
            ok = (
                (ti >= 0)
                & (ti < grid.index.shape[0])
                & (tj >= 0)
                & (tj < grid.index.shape[1])
            )
            ids = np.where(
                ok,
                grid.index[np.clip(ti, 0, grid.index.shape[0] - 1),
                           np.clip(tj, 0, grid.index.shape[1] - 1)],
                -1,
            )
            vals = np.where(ids >= 0, values[np.maximum(ids, 0)], 0.0)
            out += wi * wj * vals
    return out[0] if single else out


def _initial_values(domain: Domain, rhs: bar.RhsSpec, grid: GridSpec, mode: str) -> np.ndarray:
    if mode == "zero":
        return np.zeros(grid.n_nodes)
    if mode == "cone":
        return -boundary_distances(domain, grid.xy)
    if mode != "auto":
        raise ValueError(f"unknown init mode {mode!r}")
    try:
        if rhs.kind == bar.POWER_SINGULAR and domain.kind == "parabola_cap":
            b = bar.sub_valpha_for(2, rhs.p, domain)
            return np.asarray(bar.values(b, grid.xy))
        if rhs.kind == bar.AFFINE_SPHERE and domain.kind == "parabola_cap":
            b = bar.sub_valpha_k(2, rhs.k, domain.gamma, domain=domain)
            return np.asarray(bar.values(b, grid.xy))
    except ValueError:
        pass
    return -boundary_distances(domain, grid.xy)


def _rhs_field(
    grid: GridSpec, rhs: bar.RhsSpec, values: np.ndarray, eps: float, grad_floor: float
) -> tuple[np.ndarray, bool]:
    mag = np.maximum(-values, 0.0)
    if rhs.kind == bar.POWER_SINGULAR:
        return (mag + eps) ** (-rhs.p), False
    if rhs.kind == bar.DEGENERATE:
        return (mag + eps) ** rhs.q, False
    if rhs.kind == bar.AFFINE_SPHERE:
        g = discrete_gradient(grid, values)
        s = np.einsum("ij,ij->i", grid.xy, g) - values
        floored = bool(np.any(s < grad_floor))
        s = np.maximum(s, grad_floor)
        n = 2
        return (mag + eps) ** (-(n + 2 + rhs.k)) * s ** (-rhs.k), floored
    raise ValueError(f"unknown rhs kind {rhs.kind!r}")


def _epsilon_schedule(domain: Domain, rhs: bar.RhsSpec, cfg: SolveConfig) -> list[float]:
    if rhs.kind == bar.DEGENERATE:
        return [0.0]
    e0 = cfg.epsilon0
    if e0 is None:
        p_eff = rhs.p if rhs.kind == bar.POWER_SINGULAR else 2 + 2 + rhs.k
        e0 = epsilon_zero(2, p_eff, volume(domain))
    sched = []
    e = e0
    while e > cfg.epsilon_floor and len(sched) < 200:
        sched.append(e)
        e *= cfg.epsilon_ratio
    sched.append(cfg.epsilon_floor)
    return sched


def _solve_level(
    domain: Domain,
    rhs: bar.RhsSpec,
    cfg: SolveConfig,
    grid: GridSpec,
    u0: np.ndarray,
    schedule: list[float],
) -> DiscreteSolution:
    u = np.asarray(u0, dtype=float).copy()
    lam = cfg.damping
    iterations = 0
    sweeps = 0
    floor_active = False
    update = np.inf
    converged = False
    f = np.ones(grid.n_nodes)
    for si, eps in enumerate(schedule):
        final = si == len(schedule) - 1
        stage_tol = cfg.tol if final else (
            cfg.stage_tol if cfg.stage_tol is not None else max(cfg.tol, 1e-3 * eps)
        )
        for _ in range(cfg.max_outer):
            f, floored = _rhs_field(grid, rhs, u, eps, cfg.grad_floor)
            floor_active = floored
            u_new = u.copy()
            for _ in range(cfg.sweeps_per_outer):
                gauss_seidel_sweep(grid, u_new, f)
                sweeps += 1
            delta = lam * (u_new - u)
            u += delta
            update = float(np.max(np.abs(delta)))
            iterations += 1
            if update < stage_tol:
                if final:
                    converged = True
                break
    f, floored = _rhs_field(grid, rhs, u, schedule[-1], cfg.grad_floor)
    res = float(np.max(np.abs(ma_apply(grid, u) - f) / (1.0 + f)))
    d2 = second_differences(grid, u)
    sol = DiscreteSolution(
        grid=grid,
        values=u,
        rhs=rhs,
        epsilon_final=schedule[-1],
        iterations=iterations,
        residual_norm=res,
        update_norm=update,
        converged=converged,
        sweeps=sweeps,
        floor_active=floor_active or floored,
        min_second_difference=float(np.min(d2)),
    )
    if not converged:
        raise ConvergenceError(
            f"no convergence within {cfg.max_outer} outer iterations "
            f"(last update {update:.3e}, residual {res:.3e})",
            sol,
        )
    return sol


def solve(domain: Domain, rhs: bar.RhsSpec, cfg: SolveConfig, u0=None) -> DiscreteSolution:
    """Converged discrete solution on domain (two-dimensional solves only)."""
    if domain.dim != 2:
        raise ValueError("the solver is two-dimensional")
    if rhs.kind == bar.AFFINE_SPHERE:
        inside, _ = contains_origin_interior(domain)
        if not inside:
            raise ValueError("affine-sphere right-hand side needs the origin interior")
    schedule = _epsilon_schedule(domain, rhs, cfg)
    if cfg.cascade_levels > 0 and u0 is None:
        sol = None
        for level in range(cfg.cascade_levels, -1, -1):
            h_level = cfg.h * 2**level
            grid = build_grid(domain, h_level, cfg.stencil_width)
            if sol is None:
                u_init = _initial_values(domain, rhs, grid, cfg.init)
                sched = schedule
            else:
                u_init = interpolate(sol.grid, sol.values, grid.xy)
                sched = [schedule[-1]]
            sol = _solve_level(domain, rhs, cfg, grid, u_init, sched)
        return sol
    grid = build_grid(domain, cfg.h, cfg.stencil_width)
    u_init = (
        np.asarray(u0, dtype=float)
        if u0 is not None
        else _initial_values(domain, rhs, grid, cfg.init)
    )
    return _solve_level(domain, rhs, cfg, grid, u_init, schedule)
