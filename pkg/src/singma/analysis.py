"""Quantitative verification: exponent fits, bootstrap recurrence, comparisons.

The boundary-decay exponent of a solution or barrier is estimated by a
least-squares line through (log dist, log |u|) over a distance window; the
bootstrap recurrence beta_{k+1} = (beta_k q + 2) / n is iterated with its
closed-form error; and the degeneracy probe measures the decay rate of the
affine-sphere right-hand side along the axis of a solved problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import barriers as bar
from .geometry import Domain, boundary_distances, diameter, sample_interior, volume
from .solver import DiscreteSolution, lower_bound_constant

__all__ = [
    "FitResult",
    "BootstrapTrace",
    "ComparisonReport",
    "MixcReport",
    "SupNormReport",
    "fit_exponent",
    "axis_profile",
    "barrier_axis_profile",
    "bootstrap",
    "bootstrap_error",
    "bootstrap_min_steps",
    "check_comparison",
    "trace_inequality_check",
    "mixc_exponent",
    "mixc_exponent_identity",
    "mixc_probe",
    "sup_norm_bound_check",
]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


@dataclass(frozen=True)
class BootstrapTrace:
    n: int
    q: float
    betas: tuple[float, ...]
    limit: float


@dataclass(frozen=True)
class ComparisonReport:
    passed: bool
    worst_gap: float
    worst_point: np.ndarray


@dataclass(frozen=True)
class MixcReport:
    fit: FitResult
    exponent: float
    bound_constant: float
    identity_gap: float


@dataclass(frozen=True)
class SupNormReport:
    passed: bool
    lower_ratio: float  # ||u||_inf / (c(n,p) |Omega|^(2/(n+p))), pass if >= 1
    upper_ratio: float  # max |u| / (C_alpha dist^alpha) over nodes, pass if <= 1


def fit_exponent(samples, window: tuple[float, float]) -> FitResult:
    """Least-squares log-log slope of |u| against distance within the window."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (dist, |u|) pairs")
    dmin, dmax = window
    if dmin <= 0.0:
        raise ValueError("window must have dist_min > 0")
    keep = (arr[:, 0] >= dmin) & (arr[:, 0] <= dmax)
    arr = arr[keep]
    if arr.shape[0] < 5:
        raise ValueError("need at least 5 samples inside the window")
    if np.any(arr[:, 1] <= 0.0):
        raise ValueError("all sampled magnitudes must be positive")
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r2),
        window=(float(dmin), float(dmax)),
        n_points=arr.shape[0],
    )


def axis_profile(
    sol: DiscreteSolution,
    window: tuple[float, float],
    base=None,
    direction=(0.0, 1.0),
    n_points: int = 25,
) -> np.ndarray:
    """(dist, |u|) samples along a ray from a boundary point into the domain.

    The default ray starts at the center of the flat face of a parabola cap
    and points up the axis; off-node values come from bilinear interpolation.
    """
    d = sol.grid.domain
    if base is None:
        if d.kind != "parabola_cap":
            raise ValueError("default ray only defined for parabola caps")
        base = np.array([0.0, -d.gamma])
    base = np.asarray(base, dtype=float)
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    dists = np.geomspace(window[0], window[1], n_points)
    pts = base[None, :] + dists[:, None] * e[None, :]
    mags = np.abs(sol.interpolate(pts))
    return np.column_stack([dists, mags])


def barrier_axis_profile(
    b: bar.Barrier, window: tuple[float, float], n_points: int = 40
) -> np.ndarray:
    """(dist, magnitude) of the boundary-singular component along the cap axis.

    The linear term of the supersolution family is the trivial Lipschitz part;
    the decay exponent lives in the singular component, which is what gets
    sampled here (for the subsolutions and explicit solutions this is |value|).
    """
    dists = np.geomspace(window[0], window[1], n_points)
    pts = np.zeros((n_points, b.n))
    pts[:, -1] = dists - b.shift
    mags = bar.singular_part_values(b, pts)
    return np.column_stack([dists, mags])


# ---------------------------------------------------------------------------
# Bootstrap recurrence


def bootstrap(n: int, q: float, steps: int) -> BootstrapTrace:
    """Iterate beta_{k+1} = (beta_k q + 2)/n from beta_0 = 2/n."""
    if n < 3:
        raise ValueError("needs n >= 3")
    if not 0.0 < q < n - 2:
        raise ValueError("needs 0 < q < n - 2")
    betas = [2.0 / n]
    for _ in range(steps):
        betas.append((betas[-1] * q + 2.0) / n)
    return BootstrapTrace(n=n, q=float(q), betas=tuple(betas), limit=2.0 / (n - q))


def bootstrap_error(n: int, q: float, k) -> np.ndarray:
    """Closed form 2/(n-q) - beta_k = (2q / (n (n-q))) (q/n)^k."""
    k = np.asarray(k, dtype=float)
    return 2.0 * q / (n * (n - q)) * (q / n) ** k


def bootstrap_min_steps(n: int, q: float, beta: float) -> int:
    """Smallest k with (2q/(n(n-q))) (q/n)^k < 2/(n-q) - beta, so beta_k > beta."""
    limit = 2.0 / (n - q)
    if not 0.0 < beta < limit:
        raise ValueError("target must lie in (0, 2/(n-q))")
    k = 0
    while bootstrap_error(n, q, k) >= limit - beta:
        k += 1
        if k > 10_000:
            raise RuntimeError("target too close to the limit")
    return k


# ---------------------------------------------------------------------------
# Comparisons and matrix inequality


def _as_evaluable(obj):
    if isinstance(obj, bar.Barrier):
        return lambda X: np.asarray(bar.values(obj, X))
    if isinstance(obj, DiscreteSolution):
        return lambda X: np.asarray(obj.interpolate(X))
    if callable(obj):
        return obj
    raise TypeError("expected a Barrier, DiscreteSolution or callable")


def check_comparison(
    lower,
    upper,
    domain: Domain,
    n_samples: int = 10_000,
    seed: int = 0,
    margin: float = 1e-3,
    tol: float = 1e-12,
) -> ComparisonReport:
    """Sampled ordering check: upper >= lower everywhere (within tol)."""
    rng = np.random.default_rng(seed)
    X = sample_interior(domain, n_samples, rng, margin=margin)
    gap = _as_evaluable(upper)(X) - _as_evaluable(lower)(X)
    i = int(np.argmin(gap))
    worst = float(gap[i])
    return ComparisonReport(passed=worst >= -tol, worst_gap=worst, worst_point=X[i])


def trace_inequality_check(A, B, psd_tol: float = 1e-10, slack: float = 1e-12) -> bool:
    """trace(A B) >= n (det A)^(1/n) (det B)^(1/n) for symmetric PSD matrices."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    for M in (A, B):
        if M.shape != (n, n) or not np.allclose(M, M.T, atol=1e-12, rtol=0.0):
            raise ValueError("inputs must be symmetric matrices of equal size")
        if np.min(np.linalg.eigvalsh(M)) < -psd_tol:
            raise ValueError("inputs must be positive semidefinite")
    lhs = float(np.trace(A @ B))
    det_a = max(float(np.linalg.det(A)), 0.0)
    det_b = max(float(np.linalg.det(B)), 0.0)
    rhs = n * det_a ** (1.0 / n) * det_b ** (1.0 / n)
    return lhs >= rhs - slack


# ---------------------------------------------------------------------------
# Degeneracy probe and sup-norm bounds


def mixc_exponent(n: int, k: float) -> float:
    """Decay rate ((n-4) k - (2n+4)) / (2n + 2k + 2) of the right-hand side."""
    return ((n - 4.0) * k - (2.0 * n + 4.0)) / (2.0 * n + 2.0 * k + 2.0)


def mixc_exponent_identity(n: int, k: float) -> tuple[float, float]:
    """(-a (n+2+k) - k (a-1), closed rate) with a = (2+k)/(2n+2k+2); equal."""
    a = (2.0 + k) / (2.0 * n + 2.0 * k + 2.0)
    return -a * (n + 2.0 + k) - k * (a - 1.0), mixc_exponent(n, k)


def mixc_probe(
    sol: DiscreteSolution, k: float, gamma: float, window: tuple[float, float] | None = None
) -> MixcReport:
    """Measure the decay of f = |u|^(-n-2-k) (x.Du - u)^(-k) along the cap axis.

    Uses nodal values and discrete gradients of a converged affine-sphere
    solve on the shifted cap; fits log f against log dist to the flat face
    and reports the constant in f <= C dist^e for the analytic rate e.
    """
    if sol.rhs.kind != bar.AFFINE_SPHERE:
        raise ValueError("probe needs an affine-sphere solve")
    if sol.floor_active:
        raise ValueError("gradients hit the positivity floor; f is unreliable")
    grid = sol.grid
    h = grid.h
    if window is None:
        window = (4.0 * h, 0.1)
    n = 2
    # axis nodes: lattice column x1 = 0 with dist = x2 + gamma inside the window
    on_axis = grid.ij[:, 0] == 0
    dist = grid.xy[:, 1] + gamma
    keep = on_axis & (dist >= window[0]) & (dist <= window[1])
    if np.count_nonzero(keep) < 5:
        raise ValueError("not enough axis nodes inside the window")
    g = sol.gradient()[keep]
    u = sol.values[keep]
    x = grid.xy[keep]
    d = dist[keep]
    s = np.einsum("ij,ij->i", x, g) - u
    if np.any(s <= 0.0):
        raise ValueError("x . Du - u nonpositive along the axis")
    f = np.abs(u) ** (-(n + 2.0 + k)) * s ** (-k)
    fit = fit_exponent(np.column_stack([d, f]), window)
    e = mixc_exponent(n, k)
    direct, closed = mixc_exponent_identity(n, k)
    c_bound = float(np.max(f / d**e))
    return MixcReport(
        fit=fit, exponent=e, bound_constant=c_bound, identity_gap=abs(direct - closed)
    )


def sup_norm_bound_check(sol: DiscreteSolution, n: int, p: float) -> SupNormReport:
    """Sup-norm lower bound and pointwise upper bound for a power-singular solve."""
    d = sol.grid.domain
    alpha = 2.0 / (n + p)
    lower = lower_bound_constant(n, p) * volume(d) ** alpha
    lower_ratio = sol.sup_norm() / lower
    c_a = bar.c_alpha(diameter(d), alpha)
    dist = boundary_distances(d, sol.grid.xy)
    upper_ratio = float(np.max(np.abs(sol.values) / (c_a * dist**alpha)))
    return SupNormReport(
        passed=(lower_ratio >= 1.0) and (upper_ratio <= 1.0),
        lower_ratio=float(lower_ratio),
        upper_ratio=upper_ratio,
    )
