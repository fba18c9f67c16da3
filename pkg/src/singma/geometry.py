"""Bounded open convex domains and exact geometric queries.

Four parametric families cover everything the barrier constructions and the
solver need: parabola caps ``{0 < x_n + gamma < t^2 - |x'|^2}`` (with an
optional downward shift ``gamma`` so the origin can sit in the interior),
the upper unit half ball, centered balls, and bounded intersections of open
half-spaces.  Membership, boundary distance, diameter and volume are exact
up to the stated root-finding tolerances; everything runs in double
precision and all values are immutable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Domain",
    "Jet2",
    "parabola_cap",
    "sphere_cap",
    "ball",
    "halfspace_intersection",
    "contains",
    "contains_many",
    "dist_to_boundary",
    "boundary_distances",
    "diameter",
    "volume",
    "contains_origin_interior",
    "bounding_box",
    "boundary_slack",
    "sample_interior",
    "sample_boundary",
    "unit_ball_volume",
]

PARABOLA_CAP = "parabola_cap"
SPHERE_CAP = "sphere_cap"
BALL = "ball"
HALFSPACES = "halfspaces"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Domain:
    """Open bounded convex region in R^n (n >= 2).

    ``t`` and ``gamma`` parametrize the parabola cap, ``radius`` the ball;
    half-space domains carry unit outward ``normals`` with ``offsets`` so the
    region is ``{x : normals[i] . x < offsets[i] for all i}``.
    """

    kind: str
    dim: int
    t: float = 1.0
    gamma: float = 0.0
    radius: float = 1.0
    normals: tuple[tuple[float, ...], ...] = ()
    offsets: tuple[float, ...] = ()


@dataclass
class Jet2:
    """Second-order data (value, gradient, Hessian) of a function at a point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    def __post_init__(self):
        self.gradient = np.asarray(self.gradient, dtype=float)
        self.hessian = np.asarray(self.hessian, dtype=float)
        if self.hessian.shape != (self.gradient.size, self.gradient.size):
            raise ValueError("hessian shape does not match gradient length")
        defect = self.symmetry_defect()
        if defect > 1e-12:
            raise ValueError(f"hessian not symmetric (relative defect {defect:.3e})")

    def symmetry_defect(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.hessian))))
        return float(np.max(np.abs(self.hessian - self.hessian.T))) / scale


def parabola_cap(t: float = 1.0, gamma: float = 0.0, dim: int = 2) -> Domain:
    """Cap ``{0 < x_n + gamma < t^2 - |x'|^2}`` with a flat face on ``{x_n = -gamma}``."""
    if t <= 0.0:
        raise ValueError("parabola cap scale t must be positive")
    if gamma < 0.0:
        raise ValueError("parabola cap shift gamma must be >= 0")
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    return Domain(kind=PARABOLA_CAP, dim=dim, t=float(t), gamma=float(gamma))


def sphere_cap(dim: int = 2) -> Domain:
    """Upper half of the open unit ball: ``{|x'| < 1, 0 < x_n < sqrt(1 - |x'|^2)}``."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    return Domain(kind=SPHERE_CAP, dim=dim)


def ball(radius: float = 1.0, dim: int = 2) -> Domain:
    if radius <= 0.0:
        raise ValueError("ball radius must be positive")
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    return Domain(kind=BALL, dim=dim, radius=float(radius))


def halfspace_intersection(normals, offsets) -> Domain:
    """Open region ``{x : n_i . x < b_i}``; normals are normalized to unit length."""
    A = np.atleast_2d(np.asarray(normals, dtype=float))
    b = np.asarray(offsets, dtype=float).ravel()
    if A.shape[0] != b.size:
        raise ValueError("need one offset per normal")
    if A.shape[1] < 2:
        raise ValueError("dimension must be >= 2")
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero normal vector")
    A = A / norms[:, None]
    b = b / norms
    return Domain(
        kind=HALFSPACES,
        dim=A.shape[1],
        normals=tuple(tuple(row) for row in A),
        offsets=tuple(b),
    )


def _split(d: Domain, X: np.ndarray):
    """Cylindrical coordinates (|x'|, x_n) with x_n shifted so 0 is the flat face."""
    r = np.linalg.norm(X[..., :-1], axis=-1)
    return r, X[..., -1]


def contains_many(d: Domain, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != d.dim:
        raise ValueError(f"expected points in R^{d.dim}, got shape {X.shape}")
    if d.kind == PARABOLA_CAP:
        r, xn = _split(d, X)
        z = xn + d.gamma
        return (z > 0.0) & (z < d.t**2 - r**2)
    if d.kind == SPHERE_CAP:
        xn = X[..., -1]
        return (xn > 0.0) & (np.linalg.norm(X, axis=-1) < 1.0)
    if d.kind == BALL:
        return np.linalg.norm(X, axis=-1) < d.radius
    if d.kind == HALFSPACES:
        A = np.asarray(d.normals)
        b = np.asarray(d.offsets)
        return np.all(X @ A.T < b, axis=-1)
    raise ValueError(f"unknown domain kind {d.kind!r}")


def contains(d: Domain, x) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (d.dim,):
        raise ValueError(f"expected a point in R^{d.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    return bool(contains_many(d, x[None, :])[0])


def _cap_top_distance(r: np.ndarray, z: np.ndarray, t: float) -> np.ndarray:
    """Distance from (r, z) to the revolved graph ``{z = t^2 - s^2, 0 <= s <= t}``.

    z is the height above the flat-face plane.  The squared distance
    F(s) = (r - s)^2 + (t^2 - s^2 - z)^2 can have two local minima, so the
    global basin is located on a coarse grid and then refined by golden
    section to machine precision.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    s_grid = np.linspace(0.0, t, 129)

    def F(s):
        return (r - s) ** 2 + (t**2 - s**2 - z) ** 2

    vals = (r[:, None] - s_grid[None, :]) ** 2 + (
        t**2 - s_grid[None, :] ** 2 - z[:, None]
    ) ** 2
    k = np.argmin(vals, axis=1)
    lo = s_grid[np.maximum(k - 1, 0)]
    hi = s_grid[np.minimum(k + 1, s_grid.size - 1)]
    for _ in range(80):
        c = hi - _GOLDEN * (hi - lo)
        m = lo + _GOLDEN * (hi - lo)
        take_left = F(c) < F(m)
        hi = np.where(take_left, m, hi)
        lo = np.where(take_left, lo, c)
    best = np.minimum(F(lo), F(hi))
    return np.sqrt(best)


def boundary_distances(d: Domain, X) -> np.ndarray:
    """Distance to the boundary for points assumed inside (vectorized)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if d.kind == BALL:
        return d.radius - np.linalg.norm(X, axis=-1)
    if d.kind == SPHERE_CAP:
        return np.minimum(X[..., -1], 1.0 - np.linalg.norm(X, axis=-1))
    if d.kind == HALFSPACES:
        A = np.asarray(d.normals)
        b = np.asarray(d.offsets)
        return np.min(b - X @ A.T, axis=-1)
    if d.kind == PARABOLA_CAP:
        r, xn = _split(d, X)
        z = xn + d.gamma
        return np.minimum(z, _cap_top_distance(r, z, d.t))
    raise ValueError(f"unknown domain kind {d.kind!r}")


def dist_to_boundary(d: Domain, x) -> float:
    """Euclidean distance from an interior point to the boundary."""
    x = np.asarray(x, dtype=float)
    if not contains(d, x):
        raise ValueError("point is not inside the domain")
    return float(boundary_distances(d, x[None, :])[0])


def _cap_diameter(t: float) -> float:
    # Antipodal surface points at radii r1, r2 give squared distance
    # u^2 (1 + s^2) with u = r1 + r2 and s = 2t - u; maximize over u in [t, 2t].
    best = max(4.0 * t**2, t**2 * (1.0 + t**2))
    if t**2 > 2.0:
        root = math.sqrt(t**2 - 2.0)
        for s in ((t + root) / 2.0, (t - root) / 2.0):
            if 0.0 <= s <= t:
                best = max(best, (2.0 * t - s) ** 2 * (1.0 + s**2))
    return math.sqrt(best)


def diameter(d: Domain) -> float:
    if d.kind == PARABOLA_CAP:
        return _cap_diameter(d.t)
    if d.kind == SPHERE_CAP:
        return 2.0
    if d.kind == BALL:
        return 2.0 * d.radius
    if d.kind == HALFSPACES:
        V = _halfspace_vertices(d)
        diff = V[:, None, :] - V[None, :, :]
        return float(np.sqrt(np.max(np.sum(diff**2, axis=-1))))
    raise ValueError(f"unknown domain kind {d.kind!r}")


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def volume(d: Domain) -> float:
    n = d.dim
    if d.kind == PARABOLA_CAP:
        return 2.0 * unit_ball_volume(n - 1) * d.t ** (n + 1) / (n + 1)
    if d.kind == SPHERE_CAP:
        return unit_ball_volume(n) / 2.0
    if d.kind == BALL:
        return unit_ball_volume(n) * d.radius**n
    if d.kind == HALFSPACES:
        from scipy.spatial import ConvexHull

        return float(ConvexHull(_halfspace_vertices(d)).volume)
    raise ValueError(f"unknown domain kind {d.kind!r}")


def contains_origin_interior(d: Domain) -> tuple[bool, float]:
    """Whether the origin is interior, and its boundary distance if so."""
    origin = np.zeros(d.dim)
    if not contains(d, origin):
        return False, 0.0
    return True, dist_to_boundary(d, origin)


def bounding_box(d: Domain) -> tuple[np.ndarray, np.ndarray]:
    n = d.dim
    if d.kind == PARABOLA_CAP:
        lo = np.full(n, -d.t)
        hi = np.full(n, d.t)
        lo[-1] = -d.gamma
        hi[-1] = d.t**2 - d.gamma
        return lo, hi
    if d.kind == SPHERE_CAP:
        lo = np.full(n, -1.0)
        hi = np.full(n, 1.0)
        lo[-1] = 0.0
        return lo, hi
    if d.kind == BALL:
        return np.full(n, -d.radius), np.full(n, d.radius)
    if d.kind == HALFSPACES:
        V = _halfspace_vertices(d)
        return V.min(axis=0), V.max(axis=0)
    raise ValueError(f"unknown domain kind {d.kind!r}")


def boundary_slack(d: Domain, X) -> np.ndarray:
    """Minimal slack of the defining inequalities (0 on the boundary).

    For the cap the slacks are the exact distances to the flat face and the
    vertical gap below the top surface; used as the interior sampling margin.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if d.kind == PARABOLA_CAP:
        r, xn = _split(d, X)
        z = xn + d.gamma
        return np.minimum(z, (d.t**2 - r**2) - z)
    if d.kind == SPHERE_CAP:
        return np.minimum(X[..., -1], 1.0 - np.linalg.norm(X, axis=-1))
    return boundary_distances(d, X)


def sample_interior(
    d: Domain, m: int, rng: np.random.Generator, margin: float = 0.0
) -> np.ndarray:
    """Draw m interior points by rejection, keeping defining slack >= margin."""
    lo, hi = bounding_box(d)
    out = np.empty((m, d.dim))
    filled = 0
    for _ in range(10_000):
        if filled >= m:
            break
        batch = rng.uniform(lo, hi, size=(max(2 * (m - filled), 64), d.dim))
        ok = contains_many(d, batch)
        if margin > 0.0:
            ok &= boundary_slack(d, batch) >= margin
        good = batch[ok]
        take = min(good.shape[0], m - filled)
        out[filled : filled + take] = good[:take]
        filled += take
    if filled < m:
        raise RuntimeError("interior sampling failed; margin too large?")
    return out


def _sample_unit_ball(m: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 0:
        return np.zeros((m, 0))
    g = rng.standard_normal((m, dim))
    g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
    radii = rng.uniform(0.0, 1.0, size=(m, 1)) ** (1.0 / dim)
    return g * radii


def sample_boundary(d: Domain, m: int, rng: np.random.Generator) -> np.ndarray:
    """Sample boundary points (used to test vanishing boundary values)."""
    n = d.dim
    if d.kind == PARABOLA_CAP:
        xp = _sample_unit_ball(m, n - 1, rng) * d.t
        r2 = np.sum(xp**2, axis=1)
        on_top = rng.uniform(size=m) < 0.5
        xn = np.where(on_top, d.t**2 - r2 - d.gamma, -d.gamma)
        return np.column_stack([xp, xn])
    if d.kind == SPHERE_CAP:
        out = np.empty((m, n))
        on_sphere = rng.uniform(size=m) < 0.5
        disc = _sample_unit_ball(m, n - 1, rng)
        g = rng.standard_normal((m, n))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        g[:, -1] = np.abs(g[:, -1])
        out[:, :-1] = np.where(on_sphere[:, None], g[:, :-1], disc)
        out[:, -1] = np.where(on_sphere, g[:, -1], 0.0)
        return out
    if d.kind == BALL:
        g = rng.standard_normal((m, n))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
        return g * d.radius
    raise ValueError(f"boundary sampling not supported for kind {d.kind!r}")


@lru_cache(maxsize=32)
def _halfspace_vertices(d: Domain) -> np.ndarray:
    from scipy.optimize import linprog
    from scipy.spatial import HalfspaceIntersection

    A = np.asarray(d.normals)
    b = np.asarray(d.offsets)
    n = d.dim
    # Boundedness: every coordinate must have a finite LP maximum both ways.
    for j in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[j] = sign
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                raise ValueError("half-space intersection is unbounded")
            if not res.success:
                raise ValueError("half-space intersection is empty")
    # Chebyshev center supplies the interior point Qhull needs.
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.column_stack([A, np.ones(A.shape[0])]),
        b_ub=b,
        bounds=[(None, None)] * n + [(0.0, None)],
        method="highs",
    )
    if not res.success or res.x[-1] <= 1e-12:
        raise ValueError("half-space intersection has empty interior")
    hs = HalfspaceIntersection(np.column_stack([A, -b]), res.x[:-1])
    return np.asarray(hs.intersections)
