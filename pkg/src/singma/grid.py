"""Masked Cartesian grid and the monotone wide-stencil Monge-Ampere operator.

Interior nodes are the points of h Z^2 strictly inside the domain.  The
stencil is a set of orthogonal integer direction pairs; along each direction
a node either has an interior neighbor or a cut arm ending on the boundary
(intersection found by bisection, Dirichlet value 0 there).  The operator is

    MA_h u(x) = min over pairs (e, e_perp) of
                [d2_e u(x)]_+ * [d2_perp u(x)]_+

with centered (possibly unequal-arm) second differences scaled by the arm
lengths, which makes the scheme degenerate elliptic: raising any neighbor
value cannot decrease MA_h, raising the center value cannot increase it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Domain, contains_many

__all__ = ["GridSpec", "stencil_pairs", "build_grid", "ma_apply", "ma_operator",
           "second_differences", "discrete_gradient"]

_THETA_MIN = 1e-8


def _canonical(e: tuple[int, int]) -> tuple[int, int]:
    p, q = e
    if p < 0 or (p == 0 and q < 0):
        return (-p, -q)
    return (p, q)


def stencil_pairs(width: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Distinct orthogonal pairs of primitive lattice directions, sup-norm <= width."""
    if width < 1:
        raise ValueError("stencil width must be >= 1")
    dirs = []
    for p in range(-width, width + 1):
        for q in range(-width, width + 1):
            if (p, q) == (0, 0) or math.gcd(abs(p), abs(q)) != 1:
                continue
            e = _canonical((p, q))
            if e not in dirs:
                dirs.append(e)
    pairs = {}
    for e in dirs:
        perp = _canonical((-e[1], e[0]))
        if max(abs(perp[0]), abs(perp[1])) > width:
            continue
        key = tuple(sorted((e, perp)))
        pairs[key] = key
    return sorted(pairs.values())


@dataclass
class GridSpec:
    """Interior mask, boundary projections and stencil connectivity."""

    domain: Domain
    h: float
    stencil_width: int
    pairs: list  # ((e1, e2), ...) orthogonal integer direction pairs
    arms: np.ndarray  # (n_arms, 2) signed arm directions
    pair_arms: np.ndarray  # (n_pairs, 4) arm indices (+e1, -e1, +e2, -e2)
    ij: np.ndarray  # (N, 2) lattice coordinates of interior nodes
    xy: np.ndarray  # (N, 2) physical coordinates
    origin: np.ndarray  # lattice window offset (imin, jmin)
    index: np.ndarray  # 2-D lattice window -> node id (-1 outside)
    nbr: np.ndarray  # (n_arms, N) neighbor node id, -1 for cut arms
    theta: np.ndarray  # (n_arms, N) arm-length fraction in (0, 1]
    cut_xy: np.ndarray  # (n_arms, N, 2) boundary intersection point (nan if regular)

    @property
    def n_nodes(self) -> int:
        return self.ij.shape[0]

    def node_at(self, i: int, j: int) -> int:
        ii, jj = i - self.origin[0], j - self.origin[1]
        if 0 <= ii < self.index.shape[0] and 0 <= jj < self.index.shape[1]:
            return int(self.index[ii, jj])
        return -1

    def arm_lengths(self) -> np.ndarray:
        """(n_arms, N) physical arm lengths theta * h * |e|."""
        scale = self.h * np.linalg.norm(self.arms, axis=1)
        return self.theta * scale[:, None]

    def boundary_projections(self) -> np.ndarray:
        """(m, 2) all cut-arm boundary intersection points."""
        mask = self.nbr < 0
        return self.cut_xy[mask]


def build_grid(domain: Domain, h: float, stencil_width: int = 2) -> GridSpec:
    if domain.dim != 2:
        raise ValueError("grids are two-dimensional")
    if h <= 0.0:
        raise ValueError("grid spacing must be positive")
    from .geometry import bounding_box

    lo, hi = bounding_box(domain)
    imin, imax = math.floor(lo[0] / h) - 1, math.ceil(hi[0] / h) + 1
    jmin, jmax = math.floor(lo[1] / h) - 1, math.ceil(hi[1] / h) + 1
    ii, jj = np.meshgrid(
        np.arange(imin, imax + 1), np.arange(jmin, jmax + 1), indexing="ij"
    )
    lattice = np.column_stack([ii.ravel(), jj.ravel()])
    pts = lattice * h
    inside = contains_many(domain, pts)
    if not np.any(inside):
        raise ValueError("no interior grid nodes; decrease h")
    ij = lattice[inside]
    xy = pts[inside]
    N = ij.shape[0]
    index = -np.ones(ii.shape, dtype=np.int64)
    index[ij[:, 0] - imin, ij[:, 1] - jmin] = np.arange(N)

    pairs = stencil_pairs(stencil_width)
    arm_list: list[tuple[int, int]] = []
    pair_arms = np.empty((len(pairs), 4), dtype=np.int64)

    def arm_id(e: tuple[int, int]) -> int:
        if e not in arm_list:
            arm_list.append(e)
        return arm_list.index(e)

    for pi, (e1, e2) in enumerate(pairs):
        pair_arms[pi] = [
            arm_id(e1),
            arm_id((-e1[0], -e1[1])),
            arm_id(e2),
            arm_id((-e2[0], -e2[1])),
        ]
    arms = np.asarray(arm_list, dtype=np.int64)
    n_arms = arms.shape[0]

    nbr = -np.ones((n_arms, N), dtype=np.int64)
    theta = np.ones((n_arms, N))
    cut_xy = np.full((n_arms, N, 2), np.nan)
    for ai, e in enumerate(arms):
        tgt = ij + e
        ti, tj = tgt[:, 0] - imin, tgt[:, 1] - jmin
        ok = (ti >= 0) & (ti < index.shape[0]) & (tj >= 0) & (tj < index.shape[1])
        ti = np.clip(ti, 0, index.shape[0] - 1)
        tj = np.clip(tj, 0, index.shape[1] - 1)
        ids = np.where(ok, index[ti, tj], -1)
        nbr[ai] = ids
        cut = ids < 0
        if not np.any(cut):
            continue
        base = xy[cut]
        step = e.astype(float) * h
        s_lo = np.zeros(cut.sum())
        s_hi = np.ones(cut.sum())
        for _ in range(50):
            mid = 0.5 * (s_lo + s_hi)
            inside_mid = contains_many(domain, base + mid[:, None] * step)
            s_lo = np.where(inside_mid, mid, s_lo)
            s_hi = np.where(inside_mid, s_hi, mid)
        theta[ai, cut] = np.maximum(s_hi, _THETA_MIN)
        cut_xy[ai, cut] = base + s_hi[:, None] * step

    return GridSpec(
        domain=domain,
        h=h,
        stencil_width=stencil_width,
        pairs=pairs,
        arms=arms,
        pair_arms=pair_arms,
        ij=ij,
        xy=xy,
        origin=np.array([imin, jmin]),
        index=index,
        nbr=nbr,
        theta=theta,
        cut_xy=cut_xy,
    )


def _arm_values(g: GridSpec, values: np.ndarray, ai: int, cols=slice(None)):
    ids = g.nbr[ai, cols]
    return np.where(ids >= 0, values[np.maximum(ids, 0)], 0.0)


def second_differences(g: GridSpec, values: np.ndarray) -> np.ndarray:
    """(n_pairs, 2, N) centered second differences along each pair direction."""
    values = np.asarray(values, dtype=float)
    lengths = g.arm_lengths()
    out = np.empty((len(g.pairs), 2, g.n_nodes))
    for pi in range(len(g.pairs)):
        for side in range(2):
            ap, am = g.pair_arms[pi, 2 * side], g.pair_arms[pi, 2 * side + 1]
            dp, dm = lengths[ap], lengths[am]
            vp, vm = _arm_values(g, values, ap), _arm_values(g, values, am)
            out[pi, side] = (
                2.0 * (dm * vp + dp * vm - (dp + dm) * values) / (dp * dm * (dp + dm))
            )
    return out


def ma_apply(g: GridSpec, values: np.ndarray) -> np.ndarray:
    """Monotone wide-stencil Monge-Ampere operator at every node."""
    d2 = second_differences(g, values)
    prods = np.maximum(d2[:, 0], 0.0) * np.maximum(d2[:, 1], 0.0)
    return np.min(prods, axis=0)


def ma_operator(g: GridSpec, values: np.ndarray, node: int) -> float:
    """Operator value at a single interior node."""
    return float(ma_apply(g, np.asarray(values, dtype=float))[node])


def gauss_seidel_sweep(g: GridSpec, values: np.ndarray, f: np.ndarray) -> None:
    """One red/black sweep of exact local solves of MA_h(u) = f, in place.

    At each node the update solves min over pairs of the quadratic
    (A1 - B1 u)(A2 - B2 u) = f on the branch where both factors are
    nonnegative, which is the monotone-consistent root.
    """
    lengths = g.arm_lengths()
    color = (g.ij[:, 0] + g.ij[:, 1]) % 2
    for c in (0, 1):
        cols = np.nonzero(color == c)[0]
        if cols.size == 0:
            continue
        fc = f[cols]
        best = np.full(cols.size, np.inf)
        for pi in range(len(g.pairs)):
            AB = []
            for side in range(2):
                ap, am = g.pair_arms[pi, 2 * side], g.pair_arms[pi, 2 * side + 1]
                dp, dm = lengths[ap, cols], lengths[am, cols]
                vp = _arm_values(g, values, ap, cols)
                vm = _arm_values(g, values, am, cols)
                A = 2.0 * (dm * vp + dp * vm) / (dp * dm * (dp + dm))
                B = 2.0 / (dp * dm)
                AB.append((A, B))
            (A1, B1), (A2, B2) = AB
            S = A1 * B2 + A2 * B1
            disc = (A1 * B2 - A2 * B1) ** 2 + 4.0 * B1 * B2 * fc
            root = (S - np.sqrt(disc)) / (2.0 * B1 * B2)
            best = np.minimum(best, root)
        values[cols] = best


def discrete_gradient(g: GridSpec, values: np.ndarray) -> np.ndarray:
    """(N, 2) nodal gradient: centered interior, boundary-value slope at cut arms."""
    values = np.asarray(values, dtype=float)
    lengths = g.arm_lengths()
    axis_arms = {tuple(e): ai for ai, e in enumerate(map(tuple, g.arms))}
    out = np.empty((g.n_nodes, 2))
    for axis, (ep, em) in enumerate((((1, 0), (-1, 0)), ((0, 1), (0, -1)))):
        ap, am = axis_arms[ep], axis_arms[em]
        vp, vm = _arm_values(g, values, ap), _arm_values(g, values, am)
        out[:, axis] = (vp - vm) / (lengths[ap] + lengths[am])
    return out
