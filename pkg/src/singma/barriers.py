"""Closed-form sub/supersolutions for singular Monge-Ampere right-hand sides.

Every barrier here is an instance of the cylindrical profile

    f(x) = lin * z - coef * z^a * (rad2 - |x'|^2)^b,      z = x_n + shift,

whose gradient, Hessian and Hessian determinant have exact closed forms.
With r = |x'| the Hessian has the (n-2)-fold eigenvalue f_r / r plus a 2x2
block in the (r, z) plane, and

    det D^2 f = coef^n (2b)^(n-1) a z^(na-2) (rad2 - r^2)^(n(b-1))
                * ((1-a) rad2 + (1-2b-a) r^2).

Subsolution kinds use b = 1 with rad2 equal to a large constant, the
supersolution family uses 0 < a, b < 1 with a + b <= 1 (which is exactly the
convexity condition) and a matching linear term so the boundary values
vanish.  Sharp admissible constants are computed, not merely asserted to
exist.  Evaluation on the singular sets ``{z = 0}`` or ``{r^2 = rad2}`` is an
error, never a limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import (
    Domain,
    Jet2,
    ball,
    contains_origin_interior,
    diameter,
    parabola_cap,
    sphere_cap,
)

__all__ = [
    "Barrier",
    "RhsSpec",
    "SingularEvaluationError",
    "power_singular",
    "degenerate",
    "affine_sphere",
    "c_alpha",
    "sharp_constant_suplem",
    "sharp_constant_suplem2",
    "sharp_constant_suplemk",
    "vallemk_constant",
    "sub_valpha",
    "sub_valpha_for",
    "super_w",
    "super_w2",
    "super_wt",
    "sub_valpha_k",
    "super_wk",
    "explicit_solution",
    "values",
    "singular_part_values",
    "gradients",
    "x_grad_minus_value",
    "det_hessian",
    "det_hessian_many",
    "min_hessian_eigenvalues",
    "eval_jet",
    "residual",
    "normalized_residual",
    "barrier_to_kv",
    "barrier_label",
]

SUB_VALPHA = "sub_valpha"
SUPER_W = "super_w"
SUPER_W2 = "super_w2"
SUPER_WT = "super_wt"
SUB_VALPHA_K = "sub_valpha_k"
SUPER_WK = "super_wk"
EXPLICIT_P1 = "p1_cylinder"
EXPLICIT_UJL = "ujl"

POWER_SINGULAR = "power_singular"
DEGENERATE = "degenerate"
AFFINE_SPHERE = "affine_sphere"


class SingularEvaluationError(ValueError):
    """Raised when a barrier is evaluated on or past its singular set."""


@dataclass(frozen=True)
class Barrier:
    """Immutable description of one closed-form barrier."""

    kind: str
    n: int
    a: float
    b: float
    coef: float
    lin: float
    rad2: float
    shift: float
    domain: Domain
    p: float | None = None
    k: float | None = None
    gamma0: float | None = None
    t: float | None = None


@dataclass(frozen=True)
class RhsSpec:
    """Right-hand side f(u, Du, x) of det D^2 u = f.

    power_singular: |u|^(-p), degenerate: |u|^q (q = 0 gives the constant 1),
    affine_sphere: |u|^(-n-2-k) (x . Du - u)^(-k).
    """

    kind: str
    p: float = 0.0
    q: float = 0.0
    k: float = 0.0

    def evaluate(self, value: float, gradient, x) -> float:
        x = np.asarray(x, dtype=float)
        g = np.asarray(gradient, dtype=float)
        if self.kind == POWER_SINGULAR:
            if value == 0.0:
                raise ZeroDivisionError("power-singular right-hand side at u = 0")
            return abs(value) ** (-self.p)
        if self.kind == DEGENERATE:
            return abs(value) ** self.q
        if self.kind == AFFINE_SPHERE:
            s = float(x @ g) - value
            if s <= 0.0:
                raise ValueError("x . Du - u must be positive for this right-hand side")
            n = x.size
            return abs(value) ** (-(n + 2 + self.k)) * s ** (-self.k)
        raise ValueError(f"unknown rhs kind {self.kind!r}")

    def exponents(self, n: int) -> tuple[float, float]:
        """(power on |u|, power on x.Du - u) in det * |u|^p * s^k = 1 form."""
        if self.kind == POWER_SINGULAR:
            return self.p, 0.0
        if self.kind == DEGENERATE:
            return -self.q, 0.0
        if self.kind == AFFINE_SPHERE:
            return n + 2 + self.k, self.k
        raise ValueError(f"unknown rhs kind {self.kind!r}")


def power_singular(p: float) -> RhsSpec:
    if p <= 0.0:
        raise ValueError("power-singular exponent p must be positive")
    return RhsSpec(kind=POWER_SINGULAR, p=float(p))


def degenerate(q: float) -> RhsSpec:
    if q < 0.0:
        raise ValueError("degenerate exponent q must be >= 0")
    return RhsSpec(kind=DEGENERATE, q=float(q))


def affine_sphere(k: float) -> RhsSpec:
    if k <= 0.0:
        raise ValueError("affine-sphere exponent k must be positive")
    return RhsSpec(kind=AFFINE_SPHERE, k=float(k))


# ---------------------------------------------------------------------------
# Admissible constants


def c_alpha(diam: float, alpha: float) -> float:
    """Separation constant (1 + 2 diam^2) / (alpha (1 - alpha))."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return (1.0 + 2.0 * diam**2) / (alpha * (1.0 - alpha))


def sharp_constant_suplem(n: int, p: float) -> float:
    """Largest coefficient keeping w = C(z - z^a (1-r^2)^(1-a)) a supersolution.

    With a = 2/(n+p) and b = 1 - a the admissibility product is
    C^(n+p) (2b)^(n-1) a (1-a) (1-r^2)^(p-1) <= 1, whose supremum over r < 1
    sits at r = 0 once p >= 1.
    """
    if p < 1.0:
        raise ValueError("requires p >= 1 (the lateral exponent p - 1 must be >= 0)")
    a = 2.0 / (n + p)
    b = 1.0 - a
    return ((2.0 * b) ** (n - 1) * a * b) ** (-1.0 / (n + p))


def sharp_constant_suplem2(n: int, p: float) -> float:
    """Sharp coefficient for the half-ball variant with b = (n+p-2)/(2(n+p))."""
    if p < n + 2:
        raise ValueError("requires p >= n + 2 (lateral exponent (p-n-2)/2 must be >= 0)")
    a = 2.0 / (n + p)
    b = (n + p - 2.0) / (2.0 * (n + p))
    return ((2.0 * b) ** (n - 1) * a * (1.0 - a)) ** (-1.0 / (n + p))


def sharp_constant_suplemk(n: int, k: float, gamma: float) -> float:
    """Sharp coefficient for the affine-sphere supersolution on the shifted cap.

    With a = (2+k)/(2n+2k+2) and b = 1-a the z-exponent of the admissibility
    product vanishes and the lateral exponent equals n + 1 > 0, so the
    supremum sits at r = 0.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    a = (2.0 + k) / (2.0 * n + 2.0 * k + 2.0)
    b = 1.0 - a
    return (3.0**k * (2.0 * b) ** (n - 1) * a * (1.0 - a)) ** (
        -1.0 / (2.0 * n + 2.0 * k + 2.0)
    )


def vallemk_constant(n: int, k: float, gamma0: float, diam: float) -> float:
    """Smallest C >= 1 + diam^2 making the affine-sphere subsolution admissible.

    Bisection (to 1e-10) on the worst-case inequality at r = diam:
    2^(n-1) (a gamma0)^k [(a - a^2) C - a (1 + a) diam^2] (C - diam^2)^(n+2k+2) >= 1.
    """
    if gamma0 <= 0.0:
        raise ValueError("gamma0 must be positive")
    a = (2.0 + k) / (2.0 * n + 2.0 * k + 2.0)

    def admissible(C: float) -> bool:
        lin = (a - a**2) * C - a * (1.0 + a) * diam**2
        return (
            lin > 0.0
            and 2.0 ** (n - 1)
            * (a * gamma0) ** k
            * lin
            * (C - diam**2) ** (n + 2.0 * k + 2.0)
            >= 1.0
        )

    lo = 1.0 + diam**2
    if admissible(lo):
        return lo
    hi = max(lo, (1.0 + a) / (1.0 - a) * diam**2) + 1.0
    while not admissible(hi):
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("no admissible constant found")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Constructors


def _require_exponents(a: float, b: float):
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0 and a + b <= 1.0 + 1e-15):
        raise ValueError("supersolution exponents need 0 < a, b < 1 and a + b <= 1")


def _halfspace_shift(domain: Domain) -> float:
    """Shift making domain a subset of {x_n + shift > 0} with the flat support plane."""
    if domain.kind == "parabola_cap":
        return domain.gamma
    if domain.kind == "sphere_cap":
        return 0.0
    if domain.kind == "ball":
        return domain.radius
    raise ValueError("subsolution needs a domain with a known supporting plane")


def sub_valpha(n: int, alpha: float, domain: Domain | None = None) -> Barrier:
    """Subsolution z^alpha (|x'|^2 - C_alpha) below any function vanishing on the boundary."""
    if domain is None:
        domain = parabola_cap(1.0, 0.0, dim=n)
    if domain.dim != n:
        raise ValueError("domain dimension mismatch")
    C = c_alpha(diameter(domain), alpha)
    return Barrier(
        kind=SUB_VALPHA,
        n=n,
        a=alpha,
        b=1.0,
        coef=1.0,
        lin=0.0,
        rad2=C,
        shift=_halfspace_shift(domain),
        domain=domain,
    )


def sub_valpha_for(n: int, p: float, domain: Domain | None = None) -> Barrier:
    """Subsolution matched to the |u|^(-p) equation (alpha = 2/(n+p))."""
    if p <= 0.0:
        raise ValueError("p must be positive")
    b = sub_valpha(n, 2.0 / (n + p), domain)
    return replace(b, p=float(p))


def super_w(n: int, p: float) -> Barrier:
    C = sharp_constant_suplem(n, p)
    a = 2.0 / (n + p)
    b = 1.0 - a
    _require_exponents(a, b)
    return Barrier(
        kind=SUPER_W,
        n=n,
        a=a,
        b=b,
        coef=C,
        lin=C,
        rad2=1.0,
        shift=0.0,
        domain=parabola_cap(1.0, 0.0, dim=n),
        p=float(p),
    )


def super_w2(n: int, p: float) -> Barrier:
    C = sharp_constant_suplem2(n, p)
    a = 2.0 / (n + p)
    b = (n + p - 2.0) / (2.0 * (n + p))
    _require_exponents(a, b)
    return Barrier(
        kind=SUPER_W2,
        n=n,
        a=a,
        b=b,
        coef=C,
        lin=C,
        rad2=1.0,
        shift=0.0,
        domain=sphere_cap(dim=n),
        p=float(p),
    )


def super_wt(n: int, p: float, t: float) -> Barrier:
    """Rescaled supersolution on the cap of scale t.

    Satisfies w_t(x) = t^(2(1+n)/(n+p)) w(x'/t, x_n/t^2) and the matching
    determinant scaling with factor t^(-2(1+n)p/(n+p)).
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    C = sharp_constant_suplem(n, p)
    a = 2.0 / (n + p)
    b = 1.0 - a
    K = C * t ** (2.0 * (1.0 - p) / (n + p))
    return Barrier(
        kind=SUPER_WT,
        n=n,
        a=a,
        b=b,
        coef=K,
        lin=K,
        rad2=t**2,
        shift=0.0,
        domain=parabola_cap(t, 0.0, dim=n),
        p=float(p),
        t=float(t),
    )


def sub_valpha_k(
    n: int,
    k: float,
    gamma: float,
    gamma0: float | None = None,
    diam: float | None = None,
    domain: Domain | None = None,
) -> Barrier:
    """Affine-sphere subsolution (x_n + gamma)^a (|x'|^2 - C) with a = (2+k)/(2n+2k+2)."""
    if k <= 0.0:
        raise ValueError("k must be positive")
    if domain is None:
        domain = parabola_cap(1.0, gamma, dim=n)
    if gamma0 is None:
        inside, gamma0 = contains_origin_interior(domain)
        if not inside:
            raise ValueError("domain must contain the origin in its interior")
    if not 0.0 < gamma0 <= gamma:
        raise ValueError("need gamma >= gamma0 > 0")
    if diam is None:
        diam = diameter(domain)
    a = (2.0 + k) / (2.0 * n + 2.0 * k + 2.0)
    C = vallemk_constant(n, k, gamma0, diam)
    return Barrier(
        kind=SUB_VALPHA_K,
        n=n,
        a=a,
        b=1.0,
        coef=1.0,
        lin=0.0,
        rad2=C,
        shift=float(gamma),
        domain=domain,
        k=float(k),
        gamma0=float(gamma0),
    )


def super_wk(n: int, k: float, gamma: float) -> Barrier:
    C0 = sharp_constant_suplemk(n, k, gamma)
    a = (2.0 + k) / (2.0 * n + 2.0 * k + 2.0)
    b = 1.0 - a
    _require_exponents(a, b)
    return Barrier(
        kind=SUPER_WK,
        n=n,
        a=a,
        b=b,
        coef=C0,
        lin=C0,
        rad2=1.0,
        shift=float(gamma),
        domain=parabola_cap(1.0, gamma, dim=n),
        k=float(k),
    )


def explicit_solution(kind: str, n: int) -> Barrier:
    """Exact solutions on the unit cylinder: residual det * |v|^p - 1 == 0.

    "p1_cylinder" solves for p = 1 in any dimension; "ujl" is the planar
    p = 4 solution -sqrt(3) (x2/2)^(1/3) (1 - x1^2)^(1/3).
    """
    if kind == EXPLICIT_P1:
        C = sharp_constant_suplem(n, 1.0)
        a = 2.0 / (n + 1)
        return Barrier(
            kind=EXPLICIT_P1,
            n=n,
            a=a,
            b=1.0 - a,
            coef=C,
            lin=0.0,
            rad2=1.0,
            shift=0.0,
            domain=parabola_cap(1.0, 0.0, dim=n),
            p=1.0,
        )
    if kind == EXPLICIT_UJL:
        if n != 2:
            raise ValueError("the ujl solution is planar (n = 2)")
        K = math.sqrt(3.0) * 2.0 ** (-1.0 / 3.0)
        return Barrier(
            kind=EXPLICIT_UJL,
            n=2,
            a=1.0 / 3.0,
            b=1.0 / 3.0,
            coef=K,
            lin=0.0,
            rad2=1.0,
            shift=0.0,
            domain=parabola_cap(1.0, 0.0, dim=2),
            p=4.0,
        )
    raise ValueError(f"unknown explicit solution kind {kind!r}")


# ---------------------------------------------------------------------------
# Evaluation


def _coords(b: Barrier, X: np.ndarray):
    r = np.linalg.norm(X[..., :-1], axis=-1)
    z = X[..., -1] + b.shift
    return r, z


def _check_points(b: Barrier, X: np.ndarray):
    if X.shape[-1] != b.n:
        raise ValueError(f"expected points in R^{b.n}")
    r, z = _coords(b, X)
    if np.any(z <= 0.0):
        raise SingularEvaluationError("evaluation on or below the singular set z = 0")
    if np.any(r**2 >= b.rad2):
        raise SingularEvaluationError("evaluation on or beyond the lateral singular set")
    return r, z


def _radial(b: Barrier, r, z):
    """Value and radial derivatives (f_r/r, f_rr, f_rz/r, f_z, f_zz)."""
    K, a, bb, T = b.coef, b.a, b.b, b.rad2
    q = T - r**2
    g = q**bb
    za = z**a
    value = b.lin * z - K * za * g
    q1 = 2.0 * K * bb * za * q ** (bb - 1.0)
    f_rr = 2.0 * K * bb * za * q ** (bb - 2.0) * (T + (1.0 - 2.0 * bb) * r**2)
    q3 = 2.0 * K * a * bb * z ** (a - 1.0) * q ** (bb - 1.0)
    f_z = b.lin - K * a * z ** (a - 1.0) * g
    f_zz = K * a * (1.0 - a) * z ** (a - 2.0) * g
    return value, q1, f_rr, q3, f_z, f_zz


def values(b: Barrier, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    r, z = _check_points(b, X)
    return b.lin * z - b.coef * z**b.a * (b.rad2 - r**2) ** b.b


def singular_part_values(b: Barrier, X) -> np.ndarray:
    """Magnitude of the boundary-singular component coef * z^a (rad2 - r^2)^b.

    This is |value| for kinds without a linear term; for the supersolution
    family it isolates the component carrying the boundary decay exponent.
    """
    X = np.asarray(X, dtype=float)
    r, z = _check_points(b, X)
    return b.coef * z**b.a * (b.rad2 - r**2) ** b.b


def gradients(b: Barrier, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    r, z = _check_points(b, X)
    _, q1, _, _, f_z, _ = _radial(b, r, z)
    out = np.empty_like(X)
    out[..., :-1] = q1[..., None] * X[..., :-1]
    out[..., -1] = f_z
    return out


def x_grad_minus_value(b: Barrier, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    g = gradients(b, X)
    return np.einsum("...i,...i->...", X, g) - values(b, X)


def det_hessian_many(b: Barrier, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    r, z = _check_points(b, X)
    K, a, bb, T, n = b.coef, b.a, b.b, b.rad2, b.n
    bracket = (1.0 - a) * T + (1.0 - 2.0 * bb - a) * r**2
    return (
        K**n
        * (2.0 * bb) ** (n - 1)
        * a
        * z ** (n * a - 2.0)
        * (T - r**2) ** (n * (bb - 1.0))
        * bracket
    )


def det_hessian(b: Barrier, x) -> float | np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(det_hessian_many(b, x[None, :])[0])
    return det_hessian_many(b, x)


def min_hessian_eigenvalues(b: Barrier, X) -> np.ndarray:
    """Smallest Hessian eigenvalue: min of f_r/r (n >= 3) and the 2x2 block."""
    X = np.asarray(X, dtype=float)
    r, z = _check_points(b, X)
    _, q1, f_rr, q3, _, f_zz = _radial(b, r, z)
    f_rz = q3 * r
    mean = 0.5 * (f_rr + f_zz)
    radius = np.sqrt(0.25 * (f_rr - f_zz) ** 2 + f_rz**2)
    lam = mean - radius
    if b.n >= 3:
        lam = np.minimum(lam, q1)
    return lam


def eval_jet(b: Barrier, x) -> Jet2:
    """Exact value, gradient and Hessian at one interior point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (b.n,):
        raise ValueError(f"expected a point in R^{b.n}")
    r, z = _check_points(b, x[None, :])
    value, q1, f_rr, q3, f_z, f_zz = (float(v[0]) for v in _radial(b, r, z))
    n = b.n
    xp = x[:-1]
    rr = float(r[0])
    grad = np.empty(n)
    grad[:-1] = q1 * xp
    grad[-1] = f_z
    H = np.zeros((n, n))
    H[: n - 1, : n - 1] = q1 * np.eye(n - 1)
    if rr > 0.0:
        H[: n - 1, : n - 1] += (f_rr - q1) * np.outer(xp, xp) / rr**2
    H[: n - 1, n - 1] = q3 * xp
    H[n - 1, : n - 1] = q3 * xp
    H[n - 1, n - 1] = f_zz
    return Jet2(value=value, gradient=grad, hessian=H)


def residual(obj, rhs: RhsSpec, x) -> float:
    """det D^2 u - f(u, Du, x); > 0 marks a local subsolution, < 0 a supersolution."""
    x = np.asarray(x, dtype=float)
    if isinstance(obj, Barrier):
        jet = eval_jet(obj, x)
        det = float(det_hessian(obj, x))
    elif isinstance(obj, Jet2):
        jet = obj
        det = float(np.linalg.det(jet.hessian))
    else:
        raise TypeError("expected a Barrier or a Jet2")
    return det - rhs.evaluate(jet.value, jet.gradient, x)


def normalized_residual(b: Barrier, rhs: RhsSpec, X) -> np.ndarray:
    """det * |u|^p * (x.Du - u)^k - 1, the bounded form of the residual sign.

    Positive means subsolution, negative supersolution; unlike the raw
    residual this stays O(1) up to the boundary.
    """
    X = np.asarray(X, dtype=float)
    p_eff, k_eff = rhs.exponents(b.n)
    det = det_hessian_many(b, X)
    mag = np.abs(values(b, X))
    out = det * mag**p_eff
    if k_eff != 0.0:
        s = x_grad_minus_value(b, X)
        if np.any(s <= 0.0):
            raise ValueError("x . Du - u must be positive for this right-hand side")
        out = out * s**k_eff
    return out - 1.0


def matched_rhs(b: Barrier) -> RhsSpec:
    """The right-hand side the barrier was built against."""
    if b.kind in (SUB_VALPHA_K, SUPER_WK):
        return affine_sphere(b.k)
    if b.p is None:
        raise ValueError("barrier has no attached equation parameter")
    return power_singular(b.p)


def barrier_to_kv(b: Barrier) -> dict[str, str]:
    kv = {"kind": b.kind, "n": str(b.n), "a": repr(b.a), "b": repr(b.b),
          "coef": repr(b.coef), "lin": repr(b.lin), "rad2": repr(b.rad2),
          "shift": repr(b.shift)}
    for name in ("p", "k", "gamma0", "t"):
        val = getattr(b, name)
        if val is not None:
            kv[name] = repr(val)
    return kv


def barrier_label(b: Barrier) -> str:
    parts = [b.kind, f"n={b.n}"]
    for name in ("p", "k", "t"):
        val = getattr(b, name)
        if val is not None:
            parts.append(f"{name}={val:g}")
    if b.shift:
        parts.append(f"gamma={b.shift:g}")
    return " ".join(parts)
