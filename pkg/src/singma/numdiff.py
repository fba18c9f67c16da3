"""Central finite-difference jets, independent of any closed form.

Used to cross-check the analytic gradients, Hessians and determinants.
The default step is h = 1e-4 with a Richardson-style consistency check at
h/2: the returned jet uses the finer step and the coarse/fine deviation is
reported so callers can flag untrustworthy points.
"""
from __future__ import annotations

import numpy as np

from .geometry import Jet2

__all__ = ["fd_jet", "fd_jets", "fd_det"]


def _displacements(n: int, h: float) -> np.ndarray:
    """Offsets for value, gradient, diagonal and cross second differences."""
    rows = [np.zeros(n)]
    eye = np.eye(n)
    for i in range(n):
        rows.append(h * eye[i])
        rows.append(-h * eye[i])
    for i in range(n):
        for j in range(i + 1, n):
            rows.append(h * (eye[i] + eye[j]))
            rows.append(h * (eye[i] - eye[j]))
            rows.append(h * (-eye[i] + eye[j]))
            rows.append(h * (-eye[i] - eye[j]))
    return np.asarray(rows)


def _assemble(V: np.ndarray, n: int, h: float):
    m = V.shape[0]
    value = V[:, 0]
    grad = np.empty((m, n))
    hess = np.empty((m, n, n))
    for i in range(n):
        vp, vm = V[:, 1 + 2 * i], V[:, 2 + 2 * i]
        grad[:, i] = (vp - vm) / (2.0 * h)
        hess[:, i, i] = (vp - 2.0 * value + vm) / h**2
    idx = 1 + 2 * n
    for i in range(n):
        for j in range(i + 1, n):
            vpp, vpm, vmp, vmm = (V[:, idx + s] for s in range(4))
            hess[:, i, j] = hess[:, j, i] = (vpp - vpm - vmp + vmm) / (4.0 * h**2)
            idx += 4
    return value, grad, hess


def fd_jets(func, X, h: float = 1e-4):
    """Batched jets: func maps an (m, n) array to (m,) values.

    Returns (values, gradients, hessians, deviation) where deviation is the
    per-point relative disagreement between steps h and h/2.
    """
    X = np.asarray(X, dtype=float)
    m, n = X.shape
    out = []
    for step in (h, h / 2.0):
        D = _displacements(n, step)
        pts = (X[:, None, :] + D[None, :, :]).reshape(-1, n)
        V = np.asarray(func(pts), dtype=float).reshape(m, D.shape[0])
        out.append(_assemble(V, n, step))
    (_, g1, H1), (value, g2, H2) = out
    scale_g = np.maximum(np.max(np.abs(g2), axis=1), 1e-30)
    scale_h = np.maximum(np.max(np.abs(H2), axis=(1, 2)), 1e-30)
    dev = np.maximum(
        np.max(np.abs(g1 - g2), axis=1) / scale_g,
        np.max(np.abs(H1 - H2), axis=(1, 2)) / scale_h,
    )
    return value, g2, H2, dev


def fd_jet(func, x, h: float = 1e-4) -> Jet2:
    """Finite-difference jet at a single point (func takes an (m, n) batch)."""
    x = np.asarray(x, dtype=float)
    value, grad, hess, _ = fd_jets(func, x[None, :], h=h)
    H = 0.5 * (hess[0] + hess[0].T)
    return Jet2(value=float(value[0]), gradient=grad[0], hessian=H)


def fd_det(func, x, h: float = 1e-4) -> float:
    return float(np.linalg.det(fd_jet(func, x, h=h).hessian))
