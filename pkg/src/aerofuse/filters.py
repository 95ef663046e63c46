"""Smooth/high-detail decomposition by a gradient-penalised quadratic filter.

Each plane is split as F = L + H where L minimises

    ||F - L||^2 + lambda * (||gx * L||^2 + ||gy * L||^2)

with gx = [-1 1] and gy its transpose. The objective is strictly convex, so L
is unique; two backends differ only in boundary handling.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NonConvergence
from .image import PlanarImage

GRADIENT_KERNEL_X = np.array([[-1.0, 1.0]])
GRADIENT_KERNEL_Y = GRADIENT_KERNEL_X.T


class Solver(Enum):
    SPECTRAL_PERIODIC = "SpectralPeriodic"
    CG_NEUMANN = "ConjugateGradientNeumann"


@dataclass(frozen=True)
class FilterParams:
    lam: float = 5.0
    solver: Solver = Solver.SPECTRAL_PERIODIC
    cg_tolerance: float = 1e-6
    cg_max_iters: int = 500

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.cg_tolerance <= 0:
            raise ValueError("cgTolerance must be positive")


def _smooth_plane_spectral(f: np.ndarray, lam: float) -> np.ndarray:
    # Exact minimiser under periodic boundary: the forward-difference operators are
    # circulant with |D(w)|^2 = 4 sin^2(w/2), so the normal equations diagonalise.
    h, w = f.shape
    tx = (2.0 * np.sin(np.pi * np.fft.fftfreq(w))) ** 2
    ty = (2.0 * np.sin(np.pi * np.fft.fftfreq(h))) ** 2
    denom = 1.0 + lam * (tx[None, :] + ty[:, None])
    return np.real(np.fft.ifft2(np.fft.fft2(f) / denom))


def _dx(u: np.ndarray) -> np.ndarray:
    # forward difference, replicate boundary (last column difference is 0)
    out = np.zeros_like(u)
    out[:, :-1] = u[:, 1:] - u[:, :-1]
    return out


def _dxt(v: np.ndarray) -> np.ndarray:
    # adjoint of _dx under the Euclidean inner product
    out = np.zeros_like(v)
    out[:, 0] = -v[:, 0]
    out[:, 1:-1] = v[:, :-2] - v[:, 1:-1]
    out[:, -1] = v[:, -2]
    return out


def _dy(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    out[:-1, :] = u[1:, :] - u[:-1, :]
    return out


def _dyt(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    out[0, :] = -v[0, :]
    out[1:-1, :] = v[:-2, :] - v[1:-1, :]
    out[-1, :] = v[-2, :]
    return out


def _smooth_plane_cg(f: np.ndarray, params: FilterParams) -> np.ndarray:
    lam = params.lam

    def apply(u: np.ndarray) -> np.ndarray:
        return u + lam * (_dxt(_dx(u)) + _dyt(_dy(u)))

    b = f
    x = f.copy()
    r = b - apply(x)
    p = r.copy()
    rs = float(np.vdot(r, r))
    bnorm = float(np.linalg.norm(b))
    threshold = params.cg_tolerance * max(bnorm, 1e-300)
    if np.sqrt(rs) <= threshold:
        return x
    for _ in range(params.cg_max_iters):
        ap = apply(p)
        alpha = rs / float(np.vdot(p, ap))
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r))
        if np.sqrt(rs_new) <= threshold:
            return x
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NonConvergence(
        f"CG did not reach relative residual {params.cg_tolerance} in {params.cg_max_iters} iterations"
    )


def smooth(img: PlanarImage, params: FilterParams = FilterParams()) -> PlanarImage:
    """Return L, the smooth layer, computed independently per plane."""
    if params.lam == 0.0:
        return PlanarImage(img.data)
    out = np.empty_like(img.data)
    for i in range(img.planes):
        if params.solver is Solver.SPECTRAL_PERIODIC:
            out[i] = _smooth_plane_spectral(img.data[i], params.lam)
        else:
            out[i] = _smooth_plane_cg(img.data[i], params)
    return PlanarImage(out)


def high_detail(img: PlanarImage, params: FilterParams = FilterParams()) -> PlanarImage:
    """Return H = F - smooth(F). Signed, stored unclamped."""
    return PlanarImage(img.data - smooth(img, params).data)
