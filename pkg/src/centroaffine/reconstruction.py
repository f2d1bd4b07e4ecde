"""Recover a 0-convex curve from a regular null path with spatial acceleration.

At each t the kernel of gamma'(t) is a line; pick v(t) on it with
<gamma v, v> = 1, continuous in t. Then alpha = gamma v is 0-convex when
v ^ v' > 0 and its osculating ellipses are E_gamma(t). When v ^ v' < 0 the
same holds for the reversed path t -> gamma(-t).

Both v and -v satisfy the normalization, so alpha is determined up to the
central symmetry z -> -z (which maps every centered ellipse to itself). Pass
``anchor`` to pick the branch closest to a known point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import (
    ConvexityReport,
    SampledCurve,
    central_difference,
    check_zero_convex,
    euclidean_curvature,
)
from .ellipses import invariant_norm, nullity_residual
from .linalg import KernelError, det_sym, kernel_of_singular_sym, wedge
from .osculation import ellipse_frame_curvature, osculating_matrix
from .paths import MatrixPath, ReversedPath

COS_45 = np.sqrt(0.5)
TRIM = 3


class ReconstructionError(ValueError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PathNotNullError(ReconstructionError):
    pass


class RegularityError(ReconstructionError):
    pass


class SignPropagationError(ReconstructionError):
    pass


class AccelerationNotSpatialError(ReconstructionError):
    pass


@dataclass
class KernelField:
    t: np.ndarray
    v: np.ndarray
    continuous: bool
    normalization_residual: float


def _uniform_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 9:
        raise ReconstructionError("grid needs at least 9 points")
    steps = np.diff(grid)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps[0] * len(grid):
        raise ReconstructionError("grid must be uniform and increasing")
    return grid


def kernel_field(path: MatrixPath, grid, null_tol: float = 1e-6) -> KernelField:
    grid = np.asarray(grid, dtype=float)
    G = path.value(grid)
    G1 = path.derivative(grid, 1)
    vs = np.empty((len(grid), 2))
    for k, (A, X) in enumerate(zip(G, G1)):
        if np.max(np.abs(X)) <= 1e-12 * np.max(np.abs(A)):
            raise RegularityError(f"gamma' vanishes at t={grid[k]:.17g}")
        r = nullity_residual(X)
        if r > null_tol:
            raise PathNotNullError(f"path not null at t={grid[k]:.17g} (residual {r:.3e})")
        try:
            v = kernel_of_singular_sym(X, tol=max(null_tol, 1e-8))
        except KernelError as exc:
            raise PathNotNullError(str(exc)) from exc
        v = v / np.sqrt(v @ A @ v)
        if k:
            prev = vs[k - 1]
            c = (v @ prev) / (np.linalg.norm(v) * np.linalg.norm(prev))
            if abs(c) < COS_45:
                raise SignPropagationError(
                    f"sign propagation broke at t={grid[k]:.17g}; grid too coarse"
                )
            if c < 0:
                v = -v
        vs[k] = v
    norm_res = float(np.max(np.abs(np.einsum("ki,kij,kj->k", vs, G, vs) - 1)))
    return KernelField(grid, vs, True, norm_res)


@dataclass
class ReconstructionResult:
    curve: SampledCurve
    t: np.ndarray
    time_reversed: bool
    convexity: ConvexityReport
    osculation_residual: float
    curvature_residual: float
    kernel: KernelField = field(repr=False)
    success: bool = True

    def summary(self) -> dict:
        return {
            "success": self.success,
            "time_reversed": self.time_reversed,
            "osculation_residual": self.osculation_residual,
            "curvature_residual": self.curvature_residual,
            "convexity": self.convexity.to_dict(),
            "t_min": float(self.t[0]),
            "t_max": float(self.t[-1]),
            "n": int(len(self.t)),
        }


def reconstruct(
    path: MatrixPath,
    grid,
    null_tol: float = 1e-6,
    osc_tol: float = 1e-5,
    anchor=None,
    strict: bool = True,
) -> ReconstructionResult:
    """alpha(t) = gamma(t) v(t), reversing time when v ^ v' < 0.

    Checks run on the grid with ``TRIM`` points dropped at each end.
    """
    grid = _uniform_grid(grid)
    h = grid[1] - grid[0]
    G = path.value(grid)
    kf = kernel_field(path, grid, null_tol)
    Y = path.derivative(grid, 2)
    accel = invariant_norm(G, Y)
    # Same scale-free measure as the nullity residual.
    spatial = -det_sym(Y) / np.maximum(np.max(np.abs(Y), axis=(1, 2)) ** 2, np.finfo(float).tiny)
    if np.any(spatial <= null_tol):
        k = int(np.argmin(spatial))
        raise AccelerationNotSpatialError(
            f"acceleration not spatial at t={grid[k]:.17g} (norm {accel[k]:.3e})"
        )
    dv = central_difference(kf.v, h, 1)
    turning = wedge(kf.v[2:-2], dv)
    if np.median(turning) < 0:
        result = reconstruct(
            ReversedPath(path), -grid[::-1], null_tol, osc_tol, anchor, strict=False
        )
        result.time_reversed = True
        return _finish(result, strict, osc_tol)

    v = kf.v
    alpha = np.einsum("kij,kj->ki", G, v)
    if anchor is not None:
        anchor = np.asarray(anchor, dtype=float)
        if np.linalg.norm(alpha[0] + anchor) < np.linalg.norm(alpha[0] - anchor):
            v, alpha = -v, -alpha
            kf.v = v
            dv = -dv
    curve = SampledCurve(alpha, grid[0], grid[-1])

    inner = grid[TRIM:-TRIM]
    convexity = check_zero_convex(curve, inner)
    gamma_inner = G[TRIM:-TRIM]
    recovered = osculating_matrix(curve, inner)
    osc = float(np.max(np.abs(recovered - gamma_inner)) / np.max(np.abs(gamma_inner)))

    # Curvature of E_gamma at alpha (with w = v') against that of alpha itself.
    w = dv[TRIM - 2 : len(dv) - (TRIM - 2)]
    k_ellipse = ellipse_frame_curvature(gamma_inner, v[TRIM:-TRIM], w)
    k_curve = euclidean_curvature(curve, inner)
    curv_res = float(np.max(np.abs(k_ellipse - k_curve) / np.maximum(1.0, np.abs(k_curve))))

    result = ReconstructionResult(
        curve=curve,
        t=grid,
        time_reversed=False,
        convexity=convexity,
        osculation_residual=osc,
        curvature_residual=curv_res,
        kernel=kf,
    )
    return _finish(result, strict, osc_tol)


def _finish(result: ReconstructionResult, strict: bool, osc_tol: float) -> ReconstructionResult:
    problems = []
    if not result.convexity.ok:
        problems.append(
            "reconstructed curve is not 0-convex "
            f"(min wedges {result.convexity.min_position_wedge:.3e}, "
            f"{result.convexity.min_velocity_wedge:.3e})"
        )
    if result.osculation_residual > osc_tol:
        problems.append(f"osculation residual {result.osculation_residual:.3e} > {osc_tol:.1e}")
    result.success = not problems
    if strict and problems:
        raise ReconstructionError("; ".join(problems), result)
    return result
