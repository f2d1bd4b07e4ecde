"""The space of origin-centered ellipses as the cone of SPD 2x2 matrices.

An SPD matrix A stands for the ellipse E_A = {z : <A^-1 z, z> = 1}. Two
Lorentz structures live on the cone: the flat one with norm -det X, and the
GL+(2)-invariant one with norm -det(A^-1 X) at base point A. They differ by
the conformal factor phi(A)^-2, phi = sqrt(det A).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    NotPositiveDefiniteError,
    adjugate,
    det_sym,
    inverse_spd,
    require_spd,
    rot90,
    spd_sqrt,
    sym_entries,
    trace_sym,
)

SPATIAL, NULL, TEMPORAL = "spatial", "null", "temporal"
FUTURE, PAST, NA = "future", "past", "n/a"


class GroupElementError(ValueError):
    pass


@dataclass(frozen=True)
class CenteredEllipse:
    A: np.ndarray

    def __post_init__(self):
        A = require_spd(np.array(self.A, dtype=float), "ellipse matrix")
        A = 0.5 * (A + A.T)
        A.flags.writeable = False
        object.__setattr__(self, "A", A)

    @property
    def entries(self) -> tuple[float, float, float]:
        return sym_entries(self.A)

    def points(self, n: int = 64) -> np.ndarray:
        """n points of A^(1/2) S^1."""
        s = np.linspace(0, 2 * np.pi, n, endpoint=False)
        circle = np.column_stack([np.cos(s), np.sin(s)])
        return circle @ spd_sqrt(self.A).T


@dataclass(frozen=True)
class TangentVec:
    base: np.ndarray
    dir: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", require_spd(self.base, "base point"))
        object.__setattr__(self, "dir", np.asarray(self.dir, dtype=float))


@dataclass(frozen=True)
class CausalClass:
    kind: str
    time_orientation: str

    def __str__(self):
        if self.time_orientation == NA:
            return self.kind
        return f"{self.kind}/{self.time_orientation}"


@dataclass(frozen=True)
class WarpedCoords:
    B: np.ndarray
    x: float


def ellipse_from_axes(u, a: float, b: float) -> CenteredEllipse:
    """Ellipse {x u + y iu : x^2/a^2 + y^2/b^2 = 1}, i.e. A u = a^2 u, A iu = b^2 iu."""
    if not (a > 0 and b > 0):
        raise ValueError("semi-axes must be positive")
    u = np.asarray(u, dtype=float)
    if abs(np.hypot(*u) - 1) > 1e-9:
        raise ValueError("axis direction must be a unit vector")
    iu = rot90(u)
    return CenteredEllipse(a * a * np.outer(u, u) + b * b * np.outer(iu, iu))


def ellipse_contains(E: CenteredEllipse, z) -> float:
    """Signed residual <A^-1 z, z> - 1."""
    z = np.asarray(z, dtype=float)
    return float(z @ inverse_spd(E.A) @ z - 1)


def circle_residual(E: CenteredEllipse, z) -> float:
    """|A^(-1/2) z| - 1, the same membership test through E_A = A^(1/2) S^1."""
    w = inverse_spd(spd_sqrt(E.A)) @ np.asarray(z, dtype=float)
    return float(np.hypot(*w) - 1)


def flat_norm(X):
    return -det_sym(X)


def flat_inner(X, Y):
    """Polarization of -det: <X, Y> = -tr(adj(X) Y) / 2."""
    return -0.5 * trace_sym(adjugate(X) @ np.asarray(Y, dtype=float))


def invariant_norm(A, X=None):
    """-det(A^-1 X). Accepts a TangentVec or (base, direction)."""
    if X is None:
        A, X = A.base, A.dir
    d = det_sym(A)
    if np.any(np.asarray(A)[..., 0, 0] <= 0) or np.any(d <= 0):
        raise NotPositiveDefiniteError("base point is not positive definite")
    return -det_sym(X) / d


def invariant_inner(A, X, Y):
    return flat_inner(X, Y) / det_sym(A)


def causal_class(v: TangentVec, tol: float = 1e-10) -> CausalClass:
    A, X = v.base, v.dir
    xmax = float(np.max(np.abs(X)))
    if xmax == 0:
        return CausalClass(NULL, NA)
    scale = (xmax / float(np.max(np.abs(A)))) ** 2
    n = float(invariant_norm(A, X))
    if n > tol * scale:
        return CausalClass(SPATIAL, NA)
    kind = NULL if n >= -tol * scale else TEMPORAL
    # Translate to the identity with g = A^(-1/2).
    r = inverse_spd(spd_sqrt(A))
    Y = r @ X @ r
    future = Y[0, 0] > 0 or Y[1, 1] > 0
    return CausalClass(kind, FUTURE if future else PAST)


def _check_group(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (2, 2) or not np.linalg.det(g) > 0:
        raise GroupElementError("group element must be a 2x2 matrix with det > 0")
    return g


def group_act(g, E: CenteredEllipse) -> CenteredEllipse:
    g = _check_group(g)
    return CenteredEllipse(g @ E.A @ g.T)


def group_act_tangent(g, v: TangentVec) -> TangentVec:
    g = _check_group(g)
    return TangentVec(g @ v.base @ g.T, g @ v.dir @ g.T)


def grad_log_phi(A) -> np.ndarray:
    """Flat-metric gradient of log sqrt(det A).

    The defining property <W, X>_flat = tr(A^-1 X)/2 for all X forces
    adj(W) = -A^-1, hence W = A^-1 - tr(A^-1) I = -A / det A.
    """
    Ainv = inverse_spd(require_spd(A))
    return Ainv - trace_sym(Ainv) * np.eye(2)


def conformal_acceleration(A, X, Y) -> np.ndarray:
    """Covariant acceleration of the invariant metric along a path.

    With A = gamma(t), X = gamma'(t), Y = gamma''(t) (the flat acceleration):
    Y - 2 X(log phi) X + <X, X>_flat grad(log phi).
    """
    A = require_spd(A)
    dlogphi = 0.5 * trace_sym(inverse_spd(A) @ X)
    return Y - 2 * dlogphi * X + flat_norm(X) * grad_log_phi(A)


@dataclass(frozen=True)
class AccelNorms:
    flat_accel: np.ndarray
    conformal_accel: np.ndarray
    flat_route: float
    conformal_route: float
    velocity_residual: float

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.flat_route), abs(self.conformal_route), 1e-300)
        return abs(self.flat_route - self.conformal_route) / scale


def nullity_residual(X) -> float:
    """|det X| / max(eps, max|X_ij|^2); scale-free measure of lightlikeness."""
    m = float(np.max(np.abs(X)))
    return float(abs(det_sym(X)) / max(np.finfo(float).tiny, m * m))


def invariant_accel_norm(path, t: float, null_tol: float = 1e-6) -> AccelNorms:
    """Both routes to the invariant norm of the acceleration of ``path`` at t.

    Flat route: -det(gamma^-1 gamma''). Conformal route: the same norm of
    the conformal covariant acceleration. They coincide on null paths.
    """
    A = path.value(t)
    X = path.derivative(t, 1)
    Y = path.derivative(t, 2)
    Z = conformal_acceleration(A, X, Y)
    return AccelNorms(
        flat_accel=Y,
        conformal_accel=Z,
        flat_route=float(invariant_norm(A, Y)),
        conformal_route=float(invariant_norm(A, Z)),
        velocity_residual=nullity_residual(X) if np.any(X) else 0.0,
    )


def warped_coords(A) -> WarpedCoords:
    A = require_spd(A)
    d = det_sym(A)
    return WarpedCoords(B=A / np.sqrt(d), x=0.5 * float(np.log(d)))


def warped_norm_split(v: TangentVec) -> tuple[float, float]:
    """(h_norm, x_dot) with invariant_norm(v) = h_norm - x_dot**2.

    A^-1 X = M + x_dot I with M trace free; h_norm = tr(M^2)/2.
    """
    R = inverse_spd(v.base) @ v.dir
    x_dot = 0.5 * trace_sym(R)
    M = R - x_dot * np.eye(2)
    return 0.5 * float(np.trace(M @ M)), float(x_dot)
