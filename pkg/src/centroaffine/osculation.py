"""Osculating centered ellipses, their null path, and centro-affine length.

In any parametrization beta with beta'' = a beta + b beta', the osculating
centered ellipse at t is E_gamma with

    gamma = beta beta^T + beta' beta'^T / (-a).

The path t -> gamma(t) is null for the invariant Lorentz metric. Its
acceleration norm -det(gamma^-1 gamma'') equals kappa^2 in the standard
centro-affine parametrization and picks up a factor (dt/ds)^4 otherwise, so
its fourth root is a length density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import (
    CurveError,
    CurveSpec,
    _frame_coefficients,
    centro_affine_curvature,
    euclidean_curvature,
)
from .ellipses import (
    CenteredEllipse,
    TangentVec,
    causal_class,
    ellipse_contains,
    invariant_norm,
    nullity_residual,
)
from .linalg import outer, rot90, wedge
from .paths import MatrixPath, SampledPath


class NullityError(ValueError):
    pass


class AccelerationSignError(ValueError):
    pass


class EllipseFrameError(ValueError):
    pass


VERTEX_TOL = 1e-6


def _sym_outer(u, v):
    return outer(u, v) + outer(v, u)


def is_stationary(X, A, rel: float = 1e-12) -> bool:
    """gamma' negligible against gamma: the path is locally constant (an ellipse arc)."""
    return float(np.max(np.abs(X))) <= rel * float(np.max(np.abs(A)))


def osculating_matrix(curve: CurveSpec, t):
    """gamma(t) for a scalar t or an array of t."""
    d = curve.derivatives(np.asarray(t, dtype=float), 2)
    a = _frame_coefficients(d)[0]
    if np.any(a >= 0):
        raise CurveError("curve is not 0-convex here (a >= 0)")
    return outer(d[0]) + (-1.0 / a)[..., None, None] * outer(d[1])


def osculating_ellipse(curve: CurveSpec, t: float) -> CenteredEllipse:
    return CenteredEllipse(osculating_matrix(curve, float(t)))


class OsculatingPath(MatrixPath):
    """The path of osculating ellipses of a curve.

    Built-in curves are differentiated in closed form (jets up to order 4).
    Sampled curves give gamma at their nodes, differentiated by central
    differences.
    """

    def __init__(self, curve: CurveSpec):
        self.curve = curve
        self.sampled = curve.kind == "sampled"
        if self.sampled:
            lo, hi = curve.valid_window(2)
            nodes = curve.grid
            nodes = nodes[(nodes >= lo - 1e-9) & (nodes <= hi + 1e-9)]
            self._nodes = SampledPath(osculating_matrix(curve, nodes), nodes[0], nodes[-1])
            self.t_min, self.t_max = self._nodes.t_min, self._nodes.t_max
        else:
            self.t_min, self.t_max = curve.t_min, curve.t_max

    def margin(self) -> float:
        return self._nodes.margin() if self.sampled else 0.0

    def derivative(self, t, order: int):
        if self.sampled:
            return self._nodes.derivative(t, order)
        t = self._check(t, order)
        d = self.curve.derivatives(t, order + 2)
        a, b, ap, a2 = _frame_coefficients(d)
        if np.any(a >= 0):
            raise CurveError("curve is not 0-convex here (a >= 0)")
        q = (-1.0 / a)[..., None, None]
        if order == 0:
            return outer(d[0]) + q * outer(d[1])
        dq = (ap / a**2)[..., None, None]
        if order == 1:
            return _sym_outer(d[0], d[1]) + q * _sym_outer(d[1], d[2]) + dq * outer(d[1])
        d2q = (a2 / a**2 - 2 * ap**2 / a**3)[..., None, None]
        return (
            2 * outer(d[1])
            + _sym_outer(d[0], d[2])
            + q * (_sym_outer(d[1], d[3]) + 2 * outer(d[2]))
            + 2 * dq * _sym_outer(d[1], d[2])
            + d2q * outer(d[1])
        )


def osculating_path(curve: CurveSpec, grid=None) -> OsculatingPath:
    path = OsculatingPath(curve)
    if grid is not None:
        path._check(grid, 0)
    return path


@dataclass
class OsculationReport:
    t: np.ndarray
    residuals: np.ndarray
    accel_norms: np.ndarray
    labels: list
    vertex_flags: np.ndarray
    max_residual: float = field(init=False)

    def __post_init__(self):
        self.max_residual = float(np.max(self.residuals)) if len(self.residuals) else 0.0

    def to_dict(self) -> dict:
        return {
            "max_nullity_residual": self.max_residual,
            "points": [
                {
                    "t": float(t),
                    "nullity_residual": float(r),
                    "accel_norm": float(n),
                    "orientation": lab,
                    "vertex": bool(v),
                }
                for t, r, n, lab, v in zip(
                    self.t, self.residuals, self.accel_norms, self.labels, self.vertex_flags
                )
            ],
        }


def nullity_report(path: MatrixPath, grid, vertex_tol: float = VERTEX_TOL) -> OsculationReport:
    grid = np.asarray(grid, dtype=float)
    G = path.value(grid)
    G1 = path.derivative(grid, 1)
    G2 = path.derivative(grid, 2)
    residuals = np.zeros(len(grid))
    labels = []
    for k in range(len(grid)):
        if is_stationary(G1[k], G[k]):
            labels.append("degenerate-null")
            continue
        residuals[k] = nullity_residual(G1[k])
        labels.append(str(causal_class(TangentVec(G[k], G1[k]))))
    accel = invariant_norm(G, G2)
    return OsculationReport(
        t=grid,
        residuals=residuals,
        accel_norms=accel,
        labels=labels,
        vertex_flags=np.sqrt(np.abs(accel)) <= vertex_tol,
    )


def accel_norm(path: MatrixPath, t, null_tol: float = 1e-6):
    """-det(gamma^-1 gamma''), the invariant norm of the acceleration of a null path."""
    t = np.asarray(t, dtype=float)
    A = path.value(t)
    X = path.derivative(t, 1)
    Y = path.derivative(t, 2)
    pairs = zip(X.reshape(-1, 2, 2), A.reshape(-1, 2, 2))
    worst = max((nullity_residual(x) for x, a in pairs if not is_stationary(x, a)), default=0.0)
    if worst > null_tol:
        raise NullityError(f"nullity violated: residual {worst:.3e} > {null_tol:.1e}")
    n = invariant_norm(A, Y)
    return float(n) if np.ndim(n) == 0 else n


def _fourth_root(values, tol):
    values = np.asarray(values, dtype=float)
    scale = np.max(np.abs(values), initial=1.0)
    if np.any(values < -tol * scale):
        raise AccelerationSignError(
            f"acceleration norm negative ({values.min():.3e}); numerical failure"
        )
    return np.clip(values, 0.0, None) ** 0.25


def arc_element_density(curve: CurveSpec, t, null_tol: float = 1e-6, clamp_tol: float = 1e-9):
    """accel_norm(osculating path)^(1/4) in the curve's own parametrization."""
    path = OsculatingPath(curve)
    r = _fourth_root(accel_norm(path, t, null_tol), clamp_tol)
    return float(r) if np.ndim(r) == 0 else r


def _simpson(values, h):
    return h / 3 * (values[0] + values[-1] + 4 * values[1:-1:2].sum() + 2 * values[2:-1:2].sum())


@dataclass
class LengthResult:
    length: float
    t: np.ndarray
    density: np.ndarray
    vertex_flags: np.ndarray
    converged: bool
    warnings: list


def length_details(
    curve: CurveSpec,
    window: tuple[float, float],
    tol: float = 1e-7,
    n0: int = 64,
    max_n: int = 1 << 16,
    null_tol: float = 1e-6,
) -> LengthResult:
    """Composite Simpson quadrature of the density, refined by halving until two rules agree to tol."""
    lo, hi = map(float, window)
    if not lo < hi:
        raise ValueError("empty length window")
    path = OsculatingPath(curve)
    notes = []

    def density(ts):
        return _fourth_root(accel_norm(path, ts, null_tol), 1e-9)

    if curve.kind == "sampled":
        h = curve.h
        i0 = int(round((lo - curve.t_min) / h))
        i1 = int(round((hi - curve.t_min) / h))
        if (i1 - i0) % 2:
            i1 -= 1
        if i1 - i0 < 4:
            raise ValueError("window too short for the sample spacing")
        ts = curve.t_min + h * np.arange(i0, i1 + 1)
        dens = density(ts)
        fine = _simpson(dens, h)
        coarse = _simpson(dens[::2], 2 * h) if (i1 - i0) % 4 == 0 else None
        if coarse is None:
            # Odd number of coarse panels; compare against the trimmed fine rule.
            coarse = _simpson(dens[:-2:2], 2 * h) + _simpson(dens[-3:], h)
        converged = abs(fine - coarse) <= tol * max(1.0, abs(fine))
        value = fine
    else:
        n = n0
        ts = np.linspace(lo, hi, n + 1)
        dens = density(ts)
        value = _simpson(dens, (hi - lo) / n)
        converged = False
        while n < max_n:
            n *= 2
            ts = np.linspace(lo, hi, n + 1)
            dens = density(ts)
            finer = _simpson(dens, (hi - lo) / n)
            done = abs(finer - value) <= tol * max(1.0, abs(finer))
            value = finer
            if done:
                converged = True
                break
    if not converged:
        notes.append("quadrature did not reach the requested tolerance")
    flags = np.abs(centro_affine_curvature(curve, ts)) <= VERTEX_TOL
    if np.any(flags):
        notes.append("vertex-crossing")
    for note in notes:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    return LengthResult(float(value), ts, dens, flags, converged, notes)


def centro_affine_length(curve: CurveSpec, window, **kwargs) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return length_details(curve, window, **kwargs).length


def lemma5_parametrize(A, v, w, tol: float = 1e-9):
    """Counterclockwise parametrization of E_A through Av and its curvature there.

    Needs v ^ w > 0, <Av, v> = 1 and <Av, w> = 0. Returns ``(eps, kappa0)``
    where eps(s) = cos s A v + sin s A w / L with L = sqrt(<Aw, w>) and
    kappa0 = (v ^ w) / ((v ^ Aw) |v|).
    """
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if not wedge(v, w) > 0:
        raise EllipseFrameError("need v ^ w > 0")
    if abs(v @ A @ v - 1) > tol:
        raise EllipseFrameError("need <Av, v> = 1")
    if abs(v @ A @ w) > tol * max(1.0, np.linalg.norm(A @ v) * np.linalg.norm(w)):
        raise EllipseFrameError("need <Av, w> = 0")
    L = math.sqrt(w @ A @ w)
    Av, Aw = A @ v, A @ w

    def eps(s):
        s = np.asarray(s, dtype=float)
        return np.cos(s)[..., None] * Av + (np.sin(s) / L)[..., None] * Aw

    return eps, float(ellipse_frame_curvature(A, v, w))


def ellipse_frame_curvature(A, v, w):
    """(v ^ w) / ((v ^ A w) |v|), without validating the hypotheses. Broadcasts."""
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    Aw = np.einsum("...ij,...j->...i", A, np.asarray(w, dtype=float))
    return wedge(v, w) / (wedge(v, Aw) * np.linalg.norm(v, axis=-1))


def ellipse_curvature_at(A, z) -> float:
    """Curvature of E_A at its point z, for the counterclockwise orientation."""
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    v = np.linalg.solve(A, z)
    _, k = lemma5_parametrize(A, v, rot90(z), tol=1e-7)
    return k


@dataclass(frozen=True)
class OsculationDefects:
    contains: float
    tangent: float
    curvature: float


def osculation_defects(curve: CurveSpec, t: float, A=None) -> OsculationDefects:
    """How far E_A is from osculating the curve at t (A defaults to the osculating matrix)."""
    if A is None:
        A = osculating_matrix(curve, t)
    A = np.asarray(A, dtype=float)
    d = curve.derivatives(float(t), 1)
    z, dz = d[0], d[1]
    signed = ellipse_contains(CenteredEllipse(A), z)
    contains = abs(signed)
    # Counterclockwise tangent of E_A at z is rot90 of the normal A^-1 z.
    tangent = rot90(np.linalg.solve(A, z))
    sin_angle = wedge(tangent, dz) / (np.linalg.norm(tangent) * np.linalg.norm(dz))
    tangent_defect = abs(sin_angle) if tangent @ dz > 0 else 1.0 + abs(sin_angle)
    k_curve = euclidean_curvature(curve, t)
    # Off the ellipse, compare against its point on the same ray.
    k_ell = ellipse_curvature_at(A, z / math.sqrt(1.0 + signed))
    return OsculationDefects(
        float(contains), float(tangent_defect), abs(k_ell - k_curve) / max(1.0, abs(k_curve))
    )

