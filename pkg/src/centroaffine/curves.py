"""Plane curves, their jets, 0-convexity and centro-affine curvature.

A curve is either a built-in analytic family (exact derivatives of any
order) or a list of samples on a uniform parameter grid (derivatives by
fourth-order central differences, endpoints excluded).

Given any parametrization beta of a 0-convex curve, beta'' = a beta + b beta'
with a < 0. The standard centro-affine reparametrization t(s) solves
t'(s) = 1 / sqrt(-a(t)), and in it alpha'' = -alpha + kappa/2 alpha'.
Eliminating t' and t'' gives, in the original parameter,

    kappa = (2 b (-a) + a') / (-a)^(3/2)

which is what :func:`centro_affine_curvature` evaluates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .linalg import rot90, wedge

# Central difference weights, fourth order in h. Offsets run -m..m.
D1_WEIGHTS = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2_WEIGHTS = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
D3_WEIGHTS = np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0

MIN_SAMPLES = 9


class CurveError(ValueError):
    """Base class for errors raised by curve evaluation."""


class ParameterRangeError(CurveError):
    pass


class StencilError(CurveError):
    pass


class DegenerateFrameError(CurveError):
    pass


class ConvexityError(CurveError):
    pass


def central_difference(values, h: float, order: int):
    """Fourth-order central derivative of ``values`` along axis 0.

    Returns an array two (orders 1, 2) or three (order 3) entries shorter at
    each end.
    """
    values = np.asarray(values, dtype=float)
    weights = {1: D1_WEIGHTS, 2: D2_WEIGHTS, 3: D3_WEIGHTS}[order]
    m = len(weights) // 2
    n = values.shape[0]
    if n < 2 * m + 1:
        raise StencilError("insufficient samples for stencil")
    out = np.zeros((n - 2 * m,) + values.shape[1:])
    for k, w in enumerate(weights):
        if w:
            out += w * values[k : n - 2 * m + k]
    return out / h**order


@dataclass(frozen=True)
class Jet:
    """Position and derivatives of a curve at one parameter value."""

    t: float
    p: np.ndarray
    d1: np.ndarray
    d2: np.ndarray | None = None
    d3: np.ndarray | None = None


class CurveSpec:
    """A plane curve on the parameter interval [t_min, t_max]."""

    kind: str
    t_min: float
    t_max: float

    # Number of parameter steps lost at each end for derivative ``order``.
    def margin(self, order: int) -> float:
        return 0.0

    def valid_window(self, order: int = 2) -> tuple[float, float]:
        m = self.margin(order)
        return self.t_min + m, self.t_max - m

    def derivatives(self, t, order: int) -> np.ndarray:
        """Array of shape (order + 1, *shape(t), 2)."""
        raise NotImplementedError

    def __call__(self, t) -> np.ndarray:
        return self.derivatives(t, 0)[0]

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def transformed(self, g) -> "CurveSpec":
        return TransformedCurve(self, np.asarray(g, dtype=float))

    def _check_range(self, t, order: int):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min - 1e-12) or np.any(t > self.t_max + 1e-12):
            raise ParameterRangeError(
                f"parameter out of range [{self.t_min}, {self.t_max}]"
            )
        lo, hi = self.valid_window(order)
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise StencilError(
                f"insufficient samples for stencil of order {order} near the ends"
            )
        return t


def _derivative_phases(t, order):
    """cos(t + n pi/2) and sin(t + n pi/2) for n = 0..order, stacked."""
    c, s = np.cos(t), np.sin(t)
    cs = [(c, s), (-s, c), (-c, -s), (s, -c)]
    return [cs[n % 4] for n in range(order + 1)]


@dataclass(frozen=True)
class BuiltinCurve(CurveSpec):
    family: str
    params: dict = field(default_factory=dict)
    t_min: float = -math.pi
    t_max: float = math.pi
    kind: str = field(default="builtin", init=False)

    FAMILIES = ("ellipse", "spiral", "generic")
    DEFAULTS = {
        "ellipse": {"a": 1.0, "b": 1.0, "angle": 0.0, "phase": 0.0},
        "spiral": {"c": 0.2},
        "generic": {"p": 1.0, "q": 0.1, "r": 1.0, "s": 0.05, "k": 2.0},
    }

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise CurveError(f"unknown curve family {self.family!r}")
        unknown = set(self.params) - set(self.DEFAULTS[self.family])
        if unknown:
            raise CurveError(f"unknown parameters for {self.family}: {sorted(unknown)}")
        merged = {**self.DEFAULTS[self.family], **{k: float(v) for k, v in self.params.items()}}
        object.__setattr__(self, "params", merged)
        if self.family == "ellipse" and (merged["a"] <= 0 or merged["b"] <= 0):
            raise CurveError("ellipse semi-axes must be positive")
        if not self.t_min < self.t_max:
            raise CurveError("empty parameter range")

    def derivatives(self, t, order: int) -> np.ndarray:
        t = self._check_range(t, order)
        P = self.params
        out = np.empty((order + 1,) + t.shape + (2,))
        if self.family == "ellipse":
            u = np.array([math.cos(P["angle"]), math.sin(P["angle"])])
            iu = rot90(u)
            for n, (c, s) in enumerate(_derivative_phases(t + P["phase"], order)):
                out[n] = (P["a"] * c)[..., None] * u + (P["b"] * s)[..., None] * iu
        elif self.family == "spiral":
            rate = complex(P["c"], 1.0)
            z = np.exp(rate * t)
            for n in range(order + 1):
                w = rate**n * z
                out[n, ..., 0] = w.real
                out[n, ..., 1] = w.imag
        else:
            k = P["k"]
            slow = _derivative_phases(t, order)
            fast = _derivative_phases(k * t, order)
            for n in range(order + 1):
                kn = k**n
                out[n, ..., 0] = P["p"] * slow[n][0] + P["q"] * kn * fast[n][0]
                out[n, ..., 1] = P["r"] * slow[n][1] + P["s"] * kn * fast[n][1]
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "builtin",
            "family": self.family,
            "params": dict(self.params),
            "t_min": self.t_min,
            "t_max": self.t_max,
        }


class SampledCurve(CurveSpec):
    """Curve given by samples on the uniform grid t_min + i h."""

    kind = "sampled"
    # Nodes lost at each end per derivative order; order 4 stands for a'.
    NODE_MARGIN = {0: 0, 1: 2, 2: 2, 3: 3, 4: 4}

    def __init__(self, samples, t_min: float, t_max: float):
        samples = np.array(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 2:
            raise CurveError("samples must be a list of [x, y] pairs")
        if len(samples) < MIN_SAMPLES:
            raise CurveError(f"need at least {MIN_SAMPLES} samples, got {len(samples)}")
        if not np.all(np.isfinite(samples)):
            raise CurveError("samples must be finite")
        if not t_min < t_max:
            raise CurveError("empty parameter range")
        self.samples = samples
        self.samples.flags.writeable = False
        self.t_min = float(t_min)
        self.t_max = float(t_max)
        self.h = (self.t_max - self.t_min) / (len(samples) - 1)

    def __repr__(self):
        return f"SampledCurve(n={len(self.samples)}, t=[{self.t_min}, {self.t_max}])"

    @property
    def grid(self) -> np.ndarray:
        return self.t_min + self.h * np.arange(len(self.samples))

    def margin(self, order: int) -> float:
        return self.NODE_MARGIN[order] * self.h

    def node_index(self, t):
        t = np.asarray(t, dtype=float)
        x = (t - self.t_min) / self.h
        i = np.rint(x)
        if np.any(np.abs(x - i) > 1e-6):
            raise ParameterRangeError("parameter is not a node of the sample grid")
        return i.astype(int)

    def derivatives(self, t, order: int) -> np.ndarray:
        if order > 3:
            raise CurveError("sampled curves provide derivatives up to order 3")
        t = self._check_range(t, order)
        i = self.node_index(t)
        out = np.empty((order + 1,) + t.shape + (2,))
        out[0] = self.samples[i]
        weights = [None, D1_WEIGHTS, D2_WEIGHTS, D3_WEIGHTS]
        for n in range(1, order + 1):
            w = weights[n]
            m = len(w) // 2
            acc = np.zeros(t.shape + (2,))
            for k, wk in enumerate(w):
                if wk:
                    acc += wk * self.samples[i + k - m]
            out[n] = acc / self.h**n
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "sampled",
            "samples": self.samples.tolist(),
            "t_min": self.t_min,
            "t_max": self.t_max,
        }


class TransformedCurve(CurveSpec):
    """The curve g . beta for a linear map g with det g > 0."""

    def __init__(self, base: CurveSpec, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (2, 2) or not np.linalg.det(g) > 0:
            raise CurveError("transform must be a 2x2 matrix with positive determinant")
        self.base = base
        self.g = g
        self.kind = base.kind
        self.t_min = base.t_min
        self.t_max = base.t_max

    def margin(self, order: int) -> float:
        return self.base.margin(order)

    def __getattr__(self, name):
        # Sampled-grid helpers (grid, h, node_index) come from the base curve.
        if name in ("grid", "h", "node_index"):
            return getattr(self.base, name)
        raise AttributeError(name)

    def derivatives(self, t, order: int) -> np.ndarray:
        return self.base.derivatives(t, order) @ self.g.T

    def to_dict(self) -> dict:
        if isinstance(self.base, SampledCurve):
            return SampledCurve(self.base.samples @ self.g.T, self.t_min, self.t_max).to_dict()
        return {"kind": "transformed", "g": self.g.tolist(), "base": self.base.to_dict()}


def curve_from_dict(doc: dict) -> CurveSpec:
    kind = doc.get("kind")
    if kind == "builtin":
        kwargs = {k: float(doc[k]) for k in ("t_min", "t_max") if k in doc}
        return BuiltinCurve(doc["family"], dict(doc.get("params", {})), **kwargs)
    if kind == "sampled":
        return SampledCurve(doc["samples"], doc["t_min"], doc["t_max"])
    if kind == "transformed":
        return TransformedCurve(curve_from_dict(doc["base"]), doc["g"])
    raise CurveError(f"unknown curve kind {kind!r}")


def curve_from_json(text: str) -> CurveSpec:
    return curve_from_dict(json.loads(text))


def evaluate_jet(curve: CurveSpec, t: float, order: int = 3) -> Jet:
    if order not in (1, 2, 3):
        raise CurveError("jet order must be 1, 2 or 3")
    d = curve.derivatives(float(t), order)
    return Jet(float(t), *d, *([None] * (3 - order)))


@dataclass(frozen=True)
class ConvexityReport:
    ok: bool
    min_position_wedge: float
    min_velocity_wedge: float
    offending: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "min_wedge_p_d1": self.min_position_wedge,
            "min_wedge_d1_d2": self.min_velocity_wedge,
            "offending_t": list(self.offending),
        }


def check_zero_convex(curve: CurveSpec, grid, margin: float = 0.0) -> ConvexityReport:
    grid = np.asarray(grid, dtype=float)
    d = curve.derivatives(grid, 2)
    w01 = wedge(d[0], d[1])
    w12 = wedge(d[1], d[2])
    bad = (w01 <= margin) | (w12 <= margin)
    return ConvexityReport(
        ok=not bool(np.any(bad)),
        min_position_wedge=float(np.min(w01)),
        min_velocity_wedge=float(np.min(w12)),
        offending=[float(x) for x in grid[bad]],
    )


def decompose(jet: Jet, tol: float = 1e-12) -> tuple[float, float]:
    """Coefficients (a, b) with d2 = a p + b d1."""
    w = float(wedge(jet.p, jet.d1))
    if abs(w) <= tol * np.linalg.norm(jet.p) * np.linalg.norm(jet.d1):
        raise DegenerateFrameError("degenerate frame: position and velocity are parallel")
    return float(wedge(jet.d2, jet.d1)) / w, float(wedge(jet.p, jet.d2)) / w


@dataclass(frozen=True)
class Decomposition:
    """Arrays of a, b, a' (and a'' when available) on a parameter grid."""

    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    a_prime: np.ndarray
    a_second: np.ndarray | None = None


def _frame_coefficients(d):
    """a, b, a', a'' from a stack of derivatives d[0..order] (order >= 2)."""
    W = wedge(d[0], d[1])
    if np.any(np.abs(W) <= 1e-12 * np.linalg.norm(d[0], axis=-1) * np.linalg.norm(d[1], axis=-1)):
        raise DegenerateFrameError("degenerate frame: position and velocity are parallel")
    N = wedge(d[2], d[1])
    a = N / W
    b = wedge(d[0], d[2]) / W
    ap = a2 = None
    if len(d) > 3:
        # N = a W differentiated once and twice.
        W1 = wedge(d[0], d[2])
        N1 = wedge(d[3], d[1])
        ap = (N1 - a * W1) / W
        if len(d) > 4:
            W2 = wedge(d[1], d[2]) + wedge(d[0], d[3])
            N2 = wedge(d[4], d[1]) + wedge(d[3], d[2])
            a2 = (N2 - 2 * ap * W1 - a * W2) / W
    return a, b, ap, a2


def decomposition(curve: CurveSpec, t, with_second: bool = False) -> Decomposition:
    """a, b and a' along the curve.

    Built-ins differentiate a in closed form. Sampled curves apply the
    central stencil to the node values of a.
    """
    t = np.asarray(t, dtype=float)
    if _is_sampled(curve):
        if with_second:
            raise CurveError("a'' is only available for built-in curves")
        t = curve._check_range(t, 4)
        h = curve.h
        offsets = np.arange(-2, 3) * h
        d = curve.derivatives(t[..., None] + offsets, 2)
        a, b, _, _ = _frame_coefficients(d)
        ap = np.tensordot(a, D1_WEIGHTS, axes=([-1], [0])) / h
        return Decomposition(t, a[..., 2], b[..., 2], ap)
    d = curve.derivatives(t, 4 if with_second else 3)
    a, b, ap, a2 = _frame_coefficients(d)
    return Decomposition(t, a, b, ap, a2)


def _is_sampled(curve: CurveSpec) -> bool:
    return curve.kind == "sampled"


def curvature_from_decomposition(dec: Decomposition):
    neg = -dec.a
    if np.any(neg <= 0):
        raise ConvexityError("curve is not 0-convex here (a >= 0)")
    return (2 * dec.b * neg + dec.a_prime) / neg**1.5


def centro_affine_curvature(curve: CurveSpec, t):
    k = curvature_from_decomposition(decomposition(curve, t))
    return float(k) if np.ndim(k) == 0 else k


def euclidean_curvature(curve: CurveSpec, t):
    d = curve.derivatives(np.asarray(t, dtype=float), 2)
    k = wedge(d[1], d[2]) / np.linalg.norm(d[1], axis=-1) ** 3
    return float(k) if np.ndim(k) == 0 else k


def a_coefficient(curve: CurveSpec):
    """Callable t -> a(t), valid between the nodes of sampled curves too."""
    if _is_sampled(curve):
        lo, hi = curve.valid_window(2)
        nodes = curve.grid
        nodes = nodes[(nodes >= lo - 1e-12) & (nodes <= hi + 1e-12)]
        d = curve.derivatives(nodes, 2)
        spline = CubicSpline(nodes, _frame_coefficients(d)[0])
        return lambda t: spline(t)[()]

    def a_of(t):
        a = _frame_coefficients(curve.derivatives(t, 2))[0]
        return a[()] if np.ndim(a) == 0 else a

    return a_of


@dataclass(frozen=True)
class StandardReparam:
    """Standard centro-affine reparametrization alpha(s) = beta(t(s))."""

    s: np.ndarray
    t: np.ndarray
    dt_ds: np.ndarray
    curve: SampledCurve
    substeps: int

    def t_of_s(self, s):
        return CubicHermiteSpline(self.s, self.t, self.dt_ds)(s)


def _rk4(rhs, t0, ds, nsteps, substeps):
    h = ds / substeps
    ts = np.empty(nsteps + 1)
    ts[0] = t = t0
    for k in range(nsteps):
        for _ in range(substeps):
            k1 = rhs(t)
            k2 = rhs(t + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h * k2)
            k4 = rhs(t + h * k3)
            t = t + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        ts[k + 1] = t
    return ts


def standard_reparam(
    curve: CurveSpec,
    t0: float,
    s_range: tuple[float, float],
    ds: float,
    tol: float = 1e-9,
    max_halvings: int = 12,
) -> StandardReparam:
    """Integrate dt/ds = 1/sqrt(-a(t)) from t(0) = t0 with classical RK4.

    The grid is s = k ds covering ``s_range`` (which must contain 0). Each
    step is refined by halving until two consecutive refinements agree to
    ``tol``.
    """
    s_lo, s_hi = s_range
    if not s_lo <= 0 <= s_hi or ds <= 0:
        raise CurveError("s_range must contain 0 and ds must be positive")
    n_back = int(round(-s_lo / ds))
    n_fwd = int(round(s_hi / ds))
    lo, hi = curve.valid_window(2)
    a_of = a_coefficient(curve)

    def rhs(t):
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise ParameterRangeError("left parameter range during reparametrization")
        a = a_of(t)
        if not a < 0:
            raise ConvexityError("left 0-convex region (a >= 0)")
        return 1.0 / math.sqrt(-a)

    def solve(substeps):
        fwd = _rk4(rhs, t0, ds, n_fwd, substeps)
        back = _rk4(rhs, t0, -ds, n_back, substeps)
        return np.concatenate([back[:0:-1], fwd])

    substeps = 1
    ts = solve(substeps)
    for _ in range(max_halvings):
        finer = solve(2 * substeps)
        converged = np.max(np.abs(finer - ts)) <= tol
        ts, substeps = finer, 2 * substeps
        if converged:
            break
    else:
        raise CurveError("reparametrization did not converge")

    s = ds * np.arange(-n_back, n_fwd + 1)
    dt_ds = 1.0 / np.sqrt(-np.asarray(a_of(ts)))
    if _is_sampled(curve):
        nodes = curve.grid
        points = np.column_stack(
            [CubicSpline(nodes, curve(nodes)[:, j])(ts) for j in range(2)]
        )
    else:
        points = curve(ts)
    sampled = SampledCurve(points, float(s[0]), float(s[-1]))
    return StandardReparam(s, ts, dt_ds, sampled, substeps)


def standard_form_curvature(curve: CurveSpec, t):
    """kappa read off alpha'' = -alpha + kappa/2 alpha' for a standard parametrization.

    This is the reparametrization oracle: it never uses a, b or a'.
    """
    d = curve.derivatives(np.asarray(t, dtype=float), 2)
    k = 2 * wedge(d[0], d[2]) / wedge(d[0], d[1])
    return float(k) if np.ndim(k) == 0 else k


def standard_form_residual(curve: CurveSpec, t, kappa):
    """|alpha'' + alpha - kappa/2 alpha'| / (1 + |alpha''|)."""
    d = curve.derivatives(np.asarray(t, dtype=float), 2)
    r = d[2] + d[0] - 0.5 * np.asarray(kappa)[..., None] * d[1]
    return np.linalg.norm(r, axis=-1) / (1 + np.linalg.norm(d[2], axis=-1))
