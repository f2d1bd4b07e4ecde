"""Randomized property suite behind ``centroaffine check``.

Each property takes a numpy Generator and returns (passed, detail). Results
depend on the seed only through the random draws; every property must pass
for any seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import curves, ellipses, osculation, reconstruction
from .curves import BuiltinCurve
from .linalg import det_sym, inverse_spd, spd_sqrt, wedge
from .paths import FunctionPath, ReversedPath, TransformedPath


def random_gl_plus(rng, spread: float = 0.5) -> np.ndarray:
    """Random 2x2 matrix with det > 0, kept away from singular."""
    while True:
        g = np.eye(2) + spread * rng.standard_normal((2, 2))
        if np.linalg.det(g) > 0.2:
            return g


def random_spd(rng) -> np.ndarray:
    g = random_gl_plus(rng, 0.8)
    return g @ g.T


def random_sym(rng) -> np.ndarray:
    x = rng.standard_normal(3)
    return np.array([[x[0], x[1]], [x[1], x[2]]])


def random_generic_curve(rng, window_len: float = 1.0, min_kappa: float = 0.05):
    """A random 0-convex member of the generic family and a window where |kappa| >= min_kappa."""
    for _ in range(200):
        params = {
            "p": rng.uniform(0.8, 1.5),
            "r": rng.uniform(0.8, 1.5),
            "q": rng.uniform(-0.12, 0.12),
            "s": rng.uniform(-0.12, 0.12),
            "k": float(rng.integers(2, 4)),
        }
        curve = BuiltinCurve("generic", params)
        ts = np.linspace(-math.pi, math.pi, 721)
        if not curves.check_zero_convex(curve, ts).ok:
            continue
        kappa = curves.centro_affine_curvature(curve, ts)
        good = np.abs(kappa) >= min_kappa
        step = ts[1] - ts[0]
        need = int(math.ceil(window_len / step)) + 1
        run = 0
        for i, ok in enumerate(good):
            run = run + 1 if ok else 0
            if run >= need:
                hi = ts[i]
                return curve, (hi - window_len, hi)
    raise RuntimeError("could not draw a generic curve with a vertex-free window")


def random_null_path(rng, t_range=(-0.5, 0.5)):
    """Osculating path of a randomly transformed spiral or generic curve (null by construction)."""
    g = random_gl_plus(rng)
    if rng.random() < 0.5:
        c = float(rng.choice([-1, 1]) * rng.uniform(0.1, 1.0))
        curve = BuiltinCurve("spiral", {"c": c})
        window = t_range
    else:
        curve, window = random_generic_curve(rng)
    return TransformedPath(osculation.OsculatingPath(curve), g), window


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def prop_linalg(rng):
    worst = 0.0
    for _ in range(100):
        A = random_spd(rng)
        R = spd_sqrt(A)
        worst = max(worst, np.max(np.abs(R @ R - A)) / np.max(np.abs(A)))
        worst = max(worst, np.max(np.abs(inverse_spd(R) - spd_sqrt(inverse_spd(A)))))
        g, X = random_gl_plus(rng), random_sym(rng)
        lhs, rhs = det_sym(g @ X @ g.T), np.linalg.det(g) ** 2 * det_sym(X)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        u, v, w = rng.standard_normal((3, 2))
        worst = max(worst, abs(wedge(u, v) + wedge(v, u)))
        worst = max(worst, abs(wedge(u + 2 * w, v) - wedge(u, v) - 2 * wedge(w, v)))
    return worst <= 1e-10, f"max residual {worst:.2e}"


def prop_curvature_oracle(rng):
    curve, (lo, hi) = random_generic_curve(rng)
    sr = curves.standard_reparam(curve, 0.5 * (lo + hi), (-0.3, 0.3), 0.005)
    s = sr.s[10:-10]
    oracle = curves.standard_form_curvature(sr.curve, s)
    direct = curves.centro_affine_curvature(curve, sr.t[10:-10])
    err = float(np.max(np.abs(oracle - direct) / np.maximum(1.0, np.abs(direct))))
    return err <= 1e-6, f"direct vs reparametrization oracle {err:.2e}"


def prop_equivariance(rng):
    curve, (lo, hi) = random_generic_curve(rng)
    ts = np.linspace(lo, hi, 21)
    base = curves.centro_affine_curvature(curve, ts)
    worst = 0.0
    for _ in range(5):
        moved = curves.centro_affine_curvature(curve.transformed(random_gl_plus(rng)), ts)
        worst = max(worst, float(np.max(np.abs(moved - base) / np.maximum(1.0, np.abs(base)))))
    return worst <= 1e-6, f"max relative change {worst:.2e}"


def prop_nullity(rng):
    worst = 0.0
    for _ in range(3):
        path, (lo, hi) = random_null_path(rng)
        rep = osculation.nullity_report(path, np.linspace(lo, hi, 41))
        worst = max(worst, rep.max_residual)
    return worst <= 1e-8, f"max nullity residual {worst:.2e}"


def prop_orientation(rng):
    mismatches = 0
    for sign in (1, -1):
        c = sign * float(rng.uniform(0.1, 1.0))
        curve = BuiltinCurve("spiral", {"c": c}).transformed(random_gl_plus(rng))
        ts = np.linspace(-1, 1, 21)
        rep = osculation.nullity_report(osculation.OsculatingPath(curve), ts)
        kappa = curves.centro_affine_curvature(curve, ts)
        for k, label in zip(kappa, rep.labels):
            want = "future" if k > 0 else "past"
            mismatches += not label.endswith(want)
    return mismatches == 0, f"{mismatches} orientation mismatches"


def prop_accel_routes(rng):
    worst = 0.0
    for _ in range(4):
        path, (lo, hi) = random_null_path(rng)
        t = float(rng.uniform(lo, hi))
        worst = max(worst, ellipses.invariant_accel_norm(path, t).relative_gap)
    control = _non_null_control(rng)
    gap = ellipses.invariant_accel_norm(control, 0.0).relative_gap
    ok = worst <= 1e-6 and gap > 1e-2
    return ok, f"null paths gap {worst:.2e}; non-null control gap {gap:.2e}"


def _non_null_control(rng):
    A0 = random_spd(rng)
    X = random_sym(rng)
    while abs(det_sym(X)) < 0.3 * np.max(np.abs(X)) ** 2:
        X = random_sym(rng)
    Y = random_sym(rng)
    return FunctionPath(
        lambda t: A0 + np.multiply.outer(t, X) + np.multiply.outer(t * t, Y),
        -0.1,
        0.1,
        d1=lambda t: X + 2 * np.multiply.outer(t, Y),
        d2=lambda t: Y + 0 * np.multiply.outer(t, Y),
    )


def prop_split(rng):
    worst = 0.0
    for _ in range(200):
        v = ellipses.TangentVec(random_spd(rng), random_sym(rng))
        h, xd = ellipses.warped_norm_split(v)
        n = ellipses.invariant_norm(v)
        worst = max(worst, abs(n - (h - xd**2)) / max(1.0, abs(n)))
    return worst <= 1e-10, f"max split residual {worst:.2e}"


def prop_length_invariance(rng):
    c = float(rng.uniform(0.1, 1.0))
    curve = BuiltinCurve("spiral", {"c": c})
    window = (0.0, 1.0 / math.sqrt(1 + c * c))
    base = osculation.centro_affine_length(curve, window)
    anchor = math.sqrt(4 * c / math.sqrt(1 + c * c))
    worst = abs(base - anchor) / anchor
    for _ in range(5):
        moved = osculation.centro_affine_length(curve.transformed(random_gl_plus(rng)), window)
        worst = max(worst, abs(moved - base) / base)
    return worst <= 1e-5, f"max relative deviation {worst:.2e}"


def prop_roundtrip(rng):
    worst = 0.0
    for reverse in (False, True):
        c = float(rng.choice([-1, 1]) * rng.uniform(0.1, 1.0))
        curve = BuiltinCurve("spiral", {"c": c})
        g = random_gl_plus(rng)
        moved = curve.transformed(g)
        path = osculation.OsculatingPath(moved)
        grid = np.linspace(-0.5, 0.5, 101)
        if reverse:
            path = ReversedPath(path)
        res = reconstruction.reconstruct(path, grid, anchor=moved(-grid[-1] if reverse else grid[0]))
        if res.time_reversed != reverse:
            return False, "time reversal not detected correctly"
        worst = max(worst, float(np.max(np.abs(res.curve.samples - moved(res.t)))))
    return worst <= 1e-5, f"max pointwise error {worst:.2e}"


def prop_ellipse_curvature(rng):
    worst = 0.0
    for _ in range(20):
        A, v, w = random_ellipse_frame(rng)
        eps, k0 = osculation.lemma5_parametrize(A, v, w)
        worst = max(worst, abs(k0 - fd_curvature(eps, 0.0)) / max(1.0, abs(k0)))
    return worst <= 1e-8, f"max curvature mismatch {worst:.2e}"


def random_ellipse_frame(rng):
    A = random_spd(rng)
    v = rng.standard_normal(2)
    v /= math.sqrt(v @ A @ v)
    w = np.array([-(A @ v)[1], (A @ v)[0]]) * rng.uniform(0.3, 3.0)
    return A, v, w


def fd_curvature(fn, s: float, h: float = 1e-3) -> float:
    """Curvature of a parametrized plane curve by fourth-order central differences."""
    pts = fn(s + h * np.arange(-2, 3))
    d1 = curves.D1_WEIGHTS @ pts / h
    d2 = curves.D2_WEIGHTS @ pts / h**2
    return float(wedge(d1, d2) / np.linalg.norm(d1) ** 3)


def prop_ellipse_anchor(rng):
    a, b = rng.uniform(0.5, 3.0, 2)
    curve = BuiltinCurve("ellipse", {"a": a, "b": b, "angle": rng.uniform(0, math.pi)})
    ts = np.linspace(-1, 1, 11)
    kappa = np.max(np.abs(curves.centro_affine_curvature(curve, ts)))
    path = osculation.OsculatingPath(curve)
    drift = np.max(np.abs(path.value(ts) - path.value(ts[:1])))
    length = osculation.centro_affine_length(curve, (-1, 1))
    ok = kappa <= 1e-10 and drift <= 1e-10 and length <= 1e-8
    return ok, f"max|kappa| {kappa:.1e}, path drift {drift:.1e}, length {length:.1e}"


def prop_causal_invariance(rng):
    changed = 0
    for _ in range(50):
        v = ellipses.TangentVec(random_spd(rng), random_sym(rng))
        g = random_gl_plus(rng)
        if ellipses.causal_class(v) != ellipses.causal_class(ellipses.group_act_tangent(g, v)):
            changed += 1
    return changed == 0, f"{changed} classes changed under the group action"


PROPERTIES = {
    "linalg": prop_linalg,
    "curvature-oracle": prop_curvature_oracle,
    "equivariance": prop_equivariance,
    "nullity": prop_nullity,
    "orientation": prop_orientation,
    "lemma2": prop_accel_routes,
    "split": prop_split,
    "length": prop_length_invariance,
    "roundtrip": prop_roundtrip,
    "ellipse-curvature": prop_ellipse_curvature,
    "ellipse": prop_ellipse_anchor,
    "causal": prop_causal_invariance,
}


def run_checks(seed: int = 0, only=None) -> list[PropertyResult]:
    names = list(PROPERTIES) if not only else list(only)
    unknown = [n for n in names if n not in PROPERTIES]
    if unknown:
        raise KeyError(f"unknown properties: {unknown}")
    results = []
    for name in names:
        rng = np.random.default_rng([seed, list(PROPERTIES).index(name)])
        try:
            passed, detail = PROPERTIES[name](rng)
        except Exception as exc:  # a crash is a failed property, not a crashed run
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(PropertyResult(name, bool(passed), detail))
    return results
