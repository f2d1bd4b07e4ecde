"""Paths t -> gamma(t) in the cone of SPD 2x2 matrices.

Every path exposes ``value(t)`` and ``derivative(t, order)`` for orders 0-2,
vectorized over arrays of t. Closed-form paths differentiate exactly;
sampled paths use the fourth-order central stencils of :mod:`curves`.
"""

from __future__ import annotations

import json

import numpy as np

from .curves import D1_WEIGHTS, D2_WEIGHTS, ParameterRangeError, StencilError
from .linalg import NotPositiveDefiniteError, det_sym, sym


class PathError(ValueError):
    pass


class MatrixPath:
    t_min: float
    t_max: float

    def margin(self) -> float:
        """Parameter distance from each end where order-2 derivatives are available."""
        return 0.0

    def value(self, t):
        return self.derivative(t, 0)

    def derivative(self, t, order: int):
        raise NotImplementedError

    def sample(self, n: int, t_min: float | None = None, t_max: float | None = None):
        lo = self.t_min if t_min is None else t_min
        hi = self.t_max if t_max is None else t_max
        ts = np.linspace(lo, hi, n)
        return SampledPath(self.value(ts), lo, hi)

    def _check(self, t, order: int):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min - 1e-12) or np.any(t > self.t_max + 1e-12):
            raise ParameterRangeError(f"parameter out of range [{self.t_min}, {self.t_max}]")
        if order:
            m = self.margin()
            if np.any(t < self.t_min + m - 1e-12) or np.any(t > self.t_max - m + 1e-12):
                raise StencilError("not differentiable here (too close to the path ends)")
        return t


class FunctionPath(MatrixPath):
    """Path from callables; missing derivatives fall back to central differences with step h."""

    def __init__(self, fn, t_min, t_max, d1=None, d2=None, h: float = 1e-3):
        self.fns = [fn, d1, d2]
        self.t_min, self.t_max = float(t_min), float(t_max)
        self.h = h

    def derivative(self, t, order: int):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_min - 1e-12) or np.any(t > self.t_max + 1e-12):
            raise ParameterRangeError(f"parameter out of range [{self.t_min}, {self.t_max}]")
        f = self.fns[order]
        if f is not None:
            return np.asarray(f(t), dtype=float)
        weights = D1_WEIGHTS if order == 1 else D2_WEIGHTS
        offsets = self.h * np.arange(-2, 3)
        vals = np.asarray(self.fns[0](t[..., None] + offsets), dtype=float)
        return np.tensordot(vals, weights, axes=([t.ndim], [0])) / self.h**order


class SampledPath(MatrixPath):
    """gamma given at the nodes t_min + i h; SPD-ness is checked at every node."""

    def __init__(self, values, t_min: float, t_max: float):
        values = np.array(values, dtype=float)
        if values.ndim != 3 or values.shape[1:] != (2, 2) or len(values) < 9:
            raise PathError("need at least 9 samples of 2x2 matrices")
        values = 0.5 * (values + values.transpose(0, 2, 1))
        bad = np.flatnonzero(~((values[:, 0, 0] > 0) & (det_sym(values) > 0)))
        if len(bad):
            raise NotPositiveDefiniteError(f"sample {bad[0]} is not positive definite")
        self.values = values
        self.t_min, self.t_max = float(t_min), float(t_max)
        self.h = (self.t_max - self.t_min) / (len(values) - 1)

    @property
    def grid(self) -> np.ndarray:
        return self.t_min + self.h * np.arange(len(self.values))

    def margin(self) -> float:
        return 2 * self.h

    def _index(self, t):
        x = (t - self.t_min) / self.h
        i = np.rint(x)
        if np.any(np.abs(x - i) > 1e-6):
            raise ParameterRangeError("parameter is not a node of the sample grid")
        return i.astype(int)

    def derivative(self, t, order: int):
        t = self._check(t, order)
        i = self._index(t)
        if order == 0:
            return self.values[i]
        weights = D1_WEIGHTS if order == 1 else D2_WEIGHTS
        acc = np.zeros(t.shape + (2, 2))
        for k, w in enumerate(weights):
            if w:
                acc += w * self.values[i + k - 2]
        return acc / self.h**order

    def to_records(self) -> list[dict]:
        return [
            {"t": float(t), "a11": m[0][0], "a12": m[0][1], "a22": m[1][1]}
            for t, m in zip(self.grid, self.values.tolist())
        ]

    @classmethod
    def from_records(cls, records) -> "SampledPath":
        if len(records) < 9:
            raise PathError("need at least 9 samples of 2x2 matrices")
        ts = np.array([float(r["t"]) for r in records])
        steps = np.diff(ts)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
            raise PathError("matrix path samples must have a strictly uniform increasing t")
        values = [sym(r["a11"], r["a12"], r["a22"]) for r in records]
        return cls(values, ts[0], ts[-1])

    @classmethod
    def from_json(cls, text: str) -> "SampledPath":
        return cls.from_records(json.loads(text))


class ReversedPath(MatrixPath):
    """t -> gamma(-t)."""

    def __init__(self, base: MatrixPath):
        self.base = base
        self.t_min, self.t_max = -base.t_max, -base.t_min

    def margin(self):
        return self.base.margin()

    def derivative(self, t, order: int):
        return (-1) ** order * self.base.derivative(-np.asarray(t, dtype=float), order)


class TransformedPath(MatrixPath):
    """t -> g gamma(t) g^T."""

    def __init__(self, base: MatrixPath, g):
        self.base = base
        self.g = np.asarray(g, dtype=float)
        self.t_min, self.t_max = base.t_min, base.t_max

    def margin(self):
        return self.base.margin()

    def derivative(self, t, order: int):
        return self.g @ self.base.derivative(t, order) @ self.g.T


class ReparametrizedPath(MatrixPath):
    """s -> gamma(phi(s)) with phi, phi', phi'' supplied as callables."""

    def __init__(self, base: MatrixPath, phi, dphi, d2phi, s_min, s_max):
        self.base = base
        self.phi, self.dphi, self.d2phi = phi, dphi, d2phi
        self.t_min, self.t_max = float(s_min), float(s_max)

    def derivative(self, s, order: int):
        s = np.asarray(s, dtype=float)
        t = np.asarray(self.phi(s), dtype=float)
        if order == 0:
            return self.base.derivative(t, 0)
        p1 = np.asarray(self.dphi(s), dtype=float)[..., None, None]
        g1 = self.base.derivative(t, 1)
        if order == 1:
            return g1 * p1
        p2 = np.asarray(self.d2phi(s), dtype=float)[..., None, None]
        return self.base.derivative(t, 2) * p1**2 + g1 * p2
