import numpy as np
import pytest

from centroaffine.curves import CurveSpec

ACCEPTANCE_LINES = []


class ReparamCurve(CurveSpec):
    """beta(phi(u)) with exact jets up to order 4 by the chain rule.

    ``phis(u)`` returns (phi, phi', phi'', phi''', phi'''').
    """

    kind = "builtin"

    def __init__(self, base, phis, u_min, u_max):
        self.base, self.phis = base, phis
        self.t_min, self.t_max = u_min, u_max

    def derivatives(self, u, order):
        u = np.asarray(u, dtype=float)
        p0, p1, p2, p3, p4 = (np.asarray(x)[..., None] for x in self.phis(u))
        g = self.base.derivatives(p0[..., 0], max(order, 1))
        g = list(g) + [None] * (5 - len(g))
        out = [g[0]]
        if order >= 1:
            out.append(g[1] * p1)
        if order >= 2:
            out.append(g[2] * p1**2 + g[1] * p2)
        if order >= 3:
            out.append(g[3] * p1**3 + 3 * g[2] * p1 * p2 + g[1] * p3)
        if order >= 4:
            out.append(
                g[4] * p1**4 + 6 * g[3] * p1**2 * p2 + g[2] * (3 * p2**2 + 4 * p1 * p3) + g[1] * p4
            )
        return np.stack(out[: order + 1])


def sine_warp(eps=0.2):
    """phi(u) = u + eps sin u, increasing for |eps| < 1."""

    def phis(u):
        s, c = np.sin(u), np.cos(u)
        return u + eps * s, 1 + eps * c, -eps * s, -eps * c, eps * s

    return phis


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture
def acceptance():
    def record(number, title, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(line)
