"""Closed-form linear algebra for plane vectors and symmetric 2x2 matrices.

Vectors are numpy arrays of shape (2,), symmetric matrices are numpy arrays
of shape (2, 2). Nothing here iterates; every routine is the explicit 2x2
formula.
"""

import numpy as np


class NotPositiveDefiniteError(ValueError):
    pass


class KernelError(ValueError):
    pass


def vec(x, y) -> np.ndarray:
    return np.array([x, y], dtype=float)


def sym(a11, a12, a22) -> np.ndarray:
    return np.array([[a11, a12], [a12, a22]], dtype=float)


def sym_entries(X) -> tuple[float, float, float]:
    X = np.asarray(X, dtype=float)
    return float(X[0, 0]), float(0.5 * (X[0, 1] + X[1, 0])), float(X[1, 1])


def wedge(u, v):
    """u ^ v = det(u, v). Broadcasts over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def rot90(u) -> np.ndarray:
    """Counterclockwise rotation through a right angle."""
    u = np.asarray(u, dtype=float)
    return np.stack([-u[..., 1], u[..., 0]], axis=-1)


def outer(u, v=None) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = u if v is None else np.asarray(v, dtype=float)
    return u[..., :, None] * v[..., None, :]


def det_sym(X):
    X = np.asarray(X, dtype=float)
    return X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0]


def trace_sym(X):
    X = np.asarray(X, dtype=float)
    return X[..., 0, 0] + X[..., 1, 1]


def adjugate(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = np.empty_like(X)
    out[..., 0, 0] = X[..., 1, 1]
    out[..., 1, 1] = X[..., 0, 0]
    out[..., 0, 1] = -X[..., 0, 1]
    out[..., 1, 0] = -X[..., 1, 0]
    return out


def is_spd(A) -> bool:
    A = np.asarray(A, dtype=float)
    return bool(np.all(np.isfinite(A)) and A[0, 0] > 0 and det_sym(A) > 0)


def require_spd(A, what: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if not is_spd(A):
        raise NotPositiveDefiniteError(f"{what} is not positive definite: {A.tolist()}")
    return A


def inverse_spd(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    d = det_sym(A)
    if not d > 0:
        raise NotPositiveDefiniteError(f"matrix is not positive definite (det={d!r})")
    return adjugate(A) / d


def eig_sym(X):
    """Eigen-decomposition of a symmetric 2x2 matrix.

    Returns ``(lam1, lam2, e1, e2)`` with ``lam1 <= lam2`` and ``e1, e2``
    orthonormal. A repeated eigenvalue returns the standard basis.
    """
    a, b, c = sym_entries(X)
    mid = 0.5 * (a + c)
    half = 0.5 * (a - c)
    r = float(np.hypot(half, b))
    lam1, lam2 = mid - r, mid + r
    scale = max(abs(a), abs(b), abs(c), 1e-300)
    if r <= 4 * np.finfo(float).eps * scale:
        return lam1, lam2, vec(1.0, 0.0), vec(0.0, 1.0)
    # Eigenvector of lam2 from whichever row of (X - lam2 I) is better conditioned.
    if half >= 0:
        e2 = vec(half + r, b)
    else:
        e2 = vec(b, r - half)
    e2 /= np.hypot(*e2)
    e1 = rot90(e2)
    return lam1, lam2, e1, e2


def spd_sqrt(A) -> np.ndarray:
    """Principal square root, via sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A))."""
    A = require_spd(A)
    s = np.sqrt(det_sym(A))
    t = np.sqrt(trace_sym(A) + 2 * s)
    return (A + s * np.eye(2)) / t


def kernel_of_singular_sym(X, tol: float = 1e-8) -> np.ndarray:
    """Unit vector spanning the kernel of a rank-one symmetric matrix.

    Sign convention: first nonzero component positive.
    """
    a, b, c = sym_entries(X)
    m = max(abs(a), abs(b), abs(c))
    if m == 0 or not np.isfinite(m):
        raise KernelError("kernel not one-dimensional (matrix vanishes)")
    d = a * c - b * b
    if abs(d) > tol * m * m:
        raise KernelError(f"matrix not singular: |det|/max^2 = {abs(d) / (m * m):.3e}")
    # X ~ lam * u u^T with u taken from the dominant diagonal entry; kernel is rot90(u).
    if abs(a) >= abs(c):
        v = vec(-b, a)
    else:
        v = vec(-c, b)
    v /= np.hypot(*v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v
