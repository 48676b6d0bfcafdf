"""Dense linear algebra used by the Levenberg-Marquardt step.

Matrices and vectors are plain float64 numpy arrays. ``as_matrix`` and
``as_vector`` enforce shape and finiteness at the boundaries; everything
here is a pure function of its inputs.
"""
import numpy as np


class IndefiniteSystem(ArithmeticError):
    """Factorization met a non-positive pivot.

    The LM loop responds by raising the damping factor and retrying.
    """


def as_matrix(a, name="matrix"):
    m = np.array(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite elements")
    return m


def as_vector(v, name="vector"):
    x = np.array(v, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite elements")
    return x


def gram(J):
    """Return ``J.T @ J`` with the lower triangle mirrored from the upper one.

    Mirroring makes the result bitwise symmetric, which BLAS does not
    guarantee for a general product.
    """
    J = as_matrix(J, "J")
    if J.shape[0] < 1 or J.shape[1] < 1:
        raise ValueError("J must have at least one row and one column")
    G = J.T @ J
    upper = np.triu_indices(G.shape[0], k=1)
    G[(upper[1], upper[0])] = G[upper]
    return G


def mul_transpose_vec(J, r):
    """Return ``J.T @ r``."""
    J = as_matrix(J, "J")
    r = as_vector(r, "r")
    if r.shape[0] != J.shape[0]:
        raise ValueError(
            f"dimension mismatch: J has {J.shape[0]} rows, r has length {r.shape[0]}"
        )
    return J.T @ r


def cholesky(A):
    """Lower-triangular factor L with ``L @ L.T == A``.

    Raises IndefiniteSystem on the first pivot that is not strictly positive.
    """
    L = np.array(A, dtype=np.float64)
    n = L.shape[0]
    for k in range(n):
        d = L[k, k]
        if not (d > 0.0) or not np.isfinite(d):
            raise IndefiniteSystem(f"non-positive pivot {d!r} at column {k}")
        d = np.sqrt(d)
        L[k, k] = d
        col = L[k + 1:, k] / d
        L[k + 1:, k] = col
        L[k + 1:, k + 1:] -= np.outer(col, col)
    return np.tril(L)


def _forward_sub(L, b):
    n = b.shape[0]
    y = np.empty(n)
    for i in range(n):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    return y


def _back_sub(U, y):
    n = y.shape[0]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - U[i, i + 1:] @ x[i + 1:]) / U[i, i]
    return x


def solve_spd(A, b):
    """Solve ``A x = b`` for symmetric positive definite A via Cholesky.

    A must be square and symmetric to 1e-10 relative to its largest entry.
    A failed factorization is reported as IndefiniteSystem, never patched.
    """
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if b.shape[0] != n:
        raise ValueError(f"dimension mismatch: A is {n}x{n}, b has length {b.shape[0]}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-10 * scale:
        raise ValueError("A is not symmetric")
    L = cholesky(A)
    return _back_sub(L.T, _forward_sub(L, b))
