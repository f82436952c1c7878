"""Batched tridiagonal elimination without pivoting.

Systems are stored by diagonals with the unknown index first, so that many
columns (one per grid cell, or per kinetic velocity) are solved at once:
``sub[k] x[k-1] + diag[k] x[k] + sup[k] x[k+1] = rhs[k]`` with ``sub[0]`` and
``sup[-1]`` ignored. Stability requires diagonal dominance of the matrix or its
transpose.
"""

import numpy as np


def solve_tridiagonal(sub, diag, sup, rhs):
    sub = np.asarray(sub, dtype=float)
    diag = np.asarray(diag, dtype=float)
    sup = np.asarray(sup, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    # coefficient arrays may have fewer trailing axes than rhs
    extra = rhs.ndim - diag.ndim
    if extra:
        shape = diag.shape + (1,) * extra
        sub, diag, sup = sub.reshape(shape), diag.reshape(shape), sup.reshape(shape)

    c = np.empty(np.broadcast_shapes(diag.shape, rhs.shape))
    d = np.empty_like(c)
    c[0] = sup[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for k in range(1, n):
        denom = diag[k] - sub[k] * c[k - 1]
        c[k] = sup[k] / denom
        d[k] = (rhs[k] - sub[k] * d[k - 1]) / denom
    x = np.empty_like(d)
    x[-1] = d[-1]
    for k in range(n - 2, -1, -1):
        x[k] = d[k] - c[k] * x[k + 1]
    return x


def tridiagonal_to_dense(sub, diag, sup):
    """Dense matrix of a single system (1-D diagonals)."""
    n = len(diag)
    a = np.diag(np.asarray(diag, dtype=float))
    for k in range(1, n):
        a[k, k - 1] = sub[k]
        a[k - 1, k] = sup[k - 1]
    return a
