"""Symmetric tridiagonal eigensolvers.

``tridiagonal_ql`` is an implicit-shift QL iteration (Wilkinson shift, Givens
sweeps) that accumulates eigenvectors.  It is exact to working precision but
costs O(L^3) with vectors, so ``eigh_tridiagonal`` defaults to LAPACK's
MRRR driver for large chains and keeps QL available by name.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

try:
    import numba

    _jit = numba.njit(cache=True)
except ImportError:  # pragma: no cover - pure Python fallback
    def _jit(f):
        return f

MAX_SWEEPS = 60


class NumericalError(RuntimeError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@_jit
def _ql_kernel(d, e, z):
    # d, e overwritten; e[n-1] must be 0; z[k] is the k-th eigenvector (row)
    n = d.shape[0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > MAX_SWEEPS:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[i]
                zj = z[i + 1]
                for k in range(n):
                    f = zj[k]
                    zj[k] = s * zi[k] + c * f
                    zi[k] = c * zi[k] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiagonal_ql(diag, offdiag) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the symmetric tridiagonal matrix (diag, offdiag).

    Returns ascending eigenvalues and a matrix whose columns are the
    corresponding orthonormal eigenvectors.
    """
    d = np.array(diag, dtype=np.float64)
    n = d.shape[0]
    e = np.zeros(n)
    e[: n - 1] = offdiag
    z = np.eye(n)
    failed = _ql_kernel(d, e, z)
    if failed >= 0:
        raise NumericalError(f"QL iteration did not converge for eigenvalue {failed}", failed)
    order = np.argsort(d, kind="stable")
    return d[order], np.ascontiguousarray(z[order].T)


def eigh_tridiagonal(diag, offdiag, method: str = "lapack") -> tuple[np.ndarray, np.ndarray]:
    if method == "ql":
        return tridiagonal_ql(diag, offdiag)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    try:
        return scipy.linalg.eigh_tridiagonal(np.asarray(diag, float), np.asarray(offdiag, float))
    except np.linalg.LinAlgError as exc:
        # LAPACK reports the failing index as info > 0
        idx = getattr(exc, "args", [None])[0]
        raise NumericalError(f"tridiagonal eigensolver failed: {idx}") from exc


def fix_signs(vectors: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Flip columns so that the first non-negligible component is positive."""
    V = np.array(vectors, copy=True)
    scale = np.max(np.abs(V), axis=0)
    significant = np.abs(V) > rel_tol * scale
    first = np.argmax(significant, axis=0)
    signs = np.sign(V[first, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs
