"""Finite-difference weights and grid differentiation (4th order)."""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

ORDER = 4


@lru_cache(maxsize=None)
def weights(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Weights w with sum_k w_k f(x + o_k h) ~ h^deriv f^(deriv)(x).

    Solves the moment (Vandermonde) system; offsets are small integers so
    the system is well conditioned.
    """
    o = np.asarray(offsets, dtype=float)
    n = len(o)
    A = np.vander(o, n, increasing=True).T
    b = np.zeros(n)
    b[deriv] = factorial(deriv)
    w = np.linalg.solve(A, b)
    w.setflags(write=False)
    return w


def central_offsets(deriv: int, order: int = ORDER) -> tuple[int, ...]:
    # a symmetric stencil of width 2m+1 reaches accuracy 2m+1-deriv, rounded to even
    m = (deriv + order - 1) // 2
    return tuple(range(-m, m + 1))


def _edge_offsets(i: int, n: int, deriv: int, order: int) -> tuple[int, ...]:
    # one-sided stencils lose the symmetric error cancellation: deriv+order points
    w = min(deriv + order, n)
    start = min(max(i - w // 2, 0), n - w) - i
    return tuple(range(start, start + w))


def diff(field: np.ndarray, h: float, axis: int, deriv: int = 1, order: int = ORDER) -> np.ndarray:
    """Derivative of a sampled field along ``axis`` with uniform spacing ``h``.

    Interior nodes use central stencils; the first/last few nodes use
    shifted stencils of the same formal order.
    """
    f = np.moveaxis(np.asarray(field), axis, 0)
    n = f.shape[0]
    need = deriv + order
    if n < need:
        raise ValueError(f"need at least {need} samples along axis {axis}, got {n}")
    out = np.empty(f.shape, dtype=np.result_type(f.dtype, float))
    # interior in one vectorized pass
    offs = central_offsets(deriv, order)
    m = len(offs) // 2
    w = weights(offs, deriv)
    acc = np.zeros_like(out[m:n - m])
    for k, o in enumerate(offs):
        acc += w[k] * f[m + o:n - m + o]
    out[m:n - m] = acc
    for i in list(range(m)) + list(range(n - m, n)):
        offs_i = _edge_offsets(i, n, deriv, order)
        wi = weights(offs_i, deriv)
        out[i] = sum(wk * f[i + o] for wk, o in zip(wi, offs_i))
    out /= h ** deriv
    return np.moveaxis(out, 0, axis)


def d_dz(field: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Wirtinger derivative 1/2 (d/dx - i d/dy) on an (N, M, ...) grid."""
    return 0.5 * (diff(field, hx, 0) - 1j * diff(field, hy, 1))


def d_dzbar(field: np.ndarray, hx: float, hy: float) -> np.ndarray:
    return 0.5 * (diff(field, hx, 0) + 1j * diff(field, hy, 1))


def laplacian(field: np.ndarray, hx: float, hy: float) -> np.ndarray:
    return diff(field, hx, 0, 2) + diff(field, hy, 1, 2)
