"""The 7-dimensional cross product on R^7 and its complex-bilinear extension.

Vectors are numpy arrays whose last axis has length 7, real or complex.
Every function broadcasts over leading axes, so the same call works on a
single vector and on a whole (N, M, 7) grid.

The product is defined only through the signed structure table below; no
other formula for ``cross`` exists in the package.
"""

from __future__ import annotations

import numpy as np

# MULTIPLICATION_TABLE[i][j] = (sign, k) meaning e_{i+1} x e_{j+1} = sign * e_{k+1}.
# Rows/columns are e1..e7; (0, -1) marks the zero diagonal.
TABLE_ROWS = [
    "0 +3 -2 +5 -4 -7 +6",
    "-3 0 +1 +6 +7 -4 -5",
    "+2 -1 0 +7 -6 +5 -4",
    "-5 -6 -7 0 +1 +2 +3",
    "+4 -7 +6 -1 0 -3 +2",
    "+7 +4 -5 -2 +3 0 -1",
    "-6 +5 +4 -3 -2 +1 0",
]


def parse_table(rows):
    table = []
    for row in rows:
        entries = []
        for tok in row.split():
            n = int(tok)
            entries.append((0, -1) if n == 0 else (1 if n > 0 else -1, abs(n) - 1))
        table.append(entries)
    return table


MULTIPLICATION_TABLE = parse_table(TABLE_ROWS)


def structure_tensor(table=None) -> np.ndarray:
    """Return C with C[i, j, k] = coefficient of e_k in e_i x e_j."""
    table = MULTIPLICATION_TABLE if table is None else table
    C = np.zeros((7, 7, 7))
    for i in range(7):
        for j in range(7):
            sign, k = table[i][j]
            if sign:
                C[i, j, k] = sign
    return C


STRUCTURE = structure_tensor()
STRUCTURE.setflags(write=False)

E = np.eye(7)
E.setflags(write=False)


def basis(k: int) -> np.ndarray:
    """Canonical basis vector e_k, 1-based as in the usual notation."""
    if not 1 <= k <= 7:
        raise ValueError(f"basis index must be in 1..7, got {k}")
    return E[k - 1].copy()


def _pair_indices(C):
    # For each output k: the three pairs i<j with e_i x e_j = +-e_k.
    I = np.zeros((7, 3), dtype=int)
    J = np.zeros((7, 3), dtype=int)
    S = np.zeros((7, 3))
    fill = [0] * 7
    for i in range(7):
        for j in range(i + 1, 7):
            for k in np.flatnonzero(C[i, j]):
                I[k, fill[k]], J[k, fill[k]], S[k, fill[k]] = i, j, C[i, j, k]
                fill[k] += 1
    return I, J, S


_I, _J, _S = _pair_indices(STRUCTURE)


def cross(x, y, structure: np.ndarray | None = None) -> np.ndarray:
    """Bilinear cross product expanded from the structure table.

    The default path sums s * (x_i y_j - x_j y_i) over the three pairs
    feeding each output coordinate, which makes x x y == -(y x x) bit for
    bit. An explicit ``structure`` (used for negative controls) goes through
    a plain tensor contraction instead.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if structure is not None:
        return np.einsum("...i,...j,ijk->...k", x, y, structure)
    if np.iscomplexobj(x) or np.iscomplexobj(y):
        # complex multiply is not bitwise commutative in numpy; split parts
        xr, xi, yr, yi = x.real, np.imag(x), y.real, np.imag(y)
        re = _real_cross(xr, yr) - _real_cross(xi, yi)
        im = _real_cross(xr, yi) + _real_cross(xi, yr)
        return re + 1j * im
    return _real_cross(x, y)


def _real_cross(x, y):
    terms = x[..., _I] * y[..., _J] - x[..., _J] * y[..., _I]
    return (_S * terms).sum(axis=-1)


def dot(x, y):
    """Complex-bilinear inner product (no conjugation)."""
    return np.einsum("...i,...i->...", np.asarray(x), np.asarray(y))


def herm(x, y):
    """Hermitian product h(x, y) = x . conj(y)."""
    return dot(x, np.conj(y))


def norm(x) -> np.ndarray:
    return np.sqrt(np.real(herm(x, x)))


def left_cross_matrix(v) -> np.ndarray:
    """Matrix L with L @ x == cross(v, x)."""
    return np.einsum("i,ijk->kj", np.asarray(v, dtype=float), STRUCTURE)


def table_mismatches(structure: np.ndarray | None = None) -> list[tuple[int, int]]:
    """Basis pairs (1-based) where ``cross`` disagrees with the stored table."""
    bad = []
    for i in range(7):
        for j in range(7):
            sign, k = MULTIPLICATION_TABLE[i][j]
            expected = np.zeros(7) if not sign else sign * E[k]
            if not np.array_equal(cross(E[i], E[j], structure), expected):
                bad.append((i + 1, j + 1))
    return bad


def _identity_residuals(x, y, z, structure=None):
    c = lambda a, b: cross(a, b, structure)  # noqa: E731
    xy = c(x, y)
    out = {}
    out["orthogonality"] = np.maximum(np.abs(dot(x, xy)), np.abs(dot(xy, y)))
    out["norm_identity"] = np.abs(dot(xy, xy) - (dot(x, x) * dot(y, y) - dot(x, y) ** 2))
    out["antisymmetry"] = np.max(np.abs(xy + c(y, x)), axis=-1)
    t1 = dot(x, c(y, z))
    out["cyclic_triple"] = np.maximum(np.abs(t1 - dot(y, c(z, x))), np.abs(t1 - dot(z, c(x, y))))
    lhs5 = c(xy, c(x, z))
    rhs5 = c(c(xy, z), x) + c(c(c(y, z), x), x) + c(c(c(z, x), x), y)
    out["double_product_expansion"] = np.max(np.abs(lhs5 - rhs5), axis=-1)
    rhs6 = -dot(x, x)[..., None] * y + dot(x, y)[..., None] * x
    out["double_cross"] = np.max(np.abs(c(x, xy) - rhs6), axis=-1)
    lhs7 = c(x, c(y, z)) + c(xy, z)
    rhs7 = 2 * dot(x, z)[..., None] * y - dot(x, y)[..., None] * z - dot(y, z)[..., None] * x
    out["polarized_double_cross"] = np.max(np.abs(lhs7 - rhs7), axis=-1)
    return out


def identity_suite(seed: int = 1, trials: int = 10_000, structure=None) -> dict[str, float]:
    """Max absolute residual of each cross product identity over random real triples.

    Coordinates are i.i.d. standard normal; triples whose norm exceeds 10
    are rescaled onto the radius-10 ball so magnitudes stay bounded.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    xyz = rng.standard_normal((3, trials, 7))
    n = np.linalg.norm(xyz, axis=-1, keepdims=True)
    xyz = np.where(n > 10.0, xyz * (10.0 / n), xyz)
    res = _identity_residuals(xyz[0], xyz[1], xyz[2], structure)
    return {name: float(np.max(v)) for name, v in res.items()}
