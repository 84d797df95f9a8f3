"""Subspaces of R^7 and their classification relative to the cross product.

Membership and equality are always decided through projection residuals;
bases are never compared directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .algebra import E, cross, dot
from .errors import BadDimension, DependentInput, HypothesisViolated, NotOrthogonal

DEFAULT_TOL = 1e-8
PIVOT_TOL = 1e-10


class PlaneLabel(str, Enum):
    ASSOCIATIVE = "associative"
    COASSOCIATIVE = "coassociative"
    CROSS_COMPATIBLE = "cross_compatible"
    GENERIC = "generic"


@dataclass(frozen=True)
class PlaneVerdict:
    label: PlaneLabel
    residual: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.label is not PlaneLabel.GENERIC

    def to_dict(self) -> dict:
        return {"label": self.label.value, "residual": self.residual, "tolerance": self.tolerance}


def _verdict(label: PlaneLabel, residual: float, tol: float) -> PlaneVerdict:
    return PlaneVerdict(label if residual < tol else PlaneLabel.GENERIC, float(residual), tol)


@dataclass(frozen=True)
class Subspace:
    """Span of an orthonormal list of real 7-vectors, stored as rows."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.shape[-1] != 7 or not 1 <= b.shape[0] <= 7:
            raise BadDimension(f"basis must be k x 7 with 1 <= k <= 7, got {b.shape}")
        gram = b @ b.T
        if np.max(np.abs(gram - np.eye(len(b)))) > PIVOT_TOL:
            raise NotOrthogonal("Subspace basis is not orthonormal; use orthonormalize()")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def outside(self, v) -> np.ndarray:
        """Norm of the component of ``v`` orthogonal to this subspace."""
        v = np.asarray(v)
        return np.linalg.norm(v - v @ self.projector(), axis=-1)

    def complement(self) -> "Subspace":
        # trailing right-singular vectors span the orthogonal complement
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(vt[self.dim:])

    def contains(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        return bool(np.max(self.outside(other.basis)) < tol)


def orthonormalize(vectors, tol: float = PIVOT_TOL) -> Subspace:
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    vs = [np.asarray(v, dtype=float).copy() for v in vectors]
    if not vs:
        raise DependentInput("no vectors given")
    out: list[np.ndarray] = []
    for idx, v in enumerate(vs):
        w = v.copy()
        for _ in range(2):
            for q in out:
                w -= (q @ w) * q
        n = np.linalg.norm(w)
        if n <= tol * max(1.0, np.linalg.norm(v)):
            raise DependentInput(f"vector {idx} is (numerically) in the span of the previous ones")
        out.append(w / n)
    return Subspace(np.array(out))


def span(*ks: int) -> Subspace:
    """Coordinate subspace span{e_k ...} with 1-based indices."""
    return Subspace(E[[k - 1 for k in ks]])


def _check_dim(S: Subspace, dim: int, what: str):
    if S.dim != dim:
        raise BadDimension(f"{what} needs a {dim}-dimensional subspace, got dim {S.dim}")


def closure_residual(V: Subspace) -> float:
    """Max norm of the part of b_i x b_j lying outside V."""
    b = V.basis
    prods = cross(b[:, None, :], b[None, :, :])
    return float(np.max(V.outside(prods)))


def is_associative(V: Subspace, tol: float = DEFAULT_TOL) -> PlaneVerdict:
    _check_dim(V, 3, "is_associative")
    return _verdict(PlaneLabel.ASSOCIATIVE, closure_residual(V), tol)


def is_coassociative(W: Subspace, tol: float = DEFAULT_TOL) -> PlaneVerdict:
    _check_dim(W, 4, "is_coassociative")
    return _verdict(PlaneLabel.COASSOCIATIVE, closure_residual(W.complement()), tol)


def _check_orthogonal(W1: Subspace, W2: Subspace):
    if np.max(np.abs(W1.basis @ W2.basis.T)) > PIVOT_TOL:
        raise NotOrthogonal("the two planes are not mutually orthogonal")


def cross_compatible(W1: Subspace, W2: Subspace, tol: float = DEFAULT_TOL) -> PlaneVerdict:
    """Test W1 x W1 perpendicular to W2 x W2 for orthogonal 2-planes."""
    _check_dim(W1, 2, "cross_compatible")
    _check_dim(W2, 2, "cross_compatible")
    _check_orthogonal(W1, W2)
    a = cross(W1.basis[0], W1.basis[1])
    b = cross(W2.basis[0], W2.basis[1])
    return _verdict(PlaneLabel.CROSS_COMPATIBLE, abs(dot(a, b)), tol)


def split(W: Subspace) -> tuple[Subspace, Subspace]:
    return Subspace(W.basis[:2]), Subspace(W.basis[2:])


def admits_cross_compatible(W: Subspace, tol: float = DEFAULT_TOL) -> PlaneVerdict:
    """One split suffices: a single compatible split makes every split compatible."""
    _check_dim(W, 4, "admits_cross_compatible")
    return cross_compatible(*split(W), tol=tol)


def associative_completion(W1: Subspace, W2: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Associative 3-plane orthogonal to W1 + W2 when v1 x v2 = v3 x v4.

    Returns span{v1 x v2, v1 x v3, v1 x v4}.
    """
    _check_dim(W1, 2, "associative_completion")
    _check_dim(W2, 2, "associative_completion")
    _check_orthogonal(W1, W2)
    v1, v2 = W1.basis
    v3, v4 = W2.basis
    v5 = cross(v1, v2)
    gap = np.linalg.norm(v5 - cross(v3, v4))
    if gap > tol:
        raise HypothesisViolated(f"v1 x v2 != v3 x v4 (difference {gap:.3e})")
    return orthonormalize([v5, cross(v1, v3), cross(v1, v4)])


def line_angle(a, b) -> float:
    """Angle in [0, pi/2] between the lines spanned by real vectors a and b."""
    a = np.asarray(a, float) / np.linalg.norm(a)
    b = np.asarray(b, float) / np.linalg.norm(b)
    c = dot(a, b)
    # atan2 keeps full precision near 0, where arccos loses half the digits
    return float(np.arctan2(np.linalg.norm(a - c * b), abs(c)))


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_g2(rng: np.random.Generator) -> np.ndarray:
    """Random 7x7 orthogonal matrix preserving the cross product.

    Built from a random triple (u1, u2, u3) with u3 orthogonal to u1, u2
    and u1 x u2, mapped onto (e1, e2, e4); the other basis images follow
    from e3 = e1 x e2, e5 = e1 x e4, e6 = e2 x e4, e7 = e3 x e4.
    """
    u1, u2, w = rng.standard_normal((3, 7))
    u1 /= np.linalg.norm(u1)
    u2 -= (u1 @ u2) * u1
    u2 /= np.linalg.norm(u2)
    u12 = cross(u1, u2)
    for q in (u1, u2, u12):
        w -= (q @ w) * q
    u3 = w / np.linalg.norm(w)
    cols = [u1, u2, u12, u3, cross(u1, u3), cross(u2, u3), cross(u12, u3)]
    return np.array(cols).T


def transform(S: Subspace, g: np.ndarray) -> Subspace:
    return orthonormalize(S.basis @ g.T)


def resplit_residuals(W: Subspace, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Compatibility residual of ``trials`` random orthonormal 2+2 splits of W."""
    _check_dim(W, 4, "resplit_residuals")
    out = np.empty(trials)
    for t in range(trials):
        b = random_orthogonal(4, rng) @ W.basis
        out[t] = abs(dot(cross(b[0], b[1]), cross(b[2], b[3])))
    return out
