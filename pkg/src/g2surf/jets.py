"""Map jets, harmonic-sequence frames and the pointwise quantities read off them.

A ``MapJet`` holds phi, its complex z-derivatives and its real partials up
to second order, either exact (from a catalog map) or from finite
differences. A ``HarmonicFrame`` holds the sections f_{-1}, f_0, ..., f_K.

Two frame builders exist. ``frame_from_jet`` works pointwise on exact jets:
because consecutive sections are Hermitian-orthogonal up to the isotropy
order, f_k is the part of d^k phi/dz^k Hermitian-orthogonal to f_1..f_{k-1}.
``frame_at`` works on a grid: it differentiates the f_j field numerically
and removes only its f_j component, which is the recursion itself.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from math import comb, factorial
from typing import NamedTuple

import numpy as np

from .algebra import cross, dot, herm, norm
from .errors import NotConformal, OutOfDomain, StepTooLarge
from .stencils import central_offsets, d_dz, d_dzbar, weights

BRANCH_EPS = 1e-8
# below this squared norm a section is treated as the zero section
ZERO_SECTION = 1e-24


@dataclass
class MapJet:
    x: np.ndarray
    y: np.ndarray
    f0: np.ndarray
    dz: tuple  # dz[k-1] = d^k phi / dz^k
    d: dict  # (a, b) -> d^a/dx^a d^b/dy^b phi, a + b <= 2
    source: str = "analytic"
    step: float | None = None

    @property
    def z(self):
        return self.x + 1j * self.y

    @property
    def order(self) -> int:
        return len(self.dz)

    def laplacian(self) -> np.ndarray:
        return self.d[2, 0] + self.d[0, 2]

    def sphere_residual(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.f0, axis=-1) - 1)))

    def constraint_residual(self) -> float:
        """|phi . phi_z|, zero for sphere-valued maps."""
        return float(np.max(np.abs(dot(self.f0, self.dz[0]))))

    def crop(self, key) -> "MapJet":
        """The jet restricted to ``key``, an index into the leading grid axes."""
        return MapJet(self.x[key], self.y[key], self.f0[key], tuple(v[key] for v in self.dz),
                      {k: v[key] for k, v in self.d.items()}, self.source, self.step)


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise OutOfDomain(f"{what} is not finite at some requested point")


def jet_at(m, z, mode: str = "analytic", h: float = 1e-2, kmax: int = 4) -> MapJet:
    """Jet of the map ``m`` at complex point(s) ``z``.

    ``mode="fd"`` samples phi on a square patch of side 6h around every
    point and applies tensor-product central stencils of 4th order.
    """
    z = np.asarray(z, dtype=complex)
    # overflow is reported as OutOfDomain below rather than as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        return _jet_at(m, z.real, z.imag, mode, h, kmax)


def _jet_at(m, x, y, mode, h, kmax):
    if mode == "analytic":
        f0 = m.value(x, y)
        _check_finite(f0, "phi")
        dzs = tuple(m.dz(x, y, k) for k in range(1, kmax + 1))
        d = {(a, b): m.partial(x, y, a, b) for a in range(3) for b in range(3) if a + b <= 2}
        for v in dzs:
            _check_finite(v, "a z-derivative")
        return MapJet(x, y, f0, dzs, d, "analytic", None)
    if mode != "fd":
        raise ValueError(f"mode must be 'analytic' or 'fd', got {mode!r}")
    if h <= 0:
        raise ValueError("step h must be positive")
    partials = fd_partials(m, x, y, h, kmax)
    f0 = partials[0, 0]
    _check_finite(f0, "phi")
    dzs = []
    for k in range(1, kmax + 1):
        acc = 0
        for j in range(k + 1):
            acc = acc + comb(k, j) * (-1j) ** j * partials[k - j, j]
        dzs.append(acc / 2 ** k)
    d = {(a, b): partials[a, b] for a in range(3) for b in range(3) if a + b <= 2}
    jet = MapJet(x, y, f0, tuple(dzs), d, "fd", h)
    rec = taylor_sphere_residual(partials, h, kmax)
    if rec > 1e-3:
        raise StepTooLarge(f"Taylor-reconstructed values leave the sphere by {rec:.3e} at step h={h}")
    return jet


def fd_partials(m, x, y, h: float, kmax: int) -> dict:
    """All d^a/dx^a d^b/dy^b phi with a + b <= kmax by tensor-product stencils."""
    span = max(len(central_offsets(k)) // 2 for k in range(kmax + 1))
    offs = np.arange(-span, span + 1)
    # samples[i, j] = phi(x + offs[i] h, y + offs[j] h)
    X = x[..., None, None] + offs[:, None] * h
    Y = y[..., None, None] + offs[None, :] * h
    samples = m.value(X, Y)
    _check_finite(samples, "phi on the stencil patch")
    out = {}
    for a, b in product(range(kmax + 1), repeat=2):
        if a + b > kmax:
            continue
        wa = _padded_weights(a, span)
        wb = _padded_weights(b, span)
        out[a, b] = np.einsum("i,j,...ijk->...k", wa, wb, samples) / h ** (a + b)
    return out


def _padded_weights(deriv: int, span: int) -> np.ndarray:
    offs = central_offsets(deriv) if deriv else (0,)
    w = np.zeros(2 * span + 1)
    for o, wk in zip(offs, weights(tuple(offs), deriv)):
        w[o + span] = wk
    return w


def taylor_sphere_residual(partials: dict, h: float, kmax: int) -> float:
    """Max ||phi_rec|^2 - 1| of the degree-kmax Taylor polynomial at (x+h, y), (x, y+h)."""
    worst = 0.0
    for axis in (0, 1):
        acc = 0
        for k in range(kmax + 1):
            key = (k, 0) if axis == 0 else (0, k)
            acc = acc + partials[key] * h ** k / factorial(k)
        worst = max(worst, float(np.max(np.abs(np.sum(acc * acc, axis=-1) - 1))))
    return worst


# --- frames ------------------------------------------------------------------------


@dataclass
class HarmonicFrame:
    f: dict  # j -> section f_j, j = -1, 0, 1, ..., K
    alpha: np.ndarray  # e^{2 alpha} = 2 |f_1|^2
    conformality_residual: np.ndarray  # |f_1 . f_1| / |f_1|^2
    mask: np.ndarray  # True at branch points
    source: str = "analytic"
    extra: dict = field(default_factory=dict)

    @property
    def top(self) -> int:
        return max(self.f)

    def norms(self) -> dict:
        return {j: norm(v) for j, v in self.f.items()}

    def __getitem__(self, j):
        return self.f[j]

    def crop(self, key) -> "HarmonicFrame":
        return HarmonicFrame({j: v[key] for j, v in self.f.items()}, self.alpha[key],
                             self.conformality_residual[key], self.mask[key], self.source, dict(self.extra))


def _minus_one(f1):
    n2 = np.real(herm(f1, f1))
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.conj(f1) / n2[..., None]


def _finish(f: dict, source: str, extra=None) -> HarmonicFrame:
    f1 = f[1]
    n2 = np.real(herm(f1, f1))
    mask = np.sqrt(n2) < BRANCH_EPS
    safe = np.where(mask, 1.0, n2)
    f[-1] = np.where(mask[..., None], 0, _minus_one(np.where(mask[..., None], 1, f1)))
    alpha = 0.5 * np.log(2 * safe)
    conf = np.abs(dot(f1, f1)) / safe
    return HarmonicFrame(dict(sorted(f.items())), alpha, conf, mask, source, extra or {})


def frame_from_jet(jet: MapJet, kmax: int | None = None) -> HarmonicFrame:
    """Frame from exact jets by Hermitian Gram-Schmidt of the z-derivatives."""
    kmax = jet.order if kmax is None else min(kmax, jet.order)
    f = {0: jet.f0.astype(complex)}
    basis: list[np.ndarray] = []
    for k in range(1, kmax + 1):
        v = np.asarray(jet.dz[k - 1], dtype=complex).copy()
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for q in basis:
                qq = np.real(herm(q, q))
                coef = np.where(qq > ZERO_SECTION, herm(v, q) / np.where(qq > 0, qq, 1), 0)
                v = v - coef[..., None] * q
        f[k] = v
        basis.append(v)
    return _finish(f, jet.source)


def frame_at(jet: MapJet, hx: float, hy: float, kmax: int = 4) -> HarmonicFrame:
    """Frame on an (N, M) grid by the differentiate-and-project recursion.

    f_1 comes from the jet; f_{j+1} = d f_j/dz - (h(d f_j/dz, f_j)/|f_j|^2) f_j
    with d/dz taken by 4th-order grid stencils.
    """
    f = {0: jet.f0.astype(complex), 1: np.asarray(jet.dz[0], dtype=complex)}
    for j in range(1, kmax):
        g = d_dz(f[j], hx, hy)
        nn = np.real(herm(f[j], f[j]))
        coef = np.where(nn > ZERO_SECTION, herm(g, f[j]) / np.where(nn > 0, nn, 1), 0)
        f[j + 1] = g - coef[..., None] * f[j]
    return _finish(f, "grid", {"hx": hx, "hy": hy})


def recursion_residuals(frame: HarmonicFrame, hx: float, hy: float, margin: int = 0) -> dict:
    """Residuals of the two harmonic-sequence relations, by grid differentiation.

    forward[j]:  d f_j/dz - f_{j+1} - (d log|f_j|^2/dz) f_j,   j = 1..K-1
    backward[j]: d f_{j+1}/dzbar + (|f_{j+1}|^2/|f_j|^2) f_j,   j = -1..K-1
    Values are max absolute norms over unmasked points at least ``margin``
    nodes away from the boundary.
    """
    keep = ~frame.mask
    if margin:
        inner = np.zeros_like(keep)
        inner[margin:-margin, margin:-margin] = True
        keep &= inner
    f = frame.f
    fwd, bwd = {}, {}
    for j in range(1, frame.top):
        nn = np.real(herm(f[j], f[j]))
        if np.max(nn[keep]) < ZERO_SECTION:
            continue
        dlog = d_dz(np.log(np.where(nn > 0, nn, 1)), hx, hy)
        r = d_dz(f[j], hx, hy) - f[j + 1] - dlog[..., None] * f[j]
        fwd[j] = float(np.max(norm(r)[keep]))
    for j in range(-1, frame.top):
        nj = np.real(herm(f[j], f[j]))
        nj1 = np.real(herm(f[j + 1], f[j + 1]))
        if np.max(nj[keep]) < ZERO_SECTION:
            continue
        ratio = nj1 / np.where(nj > 0, nj, 1)
        r = d_dzbar(f[j + 1], hx, hy) + ratio[..., None] * f[j]
        bwd[j] = float(np.max(norm(r)[keep]))
    return {"forward": fwd, "backward": bwd}


# --- pointwise quantities ----------------------------------------------------------


class IsotropyOrder(NamedTuple):
    value: int
    exact: bool  # False means "at least value"

    def __str__(self):
        return str(self.value) if self.exact else f">={self.value}"


def isotropy_order(frame: HarmonicFrame, r_max: int = 4, tol: float = 1e-6) -> IsotropyOrder:
    """Smallest i <= r_max with f_i not Hermitian-orthogonal to f_0, minus one.

    Evaluated over all unmasked points; zero sections (a terminated
    sequence) count as orthogonal.
    """
    keep = ~frame.mask
    r_max = min(r_max, frame.top)
    for i in range(1, r_max + 1):
        fi = frame.f[i]
        ni = norm(fi)[keep]
        big = ni > 1e-10
        if not np.any(big):
            continue
        ratio = np.abs(herm(fi, frame.f[0]))[keep][big] / ni[big]
        if np.max(ratio) > tol:
            r = i - 1
            if r % 2 == 0:
                warnings.warn(f"even isotropy order {r} for a sphere-valued map", RuntimeWarning)
            return IsotropyOrder(r, True)
    return IsotropyOrder(r_max, False)


def kahler_cos(frame: HarmonicFrame) -> np.ndarray:
    """i (f_1 x f_{-1}) . f_0, whose real part is cos(theta)."""
    return 1j * dot(cross(frame.f[1], frame.f[-1]), frame.f[0])


def kahler_angle(frame: HarmonicFrame, tol: float = 1e-8):
    """Kahler angle theta in [0, pi] and the imaginary residual of its defining identity."""
    conf = frame.conformality_residual[~frame.mask]
    if conf.size and np.max(conf) > tol:
        raise NotConformal(f"|f1.f1|/|f1|^2 reaches {np.max(conf):.3e}")
    c = kahler_cos(frame)
    theta = np.arccos(np.clip(c.real, -1.0, 1.0))
    return theta, np.abs(c.imag)


class EllipseKind(str, Enum):
    POINT = "point"
    CIRCLE = "circle"
    LINE = "line"
    GENERIC = "generic"


@dataclass
class EllipseClass:
    """Shape of the ellipse of curvature of phi read off f_2.

    ``residual_isotropy`` is |f2.f2|/|f2|^2 (0 for a circle) and
    ``residual_real`` is the distance between span{f2} and its conjugate,
    sqrt(1 - residual_isotropy^2) (0 for a segment). Both are maxima over
    the unmasked grid.
    """

    kind: EllipseKind
    f2_norm: float
    residual_isotropy: float
    residual_real: float


def ellipse_class(frame: HarmonicFrame, tol: float = 1e-6) -> EllipseClass:
    keep = ~frame.mask
    f2 = frame.f[2]
    n = norm(f2)[keep]
    nmax = float(np.max(n)) if n.size else 0.0
    if nmax < tol:
        return EllipseClass(EllipseKind.POINT, nmax, 0.0, 0.0)
    iso = np.abs(dot(f2, f2))[keep] / np.maximum(n ** 2, 1e-300)
    real = np.sqrt(np.clip(1 - iso ** 2, 0, None))
    r_iso, r_real = float(np.max(iso)), float(np.max(real))
    if r_iso < tol:
        kind = EllipseKind.CIRCLE
    elif r_real < tol:
        kind = EllipseKind.LINE
    else:
        kind = EllipseKind.GENERIC
    return EllipseClass(kind, nmax, r_iso, r_real)


def kahler_constancy_residual(frame: HarmonicFrame) -> float:
    """|h(f0 x f1, f2)| / (|f0 x f1| |f2|): Hermitian product of phi_0 x phi_1 with phi_2.

    Diagnostic only; vanishes for maps of constant Kahler angle.
    """
    keep = ~frame.mask
    a = cross(frame.f[0], frame.f[1])
    f2 = frame.f[2]
    den = norm(a) * norm(f2)
    big = keep & (den > 1e-12)
    if not np.any(big):
        return 0.0
    return float(np.max(np.abs(herm(a, f2))[big] / den[big]))


def sequence_span(frame: HarmonicFrame, upto: int, index=(), tol: float = 1e-6):
    """Real subspace W with W (x) C = phi_{-upto+1} + ... + phi_{upto-1} + phi_upto.

    Built at one grid point from f_0 and the real and imaginary parts of
    f_1..f_upto, via SVD rank detection. Returns a planes.Subspace.
    """
    from .planes import Subspace

    cols = [np.real(frame.f[0][index])]
    for j in range(1, upto + 1):
        v = frame.f[j][index]
        s = norm(v)
        if s < tol:
            continue
        v = v / s
        cols += [v.real, v.imag]
    A = np.array(cols)
    _, sv, vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(sv > tol * sv[0]))
    return Subspace(vt[:rank])
