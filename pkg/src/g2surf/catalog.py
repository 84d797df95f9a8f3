"""Closed-form sphere-valued maps with exact derivatives of any order.

A map is evaluated through ``partial(x, y, a, b)`` (the real derivative
d^a/dx^a d^b/dy^b) and ``dz(x, y, k)`` (the complex d^k/dz^k). Both
broadcast over array-valued ``x`` and ``y``.

Descriptors round-trip through JSON as ``{"kind": ..., "params": ...}``
with complex scalars written as ``[re, im]`` and vectors as length-7 lists.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np

from .algebra import E, cross, left_cross_matrix, norm
from .errors import BranchPoint, ConfigError, ConstraintViolated, NotInEquator

SQRT2 = np.sqrt(2.0)
TWO_PI = 2 * np.pi


class SphereMap:
    kind = "abstract"
    default_domain = (-1.0, 1.0, -1.0, 1.0)

    def partial(self, x, y, a: int, b: int) -> np.ndarray:
        raise NotImplementedError

    def value(self, x, y) -> np.ndarray:
        return self.partial(x, y, 0, 0)

    def dz(self, x, y, k: int) -> np.ndarray:
        """d^k phi / dz^k with d/dz = (d/dx - i d/dy) / 2."""
        out = 0
        for j in range(k + 1):
            out = out + comb(k, j) * (-1j) ** j * self.partial(x, y, k - j, j)
        return out / 2 ** k

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def __repr__(self):
        return f"{type(self).__name__}({self.params()!r})"


class ExpSumMap(SphereMap):
    """phi(x, y) = sum_t c_t exp(p_t x + q_t y), real by construction.

    Conjugate terms must be listed explicitly; the real part is taken and
    the discarded imaginary part is only rounding noise for valid input.
    """

    kind = "exp_sum"

    def __init__(self, coefs, px, py, domain=None):
        self.coefs = np.asarray(coefs, dtype=complex).reshape(-1, 7)
        self.px = np.asarray(px, dtype=complex).reshape(-1)
        self.py = np.asarray(py, dtype=complex).reshape(-1)
        if not len(self.coefs) == len(self.px) == len(self.py):
            raise ConfigError("exp_sum: coefs, px, py must have equal length")
        if domain is not None:
            self.default_domain = tuple(float(t) for t in domain)

    def _sum(self, x, y, factors):
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        ex = np.exp(self.px * x + self.py * y) * factors
        return ex @ self.coefs

    def partial(self, x, y, a, b):
        return self._sum(x, y, self.px ** a * self.py ** b).real

    def dz(self, x, y, k):
        return self._sum(x, y, ((self.px - 1j * self.py) / 2) ** k)

    def params(self):
        return {
            "coefs": [complex_vec_to_json(c) for c in self.coefs],
            "px": [complex_to_json(p) for p in self.px],
            "py": [complex_to_json(q) for q in self.py],
            "domain": list(self.default_domain),
        }


def _torus_terms(k1: int, k2: int, k3: int, k4: int):
    """Exponential terms of (cos x e_k1 + sin x e_k2 + cos y e_k3 + sin y e_k4)/sqrt 2."""
    c = 1 / (2 * SQRT2)
    coefs = [
        c * (E[k1 - 1] - 1j * E[k2 - 1]), c * (E[k1 - 1] + 1j * E[k2 - 1]),
        c * (E[k3 - 1] - 1j * E[k4 - 1]), c * (E[k3 - 1] + 1j * E[k4 - 1]),
    ]
    return coefs, [1j, -1j, 0, 0], [0, 0, 1j, -1j]


class CliffordTorus(ExpSumMap):
    def __init__(self):
        super().__init__(*self.terms)
        self.default_domain = (0.0, TWO_PI, 0.0, TWO_PI)

    def params(self):
        return {}


class CliffordCoassoc(CliffordTorus):
    """Clifford torus in S^6 intersected with span{e4, e5, e6, e7}."""

    kind = "clifford_coassoc"
    terms = _torus_terms(4, 5, 6, 7)
    plane = (4, 5, 6, 7)

    @staticmethod
    def closed_form_F(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        F = np.zeros(x.shape + (7,))
        F[..., 0] = -(x + y)
        F[..., 1] = -np.cos(x - y)
        F[..., 2] = np.sin(x - y)
        return F / 2


class CliffordW1234(CliffordTorus):
    """Clifford torus in S^6 intersected with span{e1, e2, e3, e4}."""

    kind = "clifford_w1234"
    terms = _torus_terms(1, 2, 3, 4)
    plane = (1, 2, 3, 4)

    @staticmethod
    def closed_form_F(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        F = np.zeros(x.shape + (7,))
        F[..., 0] = np.cos(x) * np.sin(y)
        F[..., 1] = np.sin(x) * np.sin(y)
        F[..., 2] = -y
        F[..., 4] = np.sin(x) * np.cos(y)
        F[..., 5] = -np.cos(x) * np.cos(y)
        F[..., 6] = x
        return F / 2


def clifford_coassoc() -> CliffordCoassoc:
    return CliffordCoassoc()


def clifford_w1234() -> CliffordW1234:
    return CliffordW1234()


# --- flat minimal tori: sums of three exponentials --------------------------------

TREX_MU = np.exp(2j * np.pi * np.arange(3) / 3)


def trex_vectors(phase: float = np.pi / 6) -> np.ndarray:
    """(1/(2 sqrt 3)) e^{i phase} (e_k + i e_{k+4}), k = 1, 2, 3."""
    v = np.array([E[k] + 1j * E[k + 4] for k in range(3)])
    return v * np.exp(1j * phase) / (2 * np.sqrt(3))


def flat_constraint_residuals(mu, v) -> dict[str, float]:
    mu = np.asarray(mu, dtype=complex)
    v = np.asarray(v, dtype=complex)
    vv = v @ v.T
    vvbar = v @ v.conj().T
    off = ~np.eye(3, dtype=bool)
    diag = np.real(np.diag(vvbar))
    pm = np.concatenate([mu, -mu])
    gaps = np.abs(pm[:, None] - pm[None, :])[~np.eye(6, dtype=bool)]
    return {
        "unit_mu": float(np.max(np.abs(np.abs(mu) - 1))),
        "distinct_mu": float(max(0.0, 1e-6 - gaps.min())),
        "v_dot_v": float(np.max(np.abs(vv))),
        "v_dot_vbar_offdiag": float(np.max(np.abs(vvbar[off]))),
        "sum_v_dot_vbar": float(abs(diag.sum() - 0.5)),
        "sum_mu2_v_dot_vbar": float(abs(np.sum(mu ** 2 * diag))),
    }


class FlatExponential(ExpSumMap):
    """phi(z) = sum_k v_k e^{mu_k z - conj(mu_k) conj(z)} + conjugate."""

    kind = "flat_exponential"

    def __init__(self, mu, v, tol: float = 1e-10, samples: int = 1000, seed: int = 0):
        mu = np.asarray(mu, dtype=complex).reshape(3)
        v = np.asarray(v, dtype=complex).reshape(3, 7)
        res = flat_constraint_residuals(mu, v)
        failed = [k for k, r in res.items() if r > tol]
        if failed:
            detail = ", ".join(f"{k}={res[k]:.3e}" for k in failed)
            raise ConstraintViolated(f"flat_exponential constraints violated: {detail}")
        if np.any(np.linalg.norm(v, axis=1) < tol):
            raise ConstraintViolated("flat_exponential: v_k must be nonzero")
        self.mu, self.v = mu, v
        # mu z - conj(mu) conj(z) = 2i Im(mu) x + 2i Re(mu) y
        px = 2j * mu.imag
        py = 2j * mu.real
        super().__init__(np.concatenate([v, v.conj()]), np.concatenate([px, -px]),
                         np.concatenate([py, -py]))
        self.constraint_residuals = res
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-10, 10, (2, samples))
        dev = np.max(np.abs(np.linalg.norm(self.value(*pts), axis=-1) - 1))
        if dev > 1e-8:
            raise ConstraintViolated(f"flat_exponential: |phi| deviates from 1 by {dev:.3e}")

    def params(self):
        return {"mu": [complex_to_json(m) for m in self.mu],
                "v": [complex_vec_to_json(vk) for vk in self.v]}

    def shifted_F(self, vtilde) -> ExpSumMap:
        """Map of the same exponential shape with coefficient vectors ``vtilde``."""
        vt = np.asarray(vtilde, dtype=complex)
        return ExpSumMap(np.concatenate([vt, vt.conj()]), self.px, self.py)


def flat_exponential(mu, v, **kw) -> FlatExponential:
    return FlatExponential(mu, v, **kw)


def trex() -> FlatExponential:
    return FlatExponential(TREX_MU, trex_vectors())


def trex_closed_form_F(x, y) -> np.ndarray:
    """Associated surface of the trex map, in the same exponential form with
    v~_k = (1/(2 sqrt 3)) e^{2 pi i/3} (e_k + i e_{k+4})."""
    m = trex()
    return m.shifted_F(trex_vectors(2 * np.pi / 3)).value(x, y)


def trex_parallel_map(sign: int = 1) -> ExpSumMap:
    """F+- / sqrt 2 for the trex map, centred so that it is S^6-valued."""
    m = trex()
    c = (trex_vectors(2 * np.pi / 3) + sign * m.v) / np.sqrt(2)
    return ExpSumMap(np.concatenate([c, c.conj()]), m.px, m.py)


# --- totally geodesic sphere ---------------------------------------------------


@lru_cache(maxsize=None)
def _stereo_partial(a: int, b: int):
    import sympy as sp

    x, y = sp.symbols("x y", real=True)
    r2 = x ** 2 + y ** 2
    # orientation chosen so that phi_x x phi_y = +phi: an almost complex curve
    comps = [2 * x / (1 + r2), -2 * y / (1 + r2), (r2 - 1) / (1 + r2)]
    exprs = [sp.diff(c, x, a, y, b) for c in comps]
    return sp.lambdify((x, y), exprs, "numpy")


class TotallyGeodesicS2(SphereMap):
    """Inverse stereographic chart of the unit sphere in span{e1, e2, e3}."""

    kind = "totally_geodesic_s2"

    def partial(self, x, y, a, b):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        comps = _stereo_partial(a, b)(x, y)
        out = np.zeros(x.shape + (7,))
        for i, c in enumerate(comps):
            out[..., i] = c
        return out


def totally_geodesic_s2() -> TotallyGeodesicS2:
    return TotallyGeodesicS2()


# --- transformations -------------------------------------------------------------


def rotation_matrix(v, beta: float) -> np.ndarray:
    """R_v(beta): fixes v, acts as cos(beta) x + sin(beta) v x x on v-perp."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1) > 1e-10:
        raise ConfigError("rotation axis must be a unit vector")
    P = np.outer(v, v)
    return P + np.cos(beta) * (np.eye(7) - P) + np.sin(beta) * left_cross_matrix(v)


class RotatedMap(SphereMap):
    kind = "rotated"

    def __init__(self, inner: SphereMap, v, beta: float, samples: int = 256, seed: int = 0):
        self.inner = inner
        self.v = np.asarray(v, dtype=float)
        self.beta = float(beta)
        self.R = rotation_matrix(self.v, self.beta)
        self.default_domain = inner.default_domain
        x0, x1, y0, y1 = inner.default_domain
        rng = np.random.default_rng(seed)
        pts = inner.value(rng.uniform(x0, x1, samples), rng.uniform(y0, y1, samples))
        off = np.max(np.abs(pts @ self.v))
        if off > 1e-8:
            raise NotInEquator(f"inner map leaves the hyperplane orthogonal to v (|phi.v| = {off:.3e})")

    def partial(self, x, y, a, b):
        return self.inner.partial(x, y, a, b) @ self.R.T

    def dz(self, x, y, k):
        return self.inner.dz(x, y, k) @ self.R.T

    def params(self):
        return {"inner": self.inner.to_dict(), "v": self.v.tolist(), "beta": self.beta}


def rotate_map(inner: SphereMap, v, beta: float) -> RotatedMap:
    return RotatedMap(inner, v, beta)


class FlippedMap(SphereMap):
    """Orientation reversal phi(x, -y), i.e. z -> conj(z)."""

    kind = "flipped"

    def __init__(self, inner: SphereMap):
        self.inner = inner
        x0, x1, y0, y1 = inner.default_domain
        self.default_domain = (x0, x1, -y1, -y0)

    def partial(self, x, y, a, b):
        return (-1) ** b * self.inner.partial(x, -np.asarray(y, float), a, b)

    def dz(self, x, y, k):
        return np.conj(self.inner.dz(x, -np.asarray(y, float), k))

    def params(self):
        return {"inner": self.inner.to_dict()}


def flip_orientation(inner: SphereMap) -> FlippedMap:
    return FlippedMap(inner)


def sphere_residual(m: SphereMap, samples: int = 256, seed: int = 0) -> float:
    x0, x1, y0, y1 = m.default_domain
    rng = np.random.default_rng(seed)
    p = m.value(rng.uniform(x0, x1, samples), rng.uniform(y0, y1, samples))
    return float(np.max(np.abs(np.linalg.norm(p, axis=-1) - 1)))


def almost_complex_residual(f0, f1) -> np.ndarray:
    """|i phi_z - phi x phi_z| / |phi_z|; zero exactly for almost complex curves."""
    n = norm(f1)
    if np.any(n < 1e-8):
        raise BranchPoint("phi_z vanishes; almost complex residual undefined")
    return norm(1j * f1 - cross(f0, f1)) / n


# --- JSON ------------------------------------------------------------------------


def complex_to_json(c) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def complex_from_json(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    re, im = p
    return complex(re, im)


def complex_vec_to_json(v) -> list[list[float]]:
    return [complex_to_json(c) for c in np.asarray(v)]


def complex_vec_from_json(v) -> np.ndarray:
    if len(v) != 7:
        raise ConfigError(f"vectors must have 7 entries, got {len(v)}")
    return np.array([complex_from_json(c) for c in v])


PRESETS = {
    "clifford_coassoc": clifford_coassoc,
    "clifford_w1234": clifford_w1234,
    "trex": trex,
    "totally_geodesic_s2": totally_geodesic_s2,
}


def from_dict(d: dict) -> SphereMap:
    try:
        kind = d["kind"]
        p = d.get("params", {}) or {}
        if kind in ("clifford_coassoc", "clifford_w1234", "totally_geodesic_s2"):
            return PRESETS[kind]()
        if kind == "trex":
            return trex()
        if kind == "flat_exponential":
            return FlatExponential([complex_from_json(m) for m in p["mu"]],
                                   [complex_vec_from_json(v) for v in p["v"]])
        if kind == "rotated":
            return RotatedMap(from_dict(p["inner"]), np.asarray(p["v"], float), float(p["beta"]))
        if kind == "flipped":
            return FlippedMap(from_dict(p["inner"]))
        if kind == "exp_sum":
            m = ExpSumMap([complex_vec_from_json(c) for c in p["coefs"]],
                          [complex_from_json(t) for t in p["px"]],
                          [complex_from_json(t) for t in p["py"]],
                          domain=p.get("domain"))
            dev = sphere_residual(m)
            if dev > 1e-8:
                raise ConstraintViolated(f"exp_sum map is not sphere-valued (max ||phi| - 1| = {dev:.3e})")
            return m
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed map descriptor: {exc!r}") from exc
    raise ConfigError(f"unknown map kind {d.get('kind')!r}")


def non_harmonic_example() -> ExpSumMap:
    """(cos x, sin x cos 2y, sin x sin 2y): sphere-valued but not harmonic."""
    e1, e2, e3 = E[0], E[1], E[2]
    coefs, px, py = [e1 / 2, e1 / 2], [1j, -1j], [0, 0]
    for sx in (1, -1):
        for sy in (1, -1):
            # sin x = (e^{ix} - e^{-ix}) / 2i ; cos 2y = (e^{2iy}+e^{-2iy})/2 ; sin 2y = (e^{2iy}-e^{-2iy})/2i
            c_sin = sx / 2j
            coefs.append(c_sin * (e2 / 2 + sy * e3 / 2j))
            px.append(sx * 1j)
            py.append(sy * 2j)
    return ExpSumMap(coefs, px, py, domain=(0.2, 1.2, 0.0, 1.0))
