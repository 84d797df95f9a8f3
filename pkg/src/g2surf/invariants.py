"""Extrinsic invariants of F and the residuals that classify it.

Every residual is divided by the product of the norms of its factors, so
thresholds are scale free. Residuals are pointwise arrays; ``classify``
reduces them to maxima over the unmasked grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import planes
from .algebra import cross, dot, herm, norm
from .errors import AssociativePoint, DegenerateFrame, NotConformal, NotImmersion
from .jets import (
    EllipseKind,
    HarmonicFrame,
    MapJet,
    ellipse_class,
    isotropy_order,
    kahler_angle,
    kahler_constancy_residual,
    sequence_span,
)
from .stencils import laplacian

SCHEMA_VERSION = "g2surf.report/1"


@dataclass(frozen=True)
class TolProfile:
    classify: float = 1e-5
    conformal: float = 1e-8
    zero_section: float = 1e-6
    isotropy: float = 1e-6
    planes: float = 1e-8
    name: str = "analytic"

    @classmethod
    def for_mode(cls, mode: str, h: float | None = None) -> "TolProfile":
        if mode == "analytic":
            return cls()
        t = 100 * h * h
        return cls(classify=t, conformal=t, zero_section=t, isotropy=t, planes=t, name=f"fd(h={h:g})")

    def scaled(self, factor: float) -> "TolProfile":
        return TolProfile(self.classify * factor, self.conformal * factor, self.zero_section * factor,
                          self.isotropy * factor, self.planes * factor, f"{self.name}x{factor:g}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# --- fundamental forms ----------------------------------------------------------------


@dataclass
class FundForms:
    I: np.ndarray  # (..., 2, 2)
    II: list  # one (..., 2, 2) array per normal


def fundamental_forms(jet: MapJet, normals) -> FundForms:
    """First fundamental form and the second fundamental form along each normal.

    I   = [[|phi_y|^2, -phi_x.phi_y], [-phi_x.phi_y, |phi_x|^2]]
    II^N = [[(phi_x x phi_y + phi x phi_xy).N, (phi x phi_yy).N],
            [(phi x phi_yy).N, (phi_x x phi_y - phi x phi_xy).N]]
    """
    phi, px, py = jet.f0, jet.d[1, 0], jet.d[0, 1]
    pxy, pyy = jet.d[1, 1], jet.d[0, 2]
    g = -dot(px, py)
    I = np.stack([np.stack([dot(py, py), g], -1), np.stack([g, dot(px, px)], -1)], -2)
    det = np.linalg.det(I)
    if np.any(det <= 1e-12):
        raise NotImmersion(f"first fundamental form degenerates (min det {np.min(det):.3e})")
    cxy = cross(px, py)
    a = cross(phi, pxy)
    b = cross(phi, pyy)
    II = []
    for N in normals:
        N = np.asarray(N)
        c, s, t = dot(cxy, N), dot(a, N), dot(b, N)
        II.append(np.stack([np.stack([c + s, t], -1), np.stack([t, c - s], -1)], -2))
    return FundForms(I, II)


def tangent_basis(jet: MapJet):
    phi = jet.f0
    return cross(phi, jet.d[0, 1]), -cross(phi, jet.d[1, 0])


def normal_part(v, jet: MapJet) -> np.ndarray:
    """Component of v orthogonal to TF = span{F_x, F_y} (conformal F)."""
    Fx, Fy = tangent_basis(jet)
    nx, ny = dot(Fx, Fx), dot(Fy, Fy)
    return v - (dot(v, Fx) / nx)[..., None] * Fx - (dot(v, Fy) / ny)[..., None] * Fy


def mean_curvature_from_forms(jet: MapJet) -> np.ndarray:
    """h = 1/2 tr(I^-1 II) with the second derivatives of F projected to the normal space."""
    phi, px, py = jet.f0, jet.d[1, 0], jet.d[0, 1]
    cxy = cross(px, py)
    a = cross(phi, jet.d[1, 1])
    b = cross(phi, jet.d[0, 2])
    Fxx, Fxy, Fyy = cxy + a, b, cxy - a
    ff = fundamental_forms(jet, [])
    inv = np.linalg.inv(ff.I)
    tr = inv[..., 0, 0, None] * Fxx + 2 * inv[..., 0, 1, None] * Fxy + inv[..., 1, 1, None] * Fyy
    return 0.5 * normal_part(tr, jet)


def umbilicity_residual(jet: MapJet, N) -> np.ndarray:
    """|II^N - lambda I| / |I| with lambda the best scalar, pointwise."""
    ff = fundamental_forms(jet, [N])
    I, II = ff.I, ff.II[0]
    lam = np.einsum("...ij,...ij->...", II, I) / np.einsum("...ij,...ij->...", I, I)
    r = II - lam[..., None, None] * I
    return np.linalg.norm(r, axis=(-2, -1)) / np.linalg.norm(I, axis=(-2, -1))


# --- mean curvature and curvature -------------------------------------------------------


def mean_curvature(frame: HarmonicFrame, jet: MapJet | None = None, tol: float = 1e-8):
    """h_F = i f_1 x f_{-1}; returns (h, imaginary residual, gap to e^{-2 alpha} phi_x x phi_y)."""
    keep = ~frame.mask
    conf = frame.conformality_residual[keep]
    if conf.size and np.max(conf) > tol:
        raise NotConformal(f"|f1.f1|/|f1|^2 reaches {np.max(conf):.3e}")
    h = 1j * cross(frame.f[1], frame.f[-1])
    imag = float(np.max(np.abs(h.imag)[keep])) if keep.any() else 0.0
    gap = None
    if jet is not None:
        px, py = jet.d[1, 0], jet.d[0, 1]
        real = cross(px, py) / dot(px, px)[..., None]
        gap = float(np.max(np.abs(h.real - real)[keep]))
    return h.real, imag, gap


def gauss_curvature(frame: HarmonicFrame, hx: float, hy: float) -> np.ndarray:
    """K = -e^{-2 alpha} Laplacian(alpha) with the Laplacian by grid stencils."""
    a = frame.alpha
    K = -np.exp(-2 * a) * laplacian(a, hx, hy)
    return np.where(frame.mask, np.nan, K)


# --- classification residuals ----------------------------------------------------------


def classification_residuals(frame: HarmonicFrame, zero_tol: float = 1e-6) -> dict:
    """Pointwise, normalized residuals of the surface-class conditions.

    pseudo_umbilical   ((f2 x f-1) x f1) . f0
    parallel_h         part of f2 x f-1 Hermitian-orthogonal to f0 x f-1
    min_hypersphere    f2 x f-1
    isotropic_surface  max(pseudo_umbilical, f2 . f2)
    b_component        f2 x f-1 against f0 x f1 (identically zero)
    g_isotropy         (f2 x f-1) . (f2 x f-1) (identically zero)

    Where |f2| / |f1|^2 < ``zero_tol`` the sequence has terminated, f2 is
    the zero section and every condition holds trivially.
    """
    f0, f1, fm1, f2 = frame.f[0], frame.f[1], frame.f[-1], frame.f[2]
    if np.all(frame.mask):
        raise DegenerateFrame("every point is a branch point")
    n1, nm1, n2 = norm(f1), norm(fm1), norm(f2)
    safe1 = np.where(n1 > 0, n1, 1)
    zero = (n2 / safe1 ** 2) < zero_tol
    den = np.where(zero, 1.0, n2 * nm1)
    g = cross(f2, fm1)
    u = cross(f0, fm1)
    w = cross(f0, f1)
    uu = np.real(herm(u, u))
    perp = g - (herm(g, u) / np.where(uu > 0, uu, 1))[..., None] * u
    out = {
        "pseudo_umbilical": np.abs(dot(cross(g, f1), f0)) / (den * np.where(zero, 1, n1)),
        "parallel_h": norm(perp) / den,
        "min_hypersphere": norm(g) / den,
        "b_component": np.abs(herm(g, w)) / (den * np.where(norm(w) > 0, norm(w), 1)),
        "g_isotropy": np.abs(dot(g, g)) / den ** 2,
    }
    f2_iso = np.abs(dot(f2, f2)) / np.where(zero, 1.0, n2 ** 2)
    for k in out:
        out[k] = np.where(zero, 0.0, out[k])
    out["f2_isotropy"] = np.where(zero, 0.0, f2_iso)
    out["isotropic_surface"] = np.maximum(out["pseudo_umbilical"], out["f2_isotropy"])
    out["f2_zero"] = zero
    return out


def phixh_constancy(frame: HarmonicFrame):
    """Max deviation of phi x h_F from its grid mean, and that mean."""
    keep = ~frame.mask
    h = np.real(1j * cross(frame.f[1], frame.f[-1]))
    v = cross(np.real(frame.f[0]), h)[keep]
    mean = v.mean(axis=0)
    return float(np.max(np.linalg.norm(v - mean, axis=-1))), mean


# --- parallel surfaces -------------------------------------------------------------------


def parallel_invariants(frame: HarmonicFrame, jet: MapJet | None = None, signs=(1, -1),
                        lap: np.ndarray | None = None, eps: float = 1e-8) -> dict:
    """Mean curvature of F+- from the frame, cross-checked against the real formula.

    h+- = (i f1 x f-1 -+ f0) / (2 -+ 2i f0.(f1 x f-1))
    real: e^{-2 omega+-} (phi_x x phi_y +- Laplacian(phi)/2),
          e^{2 omega+-} = 2(|phi_x|^2 -+ phi.(phi_x x phi_y))
    ``lap`` overrides the Laplacian taken from the jet, e.g. with a grid
    stencil Laplacian.
    """
    keep = ~frame.mask
    f0 = frame.f[0]
    c = dot(f0, cross(frame.f[1], frame.f[-1]))
    hF = 1j * cross(frame.f[1], frame.f[-1])
    out = {}
    for s in signs:
        den = 2 - s * 2j * c
        if np.min(np.abs(den)[keep]) < eps:
            raise AssociativePoint(f"F{'+' if s > 0 else '-'}: phi + T phi is associative somewhere")
        hpm = (hF - s * f0) / den[..., None]
        rec = {
            "h": hpm.real,
            "imag_residual": float(np.max(np.abs(hpm.imag)[keep])),
            "norm": norm(hpm.real),
            "dot_phi": dot(hpm.real, np.real(f0)),
        }
        if jet is not None:
            px, py = jet.d[1, 0], jet.d[0, 1]
            L = jet.laplacian() if lap is None else lap
            cxy = cross(px, py)
            conf = 2 * (dot(px, px) - s * dot(jet.f0, cxy))
            real = (cxy + s * L / 2) / conf[..., None]
            rec["real_formula"] = real
            rec["formula_gap"] = float(np.max(np.abs(real - hpm.real)[keep]))
        out["+" if s > 0 else "-"] = rec
    return out


# --- ellipse of curvature of F --------------------------------------------------------------


def ellipse_from_forms(jet: MapJet, tol: float = 1e-6):
    """Degeneracy type of the ellipse of curvature of F from its two half-axes vectors.

    A = e^{-2a} P(phi x phi_xy), B = e^{-2a} P(phi x phi_yy), P = normal projection.
    point: A = B = 0; circle: |A| = |B|, A.B = 0; segment: A parallel to B.
    """
    phi = jet.f0
    e2a = dot(jet.d[1, 0], jet.d[1, 0])[..., None]
    A = normal_part(cross(phi, jet.d[1, 1]), jet) / e2a
    B = normal_part(cross(phi, jet.d[0, 2]), jet) / e2a
    aa, bb, ab = dot(A, A), dot(B, B), dot(A, B)
    scale = aa + bb
    size = float(np.max(np.sqrt(scale)))
    if size < tol:
        return EllipseKind.POINT, {"size": size}
    s = np.where(scale > 0, scale, 1)
    circ = float(np.max(np.maximum(np.abs(aa - bb), 2 * np.abs(ab)) / s))
    line = float(np.max(np.sqrt(np.clip(aa * bb - ab ** 2, 0, None)) / s))
    info = {"size": size, "circle_residual": circ, "segment_residual": line}
    if circ < tol:
        return EllipseKind.CIRCLE, info
    if line < tol:
        return EllipseKind.LINE, info
    return EllipseKind.GENERIC, info


# --- report -----------------------------------------------------------------------------------


class Verdict(str, Enum):
    MINIMAL_IN_HYPERSPHERE = "minimal_in_hypersphere"
    PARALLEL_MEAN_CURVATURE = "parallel_mean_curvature"
    PSEUDO_UMBILICAL_NONPARALLEL = "pseudo_umbilical_nonparallel"
    ISOTROPIC_SURFACE = "isotropic_surface"
    GENERIC = "generic"


@dataclass
class ClassReport:
    verdict: Verdict
    isotropic_surface: bool
    aggregates: dict
    cross_checks: dict
    tolerances: dict
    grid: dict
    pointwise: dict = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        out = [self.verdict.value]
        if self.isotropic_surface:
            out.append(Verdict.ISOTROPIC_SURFACE.value)
        return out

    def to_dict(self, pointwise: bool = False) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "verdict": self.verdict.value,
            "labels": self.labels,
            "isotropic_surface": self.isotropic_surface,
            "aggregates": self.aggregates,
            "cross_checks": self.cross_checks,
            "tolerances": self.tolerances,
            "grid": self.grid,
        }
        if pointwise:
            d["pointwise"] = {k: np.asarray(v).tolist() for k, v in self.pointwise.items()}
        return d


def _max(a, keep):
    a = np.asarray(a)[keep]
    return float(np.nanmax(a)) if a.size else 0.0


def _center_index(mask):
    N, M = mask.shape
    idx = np.argwhere(~mask)
    c = np.array([N // 2, M // 2])
    return tuple(idx[np.argmin(np.abs(idx - c).sum(axis=1))])


def span_constancy(frame: HarmonicFrame, upto: int, tol: float, stride: int = 8):
    """Reference span at the grid centre and the max deviation of spans elsewhere."""
    keep = ~frame.mask
    ref = sequence_span(frame, upto, _center_index(frame.mask), tol=max(tol, 1e-9))
    worst = 0.0
    N, M = keep.shape
    for i in range(0, N, stride):
        for j in range(0, M, stride):
            if not keep[i, j]:
                continue
            W = sequence_span(frame, upto, (i, j), tol=max(tol, 1e-9))
            worst = max(worst, float(np.max(ref.outside(W.basis))))
    return ref, worst


def classify(grid, profile: TolProfile | None = None, pointwise: bool = False) -> ClassReport:
    """Residual fields, aggregates and the verdict for a sampled grid.

    Decision order: min_hypersphere, then parallel_h (cross-checked: the
    span of phi, phi_{+-1}, phi_2 is coassociative), then pseudo_umbilical
    (cross-checked: that span admits a cross-compatible split). The
    isotropic-surface flag is independent of the verdict.
    """
    frame = grid.frame
    profile = profile or TolProfile.for_mode(grid.mode, grid.jet.step or grid.h)
    tol = profile.classify
    keep = ~frame.mask
    res = classification_residuals(frame, profile.zero_section)
    hF, h_imag, h_gap = mean_curvature(frame, grid.jet, tol=profile.conformal)
    theta, theta_imag = kahler_angle(frame, tol=profile.conformal)
    K = gauss_curvature(frame, grid.hx, grid.hy)
    phixh, v = phixh_constancy(frame)
    iso = isotropy_order(frame, r_max=min(4, frame.top), tol=profile.isotropy)
    ell = ellipse_class(frame, tol=profile.zero_section)
    hnorm = norm(hF)

    agg = {k: _max(res[k], keep) for k in
           ("pseudo_umbilical", "parallel_h", "min_hypersphere", "isotropic_surface",
            "b_component", "g_isotropy", "f2_isotropy")}
    agg.update({f"{k}_mean": float(np.mean(res[k][keep])) for k in
                ("pseudo_umbilical", "parallel_h", "min_hypersphere", "isotropic_surface")})
    agg.update(
        mean_curvature_norm_dev=_max(np.abs(hnorm - 1), keep),
        mean_curvature_imag=h_imag,
        mean_curvature_formula_gap=h_gap,
        kahler_theta_min=float(np.min(theta[keep])),
        kahler_theta_max=float(np.max(theta[keep])),
        kahler_imag=_max(theta_imag, keep),
        kahler_constancy=kahler_constancy_residual(frame),
        gauss_curvature_min=float(np.nanmin(K[keep])),
        gauss_curvature_max=float(np.nanmax(K[keep])),
        phixh_constancy=phixh,
        phixh_mean=v.tolist(),
        conformality=_max(frame.conformality_residual, keep),
        isotropy_order=str(iso),
        ellipse=ell.kind.value,
        ellipse_residual_isotropy=ell.residual_isotropy,
        ellipse_residual_real=ell.residual_real,
    )
    agg.update({k: v for k, v in grid.residuals.items() if not isinstance(v, str)})

    if agg["min_hypersphere"] < tol:
        verdict = Verdict.MINIMAL_IN_HYPERSPHERE
    elif agg["parallel_h"] < tol:
        verdict = Verdict.PARALLEL_MEAN_CURVATURE
    elif agg["pseudo_umbilical"] < tol:
        verdict = Verdict.PSEUDO_UMBILICAL_NONPARALLEL
    else:
        verdict = Verdict.GENERIC
    iso_surface = agg["isotropic_surface"] < tol

    checks = {}
    W, drift = span_constancy(frame, 2, profile.zero_section)
    checks["sequence_span_dim"] = W.dim
    checks["sequence_span_drift"] = drift
    checks["sequence_span_basis"] = W.basis.tolist()
    if W.dim == 4:
        checks["coassociative"] = planes.is_coassociative(W, max(profile.planes, 1e-8)).to_dict()
        checks["admits_cross_compatible"] = planes.admits_cross_compatible(
            W, max(profile.planes, 1e-8)).to_dict()
    if verdict is Verdict.PARALLEL_MEAN_CURVATURE:
        checks["consistent"] = W.dim == 4 and checks["coassociative"]["label"] == "coassociative"
    elif verdict is Verdict.PSEUDO_UMBILICAL_NONPARALLEL:
        checks["consistent"] = W.dim == 4 and checks["admits_cross_compatible"]["label"] == "cross_compatible"
        if W.dim == 5:
            checks["note"] = "sequence spans a 5-space; the S^4 cases are not classified further"

    report = ClassReport(
        verdict, bool(iso_surface), agg, checks, profile.to_dict(),
        {"domain": list(grid.domain), "shape": list(grid.shape), "mode": grid.mode,
         "masked_points": int(frame.mask.sum()), "map": grid.map_descriptor},
    )
    if pointwise:
        report.pointwise = {k: v for k, v in res.items() if k != "f2_zero"}
        report.pointwise.update(theta=theta, gauss_curvature=K, mean_curvature=hF)
    return report
