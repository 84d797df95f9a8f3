"""The associated surface F (dF = phi x *dphi) and the parallel surfaces F +- phi.

Everything lives on a rectangular (N, M) grid with index [i, j] at
(x_i, y_j). F is fixed by F(x0, y0) = 0.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .algebra import cross, dot
from .errors import ConfigError, DegenerateParallel, NotClosed
from .jets import HarmonicFrame, MapJet, frame_at, frame_from_jet, jet_at
from .stencils import diff, laplacian

SCHEMA_VERSION = "g2surf.grid/1"
MIN_GRID = 17


@dataclass
class SurfaceGrid:
    domain: tuple
    xs: np.ndarray
    ys: np.ndarray
    jet: MapJet
    frame: HarmonicFrame
    mode: str
    map_descriptor: dict | None = None
    Fx: np.ndarray | None = None
    Fy: np.ndarray | None = None
    F: np.ndarray | None = None
    Fplus: np.ndarray | None = None
    Fminus: np.ndarray | None = None
    conf_plus: np.ndarray | None = None
    conf_minus: np.ndarray | None = None
    residuals: dict = field(default_factory=dict)

    @property
    def shape(self):
        return len(self.xs), len(self.ys)

    @property
    def hx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def hy(self) -> float:
        return float(self.ys[1] - self.ys[0])

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def phi(self) -> np.ndarray:
        return self.jet.f0

    @property
    def mask(self) -> np.ndarray:
        return self.frame.mask

    def mesh(self):
        return np.meshgrid(self.xs, self.ys, indexing="ij")


def _check_domain(domain, shape):
    x0, x1, y0, y1 = (float(t) for t in domain)
    if not (x1 > x0 and y1 > y0):
        raise ConfigError(f"degenerate domain {domain}")
    N, M = shape
    if N < MIN_GRID or M < MIN_GRID:
        raise ConfigError(f"grid must be at least {MIN_GRID} x {MIN_GRID}, got {N} x {M}")
    return (x0, x1, y0, y1), (int(N), int(M))


def ghost_width(kmax: int) -> int:
    # each nested first-derivative pass of the frame recursion reaches 2 nodes out
    return 2 * (kmax - 1)


def sample(m, domain=None, shape=(129, 129), mode: str = "analytic", h: float = 1e-2,
           kmax: int = 4, ghost: bool = True) -> SurfaceGrid:
    """Sample a map on a grid: jets, frames and the one-form.

    ``mode="analytic"`` uses exact jets and the Gram-Schmidt frame;
    ``mode="fd"`` uses finite-difference jets with step ``h`` and the grid
    recursion for the frame. With ``ghost`` the fd frame is built on a grid
    padded by a few nodes on every side and then cropped, so each nested
    derivative is central; pass ``ghost=False`` when the map is not
    defined outside the domain.
    """
    domain, shape = _check_domain(m.default_domain if domain is None else domain, shape)
    xs = np.linspace(domain[0], domain[1], shape[0])
    ys = np.linspace(domain[2], domain[3], shape[1])
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    p = ghost_width(kmax) if (mode != "analytic" and ghost) else 0
    xe = xs[0] + hx * np.arange(-p, shape[0] + p)
    ye = ys[0] + hy * np.arange(-p, shape[1] + p)
    X, Y = np.meshgrid(xe, ye, indexing="ij")
    jet = jet_at(m, X + 1j * Y, mode=mode, h=h, kmax=kmax)
    if mode == "analytic":
        frame = frame_from_jet(jet)
    else:
        frame = frame_at(jet, hx, hy, kmax=kmax)
    if p:
        key = (slice(p, -p), slice(p, -p))
        jet, frame = jet.crop(key), frame.crop(key)
        frame.extra["ghost"] = p
    grid = SurfaceGrid(domain, xs, ys, jet, frame, mode, m.to_dict())
    grid.Fx, grid.Fy = one_form(jet)
    return grid


def one_form(jet: MapJet):
    """Components of phi x *dphi: F_x = phi x phi_y, F_y = -phi x phi_x."""
    phi = jet.f0
    return cross(phi, jet.d[0, 1]), -cross(phi, jet.d[1, 0])


def _cumulative(f, h, axis, scheme):
    out = cumulative_trapezoid(f, dx=h, axis=axis, initial=0)
    if scheme == "trapezoid":
        return out
    if scheme != "corrected":
        raise ConfigError(f"unknown integration scheme {scheme!r}")
    # Euler-Maclaurin end correction: -(h^2/12) (f'(t) - f'(t0)), 4th order overall
    fp = diff(f, h, axis)
    fp0 = np.take(fp, [0], axis=axis)
    return out - h * h / 12 * (fp - fp0)


def integrate(Fx, Fy, hx, hy, scheme="corrected", order="yx"):
    """Path integral of (Fx, Fy) from the (0, 0) corner.

    order="yx": up the left edge in y, then along each row in x.
    order="xy": along the bottom edge in x, then up each column in y.
    """
    if order == "yx":
        edge = _cumulative(Fy[0], hy, 0, scheme)  # (M, 7)
        return edge[None] + _cumulative(Fx, hx, 0, scheme)
    edge = _cumulative(Fx[:, 0], hx, 0, scheme)  # (N, 7)
    return edge[:, None] + _cumulative(Fy, hy, 1, scheme)


def harmonicity_residual(grid: SurfaceGrid) -> float:
    """max |phi x Laplacian(phi)|; exact Laplacian for analytic jets, FD otherwise."""
    if grid.mode == "analytic":
        lap = grid.jet.laplacian()
    else:
        lap = laplacian(grid.phi, grid.hx, grid.hy)
    keep = ~grid.mask
    return float(np.max(np.linalg.norm(cross(grid.phi, lap), axis=-1)[keep]))


def closedness_residual(Fx, Fy, hx, hy) -> float:
    return float(np.max(np.linalg.norm(diff(Fx, hy, 1) - diff(Fy, hx, 0), axis=-1)))


def integrate_F(grid: SurfaceGrid, scheme: str = "corrected", check: bool = True) -> SurfaceGrid:
    """Integrate the one-form into F, with closedness and path-independence residuals.

    Raises NotClosed when max |d_y F_x - d_x F_y| exceeds 100 h^2.
    """
    hx, hy = grid.hx, grid.hy
    closed = closedness_residual(grid.Fx, grid.Fy, hx, hy)
    harm = harmonicity_residual(grid)
    tol = 100 * grid.h ** 2
    grid.residuals.update(closedness=closed, harmonicity=harm, closedness_tol=tol)
    if harm > tol:
        warnings.warn(f"map fails the harmonicity check: |phi x Lap phi| = {harm:.3e}", RuntimeWarning)
    if check and closed > tol:
        raise NotClosed(f"one-form not closed: residual {closed:.3e} > {tol:.3e}")
    F = integrate(grid.Fx, grid.Fy, hx, hy, scheme, "yx")
    G = integrate(grid.Fx, grid.Fy, hx, hy, scheme, "xy")
    grid.F = F
    grid.residuals["path"] = float(np.max(np.abs(F - G)))
    grid.residuals["scheme"] = scheme
    return grid


def reconstruction_residual(grid: SurfaceGrid) -> float:
    """max deviation between the FD derivatives of F and the one-form."""
    ex = diff(grid.F, grid.hx, 0) - grid.Fx
    ey = diff(grid.F, grid.hy, 1) - grid.Fy
    return float(max(np.abs(ex).max(), np.abs(ey).max()))


def parallel_conformal_factors(jet: MapJet):
    """e^{2 omega+-} = |phi_x|^2 + |phi_y|^2 -+ 2 phi . (phi_x x phi_y)."""
    px, py = jet.d[1, 0], jet.d[0, 1]
    base = dot(px, px) + dot(py, py)
    twist = 2 * dot(jet.f0, cross(px, py))
    return base - twist, base + twist


def parallel_surfaces(grid: SurfaceGrid, strict: bool = False, eps: float = 1e-8) -> SurfaceGrid:
    """Attach F+ = F + phi, F- = F - phi and their conformal factors.

    Where a conformal factor drops below ``eps`` the parallel surface is
    not immersed (phi is at an associative point); this is recorded in
    ``grid.residuals`` and raised only when ``strict``.
    """
    if grid.F is None:
        raise ConfigError("integrate_F must run before parallel_surfaces")
    grid.Fplus = grid.F + grid.phi
    grid.Fminus = grid.F - grid.phi
    grid.conf_plus, grid.conf_minus = parallel_conformal_factors(grid.jet)
    keep = ~grid.mask
    for name, c in (("plus", grid.conf_plus), ("minus", grid.conf_minus)):
        low = float(np.min(c[keep]))
        grid.residuals[f"min_conformal_{name}"] = low
        grid.residuals[f"degenerate_{name}"] = bool(low < eps)
        if strict and low < eps:
            raise DegenerateParallel(f"F{'+' if name == 'plus' else '-'} is not immersed (factor {low:.3e})")
    return grid


def synthesize(m, domain=None, shape=(129, 129), mode="analytic", h=1e-2,
               scheme="corrected", check=True) -> SurfaceGrid:
    grid = sample(m, domain, shape, mode, h)
    integrate_F(grid, scheme, check)
    parallel_surfaces(grid)
    return grid


def centered(F: np.ndarray, mask=None) -> np.ndarray:
    keep = np.ones(F.shape[:-1], bool) if mask is None else ~mask
    return F - F[keep].mean(axis=0)


# --- export -------------------------------------------------------------------------

CSV_COLUMNS = (["x", "y"] + [f"phi{k}" for k in range(1, 8)] + [f"F{k}" for k in range(1, 8)]
               + [f"Fplus{k}" for k in range(1, 8)] + [f"Fminus{k}" for k in range(1, 8)] + ["masked"])


def grid_csv(grid: SurfaceGrid) -> str:
    X, Y = grid.mesh()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["# schema_version", SCHEMA_VERSION])
    w.writerow(CSV_COLUMNS)
    fields = [grid.phi, grid.F, grid.Fplus, grid.Fminus]
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            row = [X[i, j], Y[i, j]]
            for f in fields:
                row.extend(f[i, j])
            w.writerow([repr(float(v)) for v in row] + [int(grid.mask[i, j])])
    return buf.getvalue()


def grid_summary(grid: SurfaceGrid) -> dict:
    res = {k: v for k, v in grid.residuals.items()}
    return {
        "schema_version": SCHEMA_VERSION,
        "map": grid.map_descriptor,
        "domain": list(grid.domain),
        "shape": list(grid.shape),
        "mode": grid.mode,
        "step": grid.jet.step,
        "masked_points": int(grid.mask.sum()),
        "residuals": res,
        "csv_columns": CSV_COLUMNS,
    }
