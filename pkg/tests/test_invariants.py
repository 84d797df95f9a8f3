import json
from dataclasses import replace

import numpy as np
import pytest

from g2surf import catalog
from g2surf.algebra import basis
from g2surf.errors import AssociativePoint, NotConformal, NotImmersion
from g2surf.jets import EllipseKind, ellipse_class, frame_from_jet, jet_at
from g2surf.invariants import (
    SCHEMA_VERSION,
    TolProfile,
    Verdict,
    classification_residuals,
    classify,
    ellipse_from_forms,
    fundamental_forms,
    gauss_curvature,
    mean_curvature,
    mean_curvature_from_forms,
    parallel_invariants,
    phixh_constancy,
    umbilicity_residual,
)
from g2surf.stencils import laplacian
from g2surf.surface import synthesize

e = {k: basis(k) for k in range(1, 8)}
rng = np.random.default_rng(7)
ZS = rng.uniform(0.1, 2 * np.pi, 20) + 1j * rng.uniform(0.1, 2 * np.pi, 20)
S2_ZS = rng.uniform(-0.8, 0.8, 20) + 1j * rng.uniform(-0.8, 0.8, 20)


def _jet(name, z=None):
    m = catalog.PRESETS[name]()
    z = (S2_ZS if name == "totally_geodesic_s2" else ZS) if z is None else z
    return jet_at(m, z)


# --- fundamental forms and mean curvature --------------------------------------------


@pytest.mark.parametrize("name", ["clifford_coassoc", "clifford_w1234"])
def test_clifford_first_form(name):
    I = fundamental_forms(_jet(name), []).I
    assert np.allclose(I, 0.5 * np.eye(2), atol=1e-14)


@pytest.mark.parametrize("name", list(catalog.PRESETS))
def test_trace_formula_matches_frame_mean_curvature(name):
    j = _jet(name)
    h, imag, gap = mean_curvature(frame_from_jet(j), j)
    assert imag < 1e-12
    assert gap < 1e-12
    assert np.max(np.abs(mean_curvature_from_forms(j) - h)) < 1e-10


@pytest.mark.parametrize("name", list(catalog.PRESETS))
def test_mean_curvature_is_unit(name):
    h, _, _ = mean_curvature(frame_from_jet(_jet(name)))
    assert np.max(np.abs(np.linalg.norm(h, axis=-1) - 1)) < 1e-12


def test_coassoc_mean_curvature_closed_form():
    j = _jet("clifford_coassoc")
    h, _, _ = mean_curvature(frame_from_jet(j))
    t = (j.x - j.y)[..., None]
    assert np.max(np.abs(h - (np.cos(t) * e[2] - np.sin(t) * e[3]))) < 1e-12


def test_s2_is_umbilical_along_every_normal():
    j = _jet("totally_geodesic_s2")
    # the image lies in span{e1, e2, e3}; phi and e4..e7 span the normal space
    for N in (j.f0, e[4], e[5], e[6], e[7]):
        assert np.max(umbilicity_residual(j, N)) < 1e-6


def test_clifford_is_not_umbilical():
    j = _jet("clifford_coassoc")
    h, _, _ = mean_curvature(frame_from_jet(j))
    # F is a cylinder: it bends along h in one direction only
    assert np.min(umbilicity_residual(j, h)) > 0.1


def test_not_immersion_at_constant_map():
    m = catalog.ExpSumMap([e[1]], [0.0], [0.0])
    with pytest.raises(NotImmersion):
        fundamental_forms(jet_at(m, ZS[:3]), [])


def test_non_conformal_frame_rejected():
    f = frame_from_jet(jet_at(catalog.non_harmonic_example(), np.array([0.5 + 0.3j])))
    with pytest.raises(NotConformal):
        mean_curvature(f)


@pytest.mark.parametrize("name, lo, hi", [
    ("clifford_coassoc", -1e-6, 1e-6),
    ("clifford_w1234", -1e-6, 1e-6),
    ("trex", -1e-6, 1e-6),
    ("totally_geodesic_s2", 1 - 1e-5, 1 + 1e-5),
])
def test_gauss_curvature(grids, name, lo, hi):
    g = grids[name]
    K = gauss_curvature(g.frame, g.hx, g.hy)[~g.mask]
    assert lo < K.min() and K.max() < hi


# --- classification residuals ------------------------------------------------------------


def _agg(name, key):
    r = classification_residuals(frame_from_jet(_jet(name)))
    return float(np.max(r[key]))


@pytest.mark.parametrize("name", list(catalog.PRESETS))
@pytest.mark.parametrize("key", ["b_component", "g_isotropy"])
def test_identically_vanishing_components(name, key):
    assert _agg(name, key) < 1e-8


@pytest.mark.parametrize("name, key, small", [
    ("clifford_coassoc", "parallel_h", True),
    ("clifford_coassoc", "pseudo_umbilical", False),
    ("clifford_coassoc", "min_hypersphere", False),
    ("clifford_w1234", "pseudo_umbilical", True),
    ("clifford_w1234", "parallel_h", False),
    ("trex", "min_hypersphere", True),
    ("trex", "isotropic_surface", True),
    ("totally_geodesic_s2", "min_hypersphere", True),
])
def test_classification_residual_examples(name, key, small):
    v = _agg(name, key)
    assert (v < 1e-8) if small else (v > 0.1)


def test_s2_f2_is_zero_section():
    r = classification_residuals(frame_from_jet(_jet("totally_geodesic_s2")))
    assert np.all(r["f2_zero"])
    assert np.max(r["isotropic_surface"]) == 0


def test_phixh_constancy():
    res, mean = phixh_constancy(frame_from_jet(_jet("trex")))
    assert res < 1e-12
    assert abs(abs(mean @ e[4]) - 1) < 1e-12
    res, _ = phixh_constancy(frame_from_jet(_jet("clifford_w1234")))
    assert res > 0.1
    res, mean = phixh_constancy(frame_from_jet(_jet("totally_geodesic_s2")))
    assert res < 1e-12 and np.linalg.norm(mean) < 1e-12


# --- parallel surfaces ----------------------------------------------------------------------


def test_trex_parallel_invariants():
    j = _jet("trex")
    p = parallel_invariants(frame_from_jet(j), j)
    for s, sign in (("+", 1), ("-", -1)):
        assert p[s]["imag_residual"] < 1e-12
        assert np.allclose(p[s]["norm"], np.sqrt(2) / 2, atol=1e-12)
        assert np.allclose(p[s]["dot_phi"], -sign / 2, atol=1e-12)
        assert p[s]["formula_gap"] < 1e-12


def test_parallel_formula_with_grid_laplacian(grids):
    g = grids["clifford_w1234"]
    lap = laplacian(g.phi, g.hx, g.hy)
    p = parallel_invariants(g.frame, g.jet, lap=lap)
    assert max(p["+"]["formula_gap"], p["-"]["formula_gap"]) < 100 * g.h ** 2


def test_s2_plus_side_is_associative():
    f = frame_from_jet(_jet("totally_geodesic_s2"))
    with pytest.raises(AssociativePoint):
        parallel_invariants(f, signs=(1,))
    p = parallel_invariants(f, signs=(-1,))
    assert p["-"]["imag_residual"] < 1e-12


# --- ellipse of curvature --------------------------------------------------------------------


@pytest.mark.parametrize("name", list(catalog.PRESETS))
def test_ellipse_forms_agree_with_frame(name):
    j = _jet(name)
    kind, _ = ellipse_from_forms(j)
    assert kind == ellipse_class(frame_from_jet(j)).kind


def test_ellipse_kinds():
    assert ellipse_from_forms(_jet("totally_geodesic_s2"))[0] is EllipseKind.POINT
    assert ellipse_from_forms(_jet("trex"))[0] is EllipseKind.CIRCLE


# --- classify ----------------------------------------------------------------------------------

EXPECTED = {
    "clifford_coassoc": (Verdict.PARALLEL_MEAN_CURVATURE, False),
    "clifford_w1234": (Verdict.PSEUDO_UMBILICAL_NONPARALLEL, False),
    "trex": (Verdict.MINIMAL_IN_HYPERSPHERE, True),
    "totally_geodesic_s2": (Verdict.MINIMAL_IN_HYPERSPHERE, True),
}


@pytest.mark.parametrize("name", list(catalog.PRESETS))
def test_classify_analytic(grids, name):
    r = classify(grids[name])
    assert (r.verdict, r.isotropic_surface) == EXPECTED[name]
    if "consistent" in r.cross_checks:
        assert r.cross_checks["consistent"]


@pytest.mark.parametrize("name", list(catalog.PRESETS))
def test_classify_fd(fd_grids, name):
    r = classify(fd_grids[name])
    assert (r.verdict, r.isotropic_surface) == EXPECTED[name]
    assert r.tolerances["name"].startswith("fd")


def _grid33(name):
    return synthesize(catalog.PRESETS[name](), shape=(33, 33))


def test_labels():
    r = classify(_grid33("trex"))
    assert r.labels == ["minimal_in_hypersphere", "isotropic_surface"]


def test_report_json_round_trip():
    r = classify(_grid33("clifford_coassoc"), pointwise=True)
    d = json.loads(json.dumps(r.to_dict()))
    assert d["schema_version"] == SCHEMA_VERSION
    assert d["verdict"] == "parallel_mean_curvature"
    assert "pointwise" not in d
    p = json.loads(json.dumps(r.to_dict(pointwise=True), default=str))["pointwise"]
    assert np.array(p["theta"]).shape == (33, 33)
    assert np.array(p["mean_curvature"]).shape == (33, 33, 7)


def test_tolerance_profiles():
    fd = TolProfile.for_mode("fd", 0.01)
    assert fd.classify == pytest.approx(1e-2)
    t = TolProfile().scaled(1e-4)
    assert t.classify == pytest.approx(1e-9)
    assert t.name == "analyticx0.0001"


def test_tight_profile_is_honoured():
    g = _grid33("clifford_w1234")
    assert classify(g, replace(TolProfile(), classify=1e-30)).verdict is Verdict.GENERIC
