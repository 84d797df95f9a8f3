import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from g2surf.algebra import (
    MULTIPLICATION_TABLE,
    STRUCTURE,
    TABLE_ROWS,
    basis,
    cross,
    dot,
    herm,
    identity_suite,
    left_cross_matrix,
    norm,
    parse_table,
    structure_tensor,
    table_mismatches,
)

e = {k: basis(k) for k in range(1, 8)}

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec7 = arrays(np.float64, 7, elements=finite)


def cvec(draw_re, draw_im):
    return draw_re + 1j * draw_im


# --- table ---------------------------------------------------------------------------


def test_table_products_match_stored_table():
    assert table_mismatches() == []


@pytest.mark.parametrize("i, j, k, sign", [
    (1, 2, 3, 1), (1, 3, 2, -1), (2, 3, 1, 1), (4, 5, 1, 1), (6, 7, 1, -1),
    (1, 4, 5, 1), (2, 4, 6, 1), (3, 4, 7, 1), (5, 6, 3, -1), (7, 5, 2, -1), (7, 6, 1, 1), (6, 4, 2, -1),
])
def test_selected_basis_products(i, j, k, sign):
    np.testing.assert_array_equal(cross(e[i], e[j]), sign * e[k])


def test_table_is_antisymmetric_with_zero_diagonal():
    for i in range(7):
        assert MULTIPLICATION_TABLE[i][i] == (0, -1)
        for j in range(7):
            si, ki = MULTIPLICATION_TABLE[i][j]
            sj, kj = MULTIPLICATION_TABLE[j][i]
            assert si == -sj and ki == kj


def test_each_row_hits_every_other_basis_vector_once():
    for i in range(7):
        ks = sorted(k for s, k in MULTIPLICATION_TABLE[i] if s)
        assert ks == sorted(set(range(7)) - {i})


def test_bilinear_expansion_example():
    got = cross(e[1] + e[4], e[2] + e[5])
    np.testing.assert_array_equal(got, e[1] + e[3] - e[4] - e[6])


def test_einsum_path_agrees_with_default():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=(2, 50, 7))
    np.testing.assert_allclose(cross(x, y, STRUCTURE), cross(x, y), atol=1e-14)


def test_structure_is_read_only():
    with pytest.raises(ValueError):
        STRUCTURE[0, 1, 2] = 5.0


def test_parse_table_roundtrip():
    assert parse_table(TABLE_ROWS) == MULTIPLICATION_TABLE


def test_sign_error_is_detected():
    rows = list(TABLE_ROWS)
    rows[0] = rows[0].replace("+3", "-3", 1)
    bad = structure_tensor(parse_table(rows))
    assert (1, 2) in table_mismatches(bad)
    res = identity_suite(seed=1, trials=200, structure=bad)
    assert max(res.values()) > 0.1


def test_basis_rejects_out_of_range():
    with pytest.raises(ValueError):
        basis(0)
    with pytest.raises(ValueError):
        basis(8)


# --- dot, herm ------------------------------------------------------------------------


def test_dot_and_herm_examples():
    assert dot(e[1], e[1]) == 1
    iso = e[1] + 1j * e[5]
    assert dot(iso, iso) == 0
    w = e[1] + 1j * e[2]
    assert herm(w, w) == 2
    assert herm(w, np.conj(w)) == 0
    assert norm(w) == pytest.approx(np.sqrt(2))


def test_left_cross_matrix():
    rng = np.random.default_rng(3)
    v, x = rng.normal(size=(2, 7))
    np.testing.assert_allclose(left_cross_matrix(v) @ x, cross(v, x), atol=1e-14)


# --- identities --------------------------------------------------------------------------


def test_identity_suite_default_run():
    res = identity_suite(seed=1, trials=10_000)
    assert set(res) == {"orthogonality", "norm_identity", "antisymmetry", "cyclic_triple",
                        "double_product_expansion", "double_cross", "polarized_double_cross"}
    assert max(res.values()) < 1e-12


def test_identity_suite_is_deterministic():
    assert identity_suite(seed=5, trials=100) == identity_suite(seed=5, trials=100)


def test_identity_suite_rejects_zero_trials():
    with pytest.raises(ValueError):
        identity_suite(trials=0)


def test_double_cross_example():
    np.testing.assert_array_equal(cross(e[1], cross(e[1], e[2])), -e[2])


@settings(max_examples=200, deadline=None)
@given(vec7, vec7)
def test_antisymmetry_is_bit_exact(x, y):
    assert np.array_equal(cross(x, y), -cross(y, x))
    assert not np.any(cross(x, x))


@settings(max_examples=100, deadline=None)
@given(vec7, vec7, vec7, vec7)
def test_antisymmetry_bit_exact_for_complex(a, b, c, d):
    x, y = a + 1j * b, c + 1j * d
    assert np.array_equal(cross(x, y), -cross(y, x))


@settings(max_examples=200, deadline=None)
@given(vec7, vec7)
def test_orthogonality_and_lagrange(x, y):
    xy = cross(x, y)
    scale = 1 + (np.dot(x, x) * np.dot(y, y))
    assert abs(dot(xy, x)) < 1e-12 * scale
    assert abs(dot(xy, y)) < 1e-12 * scale
    assert abs(dot(xy, xy) - (dot(x, x) * dot(y, y) - dot(x, y) ** 2)) < 1e-11 * scale


@settings(max_examples=200, deadline=None)
@given(vec7, vec7, vec7)
def test_cyclic_triple_product_and_double_cross(x, y, z):
    scale = 1 + np.linalg.norm(x) ** 2 * (1 + np.linalg.norm(y)) * (1 + np.linalg.norm(z))
    t = dot(x, cross(y, z))
    assert abs(t - dot(y, cross(z, x))) < 1e-12 * scale
    lhs = cross(x, cross(x, y))
    rhs = -dot(x, x) * y + dot(x, y) * x
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * scale
    lhs = cross(x, cross(y, z)) + cross(cross(x, y), z)
    rhs = 2 * dot(x, z) * y - dot(x, y) * z - dot(y, z) * x
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(vec7, vec7, vec7, vec7)
def test_conjugation_commutes_with_cross(a, b, c, d):
    x, y = a + 1j * b, c + 1j * d
    np.testing.assert_array_equal(np.conj(cross(x, y)), cross(np.conj(x), np.conj(y)))


@settings(max_examples=100, deadline=None)
@given(vec7, vec7, st.floats(-3, 3))
def test_isotropic_null_cross(a, b, lam):
    # y isotropic: a, b orthogonal with equal norms; x = lam * y has x x y = 0
    if np.linalg.norm(a) < 1e-3:
        return
    b = b - np.dot(a, b) / np.dot(a, a) * a
    if np.linalg.norm(b) < 1e-3:
        return
    b *= np.linalg.norm(a) / np.linalg.norm(b)
    y = a + 1j * b
    x = lam * y
    assert np.max(np.abs(cross(x, y))) < 1e-12 * (1 + np.dot(a, a))
    assert abs(dot(x, x)) < 1e-11 * (1 + np.dot(a, a)) * (1 + lam ** 2)
    assert abs(dot(x, y)) < 1e-11 * (1 + np.dot(a, a)) * (1 + abs(lam))


def test_broadcasting_over_grids():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(4, 5, 7))
    y = rng.normal(size=(7,))
    out = cross(x, y)
    assert out.shape == (4, 5, 7)
    np.testing.assert_allclose(out[2, 3], cross(x[2, 3], y))
