import numpy as np
import pytest

from g2surf.stencils import central_offsets, d_dz, diff, laplacian, weights


def test_central_weights():
    np.testing.assert_allclose(weights((-2, -1, 0, 1, 2), 1), [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], atol=1e-14)
    np.testing.assert_allclose(weights((-1, 0, 1), 2), [1, -2, 1], atol=1e-14)


def test_offsets_width():
    assert central_offsets(1) == (-2, -1, 0, 1, 2)
    assert central_offsets(2) == (-2, -1, 0, 1, 2)
    assert len(central_offsets(3)) == 7


@pytest.mark.parametrize("deriv", [1, 2, 3, 4])
def test_fourth_order_convergence(deriv):
    errs = []
    for n in (41, 81):
        x = np.linspace(0, 2, n)
        h = x[1] - x[0]
        f = np.sin(3 * x)
        exact = [3 * np.cos(3 * x), -9 * np.sin(3 * x), -27 * np.cos(3 * x), 81 * np.sin(3 * x)][deriv - 1]
        errs.append(np.max(np.abs(diff(f, h, 0, deriv) - exact)))
    assert errs[0] / errs[1] > 12


def test_polynomials_are_exact():
    x = np.linspace(-1, 1, 21)
    h = x[1] - x[0]
    np.testing.assert_allclose(diff(x ** 4, h, 0), 4 * x ** 3, atol=1e-11)


def test_too_few_samples():
    with pytest.raises(ValueError):
        diff(np.ones(4), 0.1, 0)


def test_wirtinger_of_holomorphic():
    xs = np.linspace(0, 1, 41)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    Z = X + 1j * Y
    h = xs[1] - xs[0]
    np.testing.assert_allclose(d_dz(np.exp(Z), h, h), np.exp(Z), atol=1e-7)
    np.testing.assert_allclose(laplacian(np.exp(X) * np.cos(Y), h, h), 0, atol=1e-6)
