import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from sphsep.errors import DomainError
from sphsep.harmonics import (
    HarmonicIndex,
    VshKind,
    cartesian_to_spherical,
    harmonic_indices,
    legendre_deriv,
    legendre_eval,
    legendre_sum,
    legendre_table,
    mu,
    mu_tilde,
    series_inv_n,
    series_inv_n_plus_1,
    sh_eval,
    sh_gradients,
    sh_table,
    spherical_to_cartesian,
    vsh_eval,
    vsh_table,
)
from sphsep.quadrature import GridField, integrate

from conftest import move, random_unit, tangent_frame


# --- Legendre polynomials ---------------------------------------------------


@pytest.mark.parametrize("n, t, expected", [(0, 0.3, 1.0), (1, 0.3, 0.3), (4, 1.0, 1.0)])
def test_legendre_examples(n, t, expected):
    assert_allclose(legendre_eval(n, t), expected, rtol=1e-15)


def test_legendre_closed_forms():
    t = np.linspace(-1, 1, 41)
    assert_allclose(legendre_eval(2, t), 0.5 * (3 * t**2 - 1), atol=1e-15)
    assert_allclose(legendre_eval(3, t), 0.5 * (5 * t**3 - 3 * t), atol=1e-15)
    assert_allclose(legendre_table(3, t)[3], legendre_eval(3, t), atol=1e-15)


def test_legendre_matches_numpy():
    t = np.linspace(-1, 1, 101)
    for n in (5, 17, 40):
        c = np.zeros(n + 1)
        c[n] = 1.0
        assert_allclose(legendre_eval(n, t), np.polynomial.legendre.legval(t, c), atol=1e-12)


@given(st.integers(0, 60), st.floats(-1.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_legendre_bounded(n, t):
    assert abs(legendre_eval(n, t)) <= 1.0 + 1e-12


def test_legendre_domain():
    with pytest.raises(DomainError):
        legendre_eval(2, 1.5)
    with pytest.raises(DomainError):
        legendre_deriv(2, 1.0)
    with pytest.raises(DomainError):
        legendre_deriv(3, -1.0)


@pytest.mark.parametrize("n, t, expected", [(1, 0.5, 1.0), (2, 0.0, 0.0)])
def test_legendre_deriv_examples(n, t, expected):
    assert_allclose(legendre_deriv(n, t), expected, atol=1e-15)


def test_legendre_deriv_finite_difference():
    h = 1e-5
    fd = (legendre_eval(5, 0.4 + h) - legendre_eval(5, 0.4 - h)) / (2 * h)
    assert_allclose(legendre_deriv(5, 0.4), fd, rtol=1e-6)


# --- scalar harmonics -------------------------------------------------------


def test_index_checks():
    HarmonicIndex(3, 7).check()
    with pytest.raises(DomainError):
        HarmonicIndex(3, 8).check()
    with pytest.raises(DomainError):
        HarmonicIndex(0, 1).check(vector_kind=2)
    with pytest.raises(DomainError):
        VshKind("fancy", 1).check()
    assert len(harmonic_indices(4)) == 25
    assert harmonic_indices(2, nmin=1)[0] == (1, 1)


def test_normalization_constants():
    assert mu(1, 4) == 1.0
    assert mu(2, 4) == mu(3, 4) == 20.0
    assert mu_tilde(1, 3) == 28.0
    assert mu_tilde(2, 3) == 21.0
    assert mu_tilde(3, 3) == 12.0


def test_constant_harmonic(rng):
    xi = random_unit(rng, 5)
    assert_allclose(sh_eval(0, 1, xi), np.full(5, 1 / np.sqrt(4 * np.pi)), rtol=1e-15)
    assert_allclose(1 / np.sqrt(4 * np.pi), 0.2820948, atol=1e-7)


def test_low_degree_closed_forms(rng):
    xi = random_unit(rng, 20)
    x, y, z = xi.T
    c = np.sqrt(3 / (4 * np.pi))
    assert_allclose(sh_eval(1, 1, xi), c * z, atol=1e-14)
    assert_allclose(sh_eval(1, 2, xi), c * x, atol=1e-14)
    assert_allclose(sh_eval(1, 3, xi), c * y, atol=1e-14)
    assert_allclose(sh_eval(2, 4, xi), np.sqrt(15 / (16 * np.pi)) * (x**2 - y**2), atol=1e-14)


@pytest.mark.parametrize("n", [1, 3, 8, 20])
def test_addition_theorem(rng, n):
    xi = random_unit(rng, 50)
    total = sum(sh_eval(n, k, xi) ** 2 for k in range(1, 2 * n + 2))
    assert_allclose(total, (2 * n + 1) / (4 * np.pi), rtol=1e-12)


def test_addition_theorem_two_points(rng):
    xi, eta = random_unit(rng, 30), random_unit(rng, 30)
    n = 6
    _, Yx, _ = sh_table(n, xi, nmin=n)
    _, Ye, _ = sh_table(n, eta, nmin=n)
    t = np.einsum("ij,ij->i", xi, eta)
    assert_allclose((Yx * Ye).sum(axis=0), (2 * n + 1) / (4 * np.pi) * legendre_eval(n, t), atol=1e-13)


def test_quadrature_norm(grid64):
    y = sh_eval(2, 1, grid64.nodes)
    assert_allclose(integrate(GridField(grid64, y * y)), 1.0, atol=1e-8)


def test_gradients_finite_difference(rng):
    xi = random_unit(rng, 25)
    e1, e2 = tangent_frame(xi)
    h = 1e-6
    for n, k in [(2, 3), (5, 4), (7, 15)]:
        _, grad, curl = sh_gradients(n, k, xi)
        for e in (e1, e2):
            fd = (sh_eval(n, k, move(xi, e, h)) - sh_eval(n, k, move(xi, e, -h))) / (2 * h)
            assert_allclose(np.einsum("ij,ij->i", grad, e), fd, atol=1e-7)
        assert_allclose(curl, np.cross(xi, grad), atol=1e-14)
        assert_allclose(np.einsum("ij,ij->i", grad, xi), 0.0, atol=1e-13)


def test_gradients_finite_at_poles():
    poles = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    near = spherical_to_cartesian(np.array([1e-7, np.pi - 1e-7]), np.zeros(2))
    for n, k in [(1, 2), (3, 3), (4, 1), (6, 5)]:
        _, g0, _ = sh_gradients(n, k, poles)
        _, g1, _ = sh_gradients(n, k, near)
        assert np.all(np.isfinite(g0))
        assert_allclose(g0, g1, atol=1e-5)


def test_coordinates_round_trip(rng):
    xi = random_unit(rng, 40)
    th, ph = cartesian_to_spherical(xi)
    assert_allclose(spherical_to_cartesian(th, ph), xi, atol=1e-15)
    assert np.all((ph >= 0) & (ph < 2 * np.pi))


def test_rejects_non_unit_points():
    with pytest.raises(DomainError):
        sh_eval(1, 1, np.array([1.0, 1.0, 0.0]))


# --- vector harmonics -------------------------------------------------------


def test_tilde_monopole(rng):
    xi = random_unit(rng, 4)
    assert_allclose(vsh_eval(("tilde", 1), 0, 1, xi), xi / np.sqrt(4 * np.pi), rtol=1e-14)


def test_vsh_tangential(rng):
    xi = random_unit(rng, 30)
    for basis in ("plain", "tilde"):
        v = vsh_eval((basis, 3), 4, 2, xi)
        assert_allclose(np.einsum("ij,ij->i", v, xi), 0.0, atol=1e-14)
    assert_allclose(np.einsum("ij,ij->i", vsh_eval(("plain", 2), 4, 2, xi), xi), 0.0, atol=1e-14)


def test_tilde_orthogonal_pair(grid64):
    x = grid64.nodes
    a = vsh_eval(("tilde", 1), 2, 1, x)
    b = vsh_eval(("tilde", 2), 2, 1, x)
    assert_allclose(integrate(GridField(grid64, np.einsum("ij,ij->i", a, b))), 0.0, atol=1e-8)


@pytest.mark.parametrize("basis", ["plain", "tilde"])
def test_vector_gram_matrix(grid32, basis):
    keys, vecs = vsh_table(6, grid32.nodes, basis)
    w = grid32.node_weights
    gram = np.einsum("anj,bnj,n->ab", vecs, vecs, w)
    assert len(keys) == 3 * 49 - 2
    assert_allclose(gram, np.eye(len(keys)), atol=1e-10)


def test_tilde_combination_of_plain(rng):
    xi = random_unit(rng, 10)
    n, k = 3, 4
    y1 = vsh_eval(("plain", 1), n, k, xi)
    y2 = vsh_eval(("plain", 2), n, k, xi)
    root = np.sqrt(n * (n + 1.0))
    expect1 = ((n + 1) * y1 - root * y2) / np.sqrt(mu_tilde(1, n))
    expect2 = (n * y1 + root * y2) / np.sqrt(mu_tilde(2, n))
    assert_allclose(vsh_eval(("tilde", 1), n, k, xi), expect1, atol=1e-14)
    assert_allclose(vsh_eval(("tilde", 2), n, k, xi), expect2, atol=1e-14)


def test_legendre_sum_matches_numpy(rng):
    c = rng.normal(size=40)
    t = np.linspace(-1, 1, 33)
    assert_allclose(legendre_sum(c, t), np.polynomial.legendre.legval(t, c), atol=1e-13)


def test_generating_series_identities():
    t = np.array([-0.5, 0.0, 0.5])
    n = np.arange(1, 20_001, dtype=float)
    assert_allclose(legendre_sum(np.r_[0.0, 1 / n], t), series_inv_n(t), atol=1e-3)
    assert_allclose(legendre_sum(np.r_[0.0, 1 / (n + 1)], t), series_inv_n_plus_1(t), atol=1e-3)
    with pytest.raises(DomainError):
        series_inv_n(1.0)
