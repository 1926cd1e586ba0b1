import numpy as np
import pytest

from sphsep.quadrature import build_grid


@pytest.fixture(scope="session")
def grid32():
    return build_grid(32, 32)


@pytest.fixture(scope="session")
def grid64():
    return build_grid(64, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def tangent_frame(xi):
    """Two orthonormal tangent vectors at each point."""
    a = np.where(np.abs(xi[..., 2:3]) < 0.9, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    e1 = np.cross(xi, a)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    return e1, np.cross(xi, e1)


def move(xi, direction, h):
    """Point reached from ``xi`` along the great circle with tangent ``direction``."""
    return np.cos(h) * xi + np.sin(h) * direction


def fd_tensor_ops(profile, xi, eta, h=1e-4):
    """Finite-difference grad/curl tensors from two tangent frames."""
    ex = tangent_frame(xi)
    ee = tangent_frame(eta)
    K = lambda a, b: profile.value(np.einsum("...i,...i->...", a, b))  # noqa: E731
    gg = np.zeros(xi.shape[:-1] + (3, 3))
    for a in ex:
        for b in ee:
            d = (K(move(xi, a, h), move(eta, b, h)) - K(move(xi, a, h), move(eta, b, -h))
                 - K(move(xi, a, -h), move(eta, b, h)) + K(move(xi, a, -h), move(eta, b, -h))) / (4 * h * h)
            gg += d[..., None, None] * a[..., :, None] * b[..., None, :]
    # curl*_xi (x) curl*_eta K = [xi]x (grad*_xi (x) grad*_eta K) [eta]x^T
    cc = np.cross(xi[..., None, :], np.cross(eta[..., None, :], gg).swapaxes(-1, -2)).swapaxes(-1, -2)
    return gg, cc
