"""
Legendre polynomials, real orthonormal spherical harmonics and the two
vector spherical harmonic systems built from them.

Conventions
-----------
Points on the unit sphere are Cartesian arrays of shape ``(..., 3)``.
Scalar harmonics ``Y_{n,k}`` are real and fully normalized so that the
family is orthonormal in L2 of the unit sphere, without Condon-Shortley
phase. The order index ``k = 1..2n+1`` maps to the azimuthal number ``m``
as ``k=1 -> m=0``, ``k=2m -> cos(m phi)``, ``k=2m+1 -> sin(m phi)``.

The plain vector system uses ``o1 F = xi F``, ``o2 F = grad* F`` and
``o3 F = curl* F = xi x grad* F``. The tilde system combines them with
the pseudodifferential operator ``D = (-Beltrami + 1/4)^(1/2)`` which acts
on degree-n harmonics as multiplication by ``n + 1/2``::

    o~1 = o1 (D + 1/2) - o2
    o~2 = o1 (D - 1/2) + o2
    o~3 = o3
"""

from typing import NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "HarmonicIndex",
    "VshKind",
    "mu",
    "mu_tilde",
    "legendre_eval",
    "legendre_deriv",
    "legendre_table",
    "legendre_sum",
    "series_inv_n",
    "series_inv_n_plus_1",
    "sh_eval",
    "sh_gradients",
    "sh_table",
    "vsh_eval",
    "vsh_table",
    "harmonic_indices",
    "spherical_to_cartesian",
    "cartesian_to_spherical",
    "UNIT_TOL",
]

UNIT_TOL = 1e-12


class HarmonicIndex(NamedTuple):
    """Degree ``n`` and order ``k`` of a real spherical harmonic."""

    n: int
    k: int

    def check(self, vector_kind=1):
        n, k = self
        if n < 0 or not 1 <= k <= 2 * n + 1:
            raise DomainError(f"invalid harmonic index (n={n}, k={k})")
        if vector_kind in (2, 3) and n < 1:
            raise DomainError(f"vector kind {vector_kind} requires n >= 1, got n={n}")
        return self

    @property
    def m(self):
        return self.k // 2

    @property
    def is_sine(self):
        return self.k > 1 and self.k % 2 == 1


class VshKind(NamedTuple):
    """Vector spherical harmonic family: ``basis`` is 'plain' or 'tilde'."""

    basis: str
    i: int

    def check(self):
        if self.basis not in ("plain", "tilde"):
            raise DomainError(f"unknown basis {self.basis!r}")
        if self.i not in (1, 2, 3):
            raise DomainError(f"vector kind must be 1, 2 or 3, got {self.i}")
        return self


def mu(i, n):
    """Squared L2 norm of ``o^(i) Y_{n,k}``."""
    return 1.0 if i == 1 else float(n * (n + 1))


def mu_tilde(i, n):
    """Squared L2 norm of ``o~^(i) Y_{n,k}``."""
    if i == 1:
        return float((n + 1) * (2 * n + 1))
    if i == 2:
        return float(n * (2 * n + 1))
    return float(n * (n + 1))


def harmonic_indices(lmax, nmin=0):
    """All ``(n, k)`` with ``nmin <= n <= lmax`` in canonical order."""
    return [HarmonicIndex(n, k) for n in range(nmin, lmax + 1) for k in range(1, 2 * n + 2)]


# ---------------------------------------------------------------------------
# Legendre polynomials


def _check_interval(t, open_ends=False):
    t = np.asarray(t, dtype=float)
    if open_ends:
        if np.any(np.abs(t) >= 1.0) or np.any(np.isnan(t)):
            raise DomainError("argument must lie in the open interval (-1, 1)")
    elif np.any(np.abs(t) > 1.0) or np.any(np.isnan(t)):
        raise DomainError("argument must lie in [-1, 1]")
    return t


def legendre_table(nmax, t):
    """Return ``P_0(t) .. P_nmax(t)`` stacked along the first axis.

    Uses the three-term recurrence
    ``(n+1) P_{n+1} = (2n+1) t P_n - n P_{n-1}``.
    """
    t = _check_interval(t)
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = t
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1) * t * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre_eval(n, t):
    """Legendre polynomial ``P_n(t)`` for ``t`` in [-1, 1]."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    t = _check_interval(t)
    if n == 0:
        return np.ones_like(t)[()]
    p_prev, p = np.ones_like(t), t.copy()
    for m in range(1, n):
        p_prev, p = p, ((2 * m + 1) * t * p - m * p_prev) / (m + 1)
    return p[()]


def legendre_deriv(n, t):
    """Derivative ``P_n'(t)`` on the open interval (-1, 1)."""
    t = _check_interval(t, open_ends=True)
    if n == 0:
        return np.zeros_like(t)[()]
    pn = legendre_eval(n, t)
    pm = legendre_eval(n - 1, t)
    return (n * (t * pn - pm) / (t * t - 1.0))[()]


def legendre_sum(coeffs, t):
    """``sum_n coeffs[n] P_n(t)`` by Clenshaw's recurrence."""
    t = _check_interval(t)
    coeffs = np.asarray(coeffs, dtype=float)
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for n in range(coeffs.size - 1, 0, -1):
        # P_{n+1} = a_n t P_n - c_n P_{n-1}, a_n = (2n+1)/(n+1), c_n = n/(n+1)
        b1, b2 = coeffs[n] + (2 * n + 1) / (n + 1) * t * b1 - (n + 1) / (n + 2) * b2, b1
    return (coeffs[0] + t * b1 - 0.5 * b2)[()] if coeffs.size else np.zeros_like(t)[()]


def series_inv_n(t):
    """Closed form of ``sum_{n>=1} P_n(t) / n`` on (-1, 1)."""
    t = _check_interval(t, open_ends=True)
    return (np.log((np.sqrt(2.0) * np.sqrt(1.0 - t) - 1.0 + t) / (1.0 - t * t)) + np.log(2.0))[()]


def series_inv_n_plus_1(t):
    """Closed form of ``sum_{n>=1} P_n(t) / (n + 1)`` on (-1, 1)."""
    t = _check_interval(t, open_ends=True)
    return (np.log(1.0 + np.sqrt(2.0) / np.sqrt(1.0 - t)) - 1.0)[()]


# ---------------------------------------------------------------------------
# coordinates


def spherical_to_cartesian(theta, phi):
    """Unit vectors from colatitude ``theta`` and longitude ``phi`` (radians)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def cartesian_to_spherical(xi):
    """Colatitude and longitude of unit vectors; longitude in [0, 2 pi)."""
    xi = np.asarray(xi, dtype=float)
    rho = np.hypot(xi[..., 0], xi[..., 1])
    theta = np.arctan2(rho, xi[..., 2])
    phi = np.mod(np.arctan2(xi[..., 1], xi[..., 0]), 2 * np.pi)
    return theta, phi


def _as_unit(xi):
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 3:
        raise DomainError("points must have a trailing dimension of 3")
    if np.any(np.abs(np.linalg.norm(xi, axis=-1) - 1.0) > UNIT_TOL):
        raise DomainError("points must be unit vectors")
    return xi


def _frame(xi):
    """Polar angle cosine/sine, azimuth and the local (e_theta, e_phi) frame.

    At the poles the azimuth is taken as 0, giving the limit along phi = 0.
    """
    x, y, z = xi[..., 0], xi[..., 1], xi[..., 2]
    s = np.hypot(x, y)
    c = np.clip(z, -1.0, 1.0)
    phi = np.arctan2(y, x)
    cp, sp = np.cos(phi), np.sin(phi)
    e_theta = np.stack([c * cp, c * sp, -s], axis=-1)
    e_phi = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return c, s, phi, e_theta, e_phi


def _alf(nmax, c, s):
    """Fully normalized associated Legendre functions.

    Returns ``P[n, m]`` (4 pi normalization) and ``Q[n, m] = P[n, m] / sin``
    for ``m >= 1`` so that quantities divided by ``sin(theta)`` stay finite at
    the poles.
    """
    shape = (nmax + 2, nmax + 2) + c.shape
    P = np.zeros(shape)
    Q = np.zeros(shape)
    P[0, 0] = 1.0
    # diagonal, kept as Q (one sine factor removed) for m >= 1
    for m in range(0, nmax + 1):
        if m == 1:
            Q[1, 1] = np.sqrt(3.0)
        elif m >= 2:
            fac = np.sqrt((2 * m + 1) / (2.0 * m))
            Q[m, m] = fac * s * Q[m - 1, m - 1]
        base = P if m == 0 else Q
        if m + 1 <= nmax + 1:
            base[m + 1, m] = np.sqrt(2 * m + 3.0) * c * base[m, m]
        for n in range(m + 2, nmax + 2):
            a = np.sqrt((2 * n - 1) * (2 * n + 1) / ((n - m) * (n + m)))
            b = np.sqrt((2 * n + 1) * (n + m - 1) * (n - m - 1) / ((n - m) * (n + m) * (2 * n - 3.0)))
            base[n, m] = a * c * base[n - 1, m] - b * base[n - 2, m]
    P[:, 1:] = Q[:, 1:] * s
    return P, Q


def _dtheta(P, n, m):
    """d/dtheta of the 4 pi normalized ``P[n, m]`` via ladder relations."""
    if n == 0:
        return np.zeros_like(P[0, 0])
    if m == 0:
        return -np.sqrt(n * (n + 1) / 2.0) * P[n, 1]
    lower = np.sqrt((n + m) * (n - m + 1.0)) * P[n, m - 1]
    if m == 1:
        lower = lower * np.sqrt(2.0)
    upper = np.sqrt((n - m) * (n + m + 1.0)) * P[n, m + 1] if m < n else 0.0
    return 0.5 * (lower - upper)


_NORM = 1.0 / np.sqrt(4 * np.pi)


def _sh_parts(P, Q, phi, n, k):
    """Value, theta-derivative and (1/sin) phi-derivative of ``Y_{n,k}``."""
    m = k // 2
    if m == 0:
        return _NORM * P[n, 0], _NORM * _dtheta(P, n, 0), np.zeros_like(phi)
    if k % 2 == 0:
        trig, dtrig = np.cos(m * phi), -m * np.sin(m * phi)
    else:
        trig, dtrig = np.sin(m * phi), m * np.cos(m * phi)
    val = _NORM * P[n, m] * trig
    dth = _NORM * _dtheta(P, n, m) * trig
    dph = _NORM * Q[n, m] * dtrig
    return val, dth, dph


def sh_eval(n, k, xi):
    """Real orthonormal spherical harmonic ``Y_{n,k}`` at unit vectors ``xi``."""
    HarmonicIndex(n, k).check()
    xi = _as_unit(xi)
    c, s, phi, _, _ = _frame(xi)
    P, Q = _alf(n, c, s)
    return _sh_parts(P, Q, phi, n, k)[0][()]


def sh_gradients(n, k, xi):
    """Return ``(Y, grad* Y, curl* Y)`` at ``xi`` in Cartesian components."""
    HarmonicIndex(n, k).check()
    xi = _as_unit(xi)
    c, s, phi, e_t, e_p = _frame(xi)
    P, Q = _alf(n, c, s)
    val, dth, dph = _sh_parts(P, Q, phi, n, k)
    grad = e_t * dth[..., None] + e_p * dph[..., None]
    curl = e_p * dth[..., None] - e_t * dph[..., None]
    return val, grad, curl


def sh_table(lmax, xi, nmin=0):
    """Values and surface gradients of all harmonics with degree ``nmin..lmax``.

    Returns ``(indices, Y, grad)`` with ``Y`` of shape ``(H,) + xi.shape[:-1]``
    and ``grad`` of shape ``(H,) + xi.shape``.
    """
    xi = _as_unit(xi)
    c, s, phi, e_t, e_p = _frame(xi)
    P, Q = _alf(lmax, c, s)
    idx = harmonic_indices(lmax, nmin)
    Y = np.empty((len(idx),) + c.shape)
    G = np.empty((len(idx),) + xi.shape)
    for h, (n, k) in enumerate(idx):
        val, dth, dph = _sh_parts(P, Q, phi, n, k)
        Y[h] = val
        G[h] = e_t * dth[..., None] + e_p * dph[..., None]
    return idx, Y, G


def _vsh_from_parts(basis, i, n, xi, val, grad):
    if basis == "plain":
        if i == 1:
            vec = xi * val[..., None]
        elif i == 2:
            vec = grad
        else:
            vec = np.cross(xi, grad)
        return vec / np.sqrt(mu(i, n))
    if i == 1:
        vec = (n + 1.0) * xi * val[..., None] - grad
    elif i == 2:
        vec = float(n) * xi * val[..., None] + grad
    else:
        vec = np.cross(xi, grad)
    return vec / np.sqrt(mu_tilde(i, n))


def vsh_eval(kind, n, k, xi):
    """Unit-norm vector spherical harmonic of the given kind.

    Parameters
    ----------
    kind : VshKind or tuple
        ``(basis, i)`` with basis 'plain' or 'tilde' and ``i`` in 1, 2, 3.
    n, k : int
        Degree and order of the underlying scalar harmonic.
    xi : array_like, shape (..., 3)
        Evaluation points on the unit sphere.
    """
    kind = VshKind(*kind).check()
    HarmonicIndex(n, k).check(kind.i)
    xi = _as_unit(xi)
    val, grad, _ = sh_gradients(n, k, xi)
    return _vsh_from_parts(kind.basis, kind.i, n, xi, np.asarray(val), grad)


def vsh_table(lmax, xi, basis="tilde"):
    """All vector harmonics up to degree ``lmax``.

    Returns a list of keys ``(i, n, k)`` and an array of shape
    ``(len(keys),) + xi.shape``.
    """
    xi = _as_unit(xi)
    idx, Y, G = sh_table(lmax, xi)
    keys, vecs = [], []
    for i in (1, 2, 3):
        for h, (n, k) in enumerate(idx):
            if i > 1 and n == 0:
                continue
            keys.append((i, n, k))
            vecs.append(_vsh_from_parts(basis, i, n, xi, Y[h], G[h]))
    return keys, np.stack(vecs)
