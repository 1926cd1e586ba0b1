"""
Zonal kernels on the unit sphere and their space-domain regularizations.

A zonal kernel depends on two points only through ``t = xi . eta``. The
singular kernels handled here are

* the Green function of the Beltrami operator,
  ``G(t) = ln(1 - t) / (4 pi) + (1 - ln 2) / (4 pi)``,
* the single layer kernel ``S(t) = 1 / sqrt(2 (1 - t))``,
* ``D^-1 G``, the single layer operator applied to ``G``.

Each is regularized inside the cap ``1 - t < rho`` by the Taylor polynomial
of the kernel about ``t = 1 - rho``. The tensor kernels ``Phi`` assembled at
the end of the module split a vector field into internal, external and
toroidal parts; differences of two scales give compactly supported
wavelets.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, SingularityError

__all__ = [
    "RegularizationConfig",
    "ZonalProfile",
    "TensorKernelId",
    "SurfaceOps",
    "green_eval",
    "green_deriv",
    "green_reg_profile",
    "single_layer_eval",
    "single_layer_deriv",
    "single_layer_reg_profile",
    "dinv_green_eval",
    "dinv_green_paper_form",
    "dinv_green_series",
    "s_profile",
    "s_vector_eval",
    "zonal_surface_ops",
    "phi_eval",
    "ScaleKernels",
    "WaveletKernels",
    "kernel_evaluator",
    "green_profile",
    "GREEN_ORDER",
    "SINGLE_LAYER_ORDER",
]

GREEN_ORDER = 2
SINGLE_LAYER_ORDER = 1
PARTS = ("int", "ext", "q")

_FOUR_PI = 4.0 * np.pi
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RegularizationConfig:
    """Cap size ``rho`` and Taylor order of a kernel regularization."""

    rho: float
    taylor_order: int = GREEN_ORDER

    def __post_init__(self):
        if not 0.0 < self.rho <= 2.0:
            raise DomainError(f"rho must lie in (0, 2], got {self.rho}")
        if not 1 <= int(self.taylor_order) <= 3:
            raise DomainError(f"taylor_order must be 1, 2 or 3, got {self.taylor_order}")

    @classmethod
    def from_scale(cls, J, taylor_order=GREEN_ORDER):
        if J < 0:
            raise DomainError("scale index must be non-negative")
        return cls(math.ldexp(1.0, -int(J)), taylor_order)


@dataclass(frozen=True)
class ZonalProfile:
    """A function ``t -> K(t)`` on [-1, 1] with its first two derivatives.

    ``breakpoint`` is the regularization point ``1 - rho`` (None for
    unregularized kernels).
    """

    value: Callable
    deriv1: Callable
    deriv2: Callable
    breakpoint: Optional[float] = None
    name: str = ""

    def __call__(self, t):
        return self.value(t)


class TensorKernelId(NamedTuple):
    """Identifies ``Phi_J`` (form='scaling') or ``Psi_J`` (form='wavelet')."""

    which: str
    form: str
    J: int

    def check(self):
        if self.which not in PARTS:
            raise DomainError(f"which must be one of {PARTS}, got {self.which!r}")
        if self.form not in ("scaling", "wavelet"):
            raise DomainError(f"form must be 'scaling' or 'wavelet', got {self.form!r}")
        if self.J < 0:
            raise DomainError("scale index must be non-negative")
        return self


# ---------------------------------------------------------------------------
# unregularized kernels


def _check_below_one(t, what):
    t = np.asarray(t, dtype=float)
    if np.any(t > 1.0) or np.any(t < -1.0):
        raise DomainError("argument must lie in [-1, 1]")
    if np.any(t >= 1.0):
        raise SingularityError(f"{what} is singular at t = 1")
    return t


def green_eval(t):
    """Green function of the Beltrami operator, defined for ``t < 1``."""
    t = _check_below_one(t, "Green's function")
    return (np.log1p(-t) / _FOUR_PI + (1.0 - np.log(2.0)) / _FOUR_PI)[()]


def green_deriv(k, t):
    """k-th derivative of the Green function (k >= 1)."""
    t = _check_below_one(t, "Green's function")
    return (-math.factorial(k - 1) / (_FOUR_PI * (1.0 - t) ** k))[()]


def single_layer_eval(t):
    """Single layer kernel ``1 / sqrt(2 (1 - t))``."""
    t = _check_below_one(t, "the single layer kernel")
    return (1.0 / np.sqrt(2.0 * (1.0 - t)))[()]


def single_layer_deriv(k, t):
    """k-th derivative of the single layer kernel."""
    t = _check_below_one(t, "the single layer kernel")
    coeff = 1.0
    for j in range(k):
        coeff *= 0.5 + j
    return (coeff / np.sqrt(2.0) * (1.0 - t) ** (-0.5 - k))[()]


def dinv_green_eval(t):
    """``D^-1`` applied to the Green function, as a zonal function of ``t``.

    The closed form ``ln((1+t)(1/2 - 1/(1-2S))) / (2 pi) - 1/(2 pi)`` is
    evaluated in the equivalent form
    ``ln((1+t)/2 + sqrt(2 (1-t)) + (1-t)) / (2 pi) - 1/(2 pi)``, which is
    finite on all of [-1, 1] and free of cancellation near ``t = -1``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise DomainError("argument must lie in [-1, 1]")
    u = 1.0 - t
    arg = 0.5 * (1.0 + t) + np.sqrt(2.0 * u) + u
    return (np.log(arg) / _TWO_PI - 1.0 / _TWO_PI)[()]


def dinv_green_paper_form(t):
    """Literal closed form with the factor ``(1+t)``; undefined at ``t = +-1``."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) >= 1.0):
        raise DomainError("literal form requires -1 < t < 1")
    S = 1.0 / np.sqrt(2.0 * (1.0 - t))
    return (np.log((1.0 + t) * (0.5 - 1.0 / (1.0 - 2.0 * S))) / _TWO_PI - 1.0 / _TWO_PI)[()]


def dinv_green_series(t, nterms=10_000):
    """Truncated spectral series of ``D^-1 G``.

    Coefficient of ``P_n`` is ``(1/(n+1/2)) ((2n+1)/(4 pi)) (-1/(n(n+1)))``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    p_prev, p = np.ones_like(t), t.copy()
    for n in range(1, nterms + 1):
        out += (1.0 / (n + 0.5)) * ((2 * n + 1) / _FOUR_PI) * (-1.0 / (n * (n + 1))) * p
        p_prev, p = p, ((2 * n + 1) * t * p - n * p_prev) / (n + 1)
    return out if out.size > 1 else out[0]


# ---------------------------------------------------------------------------
# Taylor regularization


def _regularize(deriv, rho, order, name):
    """Piecewise profile: ``deriv(0..2, t)`` outside the cap, Taylor inside.

    ``deriv(k, t)`` must return the k-th derivative of the kernel for t < 1.
    The cap is the strict set ``1 - t < rho``.
    """
    t0 = 1.0 - rho
    coeffs = np.array([deriv(k, t0) / math.factorial(k) for k in range(order + 1)])

    def poly(k, d):
        # k-th derivative of sum_j coeffs[j] d^j
        out = np.zeros_like(d)
        for j in range(order, k - 1, -1):
            out = out * d + coeffs[j] * math.perm(j, k)
        return out

    def make(k):
        def f(t):
            t = np.asarray(t, dtype=float)
            inside = (1.0 - t) < rho
            out = np.empty_like(t)
            if np.any(inside):
                out[inside] = poly(k, t[inside] - t0)
            outside = ~inside
            if np.any(outside):
                out[outside] = deriv(k, t[outside])
            return out[()]

        return f

    return ZonalProfile(make(0), make(1), make(2), breakpoint=t0, name=name)


def _green_any(k, t):
    return green_eval(t) if k == 0 else green_deriv(k, t)


def _single_any(k, t):
    return single_layer_eval(t) if k == 0 else single_layer_deriv(k, t)


def green_reg_profile(cfg):
    """Regularized Green function profile for ``cfg``."""
    return _regularize(_green_any, cfg.rho, cfg.taylor_order, f"green(rho={cfg.rho:g})")


def single_layer_reg_profile(cfg):
    """Regularized single layer kernel profile for ``cfg``."""
    return _regularize(_single_any, cfg.rho, cfg.taylor_order, f"single_layer(rho={cfg.rho:g})")


def green_profile():
    """Unregularized Green function as a profile (singular at t = 1)."""
    return ZonalProfile(
        green_eval, lambda t: green_deriv(1, t), lambda t: green_deriv(2, t), name="green"
    )


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def s_profile(cfg):
    """Profile whose first derivative is the scalar factor of ``s^rho``.

    ``deriv1(t) = (1/2 - S_rho - 1/(2 + 4 S_rho)) / (2 pi)`` so that the
    regularized vector kernel reads ``s(xi, eta) = deriv1(t) (eta - t xi)``.
    Outside the cap ``value`` equals ``dinv_green_eval``; inside it is the
    integral of ``deriv1`` from the breakpoint.
    """
    S = single_layer_reg_profile(cfg)
    t0 = 1.0 - cfg.rho

    def d1(t):
        s = np.asarray(S.value(t))
        return (0.5 - s - 1.0 / (2.0 + 4.0 * s)) / _TWO_PI

    def d2(t):
        s = np.asarray(S.value(t))
        ds = np.asarray(S.deriv1(t))
        return (-ds + 4.0 * ds / (2.0 + 4.0 * s) ** 2) / _TWO_PI

    base = float(dinv_green_eval(t0))

    def val(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        inside = (1.0 - t) < cfg.rho
        if np.any(~inside):
            out[~inside] = dinv_green_eval(t[~inside])
        if np.any(inside):
            ti = t[inside]
            half = 0.5 * (ti - t0)
            nodes = t0 + half[:, None] * (_GL_X + 1.0)
            out[inside] = base + half * (np.asarray(d1(nodes)) @ _GL_W)
        return out[()]

    return ZonalProfile(val, d1, d2, breakpoint=t0, name=f"dinv_green(rho={cfg.rho:g})")


# ---------------------------------------------------------------------------
# geometry and zonal differentiation


def _skew(v):
    """Cross-product matrices ``[v]_x`` with ``[v]_x w = v x w``."""
    z = np.zeros(v.shape[:-1])
    return np.stack(
        [
            np.stack([z, -v[..., 2], v[..., 1]], -1),
            np.stack([v[..., 2], z, -v[..., 0]], -1),
            np.stack([-v[..., 1], v[..., 0], z], -1),
        ],
        -2,
    )


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _pair(xi, eta):
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi, eta = np.broadcast_arrays(xi, eta)
    t = np.clip(np.einsum("...i,...i->...", xi, eta), -1.0, 1.0)
    return xi, eta, t


class SurfaceOps(NamedTuple):
    grad_xi: np.ndarray
    curl_xi: np.ndarray
    lap_xi: np.ndarray
    grad_grad: np.ndarray
    curl_curl: np.ndarray


def zonal_surface_ops(profile, xi, eta):
    """Surface derivatives of ``K(xi . eta)`` from the one-dimensional profile.

    With ``t = xi . eta``, ``d1 = eta - t xi`` and ``d2 = xi - t eta``::

        grad*_xi K          = K'(t) d1
        curl*_xi K          = K'(t) (xi x eta)
        Beltrami_xi K       = (1 - t^2) K''(t) - 2 t K'(t)
        grad*_xi (x) grad*_eta K = K'' d1 (x) d2 + K' ((I - xi xi^T) - d1 (x) eta)
        curl*_xi (x) curl*_eta K = K'' (xi x eta) (x) (eta x xi) - K' [xi]_x [eta]_x
    """
    xi, eta, t = _pair(xi, eta)
    k1 = np.asarray(profile.deriv1(t))
    k2 = np.asarray(profile.deriv2(t))
    d1 = eta - t[..., None] * xi
    d2 = xi - t[..., None] * eta
    cr = np.cross(xi, eta)
    eye = np.eye(3)
    grad = k1[..., None] * d1
    curl = k1[..., None] * cr
    lap = (1.0 - t * t) * k2 - 2.0 * t * k1
    gg = k2[..., None, None] * _outer(d1, d2) + k1[..., None, None] * (
        eye - _outer(xi, xi) - _outer(d1, eta)
    )
    cc = k2[..., None, None] * _outer(cr, -cr) - k1[..., None, None] * (_skew(xi) @ _skew(eta))
    return SurfaceOps(grad, curl, lap[()], gg, cc)


def s_vector_eval(which, cfg, xi, eta):
    """Regularized vector kernel ``s^rho`` for 'grad' or 'curl'."""
    xi, eta, t = _pair(xi, eta)
    h = np.asarray(s_profile(cfg).deriv1(t))[..., None]
    if which == "grad":
        return h * (eta - t[..., None] * xi)
    if which == "curl":
        return h * np.cross(xi, eta)
    raise DomainError(f"which must be 'grad' or 'curl', got {which!r}")


# ---------------------------------------------------------------------------
# scaling and wavelet tensor kernels


class ScaleKernels:
    """The three scaling kernels ``Phi_J^int, Phi_J^ext, Phi_J^q`` of one scale.

    The kernels are

    ``Phi^int = G_part + S_part``, ``Phi^ext = G_part - S_part`` and
    ``Phi^q = -curl*_xi (x) curl*_eta G_rho`` where::

        G_part = 1/2 xi (x) eta Beltrami_xi G_rho - 1/2 grad*_xi (x) grad*_eta G_rho
        S_part = 1/(8 pi) S_rho xi (x) eta - 1/(4 pi) xi (x) grad*_eta S_rho
                 + 1/4 grad*_xi (x) s_rho(eta, xi) - 1/(4 pi) grad*_xi S_rho (x) eta
    """

    cap = None

    def __init__(self, J, green_order=GREEN_ORDER, single_layer_order=SINGLE_LAYER_ORDER):
        self.J = int(J)
        self.rho = math.ldexp(1.0, -self.J)
        self.green_order = green_order
        self.single_layer_order = single_layer_order
        self.green = green_reg_profile(RegularizationConfig(self.rho, green_order))
        self.single = single_layer_reg_profile(RegularizationConfig(self.rho, single_layer_order))
        self.s = s_profile(RegularizationConfig(self.rho, single_layer_order))

    def _coefficients(self, t):
        g1 = np.asarray(self.green.deriv1(t))
        g2 = np.asarray(self.green.deriv2(t))
        s0 = np.asarray(self.single.value(t))
        s1 = np.asarray(self.single.deriv1(t))
        h1 = np.asarray(self.s.deriv1(t))
        h2 = np.asarray(self.s.deriv2(t))
        lap = (1.0 - t * t) * g2 - 2.0 * t * g1
        return g1, g2, s0, s1, h1, h2, lap

    def tensors(self, xi, eta):
        """Kernel tensors of shape ``(..., 3, 3, 3)`` ordered (int, ext, q)."""
        xi, eta, t = _pair(xi, eta)
        g1, g2, s0, s1, h1, h2, lap = self._coefficients(t)
        d1 = eta - t[..., None] * xi
        d2 = xi - t[..., None] * eta
        cr = np.cross(xi, eta)
        proj = np.eye(3) - _outer(xi, xi) - _outer(d1, eta)
        xe = _outer(xi, eta)
        dd = _outer(d1, d2)
        e = lambda a: a[..., None, None]  # noqa: E731
        gpart = e(0.5 * lap) * xe - 0.5 * (e(g2) * dd + e(g1) * proj)
        spart = (
            e(s0 / (8 * np.pi)) * xe
            - e(s1 / _FOUR_PI) * _outer(xi, d2)
            + 0.25 * (e(h2) * dd + e(h1) * proj)
            - e(s1 / _FOUR_PI) * _outer(d1, eta)
        )
        q = -(e(g2) * _outer(cr, -cr) - e(g1) * (_skew(xi) @ _skew(eta)))
        return np.stack([gpart + spart, gpart - spart, q], axis=-3)

    def apply(self, xi, eta, b):
        """Kernel-times-vector products ``Phi(xi, eta) b`` for all three parts.

        Equivalent to ``tensors(xi, eta) @ b`` without forming the tensors.
        Returns shape ``(..., 3, 3)``: part axis then vector components.
        """
        xi, eta, t = _pair(xi, eta)
        g1, g2, s0, s1, h1, h2, lap = self._coefficients(t)
        d1 = eta - t[..., None] * xi
        eb = np.einsum("...i,...i->...", eta, b)
        xb = np.einsum("...i,...i->...", xi, b)
        d2b = np.einsum("...i,...i->...", xi, b) - t * eb
        pb = b - xi * xb[..., None] - d1 * eb[..., None]
        e = lambda a: a[..., None]  # noqa: E731
        gpart = e(0.5 * lap * eb) * xi - 0.5 * (e(g2 * d2b) * d1 + e(g1) * pb)
        spart = (
            e(s0 * eb / (8 * np.pi) - s1 * d2b / _FOUR_PI) * xi
            + 0.25 * (e(h2 * d2b) * d1 + e(h1) * pb)
            - e(s1 * eb / _FOUR_PI) * d1
        )
        cr = np.cross(xi, eta)
        # -(g2 cr (-cr . b) - g1 xi x (eta x b))
        q = e(g2 * np.einsum("...i,...i->...", cr, b)) * cr + e(g1) * np.cross(xi, np.cross(eta, b))
        return np.stack([gpart + spart, gpart - spart, q], axis=-2)


class WaveletKernels:
    """Wavelet kernels ``Psi_J = Phi_{J+1} - Phi_J`` for all three parts.

    Supported in the cap ``1 - xi . eta < 2^-J``; outside it both scaling
    kernels are evaluated through identical floating point operations, so
    the difference is exactly zero.
    """

    def __init__(self, J, green_order=GREEN_ORDER, single_layer_order=SINGLE_LAYER_ORDER):
        self.J = int(J)
        self.coarse = ScaleKernels(J, green_order, single_layer_order)
        self.fine = ScaleKernels(J + 1, green_order, single_layer_order)
        self.cap = self.coarse.rho

    def tensors(self, xi, eta):
        return self.fine.tensors(xi, eta) - self.coarse.tensors(xi, eta)

    def apply(self, xi, eta, b):
        return self.fine.apply(xi, eta, b) - self.coarse.apply(xi, eta, b)


class _SinglePart:
    """Restricts a three-part kernel evaluator to one part."""

    def __init__(self, kernels, which):
        self.kernels = kernels
        self.index = PARTS.index(which)
        self.cap = kernels.cap

    def tensors(self, xi, eta):
        return self.kernels.tensors(xi, eta)[..., self.index, :, :]

    def apply(self, xi, eta, b):
        return self.kernels.apply(xi, eta, b)[..., self.index, :]


def kernel_evaluator(kernel_id, green_order=GREEN_ORDER, single_layer_order=SINGLE_LAYER_ORDER):
    """Evaluator with ``tensors``/``apply``/``cap`` for one tensor kernel."""
    kid = TensorKernelId(*kernel_id).check()
    cls = ScaleKernels if kid.form == "scaling" else WaveletKernels
    return _SinglePart(cls(kid.J, green_order, single_layer_order), kid.which)


def phi_eval(kernel_id, xi, eta, green_order=GREEN_ORDER, single_layer_order=SINGLE_LAYER_ORDER):
    """Scaling kernel ``Phi_J`` or wavelet kernel ``Psi_J`` as 3x3 tensors."""
    return kernel_evaluator(kernel_id, green_order, single_layer_order).tensors(xi, eta)
