"""
Helmholtz scalars, scaling and wavelet transforms, and the multiscale
separation of a spherical vector field into internal-source,
external-source and toroidal parts.

The scaling transform of scale ``J`` convolves the field with the tensor
kernels of :class:`~sphsep.kernels.ScaleKernels` at ``rho = 2^-J``. The
wavelet transform uses the difference of two consecutive scales, which is
supported in the cap ``1 - xi . eta < 2^-J`` and is evaluated only there.
Summing a coarse trend and wavelet details reproduces the scaling
transform of the finest scale (tree algorithm)::

    P_J = P_J0 + R_J0 + R_(J0+1) + ... + R_(J-1)
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .errors import DomainError, PreconditionError, UnderResolutionError
from .kernels import (
    GREEN_ORDER,
    PARTS,
    SINGLE_LAYER_ORDER,
    RegularizationConfig,
    ScaleKernels,
    WaveletKernels,
    green_reg_profile,
)
from .quadrature import GridField, cap_node_counts, convolve_tensor, integrate

__all__ = [
    "HelmholtzScalars",
    "SeparationResult",
    "helmholtz_scalars",
    "scaling_transform",
    "wavelet_transform",
    "separate",
    "check_resolution",
    "radial_mean",
    "MIN_CAP_NODES",
    "PART_KEYS",
]

log = logging.getLogger(__name__)

MIN_CAP_NODES = 9
RADIAL_MEAN_RTOL = 1e-6
PART_KEYS = {"int": "internal", "ext": "external", "q": "toroidal"}


@dataclass
class HelmholtzScalars:
    F1: GridField
    F2: GridField
    F3: GridField


class _HelmholtzKernels:
    """Kernels of the tangential Helmholtz scalars, embedded as tensors.

    The scalar ``F(xi) = sum_eta k(xi, eta) . f(eta)`` is carried as the
    vector ``xi F(xi)`` so that the grid convolution engine, which rotates
    vector outputs, applies unchanged.
    """

    cap = None

    def __init__(self, cfg):
        self.green = green_reg_profile(cfg)

    def _vectors(self, xi, eta):
        xi, eta = np.broadcast_arrays(np.asarray(xi, float), np.asarray(eta, float))
        t = np.clip(np.einsum("...i,...i->...", xi, eta), -1.0, 1.0)
        g1 = np.asarray(self.green.deriv1(t))[..., None]
        # -grad*_eta G and -curl*_eta G
        return xi, -g1 * (xi - t[..., None] * eta), -g1 * np.cross(eta, xi)

    def tensors(self, xi, eta):
        xi, v2, v3 = self._vectors(xi, eta)
        outer = lambda a: xi[..., :, None] * a[..., None, :]  # noqa: E731
        return np.stack([outer(v2), outer(v3)], axis=-3)

    def apply(self, xi, eta, b):
        xi, v2, v3 = self._vectors(xi, eta)
        dot = lambda a: np.einsum("...i,...i->...", a, b)[..., None]  # noqa: E731
        return np.stack([xi * dot(v2), xi * dot(v3)], axis=-2)


def helmholtz_scalars(f, cfg=None):
    """Helmholtz scalars of a vector field.

    ``F1`` is the radial component. ``F2`` and ``F3`` are convolutions with
    ``-grad*_eta G_rho`` and ``-curl*_eta G_rho`` of the regularized Green
    function, so that the tangential part of ``f`` is approximately
    ``grad* F2 + curl* F3``.
    """
    cfg = cfg or RegularizationConfig.from_scale(6)
    grid = f.grid
    out = convolve_tensor(_HelmholtzKernels(cfg), f)
    nodes = grid.nodes
    F2 = np.einsum("ni,ni->n", nodes, out[:, 0])
    F3 = np.einsum("ni,ni->n", nodes, out[:, 1])
    return HelmholtzScalars(f.radial(), GridField(grid, F2), GridField(grid, F3))


def radial_mean(b):
    """Quadrature integral of ``xi . b(xi)`` over the unit sphere."""
    return integrate(b.radial())


def check_resolution(grid, J, min_nodes=MIN_CAP_NODES):
    """Raise if the cap ``1 - xi . eta < 2^-(J-1)`` holds too few nodes.

    This is the support of the finest wavelet needed to reach scale ``J``.
    """
    if J <= 0:
        return
    cap = math.ldexp(1.0, -(J - 1))
    nodes = int(cap_node_counts(grid, cap).min())
    if nodes < min_nodes:
        raise UnderResolutionError(
            f"scale {J}: the wavelet cap 1 - xi.eta < 2^-{J - 1} holds only {nodes} grid "
            f"nodes on a {grid.n_lat}x{grid.n_lon} grid (minimum {min_nodes})",
            scale=J,
            cap=cap,
            nodes=nodes,
        )


def _which_index(which):
    if which not in PARTS:
        raise DomainError(f"which must be one of {PARTS}, got {which!r}")
    return PARTS.index(which)


def scaling_transform(
    which,
    J,
    b,
    green_order=GREEN_ORDER,
    single_layer_order=SINGLE_LAYER_ORDER,
    min_nodes=MIN_CAP_NODES,
):
    """Scaling transform ``P_J b`` for one part ('int', 'ext' or 'q')."""
    idx = _which_index(which)
    check_resolution(b.grid, J, min_nodes)
    out = convolve_tensor(ScaleKernels(J, green_order, single_layer_order), b)
    return GridField(b.grid, out[:, idx])


def wavelet_transform(
    which,
    J,
    b,
    green_order=GREEN_ORDER,
    single_layer_order=SINGLE_LAYER_ORDER,
    min_nodes=MIN_CAP_NODES,
):
    """Wavelet transform ``R_J b`` evaluated with the cap-truncated sum."""
    idx = _which_index(which)
    check_resolution(b.grid, J + 1, min_nodes)
    out = convolve_tensor(
        WaveletKernels(J, green_order, single_layer_order), b, truncate_to_support=True
    )
    return GridField(b.grid, out[:, idx])


def _split(grid, arr):
    return {PART_KEYS[p]: GridField(grid, arr[:, i]) for i, p in enumerate(PARTS)}


@dataclass
class SeparationResult:
    """Output of :func:`separate`.

    ``trend`` holds the scaling transforms at ``J0``; ``details[j]`` the
    wavelet transforms of scale ``j``. Each is a dict keyed by 'internal',
    'external' and 'toroidal'.
    """

    J0: int
    Jmax: int
    trend: Dict[str, GridField]
    details: Dict[int, Dict[str, GridField]] = field(default_factory=dict)
    green_order: int = GREEN_ORDER
    single_layer_order: int = SINGLE_LAYER_ORDER
    radial_mean: float = 0.0

    def at_scale(self, J):
        """The three parts at scale ``J0 <= J <= Jmax`` by telescoping."""
        if not self.J0 <= J <= self.Jmax:
            raise DomainError(f"scale {J} outside [{self.J0}, {self.Jmax}]")
        out = {k: v.values.copy() for k, v in self.trend.items()}
        for j in range(self.J0, J):
            for k in out:
                out[k] += self.details[j][k].values
        grid = next(iter(self.trend.values())).grid
        return {k: GridField(grid, v) for k, v in out.items()}

    @property
    def parts(self):
        return self.at_scale(self.Jmax)

    @property
    def internal(self):
        return self.parts["internal"]

    @property
    def external(self):
        return self.parts["external"]

    @property
    def toroidal(self):
        return self.parts["toroidal"]


def separate(
    b,
    J0=2,
    Jmax=8,
    green_order=GREEN_ORDER,
    single_layer_order=SINGLE_LAYER_ORDER,
    radial_tol=None,
    min_nodes=MIN_CAP_NODES,
):
    """Multiscale separation of ``b`` into internal, external and toroidal parts.

    A trend at scale ``J0`` from the globally supported scaling kernels is
    refined by the locally supported wavelet details of scales
    ``J0 .. Jmax-1``.

    Raises
    ------
    PreconditionError
        If the radial component of ``b`` has a nonzero mean beyond
        ``radial_tol`` (default ``1e-6 * sup|b| * 4 pi``).
    UnderResolutionError
        If some wavelet cap up to ``Jmax`` holds fewer than ``min_nodes``
        grid nodes.
    """
    if b.kind != "vector":
        raise DomainError("separate expects a vector field")
    if not 0 <= J0 <= Jmax:
        raise DomainError(f"need 0 <= J0 <= Jmax, got J0={J0}, Jmax={Jmax}")
    mean = radial_mean(b)
    tol = RADIAL_MEAN_RTOL * b.sup() * 4.0 * np.pi if radial_tol is None else radial_tol
    if abs(mean) > tol:
        raise PreconditionError(
            f"radial component has mean integral {mean:.6g} (tolerance {tol:.3g}); "
            "the separation requires a vanishing radial mean",
            measured=mean,
        )
    for J in range(J0, Jmax + 1):
        check_resolution(b.grid, J, min_nodes)

    grid = b.grid
    log.info("trend at scale %d", J0)
    trend = convolve_tensor(ScaleKernels(J0, green_order, single_layer_order), b)
    details = {}
    for j in range(J0, Jmax):
        log.info("wavelet details at scale %d", j)
        d = convolve_tensor(
            WaveletKernels(j, green_order, single_layer_order), b, truncate_to_support=True
        )
        details[j] = _split(grid, d)
    return SeparationResult(
        J0,
        Jmax,
        _split(grid, trend),
        details,
        green_order,
        single_layer_order,
        mean,
    )
