"""
Equiangular grids on the sphere, quadrature weights and the convolution
engine used for every surface integral in the package.

Nodes sit at colatitudes ``(j + 1/2) pi / n_lat`` and longitudes
``2 pi l / n_lon``, so the poles are never sampled. Ring weights are the
solution of the linear system that integrates ``P_0 .. P_{n_lat-1}`` in
``cos(theta)`` exactly; uniform longitude sampling handles the azimuthal
direction. Node ordering is row-major with latitude outer.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .harmonics import legendre_table, spherical_to_cartesian

__all__ = [
    "EquiangularGrid",
    "GridField",
    "build_grid",
    "ring_weights",
    "fejer_weights",
    "integrate",
    "convolve_tensor",
    "cap_node_counts",
]

# kernel pairs evaluated per block; bounds temporary memory
_BLOCK_PAIRS = 1 << 18


def ring_weights(n_lat, n_lon):
    """Per-node weights of each latitude ring.

    Solves ``sum_j w_j n_lon P_n(cos theta_j) = 4 pi delta_{n0}`` for
    ``n = 0 .. n_lat - 1``.
    """
    theta = (np.arange(n_lat) + 0.5) * np.pi / n_lat
    A = legendre_table(n_lat - 1, np.cos(theta))
    rhs = np.zeros(n_lat)
    rhs[0] = 4.0 * np.pi / n_lon
    return np.linalg.solve(A, rhs)


def fejer_weights(n):
    """Fejer's first rule on ``[-1, 1]`` at nodes ``cos((j + 1/2) pi / n)``."""
    theta = (np.arange(n) + 0.5) * np.pi / n
    k = np.arange(1, n // 2 + 1)
    s = np.cos(2.0 * np.outer(theta, k)) / (4.0 * k * k - 1.0)
    return 2.0 / n * (1.0 - 2.0 * s.sum(axis=1))


@dataclass(frozen=True, eq=False)
class EquiangularGrid:
    """Equiangular grid of ``n_lat x n_lon`` nodes on a sphere of radius ``radius``."""

    n_lat: int
    n_lon: int
    radius: float = 1.0
    colatitudes: np.ndarray = field(init=False, repr=False)
    longitudes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_lat < 2 or self.n_lon < 4:
            raise DomainError(f"degenerate grid {self.n_lat}x{self.n_lon}")
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        object.__setattr__(self, "colatitudes", (np.arange(self.n_lat) + 0.5) * np.pi / self.n_lat)
        object.__setattr__(self, "longitudes", np.arange(self.n_lon) * 2.0 * np.pi / self.n_lon)
        object.__setattr__(self, "weights", ring_weights(self.n_lat, self.n_lon))

    @property
    def size(self):
        return self.n_lat * self.n_lon

    @property
    def degree(self):
        """Largest total polynomial degree integrated exactly."""
        return min(self.n_lat, self.n_lon) - 1

    @property
    def theta_phi(self):
        th, ph = np.meshgrid(self.colatitudes, self.longitudes, indexing="ij")
        return th.ravel(), ph.ravel()

    @property
    def nodes(self):
        """Unit vectors of all nodes, shape ``(size, 3)``."""
        th, ph = self.theta_phi
        return spherical_to_cartesian(th, ph)

    @property
    def node_weights(self):
        return np.repeat(self.weights, self.n_lon)

    @property
    def spacing(self):
        """Colatitude spacing in radians."""
        return np.pi / self.n_lat

    def same_as(self, other):
        return (self.n_lat, self.n_lon, self.radius) == (other.n_lat, other.n_lon, other.radius)


def build_grid(n_lat, n_lon, radius=1.0):
    """Build an :class:`EquiangularGrid`."""
    return EquiangularGrid(int(n_lat), int(n_lon), float(radius))


@dataclass(eq=False)
class GridField:
    """Scalar or 3-vector samples at every node of a grid."""

    grid: EquiangularGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.grid.size or self.values.ndim > 2:
            raise DomainError(
                f"expected {self.grid.size} samples, got array of shape {self.values.shape}"
            )
        if self.values.ndim == 2 and self.values.shape[1] != 3:
            raise DomainError("vector samples must have 3 components")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field samples must be finite")

    @property
    def kind(self):
        return "scalar" if self.values.ndim == 1 else "vector"

    def radial(self):
        """Scalar field ``xi . f(xi)`` of a vector field."""
        return GridField(self.grid, np.einsum("ni,ni->n", self.grid.nodes, self.values))

    def sup(self):
        v = self.values
        return float(np.max(np.abs(v) if v.ndim == 1 else np.linalg.norm(v, axis=1)))

    def __add__(self, other):
        return GridField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return GridField(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return GridField(self.grid, self.values * scalar)

    __rmul__ = __mul__


def integrate(field):
    """Quadrature of a scalar field over the unit sphere."""
    if field.kind != "scalar":
        raise DomainError("integrate expects a scalar field")
    return float(field.grid.node_weights @ field.values)


def _chunks(n, size):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def convolve_tensor(kernel, field, targets=None, truncate_to_support=False):
    """Discrete convolution ``sum_eta w(eta) K(xi, eta) b(eta)``.

    Parameters
    ----------
    kernel : object
        Provides ``apply(xi, eta, b)`` returning kernel-vector products for
        broadcast pairs (trailing shape ``(3,)`` or ``(p, 3)``) and a ``cap``
        attribute: ``None`` for globally supported kernels, otherwise the
        support radius ``rho`` of ``1 - xi . eta < rho``.
    field : GridField
        Vector field sampled on the grid.
    targets : array_like, shape (m, 3), optional
        Evaluation points; the grid nodes by default.
    truncate_to_support : bool
        Sum only over nodes inside the kernel's cap.
    """
    if field.kind != "vector":
        raise DomainError("convolve_tensor expects a vector field")
    grid = field.grid
    nodes = grid.nodes
    wb = field.values * grid.node_weights[:, None]

    cap = getattr(kernel, "cap", None)
    if truncate_to_support and cap is None:
        raise DomainError("truncation requested for a kernel without compact support")
    if not truncate_to_support:
        cap = None

    if targets is None and hasattr(kernel, "tensors"):
        return _convolve_rings(kernel, grid, field.values, cap)
    targets = nodes if targets is None else np.asarray(targets, dtype=float)
    if cap is not None:
        return _convolve_local(kernel, nodes, wb, targets, cap)

    out = None
    block = max(1, _BLOCK_PAIRS // len(nodes))
    for sl in _chunks(len(targets), block):
        vals = kernel.apply(targets[sl, None, :], nodes[None, :, :], wb[None, :, :])
        part = vals.sum(axis=1)
        if out is None:
            out = np.empty((len(targets),) + part.shape[1:])
        out[sl] = part
    return out


def _z_rotations(phi):
    c, s = np.cos(phi), np.sin(phi)
    R = np.zeros(phi.shape + (3, 3))
    R[..., 0, 0] = c
    R[..., 0, 1] = -s
    R[..., 1, 0] = s
    R[..., 1, 1] = c
    R[..., 2, 2] = 1.0
    return R


def _convolve_rings(kernel, grid, values, cap):
    """Convolution at the grid nodes exploiting longitude symmetry.

    For a zonal tensor kernel ``K(Q xi, Q eta) = Q K(xi, eta) Q^T``. With
    ``R_l`` the rotation about the z axis by the l-th longitude, the sum at
    node ``(i, l)`` becomes ``R_l sum_j w_j sum_d K(xi_i0, eta_jd) R_d
    beta_j[l + d]`` where ``beta_jm = R_m^T b_jm``. Kernel tensors are thus
    needed for one target per ring only. With ``cap`` set, only rings and
    longitude offsets that can reach the cap are visited.
    """
    n_lat, n_lon = grid.n_lat, grid.n_lon
    theta, lon = grid.colatitudes, grid.longitudes
    R = _z_rotations(lon)
    beta = np.einsum("mba,jmb->jma", R, values.reshape(n_lat, n_lon, 3))
    beta2 = np.concatenate([beta, beta], axis=1)
    # signed offsets, d and n_lon - d describe the same longitude difference
    offsets = np.arange(n_lon)
    signed = np.where(offsets > n_lon // 2, offsets - n_lon, offsets)
    reps = spherical_to_cartesian(theta, np.zeros(n_lat))
    w = grid.weights
    out_local = None
    for i in range(n_lat):
        if cap is None:
            rings = np.arange(n_lat)
            dsel = offsets
        else:
            # rings whose colatitude difference keeps them within the cap
            dtheta = np.abs(theta - theta[i])
            rings = np.nonzero(1.0 - np.cos(dtheta) < cap * (1.0 + 1e-9) + 1e-15)[0]
            if rings.size == 0:
                continue
            st = np.sin(theta[i]) * np.sin(theta[rings])
            ct = np.cos(theta[i]) * np.cos(theta[rings])
            # 1 - (st cos(phi) + ct) < cap  <=>  cos(phi) > (1 - cap - ct) / st
            with np.errstate(divide="ignore", invalid="ignore"):
                lim = np.where(st > 0, (1.0 - cap - ct) / st, -np.inf)
            lim = np.min(lim)
            if lim <= -1.0:
                dsel = offsets
            else:
                phimax = np.arccos(min(lim, 1.0))
                dmax = int(np.floor(phimax / (2 * np.pi / n_lon))) + 1
                dsel = offsets[np.abs(signed) <= dmax] if 2 * dmax + 1 < n_lon else offsets
        eta = spherical_to_cartesian(theta[rings][:, None], lon[dsel][None, :])
        T = kernel.tensors(reps[i], eta)
        single = T.ndim == 4
        if single:
            T = T[:, :, None]
        # K~[j, d] = w_j K(xi_i0, eta_jd) R_d, laid out as (j, d, b) x (p, a)
        Kt = np.einsum("jdpab,dbc->jdcpa", T, R[dsel]) * w[rings][:, None, None, None, None]
        P = Kt.shape[3]
        Kt = Kt.reshape(len(rings) * len(dsel) * 3, P * 3)
        # beta_j[l + d] for all l: (l, j, d, b)
        idx = (np.arange(n_lon)[:, None] + dsel[None, :])
        B = beta2[rings][:, idx, :].transpose(1, 0, 2, 3).reshape(n_lon, -1)
        gamma = (B @ Kt).reshape(n_lon, P, 3)
        if out_local is None:
            out_local = np.zeros((n_lat, n_lon, P, 3))
            out_single = single
        out_local[i] = gamma
    if out_local is None:
        return np.zeros((grid.size, 3))
    out = np.einsum("lac,ilpc->ilpa", R, out_local).reshape(grid.size, -1, 3)
    return out[:, 0, :] if out_single else out


def _convolve_local(kernel, nodes, wb, targets, cap):
    tree = cKDTree(nodes)
    # chord length of the cap boundary, padded so boundary nodes are kept
    radius = np.sqrt(2.0 * cap) * (1.0 + 1e-9)
    out = None
    block = max(1, _BLOCK_PAIRS // max(1, int(len(nodes) * cap / 2.0) + 1))
    for sl in _chunks(len(targets), block):
        tg = targets[sl]
        lists = tree.query_ball_point(tg, radius)
        counts = np.fromiter((len(x) for x in lists), dtype=np.intp, count=len(lists))
        owner = np.repeat(np.arange(len(tg)), counts)
        src = np.fromiter((j for x in lists for j in x), dtype=np.intp, count=int(counts.sum()))
        vals = kernel.apply(tg[owner], nodes[src], wb[src])
        if out is None:
            out = np.zeros((len(targets),) + vals.shape[1:])
        flat = vals.reshape(len(owner), -1)
        acc = np.zeros((len(tg), flat.shape[1]))
        for c in range(flat.shape[1]):
            acc[:, c] = np.bincount(owner, weights=flat[:, c], minlength=len(tg))
        out[sl] = acc.reshape((len(tg),) + vals.shape[1:])
    if out is None:
        out = np.zeros((len(targets), 3))
    return out


def cap_node_counts(grid, cap, targets=None):
    """Number of grid nodes with ``1 - xi . eta < cap`` around each target.

    By default one target per latitude ring (at the first longitude), which
    covers every distinct neighbourhood shape of the grid.
    """
    nodes = grid.nodes
    if targets is None:
        targets = nodes[:: grid.n_lon]
    tree = cKDTree(nodes)
    lists = tree.query_ball_point(targets, np.sqrt(2.0 * cap) * (1.0 + 1e-9))
    counts = np.empty(len(targets), dtype=int)
    for i, lst in enumerate(lists):
        t = nodes[lst] @ targets[i]
        counts[i] = int(np.count_nonzero(1.0 - t < cap))
    return counts
