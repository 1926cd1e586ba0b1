"""
Averaging of scattered vector measurements onto an equiangular grid.

Every grid node collects the records of the colatitude/longitude cell of
side ``bin_deg`` centred on it (cells of neighbouring nodes overlap when
the bin is wider than the grid spacing). Each Cartesian component is
averaged separately with a Huber M-estimate of location, computed by
iteratively reweighted least squares with the cell scale fixed to the
normalized median absolute deviation. Nodes whose cell holds no record
are filled by inverse-distance interpolation and flagged.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .config import HUBER_C, RunConfig
from .errors import DomainError
from .quadrature import GridField, build_grid

__all__ = [
    "ScatteredDataset",
    "IngestResult",
    "huber_location",
    "grouped_huber",
    "cell_membership",
    "ingest",
    "dataset_from_field",
    "EARTH_RADIUS_KM",
    "MAD_SCALE",
]

EARTH_RADIUS_KM = 6371.2
MAD_SCALE = 1.4826
HUBER_RTOL = 1e-8
HUBER_MAXITER = 50
IDW_NEIGHBOURS = 4


@dataclass
class ScatteredDataset:
    """Scattered samples of a vector field.

    Parameters
    ----------
    colat_deg, lon_deg : array_like, shape (n,)
        Colatitude in [0, 180] and longitude in [-180, 360] degrees.
    radius_km : array_like, shape (n,)
        Radius of each record, positive.
    values : array_like, shape (n, 3)
        Cartesian field components; units pass through untouched.
    """

    colat_deg: np.ndarray
    lon_deg: np.ndarray
    radius_km: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.colat_deg = np.atleast_1d(np.asarray(self.colat_deg, dtype=float))
        self.lon_deg = np.atleast_1d(np.asarray(self.lon_deg, dtype=float))
        self.radius_km = np.atleast_1d(np.asarray(self.radius_km, dtype=float))
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        n = self.colat_deg.size
        if n == 0:
            raise DomainError("dataset holds no records")
        if self.lon_deg.shape != (n,) or self.radius_km.shape != (n,) or self.values.shape != (n, 3):
            raise DomainError("dataset columns have inconsistent lengths")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field samples must be finite")
        if not np.all((self.colat_deg >= 0.0) & (self.colat_deg <= 180.0)):
            raise DomainError("colatitudes must lie in [0, 180] degrees")
        if not np.all((self.lon_deg >= -180.0) & (self.lon_deg <= 360.0)):
            raise DomainError("longitudes must lie in [-180, 360] degrees")
        if not np.all(self.radius_km > 0.0):
            raise DomainError("radii must be positive")

    def __len__(self):
        return self.colat_deg.size


@dataclass
class IngestResult:
    """Gridded field with per-node bookkeeping.

    ``counts[p]`` is the number of records averaged at node ``p``;
    ``filled[p]`` is True where the cell was empty and the value was
    interpolated.
    """

    field: GridField
    counts: np.ndarray
    filled: np.ndarray

    @property
    def filled_indices(self):
        return np.flatnonzero(self.filled)


def _group_median(groups, x, starts, counts):
    order = np.lexsort((x, groups))
    xs = x[order]
    lo = xs[starts + (counts - 1) // 2]
    hi = xs[starts + counts // 2]
    return 0.5 * (lo + hi)


def grouped_huber(groups, x, n_groups, c=HUBER_C, rtol=HUBER_RTOL, maxiter=HUBER_MAXITER):
    """Huber location estimate of ``x`` within each group.

    Parameters
    ----------
    groups : ndarray of int, shape (m,)
        Group label of each sample, in ``0 .. n_groups - 1``.
    x : ndarray, shape (m,)
        Samples.
    n_groups : int
        Number of groups; empty groups yield NaN.
    c : float
        Huber constant; weights are ``min(1, c / |r / sigma|)``.

    Returns
    -------
    ndarray, shape (n_groups,)

    Notes
    -----
    The iteration starts at the group median with
    ``sigma = 1.4826 * MAD`` held fixed. A group with ``sigma = 0`` (more
    than half its samples coincide) returns the median, the limit of the
    estimate as the scale shrinks. A group stops once the update changes
    the estimate by less than ``rtol * max(|mu|, sigma)``, or after
    ``maxiter`` updates.
    """
    groups = np.asarray(groups, dtype=np.intp)
    x = np.asarray(x, dtype=float)
    counts = np.bincount(groups, minlength=n_groups)
    out = np.full(n_groups, np.nan)
    present = counts > 0
    if not np.any(present):
        return out
    cnt = counts[present]
    starts = np.concatenate(([0], np.cumsum(cnt)[:-1]))
    # compress labels to the non-empty groups
    rank = np.cumsum(present) - 1
    g = rank[groups]

    mu = _group_median(g, x, starts, cnt)
    sigma = MAD_SCALE * _group_median(g, np.abs(x - mu[g]), starts, cnt)
    active = sigma > 0.0
    for _ in range(maxiter):
        if not np.any(active):
            break
        r = np.abs(x - mu[g])
        cs = c * sigma[g]
        w = np.where(r > cs, cs / np.where(r > cs, r, 1.0), 1.0)
        new = np.bincount(g, weights=w * x, minlength=cnt.size) / np.bincount(
            g, weights=w, minlength=cnt.size
        )
        step = np.abs(new - mu)
        mu = np.where(active, new, mu)
        active &= step >= rtol * np.maximum(np.abs(new), sigma)
    out[present] = mu
    return out


def huber_location(x, c=HUBER_C):
    """Huber M-estimate of location of a 1-D sample; see :func:`grouped_huber`."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size == 0:
        raise DomainError("empty sample")
    return float(grouped_huber(np.zeros(x.size, dtype=np.intp), x, 1, c)[0])


def _offsets(half, step, n, periodic):
    k = int(np.ceil(half / step)) + 1
    if periodic and 2 * k + 1 >= n:
        return None
    return range(-k, k + 1)


def cell_membership(grid, colat_deg, lon_deg, bin_deg):
    """Pairs ``(record, node)`` with the record inside the node's cell.

    A record belongs to the cell of node ``(theta_j, phi_l)`` when
    ``|theta - theta_j| <= bin_deg / 2`` and the longitude difference,
    wrapped to [-180, 180), is at most ``bin_deg / 2``. Pairs are sorted by
    node and then record.
    """
    half = 0.5 * bin_deg
    dth = 180.0 / grid.n_lat
    dph = 360.0 / grid.n_lon
    th_nodes = np.degrees(grid.colatitudes)
    ph_nodes = np.degrees(grid.longitudes)
    colat = np.asarray(colat_deg, dtype=float)
    lon = np.mod(np.asarray(lon_deg, dtype=float), 360.0)
    idx = np.arange(colat.size)

    j0 = np.floor(colat / dth).astype(np.intp)
    lat_pairs = []
    for dj in _offsets(half, dth, grid.n_lat, False):
        j = j0 + dj
        ok = (j >= 0) & (j < grid.n_lat)
        ok[ok] &= np.abs(colat[ok] - th_nodes[j[ok]]) <= half
        lat_pairs.append((idx[ok], j[ok]))
    rec_j = np.concatenate([p[0] for p in lat_pairs])
    ring = np.concatenate([p[1] for p in lat_pairs])

    l0 = np.rint(lon / dph).astype(np.intp)
    lon_offsets = _offsets(half, dph, grid.n_lon, True)
    if lon_offsets is None:
        # the cell spans every longitude
        all_l = np.arange(grid.n_lon)
        cand = [(np.repeat(rec_j, grid.n_lon), np.tile(all_l, rec_j.size), np.repeat(ring, grid.n_lon))]
    else:
        cand = [(rec_j, np.mod(l0[rec_j] + dl, grid.n_lon), ring) for dl in lon_offsets]
    recs, nodes = [], []
    for r, l, j in cand:
        diff = np.mod(lon[r] - ph_nodes[l] + 180.0, 360.0) - 180.0
        ok = np.abs(diff) <= half
        recs.append(r[ok])
        nodes.append(j[ok] * grid.n_lon + l[ok])
    recs = np.concatenate(recs)
    nodes = np.concatenate(nodes)
    order = np.lexsort((recs, nodes))
    return recs[order], nodes[order]


def ingest(data, cfg=None, grid=None):
    """Average a scattered dataset onto an equiangular grid.

    Parameters
    ----------
    data : ScatteredDataset
    cfg : RunConfig, optional
        Supplies the grid size, ``bin_deg`` and ``huber_c``.
    grid : EquiangularGrid, optional
        Target grid; by default built from ``cfg`` with the median record
        radius.

    Returns
    -------
    IngestResult

    Raises
    ------
    DomainError
        If no cell holds any record.
    """
    cfg = cfg or RunConfig()
    if grid is None:
        grid = build_grid(cfg.n_lat, cfg.n_lon, radius=float(np.median(data.radius_km)))
    recs, nodes = cell_membership(grid, data.colat_deg, data.lon_deg, cfg.bin_deg)
    counts = np.bincount(nodes, minlength=grid.size)
    if recs.size == 0:
        raise DomainError("every grid cell is empty; no record falls inside any cell")
    values = np.column_stack(
        [grouped_huber(nodes, data.values[recs, i], grid.size, cfg.huber_c) for i in range(3)]
    )
    filled = counts == 0
    if np.any(filled):
        xyz = grid.nodes
        have = np.flatnonzero(~filled)
        k = min(IDW_NEIGHBOURS, have.size)
        dist, nb = cKDTree(xyz[have]).query(xyz[filled], k=k)
        dist = dist.reshape(-1, k)
        nb = nb.reshape(-1, k)
        w = 1.0 / dist**2
        values[filled] = np.einsum("pk,pki->pi", w, values[have[nb]]) / w.sum(axis=1)[:, None]
    return IngestResult(GridField(grid, values), counts, filled)


def dataset_from_field(field, radius_km=None):
    """One record per node of a gridded field (useful for round trips)."""
    th, ph = field.grid.theta_phi
    n = field.grid.size
    r = field.grid.radius if radius_km is None else radius_km
    return ScatteredDataset(np.degrees(th), np.degrees(ph), np.full(n, float(r)), field.values)

