import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from sphsep.config import RunConfig, parse_grid
from sphsep.errors import DomainError
from sphsep.ingest import (
    ScatteredDataset,
    cell_membership,
    dataset_from_field,
    grouped_huber,
    huber_location,
    ingest,
)
from sphsep.quadrature import GridField, build_grid

# frozen values of the independent estimating-equation oracle (root of
# sum psi((x - mu) / sigma) = 0 with sigma = 1.4826 MAD), computed before the build
HUBER_ORACLE = [
    ([1.0, 1.0, 1.0, 100.0], 1.0),
    ([-3.0, 3.0], 0.0),
    ([1.0, 2.0, 3.0, 4.0, 50.0], 3.0),
    ([0.3, -1.2, 0.7, 2.2, 9.5, 0.1], 0.83876037),
]


@pytest.mark.parametrize("sample, expected", HUBER_ORACLE)
def test_huber_oracle(sample, expected):
    assert_allclose(huber_location(sample), expected, atol=1e-8)


def test_outlier_example():
    assert abs(huber_location([1, 1, 1, 100], c=1.345) - 1.0) < 0.2


@given(st.floats(1e-3, 1e6))
def test_symmetric_pair(a):
    assert huber_location([-a, a]) == 0.0


def test_single_value():
    assert huber_location([7.25]) == 7.25
    with pytest.raises(DomainError):
        huber_location([])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), st.floats(0.5, 3.0))
@settings(max_examples=200, deadline=None)
def test_estimate_within_sample_range(sample, c):
    mu = huber_location(sample, c)
    assert min(sample) - 1e-9 <= mu <= max(sample) + 1e-9


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=20), st.floats(-100, 100), st.floats(0.1, 10))
@settings(max_examples=100, deadline=None)
def test_affine_equivariance(sample, shift, scale):
    x = np.asarray(sample)
    assert_allclose(huber_location(scale * x + shift), scale * huber_location(x) + shift, atol=1e-6 * (1 + np.abs(x).max() * scale + abs(shift)))


def test_large_c_gives_mean():
    x = np.array([0.0, 1.0, 2.0, 10.0])
    assert_allclose(huber_location(x, c=1e6), x.mean(), rtol=1e-12)


def test_grouped_matches_individual(rng):
    groups = rng.integers(0, 6, size=80)
    groups[groups == 4] = 5  # leave group 4 empty
    x = rng.standard_t(2, size=80)
    out = grouped_huber(groups, x, 7)
    for g in range(7):
        sel = groups == g
        if sel.any():
            assert_allclose(out[g], huber_location(x[sel]), atol=1e-12)
        else:
            assert np.isnan(out[g])


# --- datasets and cells -----------------------------------------------------


def test_dataset_validation():
    ok = dict(colat_deg=[10.0], lon_deg=[20.0], radius_km=[6821.2], values=[[1.0, 2.0, 3.0]])
    assert len(ScatteredDataset(**ok)) == 1
    for key, bad in [("colat_deg", [181.0]), ("lon_deg", [400.0]), ("radius_km", [0.0]),
                     ("values", [[1.0, np.inf, 0.0]]), ("values", [[1.0, 2.0]])]:
        with pytest.raises(DomainError):
            ScatteredDataset(**dict(ok, **{key: bad}))
    with pytest.raises(DomainError):
        ScatteredDataset([], [], [], np.zeros((0, 3)))


def test_run_config():
    cfg = RunConfig()
    assert (cfg.n_lat, cfg.n_lon, cfg.bin_deg, cfg.J0, cfg.Jmax) == (180, 180, 2.5, 2, 9)
    assert cfg.huber_c == 1.345
    with pytest.raises(DomainError):
        RunConfig(J0=5, Jmax=4)
    with pytest.raises(DomainError):
        RunConfig(bin_deg=0.0)
    assert parse_grid("64x128") == (64, 128)
    with pytest.raises(DomainError):
        parse_grid("64-128")


def test_cell_membership_wraps_longitude():
    g = build_grid(36, 72)  # 5 degree spacing, nodes at colat 2.5 + 5 j and lon 5 l
    recs, nodes = cell_membership(g, [47.5, 47.5], [359.0, -1.0], 2.5)
    j = 9
    assert sorted(nodes.tolist()) == [j * 72, j * 72]
    assert sorted(recs.tolist()) == [0, 1]


def test_cell_membership_overlap():
    g = build_grid(180, 180)
    # a record between nodes lies in the 2.5 degree cells of several nodes
    recs, nodes = cell_membership(g, [45.0], [1.0], 2.5)
    th = np.degrees(g.theta_phi[0][nodes])
    ph = np.degrees(g.theta_phi[1][nodes])
    assert np.all(np.abs(th - 45.0) <= 1.25) and np.all(np.abs(ph - 1.0) <= 1.25)
    assert len(nodes) == 4


def test_single_record_per_cell(rng):
    g = build_grid(18, 36)
    field = GridField(g, rng.normal(size=(g.size, 3)))
    res = ingest(dataset_from_field(field), RunConfig(n_lat=18, n_lon=36, bin_deg=2.5))
    assert_allclose(res.field.values, field.values, atol=0)
    assert np.all(res.counts == 1) and not res.filled.any()


def test_cell_with_outlier():
    g = build_grid(18, 36)
    th, ph = np.degrees(g.theta_phi[0][0]), np.degrees(g.theta_phi[1][0])
    vals = np.array([[1.0, 2.0, 0.0], [1.0, 2.0, -1.0], [1.0, 2.0, 1.0], [100.0, 2.0, 50.0]])
    data = ScatteredDataset(np.full(4, th), np.full(4, ph), np.full(4, 6821.2), vals)
    res = ingest(data, RunConfig(n_lat=18, n_lon=36, bin_deg=2.5))
    assert res.counts[0] == 4
    v = res.field.values[0]
    assert abs(v[0] - 1.0) < 0.2
    assert v[1] == 2.0
    assert vals[:, 2].min() <= v[2] <= vals[:, 2].max()
    assert_allclose(res.field.grid.radius, 6821.2)


def test_empty_cells_filled_and_flagged(rng):
    g = build_grid(18, 36)
    field = GridField(g, np.tile([1.0, -2.0, 3.0], (g.size, 1)))
    data = dataset_from_field(field)
    keep = np.ones(g.size, bool)
    keep[[5, 100, 300]] = False
    sub = ScatteredDataset(data.colat_deg[keep], data.lon_deg[keep], data.radius_km[keep], data.values[keep])
    res = ingest(sub, RunConfig(n_lat=18, n_lon=36, bin_deg=2.5))
    assert res.filled_indices.tolist() == [5, 100, 300]
    # inverse-distance weights reproduce a constant field
    assert_allclose(res.field.values, field.values, rtol=1e-14)


def test_all_cells_empty():
    data = ScatteredDataset([0.0], [7.0], [6371.2], [[1.0, 1.0, 1.0]])
    with pytest.raises(DomainError):
        ingest(data, RunConfig(n_lat=18, n_lon=36, bin_deg=0.5))


def test_pole_record():
    data = ScatteredDataset([0.0], [123.0], [6821.2], [[0.0, 0.0, 5.0]])
    res = ingest(data, RunConfig(n_lat=180, n_lon=180, bin_deg=2.5))
    hit = np.flatnonzero(res.counts)
    assert hit.size > 0 and np.all(hit < 180 * 2)
    assert_allclose(res.field.values, np.tile([0.0, 0.0, 5.0], (res.field.grid.size, 1)))
