import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghicast.errors import DataError, DisconnectedAfterPrune, DuplicateCoordinates
from ghicast.geo_graph import (
    EARTH_RADIUS_KM,
    Location,
    SpatialGraph,
    build_graph,
    haversine,
    pairwise_distances,
    read_graph,
    read_locations,
    write_graph,
    write_locations,
)
from ghicast.synth import SynthConfig, grid_locations


def cosine_law_km(lat1, lon1, lat2, lon2):
    # independent great-circle oracle: spherical law of cosines
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, c)))


def test_haversine_identity():
    a = Location(0, 29.4, -98.5)
    assert haversine(a, a) == 0.0


def test_haversine_antipodal_half_circumference():
    d = haversine(Location(0, 0.0, 0.0), Location(1, 0.0, 180.0))
    assert d == pytest.approx(math.pi * 6371.0, rel=1e-12)
    assert d == pytest.approx(20015.1, abs=0.1)


def test_haversine_matches_cosine_law_oracle():
    a, b = Location(0, 29.42, -98.49), Location(1, 29.42, -98.30)
    oracle = cosine_law_km(29.42, -98.49, 29.42, -98.30)
    assert abs(haversine(a, b) - oracle) / oracle < 1e-3


@settings(max_examples=100, deadline=None)
@given(
    st.floats(-80, 80), st.floats(-179, 179), st.floats(-80, 80), st.floats(-179, 179)
)
def test_haversine_symmetric_and_agrees_with_oracle(lat1, lon1, lat2, lon2):
    a, b = Location(0, lat1, lon1), Location(1, lat2, lon2)
    d = haversine(a, b)
    assert d == pytest.approx(haversine(b, a), abs=1e-9)
    oracle = cosine_law_km(lat1, lon1, lat2, lon2)
    # the cosine law loses precision at tiny separations
    if oracle > 1.0:
        assert d == pytest.approx(oracle, rel=1e-6)


def test_location_bounds():
    with pytest.raises(DataError):
        Location(0, 91.0, 0.0)
    with pytest.raises(DataError):
        Location(0, 0.0, -181.0)


def test_three_locations_complete_graph():
    locs = [Location(0, 29.0, -98.0), Location(1, 29.1, -98.0), Location(2, 29.0, -98.2)]
    g = build_graph(locs)
    assert g.n_edges == 3
    assert np.all((g.weight > 0) & (g.weight <= 1))


def test_median_sigma_and_gaussian_weights():
    locs = [Location(0, 29.0, -98.0), Location(1, 29.1, -98.0), Location(2, 29.0, -98.2), Location(3, 29.3, -98.1)]
    g = build_graph(locs)
    d = pairwise_distances(locs)
    iu = np.triu_indices(4, 1)
    sigma = float(np.median(d[iu]))
    assert g.sigma == pytest.approx(sigma)
    for a, b, dist, w in g.edges():
        assert dist == pytest.approx(d[a, b])
        assert w == pytest.approx(math.exp(-dist**2 / (2 * sigma**2)))


def test_fixed_sigma():
    locs = [Location(0, 29.0, -98.0), Location(1, 29.1, -98.0)]
    g = build_graph(locs, kernel_sigma=5.0)
    assert g.sigma == 5.0
    assert g.weight[0] == pytest.approx(math.exp(-g.distance[0] ** 2 / 50.0))


def test_equal_distances_equal_weights():
    # points symmetric about the meridian of the centre point
    locs = [Location(0, 10.0, 0.0), Location(1, 10.0, 0.3), Location(2, 10.0, -0.3)]
    g = build_graph(locs)
    w = {(a, b): wt for a, b, _, wt in g.edges()}
    assert w[(0, 1)] == pytest.approx(w[(0, 2)], rel=1e-12)


def test_prune_ten_percent_on_288_grid():
    locs = grid_locations(SynthConfig())
    assert len(locs) == 288
    g = build_graph(locs, prune_frac=0.10)
    assert g.n_edges == round(0.9 * 288 * 287 / 2)
    full = build_graph(locs)
    # the longest edges were the ones removed
    assert g.distance.max() <= np.sort(full.distance)[g.n_edges - 1] + 1e-9


def test_duplicate_coordinates():
    with pytest.raises(DuplicateCoordinates):
        build_graph([Location(0, 1.0, 1.0), Location(1, 1.0, 1.0)])


def test_disconnected_after_prune():
    # two tight clusters far apart are joined only by long edges
    locs = [Location(0, 0.0, 0.0), Location(1, 0.0, 0.01), Location(2, 10.0, 0.0), Location(3, 10.0, 0.01)]
    with pytest.raises(DisconnectedAfterPrune):
        build_graph(locs, prune_frac=0.7)


def test_prune_frac_range():
    locs = [Location(0, 0.0, 0.0), Location(1, 0.0, 1.0)]
    with pytest.raises(DataError):
        build_graph(locs, prune_frac=1.0)


def test_from_edges_validation():
    with pytest.raises(DataError):
        SpatialGraph.from_edges(2, [(0, 0, 1.0, 1.0)])
    with pytest.raises(DataError):
        SpatialGraph.from_edges(2, [(0, 1, 1.0, 1.0), (1, 0, 1.0, 1.0)])
    with pytest.raises(DataError):
        SpatialGraph.from_edges(2, [(0, 1, 1.0, 0.0)])


def test_csr_symmetric():
    g = build_graph(grid_locations(SynthConfig(rows=2, cols=3)))
    indptr, indices, weights = g.csr()
    assert indptr[-1] == 2 * g.n_edges
    for i in range(g.n):
        nb = indices[indptr[i]:indptr[i + 1]]
        assert list(nb) == sorted(nb)
        assert i not in nb


def test_locations_and_graph_roundtrip(tmp_path):
    locs = grid_locations(SynthConfig(rows=2, cols=3))
    write_locations(locs, tmp_path / "l.csv")
    assert read_locations(tmp_path / "l.csv") == locs
    g = build_graph(locs, prune_frac=0.2)
    write_graph(g, tmp_path / "g.csv")
    h = read_graph(tmp_path / "g.csv")
    assert h.n == g.n and h.sigma == g.sigma
    np.testing.assert_array_equal(h.u, g.u)
    np.testing.assert_array_equal(h.weight, g.weight)
