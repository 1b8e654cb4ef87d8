"""Sensor locations, great-circle distances and the weighted spatial graph."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DataError,
    DisconnectedAfterPrune,
    DisconnectedGraph,
    DuplicateCoordinates,
    MalformedHeader,
)

EARTH_RADIUS_KM = 6371.0
LOCATIONS_HEADER = ["id", "latitude", "longitude"]


@dataclass(frozen=True)
class Location:
    id: int
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise DataError(f"latitude {self.latitude} out of [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise DataError(f"longitude {self.longitude} out of [-180, 180]")


def check_locations(locs) -> list[Location]:
    locs = list(locs)
    ids = [loc.id for loc in locs]
    if sorted(ids) != list(range(len(locs))):
        raise DataError("location ids must be unique and contiguous from 0")
    return sorted(locs, key=lambda loc: loc.id)


def haversine(a: Location, b: Location) -> float:
    """Great-circle distance in km on a sphere of radius 6371 km."""
    return float(haversine_arrays(a.latitude, a.longitude, b.latitude, b.longitude))


def haversine_arrays(lat1, lon1, lat2, lon2):
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(lon2) - np.radians(lon1)
    h = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def pairwise_distances(locs) -> np.ndarray:
    lat = np.array([loc.latitude for loc in locs])
    lon = np.array([loc.longitude for loc in locs])
    return haversine_arrays(lat[:, None], lon[:, None], lat[None, :], lon[None, :])


@dataclass
class SpatialGraph:
    """Undirected weighted graph; each edge is stored once with u < v."""

    n: int
    u: np.ndarray
    v: np.ndarray
    distance: np.ndarray
    weight: np.ndarray
    sigma: float | None = None
    _csr: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(cls, n, edges, sigma=None, check_connected=True) -> "SpatialGraph":
        """Build from ``(u, v, distance, weight)`` tuples; used for hand-made graphs."""
        rows = []
        for a, b, d, w in edges:
            a, b = int(a), int(b)
            if a == b:
                raise DataError(f"self-loop at node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise DataError(f"edge ({a}, {b}) outside 0..{n - 1}")
            if d <= 0 or w <= 0:
                raise DataError("edge distance and weight must be positive")
            rows.append((min(a, b), max(a, b), float(d), float(w)))
        rows.sort()
        for (a1, b1, _, _), (a2, b2, _, _) in zip(rows, rows[1:]):
            if (a1, b1) == (a2, b2):
                raise DataError(f"duplicate edge ({a1}, {b1})")
        arr = np.array(rows, dtype=float).reshape(-1, 4)
        g = cls(
            n=n,
            u=arr[:, 0].astype(np.int64),
            v=arr[:, 1].astype(np.int64),
            distance=arr[:, 2],
            weight=arr[:, 3],
            sigma=sigma,
        )
        if check_connected and not g.is_connected():
            raise DisconnectedGraph("graph is not connected")
        return g

    @property
    def n_edges(self) -> int:
        return len(self.u)

    def edges(self):
        return [
            (int(a), int(b), float(d), float(w))
            for a, b, d, w in zip(self.u, self.v, self.distance, self.weight)
        ]

    def is_connected(self) -> bool:
        return _connected(self.n, self.u, self.v)

    def csr(self):
        """Symmetric CSR arrays ``(indptr, indices, weights)`` with sorted neighbours."""
        if self._csr is None:
            src = np.concatenate([self.u, self.v])
            dst = np.concatenate([self.v, self.u])
            w = np.concatenate([self.weight, self.weight])
            order = np.lexsort((dst, src))
            src, dst, w = src[order], dst[order], w[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            self._csr = (np.cumsum(indptr), dst.astype(np.int64), w.astype(np.float64))
        return self._csr


def _connected(n, u, v) -> bool:
    if n <= 1:
        return True
    adj = coo_matrix((np.ones(len(u)), (u, v)), shape=(n, n))
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


def gaussian_kernel(distance, sigma):
    return np.exp(-np.square(distance) / (2.0 * sigma * sigma))


def build_graph(locs, kernel_sigma="median", prune_frac=0.0) -> SpatialGraph:
    """Complete graph over ``locs`` with Gaussian-kernel similarity weights.

    ``kernel_sigma`` is a bandwidth in km or ``"median"`` (median pairwise
    distance). ``prune_frac`` removes that fraction of the longest edges; ties in
    distance are broken by ``(u, v)`` so that later pairs are pruned first.
    """
    locs = check_locations(locs)
    n = len(locs)
    if n < 2:
        raise DataError("need at least two locations")
    if not 0.0 <= prune_frac < 1.0:
        raise DataError(f"prune_frac {prune_frac} not in [0, 1)")
    dist = pairwise_distances(locs)
    iu, iv = np.triu_indices(n, k=1)
    d = dist[iu, iv]
    if np.any(d <= 0.0):
        k = int(np.argmax(d <= 0.0))
        raise DuplicateCoordinates(f"locations {iu[k]} and {iv[k]} share coordinates")

    if kernel_sigma == "median":
        sigma = float(np.median(d))
    else:
        sigma = float(kernel_sigma)
        if not sigma > 0:
            raise DataError("kernel_sigma must be positive")
    w = gaussian_kernel(d, sigma)

    n_drop = int(round(prune_frac * len(d)))
    if n_drop:
        # ascending by (distance, u, v): the last n_drop entries are the longest edges
        order = np.lexsort((iv, iu, d))
        keep = np.sort(order[: len(d) - n_drop])
        iu, iv, d, w = iu[keep], iv[keep], d[keep], w[keep]
        if not _connected(n, iu, iv):
            raise DisconnectedAfterPrune(
                f"pruning {n_drop} of {n * (n - 1) // 2} edges disconnects the graph"
            )
    # weights can underflow to 0 for very distant pairs with a small sigma
    w = np.maximum(w, np.finfo(float).tiny)
    return SpatialGraph(n=n, u=iu.astype(np.int64), v=iv.astype(np.int64), distance=d, weight=w, sigma=sigma)


def read_locations(path) -> list[Location]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != LOCATIONS_HEADER:
            raise MalformedHeader(f"{path}: expected header {','.join(LOCATIONS_HEADER)}")
        locs = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                locs.append(Location(int(row[0]), float(row[1]), float(row[2])))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return check_locations(locs)


def write_locations(locs, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOCATIONS_HEADER)
        for loc in locs:
            writer.writerow([loc.id, repr(float(loc.latitude)), repr(float(loc.longitude))])


GRAPH_HEADER = ["u", "v", "distance_km", "weight"]


def write_graph(g: SpatialGraph, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# n={g.n} sigma={'' if g.sigma is None else repr(g.sigma)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRAPH_HEADER)
        for a, b, d, w in g.edges():
            writer.writerow([a, b, repr(d), repr(w)])


def read_graph(path) -> SpatialGraph:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        meta = fh.readline().strip()
        if not meta.startswith("# n="):
            raise MalformedHeader(f"{path}: missing graph metadata line")
        parts = dict(p.split("=", 1) for p in meta[2:].split())
        reader = csv.reader(fh)
        if next(reader, None) != GRAPH_HEADER:
            raise MalformedHeader(f"{path}: expected header {','.join(GRAPH_HEADER)}")
        edges = [(int(a), int(b), float(d), float(w)) for a, b, d, w in reader]
    sigma = float(parts["sigma"]) if parts.get("sigma") else None
    return SpatialGraph.from_edges(int(parts["n"]), edges, sigma=sigma)

