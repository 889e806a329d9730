"""Contiguity graphs over territorial units.

Two constructions: distance adjacency (centroids within a radius, boundary
inclusive) and queen adjacency (polygons sharing at least one boundary
point, with a metric snap tolerance). Graphs are undirected, stored as an
edge list with i < j, and are always self-loop free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import Geometry, boundary_segments, geometry_bounds, min_boundary_distance

QUEEN_TOL = 1e-9  # metres; snap tolerance for shared boundary points


@dataclass(frozen=True)
class ContiguityGraph:
    n: int
    edges: np.ndarray  # (m, 2) int64, each row i < j, lexicographically sorted
    construction: str

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def _finalize(n: int, pairs, construction: str) -> ContiguityGraph:
    edges = np.asarray(sorted(set(pairs)), dtype=np.int64).reshape(-1, 2)
    assert np.all(edges[:, 0] < edges[:, 1]), "self loop or unordered edge"
    return ContiguityGraph(n=n, edges=edges, construction=construction)


def distance_adjacency(centroids: np.ndarray, r: float) -> ContiguityGraph:
    """Connect units whose centroids lie within distance r (inclusive)."""
    centroids = np.asarray(centroids, dtype=float)
    if centroids.ndim != 2 or centroids.shape[1] != 2 or len(centroids) < 1:
        raise ValidationError("centroids must be an (n, 2) array")
    if not np.isfinite(r) or r <= 0:
        raise ValidationError(f"radius must be positive, got {r!r}")
    n = len(centroids)
    diff = centroids[:, None, :] - centroids[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    ii, jj = np.nonzero(np.triu(dist <= r, k=1))
    return _finalize(n, zip(ii.tolist(), jj.tolist()), f"distance(r={r:g})")


def queen_adjacency(geometries: list[Geometry], tol: float = QUEEN_TOL) -> ContiguityGraph:
    """Connect polygons sharing at least one boundary point or vertex.

    Boundaries within ``tol`` of each other count as touching, which absorbs
    coordinate noise from digitized borders.
    """
    n = len(geometries)
    if n < 1:
        raise ValidationError("need at least one geometry")
    segs = [boundary_segments(g) for g in geometries]
    boxes = np.array([geometry_bounds(g) for g in geometries])
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if (
                boxes[i, 0] > boxes[j, 2] + tol
                or boxes[j, 0] > boxes[i, 2] + tol
                or boxes[i, 1] > boxes[j, 3] + tol
                or boxes[j, 1] > boxes[i, 3] + tol
            ):
                continue
            if min_boundary_distance(segs[i], segs[j], stop_at=tol) <= tol:
                pairs.append((i, j))
    return _finalize(n, pairs, "queen")


def connected_components(graph: ContiguityGraph) -> list[list[int]]:
    """Components as sorted node lists, ordered by smallest member."""
    adj = graph.neighbors()
    seen = np.zeros(graph.n, dtype=bool)
    comps = []
    for start in range(graph.n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(sorted(comp))
    return comps


def is_connected(graph: ContiguityGraph) -> bool:
    if graph.n <= 1:
        return True
    return len(connected_components(graph)) == 1


def min_connecting_radius(centroids: np.ndarray) -> float:
    """Smallest radius whose distance graph is connected.

    Equals the longest edge of the Euclidean minimum spanning tree of the
    centroids: below that length some pair of point groups cannot be
    bridged, at it the graph just connects.
    """
    centroids = np.asarray(centroids, dtype=float)
    if centroids.ndim != 2 or centroids.shape[1] != 2 or len(centroids) < 2:
        raise ValidationError("need at least two (x, y) centroids")
    n = len(centroids)
    # Prim on the complete graph: O(n^2) time, O(n) memory.
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best_to = np.sqrt(((centroids - centroids[0]) ** 2).sum(axis=1))
    best_to[0] = np.inf
    longest = 0.0
    for _ in range(n - 1):
        v = int(np.argmin(np.where(in_tree, np.inf, best_to)))
        longest = max(longest, float(best_to[v]))
        in_tree[v] = True
        cand = np.sqrt(((centroids - centroids[v]) ** 2).sum(axis=1))
        best_to = np.where(in_tree, np.inf, np.minimum(best_to, cand))
    return longest
