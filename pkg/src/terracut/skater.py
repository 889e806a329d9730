"""Contiguity-constrained regionalization by spanning-tree pruning.

The contiguity graph is weighted by attribute dissimilarity, reduced to its
minimum spanning tree, and the tree is cut greedily: each cut removes the
edge whose removal most reduces the total within-cluster sum of squared
deviations. Clusters are subtrees, so every cluster induces a connected
subgraph of the original contiguity graph by construction.

Cut choices are deterministic: cost ties in the MST and decrease ties in
the pruning step both resolve to the lexicographically smallest edge. The
sequence of cuts is nested, so the first k - 1 cuts for any larger target
k' >= k reproduce the k-cluster partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contiguity import ContiguityGraph
from .errors import DimensionMismatch, DisconnectedGraph, KOutOfRange


@dataclass(frozen=True)
class WeightedEdges:
    """Edge list with attribute-dissimilarity costs, aligned row for row."""

    n: int
    edges: np.ndarray  # (m, 2) int64, i < j
    costs: np.ndarray  # (m,) float


@dataclass(frozen=True)
class SpanningTree:
    n: int
    edges: np.ndarray  # (n - 1, 2) int64, i < j, lexicographically sorted
    total_cost: float


@dataclass(frozen=True)
class Partition:
    """Cluster labels 1..k plus the tree edges whose removal produced them."""

    labels: np.ndarray          # (n,) int64 in 1..k
    k: int
    cut_edges: np.ndarray       # (k - 1, 2) int64, in cut order
    cluster_ssd: np.ndarray     # (k,) within-cluster sum of squared deviations
    total_ssd: float


def edge_costs(graph: ContiguityGraph, Z: np.ndarray) -> WeightedEdges:
    """Weight each contiguity edge by squared Euclidean attribute distance."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != graph.n:
        raise DimensionMismatch(
            f"attribute matrix rows do not match the {graph.n}-node graph"
        )
    diff = Z[graph.edges[:, 0]] - Z[graph.edges[:, 1]]
    return WeightedEdges(n=graph.n, edges=graph.edges, costs=(diff ** 2).sum(axis=1))


def minimum_spanning_tree(weighted: WeightedEdges) -> SpanningTree:
    """Kruskal MST; cost ties resolve to the lexicographically smallest edge."""
    n, edges, costs = weighted.n, weighted.edges, weighted.costs
    order = np.lexsort((edges[:, 1], edges[:, 0], costs))
    parent = np.arange(n)

    def find(v: int) -> int:
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    chosen = []
    total = 0.0
    for idx in order:
        i, j = int(edges[idx, 0]), int(edges[idx, 1])
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((i, j))
            total += float(costs[idx])
            if len(chosen) == n - 1:
                break
    if len(chosen) != n - 1:
        roots = {find(v) for v in range(n)}
        raise DisconnectedGraph(len(roots))
    tree_edges = np.asarray(sorted(chosen), dtype=np.int64).reshape(-1, 2)
    return SpanningTree(n=n, edges=tree_edges, total_cost=total)


def cluster_ssd(members, Z: np.ndarray) -> float:
    """Sum of squared deviations from the cluster mean, over all attributes."""
    sub = np.asarray(Z, dtype=float)[np.asarray(members, dtype=np.int64)]
    return float(((sub - sub.mean(axis=0)) ** 2).sum())


def _stats_ssd(cnt: int, s: np.ndarray, ss: np.ndarray) -> float:
    # per-coordinate sum(x^2) - (sum x)^2 / cnt, summed over coordinates
    return float((ss - s * s / cnt).sum())


@dataclass
class _Component:
    nodes: list[int]                  # sorted
    best_decrease: float              # -inf when the component has no edge
    best_edge: tuple[int, int] | None
    best_eid: int


def _adjacency(tree: SpanningTree) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(tree.n)]
    for eid, (i, j) in enumerate(tree.edges):
        adj[int(i)].append((int(j), eid))
        adj[int(j)].append((int(i), eid))
    return adj


def _evaluate_component(seed: int, adj, blocked: set[int], Z: np.ndarray) -> _Component:
    """DFS the component containing ``seed`` and find its best single cut.

    Subtree attribute sums accumulate bottom-up, so each candidate cut is
    scored in O(p) from (count, sum, sum of squares) triples.
    """
    parent = {seed: -1}
    order = [seed]
    stack = [seed]
    while stack:
        v = stack.pop()
        for u, eid in adj[v]:
            if eid not in blocked and u not in parent:
                parent[u] = v
                order.append(u)
                stack.append(u)

    cnt = {v: 1 for v in order}
    s = {v: Z[v].astype(float).copy() for v in order}
    ss = {v: Z[v] * Z[v] for v in order}
    for v in reversed(order):
        pv = parent[v]
        if pv >= 0:
            cnt[pv] += cnt[v]
            s[pv] = s[pv] + s[v]
            ss[pv] = ss[pv] + ss[v]

    total_cnt, total_s, total_ss = cnt[seed], s[seed], ss[seed]
    comp_ssd = _stats_ssd(total_cnt, total_s, total_ss)

    best_dec, best_edge, best_eid = -np.inf, None, -1
    eid_of = {}
    for v in order[1:]:
        for u, eid in adj[v]:
            if u == parent[v]:
                eid_of[v] = eid
                break
    for v in order[1:]:
        ssd_sub = _stats_ssd(cnt[v], s[v], ss[v])
        ssd_rest = _stats_ssd(total_cnt - cnt[v], total_s - s[v], total_ss - ss[v])
        dec = comp_ssd - ssd_sub - ssd_rest
        edge = (min(v, parent[v]), max(v, parent[v]))
        if dec > best_dec or (dec == best_dec and edge < best_edge):
            best_dec, best_edge, best_eid = dec, edge, eid_of[v]
    return _Component(sorted(order), best_dec, best_edge, best_eid)


def skater_cut_sequence(tree: SpanningTree, Z: np.ndarray, k_max: int) -> list[tuple[int, int]]:
    """Greedy cut order for up to ``k_max`` clusters (``k_max - 1`` cuts).

    Because the greedy choice never depends on later cuts, any prefix of the
    returned sequence is the cut set for the corresponding smaller k.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != tree.n:
        raise DimensionMismatch("attribute matrix rows do not match the tree")
    if not 1 <= k_max <= tree.n:
        raise KOutOfRange(k_max, tree.n)
    adj = _adjacency(tree)
    blocked: set[int] = set()
    comps = [_evaluate_component(0, adj, blocked, Z)]
    cuts: list[tuple[int, int]] = []
    for _ in range(k_max - 1):
        pick = None
        for c in comps:
            if c.best_edge is None:
                continue
            if (
                pick is None
                or c.best_decrease > pick.best_decrease
                or (c.best_decrease == pick.best_decrease and c.best_edge < pick.best_edge)
            ):
                pick = c
        assert pick is not None, "ran out of edges before reaching k_max"
        cuts.append(pick.best_edge)
        blocked.add(pick.best_eid)
        comps.remove(pick)
        comps.append(_evaluate_component(pick.best_edge[0], adj, blocked, Z))
        comps.append(_evaluate_component(pick.best_edge[1], adj, blocked, Z))
    return cuts


def _labels_from_cuts(tree: SpanningTree, cuts: list[tuple[int, int]]) -> np.ndarray:
    """Component labels 1..k, clusters numbered by smallest member index."""
    cut_set = set(cuts)
    adj: list[list[int]] = [[] for _ in range(tree.n)]
    for i, j in tree.edges:
        if (int(i), int(j)) not in cut_set:
            adj[int(i)].append(int(j))
            adj[int(j)].append(int(i))
    labels = np.zeros(tree.n, dtype=np.int64)
    label = 0
    for start in range(tree.n):
        if labels[start]:
            continue
        label += 1
        stack = [start]
        labels[start] = label
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if not labels[u]:
                    labels[u] = label
                    stack.append(u)
    return labels


def skater_partition(tree: SpanningTree, Z: np.ndarray, k: int) -> Partition:
    """Partition into k contiguous clusters by greedy tree pruning."""
    return skater_partitions(tree, Z, [k])[k]


def skater_partitions(tree: SpanningTree, Z: np.ndarray, ks) -> dict[int, Partition]:
    """Partitions for several k from one shared cut sequence.

    Cheaper than separate calls when sweeping k, and guarantees the nested
    structure across the returned partitions.
    """
    ks = sorted(set(int(k) for k in ks))
    Z = np.asarray(Z, dtype=float)
    for k in ks:
        if not 1 <= k <= tree.n:
            raise KOutOfRange(k, tree.n)
    cuts = skater_cut_sequence(tree, Z, ks[-1])
    out: dict[int, Partition] = {}
    for k in ks:
        used = cuts[: k - 1]
        labels = _labels_from_cuts(tree, used)
        ssd = np.array(
            [cluster_ssd(np.nonzero(labels == c)[0], Z) for c in range(1, k + 1)]
        )
        out[k] = Partition(
            labels=labels,
            k=k,
            cut_edges=np.asarray(used, dtype=np.int64).reshape(-1, 2),
            cluster_ssd=ssd,
            total_ssd=float(ssd.sum()),
        )
    return out


def partition_is_contiguous(labels: np.ndarray, graph: ContiguityGraph) -> bool:
    """True if every cluster induces a connected subgraph of ``graph``."""
    labels = np.asarray(labels)
    adj = graph.neighbors()
    for c in np.unique(labels):
        members = np.nonzero(labels == c)[0]
        member_set = set(members.tolist())
        seen = {int(members[0])}
        stack = [int(members[0])]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u in member_set and u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != len(member_set):
            return False
    return True
