"""Deliberately naive reference implementations used as test oracles.

Everything here trades speed for obviousness: double loops, exhaustive
enumeration, exact integer arithmetic. None of it shares code with the
package under test.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from terracut.geometry import Polygon

# Attribute matrices for the tree-pruning oracle are integers scaled by
# LCM(1..12), so every sum-of-squared-deviations a component of <= 12 nodes
# can produce is an exact integer in both float64 and int64 arithmetic.
# Ties are then exact, and tie-break agreement is a sharp test.
SSD_SCALE = 27720


def square(cx: float, cy: float, side: float = 1.0) -> Polygon:
    h = side / 2.0
    return Polygon(
        np.array([[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]])
    )


# --- silhouette ---------------------------------------------------------------

def naive_silhouette(Z, labels):
    """Per-point silhouette straight from the definition, one pair at a time."""
    Z = np.asarray(Z, dtype=float)
    labels = np.asarray(labels)
    n = len(Z)
    values = np.zeros(n)
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            continue  # singleton convention: 0
        a = float(np.mean([np.linalg.norm(Z[i] - Z[j]) for j in own]))
        b = np.inf
        for c in set(labels.tolist()):
            if c == labels[i]:
                continue
            members = [j for j in range(n) if labels[j] == c]
            b = min(b, float(np.mean([np.linalg.norm(Z[i] - Z[j]) for j in members])))
        values[i] = 0.0 if max(a, b) == 0.0 else (b - a) / max(a, b)
    return values, float(values.mean())


# --- spanning trees -----------------------------------------------------------

def random_connected_graph(rng, n: int, extra: int, cost_hi: int = 12):
    """Random spanning tree plus ``extra`` chords; small integer costs so
    cost ties are common and all sums are exact."""
    order = rng.permutation(n)
    edges = set()
    for t in range(1, n):
        a = int(order[t])
        b = int(order[rng.integers(0, t)])
        edges.add((min(a, b), max(a, b)))
    candidates = [
        (i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in edges
    ]
    rng.shuffle(candidates)
    edges.update(tuple(e) for e in candidates[:extra])
    edges = sorted(edges)
    costs = rng.integers(1, cost_hi + 1, size=len(edges)).astype(float)
    return np.array(edges, dtype=np.int64), costs


def min_spanning_cost_exhaustive(n: int, edges, costs) -> float:
    """Minimum spanning-tree cost over every (n-1)-edge acyclic subset."""
    m = len(edges)
    best = None
    for combo in itertools.combinations(range(m), n - 1):
        parent = list(range(n))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        acyclic = True
        for idx in combo:
            ri, rj = find(int(edges[idx][0])), find(int(edges[idx][1]))
            if ri == rj:
                acyclic = False
                break
            parent[ri] = rj
        if acyclic:
            total = float(sum(costs[idx] for idx in combo))
            if best is None or total < best:
                best = total
    assert best is not None, "graph was not connected"
    return best


def is_spanning_tree(n: int, tree_edges, graph_edges) -> bool:
    allowed = {tuple(e) for e in np.asarray(graph_edges).tolist()}
    te = [tuple(e) for e in np.asarray(tree_edges).tolist()]
    if len(te) != n - 1 or any(e not in allowed for e in te):
        return False
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, j in te:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


# --- tree pruning -------------------------------------------------------------

def two_pass_ssd(members, Z) -> float:
    sub = np.asarray(Z, dtype=float)[list(members)]
    mean = sub.mean(axis=0)
    return float(sum(float(((row - mean) ** 2).sum()) for row in sub))


def forest_components(n: int, tree_edges, removed) -> np.ndarray:
    """0-based component labels after deleting ``removed`` tree edges."""
    removed = {tuple(e) for e in removed}
    adj = [[] for _ in range(n)]
    for i, j in np.asarray(tree_edges).tolist():
        if (i, j) in removed:
            continue
        adj[i].append(j)
        adj[j].append(i)
    comp = -np.ones(n, dtype=np.int64)
    c = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = c
        stack = [s]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if comp[w] < 0:
                    comp[w] = c
                    stack.append(w)
        c += 1
    return comp


def _ssd_int(members, Zint) -> int:
    """Exact n * scaled SSD equivalent: sum(x^2) - (sum x)^2 / count, per
    coordinate, as Python ints. Requires count | (sum x)^2 exactly, which
    the SSD_SCALE factor guarantees."""
    sub = Zint[list(members)]
    cnt = len(sub)
    total = 0
    for col in range(sub.shape[1]):
        s = int(sub[:, col].sum())
        ss = int((sub[:, col].astype(object) ** 2).sum())
        num = s * s
        assert num % cnt == 0, "scale does not cover this component size"
        total += ss - num // cnt
    return total


def greedy_cuts_exhaustive(tree_edges, Zint, k_max: int):
    """Best-first single-edge pruning by brute force, exact integers.

    Each step scores every remaining tree edge by the total SSD of the
    forest that cutting it would leave, and keeps the minimizer; ties go to
    the lexicographically smallest (i, j) edge.
    """
    Zint = np.asarray(Zint)
    n = len(Zint)
    cuts: list[tuple[int, int]] = []
    for _ in range(k_max - 1):
        best = None
        for e in sorted(tuple(x) for x in np.asarray(tree_edges).tolist()):
            if e in cuts:
                continue
            comp = forest_components(n, tree_edges, cuts + [e])
            total = sum(
                _ssd_int(np.nonzero(comp == c)[0], Zint)
                for c in range(int(comp.max()) + 1)
            )
            if best is None or total < best[0] or (total == best[0] and e < best[1]):
                best = (total, e)
        cuts.append(best[1])
    return cuts


def forest_total_ssd_int(tree_edges, Zint, cuts) -> int:
    comp = forest_components(len(Zint), tree_edges, cuts)
    return sum(
        _ssd_int(np.nonzero(comp == c)[0], np.asarray(Zint))
        for c in range(int(comp.max()) + 1)
    )


# --- connectivity radius --------------------------------------------------------

def _connected_at(centroids: np.ndarray, r: float) -> bool:
    n = len(centroids)
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i in range(n):
        for j in range(i + 1, n):
            if np.sqrt(((centroids[i] - centroids[j]) ** 2).sum()) <= r:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return len({find(v) for v in range(n)}) == 1


def bisect_connecting_radius(centroids: np.ndarray) -> float:
    """Smallest pairwise distance whose threshold graph is connected, found
    by bisecting the sorted distance list."""
    centroids = np.asarray(centroids, dtype=float)
    n = len(centroids)
    # plain sqrt(dx^2 + dy^2), the shared metric definition; linalg.norm
    # rounds differently in the last ulp and would break exact comparison
    dists = sorted(
        float(np.sqrt(((centroids[i] - centroids[j]) ** 2).sum()))
        for i in range(n)
        for j in range(i + 1, n)
    )
    lo, hi = 0, len(dists) - 1
    assert _connected_at(centroids, dists[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        if _connected_at(centroids, dists[mid]):
            hi = mid
        else:
            lo = mid + 1
    return dists[lo]


# --- clustering agreement -------------------------------------------------------

def adjusted_rand_index(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    ua = np.unique(a)
    ub = np.unique(b)
    M = np.array(
        [[int(((a == ca) & (b == cb)).sum()) for cb in ub] for ca in ua],
        dtype=np.int64,
    )
    sum_ij = sum(comb(int(v), 2) for v in M.ravel())
    sum_a = sum(comb(int(v), 2) for v in M.sum(axis=1))
    sum_b = sum(comb(int(v), 2) for v in M.sum(axis=0))
    total = comb(len(a), 2)
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return (sum_ij - expected) / (max_index - expected)


# --- penalized regression ---------------------------------------------------------

def binomial_lasso(X, y01, lam: float, max_iter: int = 100_000, tol: float = 1e-12):
    """Plain binomial lasso by scalar coordinate descent with the fixed 1/4
    curvature bound. Returns (intercept, slopes, fitted P(y=1))."""
    X = np.asarray(X, dtype=float)
    y01 = np.asarray(y01, dtype=float)
    n, p = X.shape
    w = np.zeros(p)
    w0 = 0.0
    eta = np.zeros(n)
    for _ in range(max_iter):
        delta = 0.0
        mu = 1.0 / (1.0 + np.exp(-eta))
        d0 = -4.0 * float((mu - y01).mean())
        w0 += d0
        eta += d0
        delta = max(delta, abs(d0))
        for j in range(p):
            mu = 1.0 / (1.0 + np.exp(-eta))
            xj = X[:, j]
            g = float(xj @ (mu - y01)) / n
            h = float(xj @ xj) / (4.0 * n)
            u = w[j] - g / h
            new = float(np.sign(u)) * max(abs(u) - lam / h, 0.0)
            d = new - w[j]
            if d != 0.0:
                w[j] = new
                eta += d * xj
                delta = max(delta, abs(d))
        if delta < tol:
            break
    return w0, w, 1.0 / (1.0 + np.exp(-eta))


def kkt_violation(X, y, coefs, lam: float) -> float:
    """Worst stationarity violation of the penalized multinomial objective,
    recomputed from scratch: softmax probabilities, score X'(Y - P)/n, then
    |score| <= lam for zero slopes, score = lam * sign for active ones, and
    zero mean residual per class for the intercepts."""
    X = np.asarray(X, dtype=float)
    classes = np.unique(y)
    Y = (np.asarray(y)[:, None] == classes[None, :]).astype(float)
    ETA = coefs.intercepts[None, :] + X @ coefs.slopes
    ETA = ETA - ETA.max(axis=1, keepdims=True)
    P = np.exp(ETA)
    P /= P.sum(axis=1, keepdims=True)
    R = Y - P
    score = X.T @ R / len(X)
    worst = float(np.abs(R.mean(axis=0)).max())
    active = coefs.slopes != 0
    if active.any():
        worst = max(
            worst,
            float(np.abs(score[active] - lam * np.sign(coefs.slopes[active])).max()),
        )
    if (~active).any():
        worst = max(worst, float(np.maximum(np.abs(score[~active]) - lam, 0.0).max()))
    return worst


def multinomial_deviance(P, y, classes) -> float:
    idx = np.searchsorted(classes, y)
    return float(-2.0 * np.log(P[np.arange(len(y)), idx]).sum())
