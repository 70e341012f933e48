"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately naive: exhaustive enumeration, exact
rational arithmetic (fractions), dense eigendecompositions, bitmask subset
scans. Nothing imports from the package under test, so agreement between
the two is evidence, not tautology.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import comb, fsum

import numpy as np

# ---------------------------------------------------------------- helpers


def adj_sets(n, edges):
    nb = [set() for _ in range(n)]
    for u, v in edges:
        nb[u].add(v)
        nb[v].add(u)
    return nb


def degrees(n, edges):
    d = [0] * n
    for u, v in edges:
        d[u] += 1
        d[v] += 1
    return d


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def component_sets(n, edges):
    uf = UnionFind(n)
    for u, v in edges:
        uf.union(u, v)
    comps = {}
    for i in range(n):
        comps.setdefault(uf.find(i), []).append(i)
    return list(comps.values())


def random_graph(rng, max_n=10):
    """Random test graph drawn with numpy's own generator (not the
    package's seeded streams)."""
    n = int(rng.integers(2, max_n + 1))
    p = float(rng.uniform(0.05, 0.95))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return n, edges


def fixtures():
    """The named small graphs used throughout the acceptance suite."""
    k = lambda n: [(i, j) for i in range(n) for j in range(i + 1, n)]
    two_tri_bridge = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
    return {
        "P3": (3, [(0, 1), (1, 2)]),
        "P4": (4, [(0, 1), (1, 2), (2, 3)]),
        "K4_minus_edge": (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]),
        "K9": (9, k(9)),
        "K10": (10, k(10)),
        "two_triangles_bridge": (6, two_tri_bridge),
    }


# ------------------------------------------------------- degree statistics


def oracle_assortativity(n, edges):
    """Exact Pearson correlation over directed endpoint-degree pairs.

    Returns None when the variance is zero (the caller's convention maps
    that to 0.0).
    """
    d = degrees(n, edges)
    xs, ys = [], []
    for u, v in edges:
        xs += [d[u], d[v]]
        ys += [d[v], d[u]]
    cnt = len(xs)
    mx = Fraction(sum(xs), cnt)
    my = Fraction(sum(ys), cnt)
    cov = sum((Fraction(x) - mx) * (Fraction(y) - my) for x, y in zip(xs, ys))
    vx = sum((Fraction(x) - mx) ** 2 for x in xs)
    vy = sum((Fraction(y) - my) ** 2 for y in ys)
    if vx == 0 or vy == 0:
        return None
    # vx == vy because the two marginals are identical
    return cov / vx


# ------------------------------------------------------------- clustering


def oracle_clustering_values(n, edges):
    """Per-node local clustering as exactly rounded floats.

    Triangles are counted by scanning every neighbor pair and testing edge
    membership in a set.
    """
    eset = {(min(u, v), max(u, v)) for u, v in edges}
    nb = adj_sets(n, edges)
    vals = []
    for i in range(n):
        d = len(nb[i])
        if d < 2:
            vals.append(0.0)
            continue
        tri = sum(
            1
            for a, b in itertools.combinations(sorted(nb[i]), 2)
            if (a, b) in eset
        )
        vals.append(float(Fraction(2 * tri, d * (d - 1))))
    return vals


def oracle_avg_clustering(n, edges):
    if n == 0:
        return 0.0
    return fsum(oracle_clustering_values(n, edges)) / n


# ----------------------------------------------------------------- spectra


def _adjacency(n, edges):
    a = np.zeros((n, n))
    for u, v in edges:
        a[u, v] = a[v, u] = 1.0
    return a


def oracle_lambda2(n, edges):
    if len(component_sets(n, edges)) > 1:
        return 0.0
    a = _adjacency(n, edges)
    lap = np.diag(a.sum(axis=1)) - a
    return float(np.linalg.eigvalsh(lap)[1])


def oracle_eig_centrality(n, edges):
    """Normalized projection of the ones vector onto the dominant
    eigenspace of A + I, from a full dense eigendecomposition."""
    m = _adjacency(n, edges) + np.eye(n)
    vals, vecs = np.linalg.eigh(m)
    cols = vecs[:, vals >= vals[-1] - 1e-9]
    v = cols @ (cols.T @ np.ones(n))
    return v / np.linalg.norm(v)


def oracle_eig_centralization(n, edges):
    c = oracle_eig_centrality(n, edges)
    raw = float(c.max()) * n - float(c.sum())
    s = oracle_eig_centrality(n, [(0, i) for i in range(1, n)])
    denom = float(s.max()) * n - float(s.sum())
    if denom <= 0:
        return 0.0
    return min(max(raw / denom, 0.0), 1.0)


# ------------------------------------------------------------- betweenness


def _bfs_table(n, nb):
    """dist and shortest-path counts from every source, by BFS + DP."""
    dist = [[-1] * n for _ in range(n)]
    sigma = [[0] * n for _ in range(n)]
    for s in range(n):
        dist[s][s] = 0
        sigma[s][s] = 1
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for w in nb[u]:
                    if dist[s][w] < 0:
                        dist[s][w] = dist[s][u] + 1
                        nxt.append(w)
            frontier = nxt
        order = sorted((dist[s][v], v) for v in range(n) if dist[s][v] >= 0)
        for _, v in order:
            if v == s:
                continue
            sigma[s][v] = sum(
                sigma[s][u] for u in nb[v] if dist[s][u] == dist[s][v] - 1
            )
    return dist, sigma


def oracle_betweenness(n, edges):
    """Exact betweenness over unordered pairs via the sigma-product rule:
    v lies on a shortest s-t path iff d(s,v)+d(v,t)=d(s,t), contributing
    sigma_sv * sigma_vt / sigma_st."""
    nb = adj_sets(n, edges)
    dist, sigma = _bfs_table(n, nb)
    bc = [Fraction(0)] * n
    for s in range(n):
        for t in range(s + 1, n):
            if dist[s][t] < 0:
                continue
            for v in range(n):
                if v in (s, t):
                    continue
                if dist[s][v] >= 0 and dist[s][v] + dist[v][t] == dist[s][t]:
                    bc[v] += Fraction(sigma[s][v] * sigma[v][t], sigma[s][t])
    return bc


def oracle_btw_centralization(n, edges):
    bc = oracle_betweenness(n, edges)
    raw = max(bc) * n - sum(bc)
    sb = oracle_betweenness(n, [(0, i) for i in range(1, n)])
    denom = max(sb) * n - sum(sb)
    if denom <= 0:
        return 0.0
    return min(max(float(raw / denom), 0.0), 1.0)


# -------------------------------------------------------------- modularity


@lru_cache(maxsize=None)
def _partitions_matrix(n):
    """All set partitions of n items as restricted-growth label rows."""
    out = []
    labels = [0] * n

    def rec(i, used):
        if i == n:
            out.append(labels.copy())
            return
        for lab in range(used + 1):
            labels[i] = lab
            rec(i + 1, used + (1 if lab == used else 0))

    rec(0, 0)
    return np.array(out, dtype=np.int8)


def oracle_partition_q(n, edges, labels):
    """Exactly rounded Newman Q for one labeled partition."""
    m = len(edges)
    dsum = {}
    deg = degrees(n, edges)
    for i in range(n):
        dsum[labels[i]] = dsum.get(labels[i], 0) + deg[i]
    internal = {}
    for u, v in edges:
        if labels[u] == labels[v]:
            internal[labels[u]] = internal.get(labels[u], 0) + 1
    num = sum(4 * m * internal.get(lab, 0) - d * d for lab, d in dsum.items())
    return num / (4 * m * m)


def oracle_best_modularity(n, edges):
    """Maximum Q over every partition of the nodes (exhaustive search)."""
    m = len(edges)
    if m == 0:
        return 0.0
    part = _partitions_matrix(n)
    nparts = part.shape[0]
    same = np.zeros(nparts, dtype=np.int64)
    for u, v in edges:
        same += part[:, u] == part[:, v]
    deg = degrees(n, edges)
    comm_deg = np.zeros((nparts, n), dtype=np.int64)
    rows = np.arange(nparts)
    for i in range(n):
        np.add.at(comm_deg, (rows, part[:, i].astype(np.int64)), deg[i])
    sumsq = (comm_deg**2).sum(axis=1)
    best = int((4 * m * same - sumsq).max())
    return best / (4 * m * m)


# ---------------------------------------------------------- cores & braces


def oracle_kcore_components(n, edges, k):
    """The k-core as the union of all vertex subsets whose induced minimum
    degree is >= k, found by scanning every subset bitmask."""
    bits = [0] * n
    for u, v in edges:
        bits[u] |= 1 << v
        bits[v] |= 1 << u
    core = 0
    for sub in range(1, 1 << n):
        s = sub
        ok = True
        while s:
            i = (s & -s).bit_length() - 1
            if (bits[i] & sub).bit_count() < k:
                ok = False
                break
            s &= s - 1
        if ok:
            core |= sub
    if core == 0:
        return 0
    members = [i for i in range(n) if core >> i & 1]
    kept = [(u, v) for u, v in edges if core >> u & 1 and core >> v & 1]
    uf = UnionFind(n)
    for u, v in kept:
        uf.union(u, v)
    return len({uf.find(i) for i in members})


def oracle_kbrace_components(n, edges, k):
    """Batch-delete low-embeddedness edges using A^2 for common-neighbor
    counts, recomputed each round, until stable."""
    eset = {(min(u, v), max(u, v)) for u, v in edges}
    while True:
        a = np.zeros((n, n), dtype=np.int64)
        for u, v in eset:
            a[u, v] = a[v, u] = 1
        common = a @ a
        drop = {(u, v) for u, v in eset if common[u, v] < k}
        if not drop:
            break
        eset -= drop
    if not eset:
        return 0
    uf = UnionFind(n)
    for u, v in eset:
        uf.union(u, v)
    touched = {u for e in eset for u in e}
    return len({uf.find(i) for i in touched})


# ------------------------------------------------------------ descriptives


def oracle_avg_shortest_path(n, edges):
    """Average distance in the largest component via Floyd-Warshall."""
    comps = component_sets(n, edges)
    comps.sort(key=lambda c: (-len(c), min(c)))
    comp = comps[0] if comps else []
    if len(comp) < 2:
        return 0.0
    big = 10**9
    dist = [[0 if i == j else big for j in range(n)] for i in range(n)]
    for u, v in edges:
        dist[u][v] = dist[v][u] = 1
    for w in range(n):
        dw = dist[w]
        for i in range(n):
            diw = dist[i][w]
            if diw == big:
                continue
            di = dist[i]
            for j in range(n):
                alt = diw + dw[j]
                if alt < di[j]:
                    di[j] = alt
    total = sum(dist[i][j] for i in comp for j in comp if i < j)
    return total / comb(len(comp), 2)


# ------------------------------------------------------- scalar statistics


def oracle_gini(values):
    n = len(values)
    mu = fsum(values) / n
    if mu == 0:
        return 0.0
    diff = fsum(abs(a - b) for a in values for b in values)
    return diff / (2 * n * n * mu)


def oracle_auc(scores, labels):
    """Exact Mann-Whitney AUC over all positive/negative pairs."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    num = 0
    for p in pos:
        for q in neg:
            if p > q:
                num += 2
            elif p == q:
                num += 1
    return Fraction(num, 2 * len(pos) * len(neg))
