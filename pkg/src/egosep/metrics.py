"""Structural graph statistics: assortativity, algebraic connectivity,
clustering, greedy modularity, Freeman centralization, k-core and k-brace
component counts, and whole-graph descriptives.

Where a statistic is a ratio of integer quantities it is computed as one
integer/integer division, so the float result is exactly rounded and can be
compared bit-for-bit against rational-arithmetic oracles.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .graph import Graph
from .rng import rng_from

__all__ = [
    "degree_assortativity",
    "algebraic_connectivity",
    "avg_clustering",
    "greedy_modularity",
    "partition_modularity",
    "centralization",
    "kcore_components",
    "kbrace_components",
    "graph_descriptives",
]


def degree_assortativity(g: Graph) -> float:
    """Pearson correlation of endpoint degrees over directed edge pairs.

    Returns 0.0 when the endpoint-degree variance is zero (regular graphs,
    disjoint single edges), the documented degenerate convention.
    """
    m = g.edge_count
    if m == 0:
        raise ValueError("degree assortativity needs at least one edge")
    deg = g.degrees.astype(np.int64)
    du = deg[g.edges[:, 0]]
    dv = deg[g.edges[:, 1]]
    s1 = int(du.sum()) + int(dv.sum())
    sxy = 2 * int((du * dv).sum())
    sxx = int((du * du).sum()) + int((dv * dv).sum())
    big_n = 2 * m
    cov_num = big_n * sxy - s1 * s1
    var_num = big_n * sxx - s1 * s1
    if var_num == 0:
        return 0.0
    return cov_num / var_num


def _connected(g: Graph) -> bool:
    n = g.node_count
    if n == 0:
        return True
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for w in g.neighbors(u):
            w = int(w)
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def _neighbor_sum(g: Graph, x: np.ndarray) -> np.ndarray:
    """(A @ x) accumulated with a fixed summation order."""
    n = g.node_count
    if g.edge_count == 0:
        return np.zeros(n)
    u, v = g.edges[:, 0], g.edges[:, 1]
    return np.bincount(u, weights=x[v], minlength=n) + np.bincount(
        v, weights=x[u], minlength=n
    )


def algebraic_connectivity(g: Graph) -> float:
    """Second-smallest eigenvalue of the combinatorial Laplacian.

    Exactly 0.0 for disconnected graphs. Dense solver up to 64 nodes,
    deflated Lanczos with full reorthogonalization above (relative residual
    1e-6, at most min(10n, n-1) iterations).
    """
    n = g.node_count
    if n < 2:
        raise ValueError("algebraic connectivity needs >= 2 nodes")
    if not _connected(g):
        return 0.0
    if n <= 64:
        a = np.zeros((n, n))
        u, v = g.edges[:, 0], g.edges[:, 1]
        a[u, v] = 1.0
        a[v, u] = 1.0
        lap = np.diag(g.degrees.astype(float)) - a
        vals = np.linalg.eigvalsh(lap)
        return float(max(vals[1], 0.0))
    return _lanczos_lambda2(g)


def _tridiag(alphas: list[float], betas: list[float]) -> np.ndarray:
    k = len(alphas)
    t = np.zeros((k, k))
    t[np.arange(k), np.arange(k)] = alphas
    if betas:
        idx = np.arange(len(betas))
        t[idx, idx + 1] = betas
        t[idx + 1, idx] = betas
    return t


def _lanczos_lambda2(g: Graph) -> float:
    """lambda_2 of a connected graph via Lanczos on the shifted operator.

    Works on M = cI - L with c > lambda_max, deflating the known kernel
    vector (all-ones) so the dominant remaining Ritz value is c - lambda_2.
    """
    n = g.node_count
    deg = g.degrees.astype(float)
    c = 2.0 * float(deg.max()) + 1.0
    diag = c - deg
    ones = np.full(n, 1.0 / math.sqrt(n))

    rng = rng_from("lanczos", n)
    q = rng.standard_normal(n)
    q -= (q @ ones) * ones
    q /= float(np.linalg.norm(q))
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    theta = c
    for _ in range(min(10 * n, n - 1)):
        cur = basis[-1]
        w = diag * cur + _neighbor_sum(g, cur)
        alphas.append(float(cur @ w))
        # ones is the dominant eigendirection of the shifted operator, so any
        # leftover component is re-amplified every iteration; deflate it in
        # each reorthogonalization pass, not just once up front.
        for _pass in range(2):
            w -= (w @ ones) * ones
            for b in basis:
                w -= (b @ w) * b
        beta = float(np.linalg.norm(w))
        evals, evecs = np.linalg.eigh(_tridiag(alphas, betas))
        theta = float(evals[-1])
        resid = beta * abs(float(evecs[-1, -1]))
        if resid <= 1e-6 * max(abs(theta), 1.0) or beta <= 1e-12 * c:
            break
        betas.append(beta)
        basis.append(w / beta)
    return float(max(c - theta, 0.0))


def avg_clustering(g: Graph) -> float:
    """Mean local clustering; degree < 2 contributes 0; empty graph -> 0."""
    n = g.node_count
    if n == 0:
        return 0.0
    nb = [set(map(int, g.neighbors(i))) for i in range(n)]
    vals = []
    for i in range(n):
        d = len(nb[i])
        if d < 2:
            vals.append(0.0)
            continue
        links = 0
        for u in nb[i]:
            links += sum(1 for w in nb[u] if w > u and w in nb[i])
        vals.append(2 * links / (d * (d - 1)))
    return math.fsum(vals) / n


def partition_modularity(g: Graph, labels: Sequence) -> float:
    """Newman modularity Q of the given node partition, exactly rounded."""
    m = g.edge_count
    if m == 0:
        raise ValueError("modularity needs at least one edge")
    deg = g.degrees
    dsum: dict = {}
    for i, lab in enumerate(labels):
        dsum[lab] = dsum.get(lab, 0) + int(deg[i])
    internal: dict = {}
    for u, v in g.edges:
        lab = labels[int(u)]
        if lab == labels[int(v)]:
            internal[lab] = internal.get(lab, 0) + 1
    num = sum(4 * m * internal.get(lab, 0) - d * d for lab, d in dsum.items())
    return num / (4 * m * m)


def greedy_modularity(g: Graph) -> tuple[list[int], float]:
    """Clauset-Newman-Moore greedy agglomeration.

    Merges the community pair with the largest modularity gain while the
    gain is positive; gains are ranked by the exact integer score
    2m*e_ij - d_i*d_j, and ties go to the lexicographically smallest
    community index pair. Communities keep the smaller index on merge.
    Returns (community label per node, modularity of the final partition).
    An edgeless graph yields singleton communities and q = 0.
    """
    n, m = g.node_count, g.edge_count
    if m == 0:
        return list(range(n)), 0.0
    cross: dict[int, dict[int, int]] = {i: {} for i in range(n)}
    for u, v in g.edges:
        u, v = int(u), int(v)
        cross[u][v] = cross[u].get(v, 0) + 1
        cross[v][u] = cross[v].get(u, 0) + 1
    internal = {i: 0 for i in range(n)}
    dsum = {i: int(d) for i, d in enumerate(g.degrees)}
    members = {i: [i] for i in range(n)}
    active = sorted(cross)
    while True:
        best = None
        for i in active:
            row = cross[i]
            for j in sorted(row):
                if j <= i:
                    continue
                s = 2 * m * row[j] - dsum[i] * dsum[j]
                if best is None or s > best[0]:
                    best = (s, i, j)
        if best is None or best[0] <= 0:
            break
        _, i, j = best
        internal[i] += internal[j] + cross[i][j]
        dsum[i] += dsum[j]
        del cross[i][j]
        for x, cnt in cross[j].items():
            if x == i:
                continue
            cross[i][x] = cross[i].get(x, 0) + cnt
            cross[x][i] = cross[i][x]
            del cross[x][j]
        del cross[j]
        del internal[j]
        del dsum[j]
        members[i].extend(members[j])
        del members[j]
        active.remove(j)
    labels = [0] * n
    for rank, i in enumerate(active):
        for node in members[i]:
            labels[node] = rank
    num = sum(4 * m * internal[i] - dsum[i] * dsum[i] for i in active)
    return labels, num / (4 * m * m)


_STAR_CACHE: dict[tuple[str, int], float] = {}


def _eig_centrality(g: Graph) -> np.ndarray:
    """Power iteration on A + I from the all-ones start, L2-normalized.

    The limit is the normalized projection of the ones vector onto the
    dominant eigenspace of A + I: strictly positive on every component that
    attains the dominant eigenvalue, zero elsewhere. Ties across components
    and bipartite structure therefore resolve deterministically.
    """
    n = g.node_count
    v = np.full(n, 1.0 / math.sqrt(n))
    if g.edge_count == 0:
        return v
    for _ in range(100 * n + 100):
        w = v + _neighbor_sum(g, v)
        theta = float(v @ w)
        resid = float(np.linalg.norm(w - theta * v))
        v = w / float(np.linalg.norm(w))
        if resid <= 1e-10 * max(theta, 1.0):
            break
    return v


def _betweenness(g: Graph) -> np.ndarray:
    """Brandes betweenness, summed over unordered pairs within components."""
    n = g.node_count
    bc = np.zeros(n)
    for s in range(n):
        dist = [-1] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        dist[s] = 0
        sigma[s] = 1.0
        order = [s]
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            du1 = dist[u] + 1
            for w in g.neighbors(u):
                w = int(w)
                if dist[w] < 0:
                    dist[w] = du1
                    order.append(w)
                if dist[w] == du1:
                    sigma[w] += sigma[u]
                    preds[w].append(u)
        delta = [0.0] * n
        for u in reversed(order):
            if u == s:
                continue
            coeff = (1.0 + delta[u]) / sigma[u]
            for p in preds[u]:
                delta[p] += sigma[p] * coeff
            bc[u] += delta[u]
    return bc / 2.0


def _centrality(g: Graph, kind: str) -> np.ndarray:
    if kind == "eigenvector":
        return _eig_centrality(g)
    if kind == "betweenness":
        return _betweenness(g)
    raise ValueError(f"unknown centralization kind {kind!r}")


def _star_denominator(kind: str, n: int) -> float:
    key = (kind, n)
    if key not in _STAR_CACHE:
        star = Graph.build(
            "star", "star", [f"s{i}" for i in range(n)], [(0, i) for i in range(1, n)]
        )
        sc = _centrality(star, kind)
        _STAR_CACHE[key] = float(np.max(sc)) * n - float(sc.sum())
    return _STAR_CACHE[key]


def centralization(g: Graph, kind: str) -> float:
    """Freeman centralization: sum of (c_max - c_v), normalized by the same
    sum on the star graph of equal node count. 0 for n < 3; clamped to [0,1].
    """
    n = g.node_count
    if n < 3:
        _centrality_kind_check(kind)
        return 0.0
    scores = _centrality(g, kind)
    raw = float(np.max(scores)) * n - float(scores.sum())
    denom = _star_denominator(kind, n)
    if denom <= 0.0:
        return 0.0
    return min(max(raw / denom, 0.0), 1.0)


def _centrality_kind_check(kind: str) -> None:
    if kind not in ("eigenvector", "betweenness"):
        raise ValueError(f"unknown centralization kind {kind!r}")


def kcore_components(g: Graph, k: int) -> int:
    """Connected components of the k-core (max subgraph with degrees >= k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = g.node_count
    deg = [int(d) for d in g.degrees]
    alive = [True] * n
    stack = []
    for i in range(n):
        if deg[i] < k:
            alive[i] = False
            stack.append(i)
    while stack:
        u = stack.pop()
        for w in g.neighbors(u):
            w = int(w)
            if alive[w]:
                deg[w] -= 1
                if deg[w] < k:
                    alive[w] = False
                    stack.append(w)
    return _count_components(g, alive)


def _count_components(g: Graph, alive: Sequence[bool]) -> int:
    n = g.node_count
    seen = [False] * n
    count = 0
    for i in range(n):
        if not alive[i] or seen[i]:
            continue
        count += 1
        stack = [i]
        seen[i] = True
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                w = int(w)
                if alive[w] and not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return count


def kbrace_components(g: Graph, k: int) -> int:
    """Component count of the k-brace.

    The k-brace is the fixed point of repeatedly deleting edges whose
    endpoints share fewer than k neighbors (embeddedness < k), then
    dropping nodes left without edges.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = g.node_count
    nb = [set(map(int, g.neighbors(i))) for i in range(n)]
    emb: dict[tuple[int, int], int] = {}
    for u, v in g.edges:
        u, v = int(u), int(v)
        emb[(u, v)] = len(nb[u] & nb[v])
    present = set(emb)
    queue = [uv for uv in sorted(emb) if emb[uv] < k]
    while queue:
        uv = queue.pop()
        if uv not in present:
            continue
        u, v = uv
        common = nb[u] & nb[v]
        present.discard(uv)
        nb[u].discard(v)
        nb[v].discard(u)
        for w in common:
            for a, b in ((u, w), (v, w)):
                key = (a, b) if a < b else (b, a)
                if key in present:
                    emb[key] -= 1
                    if emb[key] == k - 1:
                        queue.append(key)
    seen = [False] * n
    comps = 0
    for i in range(n):
        if not nb[i] or seen[i]:
            continue
        comps += 1
        stack = [i]
        seen[i] = True
        while stack:
            u = stack.pop()
            for w in nb[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return comps


def graph_descriptives(g: Graph) -> dict[str, float]:
    """Whole-graph summary: mean degree, average clustering, average
    shortest path length over the largest connected component, density.
    """
    n, m = g.node_count, g.edge_count
    out: dict[str, float] = {
        "node_count": float(n),
        "edge_count": float(m),
        "degree_mean": 2 * m / n if n else 0.0,
        "avg_clustering": avg_clustering(g),
        "density": m / (n * (n - 1) // 2) if n >= 2 else 0.0,
    }
    comp = _largest_component(g)
    if len(comp) < 2:
        out["avg_shortest_path"] = 0.0
        return out
    total = 0
    comp_set = set(comp)
    for s in comp:
        dist = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for w in g.neighbors(u):
                    w = int(w)
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        total += sum(d for v, d in dist.items() if v in comp_set)
    out["avg_shortest_path"] = total / (len(comp) * (len(comp) - 1))
    return out


def _largest_component(g: Graph) -> list[int]:
    n = g.node_count
    seen = [False] * n
    best: list[int] = []
    for i in range(n):
        if seen[i]:
            continue
        comp = [i]
        seen[i] = True
        stack = [i]
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                w = int(w)
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        if len(comp) > len(best):
            best = comp
    return best
