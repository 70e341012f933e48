"""Seeded synthetic attributed-graph generators.

All generators are pure functions of their parameters and seed: the same
inputs give byte-identical graphs on every platform. Sparse regimes use
geometric skip sampling so the cost is O(edges), not O(n^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph
from .rng import rng_from

__all__ = ["BlockPlan", "SbmSpec", "gen_er", "gen_sbm", "gen_ws", "gen_college"]


@dataclass(frozen=True)
class BlockPlan:
    """Attribute assignment for one SBM block."""

    cohort_year: Optional[int] = None
    gender_dist: Optional[tuple[tuple[str, float], ...]] = None
    hometown_dist: Optional[tuple[tuple[str, float], ...]] = None


@dataclass(frozen=True)
class SbmSpec:
    block_sizes: tuple[int, ...]
    link_probs: tuple[tuple[float, ...], ...]
    attribute_plan: Optional[tuple[BlockPlan, ...]] = None
    seed: int = 0
    graph_id: str = ""
    year_range: tuple[int, int] = (2007, 2016)

    def validate(self) -> None:
        b = len(self.block_sizes)
        if b == 0:
            raise ValueError("need at least one block")
        if any(s < 0 for s in self.block_sizes):
            raise ValueError("negative block size")
        if len(self.link_probs) != b or any(len(r) != b for r in self.link_probs):
            raise ValueError(
                f"link_probs must be {b}x{b}, got "
                f"{len(self.link_probs)}x{len(self.link_probs[0]) if self.link_probs else 0}"
            )
        for i in range(b):
            for j in range(b):
                p = self.link_probs[i][j]
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"link probability {p} outside [0, 1]")
                if self.link_probs[j][i] != p:
                    raise ValueError("link_probs must be symmetric")
        if self.attribute_plan is not None and len(self.attribute_plan) != b:
            raise ValueError("attribute_plan length must match block count")


def _node_ids(n: int) -> list[str]:
    width = len(str(max(n - 1, 0)))
    return [f"n{i:0{width}d}" for i in range(n)]


def _skip_indices(total: int, p: float, rng: np.random.Generator) -> list[int]:
    """Indices from range(total), each kept with probability p."""
    if total <= 0 or p <= 0.0:
        return []
    if p >= 1.0:
        return list(range(total))
    if p < 0.25:
        out = []
        log_q = math.log1p(-p)
        pos = -1
        while True:
            gap = int(math.log1p(-rng.random()) / log_q) + 1
            pos += gap
            if pos >= total:
                return out
            out.append(pos)
    mask = rng.random(total) < p
    return np.flatnonzero(mask).tolist()


def _pair_from_index(linear: int, n: int) -> tuple[int, int]:
    """Decode row-major upper-triangle index into (i, j), i < j."""
    total = n * (n - 1) // 2
    rev = total - 1 - linear
    k = (math.isqrt(8 * rev + 1) - 1) // 2
    i = n - 2 - k
    j = n - 1 - (rev - k * (k + 1) // 2)
    return i, j


def gen_er(n: int, p: float, seed: int, *, graph_id: str = "") -> Graph:
    """Erdos-Renyi G(n, p)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = rng_from(seed, "er", n)
    edges = [_pair_from_index(L, n) for L in _skip_indices(n * (n - 1) // 2, p, rng)]
    gid = graph_id or f"er-{seed}"
    return Graph.build(gid, gid, _node_ids(n), edges)


def _sample_categorical(
    dist: tuple[tuple[str, float], ...], size: int, rng: np.random.Generator
) -> list[str]:
    cats = [c for c, _ in dist]
    probs = np.array([w for _, w in dist], dtype=float)
    if (probs < 0).any() or probs.sum() <= 0:
        raise ValueError("bad categorical distribution")
    probs = probs / probs.sum()
    picks = rng.choice(len(cats), size=size, p=probs)
    return [cats[k] for k in picks]


def gen_sbm(spec: SbmSpec) -> Graph:
    """Stochastic block model with per-block attribute assignment."""
    spec.validate()
    sizes = spec.block_sizes
    n = sum(sizes)
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    years: list[Optional[int]] = [None] * n
    genders: list[Optional[str]] = [None] * n
    hometowns: list[Optional[str]] = [None] * n
    if spec.attribute_plan is not None:
        rng_attr = rng_from(spec.seed, "sbm", "attrs")
        for b, plan in enumerate(spec.attribute_plan):
            lo, hi = starts[b], starts[b + 1]
            if plan.cohort_year is not None:
                for i in range(lo, hi):
                    years[i] = plan.cohort_year
            if plan.gender_dist is not None:
                genders[lo:hi] = _sample_categorical(plan.gender_dist, hi - lo, rng_attr)
            if plan.hometown_dist is not None:
                hometowns[lo:hi] = _sample_categorical(
                    plan.hometown_dist, hi - lo, rng_attr
                )

    rng = rng_from(spec.seed, "sbm", "edges")
    edges: list[tuple[int, int]] = []
    nb = len(sizes)
    for a in range(nb):
        for b in range(a, nb):
            p = spec.link_probs[a][b]
            if a == b:
                sz = sizes[a]
                for L in _skip_indices(sz * (sz - 1) // 2, p, rng):
                    i, j = _pair_from_index(L, sz)
                    edges.append((starts[a] + i, starts[a] + j))
            else:
                for L in _skip_indices(sizes[a] * sizes[b], p, rng):
                    i, j = divmod(L, sizes[b])
                    edges.append((starts[a] + i, starts[b] + j))
    gid = spec.graph_id or f"sbm-{spec.seed}"
    return Graph.build(
        gid,
        gid,
        _node_ids(n),
        edges,
        years=years,
        genders=genders,
        hometowns=hometowns,
        year_range=spec.year_range,
    )


def gen_ws(n: int, k: int, beta: float, seed: int, *, graph_id: str = "") -> Graph:
    """Watts-Strogatz small world: ring lattice with probability-beta rewiring.

    Rewiring preserves the edge count, so the result has exactly n*k/2 edges.
    """
    if k < 2 or k % 2 != 0:
        raise ValueError("k must be even and >= 2")
    if n <= k:
        raise ValueError("need n > k")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must be in [0, 1]")
    rng = rng_from(seed, "ws", n, k)
    adj: list[set[int]] = [set() for _ in range(n)]
    for j in range(1, k // 2 + 1):
        for i in range(n):
            w = (i + j) % n
            adj[i].add(w)
            adj[w].add(i)
    for j in range(1, k // 2 + 1):
        for i in range(n):
            if rng.random() >= beta:
                continue
            w = (i + j) % n
            if w not in adj[i]:
                continue
            if len(adj[i]) >= n - 1:
                continue
            while True:
                cand = int(rng.integers(0, n))
                if cand != i and cand not in adj[i]:
                    break
            adj[i].discard(w)
            adj[w].discard(i)
            adj[i].add(cand)
            adj[cand].add(i)
    edges = [(i, w) for i in range(n) for w in adj[i] if w > i]
    gid = graph_id or f"ws-{seed}"
    return Graph.build(gid, gid, _node_ids(n), edges)


def gen_college(
    n: int,
    years: int,
    year_mix: float,
    gender_h: float,
    seed: int,
    *,
    avg_degree: float = 12.0,
    hometown_count: int = 50,
    graph_id: str = "",
) -> Graph:
    """Attributed SBM preset: blocks are (entry year x gender) cells.

    year_mix scales the between-year link probability relative to within-year
    (0 = fully segregated years, 1 = year-blind). gender_h scales the
    between-gender probability by (1 - gender_h), so 0 is gender-blind
    linking and 1 is strictly same-gender linking. Hometowns are uniform.
    """
    if not 1 <= years <= n:
        raise ValueError("need n >= years >= 1")
    if years > 9:
        raise ValueError("at most 9 cohort years supported (labels 2008-2016)")
    if not 0.0 <= year_mix <= 1.0:
        raise ValueError("year_mix must be in [0, 1]")
    if not 0.0 <= gender_h <= 1.0:
        raise ValueError("gender_h must be in [0, 1]")

    base = min(1.0, avg_degree / max(n - 1, 1))
    cells = []  # (year index, gender)
    sizes = []
    for y in range(years):
        n_year = n // years + (1 if y < n % years else 0)
        n_f = n_year // 2 + (n_year % 2 if y % 2 == 0 else 0)
        for gender, sz in (("f", n_f), ("m", n_year - n_f)):
            cells.append((y, gender))
            sizes.append(sz)
    probs = []
    for (y1, g1) in cells:
        row = []
        for (y2, g2) in cells:
            p = base
            if y1 != y2:
                p *= year_mix
            if g1 != g2:
                p *= 1.0 - gender_h
            row.append(p)
        probs.append(tuple(row))
    home_dist = tuple(
        (f"h{h:02d}", 1.0 / hometown_count) for h in range(hometown_count)
    )
    plan = tuple(
        BlockPlan(
            cohort_year=2008 + y,
            gender_dist=((g, 1.0),),
            hometown_dist=home_dist,
        )
        for (y, g) in cells
    )
    gid = graph_id or f"college-{seed}"
    spec = SbmSpec(
        block_sizes=tuple(sizes),
        link_probs=tuple(probs),
        attribute_plan=plan,
        seed=seed,
        graph_id=gid,
    )
    return gen_sbm(spec)
