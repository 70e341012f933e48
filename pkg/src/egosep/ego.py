"""Ego-graph sampling and the 15-statistic feature battery.

An ego-graph is the subgraph induced on a node's direct neighbors and the
edges among them; the ego itself is excluded, but its cohort year is kept
for the share_same_year feature. Degenerate subgraphs map to finite values
(empty graph -> all zeros) so every feature vector is classifier-ready.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .graph import Graph
from .metrics import (
    algebraic_connectivity,
    avg_clustering,
    centralization,
    degree_assortativity,
    greedy_modularity,
    kbrace_components,
    kcore_components,
)
from .rng import rng_from
from .textio import write_csv_atomic

__all__ = ["EgoGraph", "FEATURE_NAMES", "sample_egos", "featurize", "write_features_csv"]

FEATURE_NAMES = (
    "size",
    "degree_mean",
    "degree_var",
    "density",
    "share_same_year",
    "assortativity",
    "algebraic_connectivity",
    "avg_clustering",
    "modularity_q",
    "eig_centralization",
    "btw_centralization",
    "kcore8_components",
    "kcore16_components",
    "kbrace8_components",
    "kbrace16_components",
)


@dataclass(frozen=True)
class EgoGraph:
    ego_id: str
    ego_year: Optional[int]
    subgraph: Graph


def sample_egos(
    school: Graph, cohort_year: Optional[int], n: int, seed: int
) -> list[EgoGraph]:
    """Sample n ego-graphs with replacement from a cohort.

    Seed nodes are drawn uniformly from the members of cohort_year; with
    cohort_year=None they are drawn from the whole node set (the
    all-cohorts, whole-school convention). Neighborhoods are taken in the
    full school graph, so other years appear as neighbors.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    if cohort_year is None:
        pool = list(range(school.node_count))
    else:
        pool = school.cohort_members(cohort_year)
    if not pool:
        raise DataError(
            f"graph {school.graph_id!r}: no members for cohort "
            f"{'<any>' if cohort_year is None else cohort_year}"
        )
    rng = rng_from(
        seed, "egos", school.graph_id, "all" if cohort_year is None else cohort_year
    )
    picks = rng.integers(0, len(pool), size=n)
    out = []
    for p in picks:
        ego = pool[int(p)]
        sub = school.induced(int(w) for w in school.neighbors(ego))
        out.append(
            EgoGraph(
                ego_id=school.node_ids[ego],
                ego_year=school.years[ego],
                subgraph=sub,
            )
        )
    return out


def featurize(e: EgoGraph) -> np.ndarray:
    """The 15 features of FEATURE_NAMES, in order, as float64."""
    sub = e.subgraph
    n, m = sub.node_count, sub.edge_count
    x = np.zeros(len(FEATURE_NAMES))
    if n == 0:
        return x
    deg = sub.degrees.astype(np.int64)
    sd = int(deg.sum())
    sdd = int((deg * deg).sum())
    x[0] = n
    x[1] = 2 * m / n
    x[2] = (n * sdd - sd * sd) / (n * n)
    x[3] = m / (n * (n - 1) // 2) if n >= 2 else 0.0
    if e.ego_year is not None:
        x[4] = sum(1 for y in sub.years if y == e.ego_year) / n
    x[5] = degree_assortativity(sub) if m else 0.0
    x[6] = algebraic_connectivity(sub) if n >= 2 else 0.0
    x[7] = avg_clustering(sub)
    x[8] = greedy_modularity(sub)[1]
    x[9] = centralization(sub, "eigenvector")
    x[10] = centralization(sub, "betweenness")
    x[11] = kcore_components(sub, 8)
    x[12] = kcore_components(sub, 16)
    x[13] = kbrace_components(sub, 8)
    x[14] = kbrace_components(sub, 16)
    return x


def write_features_csv(
    path, rows: Sequence[tuple[str, int, str, np.ndarray]]
) -> None:
    """rows: (graph_id, sample_idx, ego_id, feature vector)."""
    header = ["graph_id", "sample_idx", "ego_id", *FEATURE_NAMES]
    write_csv_atomic(
        path,
        header,
        ([gid, idx, ego, *vec.tolist()] for gid, idx, ego, vec in rows),
    )
