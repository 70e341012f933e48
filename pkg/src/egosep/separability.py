"""Pairwise graph separability: AUC distance matrix, ordering, embedding.

Every unordered pair of graphs gets its own classifier run: sample ego
graphs from each side, featurize, and score a cross-validated AUC with a
seed derived from the sorted id pair. The value is stored symmetrically,
the diagonal is pinned at chance (0.5), and downstream steps treat
max(AUC - 0.5, 0) as a dissimilarity.
"""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .ego import FEATURE_NAMES, featurize, sample_egos
from .errors import PartialFailureError
from .forest import ForestParams, cv_auc_full
from .graph import Graph
from .rng import derive_seed
from .textio import atomic_write_text, fmt_cell

__all__ = [
    "MatrixMeta",
    "DistanceMatrix",
    "GroupSummary",
    "pairwise_matrix",
    "hierarchical_order",
    "mds_embed",
    "group_summary",
    "write_auc_matrix_csv",
    "read_auc_matrix_csv",
    "write_order_txt",
    "write_embedding_csv",
]


class MatrixMeta(NamedTuple):
    n_samples: int
    folds: int
    seed: int


@dataclass(frozen=True)
class DistanceMatrix:
    ids: tuple[str, ...]
    values: np.ndarray  # square, symmetric, diagonal 0.5, NaN marks absent
    meta: Optional[MatrixMeta]
    pair_importance: dict[tuple[str, str], np.ndarray]

    def validate(self) -> None:
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise ValueError("matrix dimensions do not match ids")
        if len(set(self.ids)) != n:
            raise ValueError("duplicate graph ids")
        ok = np.isnan(self.values) | ((self.values >= 0.0) & (self.values <= 1.0))
        if not ok.all():
            raise ValueError("entries must lie in [0, 1]")
        if not np.all(np.diag(self.values) == 0.5):
            raise ValueError("diagonal must equal 0.5")
        same = (self.values == self.values.T) | (
            np.isnan(self.values) & np.isnan(self.values.T)
        )
        if not same.all():
            raise ValueError("matrix must be symmetric")


def _entry_id(graph: Graph, cohort_year: Optional[int]) -> str:
    if cohort_year is None:
        return graph.graph_id
    return f"{graph.graph_id}#{cohort_year}"


def _pair_features(graph, cohort_year, n, seed):
    egos = sample_egos(graph, cohort_year, n, seed)
    return np.array([featurize(e) for e in egos])


def _pair_job(args):
    i, j, gi, yi, gj, yj, n, params, folds = args
    feats_i = _pair_features(gi, yi, n, params.seed)
    feats_j = _pair_features(gj, yj, n, params.seed)
    res = cv_auc_full(feats_i, feats_j, folds, params)
    return i, j, res.auc, res.importance


def pairwise_matrix(
    graphs: list[tuple[Graph, Optional[int]]],
    n: int,
    params: ForestParams = ForestParams(),
    folds: int = 5,
    workers: int = 1,
) -> DistanceMatrix:
    """AUC distance matrix over all unordered pairs of (graph, cohort) entries.

    Each pair is computed once under a seed derived from the sorted id pair,
    so results do not depend on worker count or scheduling. A failed pair
    leaves its entry absent; the run fails only when more than 1% of pairs
    are absent.
    """
    if len(graphs) < 2:
        raise ValueError("need at least 2 graphs")
    ids = tuple(_entry_id(g, y) for g, y in graphs)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate graph ids in input")
    k = len(ids)
    values = np.full((k, k), np.nan)
    np.fill_diagonal(values, 0.5)

    jobs = []
    for i in range(k):
        for j in range(i + 1, k):
            lo, hi = sorted((ids[i], ids[j]))
            pair_seed = derive_seed(params.seed, "pair", lo, hi)
            jobs.append(
                (
                    i,
                    j,
                    graphs[i][0],
                    graphs[i][1],
                    graphs[j][0],
                    graphs[j][1],
                    n,
                    replace(params, seed=pair_seed),
                    folds,
                )
            )

    failures = []
    importance: dict[tuple[str, str], np.ndarray] = {}

    def _store(result):
        i, j, auc_value, imp = result
        values[i, j] = auc_value
        values[j, i] = auc_value
        lo, hi = sorted((ids[i], ids[j]))
        importance[(lo, hi)] = imp

    if workers <= 1:
        for job in jobs:
            try:
                _store(_pair_job(job))
            except Exception as exc:  # noqa: BLE001 - annotate and keep going
                failures.append((ids[job[0]], ids[job[1]], str(exc)))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_pair_job, job): job for job in jobs}
            for fut, job in futures.items():
                try:
                    _store(fut.result())
                except Exception as exc:  # noqa: BLE001
                    failures.append((ids[job[0]], ids[job[1]], str(exc)))

    if failures:
        limit = 0.01 * len(jobs)
        if len(failures) > limit:
            detail = "; ".join(f"{a}~{b}: {msg}" for a, b, msg in failures[:5])
            raise PartialFailureError(
                f"{len(failures)} of {len(jobs)} pairs failed ({detail})"
            )
    m = DistanceMatrix(
        ids=ids, values=values, meta=MatrixMeta(n, folds, params.seed),
        pair_importance=importance,
    )
    m.validate()
    return m


def _dissimilarity(m: DistanceMatrix) -> np.ndarray:
    """Clustering/embedding distance: max(AUC - 0.5, 0), absent -> 0."""
    d = np.maximum(np.nan_to_num(m.values, nan=0.5) - 0.5, 0.0)
    np.fill_diagonal(d, 0.0)
    return d


def hierarchical_order(m: DistanceMatrix) -> list[str]:
    """Leaf order of a complete-linkage dendrogram on the AUC dissimilarity.

    Clusters are labeled by their smallest member index; ties in merge
    distance resolve to the lexicographically smallest label pair, and the
    smaller-labeled cluster keeps the left position.
    """
    m.validate()
    d = _dissimilarity(m)
    k = len(m.ids)
    # cluster label -> (member index set, leaf order list)
    clusters: dict[int, tuple[set[int], list[int]]] = {
        i: ({i}, [i]) for i in range(k)
    }
    while len(clusters) > 1:
        best = None
        labels = sorted(clusters)
        for ai in range(len(labels)):
            for bi in range(ai + 1, len(labels)):
                a, b = labels[ai], labels[bi]
                dist = max(
                    d[p, q] for p in clusters[a][0] for q in clusters[b][0]
                )
                key = (dist, a, b)
                if best is None or key < best:
                    best = key
        _, a, b = best
        members = clusters[a][0] | clusters[b][0]
        leaves = clusters[a][1] + clusters[b][1]
        del clusters[b]
        clusters[a] = (members, leaves)
    (_, leaves), = clusters.values()
    return [m.ids[i] for i in leaves]


def mds_embed(m: DistanceMatrix, dims: int = 2) -> np.ndarray:
    """Classical (Torgerson) MDS of the AUC dissimilarity.

    Double-center the squared dissimilarities, keep the top eigenpairs,
    truncate negative eigenvalues to zero, and scale eigenvectors by the
    square root of the eigenvalue. Requesting more dimensions than the Gram
    rank pads with zero columns. Column signs are fixed so the entry of
    largest magnitude is positive.
    """
    m.validate()
    if dims < 1:
        raise ValueError("dims must be >= 1")
    d = _dissimilarity(m)
    k = len(m.ids)
    sq = d * d
    j = np.eye(k) - np.full((k, k), 1.0 / k)
    b = -0.5 * (j @ sq @ j)
    b = 0.5 * (b + b.T)
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1]
    coords = np.zeros((k, dims))
    for c in range(min(dims, k)):
        lam = vals[order[c]]
        if lam <= 0.0:
            break
        col = vecs[:, order[c]] * np.sqrt(lam)
        pivot = int(np.argmax(np.abs(col)))
        if col[pivot] < 0:
            col = -col
        coords[:, c] = col
    return coords


@dataclass(frozen=True)
class GroupSummary:
    within_mean: Optional[float]
    within_sd: Optional[float]
    between_mean: Optional[float]
    between_sd: Optional[float]
    same_school_by_delta: Optional[dict[int, float]]


_SCHOOL_YEAR = re.compile(r"^(.*)#(-?\d+)$")


def group_summary(m: DistanceMatrix, groups: dict[str, str]) -> GroupSummary:
    """Mean/SD of within-group and between-group off-diagonal AUC entries.

    When every id has the form school#year, also reports the mean AUC of
    same-school pairs keyed by cohort-year gap. Absent entries are excluded;
    a side with no pairs is reported as absent.
    """
    m.validate()
    missing = [i for i in m.ids if i not in groups]
    if missing:
        raise ValueError(f"unlabeled ids: {missing[:5]}")
    within, between = [], []
    k = len(m.ids)
    for i in range(k):
        for j in range(i + 1, k):
            v = m.values[i, j]
            if np.isnan(v):
                continue
            if groups[m.ids[i]] == groups[m.ids[j]]:
                within.append(v)
            else:
                between.append(v)

    def stats(xs):
        if not xs:
            return None, None
        arr = np.asarray(xs)
        return float(arr.mean()), float(arr.std())

    within_mean, within_sd = stats(within)
    between_mean, between_sd = stats(between)

    by_delta = None
    parsed = [_SCHOOL_YEAR.match(i) for i in m.ids]
    if all(parsed):
        buckets: dict[int, list[float]] = {}
        for i in range(k):
            for j in range(i + 1, k):
                v = m.values[i, j]
                if np.isnan(v):
                    continue
                si, yi = parsed[i].group(1), int(parsed[i].group(2))
                sj, yj = parsed[j].group(1), int(parsed[j].group(2))
                if si == sj:
                    buckets.setdefault(abs(yi - yj), []).append(v)
        by_delta = {
            delta: float(np.mean(vals)) for delta, vals in sorted(buckets.items())
        }
    return GroupSummary(within_mean, within_sd, between_mean, between_sd, by_delta)


def write_auc_matrix_csv(path, m: DistanceMatrix) -> None:
    lines = ["," + ",".join(m.ids)]
    for i, gid in enumerate(m.ids):
        cells = []
        for j in range(len(m.ids)):
            v = m.values[i, j]
            cells.append("" if np.isnan(v) else f"{v:.6f}")
        lines.append(gid + "," + ",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_auc_matrix_csv(path) -> DistanceMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows or rows[0][0] != "":
        raise ValueError(f"{path}: expected empty top-left header cell")
    ids = tuple(rows[0][1:])
    k = len(ids)
    if len(rows) != k + 1:
        raise ValueError(f"{path}: expected {k} data rows, found {len(rows) - 1}")
    values = np.full((k, k), np.nan)
    for i, row in enumerate(rows[1:]):
        if len(row) != k + 1 or row[0] != ids[i]:
            raise ValueError(f"{path}: malformed row {i + 2}")
        for j, cell in enumerate(row[1:]):
            if cell != "":
                values[i, j] = float(cell)
    m = DistanceMatrix(ids=ids, values=values, meta=None, pair_importance={})
    m.validate()
    return m


def write_order_txt(path, order: list[str]) -> None:
    atomic_write_text(path, "\n".join(order) + "\n")


def write_embedding_csv(path, m: DistanceMatrix, coords: np.ndarray) -> None:
    lines = ["graph_id,x,y"]
    for i, gid in enumerate(m.ids):
        x = fmt_cell(float(coords[i, 0]))
        y = fmt_cell(float(coords[i, 1])) if coords.shape[1] > 1 else "0"
        lines.append(f"{gid},{x},{y}")
    atomic_write_text(path, "\n".join(lines) + "\n")
