"""From-scratch random-forest binary classifier and cross-validated AUC.

Trees are binary, axis-aligned, Gini-impurity driven, grown depth-first on
bootstrap resamples with a random feature subset per node; the per-tree
kernel is numba-compiled with an inline splitmix64 generator so fits are
fast and bit-reproducible. AUC is computed from exact integer rank sums and
rounded to the nearest multiple of 2^-52, which makes the label-flip
complement identity auc + auc_flipped == 1.0 hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .rng import derive_seed, rng_from

__all__ = [
    "ForestParams",
    "Forest",
    "fit",
    "predict_proba",
    "auc",
    "cv_auc",
    "cv_auc_full",
    "CvResult",
    "feature_importance",
    "forest_dump",
]

U64 = np.uint64


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_features: int = 4
    min_leaf: int = 1
    max_depth: Optional[int] = None
    bootstrap: bool = True
    seed: int = 0

    def validate(self, n_features: int) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 1 <= self.max_features <= n_features:
            raise ValueError(
                f"max_features must be in [1, {n_features}], got {self.max_features}"
            )
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")


class Tree(NamedTuple):
    feature: np.ndarray  # int64, -1 at leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int64
    right: np.ndarray  # int64
    count0: np.ndarray  # int64 bootstrap class counts at every node
    count1: np.ndarray


@dataclass(frozen=True)
class Forest:
    trees: tuple[Tree, ...]
    feature_count: int
    params: ForestParams
    importance_raw: np.ndarray  # summed impurity decrease per feature
    oob_accuracy: Optional[float]


@njit(cache=True)
def _splitmix64(state):
    state = state + U64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4B5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    z = z ^ (z >> U64(31))
    return state, z


@njit(cache=True)
def _grow_tree(X, y, boot, max_features, min_leaf, max_depth, seed):
    """Grow one tree depth-first over index ranges of the bootstrap array.

    Split candidates are midpoints between consecutive distinct sorted
    values of each sampled feature; the first strictly better candidate in
    draw order wins, which pins tie-breaking.
    """
    n_feat = X.shape[1]
    n = boot.shape[0]
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    count0 = np.zeros(cap, np.int64)
    count1 = np.zeros(cap, np.int64)
    imp = np.zeros(n_feat, np.float64)

    idx = boot.copy()
    vals = np.empty(n, np.float64)
    stack = np.empty((cap, 4), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    state = U64(seed)
    pool = np.empty(n_feat, np.int64)
    tmp = np.empty(n, np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        sz = end - start
        c1 = 0
        for i in range(start, end):
            c1 += y[idx[i]]
        c0 = sz - c1
        count0[node] = c0
        count1[node] = c1
        if c0 == 0 or c1 == 0 or sz < 2 * min_leaf:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue
        g_node = 1.0 - ((c0 / sz) ** 2 + (c1 / sz) ** 2)

        for f in range(n_feat):
            pool[f] = f
        best_feat = -1
        best_thr = 0.0
        best_score = np.inf
        for t in range(max_features):
            state, rv = _splitmix64(state)
            j = t + int(rv % U64(n_feat - t))
            f = pool[j]
            pool[j] = pool[t]
            pool[t] = f
            for i in range(sz):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals[:sz])
            cum1 = 0
            for c in range(sz - 1):
                oc = order[c]
                cum1 += y[idx[start + oc]]
                v_lo = vals[oc]
                v_hi = vals[order[c + 1]]
                if v_lo == v_hi:
                    continue
                nl = c + 1
                nr = sz - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                l1 = cum1
                l0 = nl - l1
                r1 = c1 - l1
                r0 = nr - r1
                score = (nl - (l0 * l0 + l1 * l1) / nl) + (
                    nr - (r0 * r0 + r1 * r1) / nr
                )
                if score < best_score:
                    best_score = score
                    best_feat = f
                    # midpoint can round up to v_hi at the float gap limit,
                    # which would break the partition; fall back to v_lo
                    thr = v_lo + 0.5 * (v_hi - v_lo)
                    if thr >= v_hi:
                        thr = v_lo
                    best_thr = thr
        if best_feat < 0:
            continue

        nl = 0
        nr = 0
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                idx[start + nl] = idx[i]
                nl += 1
            else:
                tmp[nr] = idx[i]
                nr += 1
        for i in range(nr):
            idx[start + nl + i] = tmp[i]

        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = lnode
        right[node] = rnode

        l1 = 0
        for i in range(start, start + nl):
            l1 += y[idx[i]]
        l0 = nl - l1
        r1 = c1 - l1
        r0 = nr - r1
        gl = 1.0 - ((l0 / nl) ** 2 + (l1 / nl) ** 2)
        gr = 1.0 - ((r0 / nr) ** 2 + (r1 / nr) ** 2)
        imp[best_feat] += sz * g_node - nl * gl - nr * gr

        stack[top, 0] = lnode
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = rnode
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        count0[:n_nodes].copy(),
        count1[:n_nodes].copy(),
        imp,
    )


@njit(cache=True)
def _tree_scores(feature, threshold, left, right, count0, count1, X, out):
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] += count1[node] / (count0[node] + count1[node])


def _as_matrix(samples) -> np.ndarray:
    X = np.ascontiguousarray(np.asarray(samples, dtype=np.float64))
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X


def fit(samples, labels, params: ForestParams = ForestParams()) -> Forest:
    """Train a forest on feature vectors with {0,1} labels."""
    X = _as_matrix(samples)
    y = np.asarray(labels, dtype=np.int8)
    n, n_feat = X.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    if y.shape != (n,):
        raise ValueError("labels length mismatch")
    if not (np.isin(y, (0, 1)).all()):
        raise ValueError("labels must be 0 or 1")
    if y.min() == y.max():
        raise ValueError("single-class input")
    params.validate(n_feat)

    depth = -1 if params.max_depth is None else params.max_depth
    trees = []
    imp = np.zeros(n_feat)
    oob_sum = np.zeros(n)
    oob_cnt = np.zeros(n, dtype=np.int64)
    for t in range(params.n_trees):
        if params.bootstrap:
            boot = rng_from(params.seed, "tree", t, "boot").integers(
                0, n, size=n, dtype=np.int64
            )
        else:
            boot = np.arange(n, dtype=np.int64)
        split_seed = np.uint64(derive_seed(params.seed, "tree", t, "splits"))
        arrays = _grow_tree(
            X, y, boot, params.max_features, params.min_leaf, depth, split_seed
        )
        tree = Tree(*arrays[:6])
        imp += arrays[6]
        trees.append(tree)
        if params.bootstrap:
            out_mask = np.ones(n, dtype=bool)
            out_mask[boot] = False
            if out_mask.any():
                sc = np.zeros(int(out_mask.sum()))
                _tree_scores(*tree, X[out_mask], sc)
                oob_sum[out_mask] += sc
                oob_cnt[out_mask] += 1

    oob_accuracy = None
    if params.bootstrap:
        have = oob_cnt > 0
        if have.any():
            pred = (oob_sum[have] / oob_cnt[have]) > 0.5
            oob_accuracy = float((pred == (y[have] == 1)).mean())
    return Forest(
        trees=tuple(trees),
        feature_count=n_feat,
        params=params,
        importance_raw=imp,
        oob_accuracy=oob_accuracy,
    )


def predict_proba(forest: Forest, x) -> np.ndarray | float:
    """Mean over trees of the leaf class-1 fraction.

    Accepts a single feature vector (returns a float) or a sample matrix
    (returns a vector).
    """
    single = np.asarray(x).ndim == 1
    X = _as_matrix(x)
    if X.shape[1] != forest.feature_count:
        raise ValueError("feature count mismatch")
    out = np.zeros(X.shape[0])
    for tree in forest.trees:
        _tree_scores(*tree, X, out)
    out /= len(forest.trees)
    return float(out[0]) if single else out


def feature_importance(forest: Forest) -> np.ndarray:
    """Impurity-decrease importance, normalized to sum to 1.

    A forest that never split (all-constant features) has no impurity signal
    and reports the uniform vector by convention.
    """
    total = float(forest.importance_raw.sum())
    if total <= 0.0:
        return np.full(forest.feature_count, 1.0 / forest.feature_count)
    return forest.importance_raw / total


def _q52(num: int, den: int) -> float:
    """Round num/den (in [0,1]) to the nearest multiple of 2^-52, half to
    even. The grid is uniform, so complements round to complements."""
    scaled = num << 52
    q, r = divmod(scaled, den)
    if 2 * r > den or (2 * r == den and q & 1):
        q += 1
    return q / (1 << 52)


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(score+ > score-) + 0.5 P(tie), via exact integer
    rank sums."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    n1 = int((y == 1).sum())
    n0 = int((y == 0).sum())
    if n1 == 0 or n0 == 0:
        raise ValueError("both labels must be present")
    order = np.argsort(s, kind="stable")
    ss = s[order]
    ys = y[order]
    two_rank_sum = 0  # sum over positives of twice their average rank
    i = 0
    n = len(ss)
    while i < n:
        j = i
        while j < n and ss[j] == ss[i]:
            j += 1
        pos_in_group = int((ys[i:j] == 1).sum())
        two_rank_sum += pos_in_group * ((i + 1) + j)  # lo + hi, 1-based
        i = j
    two_u = two_rank_sum - n1 * (n1 + 1)
    return _q52(two_u, 2 * n0 * n1)


@dataclass(frozen=True)
class CvResult:
    auc: float
    importance: np.ndarray  # mean of fold-forest normalized importances
    n_a: int
    n_b: int
    folds: int


def _fold_chunks(n: int, folds: int, rng) -> list[np.ndarray]:
    perm = rng.permutation(n)
    sizes = [n // folds + (1 if f < n % folds else 0) for f in range(folds)]
    out = []
    at = 0
    for sz in sizes:
        out.append(perm[at : at + sz])
        at += sz
    return out


def cv_auc_full(
    a, b, folds: int = 5, params: ForestParams = ForestParams()
) -> CvResult:
    """Stratified k-fold CV: one forest per fold, out-of-fold scores pooled
    across folds, a single AUC on the pool. Label 1 marks side b."""
    Xa = _as_matrix(a)
    Xb = _as_matrix(b)
    if Xa.shape[1] != Xb.shape[1]:
        raise ValueError("feature count mismatch between sides")
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if Xa.shape[0] < folds or Xb.shape[0] < folds:
        raise ValueError(
            f"need >= {folds} samples per side, got {Xa.shape[0]} and {Xb.shape[0]}"
        )
    chunks_a = _fold_chunks(Xa.shape[0], folds, rng_from(params.seed, "cv", "a"))
    chunks_b = _fold_chunks(Xb.shape[0], folds, rng_from(params.seed, "cv", "b"))
    X = np.vstack([Xa, Xb])
    y = np.concatenate([np.zeros(Xa.shape[0], np.int8), np.ones(Xb.shape[0], np.int8)])
    scores = np.empty(X.shape[0])
    importance = np.zeros(Xa.shape[1])
    for f in range(folds):
        test = np.concatenate([chunks_a[f], chunks_b[f] + Xa.shape[0]])
        train_mask = np.ones(X.shape[0], dtype=bool)
        train_mask[test] = False
        fold_params = replace(params, seed=derive_seed(params.seed, "fold", f))
        forest = fit(X[train_mask], y[train_mask], fold_params)
        scores[test] = predict_proba(forest, X[test])
        importance += feature_importance(forest)
    return CvResult(
        auc=auc(scores, y),
        importance=importance / folds,
        n_a=Xa.shape[0],
        n_b=Xb.shape[0],
        folds=folds,
    )


def cv_auc(a, b, folds: int = 5, params: ForestParams = ForestParams()) -> float:
    return cv_auc_full(a, b, folds, params).auc


def forest_dump(forest: Forest) -> str:
    """Deterministic text dump: one line per node for cross-implementation
    diffing."""
    lines = [f"forest trees={len(forest.trees)} features={forest.feature_count}"]
    for t, tree in enumerate(forest.trees):
        for i in range(len(tree.feature)):
            lines.append(
                f"tree {t} node {i} feat {int(tree.feature[i])} "
                f"thr {float(tree.threshold[i])!r} left {int(tree.left[i])} "
                f"right {int(tree.right[i])} c0 {int(tree.count0[i])} "
                f"c1 {int(tree.count1[i])}"
            )
    return "\n".join(lines) + "\n"
