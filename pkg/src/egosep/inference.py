"""OLS with cluster-robust errors and the pairwise AUC difference design.

The regression core is numpy-only: a sequential orthogonal decomposition
that reports the first linearly dependent column instead of silently
dropping it, plus the CR1 cluster sandwich. The design builder turns a
pairwise AUC matrix and a school covariate table into one row per
unordered pair, with absolute differences for continuous covariates
(class size on the log scale) and disagreement flags for binary ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .separability import DistanceMatrix
from .textio import atomic_write_text, fmt_cell

__all__ = [
    "OlsFit",
    "RegressionFit",
    "CovariateRow",
    "CovariateTable",
    "COVARIATES_HEADER",
    "DESIGN_NAMES",
    "ols",
    "clustered_se",
    "auc_difference_design",
    "Design",
    "fit_regression",
    "read_covariates_csv",
    "write_covariates_csv",
    "write_regress_json",
]


@dataclass(frozen=True)
class OlsFit:
    coef: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    r_squared: float
    adj_r_squared: float


def ols(X, y) -> OlsFit:
    """Least squares via sequential Householder-free orthogonalization.

    Columns are orthogonalized in order with two modified Gram-Schmidt
    passes; a column whose residual norm falls below 1e-8 of its original
    norm (or is exactly zero) is reported as rank deficient with its index.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a matrix")
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError("y length mismatch")
    if n < k:
        raise ValueError(f"need rows >= columns, got {n} < {k}")
    q = np.empty((n, k))
    r = np.zeros((k, k))
    for j in range(k):
        v = X[:, j].copy()
        norm0 = float(np.linalg.norm(v))
        for _pass in range(2):
            for i in range(j):
                c = float(q[:, i] @ v)
                r[i, j] += c
                v -= c * q[:, i]
        norm = float(np.linalg.norm(v))
        if norm0 == 0.0 or norm <= 1e-8 * norm0:
            raise ValueError(
                f"design column {j} is linearly dependent on earlier columns"
            )
        r[j, j] = norm
        q[:, j] = v / norm
    rhs = q.T @ y
    coef = np.zeros(k)
    for j in range(k - 1, -1, -1):
        coef[j] = (rhs[j] - r[j, j + 1 :] @ coef[j + 1 :]) / r[j, j]
    fitted = X @ coef
    resid = y - fitted
    ss_res = float(resid @ resid)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    if n > k:
        adj = 1.0 - (1.0 - r2) * (n - 1) / (n - k)
    else:
        adj = r2
    return OlsFit(coef=coef, fitted=fitted, residuals=resid,
                  r_squared=r2, adj_r_squared=adj)


def clustered_se(X, y, coef, clusters: Sequence) -> np.ndarray:
    """CR1 cluster-robust standard errors.

    (X'X)^-1 (sum_g X_g'u_g u_g'X_g) (X'X)^-1 scaled by
    G/(G-1) * (n-1)/(n-k); returns the square roots of the diagonal.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    coef = np.asarray(coef, dtype=np.float64)
    n, k = X.shape
    labels = list(clusters)
    if len(labels) != n:
        raise ValueError("clusters length mismatch")
    groups: dict = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    g = len(groups)
    if g < 2:
        raise ValueError("need at least 2 clusters")
    if n <= k:
        raise ValueError("need n > k for the CR1 correction")
    u = y - X @ coef
    bread = np.linalg.inv(X.T @ X)
    meat = np.zeros((k, k))
    for rows in groups.values():
        s = X[rows].T @ u[rows]
        meat += np.outer(s, s)
    scale = (g / (g - 1)) * ((n - 1) / (n - k))
    cov = scale * (bread @ meat @ bread)
    return np.sqrt(np.maximum(np.diag(cov), 0.0))


COVARIATES_HEADER = [
    "school_id",
    "class_size",
    "grad_rate",
    "admit_rate",
    "public_private",
    "commuter",
    "religious",
    "womens",
    "hbcu",
    "hsi",
    "greek_share",
]

_RATE_FIELDS = ("grad_rate", "admit_rate", "greek_share")
_FLAG_FIELDS = ("public_private", "commuter", "religious", "womens", "hbcu", "hsi")


@dataclass(frozen=True)
class CovariateRow:
    class_size: int
    grad_rate: float
    admit_rate: float
    public_private: int
    commuter: int
    religious: int
    womens: int
    hbcu: int
    hsi: int
    greek_share: float

    def validate(self) -> None:
        if self.class_size < 1:
            raise ValueError("class_size must be >= 1")
        for name in _RATE_FIELDS:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in _FLAG_FIELDS:
            v = getattr(self, name)
            if v not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1, got {v}")


@dataclass(frozen=True)
class CovariateTable:
    rows: dict[str, CovariateRow]

    def validate(self) -> None:
        for row in self.rows.values():
            row.validate()


DESIGN_NAMES = (
    "intercept",
    "abs_dlog_class_size",
    "abs_d_grad_rate",
    "abs_d_admit_rate",
    "diff_public_private",
    "diff_commuter",
    "diff_religious",
    "diff_womens",
    "diff_hbcu",
    "diff_hsi",
    "abs_d_greek_share",
)


@dataclass(frozen=True)
class Design:
    X: np.ndarray
    y: np.ndarray
    clusters: tuple[str, ...]
    names: tuple[str, ...]
    pair_ids: tuple[tuple[str, str], ...]


def _school_of(graph_id: str) -> str:
    return graph_id.split("#", 1)[0]


def auc_difference_design(
    m: DistanceMatrix, cov: CovariateTable, cluster_rule: str = "first_school"
) -> Design:
    """One regression row per unordered pair of matrix entries.

    y is the pair AUC; continuous covariates enter as absolute differences
    (class size as |dlog|), binary covariates as disagreement flags; the
    cluster id is the lexicographically first (or last, per cluster_rule)
    school of the pair. Absent matrix entries contribute no row.
    """
    m.validate()
    cov.validate()
    if cluster_rule not in ("first_school", "second_school"):
        raise ValueError(f"unknown cluster_rule {cluster_rule!r}")
    missing = [i for i in m.ids if _school_of(i) not in cov.rows]
    if missing:
        raise DataError(f"missing covariate rows for: {missing[:5]}")
    rows, ys, clusters, pair_ids = [], [], [], []
    k = len(m.ids)
    for i in range(k):
        for j in range(i + 1, k):
            v = m.values[i, j]
            if np.isnan(v):
                continue
            a = cov.rows[_school_of(m.ids[i])]
            b = cov.rows[_school_of(m.ids[j])]
            rows.append(
                [
                    1.0,
                    abs(math.log(a.class_size) - math.log(b.class_size)),
                    abs(a.grad_rate - b.grad_rate),
                    abs(a.admit_rate - b.admit_rate),
                    float(a.public_private != b.public_private),
                    float(a.commuter != b.commuter),
                    float(a.religious != b.religious),
                    float(a.womens != b.womens),
                    float(a.hbcu != b.hbcu),
                    float(a.hsi != b.hsi),
                    abs(a.greek_share - b.greek_share),
                ]
            )
            ys.append(float(v))
            pair = sorted((_school_of(m.ids[i]), _school_of(m.ids[j])))
            clusters.append(pair[0] if cluster_rule == "first_school" else pair[1])
            pair_ids.append((m.ids[i], m.ids[j]))
    return Design(
        X=np.asarray(rows, dtype=np.float64),
        y=np.asarray(ys, dtype=np.float64),
        clusters=tuple(clusters),
        names=DESIGN_NAMES,
        pair_ids=tuple(pair_ids),
    )


@dataclass(frozen=True)
class RegressionFit:
    names: tuple[str, ...]
    coef: np.ndarray
    se_clustered: np.ndarray
    r_squared: float
    adj_r_squared: float
    n: int
    cluster_count: int
    dropped: tuple[str, ...]


def fit_regression(design: Design, standardize: bool = False) -> RegressionFit:
    """Fit the difference design with CR1 errors.

    Non-intercept columns that are identically zero carry no information
    for this sample; they are removed before the fit and reported in
    `dropped` rather than passed to ols (which would reject them).
    """
    keep = [0]
    dropped = []
    for j in range(1, design.X.shape[1]):
        if np.all(design.X[:, j] == 0.0):
            dropped.append(design.names[j])
        else:
            keep.append(j)
    X = design.X[:, keep]
    names = tuple(design.names[j] for j in keep)
    if standardize:
        X = X.copy()
        for j in range(1, X.shape[1]):
            sd = X[:, j].std()
            if sd > 0.0:
                X[:, j] = (X[:, j] - X[:, j].mean()) / sd
    fit = ols(X, design.y)
    se = clustered_se(X, design.y, fit.coef, design.clusters)
    return RegressionFit(
        names=names,
        coef=fit.coef,
        se_clustered=se,
        r_squared=fit.r_squared,
        adj_r_squared=fit.adj_r_squared,
        n=len(design.y),
        cluster_count=len(set(design.clusters)),
        dropped=tuple(dropped),
    )


def read_covariates_csv(path) -> CovariateTable:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0].split(",") != COVARIATES_HEADER:
        raise DataError(
            f"{path}: expected header {','.join(COVARIATES_HEADER)!r}"
        )
    rows: dict[str, CovariateRow] = {}
    for ln, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(COVARIATES_HEADER):
            raise DataError(f"{path}:{ln}: expected {len(COVARIATES_HEADER)} fields")
        sid = cells[0]
        if sid in rows:
            raise DataError(f"{path}:{ln}: duplicate school_id {sid!r}")
        try:
            row = CovariateRow(
                class_size=int(cells[1]),
                grad_rate=float(cells[2]),
                admit_rate=float(cells[3]),
                public_private=int(cells[4]),
                commuter=int(cells[5]),
                religious=int(cells[6]),
                womens=int(cells[7]),
                hbcu=int(cells[8]),
                hsi=int(cells[9]),
                greek_share=float(cells[10]),
            )
            row.validate()
        except ValueError as exc:
            raise DataError(f"{path}:{ln}: {exc}") from exc
        rows[sid] = row
    table = CovariateTable(rows=rows)
    return table


def write_covariates_csv(path, table: CovariateTable) -> None:
    lines = [",".join(COVARIATES_HEADER)]
    for sid in sorted(table.rows):
        r = table.rows[sid]
        lines.append(
            ",".join(
                [
                    sid,
                    str(r.class_size),
                    fmt_cell(r.grad_rate),
                    fmt_cell(r.admit_rate),
                    str(r.public_private),
                    str(r.commuter),
                    str(r.religious),
                    str(r.womens),
                    str(r.hbcu),
                    str(r.hsi),
                    fmt_cell(r.greek_share),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_regress_json(path, fit: RegressionFit) -> None:
    payload = {
        "names": list(fit.names),
        "estimates": [float(c) for c in fit.coef],
        "clustered_ses": [float(s) for s in fit.se_clustered],
        "n": fit.n,
        "clusters": fit.cluster_count,
        "r_squared": fit.r_squared,
        "adj_r_squared": fit.adj_r_squared,
        "dropped": list(fit.dropped),
    }
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
