"""Per-cohort outcome statistics over a school graph.

Degrees, clustering, and homophily for one entry-year cohort are always
computed against the full school graph: a member's degree counts friends in
every year, and homophily looks at all edges touching the cohort. Ratios of
integer counts are evaluated with a single division so the results are
exactly rounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DataError
from .graph import Graph
from .metrics import partition_modularity
from .textio import atomic_write_text, fmt_cell

__all__ = [
    "CohortStats",
    "gini",
    "cohort_degree_stats",
    "cohort_clustering",
    "year_homophily",
    "newman_h_adjusted",
    "year_modularity",
    "cohort_stats",
    "write_stats_csv",
]

STATS_HEADER = [
    "school_id",
    "cohort_year",
    "n_members",
    "log_avg_degree",
    "gini_degree",
    "avg_clustering",
    "year_homophily",
    "gender_h",
    "hometown_h",
]


@dataclass(frozen=True)
class CohortStats:
    """One stats.csv row; None marks an absent (or failed) field."""

    school_id: str
    cohort_year: int
    n_members: int
    log_avg_degree: Optional[float]
    gini_degree: Optional[float]
    avg_clustering: Optional[float]
    year_homophily: Optional[float]
    gender_h: Optional[float]
    hometown_h: Optional[float]


def gini(values) -> float:
    """Gini coefficient, sum |x_i - x_j| / (2 n^2 mean), via the sorted
    formula. All-zero input is defined as 0."""
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        raise ValueError("gini needs a nonempty list")
    if xs[0] < 0:
        raise ValueError("gini needs nonnegative values")
    total = math.fsum(xs)
    if total == 0:
        return 0.0
    num = math.fsum((2 * k - n + 1) * x for k, x in enumerate(xs))
    return num / (n * total)


def _members(school: Graph, cohort_year: int) -> list[int]:
    members = school.cohort_members(cohort_year)
    if not members:
        raise DataError(
            f"school {school.school_id!r} has no members in cohort {cohort_year}"
        )
    return members


def cohort_degree_stats(
    school: Graph, cohort_year: int
) -> tuple[Optional[float], float]:
    """(log mean degree, Gini of degrees) for cohort members, degrees taken
    over the whole school graph. All-isolated cohort -> log absent."""
    members = _members(school, cohort_year)
    degs = [int(school.degrees[i]) for i in members]
    total = sum(degs)
    log_avg = math.log(total / len(degs)) if total > 0 else None
    return log_avg, gini(degs)


def cohort_clustering(school: Graph, cohort_year: int) -> float:
    """Mean local clustering of cohort members within the full school graph."""
    members = _members(school, cohort_year)
    nb = [set(map(int, school.neighbors(i))) for i in range(school.node_count)]
    vals = []
    for i in members:
        d = len(nb[i])
        if d < 2:
            vals.append(0.0)
            continue
        links = 0
        for u in nb[i]:
            links += len(nb[i] & nb[u])
        # each triangle through i counted twice in the neighbor scan
        vals.append(links / (d * (d - 1)))
    return math.fsum(vals) / len(vals)


def year_homophily(school: Graph, cohort_year: int) -> Optional[float]:
    """Among edges with >= 1 endpoint in the cohort, the fraction whose both
    endpoints share the cohort year. No incident edges -> absent."""
    _members(school, cohort_year)
    total = 0
    within = 0
    years = school.years
    for u, v in school.edges:
        yu, yv = years[int(u)], years[int(v)]
        if yu == cohort_year or yv == cohort_year:
            total += 1
            if yu == cohort_year and yv == cohort_year:
                within += 1
    if total == 0:
        return None
    return within / total


def newman_h_adjusted(
    school: Graph, cohort_year: int, attribute: str
) -> Optional[float]:
    """Adjusted Newman homophily H = (sum e_ii - sum a_i^2)/(1 - sum a_i^2)
    over edges touching the cohort.

    Qualifying edges need >= 1 endpoint in the cohort and the attribute
    present on both endpoints; both endpoints count toward a_i with weight
    1. Absent when no edge qualifies or only one category appears.
    """
    if attribute == "gender":
        attrs = school.genders
    elif attribute == "hometown":
        attrs = school.hometowns
    else:
        raise ValueError(f"unknown attribute {attribute!r}")
    _members(school, cohort_year)
    years = school.years
    edge_total = 0
    within = 0
    endpoint_counts: dict[str, int] = {}
    for u, v in school.edges:
        u, v = int(u), int(v)
        if years[u] != cohort_year and years[v] != cohort_year:
            continue
        au, av = attrs[u], attrs[v]
        if au is None or av is None:
            continue
        edge_total += 1
        if au == av:
            within += 1
        endpoint_counts[au] = endpoint_counts.get(au, 0) + 1
        endpoint_counts[av] = endpoint_counts.get(av, 0) + 1
    if edge_total == 0:
        return None
    sq = sum(c * c for c in endpoint_counts.values())
    den = 4 * edge_total * edge_total - sq
    if den == 0:
        return None
    return (4 * edge_total * within - sq) / den


def year_modularity(school: Graph) -> float:
    """Newman Q of the partition of nodes by cohort year; nodes without a
    year form one extra block."""
    labels = [y if y is not None else "__absent__" for y in school.years]
    return partition_modularity(school, labels)


def cohort_stats(
    school: Graph, cohort_year: int, cutoff: Optional[int] = None
) -> CohortStats:
    """Assemble the full battery for one cohort, optionally on the edge
    snapshot at the cutoff timestamp."""
    g = school.snapshot(cutoff) if cutoff is not None else school
    members = _members(g, cohort_year)
    log_avg, gini_degree = cohort_degree_stats(g, cohort_year)
    return CohortStats(
        school_id=g.school_id,
        cohort_year=cohort_year,
        n_members=len(members),
        log_avg_degree=log_avg,
        gini_degree=gini_degree,
        avg_clustering=cohort_clustering(g, cohort_year),
        year_homophily=year_homophily(g, cohort_year),
        gender_h=newman_h_adjusted(g, cohort_year, "gender"),
        hometown_h=newman_h_adjusted(g, cohort_year, "hometown"),
    )


def write_stats_csv(path, rows: list[CohortStats]) -> None:
    lines = [",".join(STATS_HEADER)]
    for r in rows:
        cells = [
            r.school_id,
            str(r.cohort_year),
            str(r.n_members),
            fmt_cell(r.log_avg_degree),
            fmt_cell(r.gini_degree),
            fmt_cell(r.avg_clustering),
            fmt_cell(r.year_homophily),
            fmt_cell(r.gender_h),
            fmt_cell(r.hometown_h),
        ]
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")
