"""Immutable attributed undirected graph: construction, CSV ingestion,
temporal snapshots and induced subgraphs.

Node ids are opaque strings in files and dense integer indices internally.
Edges are stored once in canonical (u < v) order plus a CSR adjacency with
sorted neighbor lists. Missing attributes are ``None``, never a sentinel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "AttributeRecord",
    "Graph",
    "DEFAULT_YEAR_RANGE",
    "load_graph",
    "write_graph",
]

DEFAULT_YEAR_RANGE = (2007, 2016)

_EPOCH = date(1970, 1, 1)

NODE_HEADER = ["school_id", "node_id", "cohort_year", "gender", "hometown_id"]
EDGE_HEADER = ["school_id", "u", "v"]


@dataclass(frozen=True)
class AttributeRecord:
    """Per-node attributes; absent values are None."""

    school_id: str
    cohort_year: Optional[int] = None
    gender: Optional[str] = None
    hometown_id: Optional[str] = None


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected attributed graph, immutable after construction.

    Safe to share across concurrent readers. Use :meth:`build` rather than
    the raw constructor; it canonicalizes edges and enforces invariants.
    """

    graph_id: str
    school_id: str
    node_ids: tuple[str, ...]
    years: tuple[Optional[int], ...]
    genders: tuple[Optional[str], ...]
    hometowns: tuple[Optional[str], ...]
    edges: np.ndarray  # (m, 2) int32, u < v, lexicographically sorted
    edge_times: Optional[np.ndarray]  # (m,) int64 days, or None
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE

    @staticmethod
    def build(
        graph_id: str,
        school_id: str,
        node_ids: Sequence[str],
        edges: Iterable[tuple[int, int]],
        *,
        years: Optional[Sequence[Optional[int]]] = None,
        genders: Optional[Sequence[Optional[str]]] = None,
        hometowns: Optional[Sequence[Optional[str]]] = None,
        edge_times: Optional[Sequence[int]] = None,
        year_range: tuple[int, int] = DEFAULT_YEAR_RANGE,
    ) -> "Graph":
        n = len(node_ids)
        if len(set(node_ids)) != n:
            raise DataError(f"duplicate node ids in graph {graph_id!r}")
        years = tuple(years) if years is not None else (None,) * n
        genders = tuple(genders) if genders is not None else (None,) * n
        hometowns = tuple(hometowns) if hometowns is not None else (None,) * n
        if not (len(years) == len(genders) == len(hometowns) == n):
            raise ValueError("attribute length mismatch")
        for y in years:
            if y is not None and not (year_range[0] <= y <= year_range[1]):
                raise DataError(
                    f"cohort_year {y} outside configured range {year_range}"
                )

        edge_list = list(edges)
        times = list(edge_times) if edge_times is not None else None
        if times is not None and len(times) != len(edge_list):
            raise ValueError("edge_times length mismatch")

        # canonicalize, drop duplicates keeping the earliest timestamp
        canon: dict[tuple[int, int], Optional[int]] = {}
        for k, (u, v) in enumerate(edge_list):
            u, v = int(u), int(v)
            if u == v:
                raise DataError(f"self-loop on node index {u} in graph {graph_id!r}")
            if not (0 <= u < n and 0 <= v < n):
                raise DataError(f"edge endpoint out of range: ({u}, {v})")
            if u > v:
                u, v = v, u
            t = times[k] if times is not None else None
            prev = canon.get((u, v), _MISSING)
            if prev is _MISSING:
                canon[(u, v)] = t
            elif t is not None and (prev is None or t < prev):
                canon[(u, v)] = t

        keys = sorted(canon)
        m = len(keys)
        earr = np.array(keys, dtype=np.int32).reshape(m, 2)
        if times is not None:
            tvals = [canon[k] for k in keys]
            if any(t is None for t in tvals):
                raise DataError("edge_times present but missing for some edges")
            tarr: Optional[np.ndarray] = np.array(tvals, dtype=np.int64)
        else:
            tarr = None

        indptr, indices = _build_csr(n, earr)
        for a in (earr, indptr, indices) + ((tarr,) if tarr is not None else ()):
            a.setflags(write=False)
        return Graph(
            graph_id=graph_id,
            school_id=school_id,
            node_ids=tuple(node_ids),
            years=years,
            genders=genders,
            hometowns=hometowns,
            edges=earr,
            edge_times=tarr,
            indptr=indptr,
            indices=indices,
            year_range=year_range,
        )

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbor indices of node i."""
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def attribute(self, i: int) -> AttributeRecord:
        return AttributeRecord(
            school_id=self.school_id,
            cohort_year=self.years[i],
            gender=self.genders[i],
            hometown_id=self.hometowns[i],
        )

    def cohort_members(self, cohort_year: int) -> list[int]:
        return [i for i, y in enumerate(self.years) if y == cohort_year]

    def cohort_years_present(self) -> list[int]:
        return sorted({y for y in self.years if y is not None})

    def snapshot(self, cutoff: int) -> "Graph":
        """Graph with exactly the edges timestamped at or before cutoff."""
        if self.edge_times is None:
            raise ValueError(f"graph {self.graph_id!r} has no edge timestamps")
        keep = self.edge_times <= int(cutoff)
        return Graph.build(
            self.graph_id,
            self.school_id,
            self.node_ids,
            [tuple(e) for e in self.edges[keep]],
            years=self.years,
            genders=self.genders,
            hometowns=self.hometowns,
            edge_times=[int(t) for t in self.edge_times[keep]],
            year_range=self.year_range,
        )

    def induced(self, nodes: Iterable[int]) -> "Graph":
        """Subgraph on the given node indices with all edges among them."""
        idx = sorted({int(v) for v in nodes})
        n = self.node_count
        for v in idx:
            if not 0 <= v < n:
                raise DataError(f"unknown node index {v}")
        remap = {old: new for new, old in enumerate(idx)}
        member = np.zeros(n, dtype=bool)
        member[idx] = True
        sub_edges = []
        for u in idx:
            for w in self.neighbors(u):
                if w > u and member[w]:
                    sub_edges.append((remap[u], remap[int(w)]))
        times = None
        if self.edge_times is not None:
            tmap = {
                (int(u), int(v)): int(t)
                for (u, v), t in zip(self.edges, self.edge_times)
            }
            back = {new: old for old, new in remap.items()}
            times = [tmap[(back[a], back[b])] for a, b in sub_edges]
        return Graph.build(
            self.graph_id,
            self.school_id,
            [self.node_ids[v] for v in idx],
            sub_edges,
            years=[self.years[v] for v in idx],
            genders=[self.genders[v] for v in idx],
            hometowns=[self.hometowns[v] for v in idx],
            edge_times=times,
            year_range=self.year_range,
        )


class _Missing:
    pass


_MISSING = _Missing()


def _build_csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    deg = np.zeros(n, dtype=np.int64)
    if edges.size:
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.zeros(indptr[-1], dtype=np.int32)
    cursor = indptr[:-1].copy()
    for u, v in edges:
        indices[cursor[u]] = v
        cursor[u] += 1
        indices[cursor[v]] = u
        cursor[v] += 1
    for i in range(n):
        seg = indices[indptr[i] : indptr[i + 1]]
        seg.sort()
    return indptr, indices


def _parse_timestamp(text: str, path: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return (date.fromisoformat(text) - _EPOCH).days
    except ValueError:
        raise DataError(
            f"{path}:{line_no}: bad timestamp {text!r} (want integer days or ISO date)"
        ) from None


def _read_rows(path: Path) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def load_graph(
    edge_path: str | Path,
    node_path: str | Path,
    *,
    school_id: Optional[str] = None,
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE,
) -> Graph:
    """Load one school's graph from edges.csv / nodes.csv.

    With ``school_id=None`` the files must contain exactly one school;
    otherwise rows are filtered to the requested school. Duplicate edges
    collapse to the earliest timestamp; self-loop rows are an error.
    """
    node_path = Path(node_path)
    edge_path = Path(edge_path)

    rows = _read_rows(node_path)
    if not rows or rows[0] != NODE_HEADER:
        raise DataError(f"{node_path}:1: bad header, want {','.join(NODE_HEADER)}")
    schools_seen: set[str] = set()
    node_ids: list[str] = []
    years: list[Optional[int]] = []
    genders: list[Optional[str]] = []
    hometowns: list[Optional[str]] = []
    seen: dict[str, int] = {}
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise DataError(f"{node_path}:{ln}: expected 5 fields, got {len(row)}")
        sch, nid, year_s, gender, home = row
        if not sch or not nid:
            raise DataError(f"{node_path}:{ln}: empty school_id or node_id")
        schools_seen.add(sch)
        if school_id is not None and sch != school_id:
            continue
        if nid in seen:
            raise DataError(f"{node_path}:{ln}: duplicate node id {nid!r}")
        seen[nid] = len(node_ids)
        node_ids.append(nid)
        if year_s:
            try:
                year = int(year_s)
            except ValueError:
                raise DataError(f"{node_path}:{ln}: bad cohort_year {year_s!r}") from None
            if not (year_range[0] <= year <= year_range[1]):
                raise DataError(
                    f"{node_path}:{ln}: cohort_year {year} outside range {year_range}"
                )
            years.append(year)
        else:
            years.append(None)
        genders.append(gender or None)
        hometowns.append(home or None)

    if school_id is None:
        if len(schools_seen) > 1:
            raise DataError(
                f"{node_path}: multiple schools {sorted(schools_seen)}; "
                "pass school_id to select one"
            )
        school_id = next(iter(schools_seen)) if schools_seen else ""
    elif not node_ids:
        raise DataError(f"{node_path}: no nodes for school {school_id!r}")

    rows = _read_rows(edge_path)
    if not rows or rows[0] not in (EDGE_HEADER, EDGE_HEADER + ["timestamp"]):
        raise DataError(
            f"{edge_path}:1: bad header, want {','.join(EDGE_HEADER)}[,timestamp]"
        )
    has_ts_col = len(rows[0]) == 4
    edges: list[tuple[int, int]] = []
    times: list[Optional[int]] = []
    self_loops = 0
    first_loop_line = None
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(rows[0]):
            raise DataError(
                f"{edge_path}:{ln}: expected {len(rows[0])} fields, got {len(row)}"
            )
        sch, u_id, v_id = row[0], row[1], row[2]
        if sch != school_id:
            continue
        if u_id == v_id:
            self_loops += 1
            if first_loop_line is None:
                first_loop_line = ln
            continue
        for nid in (u_id, v_id):
            if nid not in seen:
                raise DataError(f"{edge_path}:{ln}: unknown node id {nid!r}")
        edges.append((seen[u_id], seen[v_id]))
        if has_ts_col and row[3]:
            times.append(_parse_timestamp(row[3], str(edge_path), ln))
        else:
            times.append(None)

    if self_loops:
        raise DataError(
            f"{edge_path}: {self_loops} self-loop row(s) rejected "
            f"(first at line {first_loop_line})"
        )
    n_with_ts = sum(1 for t in times if t is not None)
    if n_with_ts == 0:
        edge_times: Optional[list[int]] = None
    elif n_with_ts == len(times):
        edge_times = [t for t in times if t is not None]
    else:
        raise DataError(
            f"{edge_path}: {len(times) - n_with_ts} edge row(s) missing a timestamp"
        )

    return Graph.build(
        school_id,
        school_id,
        node_ids,
        edges,
        years=years,
        genders=genders,
        hometowns=hometowns,
        edge_times=edge_times,
        year_range=year_range,
    )


def write_graph(g: Graph, edge_path: str | Path, node_path: str | Path) -> None:
    """Serialize back to the ingestion schemas, rows in canonical order."""
    order = sorted(range(g.node_count), key=lambda i: g.node_ids[i])
    with open(node_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(NODE_HEADER)
        for i in order:
            w.writerow(
                [
                    g.school_id,
                    g.node_ids[i],
                    "" if g.years[i] is None else g.years[i],
                    g.genders[i] or "",
                    g.hometowns[i] or "",
                ]
            )
    has_ts = g.edge_times is not None
    rows = []
    for k in range(g.edge_count):
        u, v = int(g.edges[k, 0]), int(g.edges[k, 1])
        a, b = sorted((g.node_ids[u], g.node_ids[v]))
        rows.append((a, b, int(g.edge_times[k]) if has_ts else None))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(edge_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(EDGE_HEADER + (["timestamp"] if has_ts else []))
        for a, b, t in rows:
            w.writerow([g.school_id, a, b] + ([t] if has_ts else []))
