"""Shared helpers for the test suite."""

from __future__ import annotations

from egosep.graph import Graph


def mk_graph(
    n,
    edges,
    years=None,
    genders=None,
    hometowns=None,
    edge_times=None,
    gid="g",
    school="s",
):
    return Graph.build(
        gid,
        school,
        [f"v{i}" for i in range(n)],
        edges,
        years=years,
        genders=genders,
        hometowns=hometowns,
        edge_times=edge_times,
    )


def assert_same_graph(a: Graph, b: Graph):
    assert a.node_ids == b.node_ids
    assert a.edges.tolist() == b.edges.tolist()
    assert a.years == b.years
    assert a.genders == b.genders
    assert a.hometowns == b.hometowns
    if a.edge_times is None:
        assert b.edge_times is None
    else:
        assert b.edge_times is not None
        assert a.edge_times.tolist() == b.edge_times.tolist()
