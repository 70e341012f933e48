import numpy as np
import pytest

from egosep.errors import DataError
from egosep.graph import Graph, load_graph, write_graph
from util import assert_same_graph, mk_graph


def write(path, text):
    path.write_text(text, encoding="utf-8")


def std_nodes(tmp_path, ids=("a", "b", "c"), school="s1"):
    p = tmp_path / "nodes.csv"
    rows = ["school_id,node_id,cohort_year,gender,hometown_id"]
    rows += [f"{school},{i},,," for i in ids]
    write(p, "\n".join(rows) + "\n")
    return p


class TestLoad:
    def test_duplicate_edges_collapse(self, tmp_path):
        np_ = std_nodes(tmp_path, ("a", "b"))
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\ns1,a,b\ns1,b,a\ns1,a,b\n")
        g = load_graph(ep, np_)
        assert g.edge_count == 1
        assert g.degrees.tolist() == [1, 1]

    def test_empty_edge_file_isolated_nodes(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\n")
        g = load_graph(ep, np_)
        assert g.node_count == 3
        assert g.edge_count == 0

    def test_self_loop_rejected(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\ns1,a,a\ns1,a,b\n")
        with pytest.raises(DataError, match="self-loop"):
            load_graph(ep, np_)

    def test_unknown_node_reports_line(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\ns1,a,b\ns1,a,zz\n")
        with pytest.raises(DataError, match=r"edges\.csv:3.*zz"):
            load_graph(ep, np_)

    def test_malformed_row_reports_line(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\ns1,a\n")
        with pytest.raises(DataError, match=r"edges\.csv:2"):
            load_graph(ep, np_)

    def test_bad_header(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(ep, "u,v\na,b\n")
        with pytest.raises(DataError, match="header"):
            load_graph(ep, np_)

    def test_attributes_parsed_and_absent(self, tmp_path):
        npth = tmp_path / "nodes.csv"
        write(
            npth,
            "school_id,node_id,cohort_year,gender,hometown_id\n"
            "s1,a,2009,f,h7\n"
            "s1,b,,,\n",
        )
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\ns1,a,b\n")
        g = load_graph(ep, npth)
        assert g.attribute(0).cohort_year == 2009
        assert g.attribute(0).gender == "f"
        assert g.attribute(0).hometown_id == "h7"
        assert g.attribute(1).cohort_year is None
        assert g.attribute(1).gender is None

    def test_year_out_of_range(self, tmp_path):
        npth = tmp_path / "nodes.csv"
        write(
            npth,
            "school_id,node_id,cohort_year,gender,hometown_id\ns1,a,1999,,\n",
        )
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\n")
        with pytest.raises(DataError, match="1999"):
            load_graph(ep, npth)

    def test_multiple_schools_need_selector(self, tmp_path):
        npth = tmp_path / "nodes.csv"
        write(
            npth,
            "school_id,node_id,cohort_year,gender,hometown_id\n"
            "s1,a,,,\ns2,b,,,\n",
        )
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v\n")
        with pytest.raises(DataError, match="multiple schools"):
            load_graph(ep, npth)
        g = load_graph(ep, npth, school_id="s2")
        assert g.node_ids == ("b",)

    def test_timestamps_iso_and_days(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(
            ep,
            "school_id,u,v,timestamp\ns1,a,b,1970-01-11\ns1,b,c,20\n",
        )
        g = load_graph(ep, np_)
        assert g.edge_times.tolist() == [10, 20]

    def test_mixed_timestamp_presence_rejected(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v,timestamp\ns1,a,b,10\ns1,b,c,\n")
        with pytest.raises(DataError, match="missing a timestamp"):
            load_graph(ep, np_)

    def test_duplicate_keeps_earliest_timestamp(self, tmp_path):
        np_ = std_nodes(tmp_path)
        ep = tmp_path / "edges.csv"
        write(ep, "school_id,u,v,timestamp\ns1,a,b,30\ns1,b,a,10\n")
        g = load_graph(ep, np_)
        assert g.edge_times.tolist() == [10]


class TestSnapshot:
    def graph(self):
        return mk_graph(4, [(0, 1), (1, 2), (2, 3)], edge_times=[10, 20, 30])

    def test_cutoff_before_everything(self):
        g = self.graph().snapshot(5)
        assert g.edge_count == 0
        assert g.node_count == 4

    def test_cutoff_after_everything(self):
        g = self.graph()
        assert_same_graph(g.snapshot(100), g)

    def test_boundary_inclusive(self):
        assert self.graph().snapshot(20).edge_count == 2

    def test_requires_times(self):
        g = mk_graph(2, [(0, 1)])
        with pytest.raises(ValueError, match="timestamp"):
            g.snapshot(10)

    def test_composition(self):
        g = mk_graph(
            5,
            [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)],
            edge_times=[3, 9, 14, 27, 31],
        )
        for t0, t1 in [(5, 30), (0, 40), (14, 14), (9, 27)]:
            assert t0 <= t1
            assert_same_graph(g.snapshot(t1).snapshot(t0), g.snapshot(t0))


class TestInduced:
    def test_identity(self):
        g = mk_graph(4, [(0, 1), (1, 2), (2, 3)], years=[2008, None, 2009, None])
        assert_same_graph(g.induced(range(4)), g)

    def test_singleton(self):
        g = mk_graph(3, [(0, 1), (1, 2), (0, 2)])
        sub = g.induced([1])
        assert sub.node_count == 1
        assert sub.edge_count == 0
        assert sub.node_ids == ("v1",)

    def test_triangle_pair(self):
        g = mk_graph(3, [(0, 1), (1, 2), (0, 2)])
        sub = g.induced([0, 1])
        assert sub.edge_count == 1

    def test_unknown_node(self):
        g = mk_graph(2, [(0, 1)])
        with pytest.raises(DataError, match="unknown node"):
            g.induced([0, 5])

    def test_attributes_and_times_preserved(self):
        g = mk_graph(
            3,
            [(0, 1), (1, 2)],
            years=[2008, 2009, None],
            genders=["f", None, "m"],
            edge_times=[7, 8],
        )
        sub = g.induced([1, 2])
        assert sub.years == (2009, None)
        assert sub.genders == (None, "m")
        assert sub.edge_times.tolist() == [8]


class TestInvariants:
    def test_degree_sum_is_twice_edges(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(1, 30))
            edges = [
                (i, j)
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < 0.2
            ]
            g = mk_graph(n, edges)
            assert int(g.degrees.sum()) == 2 * g.edge_count

    def test_neighbor_lists_sorted_unique(self):
        g = mk_graph(5, [(0, 4), (0, 2), (0, 1), (2, 4), (1, 2)])
        for i in range(5):
            nb = g.neighbors(i).tolist()
            assert nb == sorted(set(nb))

    def test_build_canonicalizes_and_dedups(self):
        g = mk_graph(3, [(2, 0), (0, 2), (1, 2)])
        assert g.edges.tolist() == [[0, 2], [1, 2]]

    def test_self_loop_rejected_in_build(self):
        with pytest.raises(DataError, match="self-loop"):
            mk_graph(3, [(1, 1)])

    def test_roundtrip_idempotent(self, tmp_path):
        g = mk_graph(
            4,
            [(0, 3), (1, 2), (0, 1)],
            years=[2008, None, 2010, 2011],
            genders=["f", "m", None, "f"],
            hometowns=["h1", None, None, "h2"],
            edge_times=[5, 6, 7],
        )
        e1, n1 = tmp_path / "e1.csv", tmp_path / "n1.csv"
        write_graph(g, e1, n1)
        g2 = load_graph(e1, n1)
        e2, n2 = tmp_path / "e2.csv", tmp_path / "n2.csv"
        write_graph(g2, e2, n2)
        assert e1.read_bytes() == e2.read_bytes()
        assert n1.read_bytes() == n2.read_bytes()
