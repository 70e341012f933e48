import numpy as np
import pytest

from egosep.ego import FEATURE_NAMES, EgoGraph, featurize, sample_egos, write_features_csv
from egosep.errors import DataError
from util import mk_graph


def complete(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


class TestSampling:
    def test_isolated_cohort_member_gives_empty_egos(self):
        g = mk_graph(3, [(1, 2)], years=[2008, 2009, 2009])
        egos = sample_egos(g, 2008, 3, seed=1)
        assert len(egos) == 3
        for e in egos:
            assert e.ego_id == "v0"
            assert e.subgraph.node_count == 0

    def test_star_hub_ego(self):
        g = mk_graph(5, [(0, i) for i in range(1, 5)], years=[2008, None, None, None, None])
        (e,) = sample_egos(g, 2008, 1, seed=4)
        assert e.subgraph.node_count == 4
        assert e.subgraph.edge_count == 0

    def test_clique_ego_is_k4(self):
        g = mk_graph(5, complete(5), years=[2008] * 5)
        for e in sample_egos(g, 2008, 5, seed=0):
            assert e.subgraph.node_count == 4
            assert e.subgraph.edge_count == 6

    def test_neighborhood_spans_years(self):
        g = mk_graph(3, [(0, 1), (0, 2)], years=[2008, 2009, None])
        (e,) = sample_egos(g, 2008, 1, seed=0)
        assert e.subgraph.years == (2009, None)

    def test_empty_cohort_raises(self):
        g = mk_graph(2, [(0, 1)], years=[2008, 2008])
        with pytest.raises(DataError, match="2011"):
            sample_egos(g, 2011, 3, seed=0)

    def test_none_cohort_samples_everyone(self):
        g = mk_graph(4, [(0, 1), (2, 3)])
        egos = sample_egos(g, None, 40, seed=2)
        assert {e.ego_id for e in egos} == {"v0", "v1", "v2", "v3"}

    def test_deterministic(self):
        g = mk_graph(6, complete(6), years=[2008] * 6)
        a = [e.ego_id for e in sample_egos(g, 2008, 10, seed=7)]
        b = [e.ego_id for e in sample_egos(g, 2008, 10, seed=7)]
        c = [e.ego_id for e in sample_egos(g, 2008, 10, seed=8)]
        assert a == b
        assert a != c


class TestFeaturize:
    def test_names_pinned(self):
        assert FEATURE_NAMES == (
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

    def test_empty_is_all_zero(self):
        e = EgoGraph("x", 2008, mk_graph(0, []))
        assert featurize(e).tolist() == [0.0] * 15

    def test_k4_same_year(self):
        sub = mk_graph(4, complete(4), years=[2009] * 4)
        x = featurize(EgoGraph("x", 2009, sub))
        named = dict(zip(FEATURE_NAMES, x))
        assert named["size"] == 4
        assert named["density"] == 1.0
        assert named["share_same_year"] == 1.0
        assert named["avg_clustering"] == 1.0

    def test_p4_values(self):
        sub = mk_graph(4, [(0, 1), (1, 2), (2, 3)])
        x = featurize(EgoGraph("x", None, sub))
        named = dict(zip(FEATURE_NAMES, x))
        assert named["assortativity"] == -0.5
        assert named["density"] == 0.5
        assert named["degree_mean"] == 1.5
        assert named["share_same_year"] == 0.0

    def test_absent_ego_year_counts_nothing(self):
        sub = mk_graph(2, [(0, 1)], years=[2008, 2008])
        x = featurize(EgoGraph("x", None, sub))
        assert dict(zip(FEATURE_NAMES, x))["share_same_year"] == 0.0

    def test_degree_var_population(self):
        sub = mk_graph(3, [(0, 1)])
        x = featurize(EgoGraph("x", None, sub))
        # degrees 1,1,0: mean 2/3, population variance 2/9
        assert dict(zip(FEATURE_NAMES, x))["degree_var"] == 2 / 9

    def test_pure_function(self):
        sub = mk_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)])
        e = EgoGraph("x", None, sub)
        assert featurize(e).tolist() == featurize(e).tolist()

    def test_all_finite_on_awkward_inputs(self):
        cases = [
            mk_graph(1, []),
            mk_graph(2, []),
            mk_graph(2, [(0, 1)]),
            mk_graph(3, [(0, 1)]),
            mk_graph(4, [(0, 1), (2, 3)]),
        ]
        for sub in cases:
            x = featurize(EgoGraph("x", 2008, sub))
            assert np.isfinite(x).all()


class TestFeaturesCsv:
    def test_round_numbers_and_header(self, tmp_path):
        sub = mk_graph(3, complete(3), years=[2008] * 3)
        vec = featurize(EgoGraph("e0", 2008, sub))
        path = tmp_path / "features.csv"
        write_features_csv(path, [("g1", 0, "e0", vec)])
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "graph_id,sample_idx,ego_id," + ",".join(FEATURE_NAMES)
        cells = lines[1].split(",")
        assert cells[:3] == ["g1", "0", "e0"]
        assert cells[3] == "3"  # size prints as an integer
