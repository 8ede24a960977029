import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kne.errors import DataError
from kne.graph import (
    Graph,
    connected_components,
    is_connected,
    largest_connected_component,
    load_edge_list,
    write_edge_list,
    write_nodemap,
)

from conftest import make_graph, triangle_graph, write_edge_file


class TestLoadEdgeList:
    def test_triangle(self, tmp_path):
        path = write_edge_file(tmp_path / "tri.edges", ["0 1", "1 2", "2 0"])
        g = load_edge_list(path)
        assert g.n == 3
        assert g.m == 3
        assert all(g.degree(v) == 2 for v in range(3))

    def test_duplicates_and_self_loops_dropped(self, tmp_path):
        path = write_edge_file(tmp_path / "dups.edges", ["a b", "b a", "a a"])
        g = load_edge_list(path)
        assert g.n == 2
        assert g.m == 1

    def test_ids_by_first_appearance(self, tmp_path):
        path = write_edge_file(tmp_path / "order.edges", ["x y", "y z"])
        g = load_edge_list(path)
        assert g.tokens == ["x", "y", "z"]

    def test_comments_and_third_column_ignored(self, tmp_path):
        path = write_edge_file(
            tmp_path / "weird.edges",
            ["# header", "% konect-style", "a b 3.5", "", "b c 1.0"],
        )
        g = load_edge_list(path)
        assert g.n == 3
        assert g.m == 2

    def test_malformed_line_reports_number(self, tmp_path):
        path = write_edge_file(tmp_path / "bad.edges", ["a b", "lonely"])
        with pytest.raises(DataError, match=":2"):
            load_edge_list(path)

    def test_empty_graph(self, tmp_path):
        path = write_edge_file(tmp_path / "empty.edges", ["# nothing"])
        with pytest.raises(DataError, match="empty"):
            load_edge_list(path)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_edge_list(tmp_path / "missing.edges")

    def test_directed_flag_yields_same_graph(self, tmp_path):
        path = write_edge_file(tmp_path / "dir.edges", ["a b", "b c", "c a"])
        g1 = load_edge_list(path, directed=False)
        g2 = load_edge_list(path, directed=True)
        assert np.array_equal(g1.indices, g2.indices)


class TestAccessors:
    def test_triangle_degree(self, triangle):
        assert triangle.degree(0) == 2

    def test_star_center_degree(self):
        g = make_graph(5, [(0, i) for i in range(1, 5)])
        assert g.degree(0) == 4
        assert sorted(g.neighbors(0).tolist()) == [1, 2, 3, 4]

    def test_out_of_range(self, triangle):
        with pytest.raises(IndexError):
            triangle.degree(3)
        with pytest.raises(IndexError):
            triangle.neighbors(-1)

    def test_neighbors_sorted_and_symmetric(self, toy_graph):
        g = toy_graph
        for v in range(g.n):
            nbrs = g.neighbors(v)
            assert np.all(np.diff(nbrs) > 0)
            for u in nbrs:
                assert g.has_edge(int(u), v)

    @given(st.integers(0, 2**31))
    @settings(max_examples=25, deadline=None)
    def test_degree_sum_is_twice_edges(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        n = int(rng.integers(2, 40))
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < 0.2
        g = make_graph(n, list(zip(iu[mask].tolist(), ju[mask].tolist())))
        assert sum(g.degree(v) for v in range(g.n)) == 2 * g.m


class TestLargestComponent:
    def test_triangle_plus_isolated_edge(self):
        g = make_graph(5, [(0, 1), (1, 2), (2, 0), (3, 4)])
        lcc = largest_connected_component(g)
        assert lcc.n == 3
        assert lcc.m == 3
        assert lcc.tokens == ["0", "1", "2"]

    def test_connected_graph_identity(self, toy_graph):
        lcc = largest_connected_component(toy_graph)
        assert lcc.n == toy_graph.n
        assert np.array_equal(lcc.indices, toy_graph.indices)
        assert lcc.tokens == toy_graph.tokens

    def test_idempotent(self):
        g = make_graph(6, [(0, 1), (2, 3), (3, 4), (4, 2), (4, 5)])
        once = largest_connected_component(g)
        twice = largest_connected_component(once)
        assert once.tokens == twice.tokens
        assert np.array_equal(once.indices, twice.indices)

    def test_tie_broken_by_smallest_member(self):
        # two components of size 2; the one containing node 0 must win
        g = make_graph(4, [(0, 3), (1, 2)])
        lcc = largest_connected_component(g)
        assert lcc.tokens == ["0", "3"]

    def test_component_count(self):
        g = make_graph(7, [(0, 1), (2, 3), (4, 5)])
        assert len(connected_components(g)) == 4  # three edges + isolated node 6

    def test_is_connected(self, triangle):
        assert is_connected(triangle)
        assert not is_connected(make_graph(4, [(0, 1), (2, 3)]))


class TestRoundTrip:
    def test_write_and_reload_isomorphic(self, tmp_path, toy_graph):
        path = tmp_path / "round.edges"
        write_edge_list(toy_graph, path)
        g2 = load_edge_list(path)
        # same token set; adjacency must agree under the token mapping
        assert sorted(g2.tokens) == sorted(toy_graph.tokens)
        for v in range(toy_graph.n):
            mine = {toy_graph.tokens[int(u)] for u in toy_graph.neighbors(v)}
            theirs = {
                g2.tokens[int(u)] for u in g2.neighbors(g2.token_id(toy_graph.tokens[v]))
            }
            assert mine == theirs

    def test_nodemap(self, tmp_path):
        g = make_graph(5, [(0, 1), (1, 2), (2, 0), (3, 4)])
        lcc = largest_connected_component(g)
        path = tmp_path / "m.nodemap"
        write_nodemap(lcc, path)
        lines = path.read_text().splitlines()
        assert lines == ["0 0", "1 1", "2 2"]

    def test_token_id_unknown(self, triangle):
        with pytest.raises(DataError, match="unknown node token"):
            triangle.token_id("zzz")
