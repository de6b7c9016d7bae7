import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.errors import FormatError, TreeStructureError
from src.formats import (SCHEMA_VERSION, embedding_from_dict, embedding_to_dict, format_graph,
                         format_tree, guest_from_dict, guest_to_dict, load_json, packing_from_dict,
                         packing_to_dict, parse_graph, parse_tree, read_graph, to_json, write_graph)
from src.graph_core import Embedding, Packing, Side, build_graph, build_rooted_tree, induced_forest


class TestGraphText:
    def test_parse_edges_with_comments(self):
        G = parse_graph("# seed 3\nbipartite 2 3\n0 1\n1 2  # trailing\n\n")
        assert (G.side_a_size, G.side_b_size) == (2, 3)
        assert G.edges == frozenset({(0, 1), (1, 2)})

    def test_parse_complete(self):
        G = parse_graph("bipartite 4 2 complete\n")
        assert G.edge_count == 8

    def test_format_complete_is_compact(self):
        assert format_graph(build_graph(3, 3, complete=True)) == "bipartite 3 3 complete\n"

    def test_format_sorted_edges(self):
        G = build_graph(2, 2, [(1, 0), (0, 1)])
        assert format_graph(G) == "bipartite 2 2\n0 1\n1 0\n"

    @pytest.mark.parametrize("text", [
        "",
        "graph 2 2\n",
        "bipartite two 2\n",
        "bipartite 2 2 dense\n",
        "bipartite 2 2 complete\n0 1\n",
        "bipartite 2 2\n0 1 1\n",
        "bipartite 2 2\n0 x\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(FormatError):
            parse_graph(text)

    def test_out_of_range_edge_is_graph_error(self):
        with pytest.raises(ValueError):
            parse_graph("bipartite 2 2\n0 5\n")

    def test_file_round_trip(self, tmp_path):
        G = build_graph(3, 2, [(0, 0), (2, 1)])
        path = tmp_path / 'host.txt'
        write_graph(path, G)
        assert read_graph(path) == G


class TestTreeText:
    def test_parse(self):
        T = parse_tree("tree 4 0\n-1 0 1\n1\n")
        assert T.parent == (-1, 0, 1, 1)

    def test_format(self, small_tree):
        text = format_tree(small_tree)
        assert text.startswith("tree 8 0\n")
        assert parse_tree(text) == small_tree

    def test_count_mismatch(self):
        with pytest.raises(FormatError):
            parse_tree("tree 3 0\n-1 0\n")

    def test_structure_errors_propagate(self):
        with pytest.raises(TreeStructureError):
            parse_tree("tree 2 0\n-1 -1\n")


class TestJson:
    def test_schema_version_first(self):
        body = json.loads(to_json({'command': 'x'}))
        assert list(body)[0] == 'schema_version'
        assert body['schema_version'] == SCHEMA_VERSION

    def test_load_rejects_unknown_schema(self, tmp_path):
        path = tmp_path / 'doc.json'
        path.write_text(json.dumps({'schema_version': 99}), encoding='utf-8')
        with pytest.raises(FormatError):
            load_json(path)

    def test_load_rejects_garbage(self, tmp_path):
        path = tmp_path / 'doc.json'
        path.write_text("{not json", encoding='utf-8')
        with pytest.raises(FormatError):
            load_json(path)

    def test_forest_guest_keeps_flips_and_origin(self, small_tree):
        F = induced_forest(small_tree, [2, 3, 4, 5, 6, 7])
        restored = guest_from_dict(guest_to_dict(F))
        assert restored.flips == F.flips
        assert restored.origin == F.origin
        assert [c.parent for c in restored.components] == [c.parent for c in F.components]

    def test_embedding_document(self, tmp_path):
        T = build_rooted_tree([-1, 0], 0)
        e = Embedding('T1', T, {0: (Side.A, 2), 1: (Side.B, 0)},
                      {'engine': 'greedy', 'seed': 5, 'joined': 0})
        body = json.loads(to_json(embedding_to_dict(e)))
        assert body['map'] == [[0, 'A', 2], [1, 'B', 0]]
        assert body['engine'] == 'greedy'
        assert body['meta'] == {'joined': 0}

        restored = embedding_from_dict(body)
        assert restored.vertex_map == e.vertex_map
        assert restored.meta['seed'] == 5

    def test_packing_document_accepts_single_embedding(self):
        T = build_rooted_tree([-1, 0], 0)
        e = Embedding('T1', T, {0: (Side.A, 0), 1: (Side.B, 0)})
        assert len(packing_from_dict(embedding_to_dict(e))) == 1
        assert len(packing_from_dict(packing_to_dict(Packing((e, e)), command='x'))) == 2
        with pytest.raises(FormatError):
            packing_from_dict({'command': 'x'})

    def test_malformed_embedding(self):
        with pytest.raises(FormatError):
            embedding_from_dict({'guest_id': 'T', 'map': [[0, 'C', 1]],
                                 'guest': {'kind': 'tree', 'root': 0, 'parent': [-1]}})

    def test_fractions_stay_exact(self):
        body = json.loads(to_json({'eps': Fraction(1, 3), 'gamma': Fraction(1, 4)}))
        assert body['eps'] == '1/3'
        assert Fraction(body['eps']) == Fraction(1, 3)
        assert Fraction(body['gamma']) == Fraction(1, 4)


@st.composite
def bipartite_graphs(draw):
    n_a, n_b = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    edges = draw(st.sets(st.tuples(st.integers(0, n_a - 1), st.integers(0, n_b - 1))))
    return build_graph(n_a, n_b, edges)


@st.composite
def rooted_trees(draw, max_size=30):
    n = draw(st.integers(1, max_size))
    order = draw(st.permutations(range(n)))
    parent = [-1] * n
    for i in range(1, n):
        parent[order[i]] = order[draw(st.integers(0, i - 1))]
    return build_rooted_tree(parent, order[0])


@st.composite
def embeddings(draw):
    T = draw(rooted_trees(max_size=12))
    size = draw(st.integers(T.vertex_count, T.vertex_count + 3))
    images = {side: iter(draw(st.permutations(range(size)))) for side in Side}
    vertex_map = {v: (T.side_of(v), next(images[T.side_of(v)])) for v in range(T.vertex_count)}
    return Embedding(draw(st.sampled_from(['T1', 'T2', 'F7'])), T, vertex_map)


@settings(max_examples=60, deadline=None)
@given(G=bipartite_graphs())
def test_graph_text_round_trip(G):
    assert parse_graph(format_graph(G)) == G


@settings(max_examples=60, deadline=None)
@given(T=rooted_trees())
def test_tree_text_round_trip(T):
    restored = parse_tree(format_tree(T))
    assert restored == T
    assert restored.root == T.root


@settings(max_examples=40, deadline=None)
@given(members=st.lists(embeddings(), min_size=1, max_size=3))
def test_packing_document_round_trip(members):
    packing = Packing(tuple(members))
    body = json.loads(to_json(packing_to_dict(packing, command='pack')))
    restored = packing_from_dict(body)
    assert [e.guest_id for e in restored] == [e.guest_id for e in packing]
    for before, after in zip(packing, restored):
        assert after.vertex_map == before.vertex_map
        assert after.guest.parent == before.guest.parent
        assert after.guest.root == before.guest.root
