from fractions import Fraction

import numpy as np
import pytest

from src.errors import EmbeddingEdgeMissing, GraphError, TreeStructureError
from src.graph_core import (BalancedForest, Embedding, Ok, Packing, Side, Violation, build_graph,
                            build_rooted_tree, density, forest_from_trees, induced_forest,
                            relabel_graph, remove_embedding_edges, tree_from_edges,
                            verify_embedding, verify_packing)
from src.oracle import SearchStatus, brute_force_pack, double_star_decomposition, path_tree


class TestBipartiteGraph:
    def test_complete_graph(self):
        G = build_graph(3, 2, complete=True)
        assert G.edge_count == 6
        assert G.min_degree == 2
        assert G.neighbours(Side.A, 0) == (0, 1)
        assert G.neighbours(Side.B, 1) == (0, 1, 2)
        assert G.degrees_a.tolist() == [2, 2, 2]
        assert G.degrees_b.tolist() == [3, 3]

    def test_edge_list(self):
        G = build_graph(2, 3, [(0, 2), (1, 0), (0, 0)])
        assert G.has_edge(0, 2)
        assert not G.has_edge(1, 2)
        assert G.degree(Side.A, 0) == 2
        assert G.degree(Side.B, 1) == 0
        assert G.min_degree == 0
        assert not G.is_balanced

    def test_out_of_range_edge(self):
        with pytest.raises(GraphError):
            build_graph(2, 2, [(0, 2)])

    def test_duplicate_edge(self):
        with pytest.raises(GraphError) as exc:
            build_graph(2, 2, [(0, 1), (0, 1)])
        assert exc.value.details == {'edge': [0, 1]}

    def test_negative_side(self):
        with pytest.raises(GraphError):
            build_graph(-1, 2)

    def test_adjacency_matches_edges(self):
        G = build_graph(3, 3, [(0, 0), (2, 1)])
        assert G.adjacency.sum() == 2
        assert G.adjacency[2, 1]
        assert not G.adjacency[1, 2]

    def test_relabel(self):
        G = build_graph(2, 2, [(0, 1)])
        H = relabel_graph(G, [1, 0], [1, 0])
        assert H.edges == frozenset({(1, 0)})

    def test_density_is_exact(self):
        G = build_graph(3, 3, [(0, 0), (0, 1), (1, 1)])
        assert density(G, [0, 1, 2], [0, 1, 2]) == Fraction(3, 9)
        assert density(G, [0], [0, 1]) == 1
        assert isinstance(density(G, [0], [2]), Fraction)

    def test_density_needs_nonempty_sets(self):
        G = build_graph(2, 2, complete=True)
        with pytest.raises(GraphError):
            density(G, [], [0])


class TestRootedTree:
    def test_classes_and_degrees(self, small_tree):
        assert small_tree.vertex_count == 8
        assert small_tree.edge_count == 7
        assert small_tree.even_class == frozenset({0, 3, 4, 5})
        assert small_tree.odd_class == frozenset({1, 2, 6, 7})
        assert small_tree.balanced
        assert small_tree.degrees == (2, 3, 2, 2, 1, 2, 1, 1)
        assert small_tree.max_degree == 3
        assert small_tree.side_of(6) is Side.B

    def test_order_and_subtrees(self, small_tree):
        assert small_tree.order == (0, 1, 2, 3, 4, 5, 7, 6)
        assert small_tree.subtree_sizes()[1] == 4
        assert small_tree.subtree_sizes()[0] == 8

    def test_single_vertex(self):
        T = build_rooted_tree([-1], 0)
        assert T.edge_count == 0
        assert T.class_sizes() == (1, 0)

    @pytest.mark.parametrize("parent, root, kind", [
        ([], 0, 'empty'),
        ([-1, 0], 3, 'root'),
        ([1, -1], 0, 'root'),
        ([-1, -1, 0], 0, 'multiple_roots'),
        ([-1, 5], 0, 'out_of_range'),
        ([-1, 1], 0, 'cycle'),
        ([-1, 2, 3, 1], 0, 'cycle'),
    ])
    def test_invalid_parent_arrays(self, parent, root, kind):
        with pytest.raises(TreeStructureError) as exc:
            build_rooted_tree(parent, root)
        assert exc.value.kind == kind

    def test_cycle_witness(self):
        with pytest.raises(TreeStructureError) as exc:
            build_rooted_tree([-1, 2, 3, 1], 0)
        assert sorted(exc.value.details['cycle']) == [1, 2, 3]

    def test_tree_from_edges(self):
        T = tree_from_edges(4, [(2, 1), (0, 1), (3, 2)], root=0)
        assert T.parent == (-1, 0, 1, 2)

    def test_tree_from_edges_disconnected(self):
        with pytest.raises(TreeStructureError) as exc:
            tree_from_edges(4, [(0, 1), (2, 3)])
        assert exc.value.kind == 'disconnected'


class TestForests:
    def test_induced_forest_keeps_classes(self, small_tree):
        F = induced_forest(small_tree, [2, 3, 4, 5, 6, 7])
        # components rooted at 2, 3, 4 in index order
        assert len(F.components) == 3
        assert F.origin == (2, 5, 6, 3, 7, 4)
        for v in range(F.vertex_count):
            assert F.side_of(v) is small_tree.side_of(F.origin[v])
        assert F.flips == (True, False, False)

    def test_forest_edges_use_global_numbering(self):
        F = forest_from_trees([build_rooted_tree([-1, 0], 0), build_rooted_tree([-1, 0, 0], 0)])
        assert F.offsets == (0, 2)
        assert F.edges == ((0, 1), (2, 3), (2, 4))
        assert F.class_sizes() == (2, 3)
        assert not F.balanced

    def test_flip_count_must_match(self):
        with pytest.raises(TreeStructureError):
            BalancedForest((build_rooted_tree([-1], 0),), (True, False))


class TestVerification:
    def test_valid_embedding(self, k33):
        T = build_rooted_tree([-1, 0, 1], 0)
        mapping = {0: (Side.A, 0), 1: (Side.B, 2), 2: (Side.A, 1)}
        assert verify_embedding(k33, T, mapping) == Ok()

    @pytest.mark.parametrize("mapping, kind", [
        ({0: (Side.A, 0), 1: (Side.B, 2)}, 'unmapped'),
        ({0: (Side.A, 0), 1: (Side.B, 2), 2: (Side.A, 1), 5: (Side.A, 2)}, 'out_of_range'),
        ({0: (Side.A, 0), 1: (Side.B, 9), 2: (Side.A, 1)}, 'out_of_range'),
        ({0: (Side.B, 0), 1: (Side.B, 2), 2: (Side.A, 1)}, 'side'),
        ({0: (Side.A, 0), 1: (Side.B, 2), 2: (Side.A, 0)}, 'injectivity'),
    ])
    def test_violations(self, k33, mapping, kind):
        T = build_rooted_tree([-1, 0, 1], 0)
        result = verify_embedding(k33, T, mapping)
        assert isinstance(result, Violation)
        assert not result
        assert result.kind == kind

    def test_missing_edge(self):
        G = build_graph(2, 2, [(0, 0)])
        T = build_rooted_tree([-1, 0, 1], 0)
        result = verify_embedding(G, T, {0: (Side.A, 0), 1: (Side.B, 0), 2: (Side.A, 1)})
        assert result.kind == 'missing_edge'
        assert result.witness == ((1, 2), (1, 0))

    def test_packing_edge_reuse(self, k33):
        T = build_rooted_tree([-1, 0], 0)
        first = Embedding('P1', T, {0: (Side.A, 0), 1: (Side.B, 0)})
        second = Embedding('P2', T, {0: (Side.A, 0), 1: (Side.B, 0)})
        third = Embedding('P3', T, {0: (Side.A, 0), 1: (Side.B, 1)})
        assert verify_packing(k33, [first, third])
        result = verify_packing(k33, Packing((first, third, second)))
        assert result.kind == 'edge_reuse'
        assert result.witness == ((0, 0), 0, 2)

    @pytest.mark.parametrize("entry, kind", [
        (('C', 0), 'side'),
        ('A0', 'out_of_range'),
        (None, 'out_of_range'),
        ((Side.A,), 'out_of_range'),
        ((Side.A, 0, 0), 'out_of_range'),
        ((Side.A, 0.5), 'out_of_range'),
        ((Side.A, '0'), 'out_of_range'),
        ((Side.A, True), 'out_of_range'),
        ((Side.A, -1), 'out_of_range'),
    ])
    def test_malformed_entries_are_violations(self, k33, entry, kind):
        T = build_rooted_tree([-1, 0, 1], 0)
        result = verify_embedding(k33, T, {0: entry, 1: (Side.B, 2), 2: (Side.A, 1)})
        assert not result
        assert result.kind == kind
        assert result.witness[0] == 0

    def test_map_that_is_not_a_mapping(self, k33):
        T = build_rooted_tree([-1, 0], 0)
        result = verify_embedding(k33, T, [(Side.A, 0), (Side.B, 0)])
        assert result.kind == 'unmapped'

    def test_string_keys_do_not_count(self, k33):
        T = build_rooted_tree([-1, 0], 0)
        result = verify_embedding(k33, T, {'0': (Side.A, 0), 1: (Side.B, 0)})
        assert result.kind == 'unmapped'

    def test_plain_string_sides(self, k33):
        T = build_rooted_tree([-1, 0, 1], 0)
        assert verify_embedding(k33, T, {0: ('A', 0), 1: ('B', 2), 2: ('A', 1)}) == Ok()

    def test_edge_reuse_with_plain_string_sides(self, k33):
        T = build_rooted_tree([-1, 0], 0)
        first = Embedding('P1', T, {0: ('A', 0), 1: ('B', 0)})
        second = Embedding('P2', T, {0: (Side.A, 0), 1: (Side.B, 0)})
        result = verify_packing(k33, Packing((first, second)))
        assert result.kind == 'edge_reuse'
        assert result.witness == ((0, 0), 0, 1)

    def test_remove_embedding_edges(self, k33):
        T = build_rooted_tree([-1, 0, 1], 0)
        e = Embedding('T', T, {0: (Side.A, 0), 1: (Side.B, 1), 2: (Side.A, 2)})
        H = remove_embedding_edges(k33, e)
        assert H.edge_count == 7
        assert not H.has_edge(0, 1) and not H.has_edge(2, 1)
        with pytest.raises(EmbeddingEdgeMissing):
            remove_embedding_edges(H, e)


def exact_decompositions():
    """Packings that use every host edge exactly once"""
    cases = [(build_graph(2 * n - 1, n, complete=True), double_star_decomposition(n)) for n in (2, 3, 4, 5)]
    for sides, guest, copies in (((2, 2), path_tree(3), 2), ((3, 3), path_tree(4), 3)):
        G = build_graph(*sides, complete=True)
        report = brute_force_pack(G, [guest] * copies)
        assert report.status is SearchStatus.FOUND
        cases.append((G, report.packing))
    return cases


def corrupt(rng, G, packing):
    """One random defect: a moved, flipped, stray, malformed or missing image, or a repeated embedding"""
    embeddings = list(packing)
    i = int(rng.integers(len(embeddings)))
    e = embeddings[i]
    move = int(rng.integers(7))
    if move == 0:
        embeddings.insert(int(rng.integers(len(embeddings) + 1)), e)
        return Packing(tuple(embeddings))

    vertex_map = dict(e.vertex_map)
    v = int(rng.integers(e.guest.vertex_count))
    side, index = vertex_map[v]
    if move == 1:
        vertex_map[v] = (side, int(rng.choice([j for j in range(G.size(side)) if j != index])))
    elif move == 2:
        vertex_map[v] = (Side.B if side is Side.A else Side.A, index)
    elif move == 3:
        vertex_map[v] = (side, G.size(side) + int(rng.integers(3)) if rng.random() < 0.5 else -1)
    elif move == 4:
        malformed = [f"{side.value}{index}", ('C', index), None, (side,), (side, index + 0.5), (side, str(index))]
        vertex_map[v] = malformed[int(rng.integers(len(malformed)))]
    elif move == 5:
        del vertex_map[v]
    else:
        vertex_map[e.guest.vertex_count] = (side, index)
    embeddings[i] = Embedding(e.guest_id, e.guest, vertex_map)
    return Packing(tuple(embeddings))


class TestVerifierRejectsCorruption:
    @staticmethod
    def run(rounds, seed):
        rng = np.random.default_rng(seed)
        cases = exact_decompositions()
        for G, packing in cases:
            assert verify_packing(G, packing)
        for _ in range(rounds):
            G, packing = cases[int(rng.integers(len(cases)))]
            damaged = corrupt(rng, G, packing)
            result = verify_packing(G, damaged)
            assert not result, damaged
            assert result.kind in ('unmapped', 'out_of_range', 'side', 'injectivity',
                                   'missing_edge', 'edge_reuse')

    def test_corrupted_packings(self):
        self.run(300, seed=0)

    @pytest.mark.slow
    def test_corrupted_packings_long_run(self):
        self.run(10_000, seed=1)
