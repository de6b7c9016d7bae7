from fractions import Fraction

import numpy as np
import pytest

from src.errors import PartitionError
from src.generators import gen_graph
from src.graph_core import Ok, Side, build_graph
from src.oracle import is_regular_exhaustive
from src.regularity import (ClusterMatching, Deficit, HallViolator, ReducedGraph,
                            check_reduced_min_degree, cluster_matching, equitable_partition,
                            partition_to_dict, reduced_graph, regularity_witness, typical_to,
                            typicality_profile, verify_witness)


def matching_removed(n):
    """K_{n,n} minus a perfect matching"""
    return build_graph(n, n, [(a, b) for a in range(n) for b in range(n) if a != b])


class TestPartition:
    def test_equitable_split(self):
        G = build_graph(10, 10, complete=True)
        P = equitable_partition(G, 3, Fraction(1, 10), rng_seed=4)
        assert P.s == 3
        assert P.cluster_size == 3
        assert len(P.exceptional_x) == 1 and len(P.exceptional_y) == 1
        covered = sorted(v for c in P.clusters_x for v in c) + list(P.exceptional_x)
        assert sorted(covered) == list(range(10))

    def test_seed_reproducible(self):
        G = build_graph(12, 12, complete=True)
        assert equitable_partition(G, 4, 0.1, 9) == equitable_partition(G, 4, 0.1, 9)

    def test_remainder_above_eps_bound(self):
        G = build_graph(10, 10, complete=True)
        with pytest.raises(PartitionError):
            equitable_partition(G, 4, Fraction(1, 20), rng_seed=0)

    def test_too_many_clusters(self):
        G = build_graph(3, 3, complete=True)
        with pytest.raises(PartitionError):
            equitable_partition(G, 4, 0.5, rng_seed=0)


class TestWitness:
    def test_half_split_witness(self, half_split_graph):
        X = Y = list(range(6))
        witness = regularity_witness(half_split_graph, X, Y, Fraction(3, 10))
        assert witness is not None
        assert witness.pair_density == Fraction(1, 2)
        assert witness.deviation == Fraction(1, 2)
        assert verify_witness(half_split_graph, X, Y, witness, Fraction(3, 10))

    def test_complete_pair_has_no_witness(self):
        G = build_graph(6, 6, complete=True)
        assert regularity_witness(G, range(6), range(6), 0.1, budget=50) is None

    def test_verify_rejects_insignificant_subsets(self, half_split_graph):
        witness = regularity_witness(half_split_graph, range(6), range(6), Fraction(3, 10))
        assert not verify_witness(half_split_graph, range(6), range(6), witness, Fraction(9, 10))

    @pytest.mark.parametrize("seed", range(5))
    def test_witnesses_are_genuine(self, seed):
        G = gen_graph(10, 10, 0.5, seed)
        witness = regularity_witness(G, range(10), range(10), Fraction(1, 5), budget=100, rng_seed=seed)
        if witness is not None:
            assert verify_witness(G, range(10), range(10), witness, Fraction(1, 5))
            assert not is_regular_exhaustive(G, range(10), range(10), Fraction(1, 5))

    @pytest.mark.parametrize("seed", range(4))
    def test_search_finds_every_exhaustive_witness_on_half_splits(self, seed):
        # a random relabelling of the half split keeps the violation
        rng = np.random.default_rng(seed)
        perm_a = rng.permutation(6).tolist()
        perm_b = rng.permutation(6).tolist()
        edges = [(perm_a[a], perm_b[b]) for a in range(6) for b in range(6) if (a < 3) == (b < 3)]
        G = build_graph(6, 6, edges)
        assert not is_regular_exhaustive(G, range(6), range(6), Fraction(3, 10))
        assert regularity_witness(G, range(6), range(6), Fraction(3, 10)) is not None


class TestReducedGraph:
    def test_complete_host(self):
        G = build_graph(8, 8, complete=True)
        P = equitable_partition(G, 2, 0.1, 0)
        R = reduced_graph(G, P, 0.1, 0.2)
        assert R.edge_count == 4
        assert R.witnesses == {}
        assert check_reduced_min_degree(R, Fraction(4, 5), 0.2, 0.1) == Ok()
        matching = cluster_matching(R)
        assert isinstance(matching, ClusterMatching)
        assert sorted(matching.perm) == [0, 1]

    def test_witness_pairs_are_dropped(self, half_split_graph):
        P = equitable_partition(half_split_graph, 1, 0.1, 0)
        R = reduced_graph(half_split_graph, P, Fraction(3, 10), Fraction(1, 5))
        assert R.edge_count == 0
        assert (0, 0) in R.witnesses

        plain = reduced_graph(half_split_graph, P, Fraction(3, 10), Fraction(1, 5), test_regularity=False)
        assert plain.edge_count == 1
        assert not plain.tested

    def test_density_threshold_is_strict(self):
        G = build_graph(2, 2, [(0, 0), (1, 1)])
        P = equitable_partition(G, 1, 0.1, 0)
        R = reduced_graph(G, P, 0.1, Fraction(1, 2), test_regularity=False)
        assert R.densities[0][0] == Fraction(1, 2)
        assert R.edge_count == 0

    def test_hall_violator(self):
        adjacency = np.array([[True, False], [True, False]])
        R = ReducedGraph(2, adjacency, ((Fraction(1), Fraction(0)), (Fraction(1), Fraction(0))))
        result = cluster_matching(R)
        assert isinstance(result, HallViolator)
        assert not result
        assert result.clusters == (0, 1)
        assert result.neighbourhood == (0,)

    def test_degree_deficit(self):
        adjacency = np.array([[True, False], [True, False]])
        R = ReducedGraph(2, adjacency, ((Fraction(1), Fraction(0)), (Fraction(1), Fraction(0))))
        result = check_reduced_min_degree(R, 1, 0, 0)
        assert isinstance(result, Deficit)
        assert result.cluster == ('X', 0)
        assert result.degree == 1
        assert result.required == 2

    def test_relabel_moves_witnesses(self, half_split_graph):
        P = equitable_partition(half_split_graph, 1, 0.1, 0)
        R = reduced_graph(half_split_graph, P, Fraction(3, 10), Fraction(1, 5))
        assert R.relabel([0]).witnesses.keys() == {(0, 0)}

    def test_partition_document(self):
        G = build_graph(8, 8, complete=True)
        P = equitable_partition(G, 2, 0.1, 0)
        R = reduced_graph(G, P, 0.1, 0.2)
        body = partition_to_dict(P, R, cluster_matching(R))
        assert body['cluster_size'] == 4
        assert len(body['reduced_edges']) == 4
        assert 'matching' in body


class TestTypicality:
    def test_typical_to(self):
        G = build_graph(3, 4, [(0, 0), (0, 1), (0, 2), (1, 0)])
        assert typical_to(G, 0, [0, 1, 2, 3], Fraction(1, 2), Fraction(1, 10))
        assert not typical_to(G, 1, [0, 1, 2, 3], Fraction(1, 2), Fraction(1, 10))
        assert typical_to(G, 0, [0, 1, 2], Fraction(1, 2), 0, side=Side.B)

    def test_empty_target(self):
        G = build_graph(1, 1, complete=True)
        with pytest.raises(PartitionError):
            typical_to(G, 0, [], 1, 0.1)

    def test_profile_counts_targets(self):
        G = build_graph(2, 4, [(0, 0), (0, 1)])
        assert typicality_profile(G, 0, [[0, 1], [2, 3]], [Fraction(1, 2), Fraction(1, 2)], 0) == 1

    @pytest.mark.parametrize("host", ['matching_removed', 'random'])
    @pytest.mark.parametrize("seed", range(3))
    def test_few_atypical_vertices_in_regular_pairs(self, host, seed):
        """In an eps-regular pair fewer than eps|X| vertices fall below (d - eps)|Y'| for any large Y'"""
        n, eps = 12, Fraction(3, 10)
        G = matching_removed(n) if host == 'matching_removed' else gen_graph(n, n, 0.9, seed)
        X, Y = list(range(n)), list(range(n))
        if not is_regular_exhaustive(G, X, Y, eps):
            pytest.skip("sampled pair is not regular")
        base = Fraction(G.edge_count, n * n)
        rng = np.random.default_rng(seed)
        for size in (4, 8, 12):
            target = sorted(rng.choice(n, size=size, replace=False).tolist())
            atypical = [v for v in X if not typical_to(G, v, target, base, eps)]
            assert len(atypical) < eps * n
