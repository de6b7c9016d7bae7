"""
Random instance generators
Seeded trees, forests and hosts for the CLI, benchmarks and tests
"""

from typing import Optional, Sequence

import numpy as np

from src.assignment import AssignmentInstance
from src.errors import TreeStructureError
from src.graph_core import (BalancedForest, BipartiteGraph, RootedTree, build_graph,
                            build_rooted_tree, forest_from_trees)
from src.logger import setup_logger

logger = setup_logger(__name__)


def gen_tree(n_per_class: int, max_degree: int, seed: int) -> RootedTree:
    """
    Random balanced tree with n_per_class vertices in each class

    Vertices are added alternately to the odd and even class, each attached
    to a uniformly random earlier vertex of the other class; a draw that
    would exceed max_degree is rejected and redrawn. An eligible vertex
    always exists once max_degree >= 2, since a class whose vertices all had
    degree >= 2 would need more edges than the tree has.

    Args:
        n_per_class: vertices per class (>= 1)
        max_degree: cap on every vertex degree
        seed: numpy generator seed

    Raises:
        TreeStructureError: impossible size/cap combination
    """
    if n_per_class < 1:
        raise TreeStructureError('size', f"n_per_class must be >= 1, got {n_per_class}")
    if max_degree < 1 or (max_degree < 2 and n_per_class > 1):
        raise TreeStructureError('degree_cap', f"max_degree={max_degree} cannot hold a balanced tree "
                                               f"with {n_per_class} vertices per class")

    rng = np.random.default_rng(seed)
    parent = [-1]
    degree = [0]
    by_class = ([0], [])          # even, odd
    rejected = 0
    for i in range(1, 2 * n_per_class):
        cls = i % 2               # 1, 0, 1, 0, ...
        pool = by_class[1 - cls]
        while True:
            p = pool[int(rng.integers(len(pool)))]
            if degree[p] < max_degree:
                break
            rejected += 1
        parent.append(p)
        degree[p] += 1
        degree.append(1)
        by_class[cls].append(i)

    T = build_rooted_tree(parent, 0)
    logger.debug(f"Generated tree: {n_per_class} per class, max degree {T.max_degree} "
                 f"(cap {max_degree}, {rejected} rejected draws, seed {seed})")
    return T


def gen_forest(component_sizes: Sequence[int], max_degree: int, seed: int) -> BalancedForest:
    """Forest of gen_tree components; component i gets its own derived seed"""
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 31, size=len(component_sizes))
    trees = [gen_tree(size, max_degree, int(s)) for size, s in zip(component_sizes, seeds)]
    return forest_from_trees(trees)


def random_component_sizes(total_per_class: int, components: int, seed: int) -> list:
    """Split total_per_class into `components` positive parts"""
    if not 1 <= components <= total_per_class:
        raise ValueError(f"cannot split {total_per_class} into {components} positive parts")
    rng = np.random.default_rng(seed)
    cuts = sorted(rng.choice(np.arange(1, total_per_class), size=components - 1, replace=False).tolist())
    bounds = [0] + cuts + [total_per_class]
    return [bounds[i + 1] - bounds[i] for i in range(components)]


def gen_graph(side_a_size: int, side_b_size: int, p: float, seed: int,
              min_degree: Optional[int] = None) -> BipartiteGraph:
    """
    G(n_A, n_B, p) host; p=1 gives the complete bipartite graph

    When min_degree is given, each deficient vertex is topped up with
    random extra edges until it reaches it.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 1:
        return build_graph(side_a_size, side_b_size, complete=True)
    rng = np.random.default_rng(seed)
    matrix = rng.random((side_a_size, side_b_size)) < p
    if min_degree is not None:
        for a in range(side_a_size):
            missing = np.flatnonzero(~matrix[a])
            short = min_degree - int(matrix[a].sum())
            if short > 0:
                matrix[a, rng.choice(missing, size=min(short, len(missing)), replace=False)] = True
        for b in range(side_b_size):
            missing = np.flatnonzero(~matrix[:, b])
            short = min_degree - int(matrix[:, b].sum())
            if short > 0:
                matrix[rng.choice(missing, size=min(short, len(missing)), replace=False), b] = True
    rows, cols = np.nonzero(matrix)
    return build_graph(side_a_size, side_b_size, zip(rows.tolist(), cols.tolist()))


def gen_assignment_instance(seed: int, m: int = 100, mu: float = 0.05,
                            max_groups: int = 6, max_pairs: Optional[int] = None) -> AssignmentInstance:
    """
    Random instance meeting clauses (a)-(c)

    Pairs come in mirrored couples (x, y), (y, x) so the two sums agree,
    each coordinate is at most mu*m/2, and pairs are drawn until the next
    couple would break the total-demand clause.
    """
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, max_groups + 1))
    half = max(1, int(mu * m) // 2)
    limit = (1 - 10 * mu) * m * s
    want = int(rng.integers(1, 6 * s + 1)) if max_pairs is None else max_pairs
    pairs, total = [], 0
    while len(pairs) + 2 <= want:
        x, y = int(rng.integers(0, half + 1)), int(rng.integers(1, half + 1))
        if total + x + y >= limit:
            break
        pairs.extend([(x, y), (y, x)])
        total += x + y
    return AssignmentInstance(tuple(pairs), m, s, mu)
