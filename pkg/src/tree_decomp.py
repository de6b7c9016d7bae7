"""
Tree decomposition
Splits a rooted tree into a few seeds and small pieces hanging off them
"""

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, List, Tuple

import networkx as nx

from src.errors import DecompositionError
from src.graph_core import ROOT_SENTINEL, RootedTree
from src.logger import setup_logger
from src.utils import Number, as_fraction, floor_frac

logger = setup_logger(__name__)


@dataclass(frozen=True)
class Piece:
    """Component of T - S with r(P) its vertex closest to the root of T"""

    vertices: Tuple[int, ...]
    root: int

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class BetaDecomposition:
    seeds: FrozenSet[int]
    pieces: Tuple[Piece, ...]
    linking: FrozenSet[int]
    beta: Fraction
    t: int
    root: int
    degenerate: bool = False

    @cached_property
    def piece_index(self) -> Dict[int, int]:
        """vertex -> index of the piece containing it"""
        return {v: i for i, piece in enumerate(self.pieces) for v in piece.vertices}

    def to_dict(self) -> dict:
        return {
            'beta': str(self.beta),
            't': self.t,
            'seeds': sorted(self.seeds),
            'linking': sorted(self.linking),
            'pieces': [{'root': p.root, 'vertices': list(p.vertices)} for p in self.pieces],
            'degenerate': self.degenerate,
        }


def _pieces_below(T: RootedTree, seeds: FrozenSet[int]) -> Tuple[Piece, ...]:
    members: Dict[int, List[int]] = {}
    owner: Dict[int, int] = {}
    for v in T.order:
        if v in seeds:
            continue
        p = T.parent[v]
        top = v if p in seeds else owner[p]
        owner[v] = top
        members.setdefault(top, []).append(v)
    return tuple(Piece(tuple(sorted(vs)), top) for top, vs in members.items())


def decomposition_problems(T: RootedTree, dec: BetaDecomposition) -> List[str]:
    """
    Every broken decomposition property, empty when all hold

    Pieces are compared against the connected components of T - S computed
    independently with networkx.
    """
    problems = []
    if T.root not in dec.seeds:
        problems.append("root is not a seed")
    if not dec.degenerate and len(dec.seeds) >= 1 / dec.beta + 2:
        problems.append(f"{len(dec.seeds)} seeds, bound is < {float(1 / dec.beta + 2):g}")

    forest = nx.Graph()
    forest.add_nodes_from(v for v in range(T.vertex_count) if v not in dec.seeds)
    forest.add_edges_from((p, c) for p, c in T.edges if p not in dec.seeds and c not in dec.seeds)
    components = {frozenset(c) for c in nx.connected_components(forest)}
    if components != {frozenset(p.vertices) for p in dec.pieces}:
        problems.append("pieces differ from the components of T - S")

    for piece in dec.pieces:
        members = set(piece.vertices)
        if len(piece) > dec.beta * dec.t:
            problems.append(f"piece rooted at {piece.root} has {len(piece)} > beta*t vertices")
        if piece.root not in members:
            problems.append(f"piece root {piece.root} lies outside its piece")
        elif T.parent[piece.root] not in dec.seeds:
            problems.append(f"parent of linking vertex {piece.root} is not a seed")
        for v in piece.vertices:
            if v != piece.root and T.parent[v] not in members:
                problems.append(f"vertex {v} of piece {piece.root} hangs off another part")
                break
    if dec.linking != frozenset(p.root for p in dec.pieces) - {T.root}:
        problems.append("linking set differs from the piece roots")
    return problems


def beta_decompose(T: RootedTree, beta: Number) -> BetaDecomposition:
    """
    Seeds S and pieces (components of T - S) of size <= beta*t

    Heavy vertices are cut bottom-up: the deepest vertex whose remaining
    subtree exceeds beta*t becomes a seed and its subtree is detached, ties
    going to the smaller index. The root is added last. Every detachment
    removes more than beta*t vertices, so at most floor(1/beta) seeds
    precede the root.

    Args:
        T: rooted tree with t edges
        beta: piece size fraction in (0, 1), with t > 1/beta

    Returns:
        BetaDecomposition, checked before it is returned

    Raises:
        DecompositionError: beta out of range, tree too small, or a failed check
    """
    beta_q = as_fraction(beta)
    if not 0 < beta_q < 1:
        raise DecompositionError(f"beta must lie in (0, 1), got {beta}")
    t = T.edge_count
    if t * beta_q <= 1:
        raise DecompositionError(f"tree with t={t} edges is too small for beta={beta} (need t > 1/beta)",
                                 {'t': t, 'beta': str(beta_q)})

    limit = beta_q * t
    remaining = [1] * T.vertex_count
    seeds = set()
    for v in sorted(range(T.vertex_count), key=lambda u: (-T.depth[u], u)):
        size = 1 + sum(remaining[c] for c in T.children[v])
        if size > limit:
            seeds.add(v)
            size = 0
        remaining[v] = size
    seeds.add(T.root)

    seeds = frozenset(seeds)
    pieces = _pieces_below(T, seeds)
    dec = BetaDecomposition(seeds, pieces, frozenset(p.root for p in pieces) - {T.root},
                            beta_q, t, T.root)
    problems = decomposition_problems(T, dec)
    if problems:
        raise DecompositionError("; ".join(problems), {'problems': problems})
    logger.debug(f"Decomposed tree (t={t}, beta={beta}): {len(seeds)} seeds, {len(pieces)} pieces")
    return dec


def seed_only_decomposition(T: RootedTree, beta: Number) -> BetaDecomposition:
    """Degenerate decomposition S = V(T) for trees with t <= 1/beta"""
    return BetaDecomposition(frozenset(range(T.vertex_count)), (), frozenset(),
                             as_fraction(beta), T.edge_count, T.root, degenerate=True)


def piece_parity_counts(T: RootedTree, dec: BetaDecomposition) -> List[Tuple[int, int]]:
    """
    (x_P, y_P) per piece: vertices at even and odd depth in T

    Raises:
        DecompositionError: dec was not produced from T
    """
    covered = sum(len(p) for p in dec.pieces) + len(dec.seeds)
    if dec.root != T.root or dec.t != T.edge_count or covered != T.vertex_count:
        raise DecompositionError("decomposition does not belong to this tree")
    counts = []
    for piece in dec.pieces:
        x = sum(1 for v in piece.vertices if T.depth[v] % 2 == 0)
        counts.append((x, len(piece) - x))
    return counts


def seed_bound(beta: Number) -> int:
    """Largest seed count the cutting rule can produce"""
    return floor_frac(1 / as_fraction(beta)) + 1


def contracted_order(T: RootedTree, dec: BetaDecomposition) -> List[Tuple[str, int]]:
    """
    BFS over the seed/piece tree, starting at the seed r(T)

    Elements are ('seed', vertex) or ('piece', piece index); every element
    after the first is adjacent in T to an earlier one.
    """
    def element(v: int) -> Tuple[str, int]:
        return ('seed', v) if v in dec.seeds else ('piece', dec.piece_index[v])

    children: Dict[Tuple[str, int], List[Tuple[str, int]]] = {}
    for v in T.order:
        p = T.parent[v]
        if p == ROOT_SENTINEL:
            continue
        ep, ev = element(p), element(v)
        if ep != ev and ev not in children.get(ep, []):
            children.setdefault(ep, []).append(ev)

    start = element(T.root)
    order, queue = [start], deque([start])
    while queue:
        e = queue.popleft()
        for c in children.get(e, []):
            order.append(c)
            queue.append(c)
    return order
