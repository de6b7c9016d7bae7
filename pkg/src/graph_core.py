"""
Graph Core
Immutable host graphs and guest trees/forests, embeddings and the packing verifier
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import (Any, Dict, FrozenSet, Iterable, List, Mapping, Optional,
                    Sequence, Tuple, Union)

import numpy as np

from src.errors import EmbeddingEdgeMissing, GraphError, TreeStructureError

ROOT_SENTINEL = -1

Edge = Tuple[int, int]


class Side(str, Enum):
    """Host side; guest A-class (even depth) always maps to side A"""

    A = 'A'
    B = 'B'

    @property
    def opposite(self) -> 'Side':
        return Side.B if self is Side.A else Side.A


HostVertex = Tuple[Side, int]


# ---------------------------------------------------------------------------
# Host graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteGraph:
    """
    Bipartite host G=(A,B,E) with 0-based indices per side

    Edges are stored canonically as (a, b) pairs; the value never changes
    after construction, so derived views are cached.
    """

    side_a_size: int
    side_b_size: int
    edges: FrozenSet[Edge]

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Boolean matrix of shape (|A|, |B|)"""
        matrix = np.zeros((self.side_a_size, self.side_b_size), dtype=bool)
        if self.edges:
            rows, cols = zip(*self.edges)
            matrix[list(rows), list(cols)] = True
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def _neighbour_lists(self) -> Dict[Side, Tuple[Tuple[int, ...], ...]]:
        adj = self.adjacency
        return {
            Side.A: tuple(tuple(np.flatnonzero(adj[a]).tolist()) for a in range(self.side_a_size)),
            Side.B: tuple(tuple(np.flatnonzero(adj[:, b]).tolist()) for b in range(self.side_b_size)),
        }

    @cached_property
    def degrees_a(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    @cached_property
    def degrees_b(self) -> np.ndarray:
        return self.adjacency.sum(axis=0)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def is_balanced(self) -> bool:
        return self.side_a_size == self.side_b_size

    def size(self, side: Side) -> int:
        return self.side_a_size if side is Side.A else self.side_b_size

    def neighbours(self, side: Side, v: int) -> Tuple[int, ...]:
        """Sorted neighbours (indices on the opposite side) of vertex v"""
        return self._neighbour_lists[side][v]

    def degree(self, side: Side, v: int) -> int:
        return int(self.degrees_a[v] if side is Side.A else self.degrees_b[v])

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self.edges

    @cached_property
    def min_degree(self) -> int:
        degrees = np.concatenate([self.degrees_a, self.degrees_b])
        return int(degrees.min()) if degrees.size else 0


def build_graph(side_a_size: int, side_b_size: int,
                edges: Optional[Iterable[Edge]] = None,
                complete: bool = False) -> BipartiteGraph:
    """
    Build a bipartite host graph

    Args:
        side_a_size: |A|
        side_b_size: |B|
        edges: (a, b) pairs, ignored when complete is set
        complete: produce K_{|A|,|B|}

    Returns:
        BipartiteGraph with exactly the given edges

    Raises:
        GraphError: negative side size, index out of range, or duplicate edge
    """
    if side_a_size < 0 or side_b_size < 0:
        raise GraphError(f"side sizes must be non-negative, got ({side_a_size}, {side_b_size})")

    if complete:
        return BipartiteGraph(side_a_size, side_b_size, frozenset(
            (a, b) for a in range(side_a_size) for b in range(side_b_size)))

    seen = set()
    for raw in edges or ():
        a, b = int(raw[0]), int(raw[1])
        if not (0 <= a < side_a_size and 0 <= b < side_b_size):
            raise GraphError(f"edge ({a}, {b}) out of range for sides ({side_a_size}, {side_b_size})",
                             {'edge': [a, b]})
        if (a, b) in seen:
            raise GraphError(f"duplicate edge ({a}, {b})", {'edge': [a, b]})
        seen.add((a, b))
    return BipartiteGraph(side_a_size, side_b_size, frozenset(seen))


def relabel_graph(G: BipartiteGraph, perm_a: Sequence[int], perm_b: Sequence[int]) -> BipartiteGraph:
    """Apply vertex permutations to both sides (a -> perm_a[a], b -> perm_b[b])"""
    return BipartiteGraph(G.side_a_size, G.side_b_size,
                          frozenset((perm_a[a], perm_b[b]) for a, b in G.edges))


def density(G: BipartiteGraph, S: Iterable[int], T: Iterable[int]) -> Fraction:
    """
    Exact density e(S,T)/(|S||T|) for S ⊆ A and T ⊆ B

    Raises:
        GraphError: if either subset is empty
    """
    rows = sorted(set(S))
    cols = sorted(set(T))
    if not rows or not cols:
        raise GraphError("density needs nonempty subsets on both sides")
    count = int(G.adjacency[np.ix_(rows, cols)].sum())
    return Fraction(count, len(rows) * len(cols))


# ---------------------------------------------------------------------------
# Guest trees and forests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootedTree:
    """
    Rooted tree given by a parent array (parent[root] == -1)

    Even-depth vertices form V_e (the A-class), odd-depth vertices V_o.
    Use build_rooted_tree() to construct a validated instance.
    """

    parent: Tuple[int, ...]
    root: int

    @property
    def vertex_count(self) -> int:
        return len(self.parent)

    @property
    def edge_count(self) -> int:
        return len(self.parent) - 1

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        kids: List[List[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p != ROOT_SENTINEL:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def order(self) -> Tuple[int, ...]:
        """BFS order from the root, children visited by index"""
        seen = [self.root]
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for c in self.children[v]:
                seen.append(c)
                queue.append(c)
        return tuple(seen)

    @cached_property
    def depth(self) -> Tuple[int, ...]:
        depth = [0] * self.vertex_count
        for v in self.order:
            p = self.parent[v]
            if p != ROOT_SENTINEL:
                depth[v] = depth[p] + 1
        return tuple(depth)

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        """(parent, child) pairs"""
        return tuple((p, v) for v, p in enumerate(self.parent) if p != ROOT_SENTINEL)

    @cached_property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(len(self.children[v]) + (0 if v == self.root else 1)
                     for v in range(self.vertex_count))

    @property
    def max_degree(self) -> int:
        return max(self.degrees) if self.vertex_count else 0

    @cached_property
    def even_class(self) -> FrozenSet[int]:
        return frozenset(v for v, d in enumerate(self.depth) if d % 2 == 0)

    @cached_property
    def odd_class(self) -> FrozenSet[int]:
        return frozenset(v for v, d in enumerate(self.depth) if d % 2 == 1)

    @property
    def balanced(self) -> bool:
        return len(self.even_class) == len(self.odd_class)

    def side_of(self, v: int) -> Side:
        return Side.A if self.depth[v] % 2 == 0 else Side.B

    def class_sizes(self) -> Tuple[int, int]:
        return len(self.even_class), len(self.odd_class)

    def subtree_sizes(self) -> Tuple[int, ...]:
        sizes = [1] * self.vertex_count
        for v in reversed(self.order):
            p = self.parent[v]
            if p != ROOT_SENTINEL:
                sizes[p] += sizes[v]
        return tuple(sizes)


def build_rooted_tree(parent_array: Sequence[int], root: int) -> RootedTree:
    """
    Validate a parent array and build the rooted tree

    Args:
        parent_array: parent[v] for each vertex, -1 at the root
        root: root index

    Returns:
        RootedTree with depths and parity classes derived

    Raises:
        TreeStructureError: kind is one of 'empty', 'root', 'multiple_roots',
            'out_of_range', 'cycle'
    """
    parent = tuple(int(p) for p in parent_array)
    n = len(parent)
    if n == 0:
        raise TreeStructureError('empty', "a tree needs at least one vertex")
    if not 0 <= root < n:
        raise TreeStructureError('root', f"root {root} out of range for {n} vertices")
    if parent[root] != ROOT_SENTINEL:
        raise TreeStructureError('root', f"parent[{root}] must be {ROOT_SENTINEL} at the root")

    extra_roots = [v for v, p in enumerate(parent) if p == ROOT_SENTINEL and v != root]
    if extra_roots:
        raise TreeStructureError('multiple_roots', f"vertices {extra_roots} also have no parent",
                                 {'roots': [root] + extra_roots})
    for v, p in enumerate(parent):
        if p != ROOT_SENTINEL and not 0 <= p < n:
            raise TreeStructureError('out_of_range', f"parent[{v}] = {p} out of range",
                                     {'vertex': v})
        if p == v:
            raise TreeStructureError('cycle', f"vertex {v} is its own parent", {'cycle': [v]})

    tree = RootedTree(parent, root)
    if len(tree.order) != n:
        reached = set(tree.order)
        start = min(v for v in range(n) if v not in reached)
        # walk parent pointers until a vertex repeats
        walk, pos = [], {}
        v = start
        while v not in pos:
            pos[v] = len(walk)
            walk.append(v)
            v = parent[v]
        raise TreeStructureError('cycle', f"parent pointers from {start} never reach the root",
                                 {'cycle': walk[pos[v]:]})
    return tree


def tree_from_edges(vertex_count: int, edges: Iterable[Edge], root: int = 0) -> RootedTree:
    """
    Root an undirected edge list at `root`

    Raises:
        TreeStructureError: wrong edge count, or edges that do not span
    """
    adjacency: List[List[int]] = [[] for _ in range(vertex_count)]
    count = 0
    for u, v in edges:
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise TreeStructureError('out_of_range', f"edge ({u}, {v}) out of range")
        adjacency[u].append(v)
        adjacency[v].append(u)
        count += 1
    if vertex_count == 0:
        raise TreeStructureError('empty', "a tree needs at least one vertex")
    if count != vertex_count - 1:
        raise TreeStructureError('cycle' if count >= vertex_count else 'disconnected',
                                 f"{vertex_count} vertices need {vertex_count - 1} edges, got {count}")
    parent = [None] * vertex_count
    parent[root] = ROOT_SENTINEL
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in sorted(adjacency[u]):
            if parent[w] is None:
                parent[w] = u
                queue.append(w)
    if any(p is None for p in parent):
        raise TreeStructureError('disconnected', "edges do not connect every vertex")
    return build_rooted_tree(parent, root)


@dataclass(frozen=True)
class BalancedForest:
    """
    Vertex-disjoint rooted trees with one global 2-colouring

    Vertices are numbered globally, component by component. flips[i] set
    means component i's even-depth class belongs to B_F instead of A_F.
    origin optionally records, per global vertex, the vertex it came from
    in a larger tree.
    """

    components: Tuple[RootedTree, ...]
    flips: Tuple[bool, ...] = ()
    origin: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if not self.flips:
            object.__setattr__(self, 'flips', tuple(False for _ in self.components))
        if len(self.flips) != len(self.components):
            raise TreeStructureError('forest', "one flip flag per component required")
        if self.origin is not None and len(self.origin) != sum(c.vertex_count for c in self.components):
            raise TreeStructureError('forest', "origin must label every forest vertex")

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        out, total = [], 0
        for comp in self.components:
            out.append(total)
            total += comp.vertex_count
        return tuple(out)

    @property
    def vertex_count(self) -> int:
        return sum(c.vertex_count for c in self.components)

    @property
    def edge_count(self) -> int:
        return sum(c.edge_count for c in self.components)

    @cached_property
    def _locate(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((i, local) for i, comp in enumerate(self.components)
                     for local in range(comp.vertex_count))

    def locate(self, v: int) -> Tuple[int, int]:
        """(component index, local index) of global vertex v"""
        return self._locate[v]

    def side_of(self, v: int) -> Side:
        i, local = self._locate[v]
        side = self.components[i].side_of(local)
        return side.opposite if self.flips[i] else side

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple((off + p, off + c) for comp, off in zip(self.components, self.offsets)
                     for p, c in comp.edges)

    @cached_property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(d for comp in self.components for d in comp.degrees)

    @property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    def class_sizes(self) -> Tuple[int, int]:
        a = sum(1 for v in range(self.vertex_count) if self.side_of(v) is Side.A)
        return a, self.vertex_count - a

    @property
    def balanced(self) -> bool:
        a, b = self.class_sizes()
        return a == b


Guest = Union[RootedTree, BalancedForest]


def induced_forest(T: RootedTree, keep: Iterable[int]) -> BalancedForest:
    """
    Restrict T to the vertex set `keep`

    Each component is rooted at its vertex closest to r(T) and keeps its
    class labels from T. Components are ordered by that root's index.
    """
    keep_set = set(keep)
    comp_roots = sorted(v for v in keep_set
                        if T.parent[v] == ROOT_SENTINEL or T.parent[v] not in keep_set)
    components, flips, origin = [], [], []
    for r in comp_roots:
        local = {r: 0}
        order = [r]
        parents = [ROOT_SENTINEL]
        queue = deque([r])
        while queue:
            u = queue.popleft()
            for c in T.children[u]:
                if c in keep_set:
                    local[c] = len(order)
                    order.append(c)
                    parents.append(local[u])
                    queue.append(c)
        components.append(RootedTree(tuple(parents), 0))
        flips.append(T.side_of(r) is Side.B)
        origin.extend(order)
    return BalancedForest(tuple(components), tuple(flips), tuple(origin))


def forest_from_trees(trees: Sequence[RootedTree]) -> BalancedForest:
    """Disjoint union with every tree keeping its root class in A_F"""
    return BalancedForest(tuple(trees), tuple(False for _ in trees))


# ---------------------------------------------------------------------------
# Embeddings, packings and verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Embedding:
    """Vertex map of one guest into a host: guest vertex -> (side, host index)"""

    guest_id: str
    guest: Guest
    vertex_map: Mapping[int, HostVertex]
    meta: Dict[str, Any] = field(default_factory=dict, compare=False)

    def image(self, v: int) -> HostVertex:
        return self.vertex_map[v]

    def host_edges(self) -> List[Edge]:
        """Host edges used by the guest, one per guest edge, as (a, b)"""
        return host_edges_of(self.guest, self.vertex_map)


@dataclass(frozen=True)
class Packing:
    """Embeddings sharing one host"""

    embeddings: Tuple[Embedding, ...] = ()

    def __len__(self) -> int:
        return len(self.embeddings)

    def __iter__(self):
        return iter(self.embeddings)

    def edge_total(self) -> int:
        return sum(e.guest.edge_count for e in self.embeddings)


def host_edges_of(guest: Guest, vertex_map: Mapping[int, HostVertex]) -> List[Edge]:
    out = []
    for u, v in guest.edges:
        su, iu = vertex_map[u]
        _, iv = vertex_map[v]
        out.append((iu, iv) if su is Side.A else (iv, iu))
    return out


@dataclass(frozen=True)
class Ok:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Violation:
    """Verifier failure: kind names the broken property, witness the culprit"""

    kind: str
    witness: Tuple[Any, ...]
    message: str = ''

    def __bool__(self) -> bool:
        return False


VerifyResult = Union[Ok, Violation]


def remove_embedding_edges(G: BipartiteGraph, e: Embedding) -> BipartiteGraph:
    """
    Return G minus the host edges used by embedding e

    Raises:
        EmbeddingEdgeMissing: a mapped guest edge is not in G
    """
    used = e.host_edges()
    seen = set()
    for edge in used:
        if edge not in G.edges or edge in seen:
            raise EmbeddingEdgeMissing(f"host edge {edge} of {e.guest_id} is not available",
                                       {'edge': list(edge), 'guest_id': e.guest_id})
        seen.add(edge)
    return BipartiteGraph(G.side_a_size, G.side_b_size, G.edges - seen)


def _is_index(x: Any) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _normalize_map(G: BipartiteGraph, guest: Guest,
                   mapping: Any) -> Union[Dict[int, HostVertex], Violation]:
    """Decode map entries into (Side, int) pairs, or the first Violation"""
    if not isinstance(mapping, Mapping):
        return Violation('unmapped', (0,), f"vertex map is a {type(mapping).__name__}, not a mapping")
    n = guest.vertex_count

    for v in range(n):
        if v not in mapping:
            return Violation('unmapped', (v,), f"guest vertex {v} has no image")
    for v in mapping:
        if not (_is_index(v) and 0 <= v < n):
            return Violation('out_of_range', (v,), f"map key {v!r} is not a guest vertex")

    images: Dict[int, HostVertex] = {}
    for v in range(n):
        entry = mapping[v]
        if isinstance(entry, (str, bytes)) or not isinstance(entry, (tuple, list)) or len(entry) != 2:
            return Violation('out_of_range', (v,), f"guest vertex {v} has malformed image {entry!r}")
        raw_side, index = entry
        try:
            side = Side(raw_side)
        except ValueError:
            return Violation('side', (v,), f"guest vertex {v} mapped to unknown side {raw_side!r}")
        if not _is_index(index) or not 0 <= index < G.size(side):
            return Violation('out_of_range', (v, side.value, index),
                             f"guest vertex {v} mapped outside side {side.value}")
        images[v] = (side, int(index))
    return images


def verify_embedding(G: BipartiteGraph, guest: Guest,
                     vertex_map: Union[Embedding, Mapping[int, HostVertex]]) -> VerifyResult:
    """
    Check that vertex_map is an embedding of guest into G

    Returns Ok, or the first Violation found in the order: unmapped vertex,
    stray key, malformed or out-of-range image, class on the wrong side,
    shared image, missing host edge. Never raises on a malformed map.
    """
    mapping = vertex_map.vertex_map if isinstance(vertex_map, Embedding) else vertex_map
    images = _normalize_map(G, guest, mapping)
    if isinstance(images, Violation):
        return images

    owner: Dict[HostVertex, int] = {}
    for v, (side, index) in images.items():
        if side is not guest.side_of(v):
            return Violation('side', (v, side.value, index),
                             f"guest vertex {v} belongs on side {guest.side_of(v).value}")
        if (side, index) in owner:
            return Violation('injectivity', (owner[(side, index)], v, side.value, index),
                             f"guest vertices {owner[(side, index)]} and {v} share host vertex {side.value}{index}")
        owner[(side, index)] = v

    for (u, v), (a, b) in zip(guest.edges, host_edges_of(guest, images)):
        if (a, b) not in G.edges:
            return Violation('missing_edge', ((u, v), (a, b)),
                             f"guest edge ({u}, {v}) lands on non-edge ({a}, {b})")
    return Ok()


def verify_packing(G: BipartiteGraph, packing: Union[Packing, Sequence[Embedding]]) -> VerifyResult:
    """
    Check every embedding and global edge-disjointness

    The witness of an edge reuse is (edge, first embedding index, second
    embedding index).
    """
    used: Dict[Edge, int] = {}
    for i, emb in enumerate(packing):
        result = verify_embedding(G, emb.guest, emb.vertex_map)
        if not result:
            return Violation(result.kind, (i,) + tuple(result.witness),
                             f"embedding {i} ({emb.guest_id}): {result.message}")
        for edge in host_edges_of(emb.guest, _normalize_map(G, emb.guest, emb.vertex_map)):
            if edge in used:
                return Violation('edge_reuse', (edge, used[edge], i),
                                 f"host edge {edge} used by embeddings {used[edge]} and {i}")
            used[edge] = i
    return Ok()
