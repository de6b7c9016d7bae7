"""
Tree embedder
Regularity-based embedding of balanced rooted trees into dense balanced
bipartite hosts, a greedy engine for desk-scale hosts, and forest joining

The regularity engine runs five steps: partition the host and match the
reduced graph, decompose the tree into seeds and pieces, split clusters into
L-slices (reserved for linking vertices) and P-slices (everything else),
assign pieces to matched cluster pairs, then place vertices seed by seed and
piece by piece.

Two modes are supported. Strict mode enforces the placement discipline
(typical candidates only, linking vertices in L-slices, piece interiors in
their assigned pair) and the seed/link count bound, raising on the first
breach. Desk mode, the default, relaxes each rule only when it cannot be met
and counts every relaxation in the embedding metadata.
"""

import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.assignment import AssignmentInstance, assign_to_groups, partition_pieces
from src.config import Config
from src.errors import (AssignmentFailed, EmbedderError, EmbedderPreconditionError,
                        MatchingFailed, NoLeafPair, PartitionError, PartitionFailed,
                        PlacementExhausted, PreconditionViolated, SeedBoundExceeded,
                        TreeStructureError)
from src.graph_core import (ROOT_SENTINEL, BalancedForest, BipartiteGraph, Edge,
                            Embedding, HostVertex, RootedTree, Side, tree_from_edges,
                            verify_embedding)
from src.logger import setup_logger
from src.regularity import (ClusterMatching, Deficit, ReducedGraph, RegularPartition,
                            check_reduced_min_degree, cluster_matching, equitable_partition,
                            reduced_graph, regularity_witness, typical_to)
from src.tree_decomp import (BetaDecomposition, beta_decompose, contracted_order,
                             piece_parity_counts, seed_only_decomposition)
from src.utils import Number, as_fraction, check, floor_frac, sqrt_frac, warning

logger = setup_logger(__name__)

ENGINES = ('regularity', 'greedy')


@dataclass
class EmbedderConfig:
    """
    Knobs of the embedding pipeline

    gamma is the host slack, c bounds the guest maximum degree by c*n, and
    mu is the assignment slack (capacity (1 - 7*mu)*m per P-slice).
    """

    gamma: Number = Config.GAMMA
    eps: Number = Config.EPS
    d: Number = Config.D
    s: Optional[int] = None
    c: Number = Config.C
    beta: Number = Config.BETA
    mu: Number = Config.MU
    engine: str = 'regularity'
    seed: int = Config.SEED
    witness_budget: int = Config.WITNESS_BUDGET
    assign_budget: Optional[int] = Config.ASSIGN_BUDGET
    verify_regularity: bool = True
    strict: bool = False
    preset: str = 'desk'

    def __post_init__(self):
        if self.s is None:
            self.s = Config.CLUSTERS
        if not 0 < as_fraction(self.gamma) < Fraction(1, 2):
            raise EmbedderPreconditionError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        if not 0 < as_fraction(self.eps) < 1:
            raise EmbedderPreconditionError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 <= as_fraction(self.d) < 1:
            raise EmbedderPreconditionError(f"d must lie in [0, 1), got {self.d}")
        if self.s < 1:
            raise EmbedderPreconditionError(f"cluster count must be >= 1, got {self.s}")
        if as_fraction(self.c) <= 0:
            raise EmbedderPreconditionError(f"c must be positive, got {self.c}")
        if not 0 < as_fraction(self.beta) < 1:
            raise EmbedderPreconditionError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0 <= as_fraction(self.mu) < Fraction(1, 10):
            raise EmbedderPreconditionError(f"mu must lie in [0, 1/10), got {self.mu}")
        if self.engine not in ENGINES:
            raise EmbedderPreconditionError(f"engine must be one of {ENGINES}, got {self.engine!r}")

    @property
    def typicality_deficit_bound(self) -> Fraction:
        """At most sqrt(eps)*s L-slices a seed image may be atypical to"""
        return sqrt_frac(self.eps) * self.s

    @classmethod
    def asymptotic_preset(cls, gamma: Number, k0: int = Config.K0, **overrides) -> 'EmbedderConfig':
        """
        Constants wired as in the existence proof

        eps = (gamma/120)^2, d = 5*sqrt(eps), c = eps*gamma/(50*K0^2),
        beta = eps*gamma/K0^4 and mu = c, in strict mode. The hypotheses
        these constants need are unreachable at desk-scale n.
        """
        g = as_fraction(gamma)
        eps = (g / 120) ** 2
        c = eps * g / (50 * k0 ** 2)
        values = dict(gamma=g, eps=eps, d=5 * sqrt_frac(eps), c=c,
                      beta=eps * g / k0 ** 4, mu=c, strict=True, preset='asymptotic')
        values.update(overrides)
        logger.warning(warning("Asymptotic preset in force: its preconditions are unreachable at desk-scale n"))
        return cls(**values)

    def to_dict(self) -> dict:
        out = {}
        for key, value in asdict(self).items():
            out[key] = float(value) if isinstance(value, Fraction) else value
        return out


# ---------------------------------------------------------------------------
# Slices
# ---------------------------------------------------------------------------

@dataclass
class SlicedPartition:
    """
    Clusters split into L-slices of size floor((gamma/4)*m0) and P-slices

    The usage ledger records host vertices already taken as images.
    """

    partition: RegularPartition
    l_slices: Dict[Side, Tuple[Tuple[int, ...], ...]]
    p_slices: Dict[Side, Tuple[Tuple[int, ...], ...]]
    l_size: int
    used: Set[HostVertex] = field(default_factory=set)
    location: Dict[HostVertex, Tuple[str, int]] = field(default_factory=dict)
    cluster_load: Counter = field(default_factory=Counter)

    def __post_init__(self):
        for side in Side:
            for i, sl in enumerate(self.l_slices[side]):
                for v in sl:
                    self.location[(side, v)] = ('L', i)
            for i, sl in enumerate(self.p_slices[side]):
                for v in sl:
                    self.location[(side, v)] = ('P', i)

    @property
    def s(self) -> int:
        return self.partition.s

    @property
    def m(self) -> int:
        """|X_{1,P}|, common to every P-slice"""
        return self.partition.cluster_size - self.l_size

    def slice(self, side: Side, kind: str, i: int) -> Tuple[int, ...]:
        return (self.l_slices if kind == 'L' else self.p_slices)[side][i]

    def unused(self, side: Side, kind: str, i: int) -> List[int]:
        return [v for v in self.slice(side, kind, i) if (side, v) not in self.used]

    def where(self, side: Side, v: int) -> Optional[Tuple[str, int]]:
        """('L' or 'P', cluster index), None for exceptional vertices"""
        return self.location.get((side, v))

    def mark(self, side: Side, v: int):
        self.used.add((side, v))
        spot = self.location.get((side, v))
        if spot is not None:
            self.cluster_load[(side, spot[1])] += 1

    def ledger(self) -> dict:
        """Used/total counts per slice"""
        out = {}
        for side in Side:
            for kind in ('L', 'P'):
                for i in range(self.s):
                    total = len(self.slice(side, kind, i))
                    out[f"{'X' if side is Side.A else 'Y'}{i}{kind}"] = [total - len(self.unused(side, kind, i)), total]
        return out


def slice_partition(partition: RegularPartition, gamma: Number, rng_seed: int) -> SlicedPartition:
    """
    Split every cluster into an L-slice and a P-slice

    Raises:
        PartitionError: floor((gamma/4)*m0) < 1
    """
    l_size = floor_frac(as_fraction(gamma) / 4 * partition.cluster_size)
    if l_size < 1:
        raise PartitionError(f"clusters of size {partition.cluster_size} are too small to slice "
                             f"at gamma={gamma}", {'cluster_size': partition.cluster_size})
    rng = np.random.default_rng([rng_seed, 1])
    l_slices, p_slices = {}, {}
    for side in Side:
        ls, ps = [], []
        for cluster in partition.clusters(side):
            picked = set(rng.choice(len(cluster), size=l_size, replace=False).tolist())
            ls.append(tuple(v for k, v in enumerate(cluster) if k in picked))
            ps.append(tuple(v for k, v in enumerate(cluster) if k not in picked))
        l_slices[side], p_slices[side] = tuple(ls), tuple(ps)
    return SlicedPartition(partition, l_slices, p_slices, l_size)


def check_slice_pairs(G: BipartiteGraph, sliced: SlicedPartition, R: ReducedGraph, eps: Number,
                      gamma: Number, d: Number, budget: int, rng_seed: int) -> List[dict]:
    """
    Spot-check sliced pairs of reduced-graph edges

    Each (X_{i,J}, Y_{j,J'}) should be (8*eps/gamma)-regular with density
    above d/2. Returns one record per pair that fails either expectation.
    """
    eps_slice = 8 * as_fraction(eps) / as_fraction(gamma)
    half_d = as_fraction(d) / 2
    failures = []
    for i in range(R.s):
        for j in R.neighbours_x(i):
            for kx in ('L', 'P'):
                for ky in ('L', 'P'):
                    X = sliced.slice(Side.A, kx, i)
                    Y = sliced.slice(Side.B, ky, j)
                    sub = G.adjacency[np.ix_(X, Y)]
                    dens = Fraction(int(sub.sum()), len(X) * len(Y))
                    witness = None
                    if eps_slice < 1:
                        witness = regularity_witness(G, X, Y, eps_slice, budget, rng_seed, (i, j))
                    if dens <= half_d or witness is not None:
                        failures.append({'pair': [i, j], 'slices': kx + ky, 'density': float(dens),
                                         'witness': witness is not None})
    return failures


# ---------------------------------------------------------------------------
# Greedy engine
# ---------------------------------------------------------------------------

def embed_tree_greedy(G: BipartiteGraph, T: RootedTree, rng_seed: int = 0,
                      guest_id: str = 'T') -> Embedding:
    """
    Place T in BFS order, each vertex on an unused neighbour of its parent's
    image with the most unused neighbours, ties by smallest index

    The root goes to the unused A vertex of largest degree. rng_seed is only
    recorded; the engine is deterministic.

    Raises:
        PlacementExhausted: the parent image of a guest vertex has no unused neighbour
    """
    start = time.perf_counter()
    adj = G.adjacency
    unused = {Side.A: np.ones(G.side_a_size, dtype=bool), Side.B: np.ones(G.side_b_size, dtype=bool)}
    # residual degree: unused neighbours on the other side
    residual = {Side.A: adj.sum(axis=1).astype(np.int64), Side.B: adj.sum(axis=0).astype(np.int64)}
    vertex_map: Dict[int, HostVertex] = {}

    def take(side: Side, h: int):
        unused[side][h] = False
        if side is Side.A:
            residual[Side.B] -= adj[h]
        else:
            residual[Side.A] -= adj[:, h]

    for v in T.order:
        side = T.side_of(v)
        p = T.parent[v]
        if p == ROOT_SENTINEL:
            candidates = np.flatnonzero(unused[side])
        else:
            _, h = vertex_map[p]
            row = adj[h] if side is Side.B else adj[:, h]
            candidates = np.flatnonzero(row & unused[side])
        if candidates.size == 0:
            raise PlacementExhausted(
                f"guest vertex {v} has no unused host neighbour",
                {'vertex': v, 'parent': p,
                 'parent_image': list(vertex_map[p]) if p != ROOT_SENTINEL else None})
        choice = int(candidates[np.argmax(residual[side][candidates])])
        vertex_map[v] = (side, choice)
        take(side, choice)

    meta = {'engine': 'greedy', 'seed': rng_seed,
            'timings': {'place': round(time.perf_counter() - start, 6)}}
    return Embedding(guest_id, T, vertex_map, meta)


# ---------------------------------------------------------------------------
# Regularity engine
# ---------------------------------------------------------------------------

def _check_preconditions(G: BipartiteGraph, T: RootedTree, cfg: EmbedderConfig):
    gamma, c = as_fraction(cfg.gamma), as_fraction(cfg.c)
    if not G.is_balanced:
        raise EmbedderPreconditionError(f"host sides differ: {G.side_a_size} vs {G.side_b_size}",
                                        {'clause': 'balanced_host'})
    n = G.side_a_size
    if G.min_degree < (Fraction(1, 2) + gamma) * n:
        raise EmbedderPreconditionError(
            f"host minimum degree {G.min_degree} below (1/2+gamma)n = {float((Fraction(1, 2) + gamma) * n):g}",
            {'clause': 'min_degree'})
    if not T.balanced:
        raise EmbedderPreconditionError(f"tree classes {T.class_sizes()} are unequal",
                                        {'clause': 'balanced_tree'})
    if T.vertex_count > 2 * (1 - gamma) * n:
        raise EmbedderPreconditionError(
            f"tree has {T.vertex_count} vertices, above 2(1-gamma)n = {float(2 * (1 - gamma) * n):g}",
            {'clause': 'size'})
    if T.max_degree > c * n:
        raise EmbedderPreconditionError(
            f"tree maximum degree {T.max_degree} exceeds c*n = {float(c * n):g}",
            {'clause': 'max_degree'})


class _Placer:
    """Step 5: seed-by-seed, piece-by-piece placement against a live ledger"""

    def __init__(self, G: BipartiteGraph, T: RootedTree, dec: BetaDecomposition,
                 sliced: SlicedPartition, R: ReducedGraph, groups: Dict[int, int],
                 cfg: EmbedderConfig):
        self.G, self.T, self.dec, self.sliced, self.R = G, T, dec, sliced, R
        self.groups = groups
        self.cfg = cfg
        self.eps = as_fraction(cfg.eps)
        self.deficit_bound = cfg.typicality_deficit_bound
        self.vertex_map: Dict[int, HostVertex] = {}
        self.records: Dict[int, dict] = {}
        self.stats = Counter()

    # helpers ---------------------------------------------------------------

    def pair_density(self, side: Side, own: Optional[int], other: Optional[int]) -> Fraction:
        if own is None or other is None:
            return as_fraction(self.cfg.d)
        i, j = (own, other) if side is Side.A else (other, own)
        return self.R.densities[i][j]

    def cluster_of(self, side: Side, h: int) -> Optional[int]:
        spot = self.sliced.where(side, h)
        return None if spot is None else spot[1]

    def typical(self, side: Side, h: int, targets: Sequence[int], other_cluster: Optional[int]) -> bool:
        if not targets:
            return True
        base = self.pair_density(side, self.cluster_of(side, h), other_cluster)
        return typical_to(self.G, h, targets, base, self.eps, side)

    def adjacent(self, side: Side, anchor: Optional[HostVertex], pool: Iterable[int]) -> List[int]:
        """Unused pool vertices on `side` adjacent to the anchor image"""
        free = [u for u in pool if (side, u) not in self.sliced.used]
        if anchor is None:
            return free
        _, h = anchor
        if side is Side.B:
            row = self.G.adjacency[h]
        else:
            row = self.G.adjacency[:, h]
        return [u for u in free if row[u]]

    def by_load(self, side: Side, candidates: List[int]) -> List[int]:
        """Least-used cluster first, then smallest host index"""
        def key(u):
            c = self.cluster_of(side, u)
            return (self.sliced.cluster_load[(side, c)] if c is not None else 10 ** 9, u)
        return sorted(candidates, key=key)

    def r_neighbours(self, side: Side, cluster: Optional[int]) -> List[int]:
        """Clusters on the opposite side adjacent in R to `cluster` on `side`"""
        if cluster is None:
            return list(range(self.R.s))
        return self.R.neighbours_x(cluster) if side is Side.A else self.R.neighbours_y(cluster)

    def atypical_l_count(self, side: Side, h: int) -> int:
        """Number of opposite L-slices h is not typical to (the count bounded in the typicality condition)"""
        other = side.opposite
        return sum(1 for i in range(self.sliced.s)
                   if not self.typical(side, h, self.sliced.slice(other, 'L', i), i))

    def place(self, v: int, side: Side, h: int, role: str, typical: bool, spill: bool):
        self.vertex_map[v] = (side, h)
        self.sliced.mark(side, h)
        spot = self.sliced.where(side, h)
        self.records[v] = {
            'role': role, 'side': side.value, 'host': h,
            'slice': spot[0] if spot else 'exceptional',
            'cluster': spot[1] if spot else None,
            'typical': typical, 'spill': spill,
        }
        if not typical:
            self.stats['atypical'] += 1
        if spill:
            self.stats['spilled'] += 1
        self.stats[role] += 1
        logger.debug(f"{role} {v} -> {side.value}{h} ({self.records[v]['slice']}"
                     f"{'' if spot is None else spot[1]}{', spill' if spill else ''})")

    def exhausted(self, v: int, role: str, cluster: Optional[int], piece: Optional[int]):
        raise PlacementExhausted(
            f"no admissible host vertex for {role} {v}",
            {'vertex': v, 'role': role, 'cluster': cluster, 'piece': piece,
             'ledger': self.sliced.ledger()})

    def fallback(self, v: int, side: Side, anchor: Optional[HostVertex], role: str,
                 tiers: List[Tuple[List[int], bool, bool]], cluster: Optional[int],
                 piece: Optional[int]):
        """Try (pool, typical, spill) tiers in order; strict mode uses only the first"""
        for k, (pool, is_typical, spill) in enumerate(tiers):
            if self.cfg.strict and k > 0:
                break
            candidates = self.adjacent(side, anchor, pool)
            if candidates:
                self.place(v, side, self.by_load(side, candidates)[0], role, is_typical, spill)
                return
        self.exhausted(v, role, cluster, piece)

    def all_slices(self, side: Side, kind: str, clusters: Optional[Iterable[int]] = None) -> List[int]:
        clusters = range(self.sliced.s) if clusters is None else clusters
        return [u for i in clusters for u in self.sliced.slice(side, kind, i)]

    # seeds -------------------------------------------------------------------

    def place_seed(self, v: int):
        side = self.T.side_of(v)
        p = self.T.parent[v]
        anchor = None if p == ROOT_SENTINEL else self.vertex_map[p]
        parent_cluster = None if anchor is None else self.cluster_of(anchor[0], anchor[1])
        clusters = (list(range(self.sliced.s)) if anchor is None
                    else self.r_neighbours(anchor[0], parent_cluster))

        pool = self.all_slices(side, 'P', clusters)
        good = [u for u in self.adjacent(side, anchor, pool)
                if self.atypical_l_count(side, u) <= self.deficit_bound]
        tiers = [
            (good, True, False),
            (pool, False, False),
            (self.all_slices(side, 'P'), False, True),
            (self.all_slices(side, 'L'), False, True),
            (range(self.G.size(side)), False, True),
        ]
        self.fallback(v, side, anchor, 'seed', tiers, parent_cluster, None)

    # pieces ------------------------------------------------------------------

    def place_piece(self, index: int):
        piece = self.dec.pieces[index]
        group = self.groups[index]
        r = piece.root
        side = self.T.side_of(r)
        anchor = self.vertex_map[self.T.parent[r]]
        parent_cluster = self.cluster_of(anchor[0], anchor[1])
        partner = side.opposite

        # clusters whose L-slice on `side` is R-adjacent to the group's cluster on the other side
        linked = self.r_neighbours(partner, group)
        typical_l = [l for l in linked
                     if self.typical(anchor[0], anchor[1], self.sliced.slice(side, 'L', l), l)]
        typical_l.sort(key=lambda l: (-len(self.sliced.unused(side, 'L', l)), l))
        linked_sorted = sorted(linked, key=lambda l: (-len(self.sliced.unused(side, 'L', l)), l))

        partner_unused = self.sliced.unused(partner, 'P', group)
        good = []
        for l in typical_l:
            good = [u for u in self.adjacent(side, anchor, self.sliced.slice(side, 'L', l))
                    if self.typical(side, u, partner_unused, group)]
            if good:
                break
        any_l = [u for l in linked_sorted for u in self.sliced.slice(side, 'L', l)]
        tiers = [
            (good, True, False),
            (any_l, False, False),
            (self.sliced.slice(side, 'P', group), False, True),
            (self.all_slices(side, 'P', linked), False, True),
            (self.all_slices(side, 'L'), False, True),
            (range(self.G.size(side)), False, True),
        ]
        # tiers are placed by load, but within one L cluster the index order decides
        self.fallback_link(r, side, anchor, tiers, parent_cluster, index)

        members = set(piece.vertices)
        for u in self.T.order:
            if u in members and u != r:
                self.place_interior(u, index, group)

    def fallback_link(self, r: int, side: Side, anchor: HostVertex,
                      tiers: List[Tuple[List[int], bool, bool]], cluster: Optional[int], piece: int):
        for k, (pool, is_typical, spill) in enumerate(tiers):
            if self.cfg.strict and k > 0:
                break
            candidates = self.adjacent(side, anchor, pool)
            if candidates:
                # keep the cluster order chosen above for L-slice tiers
                choice = candidates[0] if k < 2 else self.by_load(side, candidates)[0]
                self.place(r, side, choice, 'link', is_typical, spill)
                return
        self.exhausted(r, 'link', cluster, piece)

    def place_interior(self, u: int, index: int, group: int):
        side = self.T.side_of(u)
        anchor = self.vertex_map[self.T.parent[u]]
        own = self.sliced.slice(side, 'P', group)
        partner_unused = self.sliced.unused(side.opposite, 'P', group)
        good = [w for w in self.adjacent(side, anchor, own)
                if self.typical(side, w, partner_unused, group)]
        anchor_cluster = self.cluster_of(anchor[0], anchor[1])
        tiers = [
            (good, True, False),
            (own, False, False),
            (self.all_slices(side, 'P', self.r_neighbours(anchor[0], anchor_cluster)), False, True),
            (self.all_slices(side, 'P'), False, True),
            (self.all_slices(side, 'L'), False, True),
            (range(self.G.size(side)), False, True),
        ]
        self.fallback(u, side, anchor, 'interior', tiers, group, index)

    def run(self) -> Dict[int, HostVertex]:
        for kind, ident in contracted_order(self.T, self.dec):
            if kind == 'seed':
                self.place_seed(ident)
            else:
                self.place_piece(ident)
        return self.vertex_map


def _decompose(T: RootedTree, beta: Fraction) -> BetaDecomposition:
    if T.edge_count * beta > 1:
        return beta_decompose(T, beta)
    return seed_only_decomposition(T, beta)


def _relabelled(partition: RegularPartition, R: ReducedGraph,
                matching: ClusterMatching) -> Tuple[RegularPartition, ReducedGraph]:
    return partition.relabel(matching.perm), R.relabel(matching.perm)


def embed_tree_regularity(G: BipartiteGraph, T: RootedTree, cfg: Optional[EmbedderConfig] = None,
                          guest_id: str = 'T') -> Embedding:
    """
    Embed a balanced rooted tree through the five-step regularity pipeline

    Args:
        G: balanced host on 2n vertices with minimum degree >= (1/2+gamma)n
        T: balanced rooted tree, |V(T)| <= 2(1-gamma)n, max degree <= c*n
        cfg: pipeline knobs
        guest_id: label carried by the embedding

    Returns:
        Embedding with the root on side A and per-vertex placement records
        under meta['placements']

    Raises:
        EmbedderPreconditionError, PartitionFailed, MatchingFailed,
        SeedBoundExceeded, AssignmentFailed, PlacementExhausted
    """
    cfg = cfg or EmbedderConfig()
    timings = {}
    clock = time.perf_counter()

    def lap(step: str):
        nonlocal clock
        now = time.perf_counter()
        timings[step] = round(now - clock, 6)
        clock = now

    _check_preconditions(G, T, cfg)
    gamma, eps, d = as_fraction(cfg.gamma), as_fraction(cfg.eps), as_fraction(cfg.d)
    lap('preconditions')

    # Step 1: partition, reduced graph, matching
    try:
        partition = equitable_partition(G, cfg.s, eps, cfg.seed)
    except PartitionError as e:
        raise PartitionFailed(str(e), e.details) from e
    R = reduced_graph(G, partition, eps, d, cfg.witness_budget, cfg.seed,
                      test_regularity=cfg.verify_regularity)
    lam = Fraction(1, 2) + gamma
    degree_check = check_reduced_min_degree(R, lam, d, eps)
    if isinstance(degree_check, Deficit):
        raise PartitionFailed(
            f"reduced graph degree {degree_check.degree} at {degree_check.cluster[0]}{degree_check.cluster[1]} "
            f"below {float(degree_check.required):g}",
            {'cluster': list(degree_check.cluster), 'degree': degree_check.degree,
             'required': float(degree_check.required)})
    matching = cluster_matching(R)
    if not isinstance(matching, ClusterMatching):
        raise MatchingFailed(f"reduced graph has no perfect matching; X-clusters {list(matching.clusters)} "
                             f"see only {list(matching.neighbourhood)}",
                             {'hall_violator': list(matching.clusters),
                              'neighbourhood': list(matching.neighbourhood)})
    partition, R = _relabelled(partition, R, matching)
    logger.info(check(f"Host partitioned: {cfg.s}+{cfg.s} clusters of size {partition.cluster_size}, "
                      f"{R.edge_count} reduced edges"))
    lap('partition')

    # Step 2: decomposition
    beta = as_fraction(cfg.beta)
    dec = _decompose(T, beta)
    links = len(dec.seeds | dec.linking)
    link_bound = gamma / 8 * partition.cluster_size
    eq3_holds = links <= link_bound
    if not eq3_holds:
        message = (f"{links} seeds and linking vertices exceed (gamma/8)|X_1| = {float(link_bound):g}")
        if cfg.strict:
            raise SeedBoundExceeded(message, {'links': links, 'bound': float(link_bound)})
        logger.warning(warning(message))
    lap('decompose')

    # Step 3: slices
    try:
        sliced = slice_partition(partition, gamma, cfg.seed)
    except PartitionError as e:
        raise PartitionFailed(str(e), e.details, step='slice') from e
    slice_failures = []
    if cfg.strict and cfg.verify_regularity:
        slice_failures = check_slice_pairs(G, sliced, R, eps, gamma, d, cfg.witness_budget, cfg.seed)
        if slice_failures:
            logger.warning(warning(f"{len(slice_failures)} sliced pairs miss their regularity expectation"))
    lap('slice')

    # Step 4: assignment; desk mode halves beta until the pieces fit
    beta_retries = 0
    while True:
        counts = piece_parity_counts(T, dec)
        try:
            if cfg.strict:
                instance = AssignmentInstance(tuple(counts), sliced.m, sliced.s, as_fraction(cfg.mu))
                grouping = partition_pieces(instance, cfg.assign_budget)
            else:
                capacity = floor_frac((1 - 7 * as_fraction(cfg.mu)) * sliced.m)
                grouping = assign_to_groups(counts, sliced.s, capacity, cfg.assign_budget)
            break
        except PreconditionViolated as e:
            raise AssignmentFailed(f"assignment hypothesis ({e.clause}) fails: {e}",
                                   {'clause': e.clause}) from e
        except AssignmentFailed:
            if cfg.strict or not dec.pieces:
                raise
            beta /= 2
            beta_retries += 1
            logger.warning(warning(f"Pieces do not fit the P-slices, retrying with beta={float(beta):g}"))
            dec = _decompose(T, beta)
    groups = {index: g for g, members in enumerate(grouping) for index in members}
    lap('assign')

    # Step 5: placement
    placer = _Placer(G, T, dec, sliced, R, groups, cfg)
    vertex_map = placer.run()
    lap('place')

    result = verify_embedding(G, T, vertex_map)
    if not result:
        raise EmbedderError(f"placement produced an invalid embedding: {result.message}",
                            {'violation': result.kind}, step='verify')

    meta = {
        'engine': 'regularity',
        'seed': cfg.seed,
        'config': cfg.to_dict(),
        'seeds': sorted(dec.seeds),
        'linking': sorted(dec.linking),
        'piece_groups': [groups[i] for i in range(len(dec.pieces))],
        'matching': list(matching.perm),
        'eq3_holds': eq3_holds,
        'beta': float(beta),
        'beta_retries': beta_retries,
        'slice_failures': slice_failures,
        'stats': dict(placer.stats),
        'placements': placer.records,
        'ledger': sliced.ledger(),
        'timings': timings,
    }
    if placer.stats['spilled'] or placer.stats['atypical']:
        logger.info(warning(f"Desk relaxations: {placer.stats['spilled']} spills, "
                            f"{placer.stats['atypical']} atypical placements"))
    logger.info(check(f"Embedded {guest_id} ({T.vertex_count} vertices, {len(dec.seeds)} seeds, "
                      f"{len(dec.pieces)} pieces)"))
    return Embedding(guest_id, T, vertex_map, meta)


def embed_tree(G: BipartiteGraph, T: RootedTree, cfg: Optional[EmbedderConfig] = None,
               guest_id: str = 'T') -> Embedding:
    """Dispatch to the engine named by cfg.engine"""
    cfg = cfg or EmbedderConfig()
    if cfg.engine == 'greedy':
        return embed_tree_greedy(G, T, cfg.seed, guest_id)
    return embed_tree_regularity(G, T, cfg, guest_id)


# ---------------------------------------------------------------------------
# Forests
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, v: int) -> int:
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def union(self, u: int, v: int):
        self.parent[self.find(u)] = self.find(v)


def join_forest(F: BalancedForest) -> Tuple[RootedTree, List[Edge]]:
    """
    Join the components of a balanced forest into one balanced tree

    Repeatedly adds the lexicographically smallest edge (a, b) between a
    leaf a of A_F and a leaf b of B_F lying in different components, leaves
    being vertices of current degree at most 1. The result is rooted at the
    first component's root if that lies in A_F, otherwise at the smallest
    A_F vertex, so the even class is A_F.

    Returns:
        (tree on the forest's global vertex numbering, added edges as (a, b))

    Raises:
        NoLeafPair: no eligible leaf pair (only possible for unbalanced input)
    """
    n = F.vertex_count
    if n == 0:
        raise NoLeafPair("cannot join an empty forest")
    sides = [F.side_of(v) for v in range(n)]
    if len(F.components) == 1 and not F.flips[0]:
        return F.components[0], []

    degree = list(F.degrees)
    uf = _UnionFind(n)
    for u, v in F.edges:
        uf.union(u, v)
    added: List[Edge] = []
    for _ in range(len(F.components) - 1):
        leaves_a = [v for v in range(n) if sides[v] is Side.A and degree[v] <= 1]
        leaves_b = [v for v in range(n) if sides[v] is Side.B and degree[v] <= 1]
        pair = None
        for a in leaves_a:
            ra = uf.find(a)
            b = next((b for b in leaves_b if uf.find(b) != ra), None)
            if b is not None:
                pair = (a, b)
                break
        if pair is None:
            raise NoLeafPair(f"no opposite-class leaf pair across components after {len(added)} joins",
                             {'joined': len(added)})
        a, b = pair
        uf.union(a, b)
        degree[a] += 1
        degree[b] += 1
        added.append(pair)

    first = F.offsets[0] + F.components[0].root
    root = first if sides[first] is Side.A else next(v for v in range(n) if sides[v] is Side.A)
    try:
        tree = tree_from_edges(n, list(F.edges) + added, root)
    except TreeStructureError as e:
        raise NoLeafPair(f"joined forest is not a tree: {e}") from e
    return tree, added


def embed_forest(G: BipartiteGraph, F: BalancedForest, cfg: Optional[EmbedderConfig] = None,
                 guest_id: str = 'F') -> Embedding:
    """
    Embed a balanced forest with A_F on side A

    The forest is joined into one tree, embedded by the configured engine,
    and the map is restricted back to the forest; join edges are not part
    of the guest and use no host edge of the result.
    """
    cfg = cfg or EmbedderConfig()
    if F.vertex_count == 0:
        return Embedding(guest_id, F, {}, {'engine': cfg.engine, 'seed': cfg.seed, 'joined': 0})
    tree, added = join_forest(F)
    inner = embed_tree(G, tree, cfg, guest_id)
    meta = dict(inner.meta)
    meta['joined'] = len(added)
    return Embedding(guest_id, F, dict(inner.vertex_map), meta)
