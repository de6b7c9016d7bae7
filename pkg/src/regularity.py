"""
Regularity surrogate
Equitable partitions, one-sided epsilon-regularity testing, reduced graphs,
cluster matching and typicality predicates

The regularity lemma only asserts that a good partition exists. Here a
random equitable partition is drawn, every dense cluster pair is probed for
an irregularity witness, and the downstream postconditions (reduced minimum
degree, perfect cluster matching) are checked at runtime. "No witness" means
none was found within the search budget; it is not a proof of regularity.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from src.config import Config
from src.errors import PartitionError
from src.graph_core import BipartiteGraph, Ok, Side, density
from src.logger import setup_logger
from src.utils import Number, as_fraction, ceil_frac, check, warning

logger = setup_logger(__name__)

Cluster = Tuple[int, ...]


@dataclass(frozen=True)
class RegularPartition:
    """Clusters X_1..X_s, Y_1..Y_s of common size m0 plus exceptional sets X_0, Y_0"""

    clusters_x: Tuple[Cluster, ...]
    clusters_y: Tuple[Cluster, ...]
    exceptional_x: Cluster
    exceptional_y: Cluster
    cluster_size: int
    eps: Fraction
    seed: int

    @property
    def s(self) -> int:
        return len(self.clusters_x)

    def clusters(self, side: Side) -> Tuple[Cluster, ...]:
        return self.clusters_x if side is Side.A else self.clusters_y

    def relabel(self, perm: Sequence[int]) -> 'RegularPartition':
        """Reorder Y-clusters so that X_i is paired with Y_i (new Y_i = old Y_perm[i])"""
        return RegularPartition(self.clusters_x, tuple(self.clusters_y[j] for j in perm),
                                self.exceptional_x, self.exceptional_y,
                                self.cluster_size, self.eps, self.seed)


@dataclass(frozen=True)
class RegularityWitness:
    """Significant subsets whose density strays more than eps from the pair density"""

    pair: Tuple[int, int]
    subset_x: Cluster
    subset_y: Cluster
    deviation: Fraction
    pair_density: Fraction


@dataclass(frozen=True)
class ReducedGraph:
    """Cluster graph: X_i ~ Y_j iff density > d and no witness was found"""

    s: int
    adjacency: np.ndarray
    densities: Tuple[Tuple[Fraction, ...], ...]
    witnesses: Dict[Tuple[int, int], RegularityWitness] = field(default_factory=dict)
    d: Fraction = Fraction(0)
    eps: Fraction = Fraction(0)
    tested: bool = True

    def neighbours_x(self, i: int) -> List[int]:
        return np.flatnonzero(self.adjacency[i]).tolist()

    def neighbours_y(self, j: int) -> List[int]:
        return np.flatnonzero(self.adjacency[:, j]).tolist()

    def degree(self, side: Side, i: int) -> int:
        return int(self.adjacency[i].sum() if side is Side.A else self.adjacency[:, i].sum())

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum())

    def relabel(self, perm: Sequence[int]) -> 'ReducedGraph':
        """Permute Y-cluster indices to match RegularPartition.relabel"""
        perm = list(perm)
        inverse = {old: new for new, old in enumerate(perm)}
        witnesses = {(i, inverse[j]): w for (i, j), w in self.witnesses.items()}
        adjacency = self.adjacency[:, perm].copy()
        adjacency.setflags(write=False)
        densities = tuple(tuple(row[j] for j in perm) for row in self.densities)
        return ReducedGraph(self.s, adjacency, densities, witnesses, self.d, self.eps, self.tested)


@dataclass(frozen=True)
class Deficit:
    """Cluster whose reduced degree is below the required bound"""

    cluster: Tuple[str, int]
    degree: int
    required: Fraction

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class ClusterMatching:
    """Perfect matching of the reduced graph: X_i matched with Y_perm[i]"""

    perm: Tuple[int, ...]

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class HallViolator:
    """X-clusters S with |N(S)| < |S|"""

    clusters: Tuple[int, ...]
    neighbourhood: Tuple[int, ...]

    def __bool__(self) -> bool:
        return False


# ---------------------------------------------------------------------------
# Partition
# ---------------------------------------------------------------------------

def equitable_partition(G: BipartiteGraph, s: int, eps: Number, rng_seed: int) -> RegularPartition:
    """
    Seeded random equitable split of each side into s clusters

    Args:
        G: host graph
        s: clusters per side
        eps: bound on the exceptional sets, |X_0| <= eps*|A|
        rng_seed: seed for the shuffle

    Returns:
        RegularPartition; remainders land in the exceptional sets

    Raises:
        PartitionError: s < 1 or the remainder exceeds the eps bound
    """
    eps_q = as_fraction(eps)
    if s < 1:
        raise PartitionError(f"cluster count must be >= 1, got {s}")
    m0 = min(G.side_a_size, G.side_b_size) // s
    if m0 < 1:
        raise PartitionError(f"{s} clusters do not fit sides of size "
                             f"({G.side_a_size}, {G.side_b_size})")
    for side_size in (G.side_a_size, G.side_b_size):
        remainder = side_size - s * m0
        if remainder > eps_q * side_size:
            raise PartitionError(
                f"s={s} leaves {remainder} exceptional vertices, above eps*n = {float(eps_q * side_size):g}",
                {'s': s, 'remainder': remainder})

    rng = np.random.default_rng(rng_seed)

    def split(size: int) -> Tuple[Tuple[Cluster, ...], Cluster]:
        perm = rng.permutation(size).tolist()
        clusters = tuple(tuple(sorted(perm[i * m0:(i + 1) * m0])) for i in range(s))
        return clusters, tuple(sorted(perm[s * m0:]))

    clusters_x, exceptional_x = split(G.side_a_size)
    clusters_y, exceptional_y = split(G.side_b_size)
    logger.debug(f"Partitioned into {s}+{s} clusters of size {m0} "
                 f"(exceptional {len(exceptional_x)}/{len(exceptional_y)}, seed {rng_seed})")
    return RegularPartition(clusters_x, clusters_y, exceptional_x, exceptional_y, m0, eps_q, rng_seed)


# ---------------------------------------------------------------------------
# Witness search
# ---------------------------------------------------------------------------

def _extremes(scores: np.ndarray, k: int) -> Tuple[List[int], List[int]]:
    """Positions of the k largest and k smallest scores, ties by position"""
    positions = range(len(scores))
    top = sorted(positions, key=lambda p: (-scores[p], p))[:k]
    bottom = sorted(positions, key=lambda p: (scores[p], p))[:k]
    return top, bottom


def _candidates(sub: np.ndarray, kx: int, ky: int, budget: int,
                rng: np.random.Generator) -> Iterator[Tuple[List[int], List[int]]]:
    nx_, ny_ = sub.shape
    all_rows, all_cols = list(range(nx_)), list(range(ny_))

    row_top, row_bottom = _extremes(sub.sum(axis=1), kx)
    col_top, col_bottom = _extremes(sub.sum(axis=0), ky)

    # degree-deviation sets against the whole other side
    for rows in (row_top, row_bottom):
        yield rows, all_cols
    for cols in (col_top, col_bottom):
        yield all_rows, cols

    # best responders to the extreme sets
    for rows in (row_top, row_bottom):
        hi, lo = _extremes(sub[rows].sum(axis=0), ky)
        yield rows, hi
        yield rows, lo
    for cols in (col_top, col_bottom):
        hi, lo = _extremes(sub[:, cols].sum(axis=1), kx)
        yield hi, cols
        yield lo, cols

    # neighbourhoods of single rows and the rows that respond to them
    for x in sorted(all_rows, key=lambda p: (-sub[p].sum(), p)):
        nbrs = np.flatnonzero(sub[x]).tolist()
        non_nbrs = np.flatnonzero(~sub[x]).tolist()
        for cols in (nbrs, non_nbrs):
            if len(cols) >= ky:
                hi, lo = _extremes(sub[:, cols].sum(axis=1), kx)
                yield hi, cols
                yield lo, cols

    for _ in range(budget):
        a = int(rng.integers(kx, nx_ + 1))
        b = int(rng.integers(ky, ny_ + 1))
        rows = sorted(rng.choice(nx_, size=a, replace=False).tolist())
        cols = sorted(rng.choice(ny_, size=b, replace=False).tolist())
        yield rows, cols


def regularity_witness(G: BipartiteGraph, X: Sequence[int], Y: Sequence[int], eps: Number,
                       budget: Optional[int] = None, rng_seed: int = 0,
                       pair: Tuple[int, int] = (0, 0)) -> Optional[RegularityWitness]:
    """
    Search for eps-significant A' ⊆ X, B' ⊆ Y with |d(X,Y) - d(A',B')| > eps

    Candidates are tried in a fixed order (degree-deviation sets, their best
    responders, single-row neighbourhoods, then `budget` seeded random
    significant subsets) and the first violation is returned.

    Returns:
        RegularityWitness, or None when no violation was found within budget
    """
    X, Y = list(X), list(Y)
    if not X or not Y:
        raise PartitionError("regularity_witness needs nonempty clusters")
    budget = Config.WITNESS_BUDGET if budget is None else budget
    eps_q = as_fraction(eps)
    sub = G.adjacency[np.ix_(X, Y)]
    base = Fraction(int(sub.sum()), len(X) * len(Y))
    kx = max(1, ceil_frac(eps_q * len(X)))
    ky = max(1, ceil_frac(eps_q * len(Y)))

    rng = np.random.default_rng([rng_seed, pair[0], pair[1]])
    for rows, cols in _candidates(sub, kx, ky, budget, rng):
        sub_density = Fraction(int(sub[np.ix_(rows, cols)].sum()), len(rows) * len(cols))
        deviation = abs(base - sub_density)
        if deviation > eps_q:
            return RegularityWitness(pair, tuple(X[r] for r in rows), tuple(Y[c] for c in cols),
                                     deviation, base)
    return None


def verify_witness(G: BipartiteGraph, X: Sequence[int], Y: Sequence[int],
                   witness: RegularityWitness, eps: Number) -> bool:
    """Recompute a witness from scratch with density()"""
    eps_q = as_fraction(eps)
    if not set(witness.subset_x) <= set(X) or not set(witness.subset_y) <= set(Y):
        return False
    if len(witness.subset_x) < eps_q * len(X) or len(witness.subset_y) < eps_q * len(Y):
        return False
    deviation = abs(density(G, X, Y) - density(G, witness.subset_x, witness.subset_y))
    return deviation > eps_q and deviation == witness.deviation


# ---------------------------------------------------------------------------
# Reduced graph
# ---------------------------------------------------------------------------

def reduced_graph(G: BipartiteGraph, partition: RegularPartition, eps: Number, d: Number,
                  budget: Optional[int] = None, rng_seed: Optional[int] = None,
                  test_regularity: bool = True) -> ReducedGraph:
    """
    Build the (eps, d)-reduced graph of G for the given partition

    Args:
        G: host graph the partition was built over
        partition: clusters
        eps: regularity parameter
        d: density threshold; pairs need density strictly above d
        budget: random candidates per pair for the witness search
        rng_seed: witness search seed (defaults to the partition seed)
        test_regularity: probe dense pairs for witnesses; when False the
            reduced graph is the plain density-threshold graph

    Returns:
        ReducedGraph with the density matrix and every witness found
    """
    s = partition.s
    eps_q, d_q = as_fraction(eps), as_fraction(d)
    seed = partition.seed if rng_seed is None else rng_seed
    adjacency = np.zeros((s, s), dtype=bool)
    densities, witnesses = [], {}

    for i, X in enumerate(partition.clusters_x):
        row = []
        for j, Y in enumerate(partition.clusters_y):
            pair_density = density(G, X, Y)
            row.append(pair_density)
            if pair_density <= d_q:
                continue
            if test_regularity:
                witness = regularity_witness(G, X, Y, eps_q, budget, seed, (i, j))
                if witness is not None:
                    witnesses[(i, j)] = witness
                    continue
            adjacency[i, j] = True
        densities.append(tuple(row))

    adjacency.setflags(write=False)
    R = ReducedGraph(s, adjacency, tuple(densities), witnesses, d_q, eps_q, test_regularity)
    logger.debug(f"Reduced graph: {R.edge_count}/{s * s} pairs kept, {len(witnesses)} witnesses")
    return R


def check_reduced_min_degree(R: ReducedGraph, lam: Number, d: Number,
                             eps: Number) -> Union[Ok, Deficit]:
    """
    Every cluster must have reduced degree >= (lambda - (d + eps)) * s

    Returns:
        Ok, or the first Deficit in the order X_1..X_s, Y_1..Y_s
    """
    required = (as_fraction(lam) - (as_fraction(d) + as_fraction(eps))) * R.s
    for side, label in ((Side.A, 'X'), (Side.B, 'Y')):
        for i in range(R.s):
            deg = R.degree(side, i)
            if deg < required:
                logger.info(warning(f"Reduced degree of {label}{i} is {deg}, need {float(required):g}"))
                return Deficit((label, i), deg, required)
    return Ok()


def cluster_matching(R: ReducedGraph) -> Union[ClusterMatching, HallViolator]:
    """
    Perfect matching of the reduced graph, or a Hall violator

    Uses Hopcroft-Karp; on failure an alternating search from an unmatched
    X-cluster collects a set S with |N(S)| = |S| - 1.
    """
    graph = nx.Graph()
    top = [('X', i) for i in range(R.s)]
    graph.add_nodes_from(top, bipartite=0)
    graph.add_nodes_from((('Y', j) for j in range(R.s)), bipartite=1)
    graph.add_edges_from((('X', i), ('Y', j)) for i in range(R.s) for j in R.neighbours_x(i))
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)

    if all(node in matching for node in top):
        perm = tuple(matching[('X', i)][1] for i in range(R.s))
        logger.debug(check(f"Cluster matching found: {perm}"))
        return ClusterMatching(perm)

    start = next(i for i in range(R.s) if ('X', i) not in matching)
    reached_x, reached_y = {start}, set()
    frontier = [start]
    while frontier:
        nxt = []
        for i in frontier:
            for j in R.neighbours_x(i):
                if j in reached_y:
                    continue
                reached_y.add(j)
                # maximum matching: every reached Y-cluster is matched
                mate = matching[('Y', j)][1]
                if mate not in reached_x:
                    reached_x.add(mate)
                    nxt.append(mate)
        frontier = nxt
    return HallViolator(tuple(sorted(reached_x)), tuple(sorted(reached_y)))


# ---------------------------------------------------------------------------
# Typicality
# ---------------------------------------------------------------------------

def typical_to(G: BipartiteGraph, v: int, S: Sequence[int], base_density: Number,
               eps: Number, side: Side = Side.A) -> bool:
    """
    True iff deg(v, S) >= (base_density - eps) * |S|

    v lives on `side`, S on the opposite side.
    """
    S = list(S)
    if not S:
        raise PartitionError("typicality needs a nonempty target set")
    if side is Side.A:
        deg = int(G.adjacency[v, S].sum())
    else:
        deg = int(G.adjacency[S, v].sum())
    return deg >= (as_fraction(base_density) - as_fraction(eps)) * len(S)


def typicality_profile(G: BipartiteGraph, v: int, targets: Sequence[Sequence[int]],
                       base_densities: Sequence[Number], eps: Number,
                       side: Side = Side.A) -> int:
    """Number of target sets v is typical to"""
    if not targets:
        raise PartitionError("typicality_profile needs at least one target")
    return sum(1 for S, base in zip(targets, base_densities)
               if typical_to(G, v, S, base, eps, side))


def partition_to_dict(partition: RegularPartition, R: Optional[ReducedGraph] = None,
                      matching: Optional[Union[ClusterMatching, HallViolator]] = None) -> dict:
    """JSON dump of clusters, densities, witnesses and the matching"""
    body = {
        'seed': partition.seed,
        'cluster_size': partition.cluster_size,
        'clusters_x': [list(c) for c in partition.clusters_x],
        'clusters_y': [list(c) for c in partition.clusters_y],
        'exceptional_x': list(partition.exceptional_x),
        'exceptional_y': list(partition.exceptional_y),
    }
    if R is not None:
        body['densities'] = [[str(q) for q in row] for row in R.densities]
        body['reduced_edges'] = [[i, j] for i in range(R.s) for j in R.neighbours_x(i)]
        body['witnesses'] = [
            {'pair': list(w.pair), 'subset_x': list(w.subset_x), 'subset_y': list(w.subset_y),
             'deviation': str(w.deviation)}
            for w in R.witnesses.values()
        ]
    if isinstance(matching, ClusterMatching):
        body['matching'] = list(matching.perm)
    elif isinstance(matching, HallViolator):
        body['hall_violator'] = {'clusters': list(matching.clusters),
                                 'neighbourhood': list(matching.neighbourhood)}
    return body
