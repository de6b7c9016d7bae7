"""
Tree packer
Packs families of large balanced trees into K_{n,n}: reserve zones on both
sides, strip each tree's highest-degree hubs, pack the residual forests
greedily outside the zones, then place the hubs inside the zones
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.config import Config
from src.embedder import EmbedderConfig, embed_forest
from src.errors import (EmbedderError, ForestPackingFailed, GuardViolated, LedgerViolated,
                        NoLeafPair, TreePackError, ZoneOverflow)
from src.graph_core import (BalancedForest, Edge, Embedding, HostVertex, Packing, RootedTree,
                            Side, build_graph, induced_forest, remove_embedding_edges,
                            verify_packing)
from src.logger import setup_logger
from src.utils import Number, as_fraction, ceil_frac, check, floor_frac, sqrt_frac, warning

logger = setup_logger(__name__)


@dataclass(frozen=True)
class HubExtraction:
    """k highest-degree vertices per class removed from a tree"""

    tree_id: str
    tree: RootedTree
    hubs_a: Tuple[int, ...]
    hubs_b: Tuple[int, ...]
    residual: BalancedForest
    hub_edges: Tuple[Edge, ...]

    @property
    def k(self) -> int:
        return len(self.hubs_a)


@dataclass
class PackerConfig:
    """
    Knobs of the packing pipeline

    c and d_n form the degree schedule of the forest packer (every forest
    has maximum degree <= c*d_n); d_n defaults to the smallest admissible
    value. k is the hub count per class; the default is
    max(ceil(8*sqrt(n)/hub_c), smallest k that makes the forests packable).
    """

    c: Number = Config.PACK_C
    hub_c: Number = Config.HUB_C
    k: Optional[int] = None
    d_n: Optional[int] = None
    engine: str = 'greedy'
    seed: int = Config.SEED
    embedder: Optional[EmbedderConfig] = None

    def __post_init__(self):
        if as_fraction(self.c) <= 0 or as_fraction(self.hub_c) <= 0:
            raise GuardViolated("c and hub_c must be positive")
        if self.k is not None and self.k < 0:
            raise GuardViolated(f"hub count must be >= 0, got {self.k}")

    def embedder_config(self, gamma: Number) -> EmbedderConfig:
        if self.embedder is not None:
            return self.embedder
        return EmbedderConfig(gamma=gamma, engine=self.engine, seed=self.seed)


@dataclass
class ForestPacking:
    embeddings: List[Embedding]
    trace: List[dict]
    d_n: int


@dataclass
class TreePacking:
    packing: Packing
    n: int
    zone_size: int
    k: int
    gamma_inner: Fraction
    hubs: Dict[str, Dict[str, List[List[int]]]] = field(default_factory=dict)
    trace: List[dict] = field(default_factory=list)
    d_n: int = 0

    def layout(self) -> dict:
        zone = list(range(self.n - self.zone_size, self.n))
        return {
            'n': self.n,
            'zone_a': zone,
            'zone_b': zone,
            'k': self.k,
            'gamma_inner': float(self.gamma_inner),
            'd_n': self.d_n,
            'hubs': self.hubs,
        }


def _top_by_degree(T: RootedTree, members, k: int) -> Tuple[int, ...]:
    return tuple(sorted(members, key=lambda v: (-T.degrees[v], v))[:k])


def extract_hubs(T: RootedTree, k: int, tree_id: str = 'T') -> HubExtraction:
    """
    Remove the k highest-degree vertices of each parity class

    Ties go to the smaller index. The residual forest keeps T's class labels
    and records the original vertex of each of its vertices.

    Raises:
        GuardViolated: k < 0 or 2k >= |V(T)|
    """
    if k < 0 or 2 * k >= T.vertex_count:
        raise GuardViolated(f"hub count k={k} too large for a tree on {T.vertex_count} vertices",
                            {'k': k, 'vertices': T.vertex_count})
    hubs_a = _top_by_degree(T, T.even_class, k)
    hubs_b = _top_by_degree(T, T.odd_class, k)
    hubs = set(hubs_a) | set(hubs_b)
    residual = induced_forest(T, (v for v in range(T.vertex_count) if v not in hubs))
    hub_edges = tuple(e for e in T.edges if e[0] in hubs or e[1] in hubs)
    return HubExtraction(tree_id, T, hubs_a, hubs_b, residual, hub_edges)


def default_d(forests: Sequence[BalancedForest], c: Number) -> int:
    """Smallest d with max degree <= c*d for every forest"""
    delta = max((F.max_degree for F in forests), default=0)
    return max(1, ceil_frac(Fraction(delta) / as_fraction(c)))


def forest_guard(n: int, gamma: Number, forests: Sequence[BalancedForest], c: Number,
                 d_n: int) -> List[str]:
    """Every broken forest-packing hypothesis, empty when all hold"""
    g, c_q = as_fraction(gamma), as_fraction(c)
    problems = []
    if not 0 < g < Fraction(1, 2):
        problems.append(f"gamma={gamma} outside (0, 1/2)")
    for i, F in enumerate(forests):
        if not F.balanced:
            problems.append(f"forest {i} is not balanced {F.class_sizes()}")
        if F.vertex_count > 2 * (1 - g) * n:
            problems.append(f"forest {i} has {F.vertex_count} vertices, above 2(1-gamma)n = {float(2 * (1 - g) * n):g}")
        if F.max_degree > c_q * d_n:
            problems.append(f"forest {i} has maximum degree {F.max_degree} above c*d(n) = {float(c_q * d_n):g}")
    if c_q * len(forests) * d_n > (Fraction(1, 2) - g) * n:
        problems.append(f"c*t*d(n) = {float(c_q * len(forests) * d_n):g} exceeds "
                        f"(1/2-gamma)n = {float((Fraction(1, 2) - g) * n):g}")
    return problems


def pack_forests(n: int, gamma: Number, forests: Sequence[BalancedForest],
                 cfg: Optional[PackerConfig] = None) -> ForestPacking:
    """
    Pack balanced forests into K_{n,n} one after another

    Each forest is embedded into the current host and its edges removed
    (G_{i+1} = G_i - phi(E_i)). Before embedding forest i the minimum degree
    of G_i is asserted to be at least n - (i-1)*c*d(n), which the guard
    keeps above (1/2+gamma)n.

    Args:
        n: side size of the host
        gamma: slack, forests have at most 2(1-gamma)n vertices
        forests: balanced forests
        cfg: degree schedule and engine

    Returns:
        ForestPacking with embeddings (A_F on side A) and the ledger trace

    Raises:
        GuardViolated: hypotheses fail
        ForestPackingFailed: the engine could not embed forest `index`
        LedgerViolated: the working host lost more degree than scheduled
    """
    cfg = cfg or PackerConfig()
    c = as_fraction(cfg.c)
    d_n = cfg.d_n if cfg.d_n is not None else default_d(forests, c)
    problems = forest_guard(n, gamma, forests, c, d_n)
    if problems:
        raise GuardViolated("; ".join(problems), {'problems': problems})

    host = build_graph(n, n, complete=True)
    G = host
    floor_bound = (Fraction(1, 2) + as_fraction(gamma)) * n
    embed_cfg = cfg.embedder_config(gamma)
    embeddings, trace = [], []
    for i, F in enumerate(forests, start=1):
        bound = n - (i - 1) * c * d_n
        delta = G.min_degree
        trace.append({'index': i, 'min_degree': delta, 'bound': float(bound)})
        if delta < bound or not bound > floor_bound:
            raise LedgerViolated(f"before forest {i}: min degree {delta}, schedule {float(bound):g}, "
                                 f"floor {float(floor_bound):g}", trace[-1])
        try:
            emb = embed_forest(G, F, embed_cfg, guest_id=f"F{i}")
        except (EmbedderError, NoLeafPair) as e:
            raise ForestPackingFailed(i, e) from e
        G = remove_embedding_edges(G, emb)
        embeddings.append(emb)
        logger.debug(f"Forest {i}/{len(forests)} packed, host min degree now {G.min_degree}")

    result = verify_packing(host, embeddings)
    if not result:
        raise TreePackError(f"forest packing failed verification: {result.message}")
    logger.info(check(f"Packed {len(forests)} forests into K_{{{n},{n}}} (d(n)={d_n})"))
    return ForestPacking(embeddings, trace, d_n)


def _inner_gamma(gamma: Fraction, forests: Sequence[BalancedForest], inner_n: int) -> Fraction:
    largest = max((max(F.class_sizes()) for F in forests), default=0)
    return min(gamma, 1 - Fraction(largest, inner_n))


def _needed_k(trees: Sequence[RootedTree], gamma: Fraction, c: Fraction, inner_n: int,
              k_max: int) -> Optional[int]:
    """Smallest k <= k_max whose residual forests pass the forest-packing guard"""
    for k in range(0, k_max + 1):
        forests = [extract_hubs(T, k).residual for T in trees]
        g_inner = _inner_gamma(gamma, forests, inner_n)
        if not 0 < g_inner < Fraction(1, 2):
            continue
        if not forest_guard(inner_n, g_inner, forests, c, default_d(forests, c)):
            return k
    return None


def pack_trees(n: int, gamma: Number, trees: Sequence[RootedTree],
               cfg: Optional[PackerConfig] = None) -> TreePacking:
    """
    Pack balanced rooted trees into K_{n,n} with every root on side A

    Args:
        n: side size of the host
        gamma: slack; each tree has at most (1-gamma)n vertices per class
        trees: balanced rooted trees
        cfg: hub count, degree schedule and engine

    Returns:
        TreePacking with the verified packing, zone layout and ledger trace

    Raises:
        GuardViolated: a tree breaks the size or balance precondition
        ZoneOverflow: the hubs of all trees do not fit in the zones
        ForestPackingFailed: propagated from the forest packer
    """
    cfg = cfg or PackerConfig()
    g = as_fraction(gamma)
    if not 0 < g < Fraction(1, 2):
        raise GuardViolated(f"gamma must lie in (0, 1/2), got {gamma}")
    for i, T in enumerate(trees):
        if not T.balanced:
            raise GuardViolated(f"tree {i} is not balanced {T.class_sizes()}", {'tree': i})
        if max(T.class_sizes()) > (1 - g) * n:
            raise GuardViolated(f"tree {i} has {max(T.class_sizes())} vertices per class, above "
                                f"(1-gamma)n = {float((1 - g) * n):g}", {'tree': i})

    t = len(trees)
    limit = float(n) ** (0.5 - float(g))
    if t > limit:
        logger.warning(warning(f"{t} trees exceed n^(1/2-gamma) = {limit:.2f}; relying on the guards"))

    zone_size = floor_frac(g * n)
    inner_n = n - zone_size
    if t == 0:
        return TreePacking(Packing(()), n, zone_size, 0, g)

    k_valid = min((T.vertex_count - 1) // 2 for T in trees)
    if cfg.k is not None:
        k = cfg.k
    else:
        k_default = ceil_frac(8 * sqrt_frac(n) / as_fraction(cfg.hub_c))
        k_needed = _needed_k(trees, g, as_fraction(cfg.c), inner_n, min(k_valid, zone_size // t))
        if k_needed is None:
            raise ZoneOverflow(f"no hub count up to {min(k_valid, zone_size // t)} makes the residual forests packable",
                               {'zone_size': zone_size, 'trees': t})
        k = min(max(k_default, k_needed), k_valid)
    if t * k > zone_size:
        raise ZoneOverflow(f"{t} trees x {k} hubs exceed the zone size floor(gamma*n) = {zone_size}",
                           {'k': k, 'trees': t, 'zone_size': zone_size})

    extractions = [extract_hubs(T, k, f"T{i + 1}") for i, T in enumerate(trees)]
    forests = [x.residual for x in extractions]
    g_inner = _inner_gamma(g, forests, inner_n)
    if not g_inner > 0:
        raise GuardViolated(f"residual forests do not fit the {inner_n}-vertex sides outside the zones")
    logger.info(f"Packing {t} trees into K_{{{n},{n}}}: zones of {zone_size}, k={k}, "
                f"inner slack {float(g_inner):.4f}")

    forest_packing = pack_forests(inner_n, g_inner, forests, cfg)

    # hubs take the smallest unused zone index, trees in input order
    next_a = next_b = inner_n
    embeddings, hubs = [], {}
    for x, femb in zip(extractions, forest_packing.embeddings):
        vertex_map: Dict[int, HostVertex] = {}
        for local, image in femb.vertex_map.items():
            vertex_map[x.residual.origin[local]] = image
        placed_a, placed_b = [], []
        for v in x.hubs_a:
            vertex_map[v] = (Side.A, next_a)
            placed_a.append([v, next_a])
            next_a += 1
        for v in x.hubs_b:
            vertex_map[v] = (Side.B, next_b)
            placed_b.append([v, next_b])
            next_b += 1
        hubs[x.tree_id] = {'A': placed_a, 'B': placed_b}
        embeddings.append(Embedding(x.tree_id, x.tree, vertex_map,
                                    {'engine': cfg.engine, 'seed': cfg.seed, 'hub_edges': len(x.hub_edges)}))

    packing = Packing(tuple(embeddings))
    result = verify_packing(build_graph(n, n, complete=True), packing)
    if not result:
        raise TreePackError(f"tree packing failed verification: {result.message}")
    logger.info(check(f"Packed {t} trees into K_{{{n},{n}}}, {packing.edge_total()} edges used"))
    return TreePacking(packing, n, zone_size, k, g_inner, hubs, forest_packing.trace, forest_packing.d_n)
