"""
Oracles
Exhaustive packing search, small-case constructions and counting bounds
used as ground truth for the pipeline

The search places guests one after another, each in BFS order from its
root, over unused host edges. Symmetry is broken three ways, all of them
compatible with each other:

* fresh host vertices (untouched by any placement so far) with the same
  host neighbourhood are interchangeable, so only the smallest is tried;
* sibling leaves are placed together as a set rather than one by one;
* consecutive identical guests take non-decreasing (orientation, root
  image) keys, and fresh vertices below the pending root bound are kept
  apart from those above it.
"""

import itertools
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import Config
from src.formats import packing_to_dict
from src.generators import gen_graph
from src.graph_core import (BalancedForest, BipartiteGraph, Embedding, Guest, Packing,
                            RootedTree, Side, build_graph, build_rooted_tree,
                            induced_forest, verify_packing)
from src.logger import setup_logger
from src.regularity import RegularityWitness
from src.utils import Number, as_fraction, ceil_frac, check, cross, floor_frac

logger = setup_logger(__name__)


class SearchStatus(str, Enum):
    FOUND = 'FOUND'
    UNSAT = 'UNSAT'
    BUDGET_EXCEEDED = 'BUDGET_EXCEEDED'


@dataclass
class SearchReport:
    description: str
    status: SearchStatus
    packing: Optional[Packing] = None
    nodes: int = 0
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        body = {
            'description': self.description,
            'status': self.status.value,
            'nodes': self.nodes,
            'wall_time': round(self.wall_time, 6),
        }
        if self.packing is not None:
            body['packing'] = packing_to_dict(self.packing)
        return body


class _BudgetExceeded(Exception):
    pass


def flipped(guest: Guest) -> BalancedForest:
    """Same guest with its classes swapped (A-class placed on side B)"""
    if isinstance(guest, RootedTree):
        return BalancedForest((guest,), (True,))
    return BalancedForest(guest.components, tuple(not f for f in guest.flips), guest.origin)


@dataclass
class _Step:
    vertices: Tuple[int, ...]
    parent: Optional[int]
    side: Side
    degree: int
    leaf_set: bool = False


@dataclass
class _Plan:
    steps: List[_Step]
    root_side: Side
    guest: Guest
    class_sizes: Dict[Side, int] = field(default_factory=dict)
    degrees_by_side: Dict[Side, List[int]] = field(default_factory=dict)


def _plan(guest: Guest, flip: bool) -> _Plan:
    """Internal vertices in BFS order per component, then sibling leaves as sets"""
    if isinstance(guest, RootedTree):
        forest = BalancedForest((guest,), (False,))
    else:
        forest = guest
    steps, leaf_steps = [], []
    degrees = forest.degrees
    sides = [forest.side_of(v).opposite if flip else forest.side_of(v) for v in range(forest.vertex_count)]
    for comp, off in zip(forest.components, forest.offsets):
        for v in comp.order:
            g = off + v
            p = comp.parent[v]
            if p == -1:
                steps.append(_Step((g,), None, sides[g], degrees[g]))
                continue
            if degrees[g] == 1:
                continue
            steps.append(_Step((g,), off + p, sides[g], degrees[g]))
        for v in comp.order:
            leaves = tuple(off + c for c in comp.children[v] if degrees[off + c] == 1)
            if leaves:
                leaf_steps.append(_Step(leaves, off + v, sides[leaves[0]], 1, leaf_set=True))
    root_side = sides[forest.offsets[0] + forest.components[0].root] if forest.components else Side.A
    by_side = {Side.A: [], Side.B: []}
    for g, side in enumerate(sides):
        by_side[side].append(degrees[g])
    return _Plan(steps + leaf_steps, root_side, flipped(guest) if flip else guest,
                 {s: len(by_side[s]) for s in Side}, by_side)


def _fresh_prefix(chosen: set, groups) -> bool:
    """Fresh members of each class must be the smallest ones of that class"""
    for group in groups:
        j = sum(1 for h in group if h in chosen)
        if any(h not in chosen for h in group[:j]):
            return False
    return True


class _Search:
    def __init__(self, G: BipartiteGraph, guests: Sequence[Guest], orientations: str,
                 budget: Optional[int]):
        self.G = G
        self.guests = list(guests)
        self.budget = budget
        self.nodes = 0
        self.size = {Side.A: G.side_a_size, Side.B: G.side_b_size}
        self.nbrs = {Side.A: [G.neighbours(Side.A, a) for a in range(G.side_a_size)],
                     Side.B: [G.neighbours(Side.B, b) for b in range(G.side_b_size)]}
        self.used_edges = set()
        self.free = {Side.A: [int(x) for x in G.degrees_a], Side.B: [int(x) for x in G.degrees_b]}
        self.reserved = {Side.A: [0] * G.side_a_size, Side.B: [0] * G.side_b_size}
        self.touch = {Side.A: [0] * G.side_a_size, Side.B: [0] * G.side_b_size}
        self.klass = {Side.A: self._classes(G.adjacency), Side.B: self._classes(G.adjacency.T)}
        flips = (False,) if orientations == 'fixed' else (False, True)
        self.plans = [[_plan(g, f) for f in flips] for g in self.guests]
        self.identical = [i > 0 and self.guests[i] == self.guests[i - 1] for i in range(len(self.guests))]
        self.chosen: List[Tuple[int, Dict[int, int]]] = []
        # pending (orientation, root side, root image) of the last placed guest
        self.last_key: Optional[Tuple[int, Side, int]] = None

    @staticmethod
    def _classes(matrix: np.ndarray) -> List[int]:
        ids: Dict[bytes, int] = {}
        return [ids.setdefault(np.packbits(row).tobytes(), len(ids)) for row in matrix]

    def spend(self):
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise _BudgetExceeded()

    def edge(self, side: Side, h: int, ph: int) -> Tuple[int, int]:
        return (h, ph) if side is Side.A else (ph, h)

    def capacity_ok(self, plan: _Plan) -> bool:
        """Each guest vertex of degree delta needs its own host vertex with delta free edges"""
        for side in Side:
            demands = sorted(plan.degrees_by_side[side], reverse=True)
            free = [self.free[side][h] - self.reserved[side][h] for h in range(self.size[side])]
            for delta in sorted(set(demands), reverse=True):
                if delta <= 1:
                    break
                need = sum(1 for x in demands if x >= delta)
                if sum(1 for f in free if f >= delta) < need:
                    return False
            if plan.class_sizes[side] > self.size[side]:
                return False
        return True

    def bound_for(self, gi: int, current_key: Optional[Tuple[int, Side, int]]) -> Optional[Tuple[Side, int]]:
        """Root bound that later identical guests must respect"""
        if current_key is None or gi + 1 >= len(self.guests) or not self.identical[gi + 1]:
            return None
        return current_key[1], current_key[2]

    def fresh_reduce(self, side: Side, candidates: List[int],
                     bound: Optional[Tuple[Side, int]]) -> List[int]:
        """Keep every touched candidate and the smallest fresh one per class"""
        out, seen = [], set()
        for h in candidates:
            if self.touch[side][h]:
                out.append(h)
                continue
            above = bound is not None and bound[0] is side and h >= bound[1]
            key = (self.klass[side][h], above)
            if key not in seen:
                seen.add(key)
                out.append(h)
        return out

    def candidates(self, step: _Step, images: Dict[int, int], taken: set) -> List[int]:
        side = step.side
        if step.parent is None:
            pool = range(self.size[side])
        else:
            ph = images[step.parent]
            pool = [h for h in self.nbrs[side.opposite][ph]
                    if self.edge(side, h, ph) not in self.used_edges]
        need = step.degree
        return sorted(h for h in pool if h not in taken
                      and self.free[side][h] - self.reserved[side][h] >= need)

    def apply(self, side: Side, h: int, parent_image: Optional[int], degree: int):
        self.touch[side][h] += 1
        if parent_image is None:
            self.reserved[side][h] += degree
        else:
            e = self.edge(side, h, parent_image)
            self.used_edges.add(e)
            self.free[side][h] -= 1
            self.free[side.opposite][parent_image] -= 1
            self.reserved[side.opposite][parent_image] -= 1
            self.reserved[side][h] += degree - 1

    def undo(self, side: Side, h: int, parent_image: Optional[int], degree: int):
        self.touch[side][h] -= 1
        if parent_image is None:
            self.reserved[side][h] -= degree
        else:
            e = self.edge(side, h, parent_image)
            self.used_edges.discard(e)
            self.free[side][h] += 1
            self.free[side.opposite][parent_image] += 1
            self.reserved[side.opposite][parent_image] += 1
            self.reserved[side][h] -= degree - 1

    # search ------------------------------------------------------------------

    def place_guest(self, gi: int) -> bool:
        if gi == len(self.guests):
            return True
        previous_key = self.last_key
        for orient, plan in enumerate(self.plans[gi]):
            if self.identical[gi] and previous_key is not None and orient < previous_key[0]:
                continue
            if not self.capacity_ok(plan):
                continue
            if self.place_step(gi, orient, plan, 0, {}, set(), previous_key):
                return True
        self.last_key = previous_key
        return False

    def place_step(self, gi: int, orient: int, plan: _Plan, pos: int, images: Dict[int, int],
                   taken: set, previous_key) -> bool:
        self.spend()
        if pos == len(plan.steps):
            self.chosen.append((orient, dict(images)))
            self.last_key = (orient, plan.root_side, images[plan.steps[0].vertices[0]])
            if self.place_guest(gi + 1):
                return True
            self.chosen.pop()
            self.last_key = previous_key
            return False

        step = plan.steps[pos]
        side = step.side
        if pos == 0:
            current_key = None
            bound = previous_key[1:] if (self.identical[gi] and previous_key is not None
                                         and previous_key[0] == orient) else None
        else:
            current_key = (orient, plan.root_side, images[plan.steps[0].vertices[0]])
            bound = self.bound_for(gi, current_key)

        cands = self.candidates(step, images, taken)
        if pos == 0 and bound is not None:
            cands = [h for h in cands if h >= bound[1]]
        parent_image = None if step.parent is None else images[step.parent]

        if not step.leaf_set:
            for h in self.fresh_reduce(side, cands, bound):
                v = step.vertices[0]
                images[v] = h
                taken.add(h)
                self.apply(side, h, parent_image, step.degree)
                if self.place_step(gi, orient, plan, pos + 1, images, taken, previous_key):
                    return True
                self.undo(side, h, parent_image, step.degree)
                taken.discard(h)
                del images[v]
            return False

        k = len(step.vertices)
        touched = [h for h in cands if self.touch[side][h]]
        fresh_groups: Dict[tuple, List[int]] = {}
        for h in cands:
            if not self.touch[side][h]:
                above = bound is not None and bound[0] is side and h >= bound[1]
                fresh_groups.setdefault((self.klass[side][h], above), []).append(h)
        pool = touched + [h for group in fresh_groups.values() for h in group[:k]]
        pool.sort()
        for combo in itertools.combinations(pool, k):
            chosen = set(combo)
            if not _fresh_prefix(chosen, fresh_groups.values()):
                continue
            for v, h in zip(step.vertices, combo):
                images[v] = h
                taken.add(h)
                self.apply(side, h, parent_image, 1)
            if self.place_step(gi, orient, plan, pos + 1, images, taken, previous_key):
                return True
            for v, h in zip(step.vertices, combo):
                self.undo(side, h, parent_image, 1)
                taken.discard(h)
                del images[v]
        return False

    def packing(self, ids: Sequence[str]) -> Packing:
        embeddings = []
        for gi, (orient, images) in enumerate(self.chosen):
            plan = self.plans[gi][orient]
            sides = {v: step.side for step in plan.steps for v in step.vertices}
            vertex_map = {v: (sides[v], h) for v, h in images.items()}
            embeddings.append(Embedding(ids[gi], plan.guest, vertex_map, {'engine': 'brute_force'}))
        return Packing(tuple(embeddings))


def brute_force_pack(G: BipartiteGraph, guests: Sequence[Guest], budget: Optional[int] = -1,
                     orientations: str = 'fixed', description: str = '') -> SearchReport:
    """
    Exhaustive search for an edge-disjoint packing of the guests into G

    Args:
        G: host
        guests: trees or forests
        budget: node limit; None for unlimited, default TREEPACK_SEARCH_BUDGET
        orientations: 'fixed' keeps every A-class on side A, 'both' also
            tries each guest with its classes swapped
        description: label carried by the report

    Returns:
        SearchReport; UNSAT only when the search space was exhausted
    """
    if budget == -1:
        budget = Config.SEARCH_BUDGET
    if orientations not in ('fixed', 'both'):
        raise ValueError(f"orientations must be 'fixed' or 'both', got {orientations!r}")
    description = description or f"{len(guests)} guests into a {G.side_a_size}x{G.side_b_size} host"
    start = time.perf_counter()

    total = sum(g.edge_count for g in guests)
    if total > G.edge_count:
        logger.debug(f"{description}: {total} guest edges exceed {G.edge_count} host edges")
        return SearchReport(description, SearchStatus.UNSAT, None, 0, time.perf_counter() - start)

    search = _Search(G, guests, orientations, budget)
    try:
        found = search.place_guest(0)
    except _BudgetExceeded:
        logger.warning(cross(f"{description}: budget of {budget} nodes exhausted"))
        return SearchReport(description, SearchStatus.BUDGET_EXCEEDED, None, search.nodes,
                            time.perf_counter() - start)
    elapsed = time.perf_counter() - start
    if not found:
        logger.info(f"{description}: UNSAT after {search.nodes} nodes")
        return SearchReport(description, SearchStatus.UNSAT, None, search.nodes, elapsed)

    packing = search.packing([f"G{i + 1}" for i in range(len(guests))])
    result = verify_packing(G, packing)
    if not result:
        raise AssertionError(f"search produced an invalid packing: {result.message}")
    logger.info(check(f"{description}: FOUND after {search.nodes} nodes"))
    return SearchReport(description, SearchStatus.FOUND, packing, search.nodes, elapsed)


# ---------------------------------------------------------------------------
# Guests used by the constructions
# ---------------------------------------------------------------------------

def path_tree(vertex_count: int) -> RootedTree:
    """Path 0-1-...-(n-1) rooted at 0"""
    return build_rooted_tree([-1] + list(range(vertex_count - 1)), 0)


def double_star(k: int) -> RootedTree:
    """
    D_{k,k}: A-center 0 (root) joined to B-center 1

    Vertices 2..k are the B-leaves of 0, k+1..2k-1 the A-leaves of 1.
    """
    if k < 1:
        raise ValueError(f"double star needs k >= 1, got {k}")
    parent = [-1, 0] + [0] * (k - 1) + [1] * (k - 1)
    return build_rooted_tree(parent, 0)


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def k53_paths_unsat(budget: Optional[int] = -1, host_sides: Tuple[int, int] = (5, 3),
                    paths: int = 3) -> SearchReport:
    """
    Exhaustively search packings of 6-vertex paths into K_{5,3}

    Three paths need all 15 edges. Every A-vertex of K_{5,3} has degree 3,
    so it cannot host two degree-2 path vertices, yet three paths bring six
    degree-2 vertices to the five A-vertices. The search must return UNSAT.
    host_sides and paths allow the sanity variants (K_{6,3}, two paths).
    """
    G = build_graph(host_sides[0], host_sides[1], complete=True)
    P6 = path_tree(6)
    return brute_force_pack(G, [P6] * paths, budget, orientations='both',
                            description=f"{paths} six-vertex paths into K_{{{host_sides[0]},{host_sides[1]}}}")


def double_star_decomposition(n: int) -> Packing:
    """
    Decompose K_{2n-1,n} into n copies of D_{n,n}

    The induction adds two A-rows and one B-column per step; unrolled, copy j
    (j < n) has A-center a_j and B-center b_j, a_j takes every other B
    vertex as leaves and b_j takes a_n..a_{2n-2} as leaves. Rows a_0..a_{n-1}
    are covered by the A-centers, rows a_n..a_{2n-2} by the B-centers.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    D = double_star(n)
    embeddings = []
    for j in range(n):
        vertex_map = {0: (Side.A, j), 1: (Side.B, j)}
        b_leaves = [b for b in range(n) if b != j]
        for offset, b in enumerate(b_leaves):
            vertex_map[2 + offset] = (Side.B, b)
        for offset in range(n - 1):
            vertex_map[n + 1 + offset] = (Side.A, n + offset)
        embeddings.append(Embedding(f"D{j + 1}", D, vertex_map, {'engine': 'construction'}))
    packing = Packing(tuple(embeddings))
    result = verify_packing(build_graph(2 * n - 1, n, complete=True), packing)
    if not result:
        raise AssertionError(f"double star decomposition for n={n} failed: {result.message}")
    return packing


@dataclass(frozen=True)
class DoubleStarBound:
    n: int
    eps: Fraction
    max_copies: int
    copies_needed: int

    @property
    def impossible(self) -> bool:
        """Approximate decomposition ruled out"""
        return self.max_copies < self.copies_needed

    def to_dict(self) -> dict:
        return {'n': self.n, 'eps': float(self.eps), 'max_copies_upper_bound': self.max_copies,
                'copies_needed_full': self.copies_needed, 'impossible': self.impossible}


def double_star_copy_bound(n: int, eps: Number) -> DoubleStarBound:
    """
    Counting bound on edge-disjoint copies of D_{(1-eps)n,(1-eps)n} in K_{n,n}

    Two A-centers cannot share a host vertex (that needs 2(1-eps)n > n
    edges), so N copies have N distinct A-center images. Each copy covers
    all but eps*n vertices of A, hence touches at least N - 1 - eps*n of the
    other copies' A-center images, using an edge at each. An A-center image
    keeps only eps*n edges for other copies. So N(N - 1 - eps*n) <= N*eps*n,
    that is N <= 2*eps*n + 1. Covering all n^2 edges would need
    ceil(n^2 / (2(1-eps)n - 1)) copies.

    Raises:
        ValueError: eps outside (0, 1/2)
    """
    e = as_fraction(eps)
    if not 0 < e < Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    bound = floor_frac(2 * e * n + 1)
    copies_needed = ceil_frac(Fraction(n * n) / (2 * (1 - e) * n - 1))
    return DoubleStarBound(n, e, bound, copies_needed)


@dataclass
class MaxCopies:
    copies: int
    exact: bool
    reports: List[SearchReport]
    packing: Optional[Packing] = None


def max_disjoint_copies(G: BipartiteGraph, guest: Guest, budget: Optional[int] = -1,
                        orientations: str = 'fixed') -> MaxCopies:
    """
    Largest k such that k copies of the guest pack into G

    Searches downward from floor(|E(G)| / |E(guest)|). The answer is exact
    unless some larger k ran out of budget.
    """
    upper = G.edge_count // max(1, guest.edge_count)
    reports, exact = [], True
    for k in range(upper, 0, -1):
        report = brute_force_pack(G, [guest] * k, budget, orientations, f"{k} copies")
        reports.append(report)
        if report.status is SearchStatus.FOUND:
            return MaxCopies(k, exact, reports, report.packing)
        if report.status is SearchStatus.BUDGET_EXCEEDED:
            exact = False
    return MaxCopies(0, exact, reports)


def log_star_tree(n: int, alpha: Number) -> RootedTree:
    """
    Two copies of a spider of stars, joined at their centers

    Each copy has a vertex r joined to the centers of ceil(alpha*log2 n)
    stars whose sizes differ by at most one, n vertices in all. The two r's
    are joined by an edge; the first r is the root. The r's are the only
    vertices of degree q+1.

    Sizes that differ by at most one are fixed by n and q up to order, so
    when one of them equals q no layout keeps the centers below the degree
    of r and the budget is rejected.

    Raises:
        ValueError: n too small for the stars, or a star of exactly q leaves
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    q = max(1, math.ceil(float(as_fraction(alpha)) * math.log2(n)))
    leaves = n - 1 - q
    if leaves < 0:
        raise ValueError(f"{q} stars do not fit a budget of {n} vertices per copy")
    sizes = [leaves // q + (1 if i < leaves % q else 0) for i in range(q)]
    if q in sizes:
        raise ValueError(f"a budget of {n} vertices per copy gives a star of {q} leaves, "
                         f"tying its center with r")

    parent = []

    def build(r_parent: int) -> int:
        r = len(parent)
        parent.append(r_parent)
        for size in sizes:
            c = len(parent)
            parent.append(r)
            parent.extend([c] * size)
        return r

    first = build(-1)
    build(first)
    return build_rooted_tree(parent, 0)


def two_double_star_tree(l: int) -> RootedTree:
    """
    Two D_{l+1,l+1} copies, each minus a leaf, joined through the leaves'
    former neighbours

    The first copy loses an A-leaf of its B-center, the second a B-leaf of
    its A-center; the edge joins the first B-center to the second A-center.
    The result is balanced with 2l+1 vertices per class and two vertices of
    degree l+1 in each class.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    # copy 1: A-center 0, B-center 1, B-leaves of 0, A-leaves of 1 (one fewer)
    parent = [-1, 0] + [0] * l + [1] * (l - 1)
    c2 = len(parent)
    parent.append(1)                      # second A-center hangs off the first B-center
    d2 = len(parent)
    parent.append(c2)                     # second B-center
    parent.extend([c2] * (l - 1))         # B-leaves of c2 (one fewer)
    parent.extend([d2] * l)               # A-leaves of d2
    return build_rooted_tree(parent, 0)


@dataclass(frozen=True)
class DegreeObstruction:
    copies_needed: Fraction
    threshold: Fraction
    forced_on_big_side: int
    big_side_size: int

    @property
    def obstructed(self) -> bool:
        return self.copies_needed.denominator != 1 or self.forced_on_big_side > self.big_side_size

    def to_dict(self) -> dict:
        return {'copies_needed': str(self.copies_needed), 'threshold': str(self.threshold),
                'forced_on_big_side': self.forced_on_big_side, 'big_side_size': self.big_side_size,
                'obstructed': self.obstructed}


def high_degree_obstruction(T: RootedTree, n_big: int, n_small: int) -> DegreeObstruction:
    """
    Pigeonhole certificate against decomposing K_{n_big,n_small} into copies of T

    Vertices of degree above n_small/2 cannot share a vertex of the larger
    side, whose degree is n_small. Each copy puts at least min(#high in
    V_e, #high in V_o) of them on the larger side; if the copies needed
    force more than n_big of them there, no decomposition exists. A
    non-integral copy count rules it out by edge counting alone.
    """
    copies = Fraction(n_big * n_small, T.edge_count)
    threshold = Fraction(n_small, 2)
    high_even = sum(1 for v in T.even_class if T.degrees[v] > threshold)
    high_odd = sum(1 for v in T.odd_class if T.degrees[v] > threshold)
    forced = math.floor(copies) * min(high_even, high_odd)
    return DegreeObstruction(copies, threshold, forced, n_big)


# ---------------------------------------------------------------------------
# Probes and exact checks
# ---------------------------------------------------------------------------

@dataclass
class ProbeReport:
    n: int
    alpha: float
    p: float
    seed: int
    trials: int
    contained: int
    undecided: int

    @property
    def frequency(self) -> float:
        decided = self.trials - self.undecided
        return self.contained / decided if decided else 0.0

    def to_dict(self) -> dict:
        return {'n': self.n, 'alpha': self.alpha, 'p': self.p, 'seed': self.seed,
                'trials': self.trials, 'contained': self.contained,
                'undecided': self.undecided, 'frequency': self.frequency}


def empirical_containment_probe(n: int, alpha: Number, p: float, trials: int, seed: int,
                                budget: Optional[int] = -1) -> ProbeReport:
    """
    Fraction of sampled G(n,n,p) hosts that contain log_star_tree(n, alpha)

    Each trial runs the exhaustive search with both orientations; trials
    that exhaust the budget are reported as undecided and left out of the
    frequency.
    """
    T = log_star_tree(n, alpha)
    trial_seeds = np.random.default_rng(seed).integers(0, 2 ** 31, size=trials)
    contained = undecided = 0
    for trial in range(trials):
        G = gen_graph(n, n, p, int(trial_seeds[trial]))
        report = brute_force_pack(G, [T], budget, orientations='both', description=f"probe trial {trial}")
        if report.status is SearchStatus.FOUND:
            contained += 1
        elif report.status is SearchStatus.BUDGET_EXCEEDED:
            undecided += 1
    logger.info(f"Containment probe n={n}, alpha={alpha}, p={p}: {contained}/{trials - undecided} "
                f"({undecided} undecided, seed {seed})")
    return ProbeReport(n, float(alpha), float(p), seed, trials, contained, undecided)


def exhaustive_witness(G: BipartiteGraph, X: Sequence[int], Y: Sequence[int],
                       eps: Number) -> Optional[RegularityWitness]:
    """
    Exact eps-regularity check for small pairs

    Enumerates every significant A' ⊆ X; for each size of B' the extreme
    densities are reached by the columns of largest and smallest degree
    into A', so those two sets settle all B' of that size.
    """
    X, Y = list(X), list(Y)
    e = as_fraction(eps)
    sub = G.adjacency[np.ix_(X, Y)].astype(np.int64)
    base = Fraction(int(sub.sum()), len(X) * len(Y))
    kx = max(1, ceil_frac(e * len(X)))
    ky = max(1, ceil_frac(e * len(Y)))
    for size in range(kx, len(X) + 1):
        for rows in itertools.combinations(range(len(X)), size):
            col = sub[list(rows)].sum(axis=0)
            high_order = np.argsort(-col, kind='stable')
            low_order = np.argsort(col, kind='stable')
            high = np.cumsum(col[high_order])
            low = np.cumsum(col[low_order])
            for b in range(ky, len(Y) + 1):
                for total, cols in ((int(high[b - 1]), high_order[:b]),
                                    (int(low[b - 1]), low_order[:b])):
                    deviation = abs(base - Fraction(total, size * b))
                    if deviation > e:
                        return RegularityWitness((0, 0), tuple(X[r] for r in rows),
                                                 tuple(sorted(Y[c] for c in cols.tolist())),
                                                 deviation, base)
    return None


def is_regular_exhaustive(G: BipartiteGraph, X: Sequence[int], Y: Sequence[int], eps: Number) -> bool:
    return exhaustive_witness(G, X, Y, eps) is None


def min_seed_decomposition(T: RootedTree, beta: Number) -> Optional[frozenset]:
    """
    Smallest seed set S (containing the root) whose pieces all have at most
    beta*t vertices, by exhaustive search over subsets of increasing size
    """
    limit = as_fraction(beta) * T.edge_count
    others = [v for v in range(T.vertex_count) if v != T.root]
    for extra in range(0, len(others) + 1):
        for chosen in itertools.combinations(others, extra):
            seeds = frozenset(chosen) | {T.root}
            forest = induced_forest(T, (v for v in range(T.vertex_count) if v not in seeds))
            if all(c.vertex_count <= limit for c in forest.components):
                return seeds
    return None
