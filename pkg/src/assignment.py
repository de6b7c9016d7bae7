"""
Piece assignment
Distributes demand pairs (x_i, y_i) over s groups so that both coordinate
sums of every group stay within capacity (1 - 7*mu)*m
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from src.config import Config
from src.errors import AssignmentFailed, PreconditionViolated
from src.logger import setup_logger
from src.utils import Number, as_fraction, warning

logger = setup_logger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True)
class AssignmentInstance:
    """
    Demand pairs plus capacity parameters, validated on construction

    Clauses checked:
        (a) (1 - mu) * sum x <= sum y <= (1 + mu) * sum x
        (b) x_i + y_i <= mu * m for every i
        (c) max(sum x, sum y) < (1 - 10*mu) * m * s
    """

    pairs: Tuple[Pair, ...]
    m: int
    s: int
    mu: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'pairs', tuple((int(x), int(y)) for x, y in self.pairs))
        object.__setattr__(self, 'mu', as_fraction(self.mu))
        if self.s < 1 or self.m < 1:
            raise PreconditionViolated('shape', f"need s >= 1 and m >= 1, got s={self.s}, m={self.m}")
        if not 0 <= self.mu < Fraction(1, 10):
            raise PreconditionViolated('shape', f"mu must lie in [0, 1/10), got {self.mu}")
        if any(x < 0 or y < 0 for x, y in self.pairs):
            raise PreconditionViolated('shape', "pairs must be non-negative")

        sum_x, sum_y = self.totals
        if not (1 - self.mu) * sum_x <= sum_y <= (1 + self.mu) * sum_x:
            raise PreconditionViolated('a', f"sums unbalanced: sum x = {sum_x}, sum y = {sum_y}",
                                       {'sum_x': sum_x, 'sum_y': sum_y})
        for i, (x, y) in enumerate(self.pairs):
            if x + y > self.mu * self.m:
                raise PreconditionViolated('b', f"pair {i} = ({x}, {y}) exceeds mu*m = {float(self.mu * self.m):g}",
                                           {'index': i})
        if not max(sum_x, sum_y) < (1 - 10 * self.mu) * self.m * self.s:
            raise PreconditionViolated('c', f"total demand {max(sum_x, sum_y)} is not below "
                                            f"(1-10mu)*m*s = {float((1 - 10 * self.mu) * self.m * self.s):g}")

    @property
    def totals(self) -> Tuple[int, int]:
        return sum(x for x, _ in self.pairs), sum(y for _, y in self.pairs)

    @property
    def capacity(self) -> Fraction:
        return (1 - 7 * self.mu) * self.m


def _decreasing(pairs: Sequence[Pair]) -> List[int]:
    return sorted(range(len(pairs)), key=lambda i: (-(pairs[i][0] + pairs[i][1]), i))


def _first_fit_decreasing(pairs: Sequence[Pair], s: int, capacity: Fraction) -> Optional[List[List[int]]]:
    groups: List[List[int]] = [[] for _ in range(s)]
    load = [[0, 0] for _ in range(s)]
    for i in _decreasing(pairs):
        x, y = pairs[i]
        g = min(range(s), key=lambda j: (max(load[j]), j))
        if load[g][0] + x > capacity or load[g][1] + y > capacity:
            return None
        groups[g].append(i)
        load[g][0] += x
        load[g][1] += y
    return groups


class _Budget:
    def __init__(self, limit: Optional[int]):
        self.limit = limit
        self.nodes = 0

    def spend(self) -> bool:
        self.nodes += 1
        return self.limit is None or self.nodes <= self.limit


def branch_and_bound(pairs: Sequence[Pair], s: int, capacity: Number,
                     budget: Optional[int] = None) -> Tuple[Optional[List[List[int]]], bool]:
    """
    Exhaustive search for a feasible grouping

    Groups with identical loads are interchangeable, so only one of them is
    tried per item. budget=None searches without a node limit.

    Returns:
        (groups or None, exhausted) where exhausted is False when the node
        budget stopped the search early
    """
    cap = as_fraction(capacity)
    order = _decreasing(pairs)
    rest_x = [0] * (len(order) + 1)
    rest_y = [0] * (len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        x, y = pairs[order[pos]]
        rest_x[pos] = rest_x[pos + 1] + x
        rest_y[pos] = rest_y[pos + 1] + y

    load = [[0, 0] for _ in range(s)]
    choice = [0] * len(order)
    counter = _Budget(budget)

    def search(pos: int) -> Optional[bool]:
        if not counter.spend():
            return None
        if pos == len(order):
            return True
        if rest_x[pos] > sum(cap - lx for lx, _ in load) or rest_y[pos] > sum(cap - ly for _, ly in load):
            return False
        x, y = pairs[order[pos]]
        tried = set()
        for g in range(s):
            key = tuple(load[g])
            if key in tried or load[g][0] + x > cap or load[g][1] + y > cap:
                continue
            tried.add(key)
            load[g][0] += x
            load[g][1] += y
            choice[pos] = g
            outcome = search(pos + 1)
            load[g][0] -= x
            load[g][1] -= y
            if outcome is None or outcome:
                return outcome
        return False

    outcome = search(0)
    if outcome is None:
        return None, False
    if not outcome:
        return None, True
    groups: List[List[int]] = [[] for _ in range(s)]
    for pos, i in enumerate(order):
        groups[choice[pos]].append(i)
    return groups, True


def _verify(pairs: Sequence[Pair], groups: List[List[int]], capacity: Fraction):
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(len(pairs))):
        raise AssignmentFailed("grouping is not a partition of the index set")
    for j, g in enumerate(groups):
        sx = sum(pairs[i][0] for i in g)
        sy = sum(pairs[i][1] for i in g)
        if sx > capacity or sy > capacity:
            raise AssignmentFailed(f"group {j} carries ({sx}, {sy}) above capacity {float(capacity):g}")


def assign_to_groups(pairs: Sequence[Pair], s: int, capacity: Number,
                     budget: Optional[int] = -1) -> List[List[int]]:
    """
    Partition pair indices into s groups with both sums <= capacity

    Args:
        pairs: (x_i, y_i) demands
        s: number of groups
        capacity: per-group bound on sum x and on sum y
        budget: branch-and-bound node limit for the fallback; None means
            unlimited, the default reads TREEPACK_ASSIGN_BUDGET

    Returns:
        s lists of indices, each sorted

    Raises:
        AssignmentFailed: no grouping found (infeasible or budget exhausted)
    """
    pairs = [(int(x), int(y)) for x, y in pairs]
    cap = as_fraction(capacity)
    if budget == -1:
        budget = Config.ASSIGN_BUDGET

    groups = _first_fit_decreasing(pairs, s, cap)
    if groups is None:
        logger.info(warning(f"First-fit decreasing overflowed on {len(pairs)} pairs, "
                            f"falling back to branch-and-bound"))
        groups, exhausted = branch_and_bound(pairs, s, cap, budget)
        if groups is None:
            reason = "no feasible grouping exists" if exhausted else "node budget exhausted"
            raise AssignmentFailed(f"{reason} for {len(pairs)} pairs in {s} groups of capacity {float(cap):g}",
                                   {'exhausted': exhausted})

    groups = [sorted(g) for g in groups]
    _verify(pairs, groups, cap)
    return groups


def partition_pieces(instance: AssignmentInstance, budget: Optional[int] = -1) -> List[List[int]]:
    """
    Groups J_1..J_s with sum x and sum y at most (1 - 7*mu)*m in each

    Raises:
        AssignmentFailed: greedy and fallback both exhausted
    """
    return assign_to_groups(instance.pairs, instance.s, instance.capacity, budget)
