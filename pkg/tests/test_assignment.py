from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.assignment import AssignmentInstance, assign_to_groups, branch_and_bound, partition_pieces
from src.errors import AssignmentFailed, PreconditionViolated
from src.generators import gen_assignment_instance


def loads(pairs, groups):
    return [(sum(pairs[i][0] for i in g), sum(pairs[i][1] for i in g)) for g in groups]


class TestInstance:
    def test_valid(self):
        instance = AssignmentInstance(((2, 2), (1, 3), (3, 1)), m=100, s=2, mu=0.05)
        assert instance.totals == (6, 6)
        assert instance.capacity == Fraction(65)
        assert instance.mu == Fraction(1, 20)

    @pytest.mark.parametrize("pairs, m, s, mu, clause", [
        (((10, 0),), 100, 1, 0.05, 'a'),
        (((3, 3),), 100, 1, 0.05, 'b'),
        (((2, 2),) * 25, 100, 1, 0.05, 'c'),
        (((1, 1),), 100, 0, 0.05, 'shape'),
        (((1, 1),), 100, 1, 0.2, 'shape'),
        (((-1, 1),), 100, 1, 0.05, 'shape'),
    ])
    def test_clauses(self, pairs, m, s, mu, clause):
        with pytest.raises(PreconditionViolated) as exc:
            AssignmentInstance(pairs, m, s, mu)
        assert exc.value.clause == clause


class TestAssign:
    def test_fallback_after_greedy_overflow(self):
        pairs = [(3, 0), (0, 3), (3, 0), (0, 3)]
        groups = assign_to_groups(pairs, 2, 3)
        assert sorted(i for g in groups for i in g) == [0, 1, 2, 3]
        assert all(x <= 3 and y <= 3 for x, y in loads(pairs, groups))

    def test_infeasible(self):
        with pytest.raises(AssignmentFailed) as exc:
            assign_to_groups([(2, 2)] * 3, 1, 5)
        assert exc.value.details == {'exhausted': True}

    def test_budget_exhausted(self):
        with pytest.raises(AssignmentFailed) as exc:
            assign_to_groups([(3, 0), (0, 3), (3, 0), (0, 3)], 2, 3, budget=1)
        assert exc.value.details == {'exhausted': False}

    def test_branch_and_bound_budget(self):
        groups, exhausted = branch_and_bound([(3, 0), (0, 3), (3, 0), (0, 3)], 2, 3, budget=1)
        assert groups is None
        assert not exhausted

    def test_branch_and_bound_proves_infeasibility(self):
        groups, exhausted = branch_and_bound([(2, 1), (2, 1), (2, 1)], 2, 3)
        assert groups is None
        assert exhausted

    def test_empty_pairs(self):
        assert assign_to_groups([], 3, 1) == [[], [], []]

    def test_groups_sorted(self):
        groups = assign_to_groups([(1, 1)] * 5, 2, 10)
        assert all(g == sorted(g) for g in groups)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_generated_instances_are_always_assignable(seed):
    instance = gen_assignment_instance(seed)
    groups = partition_pieces(instance, budget=None)
    assert len(groups) == instance.s
    assert sorted(i for g in groups for i in g) == list(range(len(instance.pairs)))
    for x, y in loads(instance.pairs, groups):
        assert x <= instance.capacity and y <= instance.capacity


@settings(max_examples=50, deadline=None)
@given(pairs=st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=8),
       s=st.integers(1, 3), capacity=st.integers(1, 12))
def test_greedy_and_exact_agree_on_feasibility(pairs, s, capacity):
    exact, exhausted = branch_and_bound(pairs, s, capacity)
    assert exhausted
    if exact is None:
        with pytest.raises(AssignmentFailed):
            assign_to_groups(pairs, s, capacity, budget=None)
    else:
        groups = assign_to_groups(pairs, s, capacity, budget=None)
        assert all(x <= capacity and y <= capacity for x, y in loads(pairs, groups))
