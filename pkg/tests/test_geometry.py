import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshalloc.geometry import (
    Allocation,
    DimensionError,
    as_points,
    candidate_medians,
    dumps_points,
    k_closest,
    l1_distance,
    l1_median,
    loads_points,
    pairwise_sum,
    pairwise_sum_between,
)

from oracles import direct_total


def multisets(dim=None, min_size=1, max_size=20, lo=-50, hi=50):
    dims = st.just(dim) if dim else st.integers(1, 3)
    return dims.flatmap(lambda d: st.lists(
        st.tuples(*[st.integers(lo, hi)] * d), min_size=min_size, max_size=max_size))


@pytest.mark.parametrize("p, q, expected", [
    ((0, 0), (0, 0), 0),
    ((0, 0), (1, 2), 3),
    ((1, 5, -2), (4, 5, 0), 5),
])
def test_l1_distance(p, q, expected):
    assert l1_distance(p, q) == expected


def test_l1_distance_dimension_mismatch():
    with pytest.raises(DimensionError):
        l1_distance((0, 0), (0, 0, 0))


def test_pairwise_sum_examples():
    assert pairwise_sum([(0, 0), (1, 0)]) == 1
    assert pairwise_sum([(0, 0), (1, 0), (0, 1)]) == 4
    block = list(itertools.product(range(3), range(3)))
    assert direct_total(block) == 72
    assert pairwise_sum(block) == 72
    assert pairwise_sum([(7, 7)]) == 0


def test_pairwise_sum_between_examples():
    assert pairwise_sum_between([(0, 0)], [(1, 0), (0, 1)]) == 2
    S = [(0, 0), (1, 0)]
    assert pairwise_sum_between(S, S) == 2
    assert pairwise_sum_between([(0, 0), (2, 0)], [(1, 1)]) == 4
    with pytest.raises(DimensionError):
        pairwise_sum_between([(0, 0)], [(0, 0, 0)])


@given(multisets())
def test_pairwise_sum_matches_enumeration(S):
    assert pairwise_sum(S) == direct_total(S)


@given(multisets(), st.data())
def test_translation_invariance(S, data):
    t = data.draw(st.tuples(*[st.integers(-1000, 1000)] * len(S[0])))
    moved = [tuple(a + b for a, b in zip(p, t)) for p in S]
    assert pairwise_sum(moved) == pairwise_sum(S)


@given(multisets(), st.integers(1, 1000))
def test_scaling(S, c):
    assert pairwise_sum([tuple(c * a for a in p) for p in S]) == c * pairwise_sum(S)


@given(multisets(), multisets())
def test_between_of_set_with_itself_is_twice_the_weight(S, _):
    assert pairwise_sum_between(S, S) == 2 * pairwise_sum(S)


@pytest.mark.parametrize("S, expected", [
    ([(0, 0), (2, 0), (0, 2)], (0, 0)),
    ([(1, 5), (3, 1), (7, 3)], (3, 3)),
    ([(0, 0), (4, 0)], (0, 0)),
])
def test_l1_median(S, expected):
    assert l1_median(S) == expected


def test_l1_median_empty():
    with pytest.raises(ValueError):
        l1_median([])


@given(multisets(dim=2, max_size=15))
def test_median_is_locally_optimal(S):
    med = l1_median(S)

    def cost(c):
        return sum(l1_distance(c, p) for p in S)

    base = cost(med)
    for axis in range(2):
        for step in (-1, 1):
            moved = list(med)
            moved[axis] += step
            assert cost(tuple(moved)) >= base


def test_k_closest_examples():
    P = [(0, 0), (1, 0), (0, 2), (3, 3)]
    assert k_closest(P, (0, 0), 2) == [(0, 0), (1, 0)]
    assert sorted(k_closest(P, (0, 0), 4)) == sorted(P)
    assert k_closest([(1, 0), (-1, 0)], (0, 0), 1) == [(-1, 0)]
    with pytest.raises(ValueError):
        k_closest(P, (0, 0), 5)


@settings(max_examples=50)
@given(multisets(dim=2, min_size=2, max_size=12, lo=-4, hi=4), st.data())
def test_k_closest_ignores_input_order(P, data):
    k = data.draw(st.integers(1, len(P)))
    c = data.draw(st.tuples(st.integers(-4, 4), st.integers(-4, 4)))
    perm = data.draw(st.permutations(P))
    assert sorted(k_closest(P, c, k)) == sorted(k_closest(perm, c, k))
    far = max(l1_distance(p, c) for p in k_closest(P, c, k))
    assert sum(l1_distance(p, c) < far for p in P) < k


def test_candidate_medians():
    assert candidate_medians([(0, 0), (1, 2)]) == [(0, 0), (0, 2), (1, 0), (1, 2)]
    assert candidate_medians([(0, 0)]) == [(0, 0)]
    assert candidate_medians([(0, 0), (0, 1), (0, 2)]) == [(0, 0), (0, 1), (0, 2)]
    assert len(candidate_medians([(0, 0, 0), (1, 1, 1), (2, 2, 2)])) == 27


def test_json_round_trip_and_validation():
    pts = [(0, 0), (1, 2), (1, 2)]
    assert loads_points(dumps_points(pts)) == pts
    assert dumps_points(pts) == "[[0, 0], [1, 2], [1, 2]]"
    with pytest.raises(DimensionError):
        loads_points("[[0, 0], [1, 2, 3]]")
    with pytest.raises(TypeError):
        as_points([[0.5, 1]])


def test_allocation_average():
    a = Allocation([(0, 0), (1, 0), (0, 1)], 4, "x")
    assert a.k == 3
    assert a.to_dict()["average"] == "1.333333"
