import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshalloc.allocators import (
    InsufficientProcessorsError,
    Mesh,
    best_fit_runs,
    curve_runs,
    hilbert_bf_allocate,
    hilbert_index,
    mc1x1_allocate,
    mc1x1_select,
    mm_allocate,
    mm_inc_allocate,
)
from meshalloc.geometry import k_closest, linf_distance, pairwise_sum
from meshalloc.instances import gen_random_mesh, gen_random_points
from meshalloc.optimal import brute_force_opt

from oracles import direct_total, grid_scan_nearest, subset_minimum

small_sets = st.integers(2, 10).flatmap(lambda n: st.lists(
    st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=n, max_size=n))


def test_mm_compact_cluster():
    a = mm_allocate([(0, 0), (1, 0), (0, 1), (5, 5)], 3)
    assert sorted(a.selected) == [(0, 0), (0, 1), (1, 0)]
    assert a.total_distance == 4


def test_mm_single_point():
    a = mm_allocate([(3, 4), (9, 9)], 1)
    assert a.total_distance == 0 and a.k == 1


def test_mm_insufficient():
    with pytest.raises(InsufficientProcessorsError):
        mm_allocate([(0, 0)], 2)


@settings(max_examples=60, deadline=None)
@given(small_sets, st.data())
def test_mm_matches_slow_scan(P, data):
    k = data.draw(st.integers(1, len(P)))
    a = mm_allocate(P, k)
    best, center = grid_scan_nearest(P, k, "l1")
    assert a.total_distance == best
    assert a.center == center
    assert a.total_distance == direct_total(a.selected)
    assert sorted(a.selected) == sorted(k_closest(P, center, k))


@settings(max_examples=40, deadline=None)
@given(small_sets, st.data())
def test_mm_minimal_over_candidates(P, data):
    k = data.draw(st.integers(1, len(P)))
    total = mm_allocate(P, k).total_distance
    xs = sorted({p[0] for p in P})
    ys = sorted({p[1] for p in P})
    for c in itertools.product(xs, ys):
        assert total <= pairwise_sum(k_closest(P, c, k))


def test_mm_fast_mode_is_restricted_to_points():
    P = gen_random_points(12, 2, 8, seed=3)
    fast = mm_allocate(P, 4, candidates="points")
    assert fast.center in P
    assert fast.total_distance >= mm_allocate(P, 4).total_distance


def test_mm_3d_uses_grid_product():
    P = [(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (2, 2, 2)]
    a = mm_allocate(P, 4)
    assert a.total_distance == subset_minimum(P, 4)


def test_mm_inc_keeps_optimal_mm():
    P = [(0, 0), (1, 0), (0, 1), (5, 5)]
    a = mm_allocate(P, 3)
    b = mm_inc_allocate(P, 3)
    assert b.selected == a.selected and b.details["swaps"] == 0


def test_mm_inc_full_set():
    P = [(0, 0), (4, 4), (9, 0)]
    b = mm_inc_allocate(P, 3)
    assert sorted(b.selected) == sorted(P)


def test_mm_inc_on_random_mesh():
    mesh = gen_random_mesh((10, 10), 0.5, seed=7)
    free = mesh.free_points()
    mm = mm_allocate(free, 6)
    inc = mm_inc_allocate(free, 6)
    opt = brute_force_opt(free, 6, budget=10**8)
    assert opt.total_distance <= inc.total_distance <= mm.total_distance


@settings(max_examples=60, deadline=None)
@given(small_sets, st.data())
def test_mm_inc_is_a_local_minimum(P, data):
    k = data.draw(st.integers(1, len(P)))
    inc = mm_inc_allocate(P, k)
    assert inc.total_distance <= mm_allocate(P, k).total_distance
    chosen = set(inc.indices)
    for s in chosen:
        for e in set(range(len(P))) - chosen:
            swapped = [P[i] for i in (chosen - {s}) | {e}]
            assert pairwise_sum(swapped) >= inc.total_distance


def test_mc1x1_single():
    a = mc1x1_allocate(Mesh((3, 3), frozenset({(0, 0)})), 1)
    assert a.details["sigma"] == 0 and a.total_distance == 0


def test_mc1x1_empty_5x5():
    mesh = Mesh((5, 5))
    a = mc1x1_allocate(mesh, 9)
    sigma, center = grid_scan_nearest(mesh.free_points(), 9, "linf")
    assert sigma == 8 and a.details["sigma"] == 8
    assert a.center == center == (1, 1)
    assert sorted(a.selected) == sorted(itertools.product(range(3), range(3)))
    assert a.total_distance == 72


def test_mc1x1_empty_16x16():
    mesh = Mesh((16, 16))
    a = mc1x1_allocate(mesh, 9)
    assert a.details["sigma"] == grid_scan_nearest(mesh.free_points(), 9, "linf")[0] == 8


@settings(max_examples=60, deadline=None)
@given(small_sets, st.data())
def test_mc1x1_cost_consistency(P, data):
    k = data.draw(st.integers(1, len(P)))
    a = mc1x1_select(P, k)
    assert a.details["sigma"] == sum(linf_distance(p, a.center) for p in a.selected)
    assert a.details["sigma"] == grid_scan_nearest(P, k, "linf")[0]
    opt = subset_minimum(P, k)
    if opt:
        assert Fraction(a.total_distance, opt) <= (2 - Fraction(2, k)) * 2
    else:
        assert a.total_distance == 0


def test_hilbert_order_one():
    assert [hilbert_index(p, 1) for p in [(0, 0), (0, 1), (1, 1), (1, 0)]] == [0, 1, 2, 3]


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
def test_hilbert_bijective_and_adjacent(order):
    n = 1 << order
    pts = sorted(itertools.product(range(n), range(n)), key=lambda p: hilbert_index(p, order))
    assert [hilbert_index(p, order) for p in pts] == list(range(n * n))
    for a, b in zip(pts, pts[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def test_hilbert_errors():
    with pytest.raises(ValueError):
        hilbert_index((4, 0), 2)
    with pytest.raises(ValueError):
        hilbert_index((0, 0, 0), 2)


def test_hilbert_bf_first_quadrant():
    a = hilbert_bf_allocate(Mesh((4, 4)), 4)
    assert sorted(a.selected) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert a.total_distance == 8


def test_hilbert_bf_takes_everything():
    mesh = gen_random_mesh((6, 5), 0.4, seed=2)
    a = hilbert_bf_allocate(mesh, mesh.free_count)
    assert sorted(a.selected) == mesh.free_points()


def _curve(order):
    n = 1 << order
    return sorted(itertools.product(range(n), range(n)), key=lambda p: hilbert_index(p, order))


def test_hilbert_bf_best_fit():
    curve = _curve(2)
    busy = {curve[3], *curve[12:]}
    mesh = Mesh((4, 4), frozenset(busy))
    assert [len(r) for r in curve_runs(mesh)] == [3, 8]
    a = hilbert_bf_allocate(mesh, 5)
    assert a.selected == curve[4:9]


def test_best_fit_spills_over_largest_runs():
    runs = [["a1", "a2"], ["b1", "b2", "b3"], ["c1"]]
    assert best_fit_runs(runs, 4) == ["b1", "b2", "b3", "c1"]
    assert best_fit_runs(runs, 6) == ["b1", "b2", "b3", "a1", "a2", "c1"]


def test_hilbert_bf_non_square_mesh():
    mesh = Mesh((3, 5), frozenset({(1, 1)}))
    a = hilbert_bf_allocate(mesh, 7)
    assert len(set(a.selected)) == 7 and (1, 1) not in a.selected


def test_hilbert_bf_requires_2d():
    with pytest.raises(ValueError):
        hilbert_bf_allocate(Mesh((2, 2, 2)), 2)


@pytest.mark.parametrize("alloc", [
    lambda m, k: mm_allocate(m.free_points(), k),
    lambda m, k: mm_inc_allocate(m.free_points(), k),
    mc1x1_allocate,
    hilbert_bf_allocate,
])
@pytest.mark.parametrize("seed", range(5))
def test_allocators_return_k_distinct_free(alloc, seed):
    mesh = gen_random_mesh((8, 8), 0.6, seed)
    k = 1 + seed * 4
    a = alloc(mesh, k)
    assert len(a.selected) == len(set(a.selected)) == k
    assert not set(a.selected) & mesh.occupied
    assert a.total_distance == direct_total(a.selected)


def test_mesh_json_round_trip():
    mesh = Mesh((4, 3), frozenset({(0, 0), (3, 2)}))
    assert Mesh.from_json(mesh.to_json()) == mesh
    assert mesh.free_count == 10
    with pytest.raises(ValueError):
        Mesh((2, 2), frozenset({(2, 0)}))
