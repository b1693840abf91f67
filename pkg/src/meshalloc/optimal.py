"""Exact solvers: subset oracle, the k=3 solver and unconstrained shapes."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import Allocation, Point, as_points, axis_values, make_allocation, pairwise_sum

DEFAULT_SUBSET_BUDGET = 10**7


class BudgetExceededError(RuntimeError):
    pass


def brute_force_opt(points: Sequence[Point], k: int,
                    budget: int = DEFAULT_SUBSET_BUDGET) -> Allocation:
    """Minimum pairwise total over all k-subsets.

    Depth-first over index subsets in lexicographic order with partial-sum
    pruning; the first minimal subset in that order is returned.
    """
    pts = as_points(points)
    n = len(pts)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} available points")
    if math.comb(n, k) > budget:
        raise BudgetExceededError(f"C({n},{k}) = {math.comb(n, k)} subsets exceed budget {budget}")

    P = np.array(pts, dtype=np.int64)
    D = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=2).tolist()
    best = [math.inf, None]
    chosen: list[int] = []

    def extend(start: int, partial: int) -> None:
        if len(chosen) == k:
            if partial < best[0]:
                best[0] = partial
                best[1] = list(chosen)
            return
        last = n - (k - len(chosen))
        for i in range(start, last + 1):
            row = D[i]
            cost = partial + sum(row[j] for j in chosen)
            if cost >= best[0]:
                continue
            chosen.append(i)
            extend(i + 1, cost)
            chosen.pop()

    extend(0, 0)
    return make_allocation(pts, best[1], "OPT")


def exact_k3(points: Sequence[Point]) -> Allocation:
    """Optimal 3-subset in the plane.

    For three points the pairwise total is twice the bounding-box
    half-perimeter, which is also twice the length of the star centred at their
    coordinate-wise median.  Scanning every grid center for its three nearest
    points therefore meets the optimum; each center costs one partial sort.
    """
    pts = as_points(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if len(pts[0]) != 2:
        raise ValueError("exact_k3 works in the plane only")
    P = np.array(pts, dtype=np.int64)
    xs, ys = (np.array(v, dtype=np.int64) for v in axis_values(pts))
    best = None
    for x in xs:
        dist = np.abs(P[None, :, 0] - x) + np.abs(P[None, :, 1] - ys[:, None])
        near = np.argpartition(dist, 2, axis=1)[:, :3]
        star = np.take_along_axis(dist, near, axis=1).sum(axis=1)
        j = int(np.argmin(star))
        cand = (2 * int(star[j]), sorted(int(i) for i in near[j]))
        if best is None or cand < best:
            best = cand
    alloc = make_allocation(pts, best[1], "K3")
    assert alloc.total_distance == best[0]
    return alloc


def _ring_sizes(limit: int) -> list[int]:
    """Distances from a grid point to its nearest distinct neighbours, sorted."""
    out: list[int] = []
    r = 1
    while len(out) < limit:
        out.extend([r] * (4 * r))
        r += 1
    return out[:limit]


def canonical_shape(points: Sequence[Point]) -> list[Point]:
    """Lexicographically least image under the 8 grid symmetries, translated
    so that its least point is the origin."""
    best = None
    for sx in (1, -1):
        for sy in (1, -1):
            for swap in (False, True):
                img = [((y, x) if swap else (x, y)) for x, y in points]
                img = [(sx * x, sy * y) for x, y in img]
                ox, oy = min(img)
                img = sorted((x - ox, y - oy) for x, y in img)
                if best is None or img < best:
                    best = img
    return best


def unconstrained_optimal(k: int, radius: int | None = None,
                          budget: int = 5 * 10**7) -> Allocation:
    """Best k distinct grid points with no occupied cells (branch and bound).

    An optimal set has no empty column strictly inside its x-range (shifting
    the right part one step left would shorten every crossing pair), and the
    same holds for rows, so it spans at most k - 1 in each axis.  The default
    ``radius`` is therefore k - 1.  The lexicographically least point is
    pinned to the origin; remaining points are added in increasing order with
    a lower bound made of each candidate's distance to the current set plus
    the best possible spacing among the points still to come.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > 12:
        raise BudgetExceededError(f"k={k} is beyond the supported range (k <= 12)")
    radius = k - 1 if radius is None else radius
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    cands = [(x, y) for x in range(radius + 1) for y in range(-radius, radius + 1)
             if (x, y) > (0, 0)]
    if k == 1:
        return Allocation([(0, 0)], 0, "UNCONSTRAINED", details={"nodes": 0})
    if len(cands) < k - 1:
        raise ValueError(f"radius {radius} too small for k={k}")

    C = np.array(cands, dtype=np.int64)
    Dm = np.abs(C[:, None, :] - C[None, :, :]).sum(axis=2)
    rings = _ring_sizes(k)
    # among r new distinct points, the j-th one is at least sum(rings[:j]) away
    # from the earlier ones in total
    spread = [sum(sum(rings[:j]) for j in range(r)) for r in range(k + 1)]

    best_total = math.inf
    best_set: list[int] = []
    nodes = 0
    chosen: list[int] = []

    def extend(start: int, partial: int, D: np.ndarray) -> None:
        nonlocal best_total, best_set, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(f"search exceeded {budget} nodes")
        r = k - 1 - len(chosen)
        if r == 0:
            if partial < best_total:
                best_total = partial
                best_set = list(chosen)
            return
        rest = D[start:]
        if len(rest) < r:
            return
        if partial + int(np.partition(rest, r - 1)[:r].sum()) + spread[r] >= best_total:
            return
        for i in range(start, len(cands) - r + 1):
            if partial + int(D[i]) + spread[r - 1] >= best_total:
                continue
            chosen.append(i)
            extend(i + 1, partial + int(D[i]), D + Dm[i])
            chosen.pop()

    extend(0, 0, np.abs(C).sum(axis=1))
    pts = canonical_shape([(0, 0)] + [cands[i] for i in best_set])
    total = pairwise_sum(pts)
    assert total == best_total
    return Allocation(pts, total, "UNCONSTRAINED", details={"nodes": nodes})
