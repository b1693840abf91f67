"""Strip/cell approximation scheme for min-sum k-subsets under L1.

For a precision parameter m with k = q*m, every axis is cut into m slabs that
each hold q chosen points.  The slabs of all axes form m^d cells; a cell plan
fixes how many points each cell contributes (every slab sums to q).  Inside a
cell the points extremal along the cell's gradient are taken, the gradient
component for slab i being (2i + 1 - m) * q: points in low slabs are pulled
up, points in high slabs down.  Enumerating all slab structures and plans
and keeping the best selection gives, in 2D, a total within
``ptas_factor(m)`` of the optimum.

Ties in coordinates are broken by a symbolic perturbation: along each axis
points are ranked by (coordinate, index) and slabs are runs of consecutive
ranks.  The same ranks break ties in the gradient order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .geometry import Allocation, Point, as_points, make_allocation
from .optimal import BudgetExceededError

DEFAULT_BUDGET = 10**8


def ptas_factor(m: int) -> Fraction:
    """Approximation guarantee 1 / (1 - 1/(m-2) - 2/(m-1)) for the 2D scheme."""
    if m <= 4:
        raise ValueError(f"m={m}: the guarantee needs m >= 5")
    return 1 / (1 - Fraction(1, m - 2) - Fraction(2, m - 1))


def gradient(cell: Sequence[int], m: int, q: int) -> tuple[int, ...]:
    return tuple((2 * i + 1 - m) * q for i in cell)


def _compositions(total: int, caps: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Tuples c with 0 <= c[j] <= caps[j] and sum total, lexicographic order."""
    if not caps:
        if total == 0:
            yield ()
        return
    head = caps[0]
    room = sum(caps[1:])
    for c in range(max(0, total - room), min(head, total) + 1):
        for rest in _compositions(total - c, caps[1:]):
            yield (c,) + rest


def enumerate_cell_plans(k: int, m: int) -> Iterator[list[list[int]]]:
    """All m x m nonnegative integer matrices whose rows and columns sum to k/m."""
    if m < 1 or k % m:
        raise ValueError(f"k={k} is not a multiple of m={m}")
    q = k // m

    def rows(i: int, col_left: list[int]) -> Iterator[list[list[int]]]:
        if i == m:
            if not any(col_left):
                yield []
            return
        for row in _compositions(q, col_left):
            left = [c - r for c, r in zip(col_left, row)]
            for tail in rows(i + 1, left):
                yield [list(row)] + tail

    yield from rows(0, [q] * m)


@dataclass(frozen=True)
class StripStructure:
    """Slab boundaries per axis, as rank cut positions and as coordinates.

    Slab i of an axis holds the points whose rank r satisfies
    ``cuts[i] <= r < cuts[i + 1]``; ``bounds`` are the coordinates of the first
    and last point in each slab run, i.e. the closed slab limits.
    """

    m: int
    cuts: tuple[tuple[int, ...], ...]
    bounds: tuple[tuple[int, ...], ...]


def axis_ranks(points: Sequence[Point], axis: int) -> list[int]:
    order = sorted(range(len(points)), key=lambda i: (points[i][axis], i))
    rank = [0] * len(points)
    for r, i in enumerate(order):
        rank[i] = r
    return rank


def axis_cut_tuples(n: int, m: int, q: int) -> list[tuple[int, ...]]:
    """Cut positions c_0 < ... < c_m over ranks 0..n-1 with slabs of >= q points.

    c_i is the rank of the first chosen point in slab i, so slab i spans ranks
    [c_i, c_{i+1}); the last cut sits just past the last chosen point, which
    for q = 1 is the slab's first point.
    """
    out = []
    for firsts in itertools.combinations(range(n), m):
        if any(b - a < q for a, b in zip(firsts, firsts[1:])):
            continue
        lo = firsts[-1] + q
        hi = lo if q == 1 else n
        for end in range(lo, hi + 1):
            if end <= n:
                out.append(firsts + (end,))
    return out


def ptas_select_d(points: Sequence[Point], k: int, m: int, d: int | None = None,
                  budget: int = DEFAULT_BUDGET) -> Allocation:
    """Enumerate slab structures and cell plans in any dimension.

    Only configurations that could describe an optimal solution are scored:
    under the cut convention of :func:`axis_cut_tuples` the first point of
    every slab (and the last point of the final slab) is a chosen point, so
    the plan must give its cell at least one point.  Ties are resolved by
    enumeration order: structures by their cut tuples, then plans by their
    cell counts, both lexicographic.
    """
    pts = as_points(points)
    n = len(pts)
    if d is None:
        d = len(pts[0]) if pts else 2
    if pts and len(pts[0]) != d:
        raise ValueError(f"points have dimension {len(pts[0])}, expected {d}")
    if d < 1:
        raise ValueError("dimension must be positive")
    if m < 1 or k < 1 or k % m:
        raise ValueError(f"k={k} must be a positive multiple of m={m}")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} available points")
    q = k // m

    ranks = [axis_ranks(pts, a) for a in range(d)]
    by_rank = [sorted(range(n), key=lambda p, a=a: ranks[a][p]) for a in range(d)]
    per_axis = axis_cut_tuples(n, m, q)
    n_s = len(per_axis)
    if n_s ** d > budget:
        raise BudgetExceededError(f"{n_s ** d} strip structures exceed budget {budget}")

    # slab[a][s, p]: slab of point p along axis a under cut tuple s, -1 outside
    slab = []
    for a in range(d):
        table = np.full((n_s, n), -1, dtype=np.int64)
        for s, cuts in enumerate(per_axis):
            for i in range(m):
                for r in range(cuts[i], cuts[i + 1]):
                    table[s, by_rank[a][r]] = i
        slab.append(table)
    # required[a][s]: points known to be chosen, with the slab each opens
    required = [np.array([[by_rank[a][c] for c in cuts[:-1]] + [by_rank[a][cuts[-1] - 1]]
                          for cuts in per_axis], dtype=np.int64) for a in range(d)]

    P = np.array(pts, dtype=np.int64)
    D = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=2).tolist()
    cells = list(itertools.product(range(m), repeat=d))
    cell_id = {c: i for i, c in enumerate(cells)}
    # position of each point in every cell's gradient order
    grad_pos = []
    for c in cells:
        g = gradient(c, m, q)
        order = sorted(range(n), key=lambda p: (sum(gi * x for gi, x in zip(g, pts[p])),
                                                sum(gi * ranks[a][p] for a, gi in enumerate(g)),
                                                p))
        pos = [0] * n
        for j, p in enumerate(order):
            pos[p] = j
        grad_pos.append(pos)

    best_total = math.inf
    best = None
    visited = 0
    last = d - 1
    slab_last = slab[last]
    req_last = required[last]

    for head in itertools.product(range(n_s), repeat=last):
        head_slabs = [slab[a][head[a]] for a in range(last)]
        inside = np.ones(n, dtype=bool)
        for hs in head_slabs:
            inside &= hs >= 0
        ok = inside[req_last].all(axis=1)
        for a in range(last):
            ok &= (slab_last[:, required[a][head[a]]] >= 0).all(axis=1)
        head_req = [required[a][head[a]].tolist() for a in range(last)]
        head_lists = [hs.tolist() for hs in head_slabs]

        for s_last in np.flatnonzero(ok).tolist():
            combo = head + (s_last,)
            lists = head_lists + [slab_last[s_last].tolist()]
            must_cells = [tuple(lists[a][p] for a in range(d))
                          for p in itertools.chain(*head_req, req_last[s_last].tolist())]
            if any(-1 in c for c in must_cells):
                continue
            must = {cell_id[c] for c in must_cells}
            load = [[0] * m for _ in range(d)]
            for ci in must:
                for a in range(d):
                    load[a][cells[ci][a]] += 1
            if any(v > q for row in load for v in row):
                continue

            members: dict[int, list[int]] = {}
            for p in range(n):
                cell = tuple(lists[a][p] for a in range(d))
                if -1 not in cell:
                    members.setdefault(cell_id[cell], []).append(p)
            order = sorted(members)
            for ci in order:
                members[ci].sort(key=grad_pos[ci].__getitem__)
            caps = [min(len(members[ci]), q) for ci in order]
            floor = [1 if ci in must else 0 for ci in order]
            # capacity left in each slab from a given position onward
            tail = [[[0] * m for _ in range(d)] for _ in range(len(order) + 1)]
            for t in range(len(order) - 1, -1, -1):
                for a in range(d):
                    row = list(tail[t + 1][a])
                    row[cells[order[t]][a]] += caps[t]
                    tail[t][a] = row
            if any(tail[0][a][i] < q for a in range(d) for i in range(m)):
                continue

            rem = [[q] * m for _ in range(d)]
            chosen: list[int] = []
            counts = [0] * len(order)

            def place(t: int, partial: int) -> None:
                nonlocal best_total, best, visited
                visited += 1
                if visited > budget:
                    raise BudgetExceededError(f"search exceeded {budget} configurations")
                if t == len(order):
                    if partial < best_total:
                        best_total = partial
                        best = (combo, dict(zip(order, counts)), list(chosen))
                    return
                cell = cells[order[t]]
                limit = min(caps[t], *(rem[a][cell[a]] for a in range(d)))
                lowest = max(floor[t], *(rem[a][cell[a]] - tail[t + 1][a][cell[a]]
                                         for a in range(d)))
                mem = members[order[t]]
                cost = partial
                added = 0
                for c in range(limit + 1):
                    if c > 0:
                        p = mem[c - 1]
                        row = D[p]
                        cost += sum(row[j] for j in chosen)
                        chosen.append(p)
                        added += 1
                    if cost >= best_total:
                        break
                    if c < lowest:
                        continue
                    for a in range(d):
                        rem[a][cell[a]] -= c
                    counts[t] = c
                    place(t + 1, cost)
                    for a in range(d):
                        rem[a][cell[a]] += c
                counts[t] = 0
                del chosen[len(chosen) - added:]

            place(0, 0)

    if best is None:
        raise RuntimeError("no feasible strip structure")
    combo, plan_counts, chosen = best
    cuts = tuple(per_axis[s] for s in combo)
    bounds = tuple(
        tuple(pts[by_rank[a][c]][a] for c in cuts[a][:-1]) + (pts[by_rank[a][cuts[a][-1] - 1]][a],)
        for a in range(d))
    flat = [plan_counts.get(ci, 0) for ci in range(len(cells))]
    plan = np.array(flat, dtype=np.int64).reshape((m,) * d).tolist()
    cell_of = [[int(slab[a][combo[a], p]) for a in range(d)] for p in chosen]
    return make_allocation(
        pts, chosen, "PTAS",
        m=m, strip_cuts=[list(c) for c in cuts],
        strip_bounds=[list(b) for b in bounds],
        plan=plan, cells=cell_of)


def ptas_select(points: Sequence[Point], k: int, m: int,
                budget: int = DEFAULT_BUDGET) -> Allocation:
    """Planar scheme with its certificate: total <= ptas_factor(m) * OPT."""
    pts = as_points(points)
    if pts and len(pts[0]) != 2:
        raise ValueError("ptas_select is planar; use ptas_select_d")
    if m < 5:
        raise ValueError(f"m={m}: the planar guarantee needs m >= 5")
    if k % m:
        raise ValueError(f"k={k} is not a multiple of m={m}")
    alloc = ptas_select_d(pts, k, m, 2, budget)
    alloc.details["factor"] = str(ptas_factor(m))
    return alloc


def largest_valid_m(k: int, minimum: int = 5) -> int:
    """Largest divisor of k that is at least ``minimum``."""
    for m in range(k, minimum - 1, -1):
        if k % m == 0:
            return m
    raise ValueError(f"k={k} has no divisor >= {minimum}")
