"""Processor allocators: MM, MM+Inc, MC1x1 and HilbertBF.

MM and MC1x1 score every candidate center at once with numpy.  Within a
candidate row the free processors are kept in lexicographic order and sorted
stably by distance, which reproduces the (distance, coordinates, index)
tie-break of :func:`meshalloc.geometry.k_closest` without a Python-level sort
per center.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import (
    Allocation,
    Point,
    as_point,
    as_points,
    axis_values,
    make_allocation,
    pairwise_sum,
)

# cells of the (candidates x points) distance block evaluated at once
_CHUNK_CELLS = 1 << 21


class AllocationError(RuntimeError):
    pass


class InsufficientProcessorsError(AllocationError):
    pass


@dataclass(frozen=True)
class Mesh:
    """Grid machine state: extents per axis and the set of busy processors."""

    extents: tuple[int, ...]
    occupied: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        ext = tuple(int(e) for e in self.extents)
        if not ext or any(e <= 0 for e in ext):
            raise ValueError(f"extents must be positive, got {self.extents}")
        occ = frozenset(as_point(p) for p in self.occupied)
        for p in occ:
            if not self.contains(p, ext):
                raise ValueError(f"occupied processor {p} outside mesh {ext}")
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "occupied", occ)

    @staticmethod
    def contains(p: Point, extents: Sequence[int]) -> bool:
        return len(p) == len(extents) and all(0 <= c < e for c, e in zip(p, extents))

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def size(self) -> int:
        return int(np.prod(self.extents))

    @property
    def free_count(self) -> int:
        return self.size - len(self.occupied)

    def cells(self) -> list[Point]:
        return list(itertools.product(*(range(e) for e in self.extents)))

    def free_points(self) -> list[Point]:
        """Free processors in lexicographic order."""
        return [p for p in self.cells() if p not in self.occupied]

    def with_occupied(self, occupied) -> "Mesh":
        return Mesh(self.extents, frozenset(occupied))

    def to_json(self) -> str:
        return json.dumps({"extents": list(self.extents),
                           "occupied": [list(p) for p in sorted(self.occupied)]})

    @classmethod
    def from_json(cls, text: str) -> "Mesh":
        data = json.loads(text)
        return cls(tuple(data["extents"]), frozenset(as_points(data.get("occupied", []))))


def _check_k(n: int, k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise InsufficientProcessorsError(f"requested {k} processors, only {n} free")


def _lex_order(points: Sequence[Point]) -> list[int]:
    return sorted(range(len(points)), key=lambda i: (points[i], i))


def _axis_weights(k: int) -> np.ndarray:
    return 2 * np.arange(k, dtype=np.int64) - (k - 1)


def _scan_centers(points: Sequence[Point], centers: Sequence[Point], k: int,
                  metric: str) -> tuple[int, np.ndarray, int]:
    """Best center for the k-nearest selection.

    Returns (center index, selected point indices, score).  The score is the
    pairwise L1 total of the selection for ``metric="l1"`` and the sum of L-inf
    shell numbers for ``metric="linf"``.  Ties go to the earliest center.
    """
    order = np.array(_lex_order(points), dtype=np.int64)
    P = np.array(points, dtype=np.int64)[order]
    n, d = P.shape
    C = np.array(centers, dtype=np.int64).reshape(len(centers), d)
    w = _axis_weights(k)
    step = max(1, _CHUNK_CELLS // max(1, n * d))

    best_score = None
    best_c = -1
    best_sel = None
    for lo in range(0, len(C), step):
        block = C[lo:lo + step]
        diff = np.abs(block[:, None, :] - P[None, :, :])
        dist = diff.sum(axis=2) if metric == "l1" else diff.max(axis=2)
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
        if metric == "l1":
            coords = np.sort(P[nearest], axis=1)
            scores = (coords * w[None, :, None]).sum(axis=(1, 2))
        else:
            scores = np.take_along_axis(dist, nearest, axis=1).sum(axis=1)
        i = int(np.argmin(scores))
        if best_score is None or scores[i] < best_score:
            best_score = int(scores[i])
            best_c = lo + i
            best_sel = order[nearest[i]]
    return best_c, best_sel, best_score


def mm_allocate(free: Sequence[Point], k: int, candidates: str = "grid") -> Allocation:
    """Manhattan Median: best k-nearest cluster over all candidate medians.

    ``candidates="grid"`` uses every combination of input coordinates (the
    full O(n^d) median family).  ``candidates="points"`` restricts centers to
    the input points; that fast mode only carries the generic 2-approximation.
    """
    free = as_points(free)
    _check_k(len(free), k)
    if candidates == "grid":
        centers = list(itertools.product(*axis_values(free)))
    elif candidates == "points":
        centers = sorted(set(free))
    else:
        raise ValueError(f"unknown candidate mode {candidates!r}")
    ci, sel, total = _scan_centers(free, centers, k, "l1")
    alloc = make_allocation(free, [int(i) for i in sel], "MM", centers[ci])
    assert alloc.total_distance == total
    return alloc


def mm_inc_allocate(free: Sequence[Point], k: int,
                    start: Optional[Allocation] = None) -> Allocation:
    """MM followed by steepest-descent single swaps until a local minimum.

    Each round evaluates every (selected, excluded) exchange and applies the one
    with the largest decrease; ties go to the lowest (selected position,
    excluded position).  ``start`` lets a caller reuse an MM result computed on
    the same ``free`` list.
    """
    free = as_points(free)
    _check_k(len(free), k)
    if start is None:
        start = mm_allocate(free, k)
    n = len(free)
    sel = list(start.indices)
    if len(sel) == n:
        return make_allocation(free, sel, "MM+Inc", start.center, swaps=0)

    P = np.array(free, dtype=np.int64)
    D = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=2)
    in_sel = np.zeros(n, dtype=bool)
    in_sel[sel] = True
    swaps = 0
    while True:
        S = np.array(sel, dtype=np.int64)
        E = np.flatnonzero(~in_sel)
        to_sel = D[:, S].sum(axis=1)
        # removing s and inserting e changes the total by
        # -sum_d(s, S) + sum_d(e, S) - d(e, s)
        delta = to_sel[E][None, :] - to_sel[S][:, None] - D[np.ix_(S, E)]
        flat = int(np.argmin(delta))
        si, ei = divmod(flat, len(E))
        if delta[si, ei] >= 0:
            break
        in_sel[S[si]] = False
        in_sel[E[ei]] = True
        sel[si] = int(E[ei])
        swaps += 1
    alloc = make_allocation(free, sel, "MM+Inc", start.center, swaps=swaps)
    assert alloc.total_distance <= start.total_distance
    return alloc


def mc1x1_select(free: Sequence[Point], k: int) -> Allocation:
    """MC1x1 on an arbitrary free point multiset.

    Shell i around a center v is the L-inf ring at distance i; every free
    processor is tried as v and the one whose k innermost free processors have
    the smallest shell-number sum wins.
    """
    free = as_points(free)
    _check_k(len(free), k)
    centers = sorted(set(free))
    ci, sel, sigma = _scan_centers(free, centers, k, "linf")
    return make_allocation(free, [int(i) for i in sel], "MC1x1", centers[ci], sigma=sigma)


def mc1x1_allocate(mesh: Mesh, k: int) -> Allocation:
    return mc1x1_select(mesh.free_points(), k)


def _rot(n: int, x: int, y: int, rx: int, ry: int) -> tuple[int, int]:
    if ry == 0:
        if rx == 1:
            x = n - 1 - x
            y = n - 1 - y
        x, y = y, x
    return x, y


def hilbert_index(p: Point, order: int) -> int:
    """Rank of a 2D point along the Hilbert curve filling a 2^order square.

    The curve starts at (0, 0) and ends at (2^order - 1, 0); for order 1 the
    visiting sequence is (0,0), (0,1), (1,1), (1,0).
    """
    if len(p) != 2:
        raise ValueError("Hilbert index is defined for 2D points only")
    n = 1 << order
    x, y = p
    if not (0 <= x < n and 0 <= y < n):
        raise ValueError(f"point {p} outside the {n}x{n} square")
    d = 0
    s = n >> 1
    while s > 0:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        x, y = _rot(n, x, y, rx, ry)
        s >>= 1
    return d


def hilbert_order_for(extents: Sequence[int]) -> int:
    return max(0, (max(extents) - 1).bit_length())


def curve_runs(mesh: Mesh) -> list[list[Point]]:
    """Maximal runs of free processors that are consecutive along the curve.

    Only mesh cells are ranked, so on a non-square mesh the curve skips the
    padding of the enclosing power-of-two square instead of breaking runs there.
    """
    order = hilbert_order_for(mesh.extents)
    cells = sorted(mesh.cells(), key=lambda p: hilbert_index(p, order))
    runs: list[list[Point]] = []
    cur: list[Point] = []
    for p in cells:
        if p in mesh.occupied:
            if cur:
                runs.append(cur)
                cur = []
        else:
            cur.append(p)
    if cur:
        runs.append(cur)
    return runs


def best_fit_runs(runs: Sequence[Sequence[Point]], k: int) -> list[Point]:
    """Best-fit over runs; when no run is big enough, take largest runs whole."""
    remaining = [list(r) for r in runs]
    taken: list[Point] = []
    need = k
    while need > 0:
        fits = [i for i, r in enumerate(remaining) if len(r) >= need]
        if fits:
            i = min(fits, key=lambda j: (len(remaining[j]), j))
            taken.extend(remaining[i][:need])
            break
        i = max(range(len(remaining)), key=lambda j: (len(remaining[j]), -j))
        run = remaining.pop(i)
        taken.extend(run)
        need -= len(run)
    return taken


def hilbert_bf_allocate(mesh: Mesh, k: int) -> Allocation:
    if mesh.dim != 2:
        raise ValueError("HilbertBF needs a 2D mesh")
    _check_k(mesh.free_count, k)
    chosen = best_fit_runs(curve_runs(mesh), k)
    return Allocation(chosen, pairwise_sum(chosen), "HilbertBF")


MESH_ALGORITHMS: dict[str, Callable[[Mesh, int], Allocation]] = {
    "MC1x1": mc1x1_allocate,
    "MM": lambda mesh, k: mm_allocate(mesh.free_points(), k),
    "MM+Inc": lambda mesh, k: mm_inc_allocate(mesh.free_points(), k),
    "HilbertBF": hilbert_bf_allocate,
}

# table column order
ALGORITHM_ORDER = ("MC1x1", "MM", "MM+Inc", "HilbertBF")

CLI_NAMES = {"mm": "MM", "mm-inc": "MM+Inc", "mc1x1": "MC1x1", "hilbert-bf": "HilbertBF"}
