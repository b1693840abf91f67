"""L1 geometry on integer grids.

Points are tuples of ints.  A point multiset is any sequence of points of one
dimension; duplicates are allowed and carry multiplicity.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Point = tuple[int, ...]


class DimensionError(ValueError):
    """Points of different dimension were combined."""


def as_point(obj: Iterable[int]) -> Point:
    p = tuple(obj)
    if not p:
        raise DimensionError("a point needs at least one coordinate")
    for c in p:
        if isinstance(c, bool) or not isinstance(c, int):
            raise TypeError(f"coordinates must be integers, got {c!r}")
    return p


def as_points(objs: Iterable[Iterable[int]]) -> list[Point]:
    """Normalize to a list of tuples, checking the dimension is uniform."""
    pts = [as_point(o) for o in objs]
    if pts:
        d = len(pts[0])
        for p in pts:
            if len(p) != d:
                raise DimensionError(f"mixed dimensions {d} and {len(p)}")
    return pts


def dimension(points: Sequence[Point]) -> int:
    if not points:
        raise ValueError("empty point set has no dimension")
    return len(points[0])


def l1_distance(p: Point, q: Point) -> int:
    if len(p) != len(q):
        raise DimensionError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return sum(abs(a - b) for a, b in zip(p, q))


def linf_distance(p: Point, q: Point) -> int:
    if len(p) != len(q):
        raise DimensionError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return max(abs(a - b) for a, b in zip(p, q))


def axis_pairwise_sum(values: Iterable[int]) -> int:
    """Sum of |a - b| over unordered pairs of a list of numbers.

    After sorting, the i-th value appears with sign + against the i values
    below it and with sign - against the values above it.
    """
    xs = sorted(values)
    k = len(xs)
    return sum((2 * i - (k - 1)) * x for i, x in enumerate(xs))


def pairwise_sum(points: Sequence[Point]) -> int:
    """Total L1 distance over unordered pairs, O(k log k) per axis."""
    if not points:
        return 0
    d = len(points[0])
    total = 0
    for axis in range(d):
        total += axis_pairwise_sum(p[axis] for p in points)
    return total


def pairwise_sum_direct(points: Sequence[Point]) -> int:
    return sum(l1_distance(p, q) for p, q in itertools.combinations(points, 2))


def pairwise_sum_between(S: Sequence[Point], T: Sequence[Point]) -> int:
    """Sum of l1_distance(s, t) over all ordered pairs (s in S, t in T)."""
    return sum(l1_distance(s, t) for s in S for t in T)


def l1_median(points: Sequence[Point]) -> Point:
    """Coordinate-wise median; the lower median on even counts."""
    if not points:
        raise ValueError("median of an empty set")
    k = len(points)
    d = len(points[0])
    return tuple(sorted(p[a] for p in points)[(k - 1) // 2] for a in range(d))


def closest_order(points: Sequence[Point], center: Point) -> list[int]:
    """Indices of ``points`` by (distance to center, coordinates, index)."""
    return sorted(range(len(points)),
                  key=lambda i: (l1_distance(points[i], center), points[i], i))


def k_closest(points: Sequence[Point], center: Point, k: int) -> list[Point]:
    if not 1 <= k <= len(points):
        raise ValueError(f"k={k} outside 1..{len(points)}")
    return [points[i] for i in closest_order(points, center)[:k]]


def axis_values(points: Sequence[Point]) -> list[list[int]]:
    """Sorted distinct coordinates per axis."""
    d = dimension(points)
    return [sorted({p[a] for p in points}) for a in range(d)]


def candidate_medians(points: Sequence[Point]) -> list[Point]:
    """Grid of all combinations of input coordinates, lexicographic order.

    In 2D these are the intersections of the axis-parallel lines through the
    input points; in d dimensions the product has O(n^d) entries.
    """
    return list(itertools.product(*axis_values(points)))


def choose2(k: int) -> int:
    return k * (k - 1) // 2


def format_decimal(value: Fraction, places: int) -> str:
    q = Decimal(value.numerator) / Decimal(value.denominator)
    return str(q.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))


@dataclass
class Allocation:
    """A chosen k-subset with its total pairwise distance.

    ``indices`` are positions in the point list the algorithm was given;
    ``details`` carries algorithm-specific diagnostics (shell cost, strip
    structure, ...).
    """

    selected: list[Point]
    total_distance: int
    algorithm: str
    center: Optional[Point] = None
    indices: list[int] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.selected)

    @property
    def average(self) -> Fraction:
        pairs = choose2(self.k)
        return Fraction(self.total_distance, pairs) if pairs else Fraction(0)

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "k": self.k,
            "points": [list(p) for p in self.selected],
            "total": self.total_distance,
            "average": format_decimal(self.average, 6),
            "center": list(self.center) if self.center is not None else None,
        }
        out.update(self.details)
        return out


def make_allocation(points: Sequence[Point], indices: Sequence[int], algorithm: str,
                    center: Optional[Point] = None, **details) -> Allocation:
    sel = [points[i] for i in indices]
    return Allocation(sel, pairwise_sum(sel), algorithm, center, list(indices), details)


def loads_points(text: str) -> list[Point]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = data["points"]
    if not isinstance(data, list):
        raise ValueError("point multiset must be a JSON array of coordinate arrays")
    return as_points(data)


def dumps_points(points: Sequence[Point]) -> str:
    return json.dumps([list(p) for p in points])
