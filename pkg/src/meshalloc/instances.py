"""Instance generators: tight lower-bound families, random meshes and traces.

Random generators draw from :class:`Lcg64` so that a seed means the same
instance in any language:

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64
    below(b) = (state >> 11) mod b          # after advancing the state

The initial state is the seed itself (mod 2**64).
"""

from __future__ import annotations

import math
from typing import Sequence

from .allocators import Mesh
from .geometry import Point

_MUL = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (_MUL * self.state + _INC) & _MASK
        return self.state

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.next() >> 11) % bound

    def uniform(self) -> float:
        """Float in (0, 1]."""
        return ((self.next() >> 11) + 1) / float(1 << 53)


def gen_lower_bound_crosspolytope(k: int, d: int, scale: int) -> list[Point]:
    """Cross-polytope family on which MM approaches 2 - 1/(2d) times optimal.

    Half of the points sit at the origin O and half at O + scale*e1; the rest,
    k/(4d) copies each, sit just inside the unit L1 balls around those two
    clusters (epsilon = 1/scale, coordinates multiplied by scale).
    """
    if d < 1:
        raise ValueError("d must be positive")
    if k <= 0 or k % (4 * d):
        raise ValueError(f"k={k} must be a positive multiple of 4d={4 * d}")
    if scale < 2:
        raise ValueError("scale must be at least 2")
    half, spoke = k // 2, k // (4 * d)

    def unit(axis: int, length: int) -> list[int]:
        v = [0] * d
        v[axis] = length
        return v

    def add(u: Sequence[int], v: Sequence[int]) -> Point:
        return tuple(a + b for a, b in zip(u, v))

    origin = [0] * d
    right = unit(0, scale)
    sites: list[Point] = [tuple(origin)] * half + [tuple(right)] * half
    arms: list[Point] = []
    for i in range(1, d):
        for sign in (1, -1):
            arms.append(add(origin, unit(i, sign * (scale - 1))))
        for sign in (1, -1):
            arms.append(add(right, unit(i, sign * (scale - 1))))
    arms.append(tuple(unit(0, -(scale - 1))))
    arms.append(tuple(unit(0, 2 * scale - 1)))
    for a in arms:
        sites.extend([a] * spoke)
    return sites


def gen_lower_bound_2d(k: int, scale: int) -> list[Point]:
    """Planar family where MM's ratio tends to 7/4 as scale grows."""
    if k <= 0 or k % 8:
        raise ValueError(f"k={k} must be a positive multiple of 8")
    return gen_lower_bound_crosspolytope(k, 2, scale)


def gen_random_mesh(extents: Sequence[int], occupancy: float, seed: int) -> Mesh:
    """Mesh with floor(occupancy * size) busy cells chosen by partial shuffle.

    Cells are listed lexicographically; for i = 0..count-1 cell i is swapped
    with cell i + below(size - i), and the first ``count`` cells are busy.
    """
    if not 0 <= occupancy <= 1:
        raise ValueError("occupancy must lie in [0, 1]")
    mesh = Mesh(tuple(extents))
    cells = mesh.cells()
    size = len(cells)
    count = math.floor(occupancy * size)
    rng = Lcg64(seed)
    for i in range(count):
        j = i + rng.below(size - i)
        cells[i], cells[j] = cells[j], cells[i]
    return Mesh(mesh.extents, frozenset(cells[:count]))


def gen_random_points(n: int, d: int, span: int, seed: int) -> list[Point]:
    """n points with coordinates uniform in [0, span); duplicates allowed."""
    rng = Lcg64(seed)
    return [tuple(rng.below(span) for _ in range(d)) for _ in range(n)]


_PROC_CHOICES = (1, 2, 4, 4, 8, 8, 8, 16, 16, 16, 32, 32, 64, 3, 6, 12, 24)


def gen_synthetic_swf(n_jobs: int, seed: int, mean_interarrival: int = 90) -> str:
    """Synthetic job trace in Standard Workload Format (18 fields per line).

    Sized for a 256-processor machine: requests up to 64 processors, runtimes
    log-uniform between 1 minute and 2 hours, Poisson arrivals.
    """
    rng = Lcg64(seed)
    lines = [
        "; Version: 2.2",
        "; Computer: synthetic 16x16 mesh",
        f"; Note: generated by meshalloc.instances.gen_synthetic_swf(n_jobs={n_jobs}, seed={seed})",
        "; MaxProcs: 256",
    ]
    t = 0
    for job in range(1, n_jobs + 1):
        t += int(-mean_interarrival * math.log(rng.uniform()))
        procs = _PROC_CHOICES[rng.below(len(_PROC_CHOICES))]
        run = int(math.exp(math.log(60) + (math.log(7200) - math.log(60)) * rng.uniform()))
        fields = [job, t, -1, run, procs, -1, -1, procs, 2 * run, -1, 1,
                  1 + rng.below(20), 1, -1, 1, 1, -1, -1]
        lines.append(" ".join(str(f) for f in fields))
    return "\n".join(lines) + "\n"
