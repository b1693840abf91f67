"""Trace-driven job-stream simulation with situation/decision scoring.

One *situation* algorithm places every job and so shapes the free sets seen
later.  At each job start every *decision* algorithm is run on the same free
set and only its pairwise total is recorded.  Scheduling is strict FCFS with
no backfilling; run times do not depend on placement.
"""

from __future__ import annotations

import csv
import heapq
import io
import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib.resources import files
from typing import Sequence

from .allocators import (
    ALGORITHM_ORDER,
    Mesh,
    hilbert_bf_allocate,
    mc1x1_allocate,
    mm_allocate,
    mm_inc_allocate,
)
from .geometry import Allocation, format_decimal

log = logging.getLogger(__name__)


class SwfParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Job:
    id: int
    submit_time: int
    run_time: int
    procs: int


@dataclass
class Trace:
    jobs: list[Job]
    source: str = "<memory>"
    scale_divisor: int = 1
    skipped: int = 0


def parse_swf(text: str, source: str = "<memory>", scale_divisor: int = 1) -> Trace:
    """Read Standard Workload Format text.

    Uses field 1 (job id), 2 (submit), 4 (run time) and 5 (allocated
    processors, or field 8, requested processors, when field 5 is not
    positive).  Processor counts are divided by ``scale_divisor`` and rounded
    up.  Jobs left without a positive run time or processor count are
    dropped and counted in ``Trace.skipped``.
    """
    if scale_divisor < 1:
        raise ValueError("scale_divisor must be positive")
    jobs = []
    skipped = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        fields = line.split()
        if len(fields) < 18:
            raise SwfParseError(lineno, f"expected 18 fields, found {len(fields)}")
        try:
            job_id, submit, _, run, alloc_procs, _, _, req_procs = (
                int(float(f)) for f in fields[:8])
        except ValueError as exc:
            raise SwfParseError(lineno, str(exc)) from None
        procs = alloc_procs if alloc_procs > 0 else req_procs
        if run <= 0 or procs <= 0 or submit < 0:
            skipped += 1
            continue
        jobs.append(Job(job_id, submit, run, math.ceil(procs / scale_divisor)))
    jobs.sort(key=lambda j: (j.submit_time, j.id))
    return Trace(jobs, source, scale_divisor, skipped)


@dataclass(frozen=True)
class Event:
    situation: str
    time: int
    job: int
    procs: int
    free_count: int
    busy: int
    totals: dict


@dataclass
class SimResult:
    """Mean decision totals per situation plus the per-start event log."""

    decisions: list[str]
    events: list[Event] = field(default_factory=list)
    skipped_jobs: dict = field(default_factory=dict)

    @property
    def situations(self) -> list[str]:
        seen = []
        for e in self.events:
            if e.situation not in seen:
                seen.append(e.situation)
        return seen

    @property
    def matrix(self) -> dict[tuple[str, str], Fraction]:
        sums: dict[tuple[str, str], int] = {}
        counts: dict[str, int] = {}
        for e in self.events:
            counts[e.situation] = counts.get(e.situation, 0) + 1
            for name, total in e.totals.items():
                sums[e.situation, name] = sums.get((e.situation, name), 0) + total
        return {key: Fraction(v, counts[key[0]]) for key, v in sums.items()}

    def merged(self, other: "SimResult") -> "SimResult":
        if other.decisions != self.decisions:
            raise ValueError("decision lists differ")
        return SimResult(self.decisions, self.events + other.events,
                         {**self.skipped_jobs, **other.skipped_jobs})


def _run_decisions(mesh: Mesh, free: list, k: int, names: Sequence[str]) -> dict[str, Allocation]:
    out: dict[str, Allocation] = {}
    mm = None
    for name in names:
        if name in out:
            continue
        if name == "MM":
            mm = mm or mm_allocate(free, k)
            out[name] = mm
        elif name == "MM+Inc":
            mm = mm or mm_allocate(free, k)
            out[name] = mm_inc_allocate(free, k, start=mm)
        elif name == "MC1x1":
            out[name] = mc1x1_allocate(mesh, k)
        elif name == "HilbertBF":
            out[name] = hilbert_bf_allocate(mesh, k)
        else:
            raise ValueError(f"unknown algorithm {name!r}")
    return out


def simulate(trace: Trace, extents: Sequence[int], situation: str,
             decisions: Sequence[str]) -> SimResult:
    """Replay ``trace`` on an empty mesh with ``situation`` placing the jobs."""
    extents = tuple(extents)
    if len(extents) != 2:
        raise ValueError("the simulator drives 2D meshes")
    for name in (situation, *decisions):
        if name not in ALGORITHM_ORDER:
            raise ValueError(f"unknown algorithm {name!r}")
    decisions = list(decisions)
    all_cells = Mesh(extents).cells()
    size = len(all_cells)
    busy: set = set()
    running: list[tuple[int, int, list]] = []
    queue: deque[Job] = deque()
    events: list[Event] = []
    skipped = []

    pending = []
    for job in trace.jobs:
        if job.procs > size:
            log.warning("job %d needs %d processors, mesh has %d; skipped",
                        job.id, job.procs, size)
            skipped.append(job.id)
        else:
            pending.append(job)
    nxt = 0

    def check() -> None:
        held = sum(len(c) for _, _, c in running)
        if held != len(busy):
            raise SimulationError(f"{held} processors held by jobs but {len(busy)} marked busy")

    while nxt < len(pending) or queue or running:
        t_arrive = pending[nxt].submit_time if nxt < len(pending) else math.inf
        t_done = running[0][0] if running else math.inf
        now = min(t_arrive, t_done)
        # completions first, then arrivals, then starts
        while running and running[0][0] == now:
            _, _, cells = heapq.heappop(running)
            for c in cells:
                if c not in busy:
                    raise SimulationError(f"processor {c} freed twice")
                busy.discard(c)
        check()
        while nxt < len(pending) and pending[nxt].submit_time == now:
            queue.append(pending[nxt])
            nxt += 1
        while queue and queue[0].procs <= size - len(busy):
            job = queue.popleft()
            mesh = Mesh(extents, frozenset(busy))
            free = [c for c in all_cells if c not in busy]
            allocs = _run_decisions(mesh, free, job.procs, decisions + [situation])
            events.append(Event(situation, now, job.id, job.procs, len(free), len(busy),
                                {name: allocs[name].total_distance for name in decisions}))
            cells = allocs[situation].selected
            if len(set(cells)) != job.procs or any(c in busy for c in cells):
                raise SimulationError(f"{situation} returned an invalid allocation for job {job.id}")
            busy.update(cells)
            heapq.heappush(running, (now + job.run_time, job.id, list(cells)))
            check()
    if busy:
        raise SimulationError("processors still busy after the trace drained")
    return SimResult(decisions, events, {situation: skipped})


def simulate_matrix(trace: Trace, extents: Sequence[int], situations: Sequence[str],
                    decisions: Sequence[str], threads: int = 1) -> SimResult:
    """One simulation per situation algorithm; rows are merged in input order."""
    decisions = list(decisions)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: simulate(trace, extents, s, decisions), situations))
    else:
        parts = [simulate(trace, extents, s, decisions) for s in situations]
    result = SimResult(decisions)
    for part in parts:
        result = result.merged(part)
    return result


def _ordered(names: Sequence[str]) -> list[str]:
    return sorted(names, key=ALGORITHM_ORDER.index)


def decision_matrix_csv(result: SimResult) -> str:
    """Situation rows by decision columns, mean totals to two decimals."""
    cols = _ordered(result.decisions)
    matrix = result.matrix
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["situation", *cols])
    for sit in _ordered(result.situations):
        w.writerow([sit, *(format_decimal(matrix[sit, c], 2) for c in cols)])
    return buf.getvalue()


def event_log_csv(result: SimResult) -> str:
    cols = _ordered(result.decisions)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["situation", "time", "job", "procs", "free_count", "busy", *cols])
    for e in result.events:
        w.writerow([e.situation, e.time, e.job, e.procs, e.free_count, e.busy,
                    *(e.totals[c] for c in cols)])
    return buf.getvalue()


def load_swf(path: str, scale_divisor: int = 1) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_swf(fh.read(), source=str(path), scale_divisor=scale_divisor)


def bundled_trace_path() -> str:
    return str(files("meshalloc") / "data" / "synthetic.swf")

