"""Command-line entry point: ``meshalloc <subcommand> ...``.

Results go to stdout as JSON (or CSV for ``simulate``); errors go to stderr.
Exit status is 2 for usage errors and 1 for runtime failures (budget,
insufficient processors, a failed ``ratio`` check).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .allocators import (
    ALGORITHM_ORDER,
    CLI_NAMES,
    AllocationError,
    Mesh,
    hilbert_bf_allocate,
    mc1x1_allocate,
    mc1x1_select,
    mm_allocate,
    mm_inc_allocate,
)
from .geometry import dumps_points, format_decimal, loads_points
from .instances import (
    gen_lower_bound_2d,
    gen_lower_bound_crosspolytope,
    gen_random_mesh,
    gen_random_points,
    gen_synthetic_swf,
)
from .optimal import BudgetExceededError, brute_force_opt, exact_k3, unconstrained_optimal
from .ptas import largest_valid_m, ptas_factor, ptas_select, ptas_select_d
from .simulator import (
    SimulationError,
    SwfParseError,
    decision_matrix_csv,
    event_log_csv,
    load_swf,
    simulate_matrix,
)

SIM_NAMES = {**CLI_NAMES, **{v: v for v in CLI_NAMES.values()}}


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=False) + "\n")


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def _load_instance(args) -> tuple[list, int | None]:
    """Points from --points/--instance; an object form may carry its own k."""
    text = _read(args.points)
    data = json.loads(text)
    k = data.get("k") if isinstance(data, dict) else None
    return loads_points(text), k


def _need_k(args, embedded):
    k = args.k if args.k is not None else embedded
    if k is None:
        raise UsageError("--k is required")
    if k < 1:
        raise UsageError("--k must be positive")
    return k


def cmd_allocate(args) -> None:
    algo = CLI_NAMES[args.algo]
    if args.mesh:
        mesh = Mesh.from_json(_read(args.mesh))
        funcs = {"MM": lambda: mm_allocate(mesh.free_points(), args.k),
                 "MM+Inc": lambda: mm_inc_allocate(mesh.free_points(), args.k),
                 "MC1x1": lambda: mc1x1_allocate(mesh, args.k),
                 "HilbertBF": lambda: hilbert_bf_allocate(mesh, args.k)}
    else:
        pts, _ = _load_instance(args)
        if algo == "HilbertBF":
            raise UsageError("hilbert-bf needs --mesh")
        funcs = {"MM": lambda: mm_allocate(pts, args.k, args.candidates),
                 "MM+Inc": lambda: mm_inc_allocate(pts, args.k),
                 "MC1x1": lambda: mc1x1_select(pts, args.k)}
    _emit(funcs[algo]().to_dict())


def cmd_oracle(args) -> None:
    pts, embedded = _load_instance(args)
    alloc = brute_force_opt(pts, _need_k(args, embedded), args.budget)
    _emit(alloc.to_dict())


def cmd_k3(args) -> None:
    pts, _ = _load_instance(args)
    _emit(exact_k3(pts).to_dict())


def cmd_ptas(args) -> None:
    pts, embedded = _load_instance(args)
    k = _need_k(args, embedded)
    m = args.m
    if m is None or (args.auto_m and k % m):
        m = largest_valid_m(k)
    if k % m:
        raise UsageError(f"m={m} does not divide k={k} (see --auto-m)")
    if len(pts[0]) == 2 and m < 5:
        raise UsageError("the planar scheme needs m >= 5")
    if len(pts[0]) == 2:
        alloc = ptas_select(pts, k, m, args.budget)
    else:
        alloc = ptas_select_d(pts, k, m, budget=args.budget)
    _emit(alloc.to_dict())


def cmd_shapes(args) -> None:
    rows = []
    for k in range(1, args.max_k + 1):
        alloc = unconstrained_optimal(k)
        rows.append({"k": k, "points": [list(p) for p in alloc.selected],
                     "total": alloc.total_distance,
                     "average": format_decimal(alloc.average, 6)})
    _emit(rows)


def cmd_gen(args) -> None:
    if args.kind == "lower2d":
        sys.stdout.write(dumps_points(gen_lower_bound_2d(args.k, args.scale)) + "\n")
    elif args.kind == "cross":
        sys.stdout.write(dumps_points(
            gen_lower_bound_crosspolytope(args.k, args.d, args.scale)) + "\n")
    elif args.kind == "points":
        sys.stdout.write(dumps_points(
            gen_random_points(args.n, args.d, args.span, args.seed)) + "\n")
    elif args.kind == "mesh":
        extents = args.extents or [16, 16]
        sys.stdout.write(gen_random_mesh(extents, args.occupancy, args.seed).to_json() + "\n")
    elif args.kind == "swf":
        sys.stdout.write(gen_synthetic_swf(args.jobs, args.seed))


def cmd_simulate(args) -> None:
    trace = load_swf(args.swf, args.scale_divisor)
    situations = [SIM_NAMES[a] for a in args.situations]
    decisions = [SIM_NAMES[a] for a in args.decisions]
    result = simulate_matrix(trace, args.extents, situations, decisions, args.threads)
    matrix = decision_matrix_csv(result)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "matrix.csv").write_text(matrix, encoding="utf-8")
        (out / "events.csv").write_text(event_log_csv(result), encoding="utf-8")
    sys.stdout.write(matrix)


def _bound(algo: str, d: int, k: int, m: int | None) -> Fraction | None:
    if algo in ("MM", "MM+Inc"):
        return Fraction(7, 4) if d == 2 else 2 - Fraction(1, 2 * d)
    if algo == "MC1x1":
        return (2 - Fraction(2, k)) * d
    if algo == "PTAS" and d == 2:
        return ptas_factor(m)
    return None


def cmd_ratio(args) -> int:
    pts, embedded = _load_instance(args)
    k = _need_k(args, embedded)
    d = len(pts[0])
    if args.algo == "ptas":
        m = args.m or largest_valid_m(k)
        alloc = ptas_select(pts, k, m) if d == 2 else ptas_select_d(pts, k, m)
        name = "PTAS"
    else:
        name = CLI_NAMES[args.algo]
        m = None
        if name == "HilbertBF":
            raise UsageError("ratio needs a point-set algorithm (mm, mm-inc, mc1x1, ptas)")
        alloc = {"MM": mm_allocate, "MM+Inc": mm_inc_allocate,
                 "MC1x1": mc1x1_select}[name](pts, k)
    opt = brute_force_opt(pts, k, args.budget)
    ratio = Fraction(alloc.total_distance, opt.total_distance) if opt.total_distance else Fraction(1)
    bound = _bound(name, d, k, m)
    ok = bound is None or ratio <= bound
    _emit({"algorithm": name, "k": k, "total": alloc.total_distance,
           "opt": opt.total_distance, "ratio": format_decimal(ratio, 6),
           "bound": format_decimal(bound, 6) if bound is not None else None,
           "status": "PASS" if ok else "FAIL"})
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meshalloc",
                                     description="Communication-aware processor allocation.")
    parser.add_argument("--threads", type=_positive, default=1,
                        help="worker threads (results do not depend on it)")
    sub = parser.add_subparsers(dest="command", required=True)

    def points_arg(p, flag="--points"):
        p.add_argument(flag, "--instance", dest="points", required=True,
                       help="JSON point multiset file ('-' for stdin)")

    p = sub.add_parser("allocate", help="run one allocator")
    p.add_argument("--algo", choices=sorted(CLI_NAMES), required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--mesh", help="JSON mesh file")
    src.add_argument("--points", "--instance", dest="points", help="JSON point multiset file")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--candidates", choices=["grid", "points"], default="grid",
                   help="MM median candidates; 'points' is the fast mode")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("oracle", help="exact optimum by subset enumeration")
    points_arg(p)
    p.add_argument("--k", type=int)
    p.add_argument("--budget", type=_positive, default=10**7)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("k3", help="exact optimal 3-subset in the plane")
    points_arg(p)
    p.set_defaults(func=cmd_k3)

    p = sub.add_parser("ptas", help="strip/cell approximation scheme")
    points_arg(p)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=_positive)
    p.add_argument("--auto-m", action="store_true",
                   help="replace m by the largest divisor of k that is >= 5 when m does not divide k")
    p.add_argument("--budget", type=_positive, default=10**8)
    p.set_defaults(func=cmd_ptas)

    p = sub.add_parser("shapes", help="optimal clusters on an empty grid")
    p.add_argument("--max-k", type=_positive, default=9)
    p.set_defaults(func=cmd_shapes)

    p = sub.add_parser("gen", help="instance generators")
    p.add_argument("kind", choices=["lower2d", "cross", "points", "mesh", "swf"])
    p.add_argument("--k", type=_positive, default=8)
    p.add_argument("--d", type=_positive, default=2)
    p.add_argument("--scale", type=_positive, default=1000)
    p.add_argument("--n", type=_positive, default=12)
    p.add_argument("--span", type=_positive, default=8)
    p.add_argument("--extents", type=_positive, nargs="+")
    p.add_argument("--occupancy", type=float, default=0.5)
    p.add_argument("--jobs", type=_positive, default=300)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", help="trace-driven situation/decision simulation")
    p.add_argument("--swf", required=True)
    p.add_argument("--extents", type=_positive, nargs=2, default=[16, 16])
    p.add_argument("--scale-divisor", type=_positive, default=1)
    names = sorted(SIM_NAMES)
    p.add_argument("--situations", nargs="+", choices=names, default=list(ALGORITHM_ORDER))
    p.add_argument("--decisions", nargs="+", choices=names, default=list(ALGORITHM_ORDER))
    p.add_argument("--out", help="directory for matrix.csv and events.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ratio", help="algorithm vs exact optimum, checked against its bound")
    p.add_argument("--algo", choices=sorted(CLI_NAMES) + ["ptas"], required=True)
    points_arg(p)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=_positive)
    p.add_argument("--budget", type=_positive, default=10**7)
    p.set_defaults(func=cmd_ratio)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except UsageError as exc:
        parser.error(str(exc))
    except (AllocationError, BudgetExceededError, SimulationError, SwfParseError,
            ValueError, RuntimeError, OSError) as exc:
        print(f"meshalloc: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
