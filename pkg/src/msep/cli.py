"""Command-line entry point: `msep <subcommand> ...`.

Exit codes: 0 success, 1 I/O failure, 2 usage, 3 malformed file, 4 violated precondition.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import formats
from .dominant import solve_dominant
from .errors import FormatError, PreconditionError
from .graph_core import OPS, grid3
from .instance_builder import apply_bias, build_cell_instance, build_filament_instance
from .local_search import gsg, gss
from .metrics import induced_labels, scores_from_labels, vins, viws
from .msp_core import MspInstance, consistency_one_star, consistency_zero_star, objective
from .oracle import brute_force_consistency, brute_force_lmp, brute_force_msp, brute_force_qubo
from .reductions import lmp_to_msp, msp_to_lmp, mtvs_to_msp, qubo_to_msp, sat3_to_consistency, steiner_to_msp
from .volume_synth import BinaryVolume, GrayVolume, synth_volume
from .watershed import flood, induced_from_regions, sweep_end

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_FORMAT, EXIT_PRECONDITION = 0, 1, 2, 3, 4

# default sweep grids: (lo, hi, count)
BIAS_GRID = (-0.25, 0.25, 51)
WATERSHED_GRIDS = {
    "filaments": ((0.45, 0.65, 41), (0.5, 0.7, 41)),
    "cells": ((0.0, 0.5, 51), (0.4, 0.6, 21)),
}


# ---------------------------------------------------------------- argument types


def unit_interval(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"{x} is outside [0, 1]")
    return x


def positive_int(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return k


def grid_spec(text: str) -> np.ndarray:
    """`lo:hi:count` -> count equally spaced values, or a comma list."""
    try:
        if ":" in text:
            lo, hi, k = text.split(":")
            k = int(k)
            if k < 1:
                raise ValueError
            return np.linspace(float(lo), float(hi), k)
        vals = np.asarray([float(t) for t in text.split(",") if t], dtype=float)
        if not len(vals):
            raise ValueError
        return vals
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use lo:hi:count or v1,v2,...") from None


def thread_count() -> int:
    raw = os.environ.get("MSEP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map(fn, jobs: list) -> list:
    threads = min(thread_count(), len(jobs))
    if threads <= 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def _grid_of_truth(truth: BinaryVolume, n_nodes: int):
    graph = grid3(*truth.dims)
    if graph.node_count != n_nodes:
        raise PreconditionError(f"truth volume has {graph.node_count} voxels, separator covers {n_nodes}")
    return graph


# ---------------------------------------------------------------- solving


def run_solver(inst: MspInstance, algo: str):
    """(mask, objective, moves, trace) for one solver run."""
    if algo == "gss":
        r = gss(inst)
        return r.mask, r.objective, len(r.moves), r.trace
    if algo == "gsg":
        r = gsg(inst)
        return r.mask, r.objective, len(r.moves), r.trace
    if algo == "dominant":
        d = solve_dominant(inst)
        mask = np.zeros(inst.node_count, dtype=bool)
        mask[sorted(d.separator)] = True
        return mask, objective(inst, mask), d.checks, []
    raise PreconditionError(f"unknown algorithm {algo!r}")


def _sweep_job(inst, algo, b, nodes_only, truth_mask, dims):
    t0 = time.perf_counter()
    mask, val, moves, _ = run_solver(apply_bias(inst, b, nodes_only), algo)
    ms = (time.perf_counter() - t0) * 1e3
    row = [b, val, int(mask.sum()), moves, ms]
    if truth_mask is not None:
        g = grid3(*dims)
        w, ns = viws(g, mask, truth_mask), vins(g, mask, truth_mask)
        row += [w.vi, w.false_cut, w.false_join, ns.vi]
    return row


# ---------------------------------------------------------------- subcommands


def cmd_synth(a) -> int:
    truth, gray = synth_volume(a.kind, a.m, a.t, a.seed)
    prefix = Path(a.out)
    bin_path = prefix.with_name(prefix.name + "_truth.vol")
    gray_path = prefix.with_name(prefix.name + "_gray.vol")
    formats.write_volume(bin_path, truth)
    formats.write_volume(gray_path, gray)
    print(bin_path)
    print(gray_path)
    return EXIT_OK


def cmd_build(a) -> int:
    gray = formats.read_volume(a.gray)
    if not isinstance(gray, GrayVolume):
        raise PreconditionError("build needs a gray volume")
    if a.kind == "filaments":
        inst = build_filament_instance(gray, a.long_range_distance, include_endpoints=not a.exclude_endpoints)
    else:
        inst = build_cell_instance(gray, include_endpoints=not a.exclude_endpoints)
    formats.write_instance(a.out, inst)
    print(f"nodes={inst.node_count} edges={inst.graph.edge_count} interactions={inst.interaction_count}")
    return EXIT_OK


def cmd_solve(a) -> int:
    inst = formats.read_instance(a.instance)
    if a.bias_grid is not None:
        truth = None
        if a.truth:
            truth = formats.read_volume(a.truth)
            _grid_of_truth(truth, inst.node_count)
        jobs = [
            (inst, a.algo, float(b), a.bias_nodes_only,
             truth.truth_mask() if truth else None, truth.dims if truth else None)
            for b in a.bias_grid
        ]
        cols = ["bias", "objective", "nodes_in_separator", "moves", "wall_ms"]
        if truth:
            cols += ["viws", "fc", "fj", "vins"]
        print("\t".join(cols))
        for row in _map(_sweep_job, jobs):
            print("\t".join(f"{x:.6f}" if isinstance(x, float) else str(x) for x in row))
        return EXIT_OK
    inst = apply_bias(inst, a.bias, a.bias_nodes_only) if a.bias else inst
    t0 = time.perf_counter()
    mask, val, moves, trace = run_solver(inst, a.algo)
    ms = (time.perf_counter() - t0) * 1e3
    if a.trace:
        for x in trace:
            print(formats.fmt_real(x))
    if a.out:
        Path(a.out).write_text(formats.dumps_separator(inst.node_count, mask), encoding="ascii")
    print(f"objective={formats.fmt_real(val)} nodes_in_separator={int(mask.sum())} moves={moves} wall_ms={ms:.1f}")
    return EXIT_OK


def cmd_trace(a) -> int:
    inst = formats.read_instance(a.instance)
    if a.bias:
        inst = apply_bias(inst, a.bias, a.bias_nodes_only)
    _, _, _, trace = run_solver(inst, a.algo)
    for x in trace:
        print(formats.fmt_real(x))
    return EXIT_OK


def _watershed_sweep_job(gray, start, ends, truth_mask):
    rec = flood(gray, start)
    truth_lab = induced_labels(grid3(*gray.dims), truth_mask) if truth_mask is not None else None
    rows = []
    for end in ends:
        if end < start:
            continue
        lab = sweep_end(rec, end).ravel()
        mask = lab < 0
        row = [start, end, int(mask.sum())]
        if truth_lab is not None:
            w, ns = scores_from_labels(induced_from_regions(lab), mask, truth_lab, truth_mask)
            row += [w.vi, w.false_cut, w.false_join, ns.vi]
        rows.append(row)
    return rows


def cmd_watershed(a) -> int:
    gray = formats.read_volume(a.gray)
    if not isinstance(gray, GrayVolume):
        raise PreconditionError("watershed needs a gray volume")
    sweep = a.grid is not None or a.start_grid is not None or a.end_grid is not None
    if not sweep:
        if a.start is None or a.end is None:
            raise PreconditionError("give --start and --end, or a sweep grid")
        if a.start > a.end:
            raise PreconditionError("theta_start must not exceed theta_end")
        mask = (sweep_end(flood(gray, a.start), a.end) < 0).ravel()
        if a.out:
            Path(a.out).write_text(formats.dumps_separator(mask.size, mask), encoding="ascii")
        print(f"nodes_in_separator={int(mask.sum())}")
        return EXIT_OK
    starts, ends = (np.linspace(*g) for g in WATERSHED_GRIDS[a.grid or "filaments"])
    if a.start_grid is not None:
        starts = a.start_grid
    if a.end_grid is not None:
        ends = a.end_grid
    truth = formats.read_volume(a.truth) if a.truth else None
    if truth is not None:
        _grid_of_truth(truth, gray.gray.size)
    tm = truth.truth_mask() if truth is not None else None
    cols = ["theta_start", "theta_end", "nodes_in_separator"] + (["viws", "fc", "fj", "vins"] if tm is not None else [])
    print("\t".join(cols))
    for rows in _map(_watershed_sweep_job, [(gray, float(s), ends, tm) for s in starts]):
        for row in rows:
            print("\t".join(f"{x:.6f}" if isinstance(x, float) else str(x) for x in row))
    return EXIT_OK


def cmd_evaluate(a) -> int:
    n, ids = formats.loads_separator(Path(a.pred).read_text(encoding="ascii"))
    truth = formats.read_volume(a.truth)
    if not isinstance(truth, BinaryVolume):
        raise PreconditionError("truth must be a binary volume")
    g = _grid_of_truth(truth, n)
    w = viws(g, ids, truth.truth_mask())
    ns = vins(g, ids, truth.truth_mask())
    print(f"viws vi={w.vi:.6f} fc={w.false_cut:.6f} fj={w.false_join:.6f}")
    print(f"vins vi={ns.vi:.6f} fcns={ns.false_cut:.6f} fjns={ns.false_join:.6f}")
    return EXIT_OK


def cmd_reduce(a) -> int:
    text = Path(a.input).read_text(encoding="ascii")
    if a.source == "3sat":
        clauses, _ = formats.loads_dimacs(text)
        inst, x = sat3_to_consistency(clauses)
        formats.write_instance(a.out, inst)
        if a.out_partial:
            Path(a.out_partial).write_text(formats.dumps_partial(x), encoding="ascii")
        print("witness=satisfiable iff the partial assignment is consistent")
        return EXIT_OK
    if a.source == "msp":
        res = msp_to_lmp(formats.loads_instance(text))
        Path(a.out).write_text(formats.dumps_lmp(res.instance), encoding="ascii")
    else:
        if a.source == "lmp":
            res = lmp_to_msp(formats.loads_lmp(text))
        elif a.source == "qubo":
            res = qubo_to_msp(*formats.loads_qubo(text))
        else:
            graph, terms, w = formats.loads_terminals(text)
            res = (steiner_to_msp if a.source == "steiner" else mtvs_to_msp)(graph, terms, w)
        formats.write_instance(a.out, res.instance)
    print(f"offset={formats.fmt_real(res.value_offset)} sign={res.value_sign} witness={res.witness_map}")
    return EXIT_OK


def cmd_oracle(a) -> int:
    text = Path(a.input).read_text(encoding="ascii")
    if a.problem == "msp":
        S, val = brute_force_msp(formats.loads_instance(text))
        print(f"objective={formats.fmt_real(val)} separator={' '.join(map(str, sorted(S)))}")
    elif a.problem == "lmp":
        print(f"objective={formats.fmt_real(brute_force_lmp(formats.loads_lmp(text)))}")
    elif a.problem == "qubo":
        val, x = brute_force_qubo(*formats.loads_qubo(text))
        print(f"value={formats.fmt_real(val)} x={''.join(map(str, x))}")
    else:
        if not a.partial:
            raise PreconditionError("consistency needs --partial")
        inst = formats.loads_instance(text)
        x = formats.loads_partial(Path(a.partial).read_text(encoding="ascii"))
        x.validate(inst)
        print(f"consistent={str(brute_force_consistency(inst, x)).lower()}")
    return EXIT_OK


def bench_row(kind: str, m: int, t: float, algo: str, seed: int, bias: float, repeats: int = 1) -> list:
    """One row of the runtime table; solve time excludes synthesis and construction.

    With repeats > 1 the solve runs that many times and the fastest counts.
    """
    t0 = time.perf_counter()
    _, gray = synth_volume(kind, m, t, seed)
    t1 = time.perf_counter()
    inst = (build_filament_instance if kind == "filaments" else build_cell_instance)(gray)
    inst = apply_bias(inst, bias)
    t2 = time.perf_counter()
    solve = math.inf
    for _ in range(repeats):
        OPS.reset()
        s0 = time.perf_counter()
        run_solver(inst, algo)
        solve = min(solve, time.perf_counter() - s0)
    v = m ** 3
    return [m, v, inst.interaction_count, t1 - t0, t2 - t1, solve, solve / v * 1e6]


def cmd_bench(a) -> int:
    algo = a.algo or ("gsg" if a.kind == "filaments" else "gss")
    print("m\tvoxels\tinteractions\tsynth_s\tbuild_s\tsolve_s\tsolve_us_per_voxel")
    for m in a.m:
        row = bench_row(a.kind, m, a.t, algo, a.seed, a.bias, a.repeats)
        print("\t".join(str(x) if isinstance(x, int) else f"{x:.4f}" for x in row), flush=True)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="msep", description="Multi-separator solvers, reductions and volume benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a truth volume and a gray volume")
    s.add_argument("--kind", choices=["filaments", "cells"], required=True)
    s.add_argument("--m", type=positive_int, default=64)
    s.add_argument("--t", type=unit_interval, default=0.0, help="noise level in [0, 1]")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True, help="output prefix; writes <prefix>_truth.vol and <prefix>_gray.vol")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("build", help="build an instance file from a gray volume")
    s.add_argument("gray")
    s.add_argument("--kind", choices=["filaments", "cells"], required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--long-range-distance", type=positive_int, default=8)
    s.add_argument("--exclude-endpoints", action="store_true", help="drop line endpoints from median/min")
    s.set_defaults(func=cmd_build)

    def solver_args(s, with_dominant=True):
        s.add_argument("instance")
        s.add_argument("--algo", choices=["gss", "gsg", "dominant"] if with_dominant else ["gss", "gsg"], default="gss")
        s.add_argument("--bias", type=float, default=0.0)
        s.add_argument("--bias-nodes-only", action="store_true")

    s = sub.add_parser("solve", help="solve an instance file")
    solver_args(s)
    s.add_argument("--trace", action="store_true", help="print the objective after every move, one per line")
    s.add_argument("--out", help="separator output file")
    s.add_argument("--bias-grid", type=grid_spec, help="sweep biases (lo:hi:count or list) and print a table")
    s.add_argument("--truth", help="binary truth volume; adds viws/vins columns to a bias sweep")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("trace", help="print a local-search objective trace")
    solver_args(s, with_dominant=False)
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("watershed", help="seeded watershed baseline")
    s.add_argument("gray")
    s.add_argument("--start", type=unit_interval)
    s.add_argument("--end", type=unit_interval)
    s.add_argument("--out", help="separator output file")
    s.add_argument("--grid", choices=sorted(WATERSHED_GRIDS), help="sweep the default threshold grids")
    s.add_argument("--start-grid", type=grid_spec)
    s.add_argument("--end-grid", type=grid_spec)
    s.add_argument("--truth", help="binary truth volume; adds metric columns to a sweep")
    s.set_defaults(func=cmd_watershed)

    s = sub.add_parser("evaluate", help="viws/vins of a separator against a truth volume")
    s.add_argument("--pred", required=True)
    s.add_argument("--truth", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("reduce", help="reduce a source problem to a multi-separator problem (or msp to lifted multicut)")
    s.add_argument("--from", dest="source", choices=["lmp", "qubo", "steiner", "mtvs", "3sat", "msp"], required=True)
    s.add_argument("input")
    s.add_argument("--out", required=True)
    s.add_argument("--out-partial", help="3sat only: partial assignment output file")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("oracle", help="exhaustive reference solvers for small inputs")
    s.add_argument("problem", choices=["msp", "lmp", "qubo", "consistency"])
    s.add_argument("input")
    s.add_argument("--partial", help="partial assignment file for consistency")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("bench", help="runtime per voxel over grid sizes")
    s.add_argument("--kind", choices=["filaments", "cells"], required=True)
    s.add_argument("--m", type=positive_int, nargs="+", default=[20, 32, 48, 64])
    s.add_argument("--t", type=unit_interval, default=0.5)
    s.add_argument("--algo", choices=["gss", "gsg"])
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--bias", type=float, default=0.0)
    s.add_argument("--repeats", type=positive_int, default=1, help="solve this many times and report the fastest")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"msep: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except PreconditionError as exc:
        print(f"msep: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"msep: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
