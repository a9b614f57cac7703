"""Batch command-line front end.

Subcommands: validate | patterns | paths | trees | cage | bench.
Exit codes: 0 success, 2 bad input, 3 infeasible instance, 4 no solution
within budget.
"""

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict

from . import __version__
from .core import ChemParams, validate
from .ict import MultipartiteGraph, count_icts, enumerate_icts, ordered_icts
from .io import MciError, dumps_instance, load_instance, save_instance, write_xyz
from .patterns import PlacementConfig, generate_patterns, patterns_to_graph
from .pathsearch import CUTS, DISTANCE_MODES, SearchConfig, run_search
from .pipeline import (InfeasibleError, PipelineConfig, assemble_instance,
                       split_instance)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_NO_SOLUTION = 4


def _search_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("search")
    g.add_argument("--branching", type=int, default=3,
                   help="candidate positions kept per step (default 3)")
    g.add_argument("--samples", type=int, default=12,
                   help="angular samples per step (default 12)")
    g.add_argument("--spacing", type=float, default=15.0,
                   help="minimum angular spacing, degrees (default 15)")
    g.add_argument("--distance", choices=DISTANCE_MODES, default="hybrid",
                   help="distance heuristic (default hybrid)")
    g.add_argument("--grid-step", type=float, default=0.05,
                   help="voxel grid resolution, nm (default 0.05)")
    g.add_argument("--max-len", type=int, default=15,
                   help="maximum patterns per path (default 15)")
    g.add_argument("--cut", choices=CUTS, default="projected_length",
                   help="pruning rule (default projected_length)")
    g.add_argument("--max-solutions", type=int, default=1_000_000,
                   help="total solutions per search (default 1000000)")
    g.add_argument("--angle-tol", type=float, default=10.0,
                   help="terminal angle tolerance, degrees (default 10)")
    g.add_argument("--length-tol", type=float, default=0.05,
                   help="terminal bond tolerance, nm (default 0.05)")


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        branching_factor=args.branching,
        n_samples=args.samples,
        min_spacing=args.spacing,
        distance_mode=args.distance,
        max_path_len=args.max_len,
        cut=args.cut,
        angle_tol=args.angle_tol,
        length_tol=args.length_tol,
        max_solutions=args.max_solutions,
        grid_step=args.grid_step,
    )


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT) from None
    except MciError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT) from None


def cmd_validate(args) -> int:
    graph = _load(args.instance)
    report = validate(graph, ChemParams())
    if report.ok:
        print(f"{args.instance}: ok ({len(graph)} atoms)")
        return EXIT_OK
    print(f"{args.instance}: {len(report.violations)} violation(s)")
    for v in report.violations:
        lo, hi = v.allowed
        print(f"  {v.kind}\tatoms={','.join(map(str, v.atoms))}\t"
              f"measured={v.measured:.4f}\tallowed=[{lo:.4f}, {hi:.4f}]")
    return 1


def cmd_patterns(args) -> int:
    graph = _load(args.instance)
    cfg = PlacementConfig(stacking_distance=args.stacking_distance)
    sets = generate_patterns(graph, ChemParams(), cfg, max_sets=args.max_sets)
    if not sets:
        print("no binding patterns placeable", file=sys.stderr)
        return EXIT_NO_SOLUTION
    for i, pats in enumerate(sets):
        out = graph.merge(patterns_to_graph(pats, start_id=max(graph.atom_ids()) + 1))
        dest = args.output if len(sets) == 1 else f"{args.output}.{i}"
        save_instance(out, dest, comment=f"pattern set {i}: {len(pats)} patterns")
        print(f"wrote {dest} ({len(pats)} patterns)")
    return EXIT_OK


def cmd_paths(args) -> int:
    graph = _load(args.instance)
    try:
        substrate, patterns = split_instance(graph)
        result = run_search(substrate, patterns, args.source, args.target,
                            _search_config(args), ChemParams())
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    sols = result.solutions
    print(f"#solutions\t{len(sols)}")
    print(f"#partial-paths\t{result.stats.explored}")
    print(f"time(ms)\t{result.stats.wall_time * 1e3:.2f}")
    if not sols:
        return EXIT_NO_SOLUTION
    print("length\tatoms\tnrmsd")
    for s in sols[:args.top]:
        print(f"{s.length}\t{s.atom_count}\t{s.nrmsd:.4f}")
    return EXIT_OK


def cmd_trees(args) -> int:
    if args.k < 1 or args.l < 1:
        print("error: k and l must be >= 1", file=sys.stderr)
        return EXIT_BAD_INPUT
    return _bench_row(args.k, args.l, args.ordered, args.limit, header=True)


def _bench_row(k: int, l: int, ordered: bool, limit, header: bool) -> int:
    g = MultipartiteGraph.synthetic(k, l)
    t0 = time.perf_counter()
    n = count_icts(g)
    enum_s = time.perf_counter() - t0
    sort_pct = ""
    if ordered:
        try:
            t1 = time.perf_counter()
            trees = ordered_icts(g, limit=limit)
            sort_s = time.perf_counter() - t1
            sort_pct = f"{100.0 * sort_s / enum_s:.0f}" if enum_s > 0 else "N/A"
            del trees
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BAD_INPUT
    delay_ns = 1e9 * enum_s / n if n else float("nan")
    if header:
        print("Instance\t#Trees\tTime(ms)\tDelay(ns)\tSortingOverhead(%)")
    print(f"({k},{l})\t{n}\t{enum_s * 1e3:.3f}\t{delay_ns:.0f}\t{sort_pct or 'N/A'}")
    return EXIT_OK


def cmd_bench(args) -> int:
    print("Instance\t#Trees\tTime(ms)\tDelay(ns)\tSortingOverhead(%)")
    for pair in args.pairs:
        try:
            k, l = (int(x) for x in pair.split(","))
        except ValueError:
            print(f"error: bad pair {pair!r} (want k,l)", file=sys.stderr)
            return EXIT_BAD_INPUT
        rc = _bench_row(k, l, args.ordered, None, header=False)
        if rc != EXIT_OK:
            return rc
    return EXIT_OK


def cmd_cage(args) -> int:
    import os

    graph = _load(args.instance)
    search = _search_config(args)
    config = PipelineConfig(
        mode=args.mode,
        early_edge_removal=not args.no_early_edge_removal,
        max_cages=args.max_cages,
        time_budget=args.time_budget,
        search=search,
        ict_cap=args.ict_cap,
    )
    os.makedirs(args.output, exist_ok=True)
    with open(args.instance, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    manifest = {
        "tool": "molcage",
        "version": __version__,
        "input": os.path.basename(args.instance),
        "input_sha256": digest,
        "seed": args.seed,
        "workers": args.workers,
        "pipeline": {k: (asdict(v) if k == "search" else v)
                     for k, v in asdict(config).items()},
    }
    with open(os.path.join(args.output, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    try:
        cages, stats = assemble_instance(graph, config, ChemParams())
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    stats_path = os.path.join(args.output, "stats.tsv")
    with open(stats_path, "w") as fh:
        fh.write(stats.table_header() + "\n")
        fh.write(stats.table_row(config.mode, config.early_edge_removal) + "\n")
    frames = []
    for i, cage in enumerate(cages):
        path = os.path.join(args.output, f"cage_{i:03d}.mci")
        save_instance(cage.graph, path,
                      comment=(f"cage {i}: atoms={cage.cage_atom_count} "
                               f"avg_nrmsd={cage.average_nrmsd:.4f}"))
        frames.append((cage.graph, f"cage {i}"))
    if frames:
        write_xyz(frames, os.path.join(args.output, "cages.xyz"))
    print(stats.table_header())
    print(stats.table_row(config.mode, config.early_edge_removal))
    return EXIT_OK if cages else EXIT_NO_SOLUTION


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="molcage",
        description="construct chemically realistic molecular cages around a substrate")
    ap.add_argument("--version", action="version", version=f"molcage {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance against the realism constraints")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("patterns", help="detect sites and place binding patterns")
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--stacking-distance", type=float, default=0.35)
    p.add_argument("--max-sets", type=int, default=1)
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("paths", help="construct molecular paths between two anchors")
    p.add_argument("instance")
    p.add_argument("--source", type=int, required=True, help="start atom id")
    p.add_argument("--target", type=int, required=True, help="target atom id")
    p.add_argument("--top", type=int, default=10, help="solutions to print")
    _search_flags(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("trees", help="enumerate interconnection trees of the (k,l) instance")
    p.add_argument("k", type=int)
    p.add_argument("l", type=int)
    p.add_argument("--ordered", action="store_true", help="also sort by weight")
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_trees)

    p = sub.add_parser("cage", help="assemble full cages for an instance")
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--mode", choices=("on_the_fly", "ordered"), default="on_the_fly")
    p.add_argument("--no-early-edge-removal", action="store_true")
    p.add_argument("--max-cages", type=int, default=10)
    p.add_argument("--time-budget", type=float, default=120.0)
    p.add_argument("--ict-cap", type=int, default=10 ** 8)
    p.add_argument("--workers", type=int, default=1,
                   help="tree-level workers (1 = reproducible mode)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed recorded in the manifest (algorithms are deterministic)")
    _search_flags(p)
    p.set_defaults(func=cmd_cage)

    p = sub.add_parser("bench", help="tree-enumeration benchmark table")
    p.add_argument("pairs", nargs="+", help="k,l pairs, e.g. 3,3 3,6 5,3")
    p.add_argument("--ordered", action="store_true")
    p.set_defaults(func=cmd_bench)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
