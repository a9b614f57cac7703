"""Full cage assembly: endpoint graph, tree processing, per-edge path
construction with Early Edge Removal, and run statistics."""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import ChemParams, MolecularGraph, SpatialIndex, validate
from .ict import (InterconnectionTree, MultipartiteGraph, enumerate_icts,
                  has_ict, ordered_icts, tree_weight)
from .pathsearch import PathSolution, SearchConfig, construct_paths

MODES = ("on_the_fly", "ordered")


class InfeasibleError(Exception):
    """The endpoint graph admits no interconnection tree."""


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "on_the_fly"
    early_edge_removal: bool = True
    max_cages: int = 10
    time_budget: float = 120.0  # seconds
    search: SearchConfig = field(default_factory=SearchConfig)
    ict_cap: int = 10 ** 8
    validate_input: bool = True

    def __post_init__(self):
        if self.max_cages < 1:
            raise ValueError("max_cages must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class CageSolution:
    graph: MolecularGraph          # substrate + patterns + paths
    tree: InterconnectionTree
    path_stats: list[tuple[int, float]]  # (length, nrmsd) per edge

    @property
    def cage_atom_count(self) -> int:
        """Atoms the cage itself contributes (patterns plus paths)."""
        return sum(1 for a in self.graph.atoms() if a.role != "substrate")

    @property
    def average_nrmsd(self) -> float:
        if not self.path_stats:
            return 0.0
        return sum(n for _, n in self.path_stats) / len(self.path_stats)


@dataclass
class RunStats:
    trees_processed: int = 0
    trees_skipped: int = 0
    cages: int = 0
    mnoa: int | None = None
    average_nrmsd: float | None = None
    wall_time: float = 0.0
    edge_failures: dict = field(default_factory=dict)

    def table_header(self) -> str:
        return "Mode\tEdgeRemoval\t#Cages\t#Trees\tAverageNRMSD\tMNoA\tTotal(s)"

    def table_row(self, mode: str, early: bool) -> str:
        nr = f"{self.average_nrmsd:.3f}" if self.average_nrmsd is not None else "N/A"
        mnoa = str(self.mnoa) if self.mnoa is not None else "N/A"
        return (f"{mode}\t{'yes' if early else 'no'}\t{self.cages}\t"
                f"{self.trees_processed}\t{nr}\t{mnoa}\t{self.wall_time:.2f}")


def endpoint_graph(patterns: MolecularGraph) -> MultipartiteGraph:
    """Multipartite graph over pattern endpoint atoms; one part per pattern,
    edge weights from atom coordinates."""
    parts = []
    coords = {}
    pids = patterns.pattern_ids()
    if not pids:
        raise ValueError("no binding patterns present")
    for pid in pids:
        eps = sorted(a.id for a in patterns.endpoint_atoms(pid))
        if not eps:
            raise ValueError(f"pattern {pid} has no endpoint atoms")
        parts.append(tuple(eps))
        for aid in eps:
            coords[aid] = patterns.atom(aid).pos
    return MultipartiteGraph(tuple(parts), coords)


def split_instance(graph: MolecularGraph) -> tuple[MolecularGraph, MolecularGraph]:
    """Separate an instance into substrate and pattern graphs (ids kept)."""
    sub = MolecularGraph()
    pat = MolecularGraph()
    for a in graph.atoms():
        dst = sub if a.role == "substrate" else pat
        dst.add_atom(a.element, a.pos, role=a.role, pattern_id=a.pattern_id,
                     endpoint=a.endpoint, geometry=a.geometry, atom_id=a.id)
    for a, b, kind in graph.bonds():
        dst = sub if graph.atom(a).role == "substrate" else pat
        if (graph.atom(a).role == "substrate") != (graph.atom(b).role == "substrate"):
            raise ValueError("bond crosses the substrate/pattern boundary")
        dst.add_bond(a, b, kind)
    return sub, pat


def splice_solution(cage: MolecularGraph, sol: PathSolution,
                    params: ChemParams = ChemParams()) -> None:
    """Insert a completed path into the working cage graph: carbons and
    hydrogens with path role, chain bonds, and the attachment-tagged
    terminal bond."""
    prev = sol.path.start
    for i, cpos in enumerate(sol.path.carbons):
        cid = cage.add_atom("C", cpos, role="path")
        cage.add_bond(prev, cid)
        h1, h2 = sol.path.hydrogens[i]
        for hpos in (h1, h2):
            hid = cage.add_atom("H", hpos, role="path")
            cage.add_bond(cid, hid)
        prev = cid
    cage.add_bond(prev, sol.path.target, "attach")


def prepare_anchor(cage: MolecularGraph, aid: int) -> None:
    """Substitution semantics at triangular anchors: the path replaces the
    exocyclic hydrogen, keeping the anchor planar. Must run before the path
    search so the hydrogen does not block its own replacement direction."""
    from .core import infer_geometry
    atom = cage.atom(aid)
    geom = atom.geometry or infer_geometry(atom.element, cage.degree(aid))
    if geom != "triangular":
        return
    hs = [n for n in cage.neighbors(aid) if cage.atom(n).element == "H"]
    if hs:
        cage.remove_atom(min(hs))


def assemble(substrate: MolecularGraph, patterns: MolecularGraph,
             config: PipelineConfig = PipelineConfig(),
             params: ChemParams = ChemParams()) -> tuple[list[CageSolution], RunStats]:
    """Drive tree generation and per-edge path construction into cages.

    For each interconnection tree, edges are processed in tree order; each
    path search sees the substrate, the patterns, and the paths already
    built for this tree. A failing edge abandons the tree and, with Early
    Edge Removal, bans the edge globally. Stops at max_cages, generator
    exhaustion, or the time budget.
    """
    t0 = time.perf_counter()
    params = replace(params, attach_len_tol=config.search.length_tol,
                     attach_angle_tol=config.search.angle_tol)
    if config.validate_input:
        report = validate(substrate.merge(patterns), params)
        if not report.ok:
            raise ValueError(
                f"instance fails validation: {report.violations[0]}")
    ep = endpoint_graph(patterns)
    if not has_ict(ep):
        raise InfeasibleError(
            f"{ep.n_vertices} endpoint atoms cannot connect "
            f"{ep.k} patterns (need >= {2 * (ep.k - 1)})")

    stats = RunStats()
    cages: list[CageSolution] = []
    failed_edges: set[tuple[int, int]] = set()

    def budget_left() -> bool:
        return time.perf_counter() - t0 < config.time_budget

    def process_tree(edges) -> bool:
        """Returns False to stop the whole run."""
        if not budget_left():
            return False
        canon = [tuple(sorted(e)) for e in edges]
        if config.early_edge_removal and any(e in failed_edges for e in canon):
            stats.trees_skipped += 1
            return True
        stats.trees_processed += 1
        working = patterns.copy()
        path_stats: list[tuple[int, float]] = []
        for (u, v), ce in zip(edges, canon):
            prepare_anchor(working, u)
            prepare_anchor(working, v)
            sols = construct_paths(substrate, working, u, v,
                                   config.search, params)
            if not sols:
                stats.edge_failures[ce] = stats.edge_failures.get(ce, 0) + 1
                if config.early_edge_removal:
                    failed_edges.add(ce)
                return True  # abandon this tree
            splice_solution(working, sols[0], params)
            path_stats.append((sols[0].length, sols[0].nrmsd))
        full = substrate.merge(working)
        tree = InterconnectionTree(tuple(edges), tree_weight(ep, edges))
        cages.append(CageSolution(full, tree, path_stats))
        stats.cages += 1
        return stats.cages < config.max_cages

    if config.mode == "ordered":
        for tree in ordered_icts(ep, cap=config.ict_cap):
            if not process_tree(tree.edges):
                break
    else:
        enumerate_icts(ep, lambda edges: process_tree(edges))

    stats.wall_time = time.perf_counter() - t0
    if cages:
        stats.mnoa = min(c.cage_atom_count for c in cages)
        stats.average_nrmsd = (sum(c.average_nrmsd for c in cages) / len(cages))
    return cages, stats


def assemble_instance(instance: MolecularGraph,
                      config: PipelineConfig = PipelineConfig(),
                      params: ChemParams = ChemParams()):
    """assemble() on a combined role-tagged instance graph."""
    substrate, patterns = split_instance(instance)
    return assemble(substrate, patterns, config, params)
