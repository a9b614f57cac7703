"""Depth-first branch-and-bound construction of tetrahedral-carbon paths.

A path grows one carbon at a time on placement circles; the two hydrogens of
a carbon are fixed the moment its successor (or the terminal attachment) is
chosen. Candidate angles are ranked by a distance heuristic and truncated to
the branching factor; length cuts prune branches that cannot beat the
shortest path found so far. All deviation from ideal geometry is concentrated
in the single terminal attachment, quantified by its NRMSD.
"""

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .angular import (TETRAHEDRAL_RAD, AngularIntervalSet, hydrogen_frame,
                      angle_window_intervals, placement_circle, valid_intervals)
from .core import (TAU, ChemParams, MAX_DEGREE, MolecularGraph, SpatialIndex,
                   bond_angle, infer_geometry)
from .grid import astar, build_grid, line_of_sight, ssmt_astar
from .grid import _attach as grid_attach

DISTANCE_MODES = ("euclidean", "discretized_astar", "discretized_ssmta", "hybrid")
CUTS = ("none", "min_length", "projected_length")


@dataclass(frozen=True)
class SearchConfig:
    branching_factor: int = 3
    n_samples: int = 12
    min_spacing: float = 15.0  # degrees
    distance_mode: str = "hybrid"
    max_path_len: int = 15
    cut: str = "projected_length"
    angle_tol: float = 10.0    # degrees, terminal attachment
    length_tol: float = 0.05   # nm, terminal attachment
    max_solutions: int = 1_000_000
    grid_step: float = 0.05    # nm, voxel resolution for discretized distances

    def __post_init__(self):
        if self.branching_factor < 1:
            raise ValueError("branching_factor must be >= 1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.angle_tol <= 0 or self.length_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.distance_mode not in DISTANCE_MODES:
            raise ValueError(f"unknown distance mode {self.distance_mode!r}")
        if self.cut not in CUTS:
            raise ValueError(f"unknown cut {self.cut!r}")


@dataclass
class PartialPath:
    """Chain of placed carbons with per-carbon hydrogen pairs."""

    carbons: tuple
    hydrogens: tuple  # (h1, h2) per carbon; len == len(carbons) when complete
    start: int        # anchor atom id (s)
    target: int       # anchor atom id (t)

    @property
    def length(self) -> int:
        return len(self.carbons)


@dataclass
class PathSolution:
    path: PartialPath
    nrmsd: float

    @property
    def length(self) -> int:
        return self.path.length

    @property
    def atom_count(self) -> int:
        return 3 * self.path.length  # one carbon + two hydrogens per pattern


@dataclass
class SearchStats:
    explored: int = 0   # partial paths entered
    completed: int = 0  # solutions accepted
    wall_time: float = 0.0
    grid_built: bool = False


@dataclass
class SearchResult:
    solutions: list
    stats: SearchStats


def nrmsd_terminal(p_a, p_b, p_c, p_d, config: SearchConfig = SearchConfig(),
                   angle_target_1: float = 109.5, angle_target_2: float = 109.5,
                   bond_target: float = 0.15) -> float:
    """Terminal-attachment distortion: two angle terms and one length term,
    each normalized by its tolerance.

    The measured quantities are angle(a,b,c), angle(b,c,d) and ||b - c||; in
    attachment use b is the last path carbon, c the target atom, a/d their
    respective chain neighbors.
    """
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    p_c = np.asarray(p_c, dtype=float)
    p_d = np.asarray(p_d, dtype=float)
    ang1 = bond_angle(p_a, p_b, p_c)
    ang2 = bond_angle(p_b, p_c, p_d)
    blen = float(np.linalg.norm(p_b - p_c))
    t1 = (ang1 - angle_target_1) / config.angle_tol
    t2 = (ang2 - angle_target_2) / config.angle_tol
    t3 = (blen - bond_target) / config.length_tol
    return math.sqrt(t1 * t1 + t2 * t2 + t3 * t3)


def min_length_cut(partial: PartialPath, best_len: float) -> bool:
    """Prune partial paths already longer than the best known solution."""
    return partial.length > best_len


def projected_length_cut(partial: PartialPath, target, best_len: float,
                         params: ChemParams = ChemParams(),
                         config: SearchConfig = SearchConfig()) -> bool:
    """Prune when even an optimistic completion cannot beat best_len.

    Each added pattern advances the tip by at most one heavy-bond length, so
    at least ceil((dist - cov - tol) / cov) more patterns are needed.
    """
    tip = np.asarray(partial.carbons[-1], dtype=float)
    est = _remaining_estimate(tip, np.asarray(target, dtype=float), params, config)
    return partial.length + est > best_len


def _remaining_estimate(tip, target, params: ChemParams, config: SearchConfig) -> int:
    d = float(np.linalg.norm(tip - target))
    gap = d - params.cov_heavy - config.length_tol
    if gap <= 0:
        return 0
    return int(math.ceil(gap / params.cov_heavy))


def candidates_euclidean(intervals: AngularIntervalSet, circle, target,
                         config: SearchConfig = SearchConfig()) -> list[float]:
    """Angles seeded at the analytic distance minimum, stepping symmetrically
    outward and snapping forbidden hits onward in the stepping direction."""
    if intervals.is_empty():
        return []
    theta_star = circle.azimuth(target)
    total = intervals.measure()
    step = max(total / config.n_samples, math.radians(config.min_spacing))
    first = intervals.nearest(theta_star)
    cands = [first % TAU]
    seen = {round(first % TAU, 9)}
    fwd = first
    bwd = first
    for _ in range(2 * config.n_samples):
        if len(cands) >= config.n_samples:
            break
        fwd = intervals.snap_forward((fwd + step) % TAU)
        key = round(fwd % TAU, 9)
        if key not in seen:
            seen.add(key)
            cands.append(fwd % TAU)
        if len(cands) >= config.n_samples:
            break
        bwd = intervals.snap_backward((bwd - step) % TAU)
        key = round(bwd % TAU, 9)
        if key not in seen:
            seen.add(key)
            cands.append(bwd % TAU)
    return cands


def candidates_uniform(intervals: AngularIntervalSet, n: int) -> list[float]:
    """Deterministic adaptive refinement: one midpoint sample per interval
    (largest first), then repeatedly sample the longest remaining segment."""
    ivs = sorted(intervals.intervals, key=lambda iv: -(iv[1] - iv[0]))
    if not ivs or n <= 0:
        return []
    samples: list[float] = []
    segs: list[tuple[float, int, float, float]] = []  # (-len, order, lo, hi)
    order = 0
    for lo, hi in ivs[:n]:
        mid = 0.5 * (lo + hi)
        samples.append(mid % TAU)
        for a, b in ((lo, mid), (mid, hi)):
            heapq.heappush(segs, (-(b - a), order, a, b))
            order += 1
    while len(samples) < n and segs:
        _, _, lo, hi = heapq.heappop(segs)
        mid = 0.5 * (lo + hi)
        samples.append(mid % TAU)
        for a, b in ((lo, mid), (mid, hi)):
            heapq.heappush(segs, (-(b - a), order, a, b))
            order += 1
    return samples


def _circular_gap(a: float, b: float) -> float:
    d = abs(a - b) % TAU
    return min(d, TAU - d)


class _PathSearch:
    """One (s, t) search over an immutable substrate + cage snapshot."""

    def __init__(self, substrate: MolecularGraph, cage: MolecularGraph,
                 s: int, t: int, config: SearchConfig, params: ChemParams):
        if s == t:
            raise ValueError("start and target must differ")
        self.graph = substrate.merge(cage)
        self.index = SpatialIndex(self.graph, cell=params.d_weak)
        self.config = config
        self.params = params
        for aid in (s, t):
            atom = self.graph.atom(aid)
            if not self.graph.neighbors(aid):
                raise ValueError(f"anchor atom {aid} has no intra-pattern bond")
            if self.graph.degree(aid) >= MAX_DEGREE[atom.element]:
                raise ValueError(f"anchor atom {aid} has no free valence slot")
        self.s = s
        self.t = t
        self.s_pos = self.graph.atom(s).pos
        self.t_pos = self.graph.atom(t).pos
        self.t_neighbors = [self.graph.atom(n).pos
                            for n in sorted(self.graph.neighbors(t))]
        self.t_target_angle = self._anchor_angle_target(t)
        self.s_target_angle = self._anchor_angle_target(s)
        self.tetra_deg = math.degrees(TETRAHEDRAL_RAD)

        self.solutions: list[PathSolution] = []
        self.best_len = math.inf
        self.stats = SearchStats()
        self._grid = None
        self._stop = False

    def _anchor_angle_target(self, aid: int) -> float:
        atom = self.graph.atom(aid)
        geom = atom.geometry or infer_geometry(atom.element,
                                               self.graph.degree(aid) + 1)
        if geom is None:
            geom = "tetrahedral"
        return self.params.vsepr_angles[geom][0]

    def _grid_or_build(self):
        if self._grid is None:
            # the anchors must not block their own attachment neighborhoods
            self._grid = build_grid(self.graph, self.params,
                                    block_threshold=self.params.col,
                                    step=self.config.grid_step,
                                    exclude_ids=frozenset((self.s, self.t)))
            self.stats.grid_built = True
        return self._grid

    # -- scoring -----------------------------------------------------------

    def _score(self, points: list[np.ndarray], tip) -> list[float]:
        mode = self.config.distance_mode
        if mode == "hybrid":
            visible = line_of_sight(tip, self.t_pos, self.graph, self.index,
                                    clearance=self.params.col,
                                    exclude_ids=frozenset((self.s, self.t)))
            mode = "euclidean" if visible else "discretized_ssmta"
        if mode == "euclidean":
            return [float(np.linalg.norm(p - self.t_pos)) for p in points]
        grid = self._grid_or_build()
        if mode == "discretized_astar":
            scores = [astar(grid, p, self.t_pos) for p in points]
        else:
            scores = ssmt_astar(grid, points, self.t_pos)
        # the grid only covers the molecule's bounding box plus margin; a
        # candidate it cannot attach is scored by straight line, while an
        # attached-but-disconnected one stays hopeless and is dropped
        for i, p in enumerate(points):
            if math.isinf(scores[i]) and (not grid.in_bounds(p)
                                          or not grid_attach(grid, p)):
                scores[i] = float(np.linalg.norm(p - self.t_pos))
        return scores

    def _candidates(self, intervals: AngularIntervalSet, circle, tip):
        mode = self.config.distance_mode
        if mode == "hybrid":
            visible = line_of_sight(tip, self.t_pos, self.graph, self.index,
                                    clearance=self.params.col,
                                    exclude_ids=frozenset((self.s, self.t)))
            mode = "euclidean" if visible else "discretized"
        if mode == "euclidean":
            return candidates_euclidean(intervals, circle, self.t_pos, self.config)
        return candidates_uniform(intervals, self.config.n_samples)

    def _select(self, intervals: AngularIntervalSet, circle, tip):
        """Best-scoring candidate angles, at most branching_factor of them."""
        thetas = self._candidates(intervals, circle, tip)
        if not thetas:
            return []
        theta_first = thetas[0]
        points = [circle.point(th) for th in thetas]
        scores = self._score(points, tip)
        ranked = sorted(
            (s, _circular_gap(th, theta_first), th, i)
            for i, (s, th) in enumerate(zip(scores, thetas))
            if math.isfinite(s))
        return [(th, points[i])
                for _, _, th, i in ranked[:self.config.branching_factor]]

    # -- chemistry checks ---------------------------------------------------

    def _clear_of_obstacles(self, pos, placed) -> bool:
        """Distance sweep for one new path atom: d_weak versus substrate
        atoms, col versus everything else (strict violations only)."""
        p = self.params
        for aid in self.index.query(pos, p.d_weak):
            atom = self.graph.atom(aid)
            d = float(np.linalg.norm(atom.pos - pos))
            if atom.role == "substrate":
                if d < p.d_weak:
                    return False
            elif d < p.col:
                return False
        for q in placed:
            if float(np.linalg.norm(q - pos)) < p.col:
                return False
        return True

    def _try_attach(self, prev, tip, placed):
        """Terminal attachment of tip to t; returns (nrmsd, h1, h2) or None."""
        cfg = self.config
        p = self.params
        blen = float(np.linalg.norm(tip - self.t_pos))
        if abs(blen - p.cov_heavy) > cfg.length_tol:
            return None
        ang_tip = bond_angle(prev, tip, self.t_pos)
        if abs(ang_tip - 109.5) > cfg.angle_tol:
            return None
        for nb_pos in self.t_neighbors:
            ang_t = bond_angle(tip, self.t_pos, nb_pos)
            if abs(ang_t - self.t_target_angle) > cfg.angle_tol:
                return None
        # hydrogens of the terminal carbon, induced by the target azimuth
        cc = placement_circle(prev, tip, p.cov_heavy, self.tetra_deg)
        hf = hydrogen_frame(prev, tip, p)
        theta_t = cc.azimuth(self.t_pos)
        h1 = hf.circle.point(theta_t + hf.delta)
        h2 = hf.circle.point(theta_t - hf.delta)
        if not (self._clear_of_obstacles(h1, placed)
                and self._clear_of_obstacles(h2, placed)):
            return None
        nr = nrmsd_terminal(prev, tip, self.t_pos, self.t_neighbors[0], cfg,
                            angle_target_1=109.5,
                            angle_target_2=self.t_target_angle,
                            bond_target=p.cov_heavy)
        return nr, h1, h2

    # -- search --------------------------------------------------------------

    def run(self) -> SearchResult:
        t0 = time.perf_counter()
        cfg = self.config
        p = self.params

        # seed circle around s, pivoting on its lowest-id neighbor; s keeps
        # its own geometry so remaining neighbors restrict the circle
        prev_id = min(self.graph.neighbors(self.s))
        prev_pos = self.graph.atom(prev_id).pos
        if self.s_target_angle == self.params.vsepr_angles["tetrahedral"][0]:
            seed_angle = self.tetra_deg
        else:
            seed_angle = self.s_target_angle
        intervals = valid_intervals(
            prev_pos, self.s_pos, self.index, p,
            include_hydrogens=False,
            exempt_ids=frozenset((self.s,)),
            bond_len=p.cov_heavy, bond_angle_deg=seed_angle)
        circle = placement_circle(prev_pos, self.s_pos, p.cov_heavy, seed_angle)
        for nb in sorted(self.graph.neighbors(self.s)):
            if nb == prev_id:
                continue
            geom = (self.graph.atom(self.s).geometry
                    or infer_geometry(self.graph.atom(self.s).element,
                                      self.graph.degree(self.s) + 1)
                    or "tetrahedral")
            target, margin = p.vsepr_angles[geom]
            win = angle_window_intervals(circle, self.s_pos,
                                         self.graph.atom(nb).pos,
                                         target - margin, target + margin)
            intervals = intervals.intersect(win)
        for theta, pos in self._select(intervals, circle, self.s_pos):
            if self._stop:
                break
            self._dfs(self.s_pos, pos, [pos], [], [])
        self.stats.wall_time = time.perf_counter() - t0
        sols = sorted(self.solutions,
                      key=lambda s: (s.length, s.nrmsd,
                                     tuple(map(tuple, s.path.carbons))))
        return SearchResult(sols, self.stats)

    def _dfs(self, prev, tip, carbons, hpairs, placed):
        """prev/tip are chain positions; placed holds committed path atoms
        (all carbons and hydrogens except the tip and its pending pair)."""
        cfg = self.config
        p = self.params
        self.stats.explored += 1
        length = len(carbons)

        if cfg.cut == "min_length" and length > self.best_len:
            return
        if cfg.cut == "projected_length":
            est = _remaining_estimate(tip, self.t_pos, p, cfg)
            if length + est > self.best_len:
                return

        attach = self._try_attach(prev, tip, placed)
        if attach is not None:
            nr, h1, h2 = attach
            hydrogens = tuple(hpairs) + ((h1, h2),)
            sol = PathSolution(
                PartialPath(tuple(np.array(c) for c in carbons), hydrogens,
                            self.s, self.t), nr)
            self.solutions.append(sol)
            self.stats.completed += 1
            self.best_len = min(self.best_len, length)
            if self.stats.completed >= cfg.max_solutions:
                self._stop = True
                return

        if length >= cfg.max_path_len:
            return

        intervals = valid_intervals(prev, tip, self.index, p,
                                    include_hydrogens=True,
                                    extra_obstacles=[(q, False) for q in placed])
        if intervals.is_empty():
            return
        circle = placement_circle(prev, tip, p.cov_heavy, self.tetra_deg)
        hf = hydrogen_frame(prev, tip, p)
        for theta, pos in self._select(intervals, circle, tip):
            if self._stop:
                return
            h1 = hf.circle.point(theta + hf.delta)
            h2 = hf.circle.point(theta - hf.delta)
            self._dfs(tip, pos, carbons + [pos], hpairs + [(h1, h2)],
                      placed + [np.asarray(tip), h1, h2])


def run_search(substrate: MolecularGraph, cage: MolecularGraph, s: int, t: int,
               config: SearchConfig = SearchConfig(),
               params: ChemParams = ChemParams()) -> SearchResult:
    """Full search result including node counters."""
    return _PathSearch(substrate, cage, s, t, config, params).run()


def construct_paths(substrate: MolecularGraph, cage: MolecularGraph,
                    s: int, t: int, config: SearchConfig = SearchConfig(),
                    params: ChemParams = ChemParams()) -> list[PathSolution]:
    """All molecular paths from s to t found within the configured limits,
    sorted by (length, NRMSD). Empty list when none exists."""
    return run_search(substrate, cage, s, t, config, params).solutions
