"""Collision-aware voxel grid and shortest-path distance estimates.

Grid vertices within the blocking threshold of any atom are unusable; free
vertices form a graph with 26-neighborhood edges weighted by Euclidean
distance. Query points attach to every free vertex within one cell diagonal.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .core import ChemParams, MolecularGraph, SpatialIndex

_NEIGHBOR_OFFSETS = [(dx, dy, dz)
                     for dx in (-1, 0, 1)
                     for dy in (-1, 0, 1)
                     for dz in (-1, 0, 1)
                     if (dx, dy, dz) != (0, 0, 0)]


@dataclass
class VoxelGrid:
    origin: np.ndarray
    step: float
    dims: tuple[int, int, int]
    blocked: np.ndarray  # bool, shape dims

    def node_pos(self, idx: tuple[int, int, int]) -> np.ndarray:
        return self.origin + self.step * np.asarray(idx, dtype=float)

    def in_bounds(self, pos) -> bool:
        pos = np.asarray(pos, dtype=float)
        hi = self.origin + self.step * (np.asarray(self.dims) - 1)
        return bool(np.all(pos >= self.origin - 1e-12) and np.all(pos <= hi + 1e-12))

    def n_blocked(self) -> int:
        return int(self.blocked.sum())


def build_grid(graph: MolecularGraph, params: ChemParams = ChemParams(),
               block_threshold: float | None = None,
               step: float = 0.05,
               exclude_ids: frozenset = frozenset()) -> VoxelGrid:
    """Grid over the molecule's bounding box expanded by d_weak per side.

    The default blocking threshold is the collision distance: the grid
    estimates where path atoms may travel, and those must clear obstacles by
    at least col (the d_weak constraint versus the substrate is enforced
    exactly by the angular machinery, not by this coarse grid).

    exclude_ids lists atoms that do not block (the anchors of a path search,
    whose attachment neighborhoods must stay reachable); all atoms still
    define the bounding box.
    """
    if len(graph) == 0:
        raise ValueError("empty bounding box")
    if block_threshold is None:
        block_threshold = params.col
    pts = graph.positions()
    lo = pts.min(axis=0) - params.d_weak
    hi = pts.max(axis=0) + params.d_weak
    dims = tuple(int(math.ceil((hi[i] - lo[i]) / step)) + 1 for i in range(3))
    blocked = np.zeros(dims, dtype=bool)
    reach = int(math.ceil(block_threshold / step))
    thr2 = block_threshold * block_threshold
    if exclude_ids:
        pts = np.array([a.pos for a in graph.atoms() if a.id not in exclude_ids],
                       dtype=float).reshape(-1, 3)
    for p in pts:
        base = np.floor((p - lo) / step).astype(int)
        i0 = np.maximum(base - reach, 0)
        i1 = np.minimum(base + reach + 1, dims)
        if np.any(i0 >= i1):
            continue
        ix = np.arange(i0[0], i1[0])
        iy = np.arange(i0[1], i1[1])
        iz = np.arange(i0[2], i1[2])
        dx2 = (lo[0] + ix * step - p[0]) ** 2
        dy2 = (lo[1] + iy * step - p[1]) ** 2
        dz2 = (lo[2] + iz * step - p[2]) ** 2
        d2 = dx2[:, None, None] + dy2[None, :, None] + dz2[None, None, :]
        blocked[i0[0]:i1[0], i0[1]:i1[1], i0[2]:i1[2]] |= d2 < thr2
    return VoxelGrid(lo, step, dims, blocked)


def _attach(grid: VoxelGrid, pos: np.ndarray) -> list[tuple[int, float]]:
    """Free grid nodes within one cell diagonal of pos, with true distances."""
    nx, ny, nz = grid.dims
    base = np.floor((pos - grid.origin) / grid.step).astype(int)
    out = []
    diag = grid.step * math.sqrt(3.0) + 1e-12
    for di in range(-1, 3):
        for dj in range(-1, 3):
            for dk in range(-1, 3):
                i, j, k = base[0] + di, base[1] + dj, base[2] + dk
                if not (0 <= i < nx and 0 <= j < ny and 0 <= k < nz):
                    continue
                if grid.blocked[i, j, k]:
                    continue
                d = float(np.linalg.norm(grid.origin
                                         + grid.step * np.array([i, j, k], dtype=float)
                                         - pos))
                if d <= diag:
                    out.append(((i * ny + j) * nz + k, d))
    return out


def _neighbors(grid: VoxelGrid, flat: int):
    nx, ny, nz = grid.dims
    k = flat % nz
    j = (flat // nz) % ny
    i = flat // (ny * nz)
    blocked = grid.blocked
    step = grid.step
    for dx, dy, dz in _NEIGHBOR_OFFSETS:
        ii, jj, kk = i + dx, j + dy, k + dz
        if not (0 <= ii < nx and 0 <= jj < ny and 0 <= kk < nz):
            continue
        if blocked[ii, jj, kk]:
            continue
        w = step * math.sqrt(dx * dx + dy * dy + dz * dz)
        yield (ii * ny + jj) * nz + kk, w


def _quantize(d: float) -> float:
    # Distances are reported at 1e-7 nm resolution so that equal-length
    # routes found in different traversal orders compare equal exactly.
    return round(d, 7) if math.isfinite(d) else d


def astar(grid: VoxelGrid, src, dst) -> float:
    """Shortest collision-free grid distance from src to dst (nm).

    Returns math.inf when either endpoint cannot attach or no route exists.
    Finite results are quantized to 1e-7 nm.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if np.array_equal(src, dst):
        return 0.0
    src_attach = _attach(grid, src)
    dst_attach = dict(_attach(grid, dst))
    if not src_attach or not dst_attach:
        return math.inf

    ny, nz = grid.dims[1], grid.dims[2]
    origin, step = grid.origin, grid.step

    def node_xyz(flat):
        k = flat % nz
        j = (flat // nz) % ny
        i = flat // (ny * nz)
        return origin + step * np.array([i, j, k], dtype=float)

    def h(flat):
        return float(np.linalg.norm(node_xyz(flat) - dst))

    g: dict[int, float] = {}
    best = math.inf
    heap = []
    for node, w in src_attach:
        if w < g.get(node, math.inf):
            g[node] = w
            heapq.heappush(heap, (w + h(node), w, node))
    while heap:
        f, gu, u = heapq.heappop(heap)
        if f >= best:
            break
        if gu > g.get(u, math.inf):
            continue
        wd = dst_attach.get(u)
        if wd is not None and gu + wd < best:
            best = gu + wd
        for v, w in _neighbors(grid, u):
            ng = gu + w
            if ng < g.get(v, math.inf):
                g[v] = ng
                heapq.heappush(heap, (ng + h(v), ng, v))
    return _quantize(best)


def ssmt_astar(grid: VoxelGrid, sources, target) -> list[float]:
    """astar(grid, s, target) for every source, from one search off the target.

    Runs backward from the target (the voxel graph is undirected), guided by
    the smallest straight-line distance to any still-open source. Finite
    results are quantized to 1e-7 nm.
    """
    target = np.asarray(target, dtype=float)
    sources = [np.asarray(s, dtype=float) for s in sources]
    results = [math.inf] * len(sources)
    open_idx = []
    attach_by_node: dict[int, list[tuple[int, float]]] = {}
    for si, s in enumerate(sources):
        if np.array_equal(s, target):
            results[si] = 0.0
            continue
        att = _attach(grid, s)
        if not att:
            continue
        open_idx.append(si)
        for node, w in att:
            attach_by_node.setdefault(node, []).append((si, w))
    if not open_idx:
        return results

    tgt_attach = _attach(grid, target)
    if not tgt_attach:
        return results

    ny, nz = grid.dims[1], grid.dims[2]
    origin, step = grid.origin, grid.step

    def node_xyz(flat):
        k = flat % nz
        j = (flat // nz) % ny
        i = flat // (ny * nz)
        return origin + step * np.array([i, j, k], dtype=float)

    def h(flat):
        p = node_xyz(flat)
        return min(float(np.linalg.norm(p - sources[si])) for si in open_idx)

    g: dict[int, float] = {}
    heap = []
    for node, w in tgt_attach:
        if w < g.get(node, math.inf):
            g[node] = w
            heapq.heappush(heap, (w + h(node), w, node))
    while heap and open_idx:
        f, gu, u = heapq.heappop(heap)
        if gu > g.get(u, math.inf):
            continue
        for si, w in attach_by_node.get(u, ()):
            if gu + w < results[si]:
                results[si] = gu + w
        # a source is settled once no frontier entry can improve it
        open_idx = [si for si in open_idx if results[si] > f]
        if not open_idx:
            break
        for v, w in _neighbors(grid, u):
            ng = gu + w
            if ng < g.get(v, math.inf):
                g[v] = ng
                heapq.heappush(heap, (ng + h(v), ng, v))
    return [_quantize(d) for d in results]


def line_of_sight(a, b, graph: MolecularGraph, index: SpatialIndex,
                  clearance: float, exclude_ids: frozenset = frozenset()) -> bool:
    """True when no atom center lies within `clearance` of segment (a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    length = float(np.linalg.norm(ab))
    if length == 0.0:
        raise ValueError("degenerate segment")
    steps = max(1, int(math.ceil(length / index.cell)))
    seen = set()
    query_r = clearance + length / steps
    for i in range(steps + 1):
        p = a + ab * (i / steps)
        for aid in index.query(p, query_r):
            if aid in seen or aid in exclude_ids:
                continue
            seen.add(aid)
            x = graph.atom(aid).pos
            t = float(np.dot(x - a, ab)) / (length * length)
            t = max(0.0, min(1.0, t))
            d = float(np.linalg.norm(a + t * ab - x))
            if d < clearance:
                return False
    return True
