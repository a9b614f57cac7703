"""Substrate interaction sites, binding-pattern placement, and the
conflict-graph / maximal-independent-set selection of compatible sets.

Pre-placed patterns in instance files bypass everything here; this module is
the automatic route from a bare substrate to a pattern set.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (MAX_DEGREE, ChemParams, MolecularGraph, TETRAHEDRAL_DEG)


@dataclass(frozen=True)
class PlacementConfig:
    azimuth_samples: int = 8        # directions tried for the pattern hydrogen
    stacking_distance: float = 0.35  # nm, ring-plane to ring-plane (placeholder default)
    ring_planarity_tol: float = 0.02  # nm
    ring_parallel_tol: float = 5.0    # degrees


@dataclass(frozen=True)
class Site:
    kind: str                 # hydrogen_donor | hydrogen_acceptor | aromatic_ring
    atom_ids: tuple[int, ...]  # donor: (H, heavy); acceptor: (heavy,); ring: cycle

    def bonding_atoms(self) -> frozenset:
        """Atoms that carry the weak interaction itself; each may take part
        in at most one. A donor bonds through its hydrogen, so two donor
        hydrogens on the same heavy atom are independent sites."""
        if self.kind == "hydrogen_donor":
            return frozenset((self.atom_ids[0],))
        return frozenset(self.atom_ids)


@dataclass
class PatternAtom:
    element: str
    pos: np.ndarray
    endpoint: bool = False
    geometry: str | None = None


@dataclass
class BindingPattern:
    """A placed fragment targeting one substrate site.

    kind mirrors the site it complements: a substrate donor receives a
    hydrogen_acceptor fragment and vice versa; rings receive aromatic_ring.
    """

    kind: str
    atoms: list[PatternAtom]
    bonds: list[tuple[int, int]]  # local indices
    site: Site

    def endpoint_indices(self) -> list[int]:
        return [i for i, a in enumerate(self.atoms) if a.endpoint]

    def positions(self) -> np.ndarray:
        return np.array([a.pos for a in self.atoms], dtype=float)


def _plane_fit(points: np.ndarray):
    """Centroid, unit normal, and max out-of-plane residual."""
    centroid = points.mean(axis=0)
    centered = points - centroid
    _, _, vt = np.linalg.svd(centered)
    normal = vt[2]
    residual = float(np.abs(centered @ normal).max())
    return centroid, normal, residual


def _cycles_up_to(graph: MolecularGraph, max_len: int = 6):
    """Simple cycles of length 5..max_len, canonicalized."""
    found = set()
    ids = sorted(graph.atom_ids())
    for root in ids:
        stack = [(root, [root])]
        while stack:
            node, path = stack.pop()
            for nb in sorted(graph.neighbors(node)):
                if nb == root and len(path) >= 5:
                    canon = _canon_cycle(path)
                    found.add(canon)
                elif nb not in path and len(path) < max_len and nb > root:
                    stack.append((nb, path + [nb]))
    return sorted(found)


def _canon_cycle(cycle: list[int]) -> tuple[int, ...]:
    i = cycle.index(min(cycle))
    rot = cycle[i:] + cycle[:i]
    rev = [rot[0]] + rot[1:][::-1]
    return tuple(min(rot, rev))


def detect_sites(substrate: MolecularGraph,
                 cfg: PlacementConfig = PlacementConfig()) -> list[Site]:
    """Donor hydrogens, under-bonded acceptors, and planar carbon rings.

    Ring sites come first: stacking patterns are placed before hydrogen ones.
    """
    sites: list[Site] = []
    for cyc in _cycles_up_to(substrate):
        if len(cyc) not in (5, 6):
            continue
        if any(substrate.atom(a).element != "C" for a in cyc):
            continue
        pts = substrate.positions(list(cyc))
        _, _, residual = _plane_fit(pts)
        if residual <= cfg.ring_planarity_tol:
            sites.append(Site("aromatic_ring", cyc))
    for a in sorted(substrate.atom_ids()):
        atom = substrate.atom(a)
        if atom.element == "H":
            for nb in substrate.neighbors(a):
                if substrate.atom(nb).element in ("O", "N"):
                    sites.append(Site("hydrogen_donor", (a, nb)))
        elif atom.element in ("O", "N"):
            if substrate.degree(a) < MAX_DEGREE[atom.element]:
                sites.append(Site("hydrogen_acceptor", (a,)))
    return sites


def _azimuth_dirs(axis: np.ndarray, n: int):
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(np.dot(axis, ref))) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    v1 = ref - np.dot(ref, axis) * axis
    v1 /= np.linalg.norm(v1)
    v2 = np.cross(axis, v1)
    for i in range(n):
        phi = 2.0 * math.pi * i / n
        yield math.cos(phi) * v1 + math.sin(phi) * v2


def _collides(atoms: list[PatternAtom], substrate: MolecularGraph,
              params: ChemParams, exempt: frozenset) -> bool:
    for a in atoms:
        for other in substrate.atoms():
            if other.id in exempt:
                continue
            if float(np.linalg.norm(other.pos - a.pos)) < params.col:
                return True
    return False


def place_candidates(site: Site, substrate: MolecularGraph,
                     params: ChemParams = ChemParams(),
                     cfg: PlacementConfig = PlacementConfig()) -> list[BindingPattern]:
    """Geometrically valid complementary fragments for one site, with
    substrate-colliding placements discarded."""
    out: list[BindingPattern] = []
    tetra = math.radians(TETRAHEDRAL_DEG)

    if site.kind == "hydrogen_donor":
        h_id, d_id = site.atom_ids
        h_pos = substrate.atom(h_id).pos
        d_pos = substrate.atom(d_id).pos
        axis = h_pos - d_pos
        axis /= np.linalg.norm(axis)
        o_pos = h_pos + params.d_weak * axis  # acceptor on the D-H axis
        for side in _azimuth_dirs(axis, cfg.azimuth_samples):
            h_dir = math.cos(tetra) * (-axis) + math.sin(tetra) * side
            atoms = [PatternAtom("O", o_pos, endpoint=True),
                     PatternAtom("H", o_pos + params.cov_hydrogen * h_dir)]
            if _collides(atoms, substrate, params, frozenset((h_id,))):
                continue
            out.append(BindingPattern("hydrogen_acceptor", atoms, [(0, 1)], site))
    elif site.kind == "hydrogen_acceptor":
        (a_id,) = site.atom_ids
        a_pos = substrate.atom(a_id).pos
        nbs = [substrate.atom(n).pos for n in substrate.neighbors(a_id)]
        if nbs:
            away = a_pos - np.mean(nbs, axis=0)
            n = np.linalg.norm(away)
            axis = away / n if n > 1e-12 else np.array([1.0, 0.0, 0.0])
        else:
            axis = np.array([1.0, 0.0, 0.0])
        h_pos = a_pos + params.d_weak * axis   # donor H aimed at the acceptor
        o_pos = h_pos + params.cov_hydrogen * axis
        atoms = [PatternAtom("O", o_pos, endpoint=True),
                 PatternAtom("H", h_pos)]
        if not _collides(atoms, substrate, params, frozenset((a_id,))):
            out.append(BindingPattern("hydrogen_donor", atoms, [(0, 1)], site))
    elif site.kind == "aromatic_ring":
        pts = substrate.positions(list(site.atom_ids))
        centroid, normal, _ = _plane_fit(pts)
        for sign in (1.0, -1.0):
            c2 = centroid + sign * cfg.stacking_distance * normal
            ref = pts[0] - centroid
            ref -= np.dot(ref, normal) * normal
            ref /= np.linalg.norm(ref)
            v2 = np.cross(normal, ref)
            atoms: list[PatternAtom] = []
            bonds: list[tuple[int, int]] = []
            for i in range(6):
                phi = 2.0 * math.pi * i / 6.0
                rdir = math.cos(phi) * ref + math.sin(phi) * v2
                atoms.append(PatternAtom("C", c2 + params.cov_heavy * rdir,
                                         endpoint=True))
            for i in range(6):
                bonds.append((i, (i + 1) % 6))
            for i in range(6):
                rpos = atoms[i].pos
                rdir = (rpos - c2) / np.linalg.norm(rpos - c2)
                atoms.append(PatternAtom("H", rpos + params.cov_hydrogen * rdir))
                bonds.append((i, 6 + i))
            if _collides(atoms, substrate, params, frozenset()):
                continue
            out.append(BindingPattern("aromatic_ring", atoms, bonds, site))
    else:
        raise ValueError(f"unknown site kind {site.kind!r}")
    return out


@dataclass
class ConflictGraph:
    n: int
    adj: list[set] = field(default_factory=list)

    @classmethod
    def empty(cls, n: int) -> "ConflictGraph":
        return cls(n, [set() for _ in range(n)])

    def add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("conflict graph is irreflexive")
        self.adj[a].add(b)
        self.adj[b].add(a)

    def edges(self):
        for a in range(self.n):
            for b in self.adj[a]:
                if a < b:
                    yield (a, b)


def build_conflict_graph(candidates: list[BindingPattern],
                         params: ChemParams = ChemParams()) -> ConflictGraph:
    """Edge when two placements overlap spatially (closer than d_weak) or
    claim the same interaction: a shared bonding atom, or a shared substrate
    atom used in different roles (an atom set is donor or acceptor, never
    both)."""
    g = ConflictGraph.empty(len(candidates))
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            a, b = candidates[i], candidates[j]
            shared_bonding = a.site.bonding_atoms() & b.site.bonding_atoms()
            cross_role = (a.site.kind != b.site.kind
                          and set(a.site.atom_ids) & set(b.site.atom_ids))
            if shared_bonding or cross_role:
                g.add_edge(i, j)
                continue
            pa = a.positions()
            pb = b.positions()
            d = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2)
            if float(d.min()) < params.d_weak:
                g.add_edge(i, j)
    return g


def maximal_independent_sets(g: ConflictGraph):
    """Bron-Kerbosch with pivoting on the complement graph; yields each
    maximal independent set exactly once."""
    all_nodes = frozenset(range(g.n))
    comp = [all_nodes - g.adj[v] - {v} for v in range(g.n)]

    def bk(r: frozenset, p: frozenset, x: frozenset):
        if not p and not x:
            yield frozenset(r)
            return
        pivot = max(p | x, key=lambda u: (len(p & comp[u]), -u))
        for v in sorted(p - comp[pivot]):
            yield from bk(r | {v}, p & comp[v], x & comp[v])
            p = p - {v}
            x = x | {v}

    if g.n == 0:
        yield frozenset()
        return
    yield from bk(frozenset(), all_nodes, frozenset())


def generate_patterns(substrate: MolecularGraph,
                      params: ChemParams = ChemParams(),
                      cfg: PlacementConfig = PlacementConfig(),
                      max_sets: int = 1) -> list[list[BindingPattern]]:
    """End-to-end site detection, placement, and compatible-set selection.

    Returns up to max_sets maximal independent pattern sets in enumeration
    order (ring candidates are generated before hydrogen candidates).
    """
    candidates: list[BindingPattern] = []
    for site in detect_sites(substrate, cfg):
        candidates.extend(place_candidates(site, substrate, params, cfg))
    if not candidates:
        return []
    conflict = build_conflict_graph(candidates, params)
    sets: list[list[BindingPattern]] = []
    for mis in maximal_independent_sets(conflict):
        sets.append([candidates[i] for i in sorted(mis)])
        if len(sets) >= max_sets:
            break
    return sets


def patterns_to_graph(patterns: list[BindingPattern],
                      start_id: int = 0) -> MolecularGraph:
    """Materialize placed fragments as a pattern-role molecular graph."""
    g = MolecularGraph()
    nid = start_id
    for pid, pat in enumerate(patterns):
        local = {}
        for i, a in enumerate(pat.atoms):
            local[i] = g.add_atom(a.element, a.pos, role="pattern",
                                  pattern_id=pid, endpoint=a.endpoint,
                                  geometry=a.geometry, atom_id=nid)
            nid += 1
        for i, j in pat.bonds:
            g.add_bond(local[i], local[j])
    return g
