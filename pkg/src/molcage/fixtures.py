"""Bundled synthetic instances used by the test suite and the CLI docs.

All geometry is constructed analytically from the model's bond lengths and
the exact tetrahedral angle, so the ideal fixtures validate with zero
violations.
"""

import math

import numpy as np

from .core import TETRAHEDRAL_DEG, MolecularGraph

_TETRA_DIRS = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)],
                       dtype=float) / math.sqrt(3.0)


def methane() -> MolecularGraph:
    """Ideal CH4: four hydrogens on regular-tetrahedron vertices."""
    g = MolecularGraph()
    c = g.add_atom("C", (0.0, 0.0, 0.0))
    for d in _TETRA_DIRS:
        h = g.add_atom("H", 0.1125 * d)
        g.add_bond(c, h)
    return g


def methane_bent(angle_deg: float = 100.0) -> MolecularGraph:
    """Methane with one H-C-H angle forced to angle_deg (default 100)."""
    g = methane()
    # rotate H at id 2 within the plane spanned with H id 1 so that
    # angle(H1, C, H2) becomes angle_deg
    d1 = _TETRA_DIRS[0]
    d2 = _TETRA_DIRS[1]
    axis = np.cross(d1, d2)
    axis /= np.linalg.norm(axis)
    delta = math.radians(angle_deg - TETRAHEDRAL_DEG)
    d2r = (d2 * math.cos(delta)
           + np.cross(axis, d2) * math.sin(delta)
           + axis * float(np.dot(axis, d2)) * (1 - math.cos(delta)))
    g.atom(2).pos[:] = 0.1125 * d2r / np.linalg.norm(d2r)
    return g


def water() -> MolecularGraph:
    """Water at the model's tetrahedral oxygen angle."""
    g = MolecularGraph()
    tau = math.radians(TETRAHEDRAL_DEG)
    o = g.add_atom("O", (0.0, 0.0, 0.0))
    h1 = g.add_atom("H", 0.1125 * np.array([math.sin(tau / 2), 0, math.cos(tau / 2)]))
    h2 = g.add_atom("H", 0.1125 * np.array([-math.sin(tau / 2), 0, math.cos(tau / 2)]))
    g.add_bond(o, h1)
    g.add_bond(o, h2)
    return g


def benzene() -> MolecularGraph:
    """Planar C6H6 ring; carbons are triangular by inference (degree 3)."""
    g = MolecularGraph()
    ring = []
    for i in range(6):
        phi = 2.0 * math.pi * i / 6.0
        ring.append(g.add_atom("C", (0.15 * math.cos(phi), 0.15 * math.sin(phi), 0.0)))
    for i in range(6):
        g.add_bond(ring[i], ring[(i + 1) % 6])
    for i in range(6):
        phi = 2.0 * math.pi * i / 6.0
        h = g.add_atom("H", ((0.15 + 0.1125) * math.cos(phi),
                             (0.15 + 0.1125) * math.sin(phi), 0.0))
        g.add_bond(ring[i], h)
    return g


def _hydroxyl_pattern(cage: MolecularGraph, pattern_id: int, o_pos, h_dir,
                      base_id: int) -> int:
    """O(endpoint)-H fragment; returns the endpoint atom id."""
    o_pos = np.asarray(o_pos, dtype=float)
    h_dir = np.asarray(h_dir, dtype=float)
    h_dir = h_dir / np.linalg.norm(h_dir)
    oid = cage.add_atom("O", o_pos, role="pattern", pattern_id=pattern_id,
                        endpoint=True, atom_id=base_id)
    hid = cage.add_atom("H", o_pos + 0.1125 * h_dir, role="pattern",
                        pattern_id=pattern_id, atom_id=base_id + 1)
    cage.add_bond(oid, hid)
    return oid


def _rot_y(v, ang):
    ca, sa = math.cos(ang), math.sin(ang)
    return np.array([ca * v[0] + sa * v[2], v[1], -sa * v[0] + ca * v[2]])


def bridge_pair() -> tuple[MolecularGraph, MolecularGraph, int, int]:
    """Two hydroxyl patterns whose oxygens are exactly one tetrahedral
    carbon apart, plus a token far-away substrate.

    Returns (substrate, patterns, s, t).
    """
    tau = math.radians(TETRAHEDRAL_DEG)
    a = tau / 2
    c = np.zeros(3)
    s_pos = c + 0.15 * np.array([-math.sin(a), 0, math.cos(a)])
    t_pos = c + 0.15 * np.array([+math.sin(a), 0, math.cos(a)])
    substrate = MolecularGraph()
    substrate.add_atom("C", (1.2, 1.2, 1.2))
    cage = MolecularGraph()
    s = _hydroxyl_pattern(cage, 0, s_pos, _rot_y((c - s_pos) / 0.15, tau), 1000)
    t = _hydroxyl_pattern(cage, 1, t_pos, _rot_y((c - t_pos) / 0.15, -tau), 1010)
    return substrate, cage, s, t


def water_instance() -> MolecularGraph:
    """Water substrate plus two acceptor patterns on its donor hydrogens,
    as the automatic placement produces them; the primary end-to-end
    pipeline fixture."""
    from .patterns import generate_patterns, patterns_to_graph

    sub = water()
    sets = generate_patterns(sub, max_sets=1)
    pats = patterns_to_graph(sets[0], start_id=100)
    return sub.merge(pats)


def corridor_pair(half: float = 0.30, spacing: float = 0.15,
                  ) -> tuple[MolecularGraph, MolecularGraph, int, int]:
    """Double-layer substrate wall between two hydroxyl patterns.

    The s-facing layer carries a one-atom pinhole: an attractive but
    impassable shortcut for the straight-line heuristic, while the real
    route rounds the wall edge. Returns (substrate, patterns, s, t).
    """
    sub = MolecularGraph()
    n = int(round(2 * half / spacing))
    for layer, (z, off) in enumerate(((0.0, 0.0), (0.10, 0.075))):
        for i in range(n + 1):
            for j in range(n + 1):
                x = -half + i * spacing + off
                y = -half + j * spacing + off
                if layer == 0 and abs(x) < 0.6 * spacing and abs(y) < 0.6 * spacing:
                    continue  # pinhole bait
                sub.add_atom("C", (x, y, z))
    cage = MolecularGraph()
    s = _hydroxyl_pattern(cage, 0, (0.0, 0.0, -0.32), (0, 0, -1), 1000)
    t = _hydroxyl_pattern(cage, 1, (0.08, 0.0, 0.42), (0, 0, 1), 1010)
    return sub, cage, s, t
