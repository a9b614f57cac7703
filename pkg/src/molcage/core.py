"""Molecular graph model, chemical parameters, spatial indexing, and realism checks.

Coordinates are in nanometers throughout. The chemical model is deliberately
simple: four organic elements, two covalent bond lengths, a uniform collision
distance, and VSEPR angle targets per local geometry.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

TAU = 2.0 * math.pi

# Exact tetrahedral angle arccos(-1/3); used for construction. Angle checks
# use the nominal 109.5 deg target with its margin.
TETRAHEDRAL_DEG = math.degrees(math.acos(-1.0 / 3.0))

# Maximum number of covalent bonds per element.
MAX_DEGREE = {"C": 4, "N": 3, "O": 2, "H": 1}

VSEPR_TABLE = {
    "tetrahedral": (109.5, 3.0),
    "triangular": (120.0, 2.0),
    "linear": (180.0, 2.0),
}

ROLES = ("substrate", "pattern", "path")


@dataclass(frozen=True)
class ChemParams:
    """Bond lengths, collision distance, weak-interaction distance (all nm).

    attach_len_tol / attach_angle_tol are the tolerances granted to the single
    terminal attachment bond of a constructed path; all other bonds are exact.
    """

    cov_heavy: float = 0.15
    cov_hydrogen: float = 0.1125
    col: float = 0.1125
    d_weak: float = 0.18
    vsepr_angles: dict = field(default_factory=lambda: dict(VSEPR_TABLE))
    attach_len_tol: float = 0.05
    attach_angle_tol: float = 10.0

    def __post_init__(self):
        for name in ("cov_heavy", "cov_hydrogen", "col", "d_weak"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.d_weak <= self.col:
            raise ValueError("d_weak must exceed the collision distance")

    def cov(self, elem1: str, elem2: str) -> float:
        """Covalent bond length for a pair of element symbols."""
        if elem1 == "H" or elem2 == "H":
            return self.cov_hydrogen
        return self.cov_heavy


@dataclass
class Atom:
    id: int
    element: str
    pos: np.ndarray
    role: str = "substrate"
    pattern_id: int | None = None
    endpoint: bool = False
    geometry: str | None = None  # declared VSEPR geometry, overrides inference


class MolecularGraph:
    """Atoms with 3D coordinates plus typed covalent bonds.

    Bonds are unordered id pairs carrying a kind: "covalent" (exact length) or
    "attach" (the tolerance-bearing terminal bond of a constructed path).
    """

    def __init__(self):
        self._atoms: dict[int, Atom] = {}
        self._adj: dict[int, set[int]] = {}
        self._bond_kind: dict[tuple[int, int], str] = {}
        self._next_id = 0

    # -- construction -----------------------------------------------------

    def add_atom(self, element: str, pos, *, role: str = "substrate",
                 pattern_id: int | None = None, endpoint: bool = False,
                 geometry: str | None = None, atom_id: int | None = None) -> int:
        if element not in MAX_DEGREE:
            raise ValueError(f"unknown element {element!r}")
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        if geometry is not None and geometry not in VSEPR_TABLE:
            raise ValueError(f"unknown geometry {geometry!r}")
        if atom_id is None:
            atom_id = self._next_id
        elif atom_id in self._atoms:
            raise ValueError(f"duplicate atom id {atom_id}")
        self._next_id = max(self._next_id, atom_id + 1)
        p = np.asarray(pos, dtype=float)
        if p.shape != (3,):
            raise ValueError("position must be a 3-vector")
        self._atoms[atom_id] = Atom(atom_id, element, p.copy(), role,
                                    pattern_id, endpoint, geometry)
        self._adj[atom_id] = set()
        return atom_id

    def add_bond(self, a: int, b: int, kind: str = "covalent") -> None:
        if a == b:
            raise ValueError("bond endpoints must be distinct")
        if a not in self._atoms or b not in self._atoms:
            raise ValueError(f"bond references unknown atom ({a}, {b})")
        key = (a, b) if a < b else (b, a)
        if key in self._bond_kind:
            raise ValueError(f"duplicate bond {key}")
        if kind not in ("covalent", "attach"):
            raise ValueError(f"unknown bond kind {kind!r}")
        self._bond_kind[key] = kind
        self._adj[a].add(b)
        self._adj[b].add(a)

    def remove_atom(self, atom_id: int) -> None:
        for nb in list(self._adj[atom_id]):
            key = (atom_id, nb) if atom_id < nb else (nb, atom_id)
            del self._bond_kind[key]
            self._adj[nb].discard(atom_id)
        del self._adj[atom_id]
        del self._atoms[atom_id]

    # -- queries ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._atoms)

    def __contains__(self, atom_id: int) -> bool:
        return atom_id in self._atoms

    def atom(self, atom_id: int) -> Atom:
        return self._atoms[atom_id]

    def atoms(self):
        return self._atoms.values()

    def atom_ids(self):
        return self._atoms.keys()

    def neighbors(self, atom_id: int) -> set[int]:
        return self._adj[atom_id]

    def degree(self, atom_id: int) -> int:
        return len(self._adj[atom_id])

    def bonds(self):
        """Yield (a, b, kind) with a < b."""
        for (a, b), kind in self._bond_kind.items():
            yield a, b, kind

    def has_bond(self, a: int, b: int) -> bool:
        key = (a, b) if a < b else (b, a)
        return key in self._bond_kind

    def bond_kind(self, a: int, b: int) -> str:
        key = (a, b) if a < b else (b, a)
        return self._bond_kind[key]

    def positions(self, ids=None) -> np.ndarray:
        if ids is None:
            ids = sorted(self._atoms)
        return np.array([self._atoms[i].pos for i in ids], dtype=float).reshape(-1, 3)

    def atoms_with_role(self, role: str) -> list[Atom]:
        return [a for a in self._atoms.values() if a.role == role]

    def pattern_ids(self) -> list[int]:
        seen = []
        for a in self._atoms.values():
            if a.role == "pattern" and a.pattern_id not in seen:
                seen.append(a.pattern_id)
        return sorted(seen)

    def endpoint_atoms(self, pattern_id: int) -> list[Atom]:
        return [a for a in self._atoms.values()
                if a.role == "pattern" and a.pattern_id == pattern_id and a.endpoint]

    def copy(self) -> "MolecularGraph":
        g = MolecularGraph()
        for a in self._atoms.values():
            g.add_atom(a.element, a.pos, role=a.role, pattern_id=a.pattern_id,
                       endpoint=a.endpoint, geometry=a.geometry, atom_id=a.id)
        for a, b, kind in self.bonds():
            g.add_bond(a, b, kind)
        return g

    def merge(self, other: "MolecularGraph") -> "MolecularGraph":
        """Union of two graphs with disjoint atom ids."""
        clash = set(self._atoms) & set(other._atoms)
        if clash:
            raise ValueError(f"atom id clash on merge: {sorted(clash)[:5]}")
        g = self.copy()
        for a in other.atoms():
            g.add_atom(a.element, a.pos, role=a.role, pattern_id=a.pattern_id,
                       endpoint=a.endpoint, geometry=a.geometry, atom_id=a.id)
        for a, b, kind in other.bonds():
            g.add_bond(a, b, kind)
        return g


class SpatialIndex:
    """Uniform hash grid over atom positions; immutable after construction.

    Any query ball of radius r is answered from the ceil(r/cell)+1 cell
    neighborhood, so results carry no false negatives.
    """

    def __init__(self, graph: MolecularGraph, cell: float = 0.18):
        if cell <= 0:
            raise ValueError("cell size must be positive")
        self.graph = graph
        self.cell = cell
        self._cells: dict[tuple[int, int, int], list[int]] = defaultdict(list)
        for a in graph.atoms():
            self._cells[self._key(a.pos)].append(a.id)

    def _key(self, pos) -> tuple[int, int, int]:
        return (int(math.floor(pos[0] / self.cell)),
                int(math.floor(pos[1] / self.cell)),
                int(math.floor(pos[2] / self.cell)))

    def query(self, center, radius: float) -> list[int]:
        """Atom ids with ||pos - center|| <= radius."""
        center = np.asarray(center, dtype=float)
        reach = int(math.ceil(radius / self.cell))
        cx, cy, cz = self._key(center)
        out = []
        r2 = radius * radius
        atoms = self.graph._atoms
        for ix in range(cx - reach, cx + reach + 1):
            for iy in range(cy - reach, cy + reach + 1):
                for iz in range(cz - reach, cz + reach + 1):
                    for aid in self._cells.get((ix, iy, iz), ()):
                        d = atoms[aid].pos - center
                        if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= r2:
                            out.append(aid)
        return out


def range_query(index: SpatialIndex, center, radius: float) -> list[int]:
    """All atoms within `radius` of `center` (inclusive boundary)."""
    return index.query(center, radius)


def bond_angle(a, b, c) -> float:
    """Angle a-b-c in degrees, in [0, 180]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    u = a - b
    v = c - b
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("zero-length bond vector")
    cosang = float(np.dot(u, v) / (nu * nv))
    cosang = max(-1.0, min(1.0, cosang))
    return math.degrees(math.acos(cosang))


def infer_geometry(element: str, degree: int) -> str | None:
    """Local VSEPR geometry implied by element and bond count.

    Returns None when no angle constraint applies (fewer than two bonds, or
    an element/degree pair outside the model).
    """
    if degree < 2:
        return None
    table = {
        "C": {4: "tetrahedral", 3: "triangular", 2: "linear"},
        "N": {3: "tetrahedral", 2: "triangular"},
        "O": {2: "tetrahedral"},
    }
    return table.get(element, {}).get(degree)


@dataclass(frozen=True)
class Violation:
    kind: str  # collision | bond_length | valence | vsepr_angle
    atoms: tuple[int, ...]
    measured: float
    allowed: tuple[float, float]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    def by_kind(self, kind: str) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]


def validate(graph: MolecularGraph, params: ChemParams = ChemParams(),
             bond_tol: float = 1e-6) -> ValidationReport:
    """Check the four realism constraints; failures are reported, not raised.

    Collision applies to non-bonded pairs only (bonded pairs are governed by
    the bond-length constraint). Attachment-tagged bonds are checked with the
    attachment tolerances instead of the exact ones.
    """
    vs: list[Violation] = []

    # collisions (strictly closer than col violates; equality is legal)
    index = SpatialIndex(graph, cell=params.d_weak)
    for a in graph.atoms():
        for bid in index.query(a.pos, params.col):
            if bid <= a.id or graph.has_bond(a.id, bid):
                continue
            d = float(np.linalg.norm(a.pos - graph.atom(bid).pos))
            if d < params.col:
                vs.append(Violation("collision", (a.id, bid), d,
                                    (params.col, math.inf)))

    # bond lengths
    for a, b, kind in graph.bonds():
        ea = graph.atom(a).element
        eb = graph.atom(b).element
        expect = params.cov(ea, eb)
        tol = bond_tol if kind == "covalent" else params.attach_len_tol
        d = float(np.linalg.norm(graph.atom(a).pos - graph.atom(b).pos))
        if abs(d - expect) > tol:
            vs.append(Violation("bond_length", (a, b), d,
                                (expect - tol, expect + tol)))

    # valence
    for a in graph.atoms():
        if graph.degree(a.id) > MAX_DEGREE[a.element]:
            vs.append(Violation("valence", (a.id,), float(graph.degree(a.id)),
                                (0.0, float(MAX_DEGREE[a.element]))))

    # VSEPR angles
    for a in graph.atoms():
        nbs = sorted(graph.neighbors(a.id))
        if len(nbs) < 2:
            continue
        geom = a.geometry or infer_geometry(a.element, len(nbs))
        if geom is None:
            continue
        target, margin = params.vsepr_angles[geom]
        for i in range(len(nbs)):
            for j in range(i + 1, len(nbs)):
                m = margin
                if (graph.bond_kind(a.id, nbs[i]) == "attach"
                        or graph.bond_kind(a.id, nbs[j]) == "attach"):
                    m = max(margin, params.attach_angle_tol)
                ang = bond_angle(graph.atom(nbs[i]).pos, a.pos,
                                 graph.atom(nbs[j]).pos)
                if abs(ang - target) > m + 1e-9:
                    vs.append(Violation("vsepr_angle", (nbs[i], a.id, nbs[j]),
                                        ang, (target - m, target + m)))

    return ValidationReport(ok=not vs, violations=tuple(vs))
