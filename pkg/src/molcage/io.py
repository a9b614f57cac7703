"""Instance file reading/writing and multi-molecule XYZ export.

Instance format (one record per line, '#' comments and blank lines ignored):

    atom <id> <element> <x> <y> <z> [role=substrate|pattern:<pid>|path]
                                    [endpoint] [geometry=<name>]
    bond <id1> <id2> [attach]

Coordinates are nanometers. XYZ export converts to Angstroms (x10).
"""

from .core import MolecularGraph


class MciError(ValueError):
    """Malformed instance file; carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def _parse_role(token: str, line_no: int):
    if token == "substrate" or token == "path":
        return token, None
    if token.startswith("pattern:"):
        try:
            return "pattern", int(token.split(":", 1)[1])
        except ValueError:
            raise MciError(f"bad pattern id in role {token!r}", line_no) from None
    raise MciError(f"unknown role {token!r}", line_no)


def loads_instance(text: str) -> MolecularGraph:
    g = MolecularGraph()
    pending_bonds = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "atom":
            if len(fields) < 6:
                raise MciError("atom record needs: id element x y z", line_no)
            try:
                aid = int(fields[1])
            except ValueError:
                raise MciError(f"bad atom id {fields[1]!r}", line_no) from None
            element = fields[2]
            try:
                xyz = tuple(float(v) for v in fields[3:6])
            except ValueError:
                raise MciError("bad coordinate field", line_no) from None
            role, pattern_id = "substrate", None
            endpoint = False
            geometry = None
            for tok in fields[6:]:
                if tok == "endpoint":
                    endpoint = True
                elif tok.startswith("role="):
                    role, pattern_id = _parse_role(tok[5:], line_no)
                elif tok.startswith("geometry="):
                    geometry = tok[9:]
                else:
                    raise MciError(f"unknown atom field {tok!r}", line_no)
            try:
                g.add_atom(element, xyz, role=role, pattern_id=pattern_id,
                           endpoint=endpoint, geometry=geometry, atom_id=aid)
            except ValueError as exc:
                raise MciError(str(exc), line_no) from None
        elif kind == "bond":
            if len(fields) < 3:
                raise MciError("bond record needs: id1 id2", line_no)
            try:
                a, b = int(fields[1]), int(fields[2])
            except ValueError:
                raise MciError("bad bond atom id", line_no) from None
            bkind = "covalent"
            if len(fields) > 3:
                if fields[3] != "attach":
                    raise MciError(f"unknown bond field {fields[3]!r}", line_no)
                bkind = "attach"
            pending_bonds.append((a, b, bkind, line_no))
        else:
            raise MciError(f"unknown record type {kind!r}", line_no)
    for a, b, bkind, line_no in pending_bonds:
        try:
            g.add_bond(a, b, bkind)
        except ValueError as exc:
            raise MciError(str(exc), line_no) from None
    return g


def load_instance(path) -> MolecularGraph:
    with open(path, encoding="utf-8") as fh:
        return loads_instance(fh.read())


def dumps_instance(graph: MolecularGraph, comment: str = "") -> str:
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"# {c}")
    for aid in sorted(graph.atom_ids()):
        a = graph.atom(aid)
        role = a.role if a.role != "pattern" else f"pattern:{a.pattern_id}"
        ln = (f"atom {a.id} {a.element} "
              f"{a.pos[0]:.9f} {a.pos[1]:.9f} {a.pos[2]:.9f} role={role}")
        if a.endpoint:
            ln += " endpoint"
        if a.geometry:
            ln += f" geometry={a.geometry}"
        lines.append(ln)
    for a, b, kind in sorted(graph.bonds()):
        ln = f"bond {a} {b}"
        if kind == "attach":
            ln += " attach"
        lines.append(ln)
    return "\n".join(lines) + "\n"


def save_instance(graph: MolecularGraph, path, comment: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_instance(graph, comment))


def dumps_xyz(frames) -> str:
    """Plain multi-molecule XYZ text; frames are (graph, comment) pairs."""
    out = []
    for graph, comment in frames:
        ids = sorted(graph.atom_ids())
        out.append(str(len(ids)))
        out.append(comment.replace("\n", " "))
        for aid in ids:
            a = graph.atom(aid)
            x, y, z = (a.pos * 10.0)  # nm -> Angstrom
            out.append(f"{a.element:<2s} {x: .6f} {y: .6f} {z: .6f}")
    return "\n".join(out) + "\n"


def write_xyz(frames, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_xyz(frames))
