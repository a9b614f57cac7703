"""Placement-circle geometry and angular-interval arithmetic.

Given two consecutive chain atoms, the next atom is constrained to a circle;
every obstacle carves a forbidden arc out of it, solved in closed form. The
two hydrogens that complete a tetrahedral carbon live on a second, smaller
circle at fixed angular offsets from the chain angle.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import TAU, ChemParams, SpatialIndex

TETRAHEDRAL_RAD = math.acos(-1.0 / 3.0)


class AngularIntervalSet:
    """Sorted disjoint half-open intervals [lo, hi) on [0, 2*pi).

    Wrap-around input intervals are split at 2*pi. Instances are immutable;
    set operations return new sets.
    """

    __slots__ = ("_ivs",)

    def __init__(self, intervals=()):
        split = []
        for lo, hi in intervals:
            if hi - lo >= TAU:
                split = [(0.0, TAU)]
                break
            lo %= TAU
            hi %= TAU
            if lo == hi:
                continue  # empty after normalization (width was 0 mod tau)
            if lo < hi:
                split.append((lo, hi))
            else:
                split.append((lo, TAU))
                if hi > 0.0:
                    split.append((0.0, hi))
        split.sort()
        merged: list[tuple[float, float]] = []
        for lo, hi in split:
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        # re-merge across the 0/tau seam
        if len(merged) > 1 and merged[0][0] == 0.0 and merged[-1][1] == TAU:
            pass  # stored split at the seam by convention
        self._ivs = tuple(merged)

    @classmethod
    def full(cls) -> "AngularIntervalSet":
        return cls([(0.0, TAU)])

    @classmethod
    def empty(cls) -> "AngularIntervalSet":
        return cls()

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        return self._ivs

    def __bool__(self) -> bool:
        return bool(self._ivs)

    def __eq__(self, other) -> bool:
        return isinstance(other, AngularIntervalSet) and self._ivs == other._ivs

    def __hash__(self):
        return hash(self._ivs)

    def __repr__(self):
        body = ", ".join(f"[{lo:.6f}, {hi:.6f})" for lo, hi in self._ivs)
        return f"AngularIntervalSet({body})"

    def is_empty(self) -> bool:
        return not self._ivs

    def is_full(self) -> bool:
        return self._ivs == ((0.0, TAU),)

    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self._ivs)

    def contains(self, theta: float) -> bool:
        theta %= TAU
        for lo, hi in self._ivs:
            if lo <= theta < hi:
                return True
        return False

    def union(self, other: "AngularIntervalSet") -> "AngularIntervalSet":
        return AngularIntervalSet(self._ivs + other._ivs)

    def complement(self) -> "AngularIntervalSet":
        out = []
        cur = 0.0
        for lo, hi in self._ivs:
            if lo > cur:
                out.append((cur, lo))
            cur = hi
        if cur < TAU:
            out.append((cur, TAU))
        return AngularIntervalSet(out)

    def intersect(self, other: "AngularIntervalSet") -> "AngularIntervalSet":
        out = []
        a, b = self._ivs, other._ivs
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return AngularIntervalSet(out)

    def subtract(self, other: "AngularIntervalSet") -> "AngularIntervalSet":
        return self.intersect(other.complement())

    def shift(self, delta: float) -> "AngularIntervalSet":
        return AngularIntervalSet([(lo + delta, hi + delta) for lo, hi in self._ivs])

    def nearest(self, theta: float) -> float:
        """Valid angle closest to theta in circular distance.

        Interval boundaries count as valid (the underlying forbidden arcs are
        open at the threshold). Raises on an empty set.
        """
        if not self._ivs:
            raise ValueError("empty interval set")
        theta %= TAU
        if self.contains(theta):
            return theta
        best = None
        best_d = math.inf
        for lo, hi in self._ivs:
            for cand in (lo, hi if hi < TAU else 0.0):
                d = abs(theta - cand) % TAU
                d = min(d, TAU - d)
                if d < best_d:
                    best_d = d
                    best = cand
        return best % TAU

    def snap_forward(self, theta: float) -> float:
        """theta if valid, else the next valid angle in +theta direction."""
        if not self._ivs:
            raise ValueError("empty interval set")
        theta %= TAU
        if self.contains(theta):
            return theta
        starts = [lo for lo, _ in self._ivs]
        for lo in starts:
            if lo >= theta:
                return lo
        return starts[0]  # wrap

    def snap_backward(self, theta: float) -> float:
        """theta if valid, else the nearest valid angle in -theta direction."""
        if not self._ivs:
            raise ValueError("empty interval set")
        theta %= TAU
        if self.contains(theta):
            return theta
        # walk interval right-boundaries downward from theta (hi is a legal
        # boundary point; see nearest())
        ends = [hi for _, hi in self._ivs]
        for hi in reversed(ends):
            if hi <= theta:
                return hi % TAU
        return ends[-1] % TAU  # wrap


@dataclass(frozen=True)
class PlacementCircle:
    """Circle of legal next-atom positions: center, radius, in-plane basis."""

    center: np.ndarray
    radius: float
    vec1: np.ndarray
    vec2: np.ndarray
    axis: np.ndarray

    def point(self, theta):
        """Position(s) at angle theta; accepts scalars or arrays."""
        theta = np.asarray(theta, dtype=float)
        c = np.cos(theta)
        s = np.sin(theta)
        return (self.center
                + self.radius * np.multiply.outer(c, self.vec1)
                + self.radius * np.multiply.outer(s, self.vec2))

    def azimuth(self, pos) -> float:
        """Angle parameter of the projection of pos onto the circle plane."""
        w = np.asarray(pos, dtype=float) - self.center
        return math.atan2(float(np.dot(w, self.vec2)),
                          float(np.dot(w, self.vec1))) % TAU


def _orthobasis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(np.dot(axis, ref))) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    v1 = ref - np.dot(ref, axis) * axis
    v1 /= np.linalg.norm(v1)
    v2 = np.cross(axis, v1)
    return v1, v2


def placement_circle(prev, curr, bond_len: float, bond_angle_deg: float) -> PlacementCircle:
    """Circle of positions at `bond_len` from curr forming `bond_angle_deg`
    with prev at curr."""
    prev = np.asarray(prev, dtype=float)
    curr = np.asarray(curr, dtype=float)
    d = curr - prev
    n = np.linalg.norm(d)
    if n == 0.0:
        raise ValueError("degenerate axis")
    if not 0.0 < bond_angle_deg < 180.0:
        raise ValueError("bond angle must be in (0, 180)")
    u = d / n
    rest = math.radians(180.0 - bond_angle_deg)
    center = curr + bond_len * math.cos(rest) * u
    radius = bond_len * math.sin(rest)
    v1, v2 = _orthobasis(u)
    return PlacementCircle(center, radius, v1, v2, u)


def forbidden_interval(circle: PlacementCircle, obstacle, threshold: float) -> AngularIntervalSet:
    """Angles theta with ||circle.point(theta) - obstacle|| < threshold.

    Closed form via the law of cosines on the circle plane; the result is an
    open arc but is represented half-open (boundary points are legal and the
    distinction is measure-zero).
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    w = np.asarray(obstacle, dtype=float) - circle.center
    w1 = float(np.dot(w, circle.vec1))
    w2 = float(np.dot(w, circle.vec2))
    rho2 = w1 * w1 + w2 * w2
    w_sq = float(np.dot(w, w))
    R = circle.radius
    if rho2 == 0.0:
        if R * R + w_sq < threshold * threshold:
            return AngularIntervalSet.full()
        return AngularIntervalSet.empty()
    rho = math.sqrt(rho2)
    # dist^2(theta) = R^2 + |w|^2 - 2 R rho cos(theta - psi)
    a = (R * R + w_sq - threshold * threshold) / (2.0 * R * rho)
    if a >= 1.0:
        return AngularIntervalSet.empty()
    if a <= -1.0:
        return AngularIntervalSet.full()
    psi = math.atan2(w2, w1)
    alpha = math.acos(a)
    return AngularIntervalSet([(psi - alpha, psi + alpha)])


@dataclass(frozen=True)
class HydrogenFrame:
    """Companion circle for the two hydrogens completing a tetrahedral carbon.

    The hydrogens of the pivot sit at phi = theta +/- delta, where theta is
    the chain angle on the carbon placement circle sharing the same basis.
    """

    circle: PlacementCircle
    delta: float


def hydrogen_frame(prev, curr, params: ChemParams = ChemParams()) -> HydrogenFrame:
    """Hydrogen circle and angular offset for the tetrahedral pivot at curr."""
    tau_a = TETRAHEDRAL_RAD
    ch = params.cov_hydrogen
    hc = placement_circle(prev, curr, ch, math.degrees(tau_a))
    # offset between chain and hydrogen azimuths from the vector-angle
    # relation  cos(tetra) = (a . b) / (|a| |b|)
    L = params.cov_heavy
    d_c = L * math.cos(math.pi - tau_a)
    d_h = ch * math.cos(math.pi - tau_a)
    r_c = L * math.sin(math.pi - tau_a)
    r_h = ch * math.sin(math.pi - tau_a)
    cos_delta = (L * ch * math.cos(tau_a) - d_c * d_h) / (r_c * r_h)
    delta = math.acos(max(-1.0, min(1.0, cos_delta)))
    return HydrogenFrame(hc, delta)


def angle_window_intervals(circle: PlacementCircle, pivot, ref,
                           lo_deg: float, hi_deg: float) -> AngularIntervalSet:
    """Angles theta where angle(ref, pivot, point(theta)) is in [lo, hi] deg.

    Used to restrict a placement circle by the VSEPR window against an
    additional fixed neighbor of the pivot.
    """
    pivot = np.asarray(pivot, dtype=float)
    rdir = np.asarray(ref, dtype=float) - pivot
    rn = np.linalg.norm(rdir)
    if rn == 0.0:
        raise ValueError("degenerate reference direction")
    rdir /= rn
    # cos(angle(theta)) = a + b * cos(theta - psi), with bond length constant
    off = circle.center - pivot
    L = math.sqrt(float(np.dot(off, off)) + circle.radius ** 2)
    a = float(np.dot(rdir, off)) / L
    b1 = circle.radius * float(np.dot(rdir, circle.vec1)) / L
    b2 = circle.radius * float(np.dot(rdir, circle.vec2)) / L
    b = math.hypot(b1, b2)
    clo = math.cos(math.radians(hi_deg))  # cos decreasing
    chi = math.cos(math.radians(lo_deg))
    if b < 1e-15:
        if clo <= a <= chi:
            return AngularIntervalSet.full()
        return AngularIntervalSet.empty()
    psi = math.atan2(b2, b1)
    # need clo <= a + b cos(d) <= chi  for d = theta - psi
    x_lo = (clo - a) / b
    x_hi = (chi - a) / b
    if x_lo > 1.0 or x_hi < -1.0:
        return AngularIntervalSet.empty()
    x_lo = max(-1.0, x_lo)
    x_hi = min(1.0, x_hi)
    d_min = math.acos(x_hi)  # smallest |d| allowed
    d_max = math.acos(x_lo)  # largest |d| allowed
    if d_min <= 1e-15:
        if d_max >= math.pi - 1e-15:
            return AngularIntervalSet.full()
        return AngularIntervalSet([(psi - d_max, psi + d_max)])
    return AngularIntervalSet([(psi + d_min, psi + d_max),
                               (psi - d_max, psi - d_min)])


def valid_intervals(prev, curr, obstacles: SpatialIndex,
                    params: ChemParams = ChemParams(), *,
                    include_hydrogens: bool = True,
                    exempt_ids: frozenset = frozenset(),
                    extra_obstacles=(),
                    bond_len: float | None = None,
                    bond_angle_deg: float | None = None) -> AngularIntervalSet:
    """Chain angles where the next carbon and the pivot's two induced
    hydrogens all clear every obstacle.

    Substrate atoms must be cleared by d_weak, all other atoms by the
    collision distance. exempt_ids lists graph atoms excluded from the
    collision check (the bonded pivot and its hydrogens); extra_obstacles are
    (position, is_substrate) pairs for atoms not yet in the graph.
    """
    prev = np.asarray(prev, dtype=float)
    curr = np.asarray(curr, dtype=float)
    if bond_len is None:
        bond_len = params.cov_heavy
    if bond_angle_deg is None:
        bond_angle_deg = math.degrees(TETRAHEDRAL_RAD)
    cc = placement_circle(prev, curr, bond_len, bond_angle_deg)
    circles: list[tuple[PlacementCircle, float]] = [(cc, 0.0)]
    if include_hydrogens:
        hf = hydrogen_frame(prev, curr, params)
        # forbidden phi-arcs map to theta via theta = phi -/+ delta
        circles.append((hf.circle, -hf.delta))
        circles.append((hf.circle, +hf.delta))

    graph = obstacles.graph
    forbidden = AngularIntervalSet.empty()
    for circle, shift in circles:
        reach = circle.radius + params.d_weak
        for aid in obstacles.query(circle.center, reach):
            atom = graph.atom(aid)
            thr = params.d_weak if atom.role == "substrate" else params.col
            if atom.role != "substrate" and aid in exempt_ids:
                continue
            arc = forbidden_interval(circle, atom.pos, thr)
            if arc:
                forbidden = forbidden.union(arc.shift(shift))
        for pos, is_substrate in extra_obstacles:
            thr = params.d_weak if is_substrate else params.col
            arc = forbidden_interval(circle, pos, thr)
            if arc:
                forbidden = forbidden.union(arc.shift(shift))
    return forbidden.complement()
