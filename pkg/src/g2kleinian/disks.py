"""Disks on the Riemann sphere and disk triples that split six roots into pairs.

A finite disk is ``{|x - c| < r}``; an exterior disk is ``{|x - c| > r}``
together with infinity.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cpoly import CPoly, INF, is_inf, sphere_roots
from .errors import DiskHeuristicError, SubordinationError

__all__ = [
    "Disk",
    "DiskTriple",
    "is_subordinate",
    "find_disks",
    "factor_by_disks",
    "pair_roots",
    "chordal",
    "DISJOINT_MARGIN",
]

DISJOINT_MARGIN = 1e-6


def chordal(a, b) -> float:
    """Chordal distance on the Riemann sphere (diameter 2)."""
    ia, ib = is_inf(a), is_inf(b)
    if ia and ib:
        return 0.0
    if ia or ib:
        w = b if ia else a
        return 2.0 / np.sqrt(1.0 + abs(w) ** 2)
    return 2.0 * abs(a - b) / np.sqrt((1.0 + abs(a) ** 2) * (1.0 + abs(b) ** 2))


@dataclass(frozen=True)
class Disk:
    kind: str  # "finite" or "exterior"
    center: complex
    radius: float

    def __post_init__(self):
        if self.kind not in ("finite", "exterior"):
            raise SubordinationError(f"unknown disk kind {self.kind!r}")
        if not self.radius > 0:
            raise SubordinationError("disk radius must be positive")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def exterior(self) -> bool:
        return self.kind == "exterior"

    def depth(self, z) -> float:
        """Signed relative depth: positive inside, negative outside."""
        if is_inf(z):
            return np.inf if self.exterior else -np.inf
        d = abs(complex(z) - self.center) / self.radius
        return d - 1.0 if self.exterior else 1.0 - d

    def contains(self, z) -> bool:
        return self.depth(z) > 0

    def to_json(self) -> dict:
        return {"kind": self.kind, "center": [self.center.real, self.center.imag],
                "radius": self.radius}

    @classmethod
    def from_json(cls, d: dict) -> "Disk":
        try:
            re, im = d["center"]
            return cls(d["kind"], complex(re, im), float(d["radius"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SubordinationError(f"malformed disk record: {d!r}") from exc


def _gap(a: Disk, b: Disk) -> float:
    """Euclidean clearance between two disks (negative when they overlap)."""
    dc = abs(a.center - b.center)
    if a.exterior and b.exterior:
        return -np.inf
    if a.exterior or b.exterior:
        ext, fin = (a, b) if a.exterior else (b, a)
        return ext.radius - (abs(ext.center - fin.center) + fin.radius)
    return dc - a.radius - b.radius


@dataclass(frozen=True)
class DiskTriple:
    d1: Disk
    d2: Disk
    d3: Disk

    def __post_init__(self):
        ds = self.disks
        if sum(d.exterior for d in ds) > 1:
            raise SubordinationError("at most one exterior disk is allowed")
        for a, b in itertools.combinations(ds, 2):
            scale = max(1.0, abs(a.center), abs(b.center), a.radius, b.radius)
            if _gap(a, b) <= DISJOINT_MARGIN * scale:
                raise SubordinationError("disks are not disjoint", gap=_gap(a, b))

    @property
    def disks(self) -> tuple:
        return (self.d1, self.d2, self.d3)

    def __getitem__(self, j: int) -> Disk:
        return self.disks[j]

    def to_json(self) -> list:
        return [d.to_json() for d in self.disks]

    @classmethod
    def from_json(cls, data) -> "DiskTriple":
        if not isinstance(data, (list, tuple)) or len(data) != 3:
            raise SubordinationError("a disk triple is a list of three disk records")
        return cls(*(Disk.from_json(d) for d in data))


def pair_roots(rts, D: DiskTriple):
    """Split six sphere roots into the three pairs lying in ``D``; None if impossible."""
    pairs = []
    for disk in D.disks:
        inside = [r for r in rts if disk.contains(r)]
        if len(inside) != 2:
            return None
        pairs.append(tuple(complex(r) for r in inside))
    return pairs


def is_subordinate(f: CPoly, D: DiskTriple) -> bool:
    """True iff each disk holds exactly two of the six sphere roots of ``f``."""
    return pair_roots(sphere_roots(f), D) is not None


def factor_by_disks(f: CPoly, D: DiskTriple):
    """``f = p1 p2 p3`` with the roots of ``pj`` in disk ``j``; ``p1, p2`` monic."""
    pairs = pair_roots(sphere_roots(f), D)
    if pairs is None:
        raise SubordinationError("polynomial is not subordinate to the disk triple")
    p1 = CPoly.from_roots(pairs[0])
    p2 = CPoly.from_roots(pairs[1])
    p3 = CPoly.from_roots(pairs[2], f.lead)
    return p1, p2, p3


# --- heuristic ------------------------------------------------------------------

def _to_sphere(z) -> np.ndarray:
    if is_inf(z):
        return np.array([0.0, 0.0, 1.0])
    z = complex(z)
    n = abs(z) ** 2 + 1.0
    return np.array([2 * z.real / n, 2 * z.imag / n, (n - 2.0) / n])


def _angle(u, v) -> float:
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def _matchings(items):
    if not items:
        yield []
        return
    a, rest = items[0], items[1:]
    for i, b in enumerate(rest):
        for m in _matchings(rest[:i] + rest[i + 1:]):
            yield [(a, b)] + m


def _cap_to_disk(n: np.ndarray, theta: float) -> Disk:
    # {x on S^2 : x.n >= cos theta} under stereographic projection from (0,0,1)
    a = n[2] - np.cos(theta)
    nc = complex(n[0], n[1])
    return Disk("exterior" if a > 0 else "finite", -nc / a, np.sin(theta) / abs(a))


def find_disks(f: CPoly) -> DiskTriple:
    """Heuristic disk triple subordinating ``f``.

    All 15 pairings of the sphere roots are scored by the ratio of the largest
    pair radius to the smallest gap between pairs (angles on the unit sphere);
    the best pairing is widened into spherical caps and projected back.
    """
    rts = sphere_roots(f)
    pts = [_to_sphere(r) for r in rts]
    best = None
    for m in _matchings(list(range(6))):
        caps = []
        for i, j in m:
            c = pts[i] + pts[j]
            nrm = np.linalg.norm(c)
            if nrm < 1e-12:
                break
            caps.append((c / nrm, 0.5 * _angle(pts[i], pts[j])))
        if len(caps) < 3:
            continue
        gap = min(_angle(caps[a][0], caps[b][0]) - caps[a][1] - caps[b][1]
                  for a, b in itertools.combinations(range(3), 2))
        if gap <= 0:
            continue
        score = max(c[1] for c in caps) / gap
        if best is None or score < best[0]:
            best = (score, caps, gap, m)
    if best is None:
        raise DiskHeuristicError("no pairing of the roots admits disjoint disks; "
                                 "supply disks manually")
    _, caps, gap, _ = best
    disks = []
    for n, rho in caps:
        theta = rho + 0.4 * gap
        # keep the projected boundary away from a line through infinity
        if abs(n[2] - np.cos(theta)) < 1e-3:
            theta += 0.1 * gap if n[2] - np.cos(theta) > 0 else -0.1 * gap
        disks.append(_cap_to_disk(n, theta))
    disks.sort(key=lambda d: d.exterior)
    try:
        D = DiskTriple(*disks)
    except SubordinationError as exc:
        raise DiskHeuristicError("heuristic disks overlap; supply disks manually") from exc
    if not is_subordinate(f, D):
        raise DiskHeuristicError("heuristic disks do not subordinate f; supply disks manually")
    return D
