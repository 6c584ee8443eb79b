"""The disk-respecting Richelot step, its correction matrix, and the tower driver.

The tower tracks the root pair in each disk directly: the pair of the next
polynomial in disk ``j`` is one root of each of the two brackets involving
``p_j``.  Re-rooting the product would cost half the digits near the
double-root limit, where the roots of ``f`` are ill-conditioned.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .cpoly import CPoly, INF, bracket_coeffs, delta, is_inf, sphere_roots
from .disks import DiskTriple, chordal, pair_roots
from .errors import SubordinationError, TowerError

__all__ = [
    "RichelotStep",
    "RichelotTower",
    "DegenerateCurve",
    "h_matrix",
    "mu",
    "richelot_step",
    "iterate_tower",
    "pair_gap",
    "TOWER_TOL",
    "MAX_ITER",
]

TOWER_TOL = 1e-13
MAX_ITER = 40


@dataclass(frozen=True)
class DegenerateCurve:
    """``c (x - t1)^2 (x - t2)^2 (x - t3)^2``; at most one ``tj`` is infinite."""

    c: complex
    t: Tuple[complex, complex, complex]

    def __post_init__(self):
        if self.c == 0:
            raise TowerError("degenerate curve with zero leading coefficient")
        t = tuple(complex(x) for x in self.t)
        if sum(is_inf(x) for x in t) > 1:
            raise TowerError("more than one double root at infinity")
        for i in range(3):
            for j in range(i + 1, 3):
                if not (is_inf(t[i]) or is_inf(t[j])) and t[i] == t[j]:
                    raise TowerError("coincident double roots")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "c", complex(self.c))

    @property
    def inf_index(self) -> Optional[int]:
        for j, x in enumerate(self.t):
            if is_inf(x):
                return j
        return None

    def poly(self) -> CPoly:
        return CPoly.from_roots([x for x in self.t for _ in range(2)], self.c)


def mu(j, k, l, m, p, q, r, ph, qh, rh) -> complex:
    return (ph[j] * p[k] * p[l] * q[m] * r[m] + qh[j] * q[k] * q[l] * p[m] * r[m]
            + rh[j] * r[k] * r[l] * p[m] * q[m])


def h_matrix(p, q, r, dlt: Optional[complex] = None) -> np.ndarray:
    """The symmetric 2x2 correction matrix of the Richelot step ``f = pqr``."""
    p, q, r = (np.asarray(a, dtype=complex) for a in (p, q, r))
    ph, qh, rh = bracket_coeffs(q, r), bracket_coeffs(r, p), bracket_coeffs(p, q)
    if dlt is None:
        dlt = delta(p, q, r)
    args = (p, q, r, ph, qh, rh)
    psi0 = 4 * mu(0, 0, 0, 2, *args) + mu(2, 1, 1, 0, *args) + mu(2, 0, 0, 1, *args)
    psi2 = -4 * mu(2, 2, 2, 0, *args) - mu(0, 1, 1, 2, *args) - mu(0, 2, 2, 1, *args)
    off = -mu(1, 0, 2, 1, *args) / dlt
    h11 = p[0] * q[1] * r[1] + p[1] * q[0] * r[1] + p[1] * q[1] * r[0] + psi0 / dlt
    h22 = p[2] * q[1] * r[1] + p[1] * q[2] * r[1] + p[1] * q[1] * r[2] - psi2 / dlt
    return np.array([[h11, off], [off, h22]]) / 8


@dataclass(frozen=True, eq=False)
class RichelotStep:
    f: CPoly
    p1: CPoly
    p2: CPoly
    p3: CPoly
    delta: complex
    f_hat: CPoly
    h_matrix: np.ndarray
    pairs: tuple        # root pairs of f, one per disk
    pairs_hat: tuple    # root pairs of f_hat
    lead_hat: complex   # leading coefficient carried by the third factor of f_hat

    @property
    def factors(self):
        return self.p1, self.p2, self.p3


@dataclass(frozen=True, eq=False)
class RichelotTower:
    disks: DiskTriple
    steps: List[RichelotStep]
    limit: DegenerateCurve
    deltas: List[Tuple[float, float, float]]
    final_pairs: tuple
    final_lead: complex

    @property
    def depth(self) -> int:
        return len(self.steps)

    def f(self, n: int) -> CPoly:
        if n < len(self.steps):
            return self.steps[n].f
        return _factors(self.final_pairs, self.final_lead)[3]

    def to_json(self) -> dict:
        def c(z):
            z = complex(z)
            return None if is_inf(z) else [z.real, z.imag]
        out = []
        for n, st in enumerate(self.steps):
            out.append({"n": n, "roots": [[c(a), c(b)] for a, b in st.pairs],
                        "delta_j": list(self.deltas[n]), "Delta": c(st.delta),
                        "lead": c(st.f.lead)})
        out.append({"n": len(self.steps), "roots": [[c(a), c(b)] for a, b in self.final_pairs],
                    "delta_j": list(self.deltas[-1]), "lead": c(self.final_lead)})
        return {"steps": out, "limit": {"c": c(self.limit.c), "t": [c(x) for x in self.limit.t]}}


def pair_gap(pair, disk) -> float:
    """Within-pair root distance; chordal for an exterior disk."""
    a, b = pair
    if disk.exterior:
        return chordal(a, b)
    return abs(a - b)


def _factors(pairs, lead):
    p1 = CPoly.from_roots(pairs[0])
    p2 = CPoly.from_roots(pairs[1])
    p3 = CPoly.from_roots(pairs[2], lead)
    return p1, p2, p3, p1 * p2 * p3


def refine_factors(f: CPoly, p1: CPoly, p2: CPoly, p3: CPoly, iters: int = 6):
    """Newton refinement of ``f = p1 p2 p3`` on the coefficients.

    The quadratic factor of a root cluster is well conditioned even when the
    individual roots are not, so this recovers full precision near double roots.
    The leading entries of ``p1`` and ``p2`` are held fixed, as are the
    vanishing top entries of ``p3`` when it carries roots at infinity.
    """
    qs = [p1.quad().copy(), p2.quad().copy(), p3.quad().copy()]
    free = [[i for i in range(3) if i != p1.degree], [i for i in range(3) if i != p2.degree],
            list(range(p3.degree + 1))]  # a root at infinity stays there
    target = f.coeffs
    scale = max(f.scale, 1e-300)

    def resid(qs):
        return np.convolve(np.convolve(qs[0], qs[1]), qs[2]) - target

    r = resid(qs)
    for _ in range(iters):
        if np.max(np.abs(r)) <= 1e-16 * scale:
            break
        cols = []
        for k in range(3):
            other = np.convolve(qs[(k + 1) % 3], qs[(k + 2) % 3])
            for i in free[k]:
                e = np.zeros(3, dtype=complex)
                e[i] = 1.0
                cols.append(np.convolve(e, other))
        J = np.array(cols).T
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        trial = [q.copy() for q in qs]
        pos = 0
        for k in range(3):
            for i in free[k]:
                trial[k][i] += step[pos]
                pos += 1
        rt = resid(trial)
        if np.max(np.abs(rt)) >= np.max(np.abs(r)):
            break
        qs, r = trial, rt
    return tuple(CPoly(q) for q in qs)


def _quad_roots(b: np.ndarray):
    """Both sphere roots of ``b0 + b1 x + b2 x^2`` (infinity if ``b2 = 0``)."""
    b0, b1, b2 = (complex(x) for x in b)
    if b2 == 0:
        if b1 == 0:
            raise TowerError("bracket vanished identically")
        return -b0 / b1, INF
    sq = np.sqrt(b1 * b1 - 4 * b0 * b2)
    s = -b1 - sq if abs(-b1 - sq) >= abs(-b1 + sq) else -b1 + sq
    if s == 0:
        return 0j, 0j
    r1 = s / (2 * b2)
    r2 = 2 * b0 / s
    return r1, r2


def _lead(b: np.ndarray) -> complex:
    return complex(b[2]) if b[2] != 0 else complex(b[1])


def _split(b, dj, dk):
    """Assign the two roots of bracket ``b`` to disks ``dj`` and ``dk``."""
    u, v = _quad_roots(b)
    s1 = min(dj.depth(u), dk.depth(v))
    s2 = min(dj.depth(v), dk.depth(u))
    return (u, v) if s1 >= s2 else (v, u)


def _step(pairs, factors, D: DiskTriple) -> RichelotStep:
    p1, p2, p3 = factors
    q1, q2, q3 = p1.quad(), p2.quad(), p3.quad()
    dlt = delta(q1, q2, q3)
    if dlt == 0:
        raise TowerError("Delta(p1, p2, p3) vanished")
    b23, b31, b12 = bracket_coeffs(q2, q3), bracket_coeffs(q3, q1), bracket_coeffs(q1, q2)
    f_hat = CPoly(np.convolve(np.convolve(b23, b31), b12) / (4 * dlt))
    r12_1, r12_2 = _split(b12, D.d1, D.d2)
    r23_2, r23_3 = _split(b23, D.d2, D.d3)
    r31_3, r31_1 = _split(b31, D.d3, D.d1)
    new_pairs = ((r12_1, r31_1), (r12_2, r23_2), (r23_3, r31_3))
    lead_hat = _lead(b23) * _lead(b31) * _lead(b12) / (4 * dlt)
    return RichelotStep(f=p1 * p2 * p3, p1=p1, p2=p2, p3=p3, delta=dlt, f_hat=f_hat,
                        h_matrix=h_matrix(q1, q2, q3, dlt), pairs=tuple(pairs),
                        pairs_hat=new_pairs, lead_hat=lead_hat)


def _initial_state(f: CPoly, D: DiskTriple):
    pairs = pair_roots(sphere_roots(f), D)
    if pairs is None:
        raise SubordinationError("polynomial is not subordinate to the disk triple")
    p1, p2, p3, _ = _factors(pairs, f.lead)
    factors = refine_factors(f, p1, p2, p3)
    refined = []
    for p, pair, disk in zip(factors, pairs, D.disks):
        rts = _quad_roots(p.quad()) if p.degree >= 1 else (INF, INF)
        if p.degree == 1:
            rts = (rts[0], INF)
        refined.append(_order_like(rts, pair))
    return tuple(refined), factors


def _order_like(rts, pair):
    # keep the refined roots only if they stay close to the originals
    a, b = rts
    if chordal(a, pair[0]) + chordal(b, pair[1]) > chordal(b, pair[0]) + chordal(a, pair[1]):
        a, b = b, a
    return (a, b)


def richelot_step(f: CPoly, D: DiskTriple) -> RichelotStep:
    """One step ``f -> H_D(f)`` together with ``Delta`` and the correction matrix."""
    pairs, factors = _initial_state(f, D)
    return _step(pairs, factors, D)


def _snap(pair):
    a, b = pair
    if is_inf(a) or is_inf(b):
        return INF
    return 0.5 * (a + b)


def _limit(pairs, lead) -> DegenerateCurve:
    t = [_snap(p) for p in pairs]
    c = complex(lead)
    # a huge finite partner of infinity contributes a constant factor to c
    for tj, pair in zip(t, pairs):
        for x in pair:
            if is_inf(tj) and not is_inf(x):
                c *= -x
    return DegenerateCurve(c, tuple(t))


def iterate_tower(f: CPoly, D: DiskTriple, tol: float = TOWER_TOL,
                  max_iter: int = MAX_ITER) -> RichelotTower:
    """Iterate ``H_D`` until every in-disk root gap is below ``tol``."""
    pairs, factors = _initial_state(f, D)
    steps, history = [], []
    for n in range(max_iter + 1):
        gaps = tuple(pair_gap(p, d) for p, d in zip(pairs, D.disks))
        history.append(gaps)
        if max(gaps) < tol:
            lead = factors[2].lead
            return RichelotTower(D, steps, _limit(pairs, lead), history, pairs, lead)
        if n == max_iter:
            break
        st = _step(pairs, factors, D)
        steps.append(st)
        pairs = st.pairs_hat
        factors = _factors(pairs, st.lead_hat)[:3]
    raise TowerError(f"tower did not reach tol={tol:g} in {max_iter} steps",
                     step=max_iter, delta_history=[list(g) for g in history])
