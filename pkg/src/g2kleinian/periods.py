"""Period data of a subordinate curve: the a-period matrices W and E from the
degenerate limit, b-periods by quadrature, and the Riemann matrix.

Conventions: ``W[:, j]`` integrates ``(dx/y, x dx/y)`` over the boundary of
disk ``j`` (counterclockwise for finite disks, so that the three columns sum
to zero), ``E[:, j]`` is minus the integral of the second-kind forms over the
same cycle.  Columns 0 and 1 are the a-periods.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .cpoly import CPoly, is_inf
from .disks import Disk, DiskTriple
from .errors import PeriodError
from .richelot import DegenerateCurve, RichelotTower

__all__ = [
    "PeriodData",
    "degenerate_W",
    "degenerate_E",
    "compute_periods",
    "b_periods",
    "contour_periods",
    "is_quasi_reduced",
    "reduce_real_part",
    "rho",
]

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True, eq=False)
class PeriodData:
    W: np.ndarray
    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    etaA: np.ndarray
    omega: np.ndarray
    E_levels: List[np.ndarray] = field(default_factory=list)
    level: int = 0

    @property
    def Ainv(self) -> np.ndarray:
        return np.linalg.inv(self.A)

    @property
    def N(self) -> np.ndarray:
        """``eta_A A^{-1}``, the quadratic form of the T-map (symmetrized)."""
        n = self.etaA @ np.linalg.inv(self.A)
        return 0.5 * (n + n.T)

    def eta(self, w_coeffs) -> np.ndarray:
        """``eta`` at the lattice vector ``A n + B m`` for ``w_coeffs = (n1, n2, m1, m2)``.

        Only a-period combinations are supported (``m = 0``); the b-period
        values are not computed.
        """
        c = np.asarray(w_coeffs)
        if np.any(c[2:] != 0):
            raise PeriodError("eta at b-periods is not available")
        return self.etaA @ c[:2]

    def at_level(self, n: int) -> "PeriodData":
        """Period data of the ``n``-th tower polynomial: same a-periods, b-periods times ``2**n``."""
        if n == self.level:
            return self
        if not 0 <= n < len(self.E_levels):
            raise PeriodError(f"level {n} outside the tower")
        E = self.E_levels[n]
        s = 2.0 ** (n - self.level)
        return PeriodData(self.W, E, self.A, self.B * s, E[:, :2], self.omega * s,
                          self.E_levels, n)

    def to_json(self) -> dict:
        return {k: _cjson(getattr(self, k)) for k in ("W", "E", "A", "B", "etaA", "omega")}


def _cjson(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_cjson(x) for x in a]


# --- degenerate limit -----------------------------------------------------------

def rho(coeffs, x):
    """The numerators ``(rho1(x), rho2(x))`` of the second-kind forms."""
    f = coeffs
    r1 = f[3] * x + 2 * f[4] * x ** 2 + 3 * f[5] * x ** 3 + 4 * f[6] * x ** 4
    r2 = f[5] * x ** 2 + 2 * f[6] * x ** 3
    return np.array([r1, r2])


def _finite_weights(g: DegenerateCurve):
    j_inf = g.inf_index
    t = g.t
    sc = np.sqrt(g.c)
    out = {}
    for j in range(3):
        if j == j_inf:
            continue
        prod = 1.0 + 0j
        for k in range(3):
            if k != j and k != j_inf:
                prod *= t[j] - t[k]
        if prod == 0:
            raise PeriodError("coincident double roots in the limit curve")
        out[j] = TWO_PI_I / (sc * prod)
    return out, j_inf


def degenerate_W(g: DegenerateCurve) -> np.ndarray:
    """a-periods of ``dx/sqrt(g), x dx/sqrt(g)`` around each double root, by residues."""
    w, j_inf = _finite_weights(g)
    W = np.zeros((2, 3), dtype=complex)
    for j, c in w.items():
        W[:, j] = c * np.array([1.0, g.t[j]])
    if j_inf is not None:
        W[:, j_inf] = -W.sum(axis=1)
    return W


def degenerate_E(g: DegenerateCurve) -> np.ndarray:
    """Residue values of minus the second-kind integrals, same branch as :func:`degenerate_W`."""
    w, j_inf = _finite_weights(g)
    gc = g.poly().coeffs
    E = np.zeros((2, 3), dtype=complex)
    for j, c in w.items():
        E[:, j] = -c * rho(gc, g.t[j]) / 4
    if j_inf is not None:
        E[:, j_inf] = -E.sum(axis=1)
    return E


# --- contour quadrature (reference values) ----------------------------------------

def _sqrt_outside(x, pairs, D: DiskTriple, lead):
    """A branch of ``sqrt(f)`` analytic on the complement of the three disks."""
    u = np.sqrt(complex(lead)) * np.ones_like(x)
    for (a, b), disk in zip(pairs, D.disks):
        c = disk.center
        fin = [r for r in (a, b) if not is_inf(r)]
        if disk.exterior:
            k = np.prod([c - r for r in fin]) if fin else 1.0
            v = np.ones_like(x)
            for r in fin:
                v = v * (1 - (x - c) / (r - c))
            u = u * np.sqrt(complex(k)) * np.sqrt(v)
        else:
            if len(fin) != 2:
                raise PeriodError("infinite root inside a finite disk")
            v = (1 - (a - c) / (x - c)) * (1 - (b - c) / (x - c))
            u = u * (x - c) * np.sqrt(v)
    return u


def contour_periods(f: CPoly, D: DiskTriple, pairs=None, n: int = 256,
                    tol: float = 1e-14, max_n: int = 1 << 15):
    """W and E by the trapezoid rule on the disk boundaries (spectrally accurate).

    ``pairs`` are the root pairs of ``f`` per disk; computed when omitted.
    """
    from .disks import pair_roots
    from .cpoly import sphere_roots
    if pairs is None:
        pairs = pair_roots(sphere_roots(f), D)
        if pairs is None:
            raise PeriodError("polynomial is not subordinate to the disk triple")
    lead = f.lead
    # the leading coefficient of f sits in the finite roots' product
    prev = None
    while n <= max_n:
        W = np.zeros((2, 3), dtype=complex)
        E = np.zeros((2, 3), dtype=complex)
        th = 2 * np.pi * np.arange(n) / n
        for j, disk in enumerate(D.disks):
            e = np.exp(1j * th)
            x = disk.center + disk.radius * e
            dx = 1j * disk.radius * e * (2 * np.pi / n)
            if disk.exterior:
                dx = -dx
            u = _sqrt_outside(x, pairs, D, lead)
            W[0, j] = np.sum(dx / u)
            W[1, j] = np.sum(x * dx / u)
            r = rho(f.coeffs, x)
            E[:, j] = -np.sum(r * dx / (4 * u), axis=1)
        if prev is not None:
            scale = max(np.abs(W).max(), np.abs(E).max())
            if max(np.abs(W - prev[0]).max(), np.abs(E - prev[1]).max()) < tol * scale:
                return W, E
        prev = (W, E)
        n *= 2
    raise PeriodError("contour quadrature did not converge", n=n)


# --- b-periods -------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _segment_integral(xa, xb, roots_xi, lead_xi, numer, tol=1e-15, max_panels=4096):
    """``int (numer(xi)) dxi / sqrt(F(xi))`` over the segment between two simple roots.

    ``F = lead_xi * prod(xi - roots_xi)`` and ``xa, xb`` are among the roots.
    The substitution ``s = sin^2(pi t / 2)`` absorbs both endpoint singularities,
    and each factor's square root is rotated off its cut along the segment.
    """
    d = xb - xa
    others = []
    skipped_a = skipped_b = False
    for r in roots_xi:
        if not skipped_a and r == xa:
            skipped_a = True
            continue
        if not skipped_b and r == xb:
            skipped_b = True
            continue
        others.append(r)
    if not (skipped_a and skipped_b) or len(others) != len(roots_xi) - 2:
        raise PeriodError("segment endpoints must be roots")
    rot = []
    for r in others:
        p0, p1 = xa - r, xb - r
        seg = p1 - p0
        tt = np.clip(-np.real(np.conj(seg) * p0) / abs(seg) ** 2, 0.0, 1.0)
        p = p0 + tt * seg
        if abs(p) == 0:
            raise PeriodError("branch point on the integration path; perturb the path")
        rot.append(np.exp(-1j * np.angle(p)))
    rot = np.array(rot)
    const = np.sqrt(complex(lead_xi)) * np.exp(0.5j * (np.angle(d) + np.angle(-d))) * abs(d)
    others = np.array(others)

    def panel_sum(m):
        edges = np.linspace(0.0, 1.0, m + 1)
        a, b = edges[:-1, None], edges[1:, None]
        t = (0.5 * (b - a) * _GL_X[None, :] + 0.5 * (a + b)).ravel()
        w = (0.5 * (b - a) * _GL_W[None, :]).ravel()
        s = np.sin(0.5 * np.pi * t) ** 2
        xi = xa + s * d
        fac = (xi[:, None] - others[None, :]) * rot[None, :]
        den = const * np.prod(np.sqrt(fac) / np.sqrt(rot)[None, :], axis=1)
        return (numer(xi) * (w * np.pi * d / den)).sum(axis=1)

    m = 4
    prev = panel_sum(m)
    while m < max_panels:
        m *= 2
        cur = panel_sum(m)
        if np.max(np.abs(cur - prev)) <= tol * max(np.max(np.abs(cur)), 1e-300) * 10:
            return cur
        prev = cur
    raise PeriodError("b-period quadrature did not converge; perturb the path",
                      panels=m)


def _avoid_map(disk: Disk, avoid_roots):
    """Pole ``q`` of the map ``xi = 1/(x - q)`` placed inside the avoided disk."""
    if disk.exterior:
        return None
    cands = [disk.center + 0.5 * disk.radius * np.exp(2j * np.pi * k / 8) for k in range(8)]
    cands.append(disk.center)
    fin = [r for r in avoid_roots if not is_inf(r)]
    return max(cands, key=lambda q: min(abs(q - r) for r in fin) if fin else 0.0)


def _path_integral(f: CPoly, all_roots, ia, ib, q):
    """Integral of ``(dx/y, x dx/y)`` from root ``ia`` to root ``ib`` along a segment in xi."""
    if q is None:
        rts = [complex(r) for r in all_roots if not is_inf(r)]
        lead = f.lead
        xa, xb = complex(all_roots[ia]), complex(all_roots[ib])
        numer = lambda x: np.array([np.ones_like(x), x])
    else:
        rts = [0j if is_inf(r) else 1.0 / (complex(r) - q) for r in all_roots]
        lead = f(q)
        xa, xb = rts[ia], rts[ib]
        # x = q + 1/xi turns (dx/y, x dx/y) into -(xi, q xi + 1) dxi / sqrt(F)
        numer = lambda x: -np.array([x, q * x + 1])
    return _segment_integral(xa, xb, rts, lead, numer)


def _path_clearance(pts, ia, ib):
    a, b = pts[ia], pts[ib]
    seg = b - a
    best = np.inf
    for k, r in enumerate(pts):
        if k in (ia, ib):
            continue
        tt = np.clip(np.real(np.conj(seg) * (r - a)) / abs(seg) ** 2, 0, 1)
        best = min(best, abs(a + tt * seg - r) / abs(seg))
    return best


def b_periods(f: CPoly, D: DiskTriple, pairs=None) -> np.ndarray:
    """Two raw b-type periods (columns): doubled root-to-root integrals.

    Column 0 joins disk 1 to disk 3 avoiding disk 2, column 1 joins disk 2 to
    disk 3 avoiding disk 1.  Orientation and lattice normalization are fixed
    later by :func:`normalize_b`.
    """
    from .disks import pair_roots
    from .cpoly import sphere_roots
    if pairs is None:
        pairs = pair_roots(sphere_roots(f), D)
        if pairs is None:
            raise PeriodError("polynomial is not subordinate to the disk triple")
    all_roots = [r for p in pairs for r in p]
    out = np.zeros((2, 2), dtype=complex)
    for col, (j, avoid) in enumerate([(0, 1), (1, 0)]):
        q = _avoid_map(D.disks[avoid], pairs[avoid])
        pts = [(0j if is_inf(r) else 1.0 / (complex(r) - q)) if q is not None else complex(r)
               for r in all_roots]
        if q is None and any(is_inf(all_roots[i]) for i in (2 * j, 2 * j + 1, 4, 5)):
            raise PeriodError("infinite root on a b-period path")
        choices = [(ia, ib) for ia in (2 * j, 2 * j + 1) for ib in (4, 5)]
        ia, ib = max(choices, key=lambda c: _path_clearance(pts, *c))
        out[:, col] = 2 * _path_integral(f, all_roots, ia, ib, q)
    return out


def _pos_def(Y) -> bool:
    return bool(np.all(np.linalg.eigvalsh(0.5 * (Y + Y.T)) > 0))


def normalize_b(A: np.ndarray, braw: np.ndarray, sym_tol: float = 1e-6):
    """Choose signs and an a1-shift of the raw b-periods giving a Riemann matrix."""
    Ainv = np.linalg.inv(A)
    best = None
    for s1, s2, m in itertools.product((1, -1), (1, -1), range(-3, 4)):
        B = np.column_stack([s1 * braw[:, 0], s2 * braw[:, 1] + m * A[:, 0]])
        om = Ainv @ B
        asym = abs(om[0, 1] - om[1, 0]) / max(np.abs(om).max(), 1e-300)
        if _pos_def(om.imag) and (best is None or asym < best[0]):
            best = (asym, B, om)
    if best is None or best[0] > sym_tol:
        raise PeriodError("could not normalize b-periods to a Riemann matrix",
                          asymmetry=None if best is None else best[0])
    return best[1], best[2]


def reduce_real_part(A, B, omega):
    """Shift ``B`` by ``A K`` (``K`` symmetric integer) so ``Re omega`` lies in [-1/2, 1/2)."""
    sym = 0.5 * (omega + omega.T)
    K = np.floor(sym.real + 0.5)
    return B - A @ K, omega - K


def compute_periods(tower: RichelotTower, f: Optional[CPoly] = None) -> PeriodData:
    """Period data of ``f``: a-periods from the tower limit, b-periods by quadrature."""
    g = tower.limit
    W = degenerate_W(g)
    E = degenerate_E(g)
    levels = [None] * (tower.depth + 1)
    levels[-1] = E
    for n in range(tower.depth - 1, -1, -1):
        E = 2 * E + tower.steps[n].h_matrix @ W
        levels[n] = E
    A = W[:, :2]
    if abs(np.linalg.det(A)) < 1e-300 or np.linalg.cond(A) > 1e12:
        raise PeriodError("a-period matrix is singular")
    if f is None:
        f = tower.f(0)
    pairs = tower.steps[0].pairs if tower.depth else tower.final_pairs
    braw = b_periods(f, tower.disks, pairs)
    B, om = normalize_b(A, braw)
    B, om = reduce_real_part(A, B, om)
    asym = abs(om[0, 1] - om[1, 0])
    if asym > 1e-6 * np.abs(om).max():
        raise PeriodError("Riemann matrix is not symmetric", asymmetry=asym)
    return PeriodData(W, levels[0], A, B, levels[0][:, :2], om, levels, 0)


# --- reduction -------------------------------------------------------------------

_E_REPS = ((1, 0), (0, 1), (1, -1))


def is_quasi_reduced(omega) -> bool:
    """Each of (1,0), (0,1), (1,-1) is the strict Im-norm minimum of its class mod 2."""
    Y = np.asarray(omega).imag
    Y = 0.5 * (Y + Y.T)
    lam = np.linalg.eigvalsh(Y)
    if lam[0] <= 0:
        raise PeriodError("imaginary part is not positive definite")
    for k in _E_REPS:
        k = np.array(k)
        val = k @ Y @ k
        R = int(np.ceil(np.sqrt(val / lam[0]))) + 1
        rng = np.arange(-R, R + 1)
        for m1 in rng[(rng - k[0]) % 2 == 0]:
            for m2 in rng[(rng - k[1]) % 2 == 0]:
                m = np.array([m1, m2])
                if np.array_equal(m, k) or np.array_equal(m, -k):
                    continue
                if not val < m @ Y @ m:
                    return False
    return True
