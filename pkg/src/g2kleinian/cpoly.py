"""Complex polynomials of degree at most six and the degree-2 bracket calculus.

Polynomials are stored low-to-high: ``coeffs[j]`` is the coefficient of
``x**j``.  Points of the Riemann sphere are plain complex numbers, with
:data:`INF` standing for the point at infinity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, RootFindingError

__all__ = [
    "INF",
    "CPoly",
    "Moebius",
    "is_inf",
    "bracket",
    "discr",
    "res",
    "delta",
    "moebius_conjugate",
    "roots",
    "sphere_roots",
    "is_admissible",
    "min_root_separation",
    "TOL_ROOT",
]

INF = complex(np.inf, 0.0)
TOL_ROOT = 1e-13
MAX_DEGREE = 6


def is_inf(z) -> bool:
    """True when ``z`` represents the point at infinity."""
    return bool(np.isinf(complex(z).real) or np.isinf(complex(z).imag))


@dataclass(frozen=True, eq=False)
class CPoly:
    """Complex polynomial of degree at most six.

    Trailing zero coefficients are allowed; the degree is the largest index
    holding an exactly nonzero coefficient.
    """

    coeffs: np.ndarray

    def __init__(self, coeffs: Iterable[complex]):
        c = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                       dtype=complex).ravel()
        nz = np.nonzero(c)[0]
        if nz.size and nz[-1] > MAX_DEGREE:
            raise DomainError(f"degree {nz[-1]} exceeds {MAX_DEGREE}")
        padded = np.zeros(MAX_DEGREE + 1, dtype=complex)
        n = min(c.size, MAX_DEGREE + 1)
        padded[:n] = c[:n]
        padded.setflags(write=False)
        object.__setattr__(self, "coeffs", padded)

    @classmethod
    def from_roots(cls, rts: Sequence[complex], lead: complex = 1.0) -> "CPoly":
        """Polynomial ``lead * prod(x - r)``; roots at infinity are skipped."""
        c = np.array([lead], dtype=complex)
        for r in rts:
            if is_inf(r):
                continue
            c = np.convolve(c, [-r, 1.0])
        return cls(c)

    @classmethod
    def x(cls) -> "CPoly":
        return cls([0.0, 1.0])

    def __getitem__(self, j: int) -> complex:
        return complex(self.coeffs[j]) if 0 <= j <= MAX_DEGREE else 0j

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else -1

    @property
    def lead(self) -> complex:
        d = self.degree
        return complex(self.coeffs[d]) if d >= 0 else 0j

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self) -> bool:
        return self.degree < 0

    def __call__(self, x):
        return np.polyval(self.coeffs[::-1], x)

    def deriv(self) -> "CPoly":
        return CPoly(self.coeffs[1:] * np.arange(1, MAX_DEGREE + 1))

    def __add__(self, other: "CPoly") -> "CPoly":
        return CPoly(self.coeffs + _coerce(other).coeffs)

    def __sub__(self, other: "CPoly") -> "CPoly":
        return CPoly(self.coeffs - _coerce(other).coeffs)

    def __neg__(self) -> "CPoly":
        return CPoly(-self.coeffs)

    def __mul__(self, other) -> "CPoly":
        if np.isscalar(other):
            return CPoly(self.coeffs * other)
        prod = np.convolve(self.coeffs, _coerce(other).coeffs)
        if np.any(prod[MAX_DEGREE + 1:] != 0):
            raise DomainError("product exceeds degree 6")
        return CPoly(prod[: MAX_DEGREE + 1])

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "CPoly":
        return CPoly(self.coeffs / scalar)

    def allclose(self, other: "CPoly", rtol: float = 1e-12) -> bool:
        o = _coerce(other)
        scale = max(self.scale, o.scale, 1e-300)
        return bool(np.max(np.abs(self.coeffs - o.coeffs)) <= rtol * scale)

    def quad(self) -> np.ndarray:
        """Coefficients ``(p0, p1, p2)``; raises unless degree <= 2."""
        if self.degree > 2:
            raise DomainError(f"expected degree <= 2, got {self.degree}")
        return np.array(self.coeffs[:3])

    def to_json(self) -> list:
        return [[float(c.real), float(c.imag)] for c in self.coeffs[: max(self.degree, 0) + 1]]

    @classmethod
    def from_json(cls, data) -> "CPoly":
        return cls([complex(re, im) for re, im in data])

    def __repr__(self) -> str:
        terms = [f"({c:.6g})x^{j}" for j, c in enumerate(self.coeffs) if c != 0]
        return "CPoly(" + (" + ".join(terms) or "0") + ")"


def _coerce(p) -> CPoly:
    return p if isinstance(p, CPoly) else CPoly(np.atleast_1d(p))


def _q(p) -> np.ndarray:
    if isinstance(p, CPoly):
        return p.quad()
    a = np.asarray(p, dtype=complex)
    if a.size > 3 and np.any(a[3:] != 0):
        raise DomainError("expected degree <= 2")
    out = np.zeros(3, dtype=complex)
    out[: min(3, a.size)] = a[:3]
    return out


def bracket(p, q) -> CPoly:
    """``[p, q] = p'q - pq'`` for polynomials of degree at most two."""
    return CPoly(bracket_coeffs(_q(p), _q(q)))


def bracket_coeffs(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # the cubic terms cancel identically
    return np.array([
        p[1] * q[0] - p[0] * q[1],
        2 * (p[2] * q[0] - p[0] * q[2]),
        p[2] * q[1] - p[1] * q[2],
    ])


def discr(p) -> complex:
    a = _q(p)
    return complex(a[1] ** 2 - 4 * a[0] * a[2])


def res(p, q) -> complex:
    a, b = _q(p), _q(q)
    return complex((a[2] * b[0] - a[0] * b[2]) ** 2
                   + (a[2] * b[1] - a[1] * b[2]) * (a[0] * b[1] - a[1] * b[0]))


def delta(p, q, r) -> complex:
    """Determinant of the coefficient matrix with columns ``p, q, r``."""
    return complex(np.linalg.det(np.column_stack([_q(p), _q(q), _q(r)])))


@dataclass(frozen=True)
class Moebius:
    """The map ``x -> (a x + b) / (c x + d)``, normalized to ``ad - bc = 1``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det == 0:
            raise DomainError("degenerate Moebius transformation")
        s = np.sqrt(complex(det))
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)) / s)

    def __call__(self, x):
        if is_inf(x):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * x + self.d
        if den == 0:
            return INF
        return (self.a * x + self.b) / den


def moebius_conjugate(S: Moebius, p) -> CPoly:
    """``(c x + d)^2 * p(S(x))`` expanded, for ``p`` of degree at most two."""
    p0, p1, p2 = _q(p)
    num = np.array([S.b, S.a])  # a x + b, low-to-high
    den = np.array([S.d, S.c])
    out = (p0 * np.convolve(den, den) + p1 * np.convolve(num, den)
           + p2 * np.convolve(num, num))
    return CPoly(out)


# --- roots ------------------------------------------------------------------

def roots(f: CPoly, tol: float = TOL_ROOT, max_iter: int = 500,
          restarts: int = 8, seed: int = 0) -> np.ndarray:
    """Finite roots of ``f`` by Aberth-Ehrlich iteration with Newton polishing."""
    d = f.degree
    if d < 1:
        raise DomainError("roots() needs a polynomial of degree >= 1")
    c = np.array(f.coeffs[: d + 1]) / f.lead
    if d == 1:
        return np.array([-c[0]])
    rev = c[::-1]
    drev = np.polyder(rev)
    # Cauchy-type bound for the initial circle
    radius = 1.0 + float(np.max(np.abs(c[:-1])))
    rng = np.random.default_rng(seed)
    best, best_res = None, np.inf
    for attempt in range(restarts):
        phase = 0.4 + (rng.uniform(0, 2 * np.pi) if attempt else 0.0)
        rad = radius * (0.5 if attempt % 2 else 1.0)
        z = rad * np.exp(1j * (2 * np.pi * np.arange(d) / d + phase))
        if attempt:
            z *= 1 + 0.1 * rng.standard_normal(d)
        active = np.ones(d, dtype=bool)
        for _ in range(max_iter):
            pv = np.polyval(rev, z)
            dv = np.polyval(drev, z)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                ratio = pv / dv
                diff = z[:, None] - z[None, :]
                np.fill_diagonal(diff, np.inf)
                corr = ratio / (1.0 - ratio * (1.0 / diff).sum(axis=1))
            bad = ~np.isfinite(corr)
            if np.any(bad):
                # coincident iterates: nudge apart instead of dividing by zero
                corr[bad] = 1e-8 * radius * rng.standard_normal(int(bad.sum()))
            corr[~active] = 0.0
            z = z - corr
            active &= np.abs(corr) > 1e-16 * np.maximum(1.0, np.abs(z))
            if not active.any():
                break
        z = _polish(rev, drev, z)
        resid = _residuals(c, z)
        if np.max(resid) < best_res:
            best, best_res = z, float(np.max(resid))
        if best_res <= tol:
            break
    if best is None or not np.all(np.isfinite(best)) or best_res > 1e3 * tol:
        raise RootFindingError("Aberth iteration did not converge",
                               residuals=None if best is None else _residuals(c, best))
    return best


def _polish(rev, drev, z, steps: int = 3):
    for _ in range(steps):
        dv = np.polyval(drev, z)
        ok = dv != 0
        step = np.zeros_like(z)
        step[ok] = np.polyval(rev, z[ok]) / dv[ok]
        z = z - step
    return z


def _residuals(c_monic: np.ndarray, z: np.ndarray) -> np.ndarray:
    """|f(r)| relative to sum |c_j| max(1, |r|)^j."""
    rev = c_monic[::-1]
    scale = np.polyval(np.abs(rev), np.maximum(1.0, np.abs(z)))
    return np.abs(np.polyval(rev, z)) / scale


def sphere_roots(f: CPoly, **kw) -> np.ndarray:
    """The six roots of ``f`` on the sphere; infinity has multiplicity ``6 - deg f``."""
    if f.is_zero():
        raise DomainError("zero polynomial has no root multiset")
    fin = roots(f, **kw) if f.degree >= 1 else np.array([], dtype=complex)
    return np.concatenate([fin, np.full(MAX_DEGREE - f.degree, INF)])


def min_root_separation(f: CPoly) -> float:
    r = roots(f)
    d = np.abs(r[:, None] - r[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def is_admissible(f: CPoly) -> bool:
    """Degree 5 or 6 and no multiple roots (separation above ``1e-9 (max|r| + 1)``)."""
    if f.degree not in (5, 6):
        return False
    try:
        r = roots(f)
    except RootFindingError:
        # clustered roots defeat the iteration; treat as multiple
        return False
    sep_tol = 1e-9 * (float(np.max(np.abs(r))) + 1.0)
    return min_root_separation(f) > sep_tol
