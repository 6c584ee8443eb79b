"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict that is printed in the terminal summary
(see ``conftest.py``), whether it passes or fails.
"""
import numpy as np
import pytest

from g2kleinian.abel import (CurvePoint, Divisor2, abel_map, divisor_from_z, lattice_coords,
                             lattice_distance)
from g2kleinian.cpoly import CPoly, Moebius, bracket, delta, discr, is_inf, moebius_conjugate, res, roots
from g2kleinian.disks import Disk, DiskTriple, find_disks
from g2kleinian.errors import TowerError
from g2kleinian.kleinian import build_context, eval_S, limit_data, limit_S, limit_S_generic
from g2kleinian.periods import contour_periods, degenerate_E, degenerate_W, is_quasi_reduced
from g2kleinian.richelot import DegenerateCurve, iterate_tower, pair_gap, richelot_step
from g2kleinian.thetaref import TaylorTargets, oracle_S, theta_data

from conftest import random_points, random_quad, random_sextic, WEIERSTRASS_QUINTIC

VERDICTS = {}


def verdict(n, ok, detail):
    VERDICTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, VERDICTS[n]


def rel_norm(a, b):
    nb = np.linalg.norm(b)
    assert np.isfinite(nb) and nb > 0, "degenerate reference value"
    return float(np.linalg.norm(np.asarray(a) - b) / nb)


@pytest.fixture(scope="module")
def contexts():
    rng = np.random.default_rng(2024)
    return [build_context(random_sextic(rng)) for _ in range(19)] + [
        build_context(WEIERSTRASS_QUINTIC)]


# 1 ------------------------------------------------------------------------------

def _cpoly_rel(a, b, scale):
    return float(np.max(np.abs(np.asarray(a) - b)) / scale)


def test_c01_algebraic_identities():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        p, q, r = (CPoly(random_quad(rng)) for _ in range(3))
        d = delta(p, q, r)
        ph, qh, rh = bracket(q, r), bracket(r, p), bracket(p, q)
        s2 = max(p.scale, q.scale, r.scale) ** 2
        # relative to the natural size of each side (products of coefficient scales)
        worst = max(worst,
                    abs(discr(bracket(p, q)) - 4 * res(p, q)) / (p.scale * q.scale) ** 2,
                    _cpoly_rel(bracket(ph, qh).coeffs, (-2 * d * r).coeffs, s2 ** 2.5),
                    _cpoly_rel(bracket(qh, rh).coeffs, (-2 * d * p).coeffs, s2 ** 2.5),
                    _cpoly_rel(bracket(rh, ph).coeffs, (-2 * d * q).coeffs, s2 ** 2.5),
                    abs(delta(ph, qh, rh) + 2 * d * d) / s2 ** 3,
                    abs(res(ph, qh) - d * d * discr(r)) / s2 ** 4,
                    abs(res(qh, rh) - d * d * discr(p)) / s2 ** 4,
                    abs(res(rh, ph) - d * d * discr(q)) / s2 ** 4)
    worst_m = 0.0
    for _ in range(200):
        while True:
            a, b, c, e = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            if abs(a * e - b * c) > 0.2:
                break
        S = Moebius(a, b, c, e)
        p, q, r = (CPoly(random_quad(rng)) for _ in range(3))
        sc = max(1.0, *(abs(x) for x in (S.a, S.b, S.c, S.d))) ** 4
        lhs = bracket(moebius_conjugate(S, p), moebius_conjugate(S, q))
        rhs = moebius_conjugate(S, bracket(p, q))
        s2 = (p.scale * q.scale) * sc
        worst_m = max(worst_m, _cpoly_rel(lhs.coeffs, rhs.coeffs, s2),
                      abs(delta(*(moebius_conjugate(S, x) for x in (p, q, r))) - delta(p, q, r))
                      / (p.scale * q.scale * r.scale * sc ** 1.5))
    verdict(1, worst < 1e-11 and worst_m < 1e-10,
            f"identities {worst:.1e} (<1e-11), Moebius {worst_m:.1e} (<1e-10)")


# 2 ------------------------------------------------------------------------------

def test_c02_fixed_point_and_persistence():
    f = CPoly.from_roots([0, 0, 1, 1, -1, -1])
    D = DiskTriple(*(Disk("finite", c, 0.4) for c in (0, 1, -1)))
    fp = float(np.max(np.abs(richelot_step(f, D).f_hat.coeffs - f.coeffs)) / f.scale)
    rng = np.random.default_rng(2)
    worst = 0.0
    for k in range(10):
        a = complex(*rng.uniform(-0.1, 0.1, 2))
        b = 1 + 0.2 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
        c = -1 + 0.2 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
        j = k % 3  # put the double root in each disk in turn
        order = [[a, a, *b, *c], [*c, a, a, *b], [*b, *c, a, a]][j]
        g = CPoly.from_roots(order, complex(rng.uniform(0.5, 2)))
        Dj = DiskTriple(*(Disk("finite", x, 0.4) for x in [(0, 1, -1), (-1, 0, 1), (1, -1, 0)][j]))
        T = iterate_tower(g, Dj)
        for n in range(1, T.depth):
            pair = T.steps[n].pairs[j]
            worst = max(worst, pair_gap(pair, Dj[j]), abs(0.5 * (pair[0] + pair[1]) - a))
        worst = max(worst, abs(T.limit.t[j] - a))
    verdict(2, fp < 1e-11 and worst < 1e-9,
            f"fixed point {fp:.1e} (<1e-11), double root drift {worst:.1e} over 10 towers")


# 3 ------------------------------------------------------------------------------

def test_c03_quadratic_convergence():
    rng = np.random.default_rng(3)
    slopes, depths = [], []
    for _ in range(50):
        f = random_sextic(rng)
        D = find_disks(f)
        depths.append(iterate_tower(f, D).depth)
        try:
            hist = iterate_tower(f, D, tol=1e-300, max_iter=12).deltas
        except TowerError as exc:
            hist = exc.diagnostics["delta_history"]
        H = np.array(hist)
        for j in range(3):
            d = H[:, j]
            d = d[: np.argmax(d < 1e-13)] if np.any(d < 1e-13) else d
            x, y = np.log(d[:-1])[-4:], np.log(d[1:])[-4:]
            if len(x) >= 2:
                slopes.append(np.polyfit(x, y, 1)[0])
    lo, hi = min(slopes), max(slopes)
    verdict(3, abs(lo - 2) <= 0.1 and abs(hi - 2) <= 0.1 and max(depths) <= 10,
            f"exponents in [{lo:.3f}, {hi:.3f}] (2.0+-0.1), max depth {max(depths)} (<=10)")


# 4 ------------------------------------------------------------------------------

def _signs(W, Wr):
    s = np.array([1 if np.linalg.norm(W[:, j] - Wr[:, j]) < np.linalg.norm(W[:, j] + Wr[:, j])
                  else -1 for j in range(3)])
    return s, float(np.linalg.norm(W - Wr * s) / np.linalg.norm(W))


def test_c04_period_invariance():
    rng = np.random.default_rng(4)
    worst_w = worst_e = 0.0
    global_sign = True
    for _ in range(20):
        f = random_sextic(rng)
        D = find_disks(f)
        st = richelot_step(f, D)
        W, E = contour_periods(f, D)
        Wh, Eh = contour_periods(st.f_hat, D)
        s, ew = _signs(W, Wh)
        global_sign &= bool(np.all(s == s[0]))
        worst_w = max(worst_w, ew)
        rec = (2 * Eh + st.h_matrix @ Wh) * s
        worst_e = max(worst_e, float(np.linalg.norm(E - rec) / np.linalg.norm(E)))
    verdict(4, worst_w < 1e-8 and worst_e < 1e-8 and global_sign,
            f"W {worst_w:.1e}, E recursion {worst_e:.1e} (<1e-8), one global sign: {global_sign}")


# 5 ------------------------------------------------------------------------------

def test_c05_riemann_matrix(contexts):
    worst, ok = 0.0, True
    extra = [build_context(CPoly([-1, 0, 0, 0, 0, 0, 1]))]
    for ctx in contexts + extra:
        om = ctx.periods.omega
        worst = max(worst, abs(om[0, 1] - om[1, 0]))
        ok &= bool(np.all(np.linalg.eigvalsh(0.5 * (om.imag + om.imag.T)) > 0))
        ok &= is_quasi_reduced(om)
    verdict(5, ok and worst < 1e-9,
            f"{len(contexts) + 1} instances, asymmetry {worst:.1e} (<1e-9), "
            f"Im>0 and quasi-reduced: {ok}")


# 6 ------------------------------------------------------------------------------

def test_c06_transfer_certificate(contexts):
    fits = [t.residual for c in contexts for t in c.transfers]
    holds = [t.holdout for c in contexts for t in c.transfers]
    verdict(6, max(fits) < 1e-9 and max(holds) < 1e-8,
            f"{len(fits)} steps, fit {max(fits):.1e} (<1e-9), hold-out {max(holds):.1e} (<1e-8)")


# 7 ------------------------------------------------------------------------------

def test_c07_oracle_equivalence(contexts):
    rng = np.random.default_rng(7)
    worst = 0.0
    for ctx in contexts:
        data = theta_data(ctx.periods)
        for z in random_points(rng, 100):
            worst = max(worst, rel_norm(eval_S(ctx, z).s, oracle_S(ctx.periods, z, data).s))
    verdict(7, worst < 1e-7, f"100 points x {len(contexts)} curves, max discrepancy {worst:.1e} (<1e-7)")


# 8 ------------------------------------------------------------------------------

def test_c08_quasi_periodicity(contexts):
    rng = np.random.default_rng(8)
    worst = 0.0
    for ctx in contexts:
        P = ctx.periods
        data = theta_data(P)
        combos = [np.eye(3, dtype=int)[j] for j in range(3)]
        combos += [rng.integers(-2, 3, 3) for _ in range(2)]
        z = random_points(rng, 1, 0.5)[0]
        for path in (lambda u: eval_S(ctx, u).s, lambda u: oracle_S(P, u, data).s):
            s = path(z)
            for k in combos:
                w, e = P.W @ k, P.E @ k
                worst = max(worst, rel_norm(path(z + w), np.exp(2 * e @ (z + w / 2)) * s))
    verdict(8, worst < 1e-7, f"3 columns + 2 combinations, both paths, worst {worst:.1e} (<1e-7)")


# 9 ------------------------------------------------------------------------------

def _taylor(fun, n=32, r=0.25):
    """Order-2 data (value, q11, q12, q22) from Cauchy integrals along three lines."""
    th = 2 * np.pi * np.arange(n) / n
    t = r * np.exp(1j * th)

    def coef(d, k):
        vals = np.array([fun(tt * d) for tt in t])
        return (vals * np.exp(-1j * k * th)[:, None]).mean(axis=0) / r ** k

    e1, e2 = np.array([1.0, 0]), np.array([0, 1.0])
    c11, c22 = coef(e1, 2), coef(e2, 2)
    c12 = 0.5 * (coef(e1 + e2, 2) - c11 - c22)
    return np.stack([coef(e1, 0), c11, c12, c22], axis=1)


def test_c09_limit_formulas():
    rng = np.random.default_rng(9)
    worst_t = worst_q = 0.0
    for k in range(6):
        c = complex(*rng.uniform(0.5, 2, 2))
        # separated double roots keep the degenerate periods of moderate size
        t = list(np.array([0.8, -0.6 + 0.6j, -0.5j]) + 0.2 * random_quad(rng))
        if k % 2:
            t[2] = complex(np.inf, 0)
            g = DegenerateCurve(c, tuple(t))
            data = limit_data(g)
            fun = lambda z: limit_S_generic(data, z).s
        else:
            g = DegenerateCurve(c, tuple(t))
            fun = lambda z: limit_S(g, z).s
        worst_t = max(worst_t, float(np.abs(_taylor(fun) - TaylorTargets).max()))
        W, E = degenerate_W(g), degenerate_E(g)
        for z in random_points(rng, 3, 0.5):
            s = fun(z)
            for j in range(3):
                w = W[:, j]
                worst_q = max(worst_q, rel_norm(fun(z + w), np.exp(2 * E[:, j] @ (z + w / 2)) * s))
    verdict(9, worst_t < 1e-9 and worst_q < 1e-9,
            f"Taylor {worst_t:.1e}, quasi-periodicity {worst_q:.1e} (<1e-9), finite and infinite")


# 10 -----------------------------------------------------------------------------

def test_c10_abel_round_trip(contexts):
    rng = np.random.default_rng(10)
    worst, cert = 0.0, 0.0
    n = 0
    for ctx in contexts[:10]:
        for z in random_points(rng, 5, 1.0):
            r = abel_map(ctx, divisor_from_z(ctx, z))
            worst = max(worst, lattice_distance(ctx.periods, r.z - z))
            cert = max(cert, r.kummer_residual, r.derivative_residual)
            n += 1
    ctx = contexts[0]
    x = 0.3 - 0.2j
    P = CurvePoint.finite(x, np.sqrt(ctx.f(x)))
    base = lattice_distance(ctx.periods, abel_map(ctx, Divisor2(P, P.conjugate())).z)
    e = roots(ctx.f)
    tor = abel_map(ctx, Divisor2(CurvePoint.finite(e[0], 0), CurvePoint.finite(e[3], 0)))
    tor_ok = tor.two_torsion and lattice_distance(ctx.periods, 2 * tor.z) < 1e-8
    verdict(10, worst < 1e-6 and cert < 1e-6 and base < 1e-12 and tor_ok,
            f"{n} round trips, worst {worst:.1e} (<1e-6), certificates {cert:.1e}; "
            f"base class {base:.0e}; 2-torsion flagged: {tor_ok}")


# 11 -----------------------------------------------------------------------------

def test_c11_derivatives(contexts):
    rng = np.random.default_rng(11)
    h = 1e-5
    worst = 0.0
    for i, z in enumerate(random_points(rng, 100)):
        ctx = contexts[i % len(contexts)]
        sv = eval_S(ctx, z)
        for k, ds in enumerate((sv.ds1, sv.ds2)):
            e = h * np.eye(2)[k]
            fd = (eval_S(ctx, z + e).s - eval_S(ctx, z - e).s) / (2 * h)
            worst = max(worst, rel_norm(fd, ds))
    verdict(11, worst <= 1e-5, f"100 points, worst relative gap {worst:.1e} (<=1e-5)")
