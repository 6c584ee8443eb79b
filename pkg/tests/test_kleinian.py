import numpy as np
import pytest

from g2kleinian.cpoly import CPoly, INF
from g2kleinian.errors import InputError, PolarSetError
from g2kleinian.kleinian import (build_context, eval_S, limit_data, limit_S, limit_S_generic,
                                 limit_S_inf, m_matrix, sigma_double, sigma_zeta, wp)
from g2kleinian.periods import degenerate_E, degenerate_W
from g2kleinian.richelot import DegenerateCurve
from g2kleinian.thetaref import TaylorTargets, oracle_S, theta_data

from conftest import context_for, quintic_context, random_points
from test_thetaref import hessian_fd

G_FIN = DegenerateCurve(1.3 - 0.4j, (0.2, -0.9 + 0.3j, 1.1j))
G_INF = DegenerateCurve(0.7 + 0.2j, (0.4, -0.6j, INF))


def _check_taylor(fun):
    assert np.allclose(fun(np.zeros(2)), TaylorTargets[:, 0], atol=1e-12)
    H = hessian_fd(fun)
    for c in range(4):
        q11, q12, q22 = TaylorTargets[c, 1:]
        assert np.allclose(H[:, :, c], 2 * np.array([[q11, q12], [q12, q22]]), atol=1e-6)


def _check_quasi_periodic(fun, g, rng, tol):
    W, E = degenerate_W(g), degenerate_E(g)
    for z in random_points(rng, 3, 0.4):
        s = fun(z)
        for j in range(3):
            w = W[:, j]
            expect = np.exp(2 * E[:, j] @ (z + w / 2)) * s
            assert np.linalg.norm(fun(z + w) - expect) <= tol * np.linalg.norm(expect)


def test_limit_taylor_normalization():
    _check_taylor(lambda z: limit_S(G_FIN, z).s)
    _check_taylor(lambda z: limit_S_inf(G_INF.c, *G_INF.t[:2], z).s)


def test_limit_generic_matches_closed_form(rng):
    data = limit_data(G_FIN)
    assert np.allclose(data.M, m_matrix(G_FIN.c, *G_FIN.t))
    for z in random_points(rng, 5):
        a, b = limit_S(G_FIN, z), limit_S_generic(data, z)
        assert np.allclose(a.s, b.s, rtol=1e-11, atol=1e-12)
        assert np.allclose(a.grad, b.grad, rtol=1e-11, atol=1e-12)


def test_limit_quasi_periodic(rng):
    _check_quasi_periodic(lambda z: limit_S(G_FIN, z).s, G_FIN, rng, 1e-9)
    data = limit_data(G_INF)
    _check_quasi_periodic(lambda z: limit_S_generic(data, z).s, G_INF, rng, 1e-9)


def test_limit_permutation_invariance(rng):
    c, (t1, t2, t3) = G_FIN.c, G_FIN.t
    z = random_points(rng, 1)[0]
    ref = limit_S(G_FIN, z).s
    for t in ((t2, t1, t3), (t3, t2, t1), (t2, t3, t1)):
        assert np.allclose(limit_S(DegenerateCurve(c, t), z).s, ref, rtol=1e-12)


def test_limit_errors():
    with pytest.raises(InputError):
        limit_S(G_INF, np.zeros(2))
    with pytest.raises(InputError):
        limit_S_inf(1.0, 0.5, 0.5, np.zeros(2))


def test_transfer_certificates():
    ctx = context_for(101)
    assert len(ctx.transfers) == ctx.tower.depth
    for t in ctx.transfers:
        assert t.residual < 1e-9
        assert t.holdout < 1e-8
        for k in range(4):
            assert np.allclose(t.X[k], t.X[k].T)


@pytest.mark.parametrize("seed", [101, 102])
def test_eval_matches_oracle(seed, rng):
    ctx = context_for(seed)
    data = theta_data(ctx.periods)
    for z in random_points(rng, 20):
        a, b = eval_S(ctx, z), oracle_S(ctx.periods, z, data)
        assert np.linalg.norm(a.s - b.s) <= 1e-7 * np.linalg.norm(b.s)
        assert np.linalg.norm(a.grad - b.grad) <= 1e-7 * np.linalg.norm(b.grad)


def test_eval_quintic_matches_oracle(rng):
    ctx = quintic_context()
    for z in random_points(rng, 10):
        a, b = eval_S(ctx, z).s, oracle_S(ctx.periods, z).s
        assert np.linalg.norm(a - b) <= 1e-7 * np.linalg.norm(b)


def test_eval_derivatives_vs_differences(ctx, rng):
    h = 1e-5
    for z in random_points(rng, 10):
        sv = eval_S(ctx, z)
        for i, ds in enumerate((sv.ds1, sv.ds2)):
            e = h * np.eye(2)[i]
            fd = (eval_S(ctx, z + e).s - eval_S(ctx, z - e).s) / (2 * h)
            assert np.linalg.norm(fd - ds) <= 1e-5 * np.linalg.norm(ds)


def test_eval_taylor(ctx):
    _check_taylor(lambda z: eval_S(ctx, z).s)


def test_wp_even_and_periodic(ctx, rng):
    for z in random_points(rng, 5, 0.6):
        p = wp(ctx, z)
        assert np.allclose(wp(ctx, -z), p, rtol=1e-9)
        w = ctx.periods.W[:, 0] - 2 * ctx.periods.W[:, 2]
        assert np.allclose(wp(ctx, z + w), p, rtol=1e-7)


def test_wp_near_pole(ctx):
    with pytest.raises(PolarSetError):
        wp(ctx, np.zeros(2))
    with pytest.raises(PolarSetError):
        wp(ctx, ctx.periods.W[:, 1])


def test_non_weierstrass_sigma(ctx):
    with pytest.raises(InputError):
        sigma_double(ctx, np.array([0.1, 0.2]))


def test_sigma_zeta_quintic(rng):
    ctx = quintic_context()
    sig = lambda u: sigma_double(ctx, u / 2)
    for u in random_points(rng, 4, 0.8):
        s2, z1, z2 = sigma_zeta(ctx, u / 2)
        assert s2 == sig(u)
        h = 1e-5
        for i, zeta in enumerate((z1, z2)):
            e = h * np.eye(2)[i]
            # zeta_j is d_j log sigma, here at u/2
            fd = (np.log(sig(u / 2 + e)) - np.log(sig(u / 2 - e))) / (2 * h)
            assert abs(fd - zeta) <= 1e-5 * max(1, abs(zeta))


def test_sigma_odd_and_quasi_periodic(rng):
    ctx = quintic_context()
    P = ctx.periods
    u = random_points(rng, 1, 0.6)[0]
    s = sigma_double(ctx, u / 2)
    assert abs(sigma_double(ctx, -u / 2) + s) <= 1e-9 * abs(s)
    for j in range(3):
        w, e = P.W[:, j], P.E[:, j]
        lhs = sigma_double(ctx, (u + w) / 2)
        rhs = np.exp(e @ (u + w / 2)) * s
        # sigma picks up a sign of order two along lattice vectors
        assert min(abs(lhs - rhs), abs(lhs + rhs)) <= 1e-6 * abs(rhs)


def test_build_context_rejects_non_admissible():
    with pytest.raises(InputError):
        build_context(CPoly.from_roots([0, 0, 1, 2, 3, 4]))
