"""Kleinian functions of weight two through the Richelot tower.

The limit curve ``c (x - t1)^2 (x - t2)^2 (x - t3)^2`` has elementary weight-two
functions, ``exp(z^T M z)`` times combinations of ``1`` and three ``sin^2``
terms.  Going back up the tower, each step writes the functions of ``f`` as
quadratic forms in those of ``f_hat``; the 4x4 forms are fitted per step against
the theta-series oracle and certified by their residuals.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import PolarSetError, TransferFitError, KleinianError, InputError
from .periods import PeriodData, degenerate_E, degenerate_W
from .richelot import DegenerateCurve, RichelotStep, RichelotTower
from .thetaref import SVec, TaylorTargets, oracle_S, theta_data

__all__ = [
    "LimitData",
    "limit_data",
    "limit_S",
    "limit_S_inf",
    "limit_S_generic",
    "TransferMatrices",
    "fit_transfer_matrices",
    "transfer_apply",
    "EvalContext",
    "build_context",
    "eval_S",
    "wp",
    "sigma_zeta",
    "sigma_double",
    "FIT_TOL",
    "POLE_TOL",
]

FIT_TOL = 1e-9
POLE_TOL = 1e-10
N_FIT = 40
N_HOLD = 50
K_MAT = np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0], [1.0, -1.0, 0.0]])


# --- limit functions ---------------------------------------------------------------

def m_matrix(c, t1, t2, t3) -> np.ndarray:
    """The quadratic form of the exponential factor of the limit functions."""
    p = t1 * t2 * t3
    return 0.5 * c * np.array([[p * (t1 + t2 + t3), -p], [-p, t1 * t2 + t1 * t3 + t2 * t3]])


@dataclass(frozen=True, eq=False)
class LimitData:
    """``M``, the rows ``l_j`` and per-component coefficients ``(alpha, beta_1..3)``."""

    M: np.ndarray
    L: np.ndarray
    coef: np.ndarray  # 4 x 4: rows S, S22, S12, S11; columns alpha, beta1..3


def limit_data(g: DegenerateCurve) -> LimitData:
    """Build the limit functions from the degenerate periods by Taylor matching."""
    W = degenerate_W(g)
    E = degenerate_E(g)
    Winv = np.linalg.inv(W[:, :2])
    M = E[:, :2] @ Winv
    M = 0.5 * (M + M.T)
    L = K_MAT[:, :2] @ Winv
    # quadratic part of alpha + sum beta_j sin^2(pi l_j z): alpha M + pi^2 sum beta_j l_j l_j^T
    G = np.array([[l[0] * l[0], l[0] * l[1], l[1] * l[1]] for l in L]).T * np.pi ** 2
    coef = np.zeros((4, 4), dtype=complex)
    for i, tgt in enumerate(TaylorTargets):
        alpha = tgt[0]
        rhs = np.array([tgt[1], tgt[2], tgt[3]]) - alpha * np.array([M[0, 0], M[0, 1], M[1, 1]])
        coef[i, 0] = alpha
        coef[i, 1:] = np.linalg.solve(G, rhs)
    return LimitData(M, L, coef)


def limit_S_generic(data: LimitData, z) -> SVec:
    z = np.asarray(z, dtype=complex)
    e = np.exp(z @ data.M @ z)
    arg = np.pi * (data.L @ z)
    sn2 = np.sin(arg) ** 2
    basis = np.concatenate([[1.0], sn2])
    dbasis = np.zeros((4, 2), dtype=complex)
    dbasis[1:] = (np.pi * np.sin(2 * arg))[:, None] * data.L
    inner = data.coef @ basis
    dinner = data.coef @ dbasis
    s = e * inner
    mz = 2 * (data.M @ z)
    ds = e * (inner[:, None] * mz[None, :] + dinner)
    return SVec(s, ds[:, 0], ds[:, 1])


def limit_S(g: DegenerateCurve, z) -> SVec:
    """Closed-form limit functions (finite double roots) with first partials."""
    if g.inf_index is not None:
        raise InputError("limit_S needs finite double roots; use limit_S_inf")
    c = g.c
    t1, t2, t3 = g.t
    if t1 == t2 or t1 == t3 or t2 == t3:
        raise InputError("coincident double roots")
    z = np.asarray(z, dtype=complex)
    t = (t1, t2, t3)
    M = m_matrix(c, *t)
    e = np.exp(z @ M @ z)
    de = 2 * (M @ z)
    sc = np.sqrt(complex(c))
    V2 = ((t1 - t2) * (t1 - t3) * (t2 - t3)) ** 2
    pre = np.array([-4 / (c * V2), -4 / (c * V2), 4 / (c * V2), 2 / V2])
    sym = t1 * t2 * t3 * (t1 + t2 + t3)
    val = np.zeros(4, dtype=complex)
    grad = np.zeros((4, 2), dtype=complex)
    val[3] = V2 / 2
    for j in range(3):
        k, l = [i for i in range(3) if i != j]
        tj, tk, tl = t[j], t[k], t[l]
        w = (tj - tk) * (tj - tl)
        kap = 0.5j * sc * (tk - tl)
        arg = kap * (z[1] - tj * z[0])
        s2 = np.sin(arg) ** 2
        ds2 = np.sin(2 * arg) * kap * np.array([-tj, 1.0])
        weights = np.array([w, w * (tk + tl), w * tk * tl, w * (sym + (tk * tl) ** 2)])
        val += weights * s2
        grad += weights[:, None] * ds2[None, :]
    s = pre * e * val
    ds = pre[:, None] * e * (val[:, None] * de[None, :] + grad)
    return SVec(s, ds[:, 0], ds[:, 1])


def limit_S_inf(c, t1, t2, z) -> SVec:
    """Limit functions for ``c (x - t1)^2 (x - t2)^2`` (third double root at infinity)."""
    if t1 == t2:
        raise InputError("coincident double roots")
    g = DegenerateCurve(c, (t1, t2, complex(np.inf, 0)))
    return limit_S_generic(limit_data(g), z)


# --- transfer relation -------------------------------------------------------------

_IU = np.triu_indices(4)


@dataclass(frozen=True, eq=False)
class TransferMatrices:
    """Symmetric 4x4 forms ``X_S, X_22, X_12, X_11`` of one tower step.

    ``S_f(z) = -exp(z^T H z) / (32 Delta^3) * (s^T X_k s)_k`` with ``s = S_fhat(z)``.
    """

    X: np.ndarray  # shape (4, 4, 4)
    residual: float
    holdout: float

    @property
    def A0(self):
        return self.X[0]

    @property
    def A22(self):
        return self.X[1]

    @property
    def A12(self):
        return self.X[2]

    @property
    def A11(self):
        return self.X[3]


def _monomials(s: np.ndarray) -> np.ndarray:
    """Rows ``s_i s_j`` (i <= j) for each sample; shape (n, 10)."""
    return s[:, _IU[0]] * s[:, _IU[1]]


def _sym_from_upper(x: np.ndarray) -> np.ndarray:
    # monomial s_i s_j with i < j carries X_ij + X_ji = 2 X_ij
    Xs = np.zeros((4, 4), dtype=complex)
    for (i, j), v in zip(zip(*_IU), x):
        if i == j:
            Xs[i, i] = v
        else:
            Xs[i, j] = Xs[j, i] = 0.5 * v
    return Xs


def sample_box(W: np.ndarray, n: int, rng) -> np.ndarray:
    """Points with ``|z_i| <= 0.5 * min column norm of W``."""
    rad = 0.5 * min(np.linalg.norm(W[:, j]) for j in range(W.shape[1]))
    r = rad * np.sqrt(rng.uniform(size=(n, 2)))
    ph = rng.uniform(0, 2 * np.pi, size=(n, 2))
    return r * np.exp(1j * ph)


def _pref(step: RichelotStep, z: np.ndarray) -> np.ndarray:
    H = step.h_matrix
    return -np.exp(np.einsum("ni,ij,nj->n", z, H, z)) / (32 * step.delta ** 3)


def transfer_apply(step: RichelotStep, X: np.ndarray, s_hat: np.ndarray, z: np.ndarray):
    """Apply the fitted relation to rows ``s_hat`` (shape (n, 4)) at points ``z``."""
    q = np.einsum("ni,kij,nj->nk", s_hat, X, s_hat)
    return _pref(step, z)[:, None] * q


def _form_scale(X, s_hat):
    a = np.abs(s_hat)
    return np.einsum("ni,kij,nj->nk", a, np.abs(X), a)


def fit_transfer_matrices(step: RichelotStep, periods: PeriodData, periods_hat: PeriodData,
                          seed: int = 0, n_fit: int = N_FIT, n_hold: int = N_HOLD,
                          fit_tol: float = FIT_TOL, holdout_tol: float = 1e-8,
                          theta_f=None, theta_hat=None) -> TransferMatrices:
    """Least-squares fit of the four quadratic forms against the theta oracle.

    Residuals are measured per point against the size of the terms of the form,
    so points where a component nearly vanishes are judged fairly.
    """
    rng = np.random.default_rng(seed)
    tf = theta_f or theta_data(periods)
    th = theta_hat or theta_data(periods_hat)

    def sample(n):
        pts, sf, sh = [], [], []
        while len(pts) < n:
            z = sample_box(periods.W, 2 * n, rng)
            for zi in z:
                a = oracle_S(periods_hat, zi, th).s
                if abs(a[0]) < 1e-8 * np.abs(a).max():
                    continue
                pts.append(zi)
                sh.append(a)
                sf.append(oracle_S(periods, zi, tf).s)
                if len(pts) == n:
                    break
        return np.array(pts), np.array(sf), np.array(sh)

    z, sf, sh = sample(n_fit)
    pref = _pref(step, z)
    Phi = _monomials(sh)
    cs = np.abs(Phi).max(axis=0)
    X = np.zeros((4, 4, 4), dtype=complex)
    for k in range(4):
        y = sf[:, k] / pref
        x = np.linalg.lstsq(Phi / cs, y, rcond=None)[0] / cs
        X[k] = _sym_from_upper(x)
    res = np.abs(transfer_apply(step, X, sh, z) - sf) / (np.abs(pref)[:, None] * _form_scale(X, sh))
    resid = float(res.max())
    zh, sfh, shh = sample(n_hold)
    err = np.abs(transfer_apply(step, X, shh, zh) - sfh).max(axis=1) / np.abs(sfh).max(axis=1)
    hold = float(err.max())
    if resid > fit_tol:
        raise TransferFitError("transfer relation violated", residual=resid, tol=fit_tol)
    if hold > holdout_tol:
        raise TransferFitError("transfer relation fails on hold-out points", holdout=hold)
    return TransferMatrices(X, resid, hold)


# --- evaluation ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EvalContext:
    """Everything that does not depend on ``z``: tower, periods, limit data, fitted forms."""

    f: object
    tower: RichelotTower
    periods: PeriodData
    limit: LimitData
    transfers: List[TransferMatrices]

    @property
    def is_weierstrass(self) -> bool:
        return self.f.degree == 5 and self.f[5] == 4


def build_context(f, disks=None, tower_tol: float = 1e-13, max_iter: int = 40,
                  fit_tol: float = FIT_TOL, seed: int = 0) -> EvalContext:
    """Run the tower, the period computation and the per-step fits once."""
    from .cpoly import is_admissible
    from .disks import find_disks
    from .periods import compute_periods
    from .richelot import iterate_tower
    if not is_admissible(f):
        raise InputError("polynomial is not admissible (degree 5 or 6, simple roots)")
    D = disks if disks is not None else find_disks(f)
    tower = iterate_tower(f, D, tower_tol, max_iter)
    periods = compute_periods(tower, f)
    thetas = [theta_data(periods.at_level(n)) for n in range(tower.depth + 1)]
    transfers = []
    for n, step in enumerate(tower.steps):
        try:
            tm = fit_transfer_matrices(step, periods.at_level(n), periods.at_level(n + 1),
                                       seed=seed + n, fit_tol=fit_tol,
                                       theta_f=thetas[n], theta_hat=thetas[n + 1])
        except TransferFitError as exc:
            exc.step = n
            raise
        transfers.append(tm)
    return EvalContext(f, tower, periods, limit_data(tower.limit), transfers)


def _limit_eval(ctx: EvalContext, z) -> SVec:
    g = ctx.tower.limit
    if g.inf_index is None:
        return limit_S(g, z)
    return limit_S_generic(ctx.limit, z)


def eval_S(ctx: EvalContext, z) -> SVec:
    """``(S, S22, S12, S11)`` of ``f`` and first partials by the backward recursion."""
    z = np.asarray(z, dtype=complex)
    sv = _limit_eval(ctx, z)
    s, ds = sv.s, np.stack([sv.ds1, sv.ds2], axis=1)
    for n in range(ctx.tower.depth - 1, -1, -1):
        step = ctx.tower.steps[n]
        X = ctx.transfers[n].X
        hz = step.h_matrix @ z
        ex = z @ hz
        if ex.real > 700:
            raise KleinianError("exponential prefactor overflows; reduce |z|",
                                step=n, z_norm=float(np.linalg.norm(z)))
        pre = -np.exp(ex) / (32 * step.delta ** 3)
        Xs = X @ s                       # (4, 4): row k is X_k s
        q = Xs @ s                       # s^T X_k s
        dq = 2 * np.einsum("ki,ij->kj", Xs, ds)
        ds = pre * (2 * q[:, None] * hz[None, :] + dq)
        s = pre * q
    return SVec(s, ds[:, 0], ds[:, 1])


def _pole_check(sv: SVec, pole_tol: float):
    scale = np.abs(sv.s).max()
    if abs(sv.s[0]) <= pole_tol * scale:
        raise PolarSetError("point is too close to the polar set", S=complex(sv.s[0]))


def wp(ctx: EvalContext, z, pole_tol: float = POLE_TOL, sv: Optional[SVec] = None):
    """``(wp22, wp12, wp11)`` as ratios ``S_jk / S``."""
    sv = sv or eval_S(ctx, z)
    _pole_check(sv, pole_tol)
    return sv.s[1:] / sv.s[0]


def sigma_double(ctx: EvalContext, z, sv: Optional[SVec] = None) -> complex:
    """``sigma(2z)`` by the duplication formula (Weierstrass form only)."""
    if not ctx.is_weierstrass:
        raise InputError("sigma needs a quintic with leading coefficient 4")
    sv = sv or eval_S(ctx, z)
    S, S22, S12, S11 = sv.s
    d1 = sv.ds1
    return S12 * d1[1] - S22 * d1[2] + S11 * d1[0] - S * d1[3]


def sigma_zeta(ctx: EvalContext, z, pole_tol: float = POLE_TOL, sv: Optional[SVec] = None):
    """``(sigma(2z), zeta_1(z), zeta_2(z))`` for a curve in Weierstrass form."""
    sv = sv or eval_S(ctx, z)
    sigma2 = sigma_double(ctx, z, sv)
    _pole_check(sv, pole_tol)
    S = sv.s[0]
    return sigma2, sv.ds1[0] / (2 * S), sv.ds2[0] / (2 * S)
