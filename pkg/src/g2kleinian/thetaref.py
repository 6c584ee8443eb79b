"""Reference evaluation of the canonical basis by second-order theta series.

For ``a`` in ``{0,1}^2`` the series

    phi_a(u) = sum_{m = a mod 2} exp(i pi/2 m^T Omega m + 2 i pi m^T u)

spans the functions with ``phi(u + n + Omega k) =
exp(-2 i pi k^T Omega k - 4 i pi k^T u) phi(u)``.  Each ``phi_a`` is even
(``m -> -m`` preserves the class), so the pushed-forward functions are fixed
by their value and Hessian at the origin.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ThetaError
from .periods import PeriodData

__all__ = ["REPS", "r2_basis_eval", "theta_data", "oracle_S", "SVec", "truncation_radius",
           "TaylorTargets"]

REPS = ((0, 0), (1, 0), (0, 1), (1, 1))
TAIL = 1e-17
R_MAX = 80

# canonical order-2 data (value, q11, q12, q22) of S, S22, S12, S11, where
# q is the symmetric matrix of the quadratic part z^T q z
TaylorTargets = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0, 0.0],
])


@dataclass(frozen=True, eq=False)
class SVec:
    """``(S, S22, S12, S11)`` at a point with both first partials."""

    s: np.ndarray
    ds1: np.ndarray
    ds2: np.ndarray

    @property
    def grad(self) -> np.ndarray:
        return np.stack([self.ds1, self.ds2])

    def to_json(self, derivatives: bool = True) -> dict:
        c = lambda v: [[float(x.real), float(x.imag)] for x in v]
        out = {"S": c(self.s)}
        if derivatives:
            out["dS_dz1"] = c(self.ds1)
            out["dS_dz2"] = c(self.ds2)
        return out


def _min_norm(Y, a):
    """Smallest ``m^T Y m`` over ``m = a mod 2`` (small search; Y positive definite)."""
    best = np.inf
    for k1 in range(-2, 3):
        for k2 in range(-2, 3):
            m = np.array(a) + 2 * np.array([k1, k2])
            if not m.any():
                return 0.0
            best = min(best, m @ Y @ m)
    return best


def truncation_radius(omega, im_u_norm: float = 0.0, tail: float = TAIL) -> int:
    """Half-width ``R`` of the index box ``|k|_inf <= R`` (``m = a + 2k``) for the tail bound."""
    Y = 0.5 * (omega.imag + omega.imag.T)
    lam = np.linalg.eigvalsh(Y)[0]
    if lam <= 0:
        raise ThetaError("imaginary part of omega is not positive definite")
    # need (pi/2) lam |m|^2 - 2 pi |m| |Im u| > log(1/tail) for |m| >= 2R - 1
    a = 0.5 * np.pi * lam
    b = 2 * np.pi * im_u_norm
    c = np.log(1.0 / tail) + 10.0
    mmin = (b + np.sqrt(b * b + 4 * a * c)) / (2 * a)
    R = int(np.ceil((mmin + 1) / 2)) + 1
    if R > R_MAX:
        raise ThetaError("theta series truncation too large", radius=R)
    return R


def _lattice(a, R):
    k = np.arange(-R, R + 1)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    return np.stack([a[0] + 2 * K1.ravel(), a[1] + 2 * K2.ravel()], axis=1).astype(float)


def r2_basis_eval(rep, omega, u, R: int | None = None, derivs: int = 0):
    """``phi_rep(u)``; with ``derivs=1`` also the gradient, ``derivs=2`` the Hessian.

    The series is scaled by ``exp(-i pi/2 k^T Omega k)`` for the class minimum
    ``k``; this only rescales the basis element.
    """
    omega = np.asarray(omega, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if R is None:
        R = truncation_radius(omega, float(np.linalg.norm(u.imag)))
    m = _lattice(rep, R)
    quad = np.einsum("ni,ij,nj->n", m, omega, m)
    Y = 0.5 * (omega.imag + omega.imag.T)
    shift = -0.5 * np.pi * _min_norm(Y, rep)
    expo = 0.5j * np.pi * quad + 2j * np.pi * (m @ u) - shift
    terms = np.exp(expo)
    val = terms.sum()
    if derivs == 0:
        return val
    grad = 2j * np.pi * (m * terms[:, None]).sum(axis=0)
    if derivs == 1:
        return val, grad
    hess = (2j * np.pi) ** 2 * np.einsum("n,ni,nj->ij", terms, m, m)
    return val, grad, hess


def theta_data(periods: PeriodData) -> dict:
    """Coefficient matrix mapping the pushed-forward theta basis onto the canonical one."""
    Ainv = periods.Ainv
    N = periods.N
    omega = 0.5 * (periods.omega + periods.omega.T)
    R = truncation_radius(omega)
    rows = []
    for a in REPS:
        v, _, H = r2_basis_eval(a, omega, np.zeros(2), R, derivs=2)
        Q = v * N + 0.5 * Ainv.T @ H @ Ainv
        rows.append([v, Q[0, 0], Q[0, 1], Q[1, 1]])
    Tm = np.array(rows).T  # columns: data of each psi_a
    # rescale columns for conditioning before solving
    col = np.abs(Tm).max(axis=0)
    if np.any(col == 0):
        raise ThetaError("vanishing theta basis element")
    M = Tm / col
    if np.linalg.cond(M) > 1e13:
        raise ThetaError("singular Taylor matrix; check omega and A", cond=np.linalg.cond(M))
    C = np.linalg.solve(M, TaylorTargets.T).T / col[None, :]
    return {"C": C, "Ainv": Ainv, "N": N, "omega": omega}


def oracle_S(periods: PeriodData, z, data: dict | None = None) -> SVec:
    """Canonical ``(S, S22, S12, S11)`` and partials at ``z`` from theta series."""
    if data is None:
        data = theta_data(periods)
    z = np.asarray(z, dtype=complex)
    Ainv, N, om, C = data["Ainv"], data["N"], data["omega"], data["C"]
    u = Ainv @ z
    R = truncation_radius(om, float(np.linalg.norm(u.imag)))
    e = np.exp(z @ N @ z)
    vals = np.empty(4, dtype=complex)
    grads = np.empty((4, 2), dtype=complex)
    for i, a in enumerate(REPS):
        v, g = r2_basis_eval(a, om, u, R, derivs=1)
        vals[i] = e * v
        grads[i] = e * (2 * (N @ z) * v + Ainv.T @ g)
    s = C @ vals
    ds = C @ grads
    return SVec(s, ds[:, 0], ds[:, 1])
