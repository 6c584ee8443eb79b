"""Period matrices from the tower, then the same functions two ways.

The Riemann matrix comes out quasi-reduced, and the tower evaluation of
(S, S22, S12, S11) matches the theta-series reference.

Run: python3 demos/periods_and_theta.py
"""
import numpy as np

from g2kleinian import build_context, eval_S, is_quasi_reduced, oracle_S, wp
from g2kleinian.cpoly import CPoly

f = CPoly([-1, 0, 0, 0, 0, 0, 1])  # y^2 = x^6 - 1
ctx = build_context(f)
P = ctx.periods
np.set_printoptions(precision=6, suppress=True)
print("Omega =\n", P.omega)
print("quasi-reduced:", is_quasi_reduced(P.omega))
print("transfer fit residuals:", [f"{t.residual:.1e}" for t in ctx.transfers])

z = np.array([0.21 - 0.1j, 0.35 + 0.2j])
a, b = eval_S(ctx, z).s, oracle_S(P, z).s
print("\ntower :", a)
print("theta :", b)
print("relative gap:", np.linalg.norm(a - b) / np.linalg.norm(b))
print("wp22, wp12, wp11:", wp(ctx, z))

# automorphy along the first a-period
w, e = P.W[:, 0], P.E[:, 0]
shifted = eval_S(ctx, z + w).s
print("quasi-periodicity gap:",
      np.linalg.norm(shifted - np.exp(2 * e @ (z + w / 2)) * a) / np.linalg.norm(shifted))
