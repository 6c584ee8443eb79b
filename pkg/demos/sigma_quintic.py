"""sigma and zeta on a curve in Weierstrass form y^2 = 4x^5 + ...

sigma at u comes from the duplication formula at u/2.

Run: python3 demos/sigma_quintic.py
"""
import numpy as np

from g2kleinian import build_context, sigma_zeta
from g2kleinian.cpoly import CPoly

f = CPoly([0.3, -1.0, 0.2j, 0.7, 0.5, 4.0])
ctx = build_context(f)

for u in (np.array([0.1, 0.05j]), np.array([0.4 - 0.2j, 0.3])):
    s, z1, z2 = sigma_zeta(ctx, u / 2)
    print(f"u = {u}:  sigma(u) = {s:.8f}")
    print(f"   zeta(u/2) = ({z1:.6f}, {z2:.6f})")

# near the origin sigma(u) ~ u1 for this normalization
u = np.array([1e-4, 0.0])
print("\nsigma(u)/u1 at u1 = 1e-4:", sigma_zeta(ctx, u / 2)[0] / u[0])
