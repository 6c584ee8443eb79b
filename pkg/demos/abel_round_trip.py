"""From a point of C^2 to a divisor on the curve and back again.

Run: python3 demos/abel_round_trip.py
"""
import numpy as np

from g2kleinian import (CurvePoint, Divisor2, abel_map, build_context, divisor_from_z,
                        lattice_distance)
from g2kleinian.cpoly import CPoly, roots

f = CPoly([0.5, -1.0, 0.3j, 0.0, 1.0, -0.2, 1.0])
ctx = build_context(f)

z = np.array([0.4 + 0.3j, -0.2 + 0.5j])
D = divisor_from_z(ctx, z)
print("divisor of z:")
for P in (D.p, D.q):
    print(f"  x = {P.x:.6f}   y = {P.y:.6f}")

res = abel_map(ctx, D)
print("\nAbel map:", np.round(res.z, 10))
print("distance to z modulo periods:", lattice_distance(ctx.periods, res.z - z))
print("certificates:", f"kummer {res.kummer_residual:.1e}, sign {res.derivative_residual:.1e}")

# two Weierstrass points give a half-period
e = roots(f)
half = abel_map(ctx, Divisor2(CurvePoint.finite(e[0], 0), CurvePoint.finite(e[1], 0)))
print("\nWeierstrass pair -> 2-torsion:", half.two_torsion,
      " |2z mod lattice| =", f"{lattice_distance(ctx.periods, 2 * half.z):.1e}")
