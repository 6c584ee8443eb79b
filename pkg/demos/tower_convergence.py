"""Watch a Richelot tower collapse onto a curve with three double roots.

Run: python3 demos/tower_convergence.py
"""
import numpy as np

from g2kleinian import CPoly, find_disks, iterate_tower

f = CPoly([0.5, -1.0, 0.3j, 0.0, 1.0, -0.2, 1.0])
D = find_disks(f)
print("disks:")
for d in D.disks:
    print(f"  {d.kind:8s} center {d.center:.4f}  radius {d.radius:.4f}")

T = iterate_tower(f, D)
print(f"\nconverged in {T.depth} steps; in-disk root gaps per step:")
for n, gaps in enumerate(T.deltas):
    print(f"  n={n}  " + "  ".join(f"{g:9.2e}" for g in gaps))

# each gap is roughly the square of the previous one
print("\nlimit curve: c =", np.round(T.limit.c, 6))
print("double roots:", np.round(T.limit.t, 6))
