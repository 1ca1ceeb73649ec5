"""A family of mutually distant steady states for one quadratic model.

Square waves taking two root values of a single quintic give steady
states whose composite fluxes are spatially constant, so they all solve
the same stationary problem while staying a fixed L2 distance apart.
The family therefore rules out uniqueness and compactness arguments at
this level of generality.
"""

import numpy as np

from crossflux.counterexample import (build_pair, quintic_roots, staircase,
                                      verify_counterexample)
from crossflux.spaces import lp_norm
from crossflux.spectral import TorusGrid

roots = quintic_roots()
print("root values")
print(f"  r1 = {roots.r1:.12f}   r2 = {roots.r2:.12f}   r3 = {roots.r3:.12f}")
print(f"  r2 - r1 = sqrt(5) -> pair distance (r2-r1)/sqrt(2) = "
      f"{(roots.r2 - roots.r1) / np.sqrt(2):.12f}")

grid = TorusGrid(1, 512)
coarse = TorusGrid(1, 16)
print("\nsquare wave sign patterns on 16 samples")
for n in (1, 2, 3):
    line = staircase(n, coarse).values
    print(f"  n={n}: " + " ".join("+" if s > 0 else "-" for s in line))

pair = build_pair(2, grid)
u, v = pair.u.values, pair.v.values
print("\nlevel-2 member")
print(f"  v takes values {sorted({float(x) for x in np.round(v, 12)})}")
print(f"  u * (1 + v^2) constant at "
      f"{float(np.max(u * (1 + v ** 2))):.12f} (always 3)")
print(f"  flux u*(1+v^2) spread: "
      f"{float(np.ptp(u * (1 + v ** 2))):.2e}")

d12 = lp_norm(build_pair(1, grid).v - build_pair(2, grid).v, 2)
print(f"  ||v_1 - v_2||_2 = {d12:.12f}")

rep = verify_counterexample(5, grid)
print("\nfull verification, levels 1..5")
for key, val in rep.measured.items():
    print(f"  {key:24s} {val:.3e}")
print(f"  all identities hold: {rep.passed}")
print("\nsame construction via the command line:")
print("  crossflux counterexample --nmax 5 --grid 512 "
      "--report staircase.json --dump-fields staircase_out")
