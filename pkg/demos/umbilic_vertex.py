"""The H3 parabolic example with b(u) = 1 - u^2.

The curvature of the central curve touches 1 only at u = 0, so the surface
has exactly one line of umbilic points.  We compare the computed k1 with
the family's closed form and list where the umbilic flag is raised.
"""

import numpy as np

from tubeforms import Grid, analyze, build_scene, load_scene
from tubeforms.examples import ExampleFamily, closed_form_kappa1

sp = build_scene(load_scene("ex-h3-parabolic-vertex"))
grid = Grid.of(sp, 65, 32)
U, V = grid.points()
data = analyze(sp, U, V)

fam = ExampleFamily("H3Parabolic", 1.0, a=0.0, b="1 - u**2")
exact = closed_form_kappa1(fam, U, V)
ok = data["valid"] & np.isfinite(exact)
print(f"max |k1 - closed form| over {ok.sum()} points: {np.max(np.abs(data['k1'][ok] - exact[ok])):.1e}")
print(f"max |k2 - 1|: {np.max(np.abs(data['k2'][data['valid']] - 1)):.1e}")

rows = np.unique(np.round(U[data["umbilic"]], 12))
print(f"umbilic points: {int(data['umbilic'].sum())}, all on u in {rows.tolist()}")

# k1 along the line v = 0 rises to 1 exactly at the vertex
j = np.argmin(np.abs(V[0]))
for i in range(0, 65, 8):
    print(f"  u = {U[i, j]:+.3f}  k1 = {data['k1'][i, j]:.6f}")
