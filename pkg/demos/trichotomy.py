"""Sweep the radius of a tube in H3 across r = 1.

Below 1 the constant-curvature lines are circles and the generating curve
lives in H3.  At r = 1 they are horocycles and the generating curve lies on
the null cone.  Above 1 they are hyperbolas and the curve moves to de Sitter
space.  Each patch is built from a small scene dict and verified.
"""

from tubeforms import build_scene, load_scene, verify_patch
from tubeforms.scene import classification_line

CURVE = {
    "expr": ["cosh(s)*cosh(t*u)", "cosh(s)*sinh(t*u)", "sinh(s)*cos(u)", "sinh(s)*sin(u)"],
    "params": {"s": 0.5, "t": 0.5},
}

scenes = [
    {"name": "r=1/2", "space": "H3", "kind": "elliptic", "r": "1/2", "eps_p": 1, "eps_pp": 1,
     "curve": CURVE, "domain": {"u": [0, 3]}},
    {"name": "r=1", "space": "H3", "kind": "parabolic", "eps_pp": 1,
     "curve": CURVE, "domain": {"u": [-1.5, 1.5], "v": [-1, 1]}},
    # for r > 1 the generator is a spacelike curve in dS3; a great circle will do
    {"name": "r=2", "space": "H3", "kind": "hyperbolic", "r": 2, "eps_p": 1, "eps_pp": 1,
     "curve": {"expr": ["0", "0", "cos(u)", "sin(u)"]}, "domain": {"u": [0, 3]}},
]

for data in scenes:
    scene = load_scene(data)
    sp = build_scene(scene)
    rep = verify_patch(sp)
    k2 = rep["curvature"]["checks"]["constant_curvature"]["value"]
    print(f"{scene.name:6s} {classification_line(sp)}")
    print(f"       max|k2 - 1/r| = {k2:.1e}, generating curve in {rep['reconstruction']['home']}, "
          f"{'PASS' if rep['passed'] else 'FAIL'}")
