"""Scene files: a YAML description of one surface and how to verify it.

A scene names the ambient space form, the kind of surface and its data::

    name: h3-equidistant
    space: H3
    kind: hyperbolic        # elliptic | hyperbolic | parabolic | example | external
    r: 2
    eps_p: 1
    eps_pp: 1
    curve: {expr: ["0", "0", "cos(u)", "sin(u)"]}
    frame: {method: transport}
    domain: {u: [0, 6]}
    grid: [64, 64]
    tol: 1.0e-8

Sign triples are validated against the admissibility table before any
numerical work.  See ``scenes/README.md`` for every key.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import hyperdual as hd
from .ambient import SpaceForm
from .curves import ExprCurve, FramedCurve, ParabolicData, SplineCurve, parabolic_from_transport, transport_normal_frame
from .errors import SceneError
from .examples import ExampleFamily, build_example, make_profile
from .expr import compile_expr
from .tubes import SurfacePatch, TubeKind, elliptic_tube, hyperbolic_tube, parabolic_tube, table_row

KINDS = ("elliptic", "hyperbolic", "parabolic", "example", "external")
SCENE_SUFFIXES = (".yaml", ".yml")


@dataclass
class Scene:
    name: str
    data: dict
    path: Path = None
    grid: tuple = (64, 64)
    tol: float = 1e-8
    meta: dict = field(default_factory=dict)


def packaged_scenes():
    """Names of the scenes shipped with the package."""
    root = resources.files("tubeforms") / "scenes"
    return sorted(p.name.rsplit(".", 1)[0] for p in root.iterdir() if p.name.endswith(SCENE_SUFFIXES))


def scene_path(name_or_path):
    """Resolve a file path, or the name of a packaged scene."""
    p = Path(name_or_path)
    if p.exists():
        return p
    root = resources.files("tubeforms") / "scenes"
    for suffix in SCENE_SUFFIXES:
        cand = root / f"{name_or_path}{suffix}"
        if cand.is_file():
            return Path(str(cand))
    raise SceneError(f"no scene file or packaged scene named {name_or_path!r}")


def _radius(value):
    """Keep r exact when it is written as an integer or a fraction string."""
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            raise SceneError(f"cannot read r = {value!r}") from None
    return float(value)


def load_scene(source):
    """Parse and validate a scene from a path, a packaged name or a dict."""
    if isinstance(source, dict):
        data, path = dict(source), None
    else:
        path = scene_path(source)
        try:
            data = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise SceneError(f"{path}: not valid YAML ({exc})") from None
        if not isinstance(data, dict):
            raise SceneError(f"{path}: a scene must be a mapping")
    validate_scene(data)
    grid = data.get("grid", [64, 64])
    if len(grid) != 2 or any(int(n) < 2 for n in grid):
        raise SceneError("grid must be [nu, nv] with nu, nv >= 2")
    name = data.get("name") or (path.stem if path else "scene")
    return Scene(name, data, path, (int(grid[0]), int(grid[1])), float(data.get("tol", 1e-8)))


def _space(data):
    try:
        return SpaceForm.named(str(data["space"]))
    except KeyError:
        raise SceneError("scene needs a 'space'") from None


def validate_scene(data):
    """Reject inconsistent scenes, citing the table when the sign triple is not admissible."""
    kind = data.get("kind")
    if kind not in KINDS:
        raise SceneError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind in ("example",):
        if "family" not in data:
            raise SceneError("example scenes need a 'family'")
        return
    space = _space(data)
    if kind == "external":
        if "patch" not in data:
            raise SceneError("external scenes need a 'patch'")
        return
    if kind == "parabolic":
        r = _radius(data.get("r", 1))
        eps_p = int(data.get("eps_p", -space.eps))
    else:
        if "r" not in data:
            raise SceneError("tube scenes need r")
        r = _radius(data["r"])
        eps_p = int(data.get("eps_p", 0))
    eps_pp = int(data.get("eps_pp", 0))
    if not r > 0:
        raise SceneError("r must be positive")
    if eps_p not in (-1, 1) or eps_pp not in (-1, 1):
        raise SceneError("eps_p and eps_pp must be +1 or -1")
    row = table_row(space, eps_p, eps_pp, r)
    if row.kind.value != kind:
        raise SceneError(f"table row {row.index} ({space.name}, signs {row.signs}, {row.regime}) is a {row.kind} tube, not {kind}")
    want = data.get("row")
    if want is not None and int(want) != row.index:
        raise SceneError(f"scene declares table row {want} but its data match row {row.index}")
    if "curve" not in data:
        raise SceneError("tube scenes need a 'curve'")


def _curve(spec, space, base):
    if "expr" in spec:
        return ExprCurve(spec["expr"], spec.get("params"), space)
    if "table" in spec:
        rows = np.asarray(spec["table"], dtype=float)
        return SplineCurve(rows[:, 0], rows[:, 1:5], space)
    if "samples" in spec:
        p = Path(spec["samples"])
        if not p.is_absolute() and base is not None:
            p = base / p
        return SplineCurve.from_text(p.read_text(), space)
    raise SceneError("curve needs 'expr', 'table' or 'samples'")


def _vector_fn(exprs, params):
    if len(exprs) != 4:
        raise SceneError("vector fields need four expressions")
    fns = [compile_expr(e, params) for e in exprs]
    return lambda u: hd.stack([fn(u) for fn in fns])


def _interval(data, key, default=None):
    dom = data.get("domain", {})
    val = dom.get(key, default)
    if val is None:
        return None
    if len(val) != 2 or not float(val[0]) < float(val[1]):
        raise SceneError(f"domain {key} must be an increasing pair")
    return (float(val[0]), float(val[1]))


def _with_v_domain(sp, vdom):
    if vdom is None:
        return sp
    return SurfacePatch(sp.space, sp.evaluate, sp.u_domain, vdom, sp.declared_r, sp.declared_eps_p, sp.provenance, False, sp.name, sp.meta)


def build_scene(scene):
    """Construct the SurfacePatch described by a loaded scene."""
    data = scene.data
    base = scene.path.parent if scene.path else None
    kind = data["kind"]
    vdom = _interval(data, "v")
    if kind == "example":
        prof = data.get("profile")
        profile = make_profile(**prof) if prof else None
        fam = ExampleFamily(data["family"], float(data.get("r", 1.0)), profile, data.get("a", 0.0), data.get("b", 0.0), data.get("convention", "rows"))
        sp = build_example(fam, _interval(data, "u", (-2.0, 2.0)), vdom, data.get("steps"))
        return _named(sp, scene)
    space = _space(data)
    if kind == "external":
        spec = data["patch"]
        fns = [compile_expr(e, spec.get("params"), ("u", "v")) for e in spec["expr"]]

        def ev(u, v):
            return hd.stack([f(u, v) for f in fns])

        r = data.get("r")
        sp = SurfacePatch(space, ev, _interval(data, "u", (-1.0, 1.0)), vdom or (-1.0, 1.0), None if r is None else float(r), data.get("eps_p"), "external", False, scene.name)
        return sp
    r = _radius(data.get("r", 1))
    eps = space.eps
    eps_pp = int(data["eps_pp"])
    frame = data.get("frame", {"method": "transport"})
    udom = _interval(data, "u", (0.0, 1.0))
    steps = frame.get("steps")
    seed = frame.get("seed")
    if kind == "parabolic":
        curve = _curve(data["curve"], space, base)
        if frame.get("method", "transport") == "transport":
            pd = parabolic_from_transport(curve, space, eps_pp, udom, steps, seed)
        else:
            dm = _vector_fn(frame["delta_minus"], frame.get("params"))
            e1 = _vector_fn(frame["e1"], frame.get("params"))
            pd = ParabolicData(space, eps_pp, lambda u: (curve(u), dm(u), e1(u)), udom)
        sp = parabolic_tube(pd)
        return _named(_with_v_domain(sp, vdom), scene)
    eps_p = int(data["eps_p"])
    if kind == "elliptic":
        home = SpaceForm(space.p, eps * eps_p * eps_pp)
        signature = (eps_pp, eps_pp)
    else:
        home = SpaceForm(space.p, -eps * eps_p * eps_pp)
        signature = (-eps_pp, eps_pp)
    curve = _curve(data["curve"], home, base)
    method = frame.get("method", "transport")
    if method == "transport":
        initial = frame.get("initial")
        fc = transport_normal_frame(curve, home, initial, udom, signature, steps, seed)
    elif method == "closed_form":
        e1 = _vector_fn(frame["e1"], frame.get("params"))
        e2 = _vector_fn(frame["e2"], frame.get("params"))
        fc = FramedCurve(home, curve, lambda u: (e1(u), e2(u)), signature, udom)
    else:
        raise SceneError(f"unknown frame method {method!r}")
    build = elliptic_tube if kind == "elliptic" else hyperbolic_tube
    sp = build(fc, r, eps_p, eps_pp)
    return _named(_with_v_domain(sp, vdom), scene)


def _named(sp, scene):
    return SurfacePatch(sp.space, sp.evaluate, sp.u_domain, sp.v_domain, sp.declared_r, sp.declared_eps_p, sp.provenance, sp.v_periodic, scene.name, sp.meta)


def classification(sp):
    """Kind, critical constant and distance of a tube patch, as plain values."""
    spec = sp.provenance
    if not hasattr(spec, "kind"):
        return {"kind": "external", "space": sp.space.name}
    c = spec.c
    out = {
        "kind": spec.kind.value,
        "space": sp.space.name,
        "row": spec.row.index,
        "signs": list(spec.row.signs),
        "r": spec.r,
        "c": str(c) if isinstance(c, Fraction) else float(c),
        "d": None if spec.kind is TubeKind.PARABOLIC else spec.distance,
        "d_formula": _distance_formula(spec),
        "curve_home": spec.row.curve_home,
    }
    return out


def _distance_formula(spec):
    if spec.kind is TubeKind.PARABOLIC:
        return "undefined"
    r = spec.r
    rs = f"{float(r):g}"
    ee = spec.eps * spec.eps_p
    if ee == 0:
        return rs
    if ee == 1:
        return f"arctan({rs})"
    return f"artanh({rs})" if r < 1 else f"arcoth({rs})"


def classification_line(sp):
    info = classification(sp)
    if info["kind"] == "external":
        return f"external patch in {info['space']}"
    if info["d"] is None:
        d = "d undefined"
    elif info["d_formula"] == f"{info['d']:.12g}":
        d = f"d={info['d_formula']}"
    else:
        d = f"d={info['d_formula']}={info['d']:.12g}"
    c = info["c"]
    c_text = c if isinstance(c, str) else f"{c:.12g}"
    return f"{info['kind']}, c={c_text}, {d} (table row {info['row']}, {info['space']})"
