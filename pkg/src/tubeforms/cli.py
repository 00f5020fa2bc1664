"""``tubeforms`` command line: build, verify, classify, reconstruct and export scenes.

Exit status: 0 pass, 1 verification failure, 2 invalid scene, 3 numerical breakdown.
"""

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import errors
from .export import CHARTS, mesh_from_analysis, write_csv, write_curve_csv, write_obj
from .geometry import Grid, analyze, reconstruct_generating_curve
from .scene import Scene, build_scene, classification, classification_line, load_scene
from .verify import failed_checks, verify_patch

EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_BREAKDOWN = 0, 1, 2, 3
DESCRIPTOR_FORMAT = "tubeforms-descriptor"

INVALID = (
    errors.SceneError,
    errors.NotATableRow,
    errors.InadmissibleSpaceForm,
    errors.WrongClassification,
    errors.FrameSignatureMismatch,
    errors.FrameSignatureUnavailable,
    errors.InvalidParabolicData,
    errors.ImmersionViolation,
    errors.OutOfDomain,
    errors.UnsupportedChart,
    errors.NotInLieAlgebra,
)
BREAKDOWN = (
    errors.RegularityLoss,
    errors.DegenerateTangentPlane,
    errors.NullNormal,
    errors.VanishingPrincipalCurvature,
    FloatingPointError,
    np.linalg.LinAlgError,
)


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj):
    return json.dumps(obj, indent=2, default=_json_default, allow_nan=True)


def parse_grid(text):
    try:
        nu, nv = (int(n) for n in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 64x64, got {text!r}") from None
    if nu < 2 or nv < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 nodes per direction")
    return nu, nv


def load_any(path):
    """A Scene from a scene file, a packaged scene name or a descriptor written by ``build``."""
    p = Path(path)
    if p.suffix == ".json" and p.is_file():
        try:
            desc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise errors.SceneError(f"{p}: not a valid descriptor ({exc})") from None
        if desc.get("format") != DESCRIPTOR_FORMAT:
            raise errors.SceneError(f"{p}: not a tubeforms descriptor")
        scene = load_scene(desc["scene"])
        base = desc.get("scene_dir")
        scene.path = Path(base) / f"{scene.name}.yaml" if base else None
        return scene
    return load_scene(path)


def descriptor(scene: Scene, sp):
    return {
        "format": DESCRIPTOR_FORMAT,
        "version": 1,
        "name": scene.name,
        "scene_dir": str(scene.path.parent.resolve()) if scene.path else None,
        "scene": scene.data,
        "classification": classification(sp),
    }


def _setup(args):
    scene = load_any(args.scene)
    if getattr(args, "grid", None):
        scene.grid = args.grid
    if getattr(args, "tol", None) is not None:
        scene.tol = args.tol
    sp = build_scene(scene)
    return scene, sp, Grid.of(sp, *scene.grid)


def _write(text, out):
    Path(out).write_text(text)
    print(f"wrote {out}")


def cmd_build(args):
    scene, sp, _ = _setup(args)
    print(classification_line(sp))
    _write(dumps(descriptor(scene, sp)) + "\n", args.out or f"{scene.name}.json")
    return EXIT_PASS


def cmd_classify(args):
    scene, sp, _ = _setup(args)
    print(classification_line(sp))
    if args.out:
        _write(dumps(classification(sp)) + "\n", args.out)
    return EXIT_PASS


def _umbilic_summary(report):
    locus = report.get("curvature", {}).get("umbilic_locus") or []
    if not locus:
        return "umbilic locus: empty"
    us = sorted({round(u, 9) for u, _ in locus})
    shown = ", ".join(f"{u:.6g}" for u in us[:8]) + (", ..." if len(us) > 8 else "")
    return f"umbilic locus: {len(locus)} nodes, u in {{{shown}}}"


def cmd_verify(args):
    scene, sp, grid = _setup(args)
    report = verify_patch(sp, grid, scene.tol)
    print(f"{scene.name}: {classification_line(sp)}")
    curv = report.get("curvature", {})
    if "checks" in curv:
        c = curv["checks"]["constant_curvature"]
        print(f"max|k2 - 1/r| = {c['value']:.3e} (tol {c['tol']:.0e})")
        print(_umbilic_summary(report))
    shape = report["shape_operator"]
    print(f"immersed {shape['immersed']}/{shape['points']}, non-diagonalizable {shape['non_diagonalizable']}, umbilic {shape['umbilic']}")
    if "reconstruction" in report:
        print(f"generating curve home: {report['reconstruction']['home']}")
    bad = failed_checks(report)
    if report["passed"]:
        print("PASS")
    else:
        print("FAIL" + (": " + ", ".join(bad) if bad else f": {curv.get('skipped', 'see report')}"))
    if args.out:
        _write(dumps(report) + "\n", args.out)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def cmd_reconstruct(args):
    scene, sp, grid = _setup(args)
    if sp.declared_r is None:
        raise errors.SceneError("reconstruction needs a declared radius")
    rec = reconstruct_generating_curve(sp, grid)
    print(f"home: {rec.home_label}; v-spread {rec.spread:.3e}, norm residual {rec.norm_residual:.3e}, quadric residual {rec.home_residual:.3e}")
    _write(write_curve_csv(rec.u, rec.curve, rec.home_label), args.out or f"{scene.name}.curve.csv")
    return EXIT_PASS


def cmd_export(args):
    scene, sp, grid = _setup(args)
    U, V = grid.points()
    mesh = mesh_from_analysis(sp, grid, analyze(sp, U, V))
    fmt = args.format
    if fmt == "obj":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            text = write_obj(mesh, sp.space, args.chart)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    else:
        text = write_csv(mesh)
    _write(text, args.out or f"{scene.name}.{fmt}")
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(prog="tubeforms", description="Tubes with one constant principal curvature in 3D space forms.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, grid=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scene", required=True, help="scene file, packaged scene name, or descriptor JSON")
        p.add_argument("--out", help="output path")
        if grid:
            p.add_argument("--grid", type=parse_grid, help="NUxNV, e.g. 64x64")
        p.set_defaults(func=fn)
        return p

    add("build", cmd_build, "build a surface and write its descriptor", grid=False)
    add("classify", cmd_classify, "print kind, critical constant and distance", grid=False)
    v = add("verify", cmd_verify, "run every check; exit 0 iff all pass")
    v.add_argument("--tol", type=float, help="tolerance for the curvature and foliation checks")
    add("reconstruct", cmd_reconstruct, "write the generating curve samples")
    e = add("export", cmd_export, "write an OBJ mesh or a CSV table")
    e.add_argument("--format", choices=("obj", "csv"), default="obj")
    e.add_argument("--chart", choices=CHARTS, help="3D chart for OBJ output (default depends on the space)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INVALID as exc:
        print(f"invalid scene: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BREAKDOWN as exc:
        print(f"numerical breakdown: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN


if __name__ == "__main__":
    sys.exit(main())
