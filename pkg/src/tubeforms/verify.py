"""The full verification pass run by ``tubeforms verify``."""

import math

import numpy as np

from . import hyperdual as hd
from .curves import FramedCurve, ParabolicData
from .geometry import (
    Grid,
    analyze,
    constant_pc_verify,
    distance_check,
    geodesic_foliation_check,
    polar_check,
    reconstruct_generating_curve,
)
from .scene import classification
from .tubes import TubeKind, TubeSpec

RECONSTRUCTION_TOL = 1e-8
ROUNDTRIP_TOL = 1e-7
DISTANCE_TOL = 1e-8
POLAR_MIN_CURVATURE = 1e-8
# below this |k| the polar is too close to singular for a 1e-7 reciprocity check
POLAR_CONDITION = 0.05


def _check(value, tol):
    value = float(value)
    return {"value": value, "tol": tol, "passed": bool(value < tol)}


def expected_home(row):
    """(space name, causal character or None) the table lists for the generating curve."""
    if row.kind is TubeKind.PARABOLIC:
        return "null cone", None
    name, _, causal = row.curve_home.partition(",")
    return name.strip(), causal.strip() or None


def generator_samples(spec, u):
    """The generating curve the tube was built from, normalised like the reconstruction."""
    gen = spec.generator
    u = np.asarray(u, dtype=float)
    if isinstance(gen, FramedCurve):
        return np.asarray(hd.value(gen.curve(u)), dtype=float).T
    if isinstance(gen, ParabolicData):
        dp, dm, _ = gen.evaluate(u)
        dp, dm = (np.asarray(hd.value(x), dtype=float) for x in (dp, dm))
        return (-spec.eps * spec.eps_pp * dp + dm).T
    return None


def verify_patch(sp, grid=None, tol=1e-8, polar=True):
    """Run every check on ``sp``; returns a JSON-ready dict with an overall ``passed``."""
    grid = grid or Grid.of(sp)
    U, V = grid.points()
    data = analyze(sp, U, V)
    report = {"classification": classification(sp), "shape_operator": shape_operator_summary(data)}
    if sp.declared_r is None:
        # nothing to compare against; report the pointwise shape operator only
        report["curvature"] = {"skipped": "the patch declares no radius"}
        report["passed"] = False
        return report
    curv = constant_pc_verify(sp, grid, tol, data=data)
    report["curvature"] = curv.to_dict()
    report["foliation"] = geodesic_foliation_check(sp, grid, tol, data=data)
    rec = reconstruct_generating_curve(sp, grid, data=data)
    checks = {
        "v_spread": _check(rec.spread, RECONSTRUCTION_TOL),
        "norm": _check(rec.norm_residual, RECONSTRUCTION_TOL),
        "home_quadric": _check(rec.home_residual, RECONSTRUCTION_TOL),
    }
    spec = sp.provenance if isinstance(sp.provenance, TubeSpec) else None
    if spec is not None:
        name, causal = expected_home(spec.row)
        label = rec.home_label
        ok = label.split(",")[0].strip() == name and (causal is None or label.endswith(causal))
        checks["home_space"] = {"value": label, "expected": spec.row.curve_home, "passed": bool(ok)}
        gamma = generator_samples(spec, rec.u)
        if gamma is not None and len(rec.u):
            checks["roundtrip"] = _check(np.max(np.abs(gamma - rec.curve)), ROUNDTRIP_TOL)
    report["reconstruction"] = {"home": rec.home_label, "c": float(rec.c), "checks": checks}
    dist = distance_check(sp, grid, data=data)
    if dist is not None:
        report["distance"] = _check(dist, DISTANCE_TOL)
    if polar:
        report["polar"] = _polar_section(sp, grid, data)
    sections = [curv.passed, report["foliation"]["passed"], all(c["passed"] for c in checks.values())]
    if "distance" in report:
        sections.append(report["distance"]["passed"])
    if isinstance(report.get("polar"), dict) and "reciprocal" in report["polar"]:
        sections.append(all(report["polar"][k]["passed"] for k in ("reciprocal", "polar_of_polar", "polar_quadric")))
    report["passed"] = bool(all(sections))
    return report


def shape_operator_summary(data):
    """Point counts for the pointwise shape-operator classification."""
    immersed = data["immersed"]
    return {
        "points": int(immersed.size),
        "immersed": int(np.sum(immersed)),
        "non_diagonalizable": int(np.sum(immersed & ~data["diagonalizable"])),
        "umbilic": int(np.sum(data["umbilic"])),
    }


def _polar_section(sp, grid, data):
    if sp.space.eps == 0:
        return {"skipped": "flat ambient space has no polar"}
    ok = data["valid"]
    if not np.any(ok):
        return {"skipped": "no valid points"}
    kmin = float(np.min(np.abs(np.concatenate([data["k1"][ok], data["k2"][ok]]))))
    if kmin < POLAR_MIN_CURVATURE or not math.isfinite(kmin):
        return {"skipped": f"a principal curvature vanishes (min |k| = {kmin:.3g})"}
    return polar_check(sp, grid, data=data, min_curvature=POLAR_CONDITION)


def failed_checks(report):
    """Dotted names of every failing check in a verification report."""
    out = []

    def walk(node, path):
        if isinstance(node, dict):
            if node.get("passed") is False and "value" in node:
                out.append(".".join(path))
            for k, v in node.items():
                walk(v, path + [k])

    walk({k: v for k, v in report.items() if k != "passed"}, [])
    return out
