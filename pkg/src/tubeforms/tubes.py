"""Tubes with one constant principal curvature.

Given the three signs ``eps`` (curvature of the ambient space form),
``eps_p`` (norm of the unit normal) and ``eps_pp`` (causal character of
the constant-curvature direction) and the radius ``r``, the critical
constant ``c = eps_pp * (eps + eps_p / r**2)`` decides whether the surface
is an elliptic (c > 0), hyperbolic (c < 0) or parabolic (c = 0) tube.
"""

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import hyperdual as hd
from .ambient import SpaceForm, inner, polar_space, quadric_residual
from .curves import FramedCurve, ParabolicData, frame_residuals
from .errors import (
    FlatSpaceHasNoPolar,
    FrameSignatureMismatch,
    InvalidParabolicData,
    NotATableRow,
    ParabolicHasNoDistance,
    VanishingPrincipalCurvature,
    WrongClassification,
)

PARABOLIC_TOL = 1e-14


class TubeKind(enum.Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TableRow:
    index: int
    space: SpaceForm
    causal: str
    signs: tuple  # (eps, eps_p, eps_pp)
    regime: str  # "any", "r<1", "r>1", "r=1"
    kind: TubeKind
    curve_home: str


def _rows():
    E, P, H = TubeKind.ELLIPTIC, TubeKind.PARABOLIC, TubeKind.HYPERBOLIC
    spec = [
        ((0, 0), "spacelike", (0, 1, 1), "any", E, "E3"),
        ((0, 1), "spacelike", (1, 1, 1), "any", E, "S3"),
        ((1, -1), "spacelike", (-1, 1, 1), "r<1", E, "H3"),
        ((1, -1), "spacelike", (-1, 1, 1), "r>1", H, "dS3, spacelike"),
        ((1, -1), "spacelike", (-1, 1, 1), "r=1", P, "H3/dS3"),
        ((1, 0), "spacelike", (0, -1, 1), "any", H, "L3, spacelike"),
        ((1, 0), "timelike", (0, 1, 1), "any", E, "L3, timelike"),
        ((1, 0), "timelike", (0, 1, -1), "any", H, "L3, spacelike"),
        ((1, 1), "spacelike", (1, -1, 1), "r<1", H, "dS3, spacelike"),
        ((1, 1), "spacelike", (1, -1, 1), "r>1", E, "H3"),
        ((1, 1), "spacelike", (1, -1, 1), "r=1", P, "dS3/H3"),
        ((1, 1), "timelike", (1, 1, 1), "any", E, "dS3, timelike"),
        ((1, 1), "timelike", (1, 1, -1), "any", H, "dS3, spacelike"),
        ((2, -1), "spacelike", (-1, -1, 1), "any", H, "AdS3, spacelike"),
        ((2, -1), "timelike", (-1, 1, 1), "r<1", E, "AdS3, timelike"),
        ((2, -1), "timelike", (-1, 1, -1), "r>1", E, "AdS3~"),
        ((2, -1), "timelike", (-1, 1, -1), "r=1", P, "AdS3/AdS3~"),
    ]
    return tuple(TableRow(i + 1, SpaceForm(*s), c, sg, rg, k, h) for i, (s, c, sg, rg, k, h) in enumerate(spec))


TABLE = _rows()


def _exact(r):
    if isinstance(r, (int, Fraction)):
        return Fraction(r)
    return None


def regime(r):
    q = _exact(r)
    if q is not None:
        return "r<1" if q < 1 else "r>1" if q > 1 else "r=1"
    if abs(r - 1.0) < PARABOLIC_TOL:
        return "r=1"
    return "r<1" if r < 1 else "r>1"


def table_row(space, eps_p, eps_pp, r):
    """The table row matching a space form, sign pair and radius, or NotATableRow."""
    signs = (space.eps, int(eps_p), int(eps_pp))
    reg = regime(r)
    candidates = [row for row in TABLE if row.space == space and row.signs == signs]
    if not candidates:
        allowed = sorted({row.signs for row in TABLE if row.space == space})
        raise NotATableRow(f"(eps, eps', eps'') = {signs} is not a table row for {space.name}; admissible: {allowed}")
    for row in candidates:
        if row.regime in ("any", reg):
            return row
    raise NotATableRow(f"{signs} in {space.name} admits no tube with {reg}; rows: {[row.index for row in candidates]}")


def critical_constant(eps, eps_p, eps_pp, r):
    """c = eps'' (eps + eps' r^-2); exact when r is an int or Fraction."""
    if r <= 0:
        raise ValueError("r must be positive")
    q = _exact(r)
    if q is not None:
        return eps_pp * (eps + eps_p / (q * q))
    return eps_pp * (eps + eps_p / (r * r))


def classify_tube(c):
    if isinstance(c, (int, Fraction)):
        zero = c == 0
    else:
        zero = abs(c) < PARABOLIC_TOL
    if zero:
        return TubeKind.PARABOLIC
    return TubeKind.ELLIPTIC if c > 0 else TubeKind.HYPERBOLIC


def tube_distance(eps, eps_p, r):
    """The distance d of the table: r, arctan r, artanh r or arcoth r."""
    r = float(r)
    ee = eps * eps_p
    if ee == 0:
        return r
    if ee == 1:
        return math.atan(r)
    if abs(r - 1.0) < PARABOLIC_TOL:
        raise ParabolicHasNoDistance("eps*eps' = -1 with r = 1 is the parabolic case")
    return math.atanh(r) if r < 1 else math.atanh(1.0 / r)


def normalization(eps, eps_p, r):
    """|1 + eps eps' r^2|^(-1/2); the parabolic case (where it blows up) has no factor."""
    q = abs(1.0 + eps * eps_p * float(r) ** 2)
    return q**-0.5 if q > PARABOLIC_TOL else 1.0


@dataclass(frozen=True)
class TubeSpec:
    r: float
    eps: int
    eps_p: int
    eps_pp: int
    kind: TubeKind
    generator: object
    row: TableRow
    scale: float
    c: object

    @property
    def distance(self):
        if self.kind is TubeKind.PARABOLIC:
            return None
        return tube_distance(self.eps, self.eps_p, self.r)


@dataclass(frozen=True)
class SurfacePatch:
    """An evaluable immersion (u, v) -> R^4 lying in ``space``.

    ``evaluate`` must accept plain arrays or hyper-duals.  ``declared_r``
    is the reciprocal of the principal curvature expected to be constant.
    """

    space: SpaceForm
    evaluate: object
    u_domain: tuple
    v_domain: tuple
    declared_r: float = None
    declared_eps_p: int = None
    provenance: object = "external"
    v_periodic: bool = False
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, u, v):
        return self.evaluate(u, v)

    @property
    def kind(self):
        return self.provenance.kind if isinstance(self.provenance, TubeSpec) else None


def _check_frame(fc, want):
    if tuple(fc.signature) != tuple(want):
        raise FrameSignatureMismatch(f"frame signature {tuple(fc.signature)} but the tube needs {tuple(want)}")


def _spec(space, eps_p, eps_pp, r, expected, generator):
    c = critical_constant(space.eps, eps_p, eps_pp, r)
    kind = classify_tube(c)
    if kind is not expected:
        raise WrongClassification(f"critical constant c = {c} gives a {kind} tube, not {expected}")
    row = table_row(space, eps_p, eps_pp, r)
    if row.kind is not kind:
        raise WrongClassification(f"table row {row.index} is {row.kind}")
    return TubeSpec(float(r), space.eps, int(eps_p), int(eps_pp), kind, generator, row, normalization(space.eps, eps_p, r), c)


def _fiber_tube(fc, r, eps_p, eps_pp, kind):
    if kind is TubeKind.ELLIPTIC:
        eps = fc.space.eps * eps_p * eps_pp
        want = (eps_pp, eps_pp)
        trig = (hd.cos, hd.sin)
        vdom, periodic = (0.0, 2 * math.pi), True
    else:
        eps = -fc.space.eps * eps_p * eps_pp
        want = (-eps_pp, eps_pp)
        trig = (hd.cosh, hd.sinh)
        vdom, periodic = (-2.0, 2.0), False
    space = SpaceForm(fc.space.p, eps)
    spec = _spec(space, eps_p, eps_pp, r, kind, fc)
    _check_frame(fc, want)
    k, rr = spec.scale, float(r)
    ca, sa = trig

    def evaluate(u, v):
        g, e1, e2 = fc.evaluate(u)
        fiber = hd.add(hd.scale(ca(v), e1), hd.scale(sa(v), e2))
        return hd.mul(k, hd.add(hd.align(g, fiber), hd.mul(rr, fiber)))

    return SurfacePatch(space, evaluate, tuple(fc.domain), vdom, rr, int(eps_p), spec, periodic, f"{kind} tube in {space.name}")


def elliptic_tube(fc: FramedCurve, r, eps_p, eps_pp):
    """|1 + eps eps' r^2|^-1/2 (gamma + r (cos v e1 + sin v e2)), gamma in Q_{p, eps eps' eps''}."""
    return _fiber_tube(fc, r, eps_p, eps_pp, TubeKind.ELLIPTIC)


def hyperbolic_tube(fc: FramedCurve, r, eps_p, eps_pp):
    """|1 + eps eps' r^2|^-1/2 (gamma + r (cosh v e1 + sinh v e2)), gamma in Q_{p, -eps eps' eps''}."""
    return _fiber_tube(fc, r, eps_p, eps_pp, TubeKind.HYPERBOLIC)


def parabolic_tube(pd: ParabolicData, check_points=5, tol=1e-9):
    """(1 - eps eps'' v^2/2) delta_plus + v e1 + (v^2/2) delta_minus."""
    space = pd.space
    for u in np.linspace(*pd.domain, check_points):
        res = frame_residuals(pd, u)
        worst = max(res, key=res.get)
        if res[worst] > tol:
            raise InvalidParabolicData(f"{worst} = {res[worst]:.3g} at u = {u:.6g}")
    spec = _spec(space, -space.eps, pd.eps_pp, 1, TubeKind.PARABOLIC, pd)
    a = float(space.eps * pd.eps_pp)

    def evaluate(u, v):
        dp, dm, e1 = pd.evaluate(u)
        v2 = hd.mul(0.5, hd.mul(v, v))
        return hd.add(hd.add(hd.scale(hd.sub(1.0, hd.mul(a, v2)), dp), hd.scale(v, e1)), hd.scale(v2, dm))

    return SurfacePatch(space, evaluate, tuple(pd.domain), (-2.0, 2.0), 1.0, -space.eps, spec, False, f"parabolic tube in {space.name}")


def polar_surface(sp: SurfacePatch, probe=16, tol=1e-8):
    """The unit normal field of ``sp`` as a patch of Q_{p, eps'}.

    The normal is oriented so the constant principal curvature is +1/r;
    the polar then has constant principal curvature r.
    """
    from .geometry import Grid, analyze, normal_field

    if sp.space.eps == 0:
        raise FlatSpaceHasNoPolar(f"{sp.space.name} is flat and has no polar space")
    grid = Grid.of(sp, probe, probe)
    data = analyze(sp, *grid.points())
    ok = data["valid"]
    kmin = np.nanmin(np.abs(np.concatenate([data["k1"][ok], data["k2"][ok]]))) if np.any(ok) else np.inf
    if kmin < tol:
        raise VanishingPrincipalCurvature(f"a principal curvature vanishes (|k| = {kmin:.3g}); the polar is not immersed")
    eps_p = sp.declared_eps_p
    if eps_p is None:
        eps_p = int(np.sign(np.median(data["eps_p"][ok])))
    target = SpaceForm(sp.space.p, eps_p)
    return SurfacePatch(
        target,
        normal_field(sp),
        sp.u_domain,
        sp.v_domain,
        None if sp.declared_r is None else 1.0 / sp.declared_r,
        sp.space.eps,
        {"polar_of": sp},
        sp.v_periodic,
        f"polar of {sp.name}",
    )


def kind_is_polar_of_elliptic(spec: TubeSpec):
    """Elliptic tubes with eps'' = -eps' are polars of elliptic tubes of the polar space."""
    return spec.kind is TubeKind.ELLIPTIC and spec.eps_pp == -spec.eps_p


__all__ = [
    "TABLE",
    "TableRow",
    "TubeKind",
    "TubeSpec",
    "SurfacePatch",
    "critical_constant",
    "classify_tube",
    "tube_distance",
    "normalization",
    "table_row",
    "elliptic_tube",
    "hyperbolic_tube",
    "parabolic_tube",
    "polar_surface",
    "polar_space",
    "inner",
    "quadric_residual",
]
