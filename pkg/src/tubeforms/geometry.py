"""Verification engine: exact partials, normals, fundamental forms and curvatures.

Everything is vectorised over grids: ``u`` and ``v`` are broadcast arrays
and vectors carry a leading axis of length 4.  Second-order partials come
from hyper-dual evaluation of the patch, so they are exact to roundoff.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import hyperdual as hd
from .ambient import NullCone, SpaceForm, inner, orthocomplement_raw, quadric_residual
from .errors import DegenerateTangentPlane, NullNormal, OutOfDomain
from .tubes import TubeKind, TubeSpec, critical_constant, tube_distance

UMBILIC_TOL = 1e-6
DEGENERACY_TOL = 1e-12
DISCRIMINANT_TOL = 1e-12
JORDAN_TOL = 1e-4
TIE_TOL = 1e-9


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid:
    """A rectangular nu x nv parameter grid; periodic v omits the endpoint."""

    u_range: tuple
    v_range: tuple
    nu: int = 64
    nv: int = 64
    v_periodic: bool = False

    @classmethod
    def of(cls, sp, nu=64, nv=64):
        return cls(tuple(map(float, sp.u_domain)), tuple(map(float, sp.v_domain)), int(nu), int(nv), bool(sp.v_periodic))

    @property
    def u(self):
        return np.linspace(*self.u_range, self.nu)

    @property
    def v(self):
        return np.linspace(*self.v_range, self.nv, endpoint=not self.v_periodic)

    def points(self):
        return np.meshgrid(self.u, self.v, indexing="ij")

    def to_dict(self):
        return {"u_range": list(self.u_range), "v_range": list(self.v_range), "nu": self.nu, "nv": self.nv, "v_periodic": self.v_periodic}


def _grid_points(sp, grid):
    if grid is None:
        grid = Grid.of(sp)
    return grid, *grid.points()


def _check_domain(sp, u, v):
    (u0, u1), (v0, v1) = sp.u_domain, sp.v_domain
    slack = 1e-9 * (1 + abs(u1 - u0) + abs(v1 - v0))
    if np.any(u < u0 - slack) or np.any(u > u1 + slack) or np.any(v < v0 - slack) or np.any(v > v1 + slack):
        raise OutOfDomain(f"(u, v) outside [{u0}, {u1}] x [{v0}, {v1}]")


# ---------------------------------------------------------------------------
# partial derivatives


@dataclass
class SurfaceJet2:
    phi: np.ndarray
    phi_u: np.ndarray
    phi_v: np.ndarray
    phi_uu: np.ndarray
    phi_uv: np.ndarray
    phi_vv: np.ndarray


def _component(X, t, name, zeros):
    if not isinstance(X, hd.HyperDual) or X.tag != t:
        return X if name == "re" else zeros
    c = getattr(X, name)
    return zeros if hd._is_zero(c) else c


def _zeros(u, v):
    shape = np.broadcast_shapes(np.shape(hd.value(u)), np.shape(hd.value(v)))
    return np.zeros((4,) + shape)


def first_partials(sp, u, v):
    """(phi, phi_u, phi_v) in one hyper-dual pass; u, v may be hyper-dual."""
    t = hd.new_tag()
    X = sp.evaluate(hd.HyperDual(u, 1.0, 0.0, 0.0, tag=t), hd.HyperDual(v, 0.0, 1.0, 0.0, tag=t))
    z = _zeros(u, v)
    return _component(X, t, "re", z), _component(X, t, "e1", z), _component(X, t, "e2", z)


def _partials(sp, u, v):
    z = _zeros(u, v)
    t = hd.new_tag()
    X = sp.evaluate(hd.HyperDual(u, 1.0, 1.0, 0.0, tag=t), v)
    phi, phi_u, phi_uu = (_component(X, t, k, z) for k in ("re", "e1", "e12"))
    t = hd.new_tag()
    X = sp.evaluate(hd.HyperDual(u, 1.0, 0.0, 0.0, tag=t), hd.HyperDual(v, 0.0, 1.0, 0.0, tag=t))
    phi_v, phi_uv = (_component(X, t, k, z) for k in ("e2", "e12"))
    t = hd.new_tag()
    X = sp.evaluate(u, hd.HyperDual(v, 1.0, 1.0, 0.0, tag=t))
    phi_vv = _component(X, t, "e12", z)
    return SurfaceJet2(phi, phi_u, phi_v, phi_uu, phi_uv, phi_vv)


def surface_jet(sp, u, v):
    """All partials of ``sp`` up to order two at (u, v) (arrays broadcast)."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    _check_domain(sp, u, v)
    J = _partials(sp, u, v)
    shape = (4,) + u.shape
    return SurfaceJet2(*(np.broadcast_to(np.asarray(getattr(J, k), dtype=float), shape) for k in SurfaceJet2.__dataclass_fields__))


def finite_difference_jet(sp, u, v, h1=1e-4, h2=2e-3):
    """Central differences with one Richardson step (independent oracle).

    First partials use step ``h1``.  Second partials divide roundoff by
    ``h**2``, so they use the larger ``h2``: with |phi| near 50 the floor is
    about 1e-7 at h = 1e-3 and 3e-8 at 2e-3.
    """
    f = lambda a, b: np.asarray(sp.evaluate(a, b), dtype=float)  # noqa: E731
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))

    def rich(d, h):
        return (4 * d(h / 2) - d(h)) / 3

    du = lambda h: (f(u + h, v) - f(u - h, v)) / (2 * h)  # noqa: E731
    dv = lambda h: (f(u, v + h) - f(u, v - h)) / (2 * h)  # noqa: E731
    duu = lambda h: (f(u + h, v) - 2 * f(u, v) + f(u - h, v)) / h**2  # noqa: E731
    dvv = lambda h: (f(u, v + h) - 2 * f(u, v) + f(u, v - h)) / h**2  # noqa: E731
    duv = lambda h: (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4 * h * h)  # noqa: E731
    return SurfaceJet2(f(u, v), rich(du, h1), rich(dv, h1), rich(duu, h2), rich(duv, h2), rich(dvv, h2))


# ---------------------------------------------------------------------------
# normals, forms and curvatures


def _raw_normal(space, phi, phi_u, phi_v):
    n = orthocomplement_raw(phi, phi_u, phi_v, space)
    n2 = inner(n, n, space.p)
    return n, n2


def _degeneracy(space, J):
    E, F, G = (inner(a, b, space.p) for a, b in ((J.phi_u, J.phi_u), (J.phi_u, J.phi_v), (J.phi_v, J.phi_v)))
    det = E * G - F * F
    # the scale must not shrink with a vanishing partial, so use the sum
    scale = (np.sum(J.phi_u**2, axis=0) + np.sum(J.phi_v**2, axis=0)) ** 2
    return E, F, G, det, np.abs(det) <= DEGENERACY_TOL * scale


def _eigvec(S11, S12, S21, S22, k):
    """Kernel vector of S - k Id from whichever row is better conditioned."""
    w1 = np.stack([-S12, S11 - k])
    w2 = np.stack([S22 - k, -S21])
    pick = np.sum(w1**2, axis=0) >= np.sum(w2**2, axis=0)
    w = np.where(pick, w1, w2)
    return w, np.sqrt(np.sum(w**2, axis=0))


def analyze(sp, u, v, target=True):
    """Pointwise curvature data of ``sp`` on broadcast arrays u, v (dict of arrays).

    The normal is flipped where needed so the eigenvalue assigned to the
    constant direction is +1/declared_r.
    """
    space = sp.space
    p = space.p
    J = surface_jet(sp, u, v)
    E, F, G, det, degenerate = _degeneracy(space, J)
    n, n2 = _raw_normal(space, J.phi, J.phi_u, J.phi_v)
    null = np.abs(n2) <= DEGENERACY_TOL * np.sum(n**2, axis=0)
    immersed = ~(degenerate | null)
    with np.errstate(divide="ignore", invalid="ignore"):
        N = np.where(immersed, n / np.sqrt(np.abs(n2)), np.nan)
    eps_p = np.sign(n2).astype(int)
    e, f, g = (inner(J_ij, N, p) for J_ij in (J.phi_uu, J.phi_uv, J.phi_vv))

    # shape operator S = I^-1 II in coordinates
    with np.errstate(divide="ignore", invalid="ignore"):
        S11 = (G * e - F * f) / det
        S12 = (G * f - F * g) / det
        S21 = (E * f - F * e) / det
        S22 = (E * g - F * f) / det
    half_tr = 0.5 * (S11 + S22)
    # written so that a multiple of the identity gives disc ~ roundoff^2
    disc = 0.25 * (S11 - S22) ** 2 + S12 * S21
    dscale = 0.25 * (S11 - S22) ** 2 + np.abs(S12 * S21)
    complex_ = immersed & (disc < -DISCRIMINANT_TOL * dscale)
    root = np.sqrt(np.clip(disc, 0, None))
    detS = S11 * S22 - S12 * S21
    q = half_tr + np.where(half_tr >= 0, root, -root)
    with np.errstate(divide="ignore", invalid="ignore"):
        kp = q
        km = np.where(np.abs(q) > 1e-300, detS / q, half_tr - root)
    wp, np_ = _eigvec(S11, S12, S21, S22, kp)
    wm, nm = _eigvec(S11, S12, S21, S22, km)
    sscale = np.abs(S11) + np.abs(S12) + np.abs(S21) + np.abs(S22) + np.abs(kp) + np.abs(km)
    tiny_p = ~(np_ > 1e-10 * sscale)
    tiny_m = ~(nm > 1e-10 * sscale)
    axis_u, axis_v = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    shape = np.shape(E)
    both_tiny = tiny_p & tiny_m
    wp = np.where(both_tiny, axis_v.reshape((2,) + (1,) * len(shape)), wp)
    wm = np.where(both_tiny, axis_u.reshape((2,) + (1,) * len(shape)), wm)
    # one eigenvector missing: complete with a vector I-orthogonal to the other
    def complete(w_other):
        return np.stack([-(F * w_other[0] + G * w_other[1]), E * w_other[0] + F * w_other[1]])

    wp = np.where(tiny_p & ~tiny_m, complete(wm), wp)
    wm = np.where(tiny_m & ~tiny_p, complete(wp), wm)
    vcos = lambda w: np.abs(w[1]) / np.maximum(np.sqrt(np.sum(w**2, axis=0)), 1e-300)  # noqa: E731

    declared = sp.declared_r if target else None
    if declared is None:
        closer_p = vcos(wp) >= vcos(wm)
        s = np.ones(shape)
        k2 = np.where(closer_p, kp, km)
        k1 = np.where(closer_p, km, kp)
        w2 = np.where(closer_p, wp, wm)
        w1 = np.where(closer_p, wm, wp)
    else:
        t = 1.0 / declared
        cand_k = np.stack([kp, km, -kp, -km])
        cand_s = np.array([1.0, 1.0, -1.0, -1.0]).reshape((4,) + (1,) * len(shape))
        cand_sel = np.array([0, 1, 0, 1]).reshape((4,) + (1,) * len(shape))
        dist = np.abs(cand_k - t)
        dist = np.where(np.isnan(dist), np.inf, dist)
        best = np.min(dist, axis=0)
        tied = dist <= best + TIE_TOL * (1 + abs(t))
        score = np.stack([vcos(wp), vcos(wm), vcos(wp), vcos(wm)]) + 1e-3 * (cand_s > 0)
        idx = np.argmax(np.where(tied, score, -np.inf), axis=0)
        s = np.take_along_axis(np.broadcast_to(cand_s, dist.shape), idx[None], 0)[0]
        sel_p = np.take_along_axis(np.broadcast_to(cand_sel, dist.shape), idx[None], 0)[0] == 0
        k2 = s * np.where(sel_p, kp, km)
        k1 = s * np.where(sel_p, km, kp)
        w2 = np.where(sel_p, wp, wm)
        w1 = np.where(sel_p, wm, wp)
    s = np.where(immersed & ~complex_, s, 1.0)
    N = N * s
    e, f, g = e * s, f * s, g * s

    umbilic = immersed & ~complex_ & (np.abs(k1 - k2) < UMBILIC_TOL * (1 + np.abs(k1) + np.abs(k2)))
    kbar = 0.5 * (k1 + k2)
    jordan_res = np.maximum.reduce([np.abs(e - kbar * E), np.abs(f - kbar * F), np.abs(g - kbar * G)])
    fscale = np.abs(E) + np.abs(F) + np.abs(G)
    jordan = umbilic & (jordan_res > JORDAN_TOL * (np.abs(e) + np.abs(f) + np.abs(g) + np.abs(kbar) * fscale))
    diagonalizable = immersed & ~complex_ & ~jordan
    umbilic &= diagonalizable
    k1 = np.where(diagonalizable, k1, np.nan)
    k2 = np.where(diagonalizable, k2, np.nan)
    return {
        "u": np.broadcast_to(u, shape),
        "v": np.broadcast_to(v, shape),
        "jet": J,
        "E": E, "F": F, "G": G, "e": e, "f": f, "g": g,
        "N": N,
        "eps_p": eps_p,
        "k1": k1,
        "k2": k2,
        "dir1": w1,
        "dir2": w2,
        "orientation": s.astype(int),
        "immersed": immersed,
        "diagonalizable": diagonalizable,
        "umbilic": umbilic,
        "valid": diagonalizable,
        "quadric": np.abs(np.asarray(quadric_residual(J.phi, space))),
    }


@dataclass
class FundamentalForms:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    e: np.ndarray
    f: np.ndarray
    g: np.ndarray
    eps_p: np.ndarray


@dataclass
class PrincipalData:
    k1: np.ndarray
    k2: np.ndarray
    dir1: np.ndarray
    dir2: np.ndarray
    diagonalizable: np.ndarray
    umbilic: np.ndarray


def unit_normal(sp, u, v):
    """Unit normal (right-handed orthocomplement convention) and its sign eps'."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    _check_domain(sp, u, v)
    phi, phi_u, phi_v = (np.asarray(x, dtype=float) for x in first_partials(sp, u, v))
    from .ambient import plane_degeneracy

    det, cut = plane_degeneracy(phi_u, phi_v, sp.space.p)
    if np.any(det <= cut):
        raise DegenerateTangentPlane("tangent plane is degenerate")
    n, n2 = _raw_normal(sp.space, phi, phi_u, phi_v)
    if np.any(np.abs(n2) <= DEGENERACY_TOL * np.sum(n**2, axis=0)):
        raise NullNormal("the normal is lightlike")
    return n / np.sqrt(np.abs(n2)), np.sign(n2).astype(int)


def fundamental_forms(sp, u, v):
    """First and second fundamental forms for the curvature-oriented normal."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    d = analyze(sp, u, v)
    if not np.all(d["immersed"]):
        unit_normal(sp, u, v)  # raises the specific error
    return FundamentalForms(d["E"], d["F"], d["G"], d["e"], d["f"], d["g"], d["eps_p"])


def principal_curvatures(sp, u, v):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    d = analyze(sp, u, v)
    return PrincipalData(d["k1"], d["k2"], d["dir1"], d["dir2"], d["diagonalizable"], d["umbilic"])


def normal_field(sp, cache_size=64):
    """Liftable (u, v) -> oriented unit normal of ``sp``."""
    cache = {}

    def orientation(u0, v0):
        key = (u0.shape, u0.tobytes(), v0.tobytes())
        if key not in cache:
            if len(cache) >= cache_size:
                cache.clear()
            cache[key] = analyze(sp, u0, v0)["orientation"]
        return cache[key]

    def N(u, v):
        u0, v0 = np.broadcast_arrays(np.asarray(hd.value(u), dtype=float), np.asarray(hd.value(v), dtype=float))
        phi, phi_u, phi_v = first_partials(sp, u, v)
        n, n2 = _raw_normal(sp.space, phi, phi_u, phi_v)
        scale = hd.recip(hd.sqrt(hd.absolute(n2)))
        return hd.mul(hd.mul(orientation(u0, v0).astype(float), scale), n)

    return N


def normal_consistency(sp, u, v):
    """max |e + <N_u, phi_u>|, |f + <N_u, phi_v>|, |g + <N_v, phi_v>| (N differentiated exactly)."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    d = analyze(sp, u, v)
    Nf = normal_field(sp)
    t = hd.new_tag()
    Nx = Nf(hd.HyperDual(u, 1.0, 0.0, 0.0, tag=t), hd.HyperDual(v, 0.0, 1.0, 0.0, tag=t))
    J = d["jet"]
    p = sp.space.p
    N_u, N_v = np.asarray(Nx.e1, dtype=float), np.asarray(Nx.e2, dtype=float)
    ok = d["valid"]
    res = np.maximum.reduce([
        np.abs(d["e"] + inner(N_u, J.phi_u, p)),
        np.abs(d["f"] + inner(N_u, J.phi_v, p)),
        np.abs(d["f"] + inner(N_v, J.phi_u, p)),
        np.abs(d["g"] + inner(N_v, J.phi_v, p)),
    ])
    return float(np.max(res[ok])) if np.any(ok) else math.nan


# ---------------------------------------------------------------------------
# reports


def _locus(mask, U, V):
    return [[float(a), float(b)] for a, b in zip(U[mask], V[mask])]


def _check(value, tol):
    value = float(value)
    return {"value": value, "tol": float(tol), "passed": bool(value < tol)}


@dataclass
class CurvatureReport:
    """Outcome of :func:`constant_pc_verify`; failures are reported, never raised."""

    name: str
    grid: Grid
    declared_r: float
    checks: dict
    umbilic_locus: list
    non_immersion_locus: list
    non_diagonalizable_locus: list
    k1: np.ndarray = field(repr=False)
    k2: np.ndarray = field(repr=False)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values())

    def to_dict(self, arrays=False):
        out = {
            "surface": self.name,
            "grid": self.grid.to_dict(),
            "declared_r": self.declared_r,
            "passed": self.passed,
            "checks": self.checks,
            "umbilic_locus": self.umbilic_locus,
            "non_immersion_locus": self.non_immersion_locus,
            "non_diagonalizable_locus": self.non_diagonalizable_locus,
        }
        out.update(self.extra)
        if arrays:
            out["k1"] = np.where(np.isnan(self.k1), None, self.k1).tolist()
            out["k2"] = np.where(np.isnan(self.k2), None, self.k2).tolist()
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(**kw), indent=2, default=_json_default)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def constant_pc_verify(sp, grid=None, tol=1e-8, quadric_tol=1e-10, data=None):
    """Check that the principal curvature assigned to d/dv equals 1/declared_r."""
    grid, U, V = _grid_points(sp, grid)
    d = data if data is not None else analyze(sp, U, V)
    ok = d["valid"]
    if sp.declared_r is None:
        raise ValueError("the patch has no declared radius to verify against")
    resid = np.abs(d["k2"] - 1.0 / sp.declared_r)
    worst = float(np.max(resid[ok])) if np.any(ok) else math.inf
    checks = {
        "constant_curvature": _check(worst, tol),
        "quadric": _check(np.max(d["quadric"]), quadric_tol),
        "valid_points": {"value": int(np.sum(ok)), "tol": 1, "passed": bool(np.any(ok))},
    }
    return CurvatureReport(
        sp.name,
        grid,
        sp.declared_r,
        checks,
        _locus(d["umbilic"], U, V),
        _locus(~d["immersed"], U, V),
        _locus(d["immersed"] & ~d["diagonalizable"], U, V),
        d["k1"],
        d["k2"],
    )


def geodesic_foliation_check(sp, grid=None, tol=1e-8, data=None):
    """Residuals showing that the v-curves are pregeodesics of the induced metric.

    Reports max |G_u| with G_u = 2 <phi_uv, phi_v>, and the normalised
    component of phi_vv along the tangent direction orthogonal to phi_v.
    """
    grid, U, V = _grid_points(sp, grid)
    d = data if data is not None else analyze(sp, U, V)
    J, p = d["jet"], sp.space.p
    F, G = d["F"], d["G"]
    G_u = 2 * inner(J.phi_uv, J.phi_v, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = J.phi_u - (F / G) * J.phi_v
        tt = inner(t, t, p)
        tang = np.abs(inner(J.phi_vv, t, p)) / (np.abs(G) * np.sqrt(np.abs(tt)))
    ok = d["immersed"] & (np.abs(G) > 1e-10 * np.sum(J.phi_v**2, axis=0)) & (np.abs(tt) > 1e-10 * np.sum(t**2, axis=0))
    out = {
        "G_u": _check(np.max(np.abs(G_u[ok])) if np.any(ok) else math.inf, tol),
        "tangential": _check(np.max(tang[ok]) if np.any(ok) else math.inf, tol),
    }
    spec = sp.provenance
    if isinstance(spec, TubeSpec) and spec.kind is TubeKind.PARABOLIC:
        # phi_vv equals the (null) generating curve eps' eps'' (phi + N)
        gamma = spec.eps_p * spec.eps_pp * (J.phi + d["N"])
        out["parabolic_fiber"] = _check(np.max(np.abs(J.phi_vv - gamma)[:, ok]), tol)
    out["passed"] = all(c["passed"] for c in out.values())
    return out


def causal_label(samples, p, tol=1e-12):
    """'spacelike' / 'timelike' / 'mixed' from consecutive chords of sampled points."""
    x = np.asarray(samples, dtype=float)
    if x.shape[0] < 2:
        return "point"
    d = np.diff(x, axis=0).T
    q = inner(d, d, p)
    scale = np.sum(d**2, axis=0)
    if np.all(q > tol * scale):
        return "spacelike"
    if np.all(q < -tol * scale):
        return "timelike"
    if np.all(scale < 1e-24):
        return "point"
    return "mixed"


def home_label(home, samples):
    if isinstance(home, NullCone):
        return "null cone"
    if home.signature[0] == 0:
        return home.name
    return f"{home.name}, {causal_label(samples, home.p)}"


def normalize_generating_curve(samples, c, r, eps, eps_p, eps_pp, p, parabolic=None):
    """Scale gamma~ samples into their home quadric (or by eps'eps'' onto the null cone).

    Returns ``(curve, home, residual)``; ``samples`` has shape (n, 4).
    """
    samples = np.asarray(samples, dtype=float)
    if parabolic is None:
        parabolic = c == 0
    if parabolic:
        curve = eps_p * eps_pp * samples
        home = NullCone(p)
        res = np.abs(inner(curve.T, curve.T, p))
    else:
        sc = 1.0 if c > 0 else -1.0
        factor = eps_p * eps_pp * sc / (float(r) * math.sqrt(abs(float(c))))
        curve = factor * samples
        home = SpaceForm(p, 0) if eps == 0 else SpaceForm(p, int(eps * eps_p * eps_pp * sc))
        res = np.abs(np.asarray(quadric_residual(curve.T, home)))
    return curve, home, float(np.max(res)) if res.size else 0.0


@dataclass
class Reconstruction:
    u: np.ndarray
    tilde: np.ndarray
    curve: np.ndarray
    home: object
    home_label: str
    spread: float
    norm_residual: float
    home_residual: float
    c: object
    signs: tuple

    def to_dict(self):
        return {
            "home": self.home_label,
            "c": float(self.c),
            "signs": list(self.signs),
            "v_spread": self.spread,
            "norm_residual": self.norm_residual,
            "home_residual": self.home_residual,
            "u": self.u.tolist(),
            "curve": self.curve.tolist(),
        }


def _median_sign(x):
    x = x[np.isfinite(x)]
    return int(np.sign(np.median(x))) if x.size else 1


def reconstruct_generating_curve(sp, grid=None, data=None):
    """gamma~ = phi + r N on the grid, its v-spread and norm check, and the normalised curve."""
    grid, U, V = _grid_points(sp, grid)
    d = data if data is not None else analyze(sp, U, V)
    r = sp.declared_r
    ok = d["valid"]
    space = sp.space
    p = space.p
    tilde = d["jet"].phi + r * d["N"]  # (4, nu, nv)
    spec = sp.provenance if isinstance(sp.provenance, TubeSpec) else None
    if spec is not None:
        eps_p, eps_pp = spec.eps_p, spec.eps_pp
        c = spec.c
    else:
        eps_p = _median_sign(np.where(ok, d["eps_p"], np.nan))
        w = d["dir2"]
        Iw = d["E"] * w[0] ** 2 + 2 * d["F"] * w[0] * w[1] + d["G"] * w[1] ** 2
        eps_pp = _median_sign(np.where(ok, Iw, np.nan))
        c = critical_constant(space.eps, eps_p, eps_pp, r)
    cf = float(c)
    parabolic = spec.kind is TubeKind.PARABOLIC if spec is not None else abs(cf) < 1e-14

    okT = ok[None]
    masked = np.where(okT, tilde, np.nan)
    mean = np.nanmean(masked, axis=2)  # (4, nu)
    rows = np.any(ok, axis=1)
    dev = np.sqrt(np.nansum((masked - mean[:, :, None]) ** 2, axis=0))
    spread = float(np.nanmax(np.where(ok, dev, np.nan))) if np.any(ok) else math.inf
    if space.eps == 0:
        nres = np.abs(tilde[3])
    else:
        nres = np.abs(inner(tilde, tilde, p) - space.eps * eps_p * eps_pp * float(r) ** 2 * cf)
    norm_residual = float(np.max(nres[ok])) if np.any(ok) else math.inf
    samples = mean[:, rows].T
    curve, home, hres = normalize_generating_curve(samples, c, r, space.eps, eps_p, eps_pp, p, parabolic)
    return Reconstruction(grid.u[rows], samples, curve, home, home_label(home, curve), spread, norm_residual, hres, c, (space.eps, eps_p, eps_pp))


def distance_check(sp, grid=None, data=None):
    """Ambient geodesic distance from phi to the normalised generating point.

    Only meaningful for elliptic tubes with eps'' = eps' in E3, S3 or H3;
    returns None otherwise.
    """
    spec = sp.provenance
    if not isinstance(spec, TubeSpec) or spec.kind is not TubeKind.ELLIPTIC or spec.eps_pp != spec.eps_p:
        return None
    space = sp.space
    if space.signature[0] != 0:
        return None
    grid, U, V = _grid_points(sp, grid)
    d = data if data is not None else analyze(sp, U, V)
    ok = d["valid"]
    phi = d["jet"].phi
    tilde = phi + sp.declared_r * d["N"]
    factor = spec.eps_p * spec.eps_pp / (spec.r * math.sqrt(abs(float(spec.c))))
    gamma = factor * tilde
    if space.eps == 0:
        dist = np.sqrt(np.sum((phi - gamma) ** 2, axis=0))
    elif space.eps == 1:
        dist = np.arccos(np.clip(inner(phi, gamma, 0), -1, 1))
    else:
        dist = np.arccosh(np.maximum(-inner(phi, gamma, space.p), 1))
    want = tube_distance(space.eps, spec.eps_p, spec.r)
    return float(np.max(np.abs(dist - want)[ok])) if np.any(ok) else math.inf


def polar_check(sp, grid=None, data=None, min_curvature=0.0):
    """Reciprocity of principal curvatures between ``sp`` and its polar, and polar-of-polar.

    Points where a principal curvature of ``sp`` is below ``min_curvature`` in
    absolute value are left out of the reciprocity check: the polar is nearly
    singular there and its curvatures lose digits like 1/k**2.
    """
    from .tubes import polar_surface

    grid, U, V = _grid_points(sp, grid)
    d = data if data is not None else analyze(sp, U, V)
    polar = polar_surface(sp)
    pd = analyze(polar, U, V)
    ok = d["valid"] & pd["valid"]
    conditioned = ok & (np.minimum(np.abs(d["k1"]), np.abs(d["k2"])) >= min_curvature)
    with np.errstate(divide="ignore"):
        r1 = np.abs(pd["k1"] - 1 / d["k1"]) / np.maximum(1, np.abs(1 / d["k1"]))
        r2 = np.abs(pd["k2"] - 1 / d["k2"]) / np.maximum(1, np.abs(1 / d["k2"]))
    recip = float(np.max(np.maximum(r1, r2)[conditioned])) if np.any(conditioned) else math.inf
    pp = polar_surface(polar)
    back = np.asarray(pp.evaluate(U, V), dtype=float)
    phi = d["jet"].phi
    gap = np.max(np.abs(back - phi), axis=0)
    roundtrip = float(np.max(gap[ok])) if np.any(ok) else math.inf
    # relative to the coordinate size, for patches reaching far out on a quadric
    relative = float(np.max((gap / np.maximum(1, np.max(np.abs(phi), axis=0)))[ok])) if np.any(ok) else math.inf
    return {
        "polar_space": polar.space.name,
        "reciprocal": _check(recip, 1e-7),
        "polar_of_polar": _check(relative, 1e-9),
        "polar_of_polar_abs": float(roundtrip),
        "polar_quadric": _check(np.max(pd["quadric"]), 1e-10),
        "excluded_points": int(np.sum(ok & ~conditioned)),
    }
