"""Closed-form example families with known non-constant principal curvature.

* ``E3Tube``: gamma(u) = int_0^u h(s) e0(s) ds in E3 with the frame
  e0 = (0, -sin u, cos u, 0), e1 = (0, cos u, sin u, 0), e2 = (1, 0, 0, 0);
  elliptic tube of radius r, kappa1 = cos v / (h + r cos v).
* ``L3Tube``: the same curve in L3 (first coordinate timelike) with the
  hyperbolic fiber r (cosh v e1 + sinh v e2); kappa1 = cosh v / (h + r cosh v).
* ``H3Parabolic``: a moving frame (delta_plus, T, delta_minus, e1) of H3
  driven by the functions a, b; kappa1 = 1 - (1-b) / (1 - a v + (1-b) v^2/2).
* ``H3Hyperbolic``: a moving frame (gamma, e0, e1, e2) with gamma in dS3
  driven by a profile h~; kappa1 = (r h~ + e^v) / (h~ + r e^v).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import hyperdual as hd
from .ambient import DS3, E3, H3, L3
from .curves import FramedCurve, ParabolicData, framed_curve_from_moving_frame, solve_frame_system
from .errors import ImmersionViolation, SceneError
from .expr import compile_expr
from .tubes import elliptic_tube, hyperbolic_tube, parabolic_tube

FAMILIES = ("E3Tube", "L3Tube", "H3Parabolic", "H3Hyperbolic")

# Gauss-Legendre rule for the composite quadrature fallback
_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)
PANEL = 0.02


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """A scalar profile h(u) with optional closed-form moments.

    ``moments(u)`` returns (int_0^u h cos, int_0^u h sin) when known in
    closed form; otherwise they are integrated by composite quadrature.
    """

    name: str
    f: object
    moments: object = None
    params: dict = field(default_factory=dict)

    def __call__(self, u):
        return self.f(u)


def _bump(u, width):
    x = hd.mul(u, 1.0 / width)
    inside = np.abs(hd.value(x)) < 1
    w = hd.where(inside, hd.sub(1.0, hd.mul(x, x)), 1.0)
    return hd.where(inside, hd.exp(hd.neg(hd.recip(w))), 0.0)


def make_profile(name, **params):
    """Named profiles: constant, quadratic, cubic_ramp, bump, or expr (free expression in u)."""
    if name == "constant":
        c = float(params.get("value", 0.0))

        def moments(u):
            return c * np.sin(u), c * (1 - np.cos(u))

        return Profile(name, lambda u: c, moments, {"value": c})
    if name == "quadratic":
        k = float(params.get("scale", 1.0))

        def moments(u):
            c = u * u * np.sin(u) + 2 * u * np.cos(u) - 2 * np.sin(u)
            s = -u * u * np.cos(u) + 2 * u * np.sin(u) + 2 * np.cos(u) - 2
            return k * c, k * s

        return Profile(name, lambda u: hd.mul(k, hd.mul(u, u)), moments, {"scale": k})
    if name == "cubic_ramp":
        k = float(params.get("scale", 1.0))
        c0 = float(params.get("offset", 0.0))

        def f(u):
            pos = np.asarray(hd.value(u)) > 0
            return hd.add(c0, hd.where(pos, hd.mul(k, hd.power(u, 3)), 0.0))

        return Profile(name, f, None, {"scale": k, "offset": c0})
    if name == "bump":
        amp = float(params.get("amplitude", 1.0))
        width = float(params.get("width", 1.0))
        c0 = float(params.get("offset", 0.0))
        return Profile(name, lambda u: hd.add(c0, hd.mul(amp, _bump(u, width))), None, {"amplitude": amp, "width": width, "offset": c0})
    if name == "expr":
        src = params.get("h")
        if src is None:
            raise SceneError("profile 'expr' needs an expression 'h'")
        extra = {k: v for k, v in params.items() if k != "h"}
        return Profile(name, compile_expr(src, extra), None, dict(params))
    raise SceneError(f"unknown profile {name!r}")


def _quadrature(g, u):
    """int_0^u g(s) ds for each entry of u; panels start at 0 so kinks at 0 are resolved."""
    u = np.asarray(u, dtype=float)
    flat = u.ravel()
    out = np.zeros((len(flat),) + np.shape(g(np.zeros(1)))[:-1])
    for uniq in np.unique(flat):
        n = max(1, int(math.ceil(abs(uniq) / PANEL)))
        a = np.linspace(0.0, uniq, n + 1)
        mid, half = 0.5 * (a[1:] + a[:-1]), 0.5 * (a[1:] - a[:-1])
        s = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        w = (half[:, None] * _GL_W[None, :]).ravel()
        val = np.asarray(g(s), dtype=float) @ w
        out[flat == uniq] = val
    return np.moveaxis(out.reshape(u.shape + out.shape[1:]), -1, 0) if out.ndim > 1 else out.reshape(u.shape)


def _e0(u):
    z = hd.mul(0.0, u)
    return hd.stack([z, hd.neg(hd.sin(u)), hd.cos(u), z])


def _frame(u):
    z = hd.mul(0.0, u)
    one = hd.add(hd.sub(u, u), 1.0)
    e1 = hd.stack([z, hd.cos(u), hd.sin(u), z])
    e2 = hd.stack([one, z, z, z])
    return e1, e2


def planar_curve(profile):
    """u -> int_0^u h(s) e0(s) ds with derivatives exact from the integrand."""

    def integrand(s):
        return hd.scale(profile(s), _e0(s))

    def antiderivative(u):
        u = np.asarray(u, dtype=float)
        if profile.moments is not None:
            c, s = profile.moments(u)
        else:
            c, s = _quadrature(lambda x: np.stack([np.asarray(hd.value(profile(x)), dtype=float) * np.cos(x), np.asarray(hd.value(profile(x)), dtype=float) * np.sin(x)]), u)
        z = np.zeros_like(u)
        return np.stack([z, -s, c, z])

    return lambda u: hd.primitive(antiderivative, integrand, u)


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class ExampleFamily:
    """One of the closed-form families; ``profile`` is h (or h~), ``a``/``b`` drive H3Parabolic."""

    family: str
    r: float = 1.0
    profile: Profile = None
    a: object = 0.0
    b: object = 0.0
    convention: str = "rows"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SceneError(f"unknown example family {self.family!r}; choose from {FAMILIES}")
        if self.family == "H3Parabolic" and self.r != 1:
            raise SceneError("H3Parabolic has r = 1")
        if self.family == "H3Hyperbolic" and not self.r > 1:
            raise SceneError("H3Hyperbolic needs r > 1")
        if self.family in ("E3Tube", "L3Tube", "H3Hyperbolic") and self.profile is None:
            raise SceneError(f"{self.family} needs a profile")

    def _fn(self, spec):
        if callable(spec):
            return spec
        return compile_expr(spec)

    def h(self, u):
        return self.profile(u)

    def coeffs(self, u):
        """(a(u), b(u)) for H3Parabolic."""
        return self._fn(self.a)(u), self._fn(self.b)(u)


def _broadcast(x, u):
    return hd.add(x, np.zeros(np.shape(hd.value(u))))


def parabolic_frame_matrix(fam):
    def M(u):
        a, b = (_broadcast(x, u) for x in fam.coeffs(u))
        z, one = _broadcast(0.0, u), _broadcast(1.0, u)
        rows = [
            [z, one, z, z],
            [one, z, hd.neg(b), hd.neg(a)],
            [z, b, z, z],
            [z, a, z, z],
        ]
        return hd.stack([hd.stack(r) for r in rows])

    return M


def hyperbolic_frame_matrix(fam):
    """The frame system matrix for (gamma, e0, e1, e2).

    With ``convention='rows'`` the k-th row holds the coefficients of the
    k-th frame vector's derivative, so gamma' = h~ e0.  ``'columns'`` is
    the transposed reading F' = F A (gamma' = -h~ e0); both preserve the
    metric, but only the row reading reproduces the closed-form kappa1.
    """

    def M(u):
        h = _broadcast(fam.h(u), u)
        z, one = _broadcast(0.0, u), _broadcast(1.0, u)
        rows = [
            [z, h, z, z],
            [hd.neg(h), z, hd.neg(one), one],
            [z, one, z, z],
            [z, one, z, z],
        ]
        A = hd.stack([hd.stack(r) for r in rows])
        if fam.convention == "rows":
            return hd.stack([hd.stack([A[j][i] for j in range(4)]) for i in range(4)])
        return A

    return M


def build_example(fam: ExampleFamily, domain=(-2.0, 2.0), v_domain=None, n_steps=None):
    """SurfacePatch of the family over ``domain`` (u-interval)."""
    domain = tuple(map(float, domain))
    if fam.family in ("E3Tube", "L3Tube"):
        space = E3 if fam.family == "E3Tube" else L3
        curve = planar_curve(fam.profile)
        if fam.family == "E3Tube":
            fc = FramedCurve(space, curve, _frame, (1, 1), domain, {"family": fam.family})
            sp = elliptic_tube(fc, fam.r, 1, 1)
        else:
            fc = FramedCurve(space, curve, _frame, (1, -1), domain, {"family": fam.family})
            sp = hyperbolic_tube(fc, fam.r, 1, -1)
    elif fam.family == "H3Parabolic":
        mf = solve_frame_system(parabolic_frame_matrix(fam), np.eye(4), domain, 1, n_steps)

        def ev(u):
            F = mf(u)
            return F[:, 0], F[:, 2], F[:, 3]

        pd = ParabolicData(H3, 1, ev, domain, {"family": fam.family, "moving_frame": mf})
        sp = parabolic_tube(pd)
    else:
        F0 = np.zeros((4, 4))
        F0[1, 0] = F0[2, 1] = F0[3, 2] = F0[0, 3] = 1.0
        mf = solve_frame_system(hyperbolic_frame_matrix(fam), F0, domain, 1, n_steps)
        fc = framed_curve_from_moving_frame(mf, DS3, 0, (3, 2))
        sp = hyperbolic_tube(fc, fam.r, 1, 1)
    vdom = tuple(map(float, v_domain)) if v_domain is not None else sp.v_domain
    periodic = sp.v_periodic and v_domain is None
    sp = type(sp)(sp.space, sp.evaluate, domain, vdom, sp.declared_r, sp.declared_eps_p, sp.provenance, periodic, f"{fam.family} example", {"family": fam})
    _require_some_immersion(fam, sp)
    return sp


def _require_some_immersion(fam, sp, n=33):
    u = np.linspace(*sp.u_domain, n)
    v = np.linspace(*sp.v_domain, n)
    U, V = np.meshgrid(u, v, indexing="ij")
    k = closed_form_kappa1(fam, U, V)
    if np.all(np.isnan(k)):
        raise ImmersionViolation(f"{fam.family}: no immersion point in the requested domain")


def closed_form_kappa1(fam: ExampleFamily, u, v, tol=1e-12):
    """The family's formula for kappa1; NaN where the denominator vanishes."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    r = fam.r
    if fam.family == "E3Tube":
        h = np.asarray(fam.h(u), dtype=float) + 0 * u
        num, den = np.cos(v), h + r * np.cos(v)
    elif fam.family == "L3Tube":
        h = np.asarray(fam.h(u), dtype=float) + 0 * u
        num, den = np.cosh(v), h + r * np.cosh(v)
    elif fam.family == "H3Parabolic":
        a, b = (np.asarray(x, dtype=float) + 0 * u for x in fam.coeffs(u))
        den = 1 - a * v + (1 - b) * v * v / 2
        num = 1 - b
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 1 - num / den
        return np.where(np.abs(den) > tol, out, np.nan)
    else:
        h = np.asarray(fam.h(u), dtype=float) + 0 * u
        num, den = r * h + np.exp(v), h + r * np.exp(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(np.abs(den) > tol, out, np.nan)


def immersion_mask(fam, u, v):
    """True where the family's formulas describe an immersion."""
    return np.isfinite(closed_form_kappa1(fam, u, v))


def gal_formula(h_x, h_y, R, y):
    """Aledo-Galvez expression, evaluated with separate h(x) and h(y) inputs."""
    s = math.sqrt(1 - R * R)
    E = np.exp(s * y)
    return (h_y + R * (1 - R * R) * E) / (R * h_x + (1 - R * R) * E)


def moi_formula(h_tilde, r, v):
    return (r * h_tilde + np.exp(v)) / (h_tilde + r * np.exp(v))


def aledo_galvez_crosscheck(R=0.5, h=1.0, n=16, x_range=(-1.0, 1.0), y_range=(-2.0, 2.0)):
    """Compare the two kappa1 expressions under v = sqrt(1-R^2) y and r = 1/R.

    Both readings of the profile rescaling are reported: ``h~ = (1-R^2) h``
    and ``h~ = h / (1-R^2)``.  The profile is read as a function of one
    variable, so h(x) = h(y).
    """
    if not 0 < R < 1:
        raise ValueError("R must lie in (0, 1)")
    prof = h if callable(h) else (lambda x, c=float(h): c + 0 * np.asarray(x))
    x = np.linspace(*x_range, n)
    y = np.linspace(*y_range, n)
    X, Y = np.meshgrid(x, y, indexing="ij")
    hx = np.asarray(prof(X), dtype=float)
    gal = gal_formula(hx, hx, R, Y)
    v = math.sqrt(1 - R * R) * Y
    scaled = moi_formula((1 - R * R) * hx, 1 / R, v)
    divided = moi_formula(hx / (1 - R * R), 1 / R, v)
    return {
        "R": R,
        "grid": [n, n],
        "reading": "h(x) = h(y)",
        "max_discrepancy_h_tilde_divided": float(np.max(np.abs(divided - gal))),
        "max_discrepancy_h_tilde_scaled": float(np.max(np.abs(scaled - gal))),
    }
