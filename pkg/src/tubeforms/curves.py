"""Framed generating curves.

A curve is any callable ``u -> point`` that accepts plain arrays or
hyper-duals and returns a vector with leading axis 4.  Frames come either
from closed forms or from integrating a linear ODE (parallel transport in
the normal bundle, or a moving-frame system ``F' = F M``).

ODE frames are sampled with fixed-step RK4 and re-orthonormalised at every
node.  Evaluating them at a hyper-dual argument takes one further RK4 step
whose step size is the *nilpotent* part of the argument; RK4 matches the
flow's Taylor series through fourth order, so that step is exact in the
hyper-dual algebra and the frame's derivatives are those of the ODE itself.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import hyperdual as hd
from .ambient import SpaceForm, gram_schmidt, inner, metric_diag, project_out, quadric_residual
from .errors import FrameSignatureUnavailable, NotInLieAlgebra, OutOfDomain, RegularityLoss
from .expr import compile_expr

DEFAULT_STEPS = 8192
FRAME_TOL = 1e-9

SIGNATURES = ((1, 1), (-1, 1), (1, -1), (-1, -1))


# ---------------------------------------------------------------------------
# curves


class ExprCurve:
    """Closed-form curve from four coordinate expressions in ``u``."""

    def __init__(self, components, params=None, space=None):
        if len(components) != 4:
            raise ValueError("a curve needs exactly four coordinate expressions")
        self.components = list(components)
        self.params = dict(params or {})
        self.space = space
        self._fns = [compile_expr(c, self.params) for c in self.components]

    def __call__(self, u):
        return hd.stack([f(u) for f in self._fns])

    def __repr__(self):
        return f"ExprCurve({self.components!r})"


class SplineCurve:
    """Cubic-spline curve through samples ``(u_k, x_k)``.

    Evaluation is exact for the spline (third derivative piecewise
    constant).  With ``space`` given, points are pushed back onto the quadric
    (radial rescaling) or onto the slice x4 = 0.
    """

    def __init__(self, u, points, space=None):
        u = np.asarray(u, dtype=float)
        points = np.asarray(points, dtype=float)
        if points.shape != (u.size, 4):
            raise ValueError("samples must have shape (n, 4)")
        self.u = u
        self.space = space
        self._spline = CubicSpline(u, points, axis=0)

    def __call__(self, x):
        c = self._spline.c  # (4, n-1, 4 coords)
        x0 = np.asarray(hd.value(x), dtype=float)
        k = np.clip(np.searchsorted(self.u, x0, side="right") - 1, 0, self.u.size - 2)
        s = hd.sub(x, self.u[k])
        coef = np.moveaxis(c[:, k], -1, 1)  # (power, coord, *shape)
        out = coef[0]
        for j in range(1, 4):
            out = hd.add(hd.mul(out, s), coef[j])
        if self.space is None:
            return out
        if self.space.eps == 0:
            return hd.stack([out[0], out[1], out[2], 0.0 * hd.value(out[3])])
        n2 = inner(out, out, self.space.p)
        return hd.mul(out, hd.recip(hd.sqrt(hd.mul(float(self.space.eps), n2))))

    @classmethod
    def from_text(cls, text, space=None):
        rows = np.loadtxt(text.splitlines() if isinstance(text, str) else text, ndmin=2)
        return cls(rows[:, 0], rows[:, 1:5], space)


@dataclass(frozen=True)
class CurveJet:
    point: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray = None


def curve_jet(curve, u, third=False):
    g, g1, g2 = hd.jet(curve, u)
    g3 = None
    if third:
        g3 = hd.jet(lambda t: hd.jet(curve, t)[2], u)[1]
    return CurveJet(g, g1, g2, g3)


# ---------------------------------------------------------------------------
# linear ODE flows


def _outer(a, b, scale):
    rows = [hd.stack([hd.mul(scale[j], hd.mul(a[i], b[j])) for j in range(4)]) for i in range(4)]
    return hd.stack(rows)


def _apply(side, C, Y):
    if side == "left":
        return hd.matmul(C, Y)
    return hd.matmul(Y, C)


def _rk4(side, coeff, u, Y, h):
    half = hd.mul(0.5, h)
    um = hd.add(u, half)
    ue = hd.add(u, h)
    Cm = coeff(um)
    k1 = _apply(side, coeff(u), Y)
    k2 = _apply(side, Cm, hd.add(Y, hd.mul(half, k1)))
    k3 = _apply(side, Cm, hd.add(Y, hd.mul(half, k2)))
    k4 = _apply(side, coeff(ue), hd.add(Y, hd.mul(h, k3)))
    incr = hd.add(hd.add(k1, k4), hd.mul(2.0, hd.add(k2, k3)))
    return hd.add(Y, hd.mul(hd.mul(h, 1.0 / 6.0), incr))


class LinearFlow:
    """Sampled solution of ``Y' = C(u) Y`` (side='left') or ``Y' = Y C(u)`` (side='right')."""

    def __init__(self, coeff, side, Y0, domain, n_steps=None):
        self.coeff = coeff
        self.side = side
        u0, u1 = map(float, domain)
        self.domain = (u0, u1)
        n = int(n_steps or DEFAULT_STEPS)
        self.nodes = np.linspace(u0, u1, n + 1)
        self.step = (u1 - u0) / n
        half = np.linspace(u0, u1, 2 * n + 1)
        C = np.asarray(coeff(half), dtype=float)
        Ys = np.empty((n + 1,) + np.shape(Y0))
        Ys[0] = Y0
        Y = np.asarray(Y0, dtype=float)
        h = self.step
        for k in range(n):
            c0, cm, c1 = C[..., 2 * k], C[..., 2 * k + 1], C[..., 2 * k + 2]
            mul = (lambda c, y: c @ y) if side == "left" else (lambda c, y: y @ c)
            k1 = mul(c0, Y)
            k2 = mul(cm, Y + 0.5 * h * k1)
            k3 = mul(cm, Y + 0.5 * h * k2)
            k4 = mul(c1, Y + h * k3)
            Y = Y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            Ys[k + 1] = Y
        self.samples = Ys

    def __call__(self, x):
        if isinstance(x, hd.HyperDual):
            base = self(x.re)
            return _rk4(self.side, self.coeff, x.re, base, x.nilpotent())
        x = np.asarray(x, dtype=float)
        u0, u1 = self.domain
        if np.any(x < u0 - self.step) or np.any(x > u1 + self.step):
            raise OutOfDomain(f"u outside the integrated interval [{u0}, {u1}]")
        k = np.clip(np.rint((x - u0) / self.step).astype(int), 0, self.nodes.size - 1)
        s = x - self.nodes[k]
        Y0 = np.moveaxis(self.samples[k], (-2, -1), (0, 1)) if x.ndim else self.samples[k]
        # no projection anywhere: RK4 keeps the frame orthonormal to ~1e-10, while
        # Gram-Schmidt would make the samples jump by more than that between cells
        return _rk4(self.side, self.coeff, self.nodes[k], Y0, s)


# ---------------------------------------------------------------------------
# framed curves


@dataclass(frozen=True)
class FramedCurve:
    """u -> (gamma, e1, e2) with (e1, e2) an orthonormal normal frame."""

    space: SpaceForm
    curve: object
    frame: object
    signature: tuple
    domain: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if tuple(self.signature) not in SIGNATURES:
            raise FrameSignatureUnavailable(f"unsupported frame signature {self.signature}")

    def evaluate(self, u):
        e1, e2 = self.frame(u)
        return self.curve(u), e1, e2

    def vertices(self, u, tol=1e-10):
        """Mask of parameters where gamma' vanishes."""
        g1 = np.asarray(hd.jet(self.curve, np.asarray(u, dtype=float))[1])
        return np.sqrt(np.sum(g1**2, axis=0)) < tol


@dataclass(frozen=True)
class ParabolicData:
    """u -> (delta_plus, delta_minus, e1) generating a parabolic tube."""

    space: SpaceForm
    eps_pp: int
    evaluate: object
    domain: tuple
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def space_minus(self):
        return SpaceForm(self.space.p, -self.space.eps)

    def swapped(self):
        """Data with delta_plus and delta_minus exchanged (generates the polar)."""

        def ev(u):
            dp, dm, e1 = self.evaluate(u)
            return dm, dp, e1

        return ParabolicData(self.space_minus, self.eps_pp, ev, self.domain, dict(self.meta))


def normal_space_basis(curve, Q, u0):
    """Two vectors spanning the normal space of the curve at u0 (inside T Q)."""
    g, g1, _ = hd.jet(curve, np.asarray(float(u0)))
    g, g1 = np.asarray(g, dtype=float), np.asarray(g1, dtype=float)
    speed = np.linalg.norm(g1)
    if speed < 1e-12:
        raise RegularityLoss(f"curve is singular at u = {u0}")
    if abs(inner(g1, g1, Q.p)) < 1e-12 * speed**2:
        raise RegularityLoss(f"curve is lightlike at u = {u0}; its normal bundle is degenerate")
    basis = [g1, g if Q.eps != 0 else np.eye(4)[3]]
    cands = [project_out(e, basis, Q.p) for e in np.eye(4)]
    cands += [project_out(a + b, basis, Q.p) for i, a in enumerate(np.eye(4)) for b in np.eye(4)[i + 1 :]]
    return cands


def initial_normal_frame(curve, Q, u0, signature, seed=None):
    cands = normal_space_basis(curve, Q, u0)
    if seed is not None:
        g, g1, _ = hd.jet(curve, np.asarray(float(u0)))
        basis = [np.asarray(g1), np.asarray(g) if Q.eps != 0 else np.eye(4)[3]]
        cands = [project_out(np.asarray(seed, dtype=float), basis, Q.p)] + cands
    frame = gram_schmidt(cands, signature, Q.p)
    if frame is None:
        raise FrameSignatureUnavailable(f"normal bundle at u = {u0} admits no frame of signature {tuple(signature)}")
    return frame


def transport_normal_frame(curve, Q, initial_frame=None, domain=(0.0, 1.0), signature=(1, 1), n_steps=None, seed=None):
    """Parallel-transport a normal frame along ``curve`` in the space form ``Q``.

    Normal parallel transport solves e' = -<e, gamma''> / <gamma', gamma'> gamma'.
    """
    signature = tuple(int(s) for s in signature)
    if tuple(signature) not in SIGNATURES:
        raise FrameSignatureUnavailable(f"unsupported frame signature {signature}")
    u0, u1 = map(float, domain)
    if initial_frame is None:
        initial_frame = initial_normal_frame(curve, Q, u0, signature, seed)
    e1, e2 = (np.asarray(e, dtype=float) for e in initial_frame)
    for e, s in zip((e1, e2), signature):
        if abs(inner(e, e, Q.p) - s) > FRAME_TOL:
            raise FrameSignatureUnavailable("initial frame does not have the requested signature")
    p = Q.p
    eta = metric_diag(p)

    def coeff(u):
        _, g1, g2 = hd.jet(curve, u)
        q = inner(g1, g1, p)
        return hd.mul(_outer(g1, g2, -eta), hd.recip(q))

    n = int(n_steps or DEFAULT_STEPS)
    nodes = np.linspace(u0, u1, n + 1)
    _, g1n, _ = hd.jet(curve, nodes)
    speed = np.sqrt(np.sum(np.asarray(g1n) ** 2, axis=0))
    if np.any(speed < 1e-10):
        bad = nodes[np.argmin(speed)]
        raise RegularityLoss(f"gamma' vanishes near u = {bad:.6g}; transport cannot cross a vertex")
    if np.any(np.abs(inner(g1n, g1n, p)) < 1e-10 * speed**2):
        raise RegularityLoss("curve becomes lightlike; the normal bundle degenerates")

    flow = LinearFlow(coeff, "left", np.stack([e1, e2], axis=1), (u0, u1), n)

    def frame(u):
        Y = flow(u)
        return Y[:, 0], Y[:, 1]

    return FramedCurve(Q, curve, frame, signature, (u0, u1), {"method": "transport", "flow": flow})


def lie_residual(M, G):
    """max |M^T G + G M| for the metric Gram matrix G of the moving frame."""
    M = np.asarray(M, dtype=float)
    Mm = np.moveaxis(M, (0, 1), (-2, -1))
    R = np.swapaxes(Mm, -1, -2) @ G + G @ Mm
    return float(np.max(np.abs(R)))


@dataclass(frozen=True)
class MovingFrame:
    """Solution u -> F(u) of F^{-1} F' = M(u); the columns of F are the frame vectors."""

    flow: LinearFlow
    p: int
    norms: tuple

    def __call__(self, u):
        return self.flow(u)

    @property
    def domain(self):
        return self.flow.domain

    def column(self, j):
        return lambda u: self.flow(u)[:, j]


def solve_frame_system(M, F0, domain, p, n_steps=None, tol=1e-10):
    """Integrate F' = F M(u) from F(u0) = F0 (columns orthonormal in R^4_p).

    ``M`` maps u (array or hyper-dual) to a (4, 4, ...) array.
    """
    F0 = np.asarray(F0, dtype=float)
    eta = metric_diag(p)
    gram = F0.T @ (eta[:, None] * F0)
    norms = np.diag(gram)
    if np.max(np.abs(gram - np.diag(np.sign(norms)))) > 1e-9:
        raise NotInLieAlgebra("initial frame is not orthonormal")
    norms = tuple(int(s) for s in np.sign(norms))
    G = np.diag(norms).astype(float)
    u0, u1 = map(float, domain)
    probe = np.linspace(u0, u1, 33)
    if lie_residual(M(probe), G) > tol:
        raise NotInLieAlgebra("M(u) does not preserve the frame's metric")
    flow = LinearFlow(M, "right", F0, (u0, u1), n_steps)
    return MovingFrame(flow, p, norms)


def framed_curve_from_moving_frame(mf, space, curve_col=0, frame_cols=(2, 3)):
    sig = (mf.norms[frame_cols[0]], mf.norms[frame_cols[1]])

    def frame(u):
        F = mf(u)
        return F[:, frame_cols[0]], F[:, frame_cols[1]]

    return FramedCurve(space, mf.column(curve_col), frame, sig, mf.domain, {"method": "frame-system", "moving_frame": mf})


def parabolic_from_transport(curve, Q, eps_pp, domain, n_steps=None, seed=None):
    """Parabolic data from a regular curve delta_plus in Q and a parallel frame (delta_minus, e1)."""
    fc = transport_normal_frame(curve, Q, None, domain, (-Q.eps, eps_pp), n_steps, seed)

    def ev(u):
        dm, e1 = fc.frame(u)
        return curve(u), dm, e1

    return ParabolicData(Q, int(eps_pp), ev, fc.domain, {"method": "transport", "framed": fc})


# ---------------------------------------------------------------------------
# residuals


def _value_and_slope(x):
    """(value, first derivative) of a hyper-dual result; constants have zero slope."""
    if isinstance(x, hd.HyperDual):
        val = np.asarray(hd.value(x.re), dtype=float)
        # an identically zero part is stored as a scalar
        return val, np.broadcast_to(np.asarray(hd.value(x.e1), dtype=float), val.shape)
    x = np.asarray(x, dtype=float)
    return x, np.zeros_like(x)


def frame_residuals(obj, u):
    """Deviation of every framing invariant at ``u`` (dict of floats)."""
    u = np.asarray(float(u))
    if isinstance(obj, ParabolicData):
        Q = obj.space
        p, e = Q.p, Q.eps
        t = hd.new_tag()
        dp, dm, e1 = obj.evaluate(hd.HyperDual(u, 1.0, 0.0, 0.0, tag=t))
        P, Pp = _value_and_slope(dp)
        D, Dp = _value_and_slope(dm)
        A, _ = _value_and_slope(e1)
        vals = {
            "delta_plus_norm": inner(P, P, p) - e,
            "delta_minus_norm": inner(D, D, p) + e,
            "delta_cross": inner(P, D, p),
            "delta_plus_prime_minus": inner(Pp, D, p),
            "delta_minus_prime_plus": inner(Dp, P, p),
            "e1_norm": inner(A, A, p) - obj.eps_pp,
            "e1_delta_plus": inner(A, P, p),
            "e1_delta_minus": inner(A, D, p),
            "e1_delta_plus_prime": inner(A, Pp, p),
            "e1_delta_minus_prime": inner(A, Dp, p),
        }
        return {k: float(abs(v)) for k, v in vals.items()}
    Q = obj.space
    p = Q.p
    t = hd.new_tag()
    G, G1 = _value_and_slope(obj.curve(hd.HyperDual(u, 1.0, 0.0, 0.0, tag=t)))
    e1, e2 = (np.asarray(hd.value(x)) for x in obj.frame(u))
    s1, s2 = obj.signature
    vals = {
        "curve_quadric": quadric_residual(G, Q),
        "e1_tangent": inner(e1, G1, p),
        "e2_tangent": inner(e2, G1, p),
        "e1_e2": inner(e1, e2, p),
        "e1_norm": inner(e1, e1, p) - s1,
        "e2_norm": inner(e2, e2, p) - s2,
    }
    if Q.eps != 0:
        vals["e1_position"] = inner(e1, G, p)
        vals["e2_position"] = inner(e2, G, p)
    else:
        vals["e1_slice"] = e1[3]
        vals["e2_slice"] = e2[3]
    return {k: float(abs(v)) for k, v in vals.items()}
