"""Pseudo-Euclidean algebra on R^4_p and the six three-dimensional space forms.

Vectors are arrays whose *leading* axis has length 4; any trailing axes are
grid axes and broadcast.  Every function here also accepts
:class:`~tubeforms.hyperdual.HyperDual` vectors.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import hyperdual as hd
from .errors import DegenerateTangentPlane, FlatSpaceHasNoPolar, InadmissibleSpaceForm

ADMISSIBLE = {(0, 0), (1, 0), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)}

_NAMES = {
    (0, 0): "E3",
    (1, 0): "L3",
    (0, 1): "S3",
    (1, -1): "H3",
    (1, 1): "dS3",
    (2, -1): "AdS3",
    (2, 1): "AdS3~",
}

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class SpaceForm:
    """The hyperquadric Q^3_{p,eps} of R^4_p (the slice x4 = 0 when eps = 0)."""

    p: int
    eps: int

    def __post_init__(self):
        if (self.p, self.eps) not in ADMISSIBLE:
            raise InadmissibleSpaceForm(f"(p, eps) = ({self.p}, {self.eps}) is not a space form")

    @classmethod
    def named(cls, name):
        for key, val in _NAMES.items():
            if val.lower() == name.lower().replace("^", ""):
                return cls(*key)
        raise InadmissibleSpaceForm(f"unknown space form {name!r}")

    @property
    def name(self):
        return _NAMES[(self.p, self.eps)]

    @property
    def tilde(self):
        return (self.p, self.eps) == (2, 1)

    @property
    def signature(self):
        """(negative, positive) counts of the induced metric."""
        pp = self.p - 1 if self.eps == -1 else self.p
        return pp, 3 - pp

    @property
    def metric(self):
        return metric_diag(self.p)

    def __str__(self):
        return self.name


E3 = SpaceForm(0, 0)
L3 = SpaceForm(1, 0)
S3 = SpaceForm(0, 1)
H3 = SpaceForm(1, -1)
DS3 = SpaceForm(1, 1)
ADS3 = SpaceForm(2, -1)
ADS3_TILDE = SpaceForm(2, 1)
SPACE_FORMS = (E3, L3, S3, H3, DS3, ADS3, ADS3_TILDE)


@dataclass(frozen=True)
class NullCone:
    p: int

    def __post_init__(self):
        if self.p not in (1, 2):
            raise InadmissibleSpaceForm("null cones are only used for p in {1, 2}")

    @property
    def name(self):
        return f"NC{self.p}"

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool(abs(inner(x, x, self.p)) < tol and np.any(x != 0))


def metric_diag(p):
    return np.array([-1.0] * p + [1.0] * (4 - p))


def as_vec(x):
    x = np.asarray(x, dtype=float)
    if x.shape[:1] != (4,):
        raise ValueError(f"expected a vector of R^4, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite vector component")
    return x


def inner(x, y, p):
    """<x, y> = -sum_{i<=p} x_i y_i + sum_{i>p} x_i y_i."""
    out = 0.0
    for i in range(4):
        term = hd.mul(x[i], y[i])
        out = hd.sub(out, term) if i < p else hd.add(out, term)
    return out


def norm2(x, p):
    return inner(x, x, p)


def quadric_residual(x, Q):
    """||x||^2 - eps for eps = +-1, x4 for the flat slice; zero iff x lies on Q."""
    if Q.eps == 0:
        return x[3]
    return hd.sub(norm2(x, Q.p), float(Q.eps))


def polar_space(Q):
    if Q.eps == 0:
        raise FlatSpaceHasNoPolar(f"{Q.name} is flat and has no polar space")
    return SpaceForm(Q.p, -Q.eps)


def anti_isometry(x):
    """(x1, x2, x3, x4) -> (x3, x4, x1, x2); swaps Q^3_{2,1} and Q^3_{2,-1}."""
    return hd.stack([x[2], x[3], x[0], x[1]])


def _levi_civita():
    out = []
    for perm in permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        out.append((perm, -1.0 if inv % 2 else 1.0))
    return out


_LC = _levi_civita()


def cross3(x, a, b, p):
    """Generalised cross product n with <n, y> = det[y, x, a, b] for all y."""
    sig = metric_diag(p)
    comps = [0.0, 0.0, 0.0, 0.0]
    for (i, j, k, l), s in _LC:
        term = hd.mul(s * sig[i], hd.mul(x[j], hd.mul(a[k], b[l])))
        comps[i] = hd.add(comps[i], term)
    return hd.stack(comps)


def _slice_normal(like):
    shape = np.shape(hd.value(like))[1:]
    e4 = np.zeros((4,) + shape)
    e4[3] = 1.0
    return e4


def plane_degeneracy(a, b, p):
    """Scale-aware |det| of the Gram matrix of span{a, b}, and the cutoff it is compared to."""
    a0, b0 = hd.value(a), hd.value(b)
    gaa, gab, gbb = inner(a0, a0, p), inner(a0, b0, p), inner(b0, b0, p)
    det = gaa * gbb - gab * gab
    scale = np.sum(np.asarray(a0) ** 2, axis=0) * np.sum(np.asarray(b0) ** 2, axis=0)
    return np.abs(det), DEGENERACY_TOL * scale


def orthocomplement_raw(x, a, b, Q):
    """Unchecked version of :func:`metric_orthocomplement` (vectorised, hyper-dual safe)."""
    anchor = x if Q.eps != 0 else _slice_normal(a)
    return cross3(anchor, a, b, Q.p)


def metric_orthocomplement(x, a, b, Q):
    """Vector orthogonal to a, b (and to x when eps != 0) inside T_x Q.

    Orientation reduces to the right-handed cross product in E^3.
    """
    det, cut = plane_degeneracy(a, b, Q.p)
    if np.any(det <= cut):
        raise DegenerateTangentPlane("span{a, b} is degenerate or dependent")
    return orthocomplement_raw(x, a, b, Q)


def normal_projector_basis(point, tangent, Q):
    """Vectors spanning the metric complement of the normal space at ``point``.

    For eps != 0 this is {tangent, point}; in flat slices it is {tangent, e4}.
    """
    other = point if Q.eps != 0 else np.eye(4)[3]
    return [np.asarray(tangent, dtype=float), np.asarray(other, dtype=float)]


def project_out(v, basis, p):
    """Remove from v its components along a nondegenerate basis (metric projection)."""
    W = np.stack(basis, axis=1)  # 4 x k
    eta = metric_diag(p)
    gram = W.T @ (eta[:, None] * W)
    coef = np.linalg.solve(gram, W.T @ (eta * v))
    return v - W @ coef


def gram_schmidt(vectors, signature, p, tol=1e-10):
    """Metric Gram-Schmidt producing vectors of the requested norms.

    Slots are filled in order of ``signature`` with timelike (-1) slots
    first; each slot takes the first candidate (after orthogonalisation)
    of the right causal sign.  Returns ``None`` if some slot cannot be filled.
    """
    order = sorted(range(len(signature)), key=lambda i: signature[i])
    out = [None] * len(signature)
    chosen = []
    for slot in order:
        want = signature[slot]
        for v in vectors:
            w = np.array(v, dtype=float)
            for c in chosen:
                w = w - inner(w, c, p) / inner(c, c, p) * c
            n2 = inner(w, w, p)
            if np.sign(n2) == want and abs(n2) > tol * max(1.0, float(np.dot(w, w))):
                w = w / np.sqrt(abs(n2))
                chosen.append(w)
                out[slot] = w
                break
        else:
            return None
    return out
