"""Second-order hyper-dual numbers with nesting.

A :class:`HyperDual` carries ``re + e1*E1 + e2*E2 + e12*E1E2`` with
``E1**2 == E2**2 == 0``.  Components are numpy arrays (vectorised over
grids and a leading vector/matrix axis) or, recursively, hyper-duals of an
older tag.  Tags let independent perturbations be stacked: a number
created later (larger tag) treats every lower-tag value as a constant, so
``f(x + E)`` with ``x`` already hyper-dual differentiates ``f`` along ``E``
while keeping ``x``'s own perturbations intact.

Plain python scalars equal to zero are structural zeros and are skipped.
"""

import itertools
import operator

import numpy as np

_tags = itertools.count(1)


def new_tag():
    return next(_tags)


def _is_zero(c):
    return isinstance(c, (int, float)) and not isinstance(c, bool) and c == 0


class HyperDual:
    __slots__ = ("re", "e1", "e2", "e12", "tag")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, re, e1=0.0, e2=0.0, e12=0.0, tag=None):
        self.re = re
        self.e1 = e1
        self.e2 = e2
        self.e12 = e12
        self.tag = new_tag() if tag is None else tag

    def __repr__(self):
        return f"HyperDual({self.re!r}, {self.e1!r}, {self.e2!r}, {self.e12!r}, tag={self.tag})"

    def parts(self):
        return self.re, self.e1, self.e2, self.e12

    def nilpotent(self):
        """The perturbation ``self - self.re`` (same tag)."""
        return HyperDual(0.0, self.e1, self.e2, self.e12, self.tag)

    def __getitem__(self, key):
        return HyperDual(*(_index(c, key) for c in self.parts()), tag=self.tag)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, recip(other))

    def __rtruediv__(self, other):
        return mul(other, recip(self))

    def __neg__(self):
        return HyperDual(*(neg(c) for c in self.parts()), tag=self.tag)

    def __pos__(self):
        return self

    def __pow__(self, n):
        return power(self, n)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)


def _tag(x):
    return x.tag if isinstance(x, HyperDual) else 0


def _index(c, key):
    if isinstance(c, HyperDual):
        return c[key]
    if np.ndim(c) == 0:
        return c
    return c[key]


def value(x):
    """Strip every perturbation, returning the plain real part."""
    while isinstance(x, HyperDual):
        x = x.re
    return x


def neg(x):
    if _is_zero(x):
        return 0.0
    return -x


def _linear(op, x, y):
    tx, ty = _tag(x), _tag(y)
    if tx == 0 and ty == 0:
        if _is_zero(x) and op is operator.add:
            return y
        if _is_zero(y):
            return x
        if _is_zero(x):
            return neg(y)
        return op(x, y)
    if tx == ty:
        return HyperDual(*(_linear(op, a, b) for a, b in zip(x.parts(), y.parts())), tag=tx)
    if tx > ty:
        return HyperDual(_linear(op, x.re, y), x.e1, x.e2, x.e12, tag=tx)
    pre = (lambda c: c) if op is operator.add else neg
    return HyperDual(_linear(op, x, y.re), pre(y.e1), pre(y.e2), pre(y.e12), tag=ty)


def add(x, y):
    return _linear(operator.add, x, y)


def sub(x, y):
    return _linear(operator.sub, x, y)


def _bilinear(op, x, y):
    if _is_zero(x) or _is_zero(y):
        return 0.0
    tx, ty = _tag(x), _tag(y)
    if tx == 0 and ty == 0:
        return op(x, y)
    f = lambda a, b: _bilinear(op, a, b)  # noqa: E731
    if tx == ty:
        return HyperDual(
            f(x.re, y.re),
            add(f(x.re, y.e1), f(x.e1, y.re)),
            add(f(x.re, y.e2), f(x.e2, y.re)),
            add(add(f(x.re, y.e12), f(x.e12, y.re)), add(f(x.e1, y.e2), f(x.e2, y.e1))),
            tag=tx,
        )
    if tx > ty:
        return HyperDual(*(f(c, y) for c in x.parts()), tag=tx)
    return HyperDual(*(f(x, c) for c in y.parts()), tag=ty)


def _mul_leaf(x, y):
    return np.multiply(x, y)


def mul(x, y):
    return _bilinear(_mul_leaf, x, y)


def _matmul_leaf(a, b):
    # leading two axes are the matrix axes; the rest broadcast
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError("matmul operands need two leading matrix axes")
    return np.einsum("ik...,kj...->ij...", a, b)


def matmul(x, y):
    """Matrix product over the two leading axes, broadcasting the trailing ones."""
    return _bilinear(_matmul_leaf, x, y)


def _unary(x, derivs):
    """Lift a scalar function given ``derivs(a) -> (f, f', f'')``."""
    if not isinstance(x, HyperDual):
        return derivs(x)[0]
    f0, f1, f2 = derivs(x.re)
    return HyperDual(
        f0,
        mul(f1, x.e1),
        mul(f1, x.e2),
        add(mul(f1, x.e12), mul(f2, mul(x.e1, x.e2))),
        tag=x.tag,
    )


def _plain(x):
    return not isinstance(x, HyperDual)


def recip(x):
    def d(a):
        if _plain(a):
            r = 1.0 / np.asarray(a, dtype=float) if np.ndim(a) else 1.0 / a
            return r, -r * r, 2.0 * r * r * r
        r = recip(a)
        r2 = mul(r, r)
        return r, neg(r2), mul(2.0, mul(r2, r))

    return _unary(x, d)


def sin(x):
    def d(a):
        s, c = sin(a), cos(a)
        return s, c, neg(s)

    return _unary(x, d) if isinstance(x, HyperDual) else np.sin(x)


def cos(x):
    def d(a):
        s, c = sin(a), cos(a)
        return c, neg(s), neg(c)

    return _unary(x, d) if isinstance(x, HyperDual) else np.cos(x)


def sinh(x):
    def d(a):
        s, c = sinh(a), cosh(a)
        return s, c, s

    return _unary(x, d) if isinstance(x, HyperDual) else np.sinh(x)


def cosh(x):
    def d(a):
        s, c = sinh(a), cosh(a)
        return c, s, c

    return _unary(x, d) if isinstance(x, HyperDual) else np.cosh(x)


def exp(x):
    def d(a):
        e = exp(a)
        return e, e, e

    return _unary(x, d) if isinstance(x, HyperDual) else np.exp(x)


def log(x):
    def d(a):
        r = recip(a)
        return log(a), r, neg(mul(r, r))

    return _unary(x, d) if isinstance(x, HyperDual) else np.log(x)


def sqrt(x):
    def d(a):
        s = sqrt(a)
        r = recip(s)
        return s, mul(0.5, r), mul(-0.25, mul(r, mul(r, r)))

    return _unary(x, d) if isinstance(x, HyperDual) else np.sqrt(x)


def tan(x):
    return mul(sin(x), recip(cos(x)))


def tanh(x):
    return mul(sinh(x), recip(cosh(x)))


def arctan(x):
    def d(a):
        q = recip(add(1.0, mul(a, a)))
        return arctan(a), q, mul(-2.0, mul(a, mul(q, q)))

    return _unary(x, d) if isinstance(x, HyperDual) else np.arctan(x)


def power(x, n):
    if isinstance(n, int) and n >= 0:
        out = 1.0
        for _ in range(n):
            out = mul(out, x)
        return out

    def d(a):
        return power(a, n), mul(n, power(a, n - 1)), mul(n * (n - 1), power(a, n - 2))

    return _unary(x, d) if isinstance(x, HyperDual) else np.power(x, n)


def absolute(x):
    """|x| through the sign of the real part (undefined at zero)."""
    return mul(np.sign(value(x)), x)


def where(mask, x, y):
    """Branch selection by a real-valued mask, component by component."""
    tx, ty = _tag(x), _tag(y)
    if tx == 0 and ty == 0:
        return np.where(mask, x, y)
    t = max(tx, ty)
    xp = x.parts() if tx == t else (x, 0.0, 0.0, 0.0)
    yp = y.parts() if ty == t else (y, 0.0, 0.0, 0.0)
    return HyperDual(*(where(mask, a, b) for a, b in zip(xp, yp)), tag=t)


def _shape(x):
    if isinstance(x, HyperDual):
        return np.broadcast_shapes(*(_shape(c) for c in x.parts()))
    return np.shape(x)


def stack(items):
    """Stack scalars/hyper-duals along a new leading axis, broadcasting shapes."""
    items = list(items)
    t = max(_tag(i) for i in items)
    if t == 0:
        arrs = np.broadcast_arrays(*[np.asarray(i, dtype=float) for i in items])
        return np.stack(arrs)
    shape = np.broadcast_shapes(*(_shape(i) for i in items))
    cols = []
    for i in items:
        cols.append(i.parts() if _tag(i) == t else (i, 0.0, 0.0, 0.0))
    out = []
    for k in range(4):
        comps = [c[k] for c in cols]
        if all(_is_zero(c) for c in comps):
            out.append(0.0)
            continue
        comps = [np.zeros(shape) if _is_zero(c) else c for c in comps]
        comps = [c if isinstance(c, HyperDual) else np.broadcast_to(np.asarray(c, dtype=float), shape) for c in comps]
        out.append(stack(comps))
    return HyperDual(*out, tag=t)


def total(x, axis=0):
    """Sum over an axis of every component."""
    if isinstance(x, HyperDual):
        return HyperDual(*(total(c, axis) if not _is_zero(c) else 0.0 for c in x.parts()), tag=x.tag)
    return np.sum(x, axis=axis)


def seed(x, d1=0.0, d2=0.0, d12=0.0):
    """Fresh perturbation of ``x`` with a new tag."""
    return HyperDual(x, d1, d2, d12, tag=new_tag())


def jet(f, x):
    """Return ``(f(x), f'(x), f''(x))`` for a liftable scalar-argument ``f``.

    ``x`` may itself be hyper-dual; the derivatives are then hyper-dual in
    ``x``'s perturbations.
    """
    t = new_tag()
    y = f(HyperDual(x, 1.0, 1.0, 0.0, tag=t))
    if not isinstance(y, HyperDual) or y.tag != t:
        return y, 0.0, 0.0
    return y.re, y.e1, y.e12


def primitive(F, f, x):
    """Evaluate an antiderivative ``F`` whose derivative ``f`` is liftable.

    ``F`` is only ever called on plain arrays; derivatives come from ``f`` so
    they are exact even if ``F`` itself is computed by quadrature.
    """
    if not isinstance(x, HyperDual):
        return F(x)
    base = primitive(F, f, x.re)
    fa, fpa, _ = jet(f, x.re)
    return HyperDual(
        base,
        mul(fa, x.e1),
        mul(fa, x.e2),
        add(mul(fa, x.e12), mul(fpa, mul(x.e1, x.e2))),
        tag=x.tag,
    )


def _expand(c, extra):
    if isinstance(c, HyperDual):
        return HyperDual(*(_expand(k, extra) for k in c.parts()), tag=c.tag)
    if _is_zero(c) or np.ndim(c) == 0:
        return c
    return np.reshape(c, np.shape(c) + (1,) * extra)


def scale(s, x):
    """Scalar field ``s`` (grid shape) times vector ``x`` (leading axis 4).

    A vector without grid axes (a constant) is broadcast over the grid.
    """
    missing = len(_shape(s)) - (len(_shape(x)) - 1)
    if missing > 0:
        x = _expand(x, missing)
    return mul(s, x)


def align(x, like):
    """Give vector ``x`` the trailing grid axes of ``like`` (size-one axes)."""
    missing = len(_shape(like)) - len(_shape(x))
    return _expand(x, missing) if missing > 0 else x
