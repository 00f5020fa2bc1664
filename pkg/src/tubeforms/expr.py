"""Tiny safe compiler for the closed-form expressions used in scene files.

Only arithmetic, numeric literals, the names ``u``, ``pi``, ``e``, user
parameters and a fixed set of functions are accepted; everything compiles
to hyper-dual aware callables.
"""

import ast
import math

from . import hyperdual as hd
from .errors import SceneError

FUNCTIONS = {
    "sin": hd.sin,
    "cos": hd.cos,
    "tan": hd.tan,
    "sinh": hd.sinh,
    "cosh": hd.cosh,
    "tanh": hd.tanh,
    "exp": hd.exp,
    "log": hd.log,
    "sqrt": hd.sqrt,
    "arctan": hd.arctan,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


def _compile(node, params, var):
    # compiled nodes take a tuple of argument values
    if isinstance(node, ast.Expression):
        return _compile(node.body, params, var)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        c = float(node.value)
        return lambda u: c
    if isinstance(node, ast.Name):
        if node.id in var:
            i = var.index(node.id)
            return lambda u: u[i]
        if node.id in params:
            c = float(params[node.id])
            return lambda u: c
        if node.id in CONSTANTS:
            c = CONSTANTS[node.id]
            return lambda u: c
        raise SceneError(f"unknown name {node.id!r} in expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        f = _compile(node.operand, params, var)
        if isinstance(node.op, ast.USub):
            return lambda u: hd.neg(f(u))
        return f
    if isinstance(node, ast.BinOp):
        a = _compile(node.left, params, var)
        b = _compile(node.right, params, var)
        if isinstance(node.op, ast.Add):
            return lambda u: hd.add(a(u), b(u))
        if isinstance(node.op, ast.Sub):
            return lambda u: hd.sub(a(u), b(u))
        if isinstance(node.op, ast.Mult):
            return lambda u: hd.mul(a(u), b(u))
        if isinstance(node.op, ast.Div):
            return lambda u: hd.mul(a(u), hd.recip(b(u)))
        if isinstance(node.op, ast.Pow):
            if isinstance(node.right, ast.Constant) and float(node.right.value).is_integer():
                n = int(node.right.value)
                if n >= 0:
                    return lambda u: hd.power(a(u), n)
            return lambda u: hd.exp(hd.mul(b(u), hd.log(a(u))))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        fn = FUNCTIONS.get(node.func.id)
        if fn is None or len(node.args) != 1:
            raise SceneError(f"unsupported function call {node.func.id!r}")
        arg = _compile(node.args[0], params, var)
        return lambda u: fn(arg(u))
    raise SceneError(f"unsupported expression element {ast.dump(node)[:60]}")


def compile_expr(source, params=None, var="u"):
    """Compile ``source`` into a callable of the variable(s) named by ``var``.

    ``var`` is a name (one-argument callable) or a tuple of names.
    """
    names = (var,) if isinstance(var, str) else tuple(var)
    if isinstance(source, (int, float)):
        c = float(source)
        return lambda *args: c
    try:
        tree = ast.parse(str(source), mode="eval")
    except SyntaxError as exc:
        raise SceneError(f"cannot parse expression {source!r}: {exc.msg}") from None
    f = _compile(tree, dict(params or {}), names)
    return lambda *args: f(args)
