"""Safe arithmetic expressions in one variable ``t``.

Grammar: numbers, ``t``, ``pi``, ``e``, binary ``+ - * / ^`` (``**`` also
accepted), unary ``+``/``-``, parentheses, and the calls ``exp(.)`` and
``sqrt(.)``. Anything else is rejected before evaluation. Expressions are
parsed with :mod:`ast` and walked by a tiny interpreter; :func:`eval` is
never used.
"""

from __future__ import annotations

import ast
import math
import operator

import numpy as np

from .errors import ConfigurationError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"exp": np.exp, "sqrt": np.sqrt}
_CONSTS = {"pi": math.pi, "e": math.e}


def _check(node):
    if isinstance(node, ast.Expression):
        _check(node.body)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ConfigurationError(f"operator {type(node.op).__name__} not allowed")
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp):
        if type(node.op) not in _UNARY:
            raise ConfigurationError(f"unary operator {type(node.op).__name__} not allowed")
        _check(node.operand)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ConfigurationError("only exp(...) and sqrt(...) calls are allowed")
        if len(node.args) != 1 or node.keywords:
            raise ConfigurationError(f"{node.func.id} takes exactly one argument")
        _check(node.args[0])
    elif isinstance(node, ast.Name):
        if node.id != "t" and node.id not in _CONSTS:
            raise ConfigurationError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ConfigurationError(f"constant {node.value!r} is not a real number")
    else:
        raise ConfigurationError(f"syntax {type(node).__name__} not allowed")


def _eval(node, t):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, t), _eval(node.right, t))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, t))
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](_eval(node.args[0], t))
    if isinstance(node, ast.Name):
        return t if node.id == "t" else _CONSTS[node.id]
    return float(node.value)


class Expression:
    """A compiled expression, callable on scalars or numpy arrays of t."""

    def __init__(self, source):
        self.source = source
        text = source.replace("^", "**")
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as exc:
            raise ConfigurationError(f"cannot parse expression {source!r}: {exc.msg}") from None
        _check(tree)
        self._body = tree.body

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = _eval(self._body, t_arr)
        out = np.broadcast_to(np.asarray(out, dtype=float), t_arr.shape)
        return float(out) if out.ndim == 0 else np.array(out)

    def __repr__(self):
        return f"Expression({self.source!r})"


def parse(source):
    return Expression(source)
