"""Closed-form expression grammar for distance and control functions.

Every analytic space in this package stores its distance and control
functions as plain text in a deliberately small expression language:
the variables ``x`` and ``y`` (just ``x`` for self-maps), named real
parameters, numeric literals, the operators ``+ - * / **`` with unary
minus, and the calls ``abs(e)``, ``max(e1, e2)``, ``min(e1, e2)``.
That is enough for absolute differences, maxima/minima, powers, and
affine or rational combinations while keeping evaluation total,
deterministic, and safe on untrusted input.

Sources are parsed with :mod:`ast`, validated node by node against the
whitelist above, and compiled once.  Evaluation accepts scalars or numpy
arrays: ``max``/``min`` are bound to ``numpy.maximum``/``numpy.minimum``,
so grid evaluation broadcasts without any per-pair Python loop.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import ExpressionError

_ALLOWED_CALLS = {"abs": 1, "max": 2, "min": 2}
_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_ALLOWED_UNARYOPS = (ast.USub, ast.UAdd)
_CALL_BINDINGS = {"abs": abs, "max": np.maximum, "min": np.minimum}


def _validate(node: ast.AST, names: set[str]) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body, names)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
        _validate(node.left, names)
        _validate(node.right, names)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, _ALLOWED_UNARYOPS):
        _validate(node.operand, names)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
            raise ExpressionError(f"only {sorted(_ALLOWED_CALLS)} may be called in expressions")
        arity = _ALLOWED_CALLS[node.func.id]
        if len(node.args) != arity or node.keywords:
            raise ExpressionError(f"{node.func.id}() takes exactly {arity} positional argument(s)")
        for arg in node.args:
            _validate(arg, names)
    elif isinstance(node, ast.Name):
        if not isinstance(node.ctx, ast.Load):
            raise ExpressionError(f"name {node.id!r} may only be read")
        names.add(node.id)
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"literal {node.value!r} is not a real number")
    else:
        raise ExpressionError(f"disallowed syntax in expression: {type(node).__name__}")


class Expr:
    """A validated, compiled closed-form expression.

    ``variables`` names the positional arguments of :meth:`__call__`;
    every other free name must be supplied as a parameter binding.
    """

    __slots__ = ("source", "variables", "free_names", "_code")

    def __init__(self, source: str, variables: tuple[str, ...] = ("x", "y")):
        if not isinstance(source, str) or not source.strip():
            raise ExpressionError("expression source must be a non-empty string")
        self.source = source
        self.variables = tuple(variables)
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse expression {source!r}: {exc.msg}") from exc
        names: set[str] = set()
        _validate(tree, names)
        reserved = names & set(_ALLOWED_CALLS)
        if reserved:
            raise ExpressionError(f"{sorted(reserved)} are function names, not variables")
        self.free_names = frozenset(names)
        self._code = compile(tree, f"<form {source!r}>", "eval")

    def parameters(self) -> frozenset[str]:
        """Free names that are not positional variables."""
        return self.free_names - set(self.variables)

    def __call__(self, *args, **params):
        if len(args) > len(self.variables):
            raise ExpressionError(f"expression takes at most {len(self.variables)} positional values")
        env: dict = dict(_CALL_BINDINGS)
        env["__builtins__"] = {}
        env.update(params)
        env.update(zip(self.variables, args))
        missing = self.free_names - env.keys()
        if missing:
            raise ExpressionError(f"unbound names in {self.source!r}: {sorted(missing)}")
        vectorized = any(isinstance(a, np.ndarray) for a in args)
        try:
            with np.errstate(divide="raise", invalid="raise", over="raise"):
                out = eval(self._code, env)  # noqa: S307 - AST is whitelisted above
        except (ZeroDivisionError, FloatingPointError, OverflowError) as exc:
            raise ExpressionError(f"evaluation of {self.source!r} failed: {exc}") from exc
        if vectorized:
            shape = np.broadcast_shapes(*(a.shape for a in args if isinstance(a, np.ndarray)))
            return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()
        return float(out)

    def __repr__(self):
        return f"Expr({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and self.source == other.source and self.variables == other.variables

    def __hash__(self):
        return hash((self.source, self.variables))
