"""Functional expression trees for intensional constraints.

Grammar (no whitespace required anywhere, tolerated everywhere):

    expr := INT | PARAM | op '(' expr (',' expr)* ')'

with binary integer ops add sub mul div mod min max, comparisons
eq ne ge gt le lt, binary logicals and or, and unary not neg abs.
Comparisons and logicals produce booleans, everything else integers;
a predicate's root must be boolean. div and mod truncate toward zero.
"""

import re
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from .model import CspError


class ExprError(CspError):
    """Malformed or ill-typed expression."""


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Call:
    op: str
    args: tuple


Expr = Lit | Param | Call

# op -> (argument type, result type, arity)
_OPS: dict[str, tuple[str, str, int]] = {
    "add": ("int", "int", 2),
    "sub": ("int", "int", 2),
    "mul": ("int", "int", 2),
    "div": ("int", "int", 2),
    "mod": ("int", "int", 2),
    "min": ("int", "int", 2),
    "max": ("int", "int", 2),
    "eq": ("int", "bool", 2),
    "ne": ("int", "bool", 2),
    "ge": ("int", "bool", 2),
    "gt": ("int", "bool", 2),
    "le": ("int", "bool", 2),
    "lt": ("int", "bool", 2),
    "and": ("bool", "bool", 2),
    "or": ("bool", "bool", 2),
    "not": ("bool", "bool", 1),
    "neg": ("int", "int", 1),
    "abs": ("int", "int", 1),
}

_TOKEN = re.compile(r"\s*(-?\d+|[A-Za-z_][A-Za-z_0-9]*|[(),])")


def _tokenize(text: str) -> list[str]:
    tokens = []
    text = text.strip()
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprError(f"unexpected character {text[pos]!r} in expression")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def infer_type(expr: Expr, params: Sequence[str]) -> str:
    """Type of an expression ('int' or 'bool'); raises on ill-typed trees."""
    if isinstance(expr, Lit):
        return "int"
    if isinstance(expr, Param):
        if expr.name not in params:
            raise ExprError(f"unknown parameter {expr.name!r}")
        return "int"
    spec = _OPS.get(expr.op)
    if spec is None:
        raise ExprError(f"unknown operator {expr.op!r}")
    arg_type, result, arity = spec
    if len(expr.args) != arity:
        raise ExprError(f"{expr.op} takes {arity} argument(s), got {len(expr.args)}")
    for a in expr.args:
        if infer_type(a, params) != arg_type:
            raise ExprError(f"{expr.op} expects {arg_type} arguments")
    return result


def parse_expression(text: str, params: Sequence[str]) -> Expr:
    """Parse and type-check a predicate body; the root must be boolean."""
    tokens = _tokenize(text)
    pos = 0

    def parse() -> Expr:
        nonlocal pos
        if pos >= len(tokens):
            raise ExprError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if re.fullmatch(r"-?\d+", tok):
            return Lit(int(tok))
        if tok in "(),":
            raise ExprError(f"unexpected {tok!r} in expression")
        if pos < len(tokens) and tokens[pos] == "(":
            pos += 1
            args = [parse()]
            while pos < len(tokens) and tokens[pos] == ",":
                pos += 1
                args.append(parse())
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ExprError(f"missing ')' in call to {tok!r}")
            pos += 1
            return Call(tok, tuple(args))
        return Param(tok)

    expr = parse()
    if pos != len(tokens):
        raise ExprError(f"trailing tokens after expression: {tokens[pos:]}")
    if infer_type(expr, params) != "bool":
        raise ExprError("predicate root must be boolean")
    return expr


def _div(a: int, b: int) -> int:
    # truncation toward zero, unlike Python's floor division
    return abs(a) // abs(b) * (1 if (a >= 0) == (b >= 0) else -1)


def evaluate(expr: Expr, env: dict[str, int]):
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Param):
        return env[expr.name]
    args = [evaluate(a, env) for a in expr.args]
    op = expr.op
    if op == "add":
        return args[0] + args[1]
    if op == "sub":
        return args[0] - args[1]
    if op == "mul":
        return args[0] * args[1]
    if op == "div":
        if args[1] == 0:
            raise ZeroDivisionError("div by zero")
        return _div(args[0], args[1])
    if op == "mod":
        if args[1] == 0:
            raise ZeroDivisionError("mod by zero")
        return args[0] - args[1] * _div(args[0], args[1])
    if op == "min":
        return min(args)
    if op == "max":
        return max(args)
    if op == "eq":
        return args[0] == args[1]
    if op == "ne":
        return args[0] != args[1]
    if op == "ge":
        return args[0] >= args[1]
    if op == "gt":
        return args[0] > args[1]
    if op == "le":
        return args[0] <= args[1]
    if op == "lt":
        return args[0] < args[1]
    if op == "and":
        return args[0] and args[1]
    if op == "or":
        return args[0] or args[1]
    if op == "not":
        return not args[0]
    if op == "neg":
        return -args[0]
    if op == "abs":
        return abs(args[0])
    raise ExprError(f"unknown operator {op!r}")


def compile_predicate(
    expr: Expr,
    params: Sequence[str],
    on_div_zero: Callable[[], None] | None = None,
) -> Callable[[Sequence[int]], bool]:
    """Close an expression over positional parameters.

    The result is total: division or modulo by zero makes the predicate
    false for that tuple, optionally reporting the event via ``on_div_zero``.
    """
    names = tuple(params)

    def pred(values: Sequence[int]) -> bool:
        env = dict(zip(names, values))
        try:
            return bool(evaluate(expr, env))
        except ZeroDivisionError:
            if on_div_zero is not None:
                on_div_zero()
            return False

    return pred


def to_source(expr: Expr) -> str:
    """Canonical, whitespace-free source for an expression tree."""
    if isinstance(expr, Lit):
        return str(expr.value)
    if isinstance(expr, Param):
        return expr.name
    return f"{expr.op}({','.join(to_source(a) for a in expr.args)})"


def substitute(expr: Expr, mapping: dict[str, Expr]) -> Expr:
    """Replace parameters by other expressions (used to bind effective
    parameters to scope positions)."""
    if isinstance(expr, Lit):
        return expr
    if isinstance(expr, Param):
        return mapping.get(expr.name, expr)
    return Call(expr.op, tuple(substitute(a, mapping) for a in expr.args))
