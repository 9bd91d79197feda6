"""Minimal side-effect-free expression language for attribute calculation.

Grammar (loosest first): ``?:`` < ``||`` < ``&&`` < ``== !=`` < ``< > <= >=``
< ``+`` < unary ``!``.  Values are strings, integers and booleans.  ``+``
concatenates two strings, adds two integers, and coerces the other operand to
its text form when one side is a string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import ExprEvalError, ExprSyntaxError
from .metamodel import Value


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"


Expr = Union[Lit, Param, Unary, Binary, Ternary]

_TOKEN_RE = re.compile(
    r'(?:(?P<str>"(?:[^"\\]|\\.)*")'
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>==|!=|<=|>=|&&|\|\||[!+<>?:()]))"
)

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


def unescape_string(text: str, position: int = 0) -> str:
    """Decode a quoted string literal (including the surrounding quotes)."""
    body = text[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            i += 1
            if i >= len(body):
                raise ExprSyntaxError("dangling escape in string", position)
            e = body[i]
            if e == "u":
                if i + 4 >= len(body):
                    raise ExprSyntaxError("truncated \\u escape", position)
                out.append(chr(int(body[i + 1:i + 5], 16)))
                i += 4
            elif e in _ESCAPES:
                out.append(_ESCAPES[e])
            else:
                raise ExprSyntaxError(f"unknown escape \\{e}", position)
        else:
            out.append(c)
        i += 1
    return "".join(out)


def escape_string(value: str) -> str:
    out = ['"']
    for c in value:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        elif c == "\r":
            out.append("\\r")
        elif ord(c) < 0x20:
            out.append(f"\\u{ord(c):04x}")
        else:
            out.append(c)
    out.append('"')
    return "".join(out)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        assert kind is not None
        tokens.append((kind, m.group(kind), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str) -> None:
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)
        self.next()

    def at_op(self, *ops: str) -> str | None:
        kind, val, _pos = self.peek()
        if kind == "op" and val in ops:
            return val
        return None

    def parse(self) -> Expr:
        e = self.ternary()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected trailing input {val!r}", pos)
        return e

    def ternary(self) -> Expr:
        cond = self.or_expr()
        if self.at_op("?"):
            self.next()
            then = self.ternary()
            self.expect_op(":")
            other = self.ternary()
            return Ternary(cond, then, other)
        return cond

    def or_expr(self) -> Expr:
        e = self.and_expr()
        while self.at_op("||"):
            self.next()
            e = Binary("||", e, self.and_expr())
        return e

    def and_expr(self) -> Expr:
        e = self.equality()
        while self.at_op("&&"):
            self.next()
            e = Binary("&&", e, self.equality())
        return e

    def equality(self) -> Expr:
        e = self.comparison()
        while (op := self.at_op("==", "!=")) is not None:
            self.next()
            e = Binary(op, e, self.comparison())
        return e

    def comparison(self) -> Expr:
        e = self.additive()
        while (op := self.at_op("<", ">", "<=", ">=")) is not None:
            self.next()
            e = Binary(op, e, self.additive())
        return e

    def additive(self) -> Expr:
        e = self.unary()
        while self.at_op("+"):
            self.next()
            e = Binary("+", e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.at_op("!"):
            self.next()
            return Unary("!", self.unary())
        return self.primary()

    def primary(self) -> Expr:
        kind, val, pos = self.next()
        if kind == "str":
            return Lit(unescape_string(val, pos))
        if kind == "int":
            return Lit(int(val))
        if kind == "ident":
            if val == "true":
                return Lit(True)
            if val == "false":
                return Lit(False)
            return Param(val)
        if kind == "op" and val == "(":
            e = self.ternary()
            self.expect_op(")")
            return e
        if kind == "eof":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


_PREC = {"?:": 1, "||": 2, "&&": 3, "==": 4, "!=": 4,
         "<": 5, ">": 5, "<=": 5, ">=": 5, "+": 6, "!": 7}


def _prec(e: Expr) -> int:
    if isinstance(e, Ternary):
        return 1
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return 7
    return 8


def to_text(e: Expr) -> str:
    """Render an AST back to surface syntax (parses back to the same tree)."""
    if isinstance(e, Lit):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        if isinstance(e.value, int):
            return str(e.value)
        return escape_string(e.value)
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Unary):
        return "!" + _wrap(e.operand, 7)
    if isinstance(e, Binary):
        p = _PREC[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, Ternary):
        return f"{_wrap(e.cond, 2)} ? {to_text(e.then)} : {_wrap(e.other, 1)}"
    raise TypeError(e)  # pragma: no cover


def _wrap(e: Expr, min_prec: int) -> str:
    text = to_text(e)
    return f"({text})" if _prec(e) < min_prec else text


def params_of(e: Expr) -> frozenset[str]:
    if isinstance(e, Param):
        return frozenset((e.name,))
    if isinstance(e, Unary):
        return params_of(e.operand)
    if isinstance(e, Binary):
        return params_of(e.left) | params_of(e.right)
    if isinstance(e, Ternary):
        return params_of(e.cond) | params_of(e.then) | params_of(e.other)
    return frozenset()


def _value_text(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return v


def _type_name(v: object) -> str:
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, str):
        return "string"
    return type(v).__name__


def evaluate(e: Expr, env: Mapping[str, object]) -> Value:
    """Evaluate under ``env``; raises ExprEvalError on unbound parameters or
    operand type mismatches.  The environment is never modified."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Param):
        if e.name not in env:
            raise ExprEvalError(f"unbound parameter {e.name!r}")
        v = env[e.name]
        if not isinstance(v, (str, int, bool)):
            raise ExprEvalError(
                f"parameter {e.name!r} holds a graph node, not a plain value")
        return v
    if isinstance(e, Unary):
        v = evaluate(e.operand, env)
        if not isinstance(v, bool):
            raise ExprEvalError(f"operator ! expects a boolean, got {_type_name(v)}")
        return not v
    if isinstance(e, Ternary):
        c = evaluate(e.cond, env)
        if not isinstance(c, bool):
            raise ExprEvalError(
                f"ternary condition must be boolean, got {_type_name(c)}")
        return evaluate(e.then if c else e.other, env)
    assert isinstance(e, Binary)
    op = e.op
    if op in ("&&", "||"):
        left = evaluate(e.left, env)
        if not isinstance(left, bool):
            raise ExprEvalError(f"operator {op} expects booleans, got {_type_name(left)}")
        if op == "&&" and not left:
            return False
        if op == "||" and left:
            return True
        right = evaluate(e.right, env)
        if not isinstance(right, bool):
            raise ExprEvalError(f"operator {op} expects booleans, got {_type_name(right)}")
        return right
    left = evaluate(e.left, env)
    right = evaluate(e.right, env)
    if op == "+":
        if isinstance(left, str) or isinstance(right, str):
            return _value_text(left) + _value_text(right)
        if isinstance(left, bool) or isinstance(right, bool):
            raise ExprEvalError("operator + does not apply to booleans")
        return left + right
    if op in ("==", "!="):
        if _type_name(left) != _type_name(right):
            raise ExprEvalError(
                f"operator {op} compares {_type_name(left)} with {_type_name(right)}")
        return (left == right) if op == "==" else (left != right)
    # integer comparisons
    if isinstance(left, bool) or isinstance(right, bool) or \
            not isinstance(left, int) or not isinstance(right, int):
        raise ExprEvalError(
            f"operator {op} expects integers, got {_type_name(left)} "
            f"and {_type_name(right)}")
    if op == "<":
        return left < right
    if op == ">":
        return left > right
    if op == "<=":
        return left <= right
    return left >= right
