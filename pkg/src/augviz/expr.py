"""Row-predicate expression language: parse once, evaluate per row.

Grammar: literals (numbers, single/double-quoted strings, true/false/null),
field refs `datum.<name>`, arithmetic + - * / %, comparisons, && || ! with
short-circuit, parentheses. Division or modulo by zero yields null, and null
propagates through every operator except == and !=, which compare nulls
structurally.
"""

import re
from dataclasses import dataclass
from typing import Any

from .errors import ExprSyntaxError, UnknownFieldRefError

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<str>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[-+*/%<>!().])
""", re.VERBOSE)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append((m.lastgroup, m.group(), m.start()))
    tokens.append(("end", "", len(src)))
    return tokens


@dataclass
class Literal:
    value: Any


@dataclass
class FieldRef:
    name: str


@dataclass
class Unary:
    op: str
    operand: Any


@dataclass
class Binary:
    op: str
    left: Any
    right: Any


Expr = Literal | FieldRef | Unary | Binary

# precedence: higher binds tighter
_BINARY_PREC = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}

_KEYWORDS = {"true": True, "false": False, "null": None}


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text):
        kind, val, pos = self.next()
        if val != text:
            raise ExprSyntaxError(f"expected {text!r}, got {val!r}", pos)

    def parse_expr(self, min_prec=1):
        left = self.parse_unary()
        while True:
            kind, val, _ = self.peek()
            prec = _BINARY_PREC.get(val)
            if kind != "op" or prec is None or prec < min_prec:
                return left
            self.next()
            right = self.parse_expr(prec + 1)
            left = Binary(val, left, right)

    def parse_unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in ("-", "!"):
            self.next()
            return Unary(val, self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        kind, val, pos = self.next()
        if kind == "num":
            n = float(val)
            return Literal(int(n) if n.is_integer() and abs(n) < 2 ** 53 else n)
        if kind == "str":
            body = val[1:-1]
            return Literal(re.sub(r"\\(.)", r"\1", body))
        if kind == "name":
            if val in _KEYWORDS:
                return Literal(_KEYWORDS[val])
            if val == "datum":
                self.expect(".")
                k2, v2, p2 = self.next()
                if k2 != "name":
                    raise ExprSyntaxError("expected field name after 'datum.'", p2)
                return FieldRef(v2)
            raise ExprSyntaxError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)


def parse_expr(src: str) -> Expr:
    parser = _Parser(_tokenize(src))
    tree = parser.parse_expr()
    kind, val, pos = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"trailing input {val!r}", pos)
    return tree


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _eq(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if _is_num(a) and _is_num(b):
        return float(a) == float(b)
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    return False


def eval_expr(e: Expr, row: dict[str, Any]) -> Any:
    """Evaluate against one row's cells. Unknown field refs raise."""
    if isinstance(e, Literal):
        return e.value
    if isinstance(e, FieldRef):
        if e.name not in row:
            raise UnknownFieldRefError(e.name)
        return row[e.name]
    if isinstance(e, Unary):
        v = eval_expr(e.operand, row)
        if v is None:
            return None
        if e.op == "-":
            return -v if _is_num(v) else None
        return (not v) if isinstance(v, bool) else None
    assert isinstance(e, Binary)
    op = e.op
    if op == "&&":
        left = eval_expr(e.left, row)
        if left is None:
            return None
        if not isinstance(left, bool):
            return None
        if not left:
            return False
        return _as_bool(eval_expr(e.right, row))
    if op == "||":
        left = eval_expr(e.left, row)
        if isinstance(left, bool) and left:
            return True
        right = _as_bool(eval_expr(e.right, row))
        if left is None or not isinstance(left, bool):
            return None
        return right
    left = eval_expr(e.left, row)
    right = eval_expr(e.right, row)
    if op == "==":
        return _eq(left, right)
    if op == "!=":
        return not _eq(left, right)
    if left is None or right is None:
        return None
    if op in ("<", "<=", ">", ">="):
        if _is_num(left) and _is_num(right):
            pass
        elif isinstance(left, str) and isinstance(right, str):
            pass
        else:
            return None
        return {"<": left < right, "<=": left <= right,
                ">": left > right, ">=": left >= right}[op]
    if not (_is_num(left) and _is_num(right)):
        return None
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        return None if right == 0 else left / right
    if op == "%":
        return None if right == 0 else left % right
    raise AssertionError(op)


def _as_bool(v):
    return v if isinstance(v, bool) else None


def referenced_fields(e: Expr) -> set[str]:
    if isinstance(e, FieldRef):
        return {e.name}
    if isinstance(e, Unary):
        return referenced_fields(e.operand)
    if isinstance(e, Binary):
        return referenced_fields(e.left) | referenced_fields(e.right)
    return set()
