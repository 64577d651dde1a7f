"""Small expression language for complex-valued formulas in named real variables.

Sources are parsed into an immutable AST, compiled to a flat postfix program
and evaluated either by the compiled kernel or the pure-Python fallback
(see ``_kernel``).  Evaluation is forward-mode: every run can return the
value together with the partial derivatives with respect to each declared
real variable, which is what the geometric checks downstream consume.

Grammar summary (full EBNF in docs/grammar.md):

    expression := term (("+" | "-") term)*
    term       := factor (("*" | "/") factor)*
    factor     := "-" factor | power
    power      := atom ("^" factor)?      exponent must fold to an integer
    atom       := NUMBER | "i" | IDENT | FUNC "(" expression ")"
                | "(" expression ")"

``i`` is the imaginary unit, functions are ``exp``, ``sin``, ``cos`` and
``sqrt``; ``sqrt`` only accepts positive real arguments at evaluation time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import _kernel
from .errors import ParseError

__all__ = [
    "Add",
    "Call",
    "Div",
    "DualValue",
    "Expression",
    "FUNCTIONS",
    "Mul",
    "Neg",
    "Num",
    "Pow",
    "Sub",
    "Var",
    "parse",
    "to_source",
    "wirtinger",
]

FUNCTIONS = ("exp", "sin", "cos", "sqrt")
_RESERVED = FUNCTIONS + ("i",)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[_Token], variables: Sequence[str]):
        self.tokens = tokens
        self.pos = 0
        self.var_index = {name: k for k, name in enumerate(variables)}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_rparen(self, open_pos: int) -> None:
        if self.peek().text != ")":
            raise ParseError("unclosed parenthesis", open_pos)
        self.advance()

    def parse(self) -> Node:
        node = self.expression()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected token {tok.text!r}", tok.position)
        return node

    def expression(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.advance().text
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Node:
        if self.peek().text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().text == "^":
            caret = self.advance()
            exponent_node = self.factor()
            return Pow(base, _fold_integer(exponent_node, caret.position))
        return base

    def atom(self) -> Node:
        tok = self.advance()
        if tok.kind == "number":
            text = tok.text
            if re.fullmatch(r"\d+", text):
                return Num(complex(int(text)))
            return Num(complex(float(text)))
        if tok.kind == "ident":
            name = tok.text
            if name == "i":
                return Num(1j)
            if name in FUNCTIONS:
                if self.peek().text != "(":
                    raise ParseError(
                        f"function {name} requires parentheses", tok.position
                    )
                open_tok = self.advance()
                arg = self.expression()
                self.expect_rparen(open_tok.position)
                return Call(name, arg)
            if name in self.var_index:
                return Var(self.var_index[name], name)
            raise ParseError(f"undeclared identifier {name}", tok.position)
        if tok.text == "(":
            node = self.expression()
            self.expect_rparen(tok.position)
            return node
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.position)
        raise ParseError(f"unexpected token {tok.text!r}", tok.position)


def _const_eval(node: Node) -> complex:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        return -_const_eval(node.operand)
    if isinstance(node, Add):
        return _const_eval(node.left) + _const_eval(node.right)
    if isinstance(node, Sub):
        return _const_eval(node.left) - _const_eval(node.right)
    if isinstance(node, Mul):
        return _const_eval(node.left) * _const_eval(node.right)
    if isinstance(node, Div):
        return _const_eval(node.left) / _const_eval(node.right)
    if isinstance(node, Pow):
        return _const_eval(node.base) ** node.exponent
    raise ValueError("not constant")


def _fold_integer(node: Node, position: int) -> int:
    try:
        value = _const_eval(node)
    except (ValueError, ZeroDivisionError):
        raise ParseError("exponent must be a constant integer", position) from None
    if abs(value.imag) > 1e-9 or abs(value.real - round(value.real)) > 1e-9:
        raise ParseError("exponent must be a constant integer", position)
    return int(round(value.real))


# ---------------------------------------------------------------------------
# Pretty printer

_PRECEDENCE = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Num: 9, Var: 9, Call: 9}


def _format_number(value: complex) -> str:
    if value == 1j:
        return "i"
    real = value.real
    if real == int(real) and abs(real) < 1e15:
        return str(int(real))
    return repr(real)


def to_source(node: Node) -> str:
    """Render an AST back to parseable source text."""

    def wrap(child: Node, minimum: int) -> str:
        text = to_source(child)
        if _PRECEDENCE[type(child)] < minimum:
            return f"({text})"
        return text

    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.operand, 3)
    if isinstance(node, Add):
        return f"{wrap(node.left, 1)} + {wrap(node.right, 2)}"
    if isinstance(node, Sub):
        return f"{wrap(node.left, 1)} - {wrap(node.right, 2)}"
    if isinstance(node, Mul):
        return f"{wrap(node.left, 2)} * {wrap(node.right, 3)}"
    if isinstance(node, Div):
        return f"{wrap(node.left, 2)} / {wrap(node.right, 3)}"
    if isinstance(node, Pow):
        base = to_source(node.base)
        if _PRECEDENCE[type(node.base)] <= 4:
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an AST node: {node!r}")


# ---------------------------------------------------------------------------
# Compilation to a flat postfix program


def _compile(node: Node, variables: Sequence[str]) -> _kernel.Program:
    ops: list[int] = []
    args: list[int] = []
    consts: list[complex] = []
    const_index: dict[complex, int] = {}

    def emit_const(value: complex) -> None:
        key = complex(value)
        if key not in const_index:
            const_index[key] = len(consts)
            consts.append(key)
        ops.append(_kernel.OP_CONST)
        args.append(const_index[key])

    def walk(n: Node) -> None:
        if isinstance(n, Num):
            emit_const(n.value)
        elif isinstance(n, Var):
            ops.append(_kernel.OP_VAR)
            args.append(n.index)
        elif isinstance(n, Neg):
            walk(n.operand)
            ops.append(_kernel.OP_NEG)
            args.append(0)
        elif isinstance(n, (Add, Sub, Mul, Div)):
            walk(n.left)
            walk(n.right)
            ops.append(
                {
                    Add: _kernel.OP_ADD,
                    Sub: _kernel.OP_SUB,
                    Mul: _kernel.OP_MUL,
                    Div: _kernel.OP_DIV,
                }[type(n)]
            )
            args.append(0)
        elif isinstance(n, Pow):
            walk(n.base)
            ops.append(_kernel.OP_POW)
            args.append(n.exponent)
        elif isinstance(n, Call):
            walk(n.arg)
            ops.append(_kernel.FUNC_OPCODES[n.func])
            args.append(0)
        else:
            raise TypeError(f"not an AST node: {n!r}")

    walk(node)

    depth = 0
    peak = 0
    for op in ops:
        if op in (_kernel.OP_CONST, _kernel.OP_VAR):
            depth += 1
        elif op in (_kernel.OP_ADD, _kernel.OP_SUB, _kernel.OP_MUL, _kernel.OP_DIV):
            depth -= 1
        peak = max(peak, depth)

    return _kernel.Program(
        ops=np.asarray(ops, dtype=np.int32),
        args=np.asarray(args, dtype=np.int32),
        consts=np.asarray(consts, dtype=np.complex128),
        n_variables=len(variables),
        stack_depth=max(peak, 1),
    )


# ---------------------------------------------------------------------------
# Public evaluation objects


@dataclass(frozen=True)
class DualValue:
    """Value together with partial derivatives w.r.t. the real variables."""

    value: complex
    partials: np.ndarray


class Expression:
    """A parsed expression bound to an ordered tuple of real variables."""

    def __init__(self, ast: Node, variables: Sequence[str]):
        self.ast = ast
        self.variables = tuple(variables)
        self.program = _compile(ast, self.variables)

    @property
    def source(self) -> str:
        return to_source(self.ast)

    def __repr__(self) -> str:
        return f"Expression({self.source!r}, variables={self.variables})"

    def _as_points(self, point: Sequence[float]) -> np.ndarray:
        arr = np.asarray(point, dtype=float)
        if arr.shape != (len(self.variables),):
            raise ValueError(
                f"expected {len(self.variables)} coordinates, got shape {arr.shape}"
            )
        return arr.reshape(1, -1)

    def evaluate(self, point: Sequence[float]) -> complex:
        values, _ = _kernel.execute(self.program, self._as_points(point), False)
        return complex(values[0])

    def eval_dual(self, point: Sequence[float]) -> DualValue:
        values, partials = _kernel.execute(self.program, self._as_points(point), True)
        return DualValue(complex(values[0]), partials[0].copy())

    def eval_batch(self, points: np.ndarray, want_partials: bool = True):
        """Evaluate on an (n_points, n_variables) array.

        Returns ``(values, partials)`` with ``partials`` of shape
        ``(n_points, n_variables)`` or None when not requested.
        """
        pts = np.ascontiguousarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != len(self.variables):
            raise ValueError(
                f"expected points of shape (N, {len(self.variables)}), got {pts.shape}"
            )
        return _kernel.execute(self.program, pts, want_partials)


def parse(source: str, variables: Sequence[str]) -> Expression:
    """Parse ``source`` over the ordered real variables ``variables``."""
    seen = set()
    for name in variables:
        if name in _RESERVED:
            raise ParseError(f"variable name {name} is reserved", 0)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError(f"invalid variable name {name!r}", 0)
        if name in seen:
            raise ParseError(f"duplicate variable name {name}", 0)
        seen.add(name)
    ast = _Parser(_tokenize(source), variables).parse()
    return Expression(ast, variables)


def wirtinger(expr: Expression, point: Sequence[float], pair: tuple[int, int] = (0, 1)):
    """Holomorphic/antiholomorphic derivative pair for one mode.

    ``pair`` gives the variable indices ``(iq, ip)`` of the mode's real and
    imaginary coordinates, defaulting to the first two; returns
    ``(d_w, d_wbar)`` evaluated at ``point`` with d_w = (d/dq - i d/dp)/2
    and d_wbar = (d/dq + i d/dp)/2.
    """
    iq, ip = pair
    dual = expr.eval_dual(point)
    dq = dual.partials[iq]
    dp = dual.partials[ip]
    return complex(0.5 * (dq - 1j * dp)), complex(0.5 * (dq + 1j * dp))
