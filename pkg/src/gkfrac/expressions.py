"""Tiny arithmetic expression language for right-hand sides f(t, x).

Grammar: float literals; variables t, x, u; binary + - * / ^ with the usual
precedence (^ is right-associative and binds tighter than unary minus);
parentheses; calls to pow, exp, log, sin, cos, abs, sqrt, gamma.  Parsed
trees are immutable and evaluation is pure, so expressions are safe to share
between threads.
"""

import math
from dataclasses import dataclass
from typing import Union

VARIABLES = ("t", "x", "u")
FUNCTIONS = {
    "pow": 2,
    "exp": 1,
    "log": 1,
    "sin": 1,
    "cos": 1,
    "abs": 1,
    "sqrt": 1,
    "gamma": 1,
}


class ParseError(ValueError):
    def __init__(self, message, offset, expected=None):
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"syntax error at offset {offset}: {message}{hint}")
        self.offset = offset
        self.expected = expected


class EvalError(ArithmeticError):
    def __init__(self, message, node):
        super().__init__(f"{message} in '{to_source(node)}'")
        self.node = node


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expr = Union[Num, Var, Neg, BinOp, Call]


# --- tokenizer ----------------------------------------------------------

def _tokenize(text):
    # yields (kind, value, offset); kinds: num, name, op, end
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            try:
                value = float(text[i:j])
            except ValueError:
                raise ParseError(f"malformed number '{text[i:j]}'", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if c in "+-*/^(),":
            tokens.append(("op", c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


# --- parser (precedence climbing) ---------------------------------------

_BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3  # between * / and ^, so -x^2 parses as -(x^2)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value, offset = self.next()
        if kind != "op" or value != op:
            raise ParseError(f"got {value!r}", offset, expected=repr(op))

    def parse(self):
        e = self.expression(0)
        kind, value, offset = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {value!r}", offset, expected="end of input")
        return e

    def expression(self, min_prec):
        left = self.unary()
        while True:
            kind, value, offset = self.peek()
            if kind != "op" or value not in _BINARY_PREC:
                return left
            prec = _BINARY_PREC[value]
            if prec < min_prec:
                return left
            self.next()
            # right-associative ^ recurses at equal precedence
            right = self.expression(prec if value == "^" else prec + 1)
            left = BinOp(value, left, right)

    def unary(self):
        kind, value, offset = self.peek()
        if kind == "op" and value == "-":
            self.next()
            operand = self.expression(_UNARY_PREC)
            return Neg(operand)
        return self.atom()

    def atom(self):
        kind, value, offset = self.next()
        if kind == "num":
            return Num(value)
        if kind == "name":
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function '{value}'", offset,
                                     expected="one of " + ", ".join(sorted(FUNCTIONS)))
                self.next()
                args = [self.expression(0)]
                while True:
                    k2, v2, o2 = self.peek()
                    if k2 == "op" and v2 == ",":
                        self.next()
                        args.append(self.expression(0))
                    else:
                        break
                self.expect_op(")")
                if len(args) != FUNCTIONS[value]:
                    raise ParseError(
                        f"{value} takes {FUNCTIONS[value]} argument(s), got {len(args)}",
                        offset,
                    )
                return Call(value, tuple(args))
            if value not in VARIABLES:
                raise ParseError(f"unknown identifier '{value}'", offset,
                                 expected="one of t, x, u")
            return Var(value)
        if kind == "op" and value == "(":
            e = self.expression(0)
            self.expect_op(")")
            return e
        raise ParseError(f"got {value!r}", offset, expected="a value")


def parse(text: str) -> Expr:
    if not text or not text.strip():
        raise ParseError("empty expression", 0, expected="a value")
    return _Parser(text).parse()


# --- evaluation ----------------------------------------------------------

def _pow(base, exponent, node):
    try:
        return math.pow(base, exponent)
    except ValueError:
        raise EvalError(
            f"pow({base}, {exponent}) is undefined (negative base, fractional exponent)",
            node,
        ) from None
    except OverflowError:
        raise EvalError(f"pow({base}, {exponent}) overflows", node) from None


def evaluate(e: Expr, t=None, x=None, u=None) -> float:
    """Evaluate with IEEE doubles; missing variables and domain violations
    raise EvalError naming the offending subexpression."""
    env = {"t": t, "x": x, "u": u}

    def go(node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            value = env[node.name]
            if value is None:
                raise EvalError(f"variable '{node.name}' is not bound", node)
            return float(value)
        if isinstance(node, Neg):
            return -go(node.operand)
        if isinstance(node, BinOp):
            a = go(node.left)
            b = go(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                if b == 0.0:
                    raise EvalError("division by zero", node)
                return a / b
            return _pow(a, b, node)
        args = [go(arg) for arg in node.args]
        return _call(node.func, args, node)

    return go(e)


def _call(func, args, node):
    if func == "pow":
        return _pow(args[0], args[1], node)
    a = args[0]
    if func == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            raise EvalError(f"exp({a}) overflows", node) from None
    if func == "log":
        if a <= 0:
            raise EvalError(f"log of nonpositive value {a}", node)
        return math.log(a)
    if func == "sqrt":
        if a < 0:
            raise EvalError(f"sqrt of negative value {a}", node)
        return math.sqrt(a)
    if func == "gamma":
        if a <= 0:
            raise EvalError(f"gamma of nonpositive value {a}", node)
        try:
            return math.gamma(a)
        except OverflowError:
            raise EvalError(f"gamma({a}) overflows", node) from None
    if func == "sin":
        return math.sin(a)
    if func == "cos":
        return math.cos(a)
    return abs(a)  # "abs"


# --- printing ------------------------------------------------------------

def _prec_of(node):
    if isinstance(node, BinOp):
        return _BINARY_PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY_PREC
    return 9


def to_source(e: Expr) -> str:
    """Render a tree back to text; parse(to_source(parse(s))) is structurally
    equal to parse(s)."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if _prec_of(e.operand) < _UNARY_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        prec = _BINARY_PREC[e.op]
        left = to_source(e.left)
        right = to_source(e.right)
        # ^ is right-associative; the other operators associate left
        if _prec_of(e.left) < prec or (e.op == "^" and _prec_of(e.left) == prec):
            left = f"({left})"
        if _prec_of(e.right) < prec or (e.op != "^" and _prec_of(e.right) == prec):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    return f"{e.func}({', '.join(to_source(a) for a in e.args)})"
