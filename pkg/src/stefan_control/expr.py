"""Small arithmetic expression language in the variables x and t.

Coefficient fields and boundary/initial data are supplied as text and
parsed once into immutable syntax trees, so problems are configurable
without touching code.  The grammar supports decimal literals, the
variables ``x`` and ``t``, the operators ``+ - * / ^`` (with ``^``
binding tighter than unary minus, which binds tighter than ``* /``),
and the functions sin, cos, exp, sqrt, abs, min, max, tanh.

Parsing uses precedence climbing.  Evaluation accepts floats or numpy
arrays (broadcasting) and is pure: the same inputs always produce
bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Unary", "Bin", "Call",
    "ExprSyntaxError", "ExprDomainError",
    "parse", "evaluate", "to_string", "variables",
]


class ExprSyntaxError(ValueError):
    """Raised on malformed source; carries the byte offset of the fault."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprDomainError(ArithmeticError):
    """Raised when evaluation hits a singularity (1/0, sqrt(-1), ...)."""

    def __init__(self, message, subexpr):
        super().__init__(f"{message} in sub-expression '{subexpr}'")
        self.subexpr = subexpr


# --- AST -------------------------------------------------------------

class Expr:
    __slots__ = ()

    def __call__(self, x, t):
        return evaluate(self, x, t)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple


_FUNCTIONS = {
    "sin": 1, "cos": 1, "exp": 1, "sqrt": 1, "abs": 1, "tanh": 1,
    "min": 2, "max": 2,
}
_VARIABLES = ("x", "t")

# (left, right) binding powers; '^' is right-associative and binds
# tighter than unary minus (whose operand is parsed at power _UNARY_BP).
_BINARY_BP = {"+": (1, 2), "-": (1, 2), "*": (3, 4), "/": (3, 4), "^": (8, 7)}
_UNARY_BP = 5


# --- Tokenizer -------------------------------------------------------

def _tokenize(source):
    tokens = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal '{text}'", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("ident", source[i:j], i))
            i = j
            continue
        if ch in "+-*/^(),":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character '{ch}'", i)
    tokens.append(("end", "", n))
    return tokens


# --- Parser ----------------------------------------------------------

class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected '{kind}', got '{tok[1]}'", tok[2])
        return tok

    def parse_expr(self, min_bp):
        node = self.parse_prefix()
        while True:
            kind, _, _ = self.peek()
            if kind not in _BINARY_BP:
                break
            lbp, rbp = _BINARY_BP[kind]
            if lbp < min_bp:
                break
            self.next()
            rhs = self.parse_expr(rbp)
            node = Bin(kind, node, rhs)
        return node

    def parse_prefix(self):
        kind, value, offset = self.next()
        if kind == "num":
            return Num(value)
        if kind == "-":
            return Unary("-", self.parse_expr(_UNARY_BP))
        if kind == "(":
            node = self.parse_expr(0)
            self.expect(")")
            return node
        if kind == "ident":
            if self.peek()[0] == "(":
                return self.parse_call(value, offset)
            if value in _VARIABLES:
                return Var(value)
            raise ExprSyntaxError(f"unknown identifier '{value}'", offset)
        raise ExprSyntaxError(f"unexpected token '{value}'", offset)

    def parse_call(self, name, offset):
        if name not in _FUNCTIONS:
            raise ExprSyntaxError(f"unknown function '{name}'", offset)
        self.expect("(")
        args = [self.parse_expr(0)]
        while self.peek()[0] == ",":
            self.next()
            args.append(self.parse_expr(0))
        self.expect(")")
        arity = _FUNCTIONS[name]
        if len(args) != arity:
            raise ExprSyntaxError(
                f"function '{name}' takes {arity} argument(s), got {len(args)}", offset)
        return Call(name, tuple(args))


def parse(source):
    """Parse ``source`` into an Expr tree.

    Raises ExprSyntaxError (with byte offset) on malformed input,
    unknown identifiers, or wrong function arity.  Only ``x`` and ``t``
    are legal variables; implicit multiplication is not supported.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(source)
    node = parser.parse_expr(0)
    tok = parser.peek()
    if tok[0] != "end":
        raise ExprSyntaxError(f"trailing input '{tok[1]}'", tok[2])
    return node


# --- Evaluation ------------------------------------------------------

_UNARY_FUNCS = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt,
    "abs": np.abs, "tanh": np.tanh,
}


def _check_finite(value, node, message):
    bad = ~np.isfinite(value) if isinstance(value, np.ndarray) else not np.isfinite(value)
    if np.any(bad):
        raise ExprDomainError(message, to_string(node))


def _eval(node, x, t):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x if node.name == "x" else t
    if isinstance(node, Unary):
        return -_eval(node.operand, x, t)
    if isinstance(node, Bin):
        lhs = _eval(node.left, x, t)
        rhs = _eval(node.right, x, t)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        if node.op == "/":
            if np.any(rhs == 0):
                raise ExprDomainError("division by zero", to_string(node))
            return lhs / rhs
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            out = np.power(lhs, rhs)
        _check_finite(out, node, "invalid power")
        return out
    if isinstance(node, Call):
        args = [_eval(a, x, t) for a in node.args]
        if node.name == "min":
            return np.minimum(args[0], args[1])
        if node.name == "max":
            return np.maximum(args[0], args[1])
        if node.name == "sqrt" and np.any(np.asarray(args[0]) < 0):
            raise ExprDomainError("sqrt of negative value", to_string(node))
        with np.errstate(over="ignore"):
            out = _UNARY_FUNCS[node.name](args[0])
        _check_finite(out, node, f"overflow in {node.name}")
        return out
    raise TypeError(f"not an Expr node: {node!r}")


def evaluate(node, x, t):
    """Evaluate ``node`` at (x, t); scalars or broadcasting numpy arrays."""
    return _eval(node, x, t)


# --- Printing --------------------------------------------------------

def _prec(node):
    if isinstance(node, Bin):
        return _BINARY_BP[node.op][0]
    if isinstance(node, Unary):
        return _UNARY_BP
    return 100


def to_string(node):
    """Render with minimal parentheses; parse(to_string(e)) == e."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        inner = to_string(node.operand)
        if _prec(node.operand) < _UNARY_BP:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Bin):
        lbp, rbp = _BINARY_BP[node.op]
        left = to_string(node.left)
        right = to_string(node.right)
        # '^' is right-associative, so an equal-precedence left operand
        # must keep its parentheses; for the left-associative operators
        # the same applies to the right operand (rbp = lbp + 1 handles it)
        if _prec(node.left) < lbp or (node.op == "^" and _prec(node.left) == lbp):
            left = f"({left})"
        if _prec(node.right) < rbp:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Call):
        args = ", ".join(to_string(a) for a in node.args)
        return f"{node.name}({args})"
    raise TypeError(f"not an Expr node: {node!r}")


def as_fn_x(node):
    """Adapt an Expr in x to a one-argument callable (t fixed at 0)."""
    return lambda x: _eval(node, x, 0.0)


def as_fn_t(node):
    """Adapt an Expr in t to a one-argument callable (x fixed at 0)."""
    return lambda t: _eval(node, 0.0, t)


def variables(node):
    """Set of variable names appearing in the tree ('x', 't')."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Unary):
        return variables(node.operand)
    if isinstance(node, Bin):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        out = set()
        for a in node.args:
            out |= variables(a)
        return out
    return set()
