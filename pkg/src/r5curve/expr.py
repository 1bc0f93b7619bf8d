"""Expression language for hypersurface components.

Expressions are closed-form functions of the four parameters ``u1..u4``.
They are parsed into a small immutable tree, differentiated symbolically and
evaluated in double precision, either by walking the tree or through a
compiled Python function (same operations, same rounding).

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := number | u1..u4 | pi | e | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | tan | exp | ln | sqrt
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from itertools import combinations_with_replacement

from .errors import DomainError, OrderExceeded, ParseError

MAX_ORDER = 5
NPARAMS = 4

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}


class Ast:
    """Base class of expression nodes."""

    __slots__ = ()

    def __str__(self):
        return unparse(self)


@dataclass(frozen=True)
class Num(Ast):
    value: float


@dataclass(frozen=True)
class Var(Ast):
    index: int

    def __post_init__(self):
        if not 1 <= self.index <= NPARAMS:
            raise ValueError(f"parameter index {self.index} outside 1..{NPARAMS}")


@dataclass(frozen=True)
class Const(Ast):
    name: str

    @property
    def value(self):
        return CONSTANTS[self.name]


@dataclass(frozen=True)
class Neg(Ast):
    arg: Ast


@dataclass(frozen=True)
class BinOp(Ast):
    op: str
    left: Ast
    right: Ast

    @property
    def integer_exponent(self):
        """Exponent of a power node whose exponent is a literal integer, else None."""
        if self.op != "^":
            return None
        r = self.right
        if isinstance(r, Neg) and isinstance(r.arg, Num):
            r = Num(-r.arg.value)
        if isinstance(r, Num) and float(r.value).is_integer():
            return int(r.value)
        return None


@dataclass(frozen=True)
class Call(Ast):
    func: str
    arg: Ast


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _byte_offset(text, i):
    return len(text[:i].encode("utf-8"))


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, n)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {op!r}, found {found}", off)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            if kind == "op" and val == ")":
                raise ParseError("unbalanced parenthesis", off)
            raise ParseError(f"unexpected trailing token {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.factor())
            else:
                return node

    def factor(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.factor())
        node = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            node = BinOp("^", node, self.factor())
        return node

    def base(self):
        kind, val, off = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            if val in CONSTANTS:
                return Const(val)
            m = re.fullmatch(r"u([1-9]\d*)", val)
            if m and 1 <= int(m.group(1)) <= NPARAMS:
                return Var(int(m.group(1)))
            raise ParseError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", off)
        raise ParseError(f"unexpected token {val!r}", off)


def parse(text: str) -> Ast:
    """Parse ``text`` into an expression tree; raises ParseError."""
    return _Parser(text).parse()


def unparse(node: Ast) -> str:
    """Render a tree back to the grammar, fully parenthesized."""
    if isinstance(node, Num):
        v = node.value
        s = repr(float(v))
        if not math.isfinite(v):
            raise ValueError(f"cannot render non-finite literal {v}")
        return f"(-{s[1:]})" if s.startswith("-") else s
    if isinstance(node, Var):
        return f"u{node.index}"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return f"(-{unparse(node.arg)})"
    if isinstance(node, BinOp):
        return f"({unparse(node.left)}{node.op}{unparse(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({unparse(node.arg)})"
    raise TypeError(node)


# ---------------------------------------------------------------------------
# evaluation


def _fdiv(a, b):
    try:
        return a / b
    except ZeroDivisionError:
        raise DomainError("division by zero") from None


def _fpow(a, b):
    try:
        return math.pow(a, b)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"power {a!r}^{b!r} undefined") from None
    except OverflowError:
        raise DomainError(f"power {a!r}^{b!r} overflows") from None


def _fln(a):
    if a <= 0.0:
        raise DomainError(f"ln of non-positive value {a!r}")
    return math.log(a)


def _fsqrt(a):
    if a < 0.0:
        raise DomainError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


def _fexp(a):
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError(f"exp({a!r}) overflows") from None


def _ftan(a):
    v = math.tan(a)
    if not math.isfinite(v) or abs(v) > 1e15:
        raise DomainError(f"tan({a!r}) at a pole")
    return v


_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": _ftan,
    "exp": _fexp,
    "ln": _fln,
    "sqrt": _fsqrt,
}


def _check(v):
    if not math.isfinite(v):
        raise DomainError("non-finite result")
    return v


def evaluate(node: Ast, params) -> float:
    """Evaluate ``node`` at the parameter 4-tuple ``params``."""
    return _check(_eval(node, params))


def _eval(node, p):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(p[node.index - 1])
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Neg):
        return -_eval(node.arg, p)
    if isinstance(node, BinOp):
        a = _eval(node.left, p)
        b = _eval(node.right, p)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return _fdiv(a, b)
        return _fpow(a, b)
    if isinstance(node, Call):
        return _check(_FUNCS[node.func](_eval(node.arg, p)))
    raise TypeError(node)


def _pysrc(node):
    if isinstance(node, Num):
        return f"({node.value!r})"
    if isinstance(node, Var):
        return f"u{node.index}"
    if isinstance(node, Const):
        return f"({node.value!r})"
    if isinstance(node, Neg):
        return f"(-{_pysrc(node.arg)})"
    if isinstance(node, BinOp):
        a, b = _pysrc(node.left), _pysrc(node.right)
        if node.op == "/":
            return f"_div({a}, {b})"
        if node.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {node.op} {b})"
    if isinstance(node, Call):
        return f"_{node.func}({_pysrc(node.arg)})"
    raise TypeError(node)


_COMPILE_NS = {
    "_div": _fdiv,
    "_pow": _fpow,
    "_sin": math.sin,
    "_cos": math.cos,
    "_tan": _ftan,
    "_exp": _fexp,
    "_ln": _fln,
    "_sqrt": _fsqrt,
    "_isfinite": math.isfinite,
    "DomainError": DomainError,
}


def compile_many(nodes):
    """Compile a sequence of trees into ``f(u1, u2, u3, u4) -> list[float]``.

    The generated code performs exactly the operations of :func:`evaluate`,
    so both paths return bit-identical values.
    """
    body = ",\n        ".join(_pysrc(n) for n in nodes)
    src = (
        "def _f(u1, u2, u3, u4):\n"
        "    try:\n"
        f"        out = [\n        {body}\n        ]\n"
        "    except (ValueError, OverflowError) as exc:\n"
        "        raise DomainError(str(exc)) from None\n"
        "    if not _isfinite(sum(out)):\n"
        "        raise DomainError('non-finite result')\n"
        "    return out\n"
    )
    ns = dict(_COMPILE_NS)
    exec(compile(src, "<r5curve-expr>", "exec"), ns)
    return ns["_f"]


# ---------------------------------------------------------------------------
# simplifying constructors


def _is_num(node, value=None):
    return isinstance(node, Num) and (value is None or node.value == value)


def _fold(fn, *args):
    try:
        v = fn(*args)
    except Exception:
        return None
    if isinstance(v, float) and math.isfinite(v):
        return Num(v)
    return None


def add(a, b):
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a, b):
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a, b):
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a, -1.0):
        return neg(b)
    if _is_num(b, -1.0):
        return neg(a)
    return BinOp("*", a, b)


def div(a, b):
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        folded = _fold(_fdiv, a.value, b.value)
        if folded is not None:
            return folded
    return BinOp("/", a, b)


def power(a, b):
    if _is_num(b, 0.0):
        return Num(1.0)
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        folded = _fold(_fpow, a.value, b.value)
        if folded is not None:
            return folded
    return BinOp("^", a, b)


def neg(a):
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def call(func, a):
    if _is_num(a):
        folded = _fold(_FUNCS[func], a.value)
        if folded is not None:
            return folded
    return Call(func, a)


# ---------------------------------------------------------------------------
# differentiation


def is_constant(node: Ast) -> bool:
    if isinstance(node, (Num, Const)):
        return True
    if isinstance(node, Var):
        return False
    if isinstance(node, (Neg, Call)):
        return is_constant(node.arg)
    return is_constant(node.left) and is_constant(node.right)


def differentiate(node: Ast, k: int) -> Ast:
    """Symbolic partial derivative of ``node`` with respect to ``u_k``."""
    if not 1 <= k <= NPARAMS:
        raise ValueError(f"parameter index {k} outside 1..{NPARAMS}")
    return _d(node, k)


def _d(node, k):
    if isinstance(node, (Num, Const)):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0 if node.index == k else 0.0)
    if isinstance(node, Neg):
        return neg(_d(node.arg, k))
    if isinstance(node, Call):
        a = node.arg
        da = _d(a, k)
        if _is_num(da, 0.0):
            return Num(0.0)
        f = node.func
        if f == "sin":
            return mul(call("cos", a), da)
        if f == "cos":
            return neg(mul(call("sin", a), da))
        if f == "tan":
            return div(da, power(call("cos", a), Num(2.0)))
        if f == "exp":
            return mul(node, da)
        if f == "ln":
            return div(da, a)
        if f == "sqrt":
            return div(da, mul(Num(2.0), node))
        raise TypeError(f)
    if isinstance(node, BinOp):
        a, b = node.left, node.right
        op = node.op
        if op == "+":
            return add(_d(a, k), _d(b, k))
        if op == "-":
            return sub(_d(a, k), _d(b, k))
        if op == "*":
            return add(mul(_d(a, k), b), mul(a, _d(b, k)))
        if op == "/":
            da, db = _d(a, k), _d(b, k)
            return sub(div(da, b), div(mul(a, db), power(b, Num(2.0))))
        # power
        if is_constant(b):
            da = _d(a, k)
            if _is_num(da, 0.0):
                return Num(0.0)
            c = b
            if isinstance(c, Neg) and _is_num(c.arg):
                c = Num(-c.arg.value)
            return mul(mul(c, power(a, sub(c, Num(1.0)))), da)
        return _d(Call("exp", BinOp("*", b, Call("ln", a))), k)
    raise TypeError(node)


# ---------------------------------------------------------------------------
# multi-indices and partial tables


def multi_index(indices) -> tuple:
    """Canonical (sorted) form of a list of parameter indices."""
    idx = tuple(sorted(int(i) for i in indices))
    if len(idx) > MAX_ORDER:
        raise OrderExceeded(f"derivative order {len(idx)} exceeds {MAX_ORDER}")
    for i in idx:
        if not 1 <= i <= NPARAMS:
            raise ValueError(f"parameter index {i} outside 1..{NPARAMS}")
    return idx


def multi_indices(max_order: int) -> list:
    """All canonical multi-indices of order 0..max_order, grouped by order."""
    out = []
    for r in range(max_order + 1):
        out.extend(combinations_with_replacement(range(1, NPARAMS + 1), r))
    return out


class PartialTable:
    """Lazily built, memoized mixed partial derivatives of one expression."""

    def __init__(self, root: Ast):
        self.root = root
        self._entries = {(): root}
        self._lock = threading.Lock()

    def partial(self, sigma=()) -> Ast:
        key = multi_index(sigma)
        hit = self._entries.get(key)
        if hit is not None:
            return hit
        with self._lock:
            return self._build(key)

    def _build(self, key):
        hit = self._entries.get(key)
        if hit is None:
            parent = self._build(key[:-1])
            hit = differentiate(parent, key[-1])
            self._entries[key] = hit
        return hit

    def build(self, max_order=MAX_ORDER):
        for sigma in multi_indices(max_order):
            self.partial(sigma)
        return self

    def evaluated(self, params, max_order=MAX_ORDER) -> dict:
        return {s: evaluate(self.partial(s), params) for s in multi_indices(max_order)}

    def __len__(self):
        return len(self._entries)
