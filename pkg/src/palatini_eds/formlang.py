"""A small surface language for forms: parser, canonical printer and elaboration.

Grammar (LL(1))::

    expr   := term (('+' | '-') term)*
    term   := unary (('^' | '*') unary)*
    unary  := '-' unary | factor
    factor := NUMBER ['/' NUMBER]
            | NAME ['[' index (',' index)* ']']
            | 'd' '(' expr ')'
            | 'i_' '(' frame ',' expr ')'
            | 'L' '(' frame ',' expr ')'
            | 'sum' '(' NAME ',' expr ')'
            | '(' expr ')'
    frame  := NAME '[' index ']'
    index  := INTEGER | NAME

``^`` is the wedge product and ``*`` multiplication by a 0-form; both are
left-associative and bind tighter than ``+``/``-``.  Index letters are binders
introduced by ``sum`` and expanded over 1..n at elaboration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exterior_algebra import Form, FormError, GeneratorTable, VectorField, interior, levi_civita, lie_derivative

KEYWORDS = {"d", "i_", "L", "sum"}

# symbol -> number of indices (None: checked at elaboration)
ARITY = {
    "theta": 1, "omega": 2, "Omega": 2, "T": 1, "omega_up": 2, "Omega_up": 2,
    "thetaL": None, "eps": None, "eta": 2, "dtheta": 1, "domega": 2,
    "x": 1, "e": 2, "ej": 3, "g": 2, "Gamma": 3, "sqrtg": 0, "X": 1,
}

FORM_DEGREE = {"theta": 1, "omega": 1, "Omega": 2, "T": 2, "omega_up": 1, "Omega_up": 2, "dtheta": 1, "domega": 1}


class FormLangError(ValueError):
    """Base class; carries a 1-based line and column."""

    kind = "error"

    def __init__(self, message: str, line: int, col: int, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        text = f"{self.kind} at line {line}, column {col}: {message}"
        if self.expected:
            text += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(text)


class LexError(FormLangError):
    kind = "lexical error"


class ParseError(FormLangError):
    kind = "syntax error"


class ArityError(FormLangError):
    kind = "index arity error"


class DegreeError(FormLangError):
    kind = "degree error"


class ElaborationError(FormLangError):
    kind = "elaboration error"


# -- lexer ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, NAME, a punctuation character, or EOF
    text: str
    line: int
    col: int


PUNCT = set("[](),+-^*/")


def tokenize(text: str) -> list:
    out = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start = col
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(Token("NUMBER", text[i:j], line, start))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(Token("NAME", text[i:j], line, start))
            col += j - i
            i = j
            continue
        if ch in PUNCT:
            out.append(Token(ch, ch, line, start))
            i += 1
            col += 1
            continue
        raise LexError(f"unexpected character {ch!r}", line, col)
    out.append(Token("EOF", "", line, col))
    return out


# -- AST -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: Fraction
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Sym(Node):
    name: str
    indices: tuple  # ints (1-based) or index letters
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # '+', '-', '^', '*'
    left: Node
    right: Node
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class D(Node):
    operand: Node
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Interior(Node):
    frame: Sym
    operand: Node
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Lie(Node):
    frame: Sym
    operand: Node
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Sum(Node):
    var: str
    body: Node
    pos: tuple = field(default=(0, 0), compare=False)


# -- parser --------------------------------------------------------------------------

OPERAND_START = {"NUMBER", "NAME", "(", "-"}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _fail(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "EOF" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.line, t.col, expected)

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self._fail({kind})
        t = self.tok
        self.i += 1
        return t

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "EOF":
            self._fail({"+", "-", "^", "*", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind in ("+", "-"):
            t = self.tok
            self.i += 1
            node = BinOp(t.kind, node, self.term(), (t.line, t.col))
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind in ("^", "*"):
            t = self.tok
            self.i += 1
            node = BinOp(t.kind, node, self.unary(), (t.line, t.col))
        return node

    def unary(self) -> Node:
        if self.tok.kind == "-":
            t = self.tok
            self.i += 1
            return Neg(self.unary(), (t.line, t.col))
        return self.factor()

    def factor(self) -> Node:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "NUMBER":
            self.i += 1
            value = Fraction(int(t.text))
            if self.tok.kind == "/":
                self.i += 1
                den = self.expect("NUMBER")
                if int(den.text) == 0:
                    raise ParseError("zero denominator", den.line, den.col)
                value = value / int(den.text)
            return Num(value, pos)
        if t.kind == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if t.kind != "NAME":
            self._fail({"operand"})
        name = t.text
        if name in KEYWORDS:
            self.i += 1
            self.expect("(")
            if name == "d":
                node = D(self.expr(), pos)
            elif name == "sum":
                var = self.expect("NAME")
                if var.text in KEYWORDS or var.text in ARITY:
                    raise ParseError(f"{var.text!r} cannot be an index letter", var.line, var.col)
                self.expect(",")
                node = Sum(var.text, self.expr(), pos)
            else:
                frame = self.symbol()
                if frame.name != "X" or len(frame.indices) != 1:
                    raise ParseError("a frame is written X[k]", frame.pos[0], frame.pos[1])
                self.expect(",")
                body = self.expr()
                node = Interior(frame, body, pos) if name == "i_" else Lie(frame, body, pos)
            self.expect(")")
            return node
        return self.symbol()

    def symbol(self) -> Sym:
        t = self.expect("NAME")
        if t.text in KEYWORDS:
            raise ParseError(f"keyword {t.text!r} needs '('", t.line, t.col, {"("})
        idx = []
        if self.tok.kind == "[":
            self.i += 1
            idx.append(self.index())
            while self.tok.kind == ",":
                self.i += 1
                idx.append(self.index())
            self.expect("]")
        ar = ARITY.get(t.text)
        if ar is not None and len(idx) != ar:
            raise ArityError(f"{t.text} takes {ar} indices, got {len(idx)}", t.line, t.col)
        if t.text in ("thetaL", "eps") and not idx:
            raise ArityError(f"{t.text} needs at least one index", t.line, t.col)
        return Sym(t.text, tuple(idx), (t.line, t.col))

    def index(self):
        t = self.tok
        if t.kind == "NUMBER":
            self.i += 1
            return int(t.text)
        if t.kind == "NAME" and t.text not in KEYWORDS:
            self.i += 1
            return t.text
        self._fail({"index"})


def parse(text: str) -> Node:
    """Parse expression text; errors carry line, column and the expected-token set."""
    return _Parser(text).parse()


# -- printer -------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "^": 2, "*": 2}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 4


def to_text(node: Node) -> str:
    """Canonical text; ``parse(to_text(parse(s))) == parse(s)``."""
    if isinstance(node, Num):
        v = node.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(node, Sym):
        if not node.indices:
            return node.name
        return f"{node.name}[{','.join(str(i) for i in node.indices)}]"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < 3:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_text(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = to_text(node.right)
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, D):
        return f"d({to_text(node.operand)})"
    if isinstance(node, Interior):
        return f"i_({to_text(node.frame)}, {to_text(node.operand)})"
    if isinstance(node, Lie):
        return f"L({to_text(node.frame)}, {to_text(node.operand)})"
    if isinstance(node, Sum):
        return f"sum({node.var}, {to_text(node.body)})"
    raise TypeError(f"not an AST node: {node!r}")


# -- static checks -------------------------------------------------------------------


def free_indices(node: Node, bound=frozenset()) -> set:
    if isinstance(node, Sym):
        return {i for i in node.indices if isinstance(i, str) and i not in bound}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Sum):
        return free_indices(node.body, bound | {node.var})
    if isinstance(node, (Interior, Lie)):
        return free_indices(node.frame, bound) | free_indices(node.operand, bound)
    if isinstance(node, BinOp):
        return free_indices(node.left, bound) | free_indices(node.right, bound)
    return free_indices(node.operand, bound)


def degree(node: Node, n: int) -> int:
    """Form degree computed from the tree alone (before any index expansion)."""
    if isinstance(node, Num):
        return 0
    if isinstance(node, Sym):
        if node.name in FORM_DEGREE:
            return FORM_DEGREE[node.name]
        if node.name == "thetaL":
            k = len(node.indices)
            if k > n:
                raise DegreeError(f"thetaL takes at most {n} indices", *node.pos)
            return n - k
        if node.name == "X":
            raise DegreeError("a frame is only allowed as the first argument of i_ or L", *node.pos)
        return 0
    if isinstance(node, Neg):
        return degree(node.operand, n)
    if isinstance(node, D):
        return degree(node.operand, n) + 1
    if isinstance(node, Interior):
        k = degree(node.operand, n)
        if k == 0:
            raise DegreeError("interior product of a 0-form", *node.pos)
        return k - 1
    if isinstance(node, Lie):
        return degree(node.operand, n)
    if isinstance(node, Sum):
        return degree(node.body, n)
    a, b = degree(node.left, n), degree(node.right, n)
    if node.op in ("+", "-"):
        if a != b:
            raise DegreeError(f"adding forms of degrees {a} and {b}", *node.pos)
        return a
    if node.op == "*" and a and b:
        raise DegreeError(f"'*' needs a 0-form factor (got degrees {a} and {b}); use '^'", *node.pos)
    return a + b


# -- contexts ------------------------------------------------------------------------

CONTEXTS = ("abstract-cartan", "jet-coordinates", "reduced")


class _Context:
    name = ""
    symbols: tuple = ()

    def __init__(self, n: int, eta):
        from .frame_geometry import _sig

        self.n = n
        self.eta = _sig(eta, n)

    def table(self) -> GeneratorTable:
        raise NotImplementedError

    def symbol(self, name: str, idx: tuple) -> Form:
        raise NotImplementedError

    def frame(self, k: int) -> VectorField:
        raise NotImplementedError

    def common(self, name: str, idx: tuple):
        t = self.table()
        if name == "eta":
            return t.scalar(self.eta.up(idx[0], idx[1]))
        if name == "eps":
            if len(idx) != self.n:
                raise KeyError(f"eps takes {self.n} indices in dimension {self.n}")
            return t.scalar(levi_civita([i + 1 for i in idx]))
        return None


class _FrameContext(_Context):
    """Shared by the abstract table and the jet realization: theta, omega, T, Omega and friends."""

    frame_symbols = ("theta", "omega", "Omega", "T", "omega_up", "Omega_up", "thetaL")

    def forms(self):
        raise NotImplementedError

    def frame_symbol(self, name: str, idx: tuple):
        F = self.forms()
        if name == "theta":
            return F.theta[idx[0]]
        if name == "omega":
            return F.omega[idx[0]][idx[1]]
        if name == "Omega":
            return F.Omega[idx[0]][idx[1]]
        if name == "T":
            return F.T[idx[0]]
        if name == "omega_up":
            return F.omega_up(*idx)
        if name == "Omega_up":
            return F.Omega_up(*idx)
        if name == "thetaL":
            return F.low(*idx)
        return None


class AbstractCartanContext(_FrameContext):
    name = "abstract-cartan"

    def __init__(self, n: int, eta=None, variations: bool = False, forms=None):
        """``forms`` reuses an existing abstract table (its n and eta win)."""
        if forms is not None:
            n, eta, variations = forms.n, forms.eta, "dtheta" in forms.extras
        super().__init__(n, eta)
        from .frame_geometry import cartan_table

        self.F = forms if forms is not None else cartan_table(n, self.eta, variations=variations)
        self.variations = variations

    def forms(self):
        return self.F

    def table(self):
        return self.F.table

    def symbol(self, name, idx):
        f = self.common(name, idx)
        if f is None:
            f = self.frame_symbol(name, idx)
        if f is None and name in ("dtheta", "domega"):
            if not self.variations:
                raise KeyError(f"{name} needs the variation generators")
            f = self.F.extras["dtheta"][idx[0]] if name == "dtheta" else self.F.extras["domega_up"][idx[0]][idx[1]]
        if f is None:
            raise KeyError(f"unknown symbol {name!r} in context {self.name}")
        return f

    def frame(self, k):
        """The frame dual to theta: theta^j(X_k) = delta^j_k, zero on every other 1-form generator."""
        t = self.F.table
        return VectorField(t, {f"theta[{k + 1}]": 1}, others_zero=True)


class JetCoordinatesContext(_FrameContext):
    name = "jet-coordinates"

    def __init__(self, n: int, eta=None):
        super().__init__(n, eta)
        from .frame_geometry import JetFrameContext

        self.ctx = JetFrameContext(n, self.eta)
        self._F = None

    def forms(self):
        if self._F is None:
            from .frame_geometry import canonical_forms

            self._F = canonical_forms(self.ctx)
        return self._F

    def table(self):
        return self.ctx.table

    def symbol(self, name, idx):
        f = self.common(name, idx)
        if f is None:
            f = self.frame_symbol(name, idx)
        if f is not None:
            return f
        c = self.ctx
        if name == "x":
            return c.table.var(c.x[idx[0]])
        if name == "e":
            return c.table.var(c.e[idx[0]][idx[1]])
        if name == "ej":
            return c.table.var(c.ej[idx[0]][idx[1]][idx[2]])
        raise KeyError(f"unknown symbol {name!r} in context {self.name}")

    def frame(self, k):
        """The horizontal field e^mu_k d/dx^mu."""
        c = self.ctx
        vals = {c.table.differential_index(c.x[m]): c.E[m][k] for m in range(self.n)}
        return VectorField(c.table, vals, others_zero=True)


class ReducedCoordinatesContext(_Context):
    name = "reduced"

    def __init__(self, n: int, eta=None):
        super().__init__(n, eta)
        from .reduction import ReducedContext

        self.r = ReducedContext(n, self.eta)

    def table(self):
        return self.r.table

    def symbol(self, name, idx):
        f = self.common(name, idx)
        if f is not None:
            return f
        r = self.r
        t = r.table
        if name == "x":
            return t.var(r.x[idx[0]])
        if name == "g":
            return t.var(r.gslot[(idx[0], idx[1])])
        if name == "Gamma":
            return t.var(r.G[idx[0]][idx[1]][idx[2]])
        if name == "sqrtg":
            return t.var("sqrtg")
        raise KeyError(f"unknown symbol {name!r} in context {self.name}")

    def frame(self, k):
        """The coordinate field d/dx^k."""
        t = self.r.table
        return VectorField(t, {t.differential_index(self.r.x[k]): 1}, others_zero=True)


def make_context(name: str, n: int, eta=None, variations: bool = False) -> _Context:
    if name == "abstract-cartan":
        return AbstractCartanContext(n, eta, variations)
    if name == "jet-coordinates":
        return JetCoordinatesContext(n, eta)
    if name == "reduced":
        return ReducedCoordinatesContext(n, eta)
    raise ValueError(f"unknown context {name!r}; known: {', '.join(CONTEXTS)}")


def _uses_variations(node: Node) -> bool:
    if isinstance(node, Sym):
        return node.name in ("dtheta", "domega")
    if isinstance(node, Num):
        return False
    if isinstance(node, BinOp):
        return _uses_variations(node.left) or _uses_variations(node.right)
    if isinstance(node, Sum):
        return _uses_variations(node.body)
    return _uses_variations(node.operand)


# -- elaboration ---------------------------------------------------------------------


def elaborate(node: Node, context, n: int | None = None, eta=None, free: dict | None = None) -> Form:
    """Expand all sums and build the Form on the context's table.

    ``context`` is a context name (then ``n`` is required) or a context object;
    ``free`` assigns values (1-based) to index letters left unbound.
    """
    if isinstance(context, str):
        if n is None:
            raise ValueError("a context name needs the dimension n")
        if context == "abstract-cartan" and _uses_variations(node):
            context = make_context(context, n, eta, variations=True)
        else:
            context = make_context(context, n, eta)
    n = context.n
    free = dict(free or {})
    unbound = free_indices(node) - set(free)
    if unbound:
        letter = sorted(unbound)[0]
        pos = _find_index(node, letter) or (1, 1)
        raise ElaborationError(f"index {letter!r} is neither bound by sum nor declared free", *pos)
    degree(node, n)
    return _elab(node, context, {k: int(v) for k, v in free.items()})


def _find_index(node: Node, letter: str):
    if isinstance(node, Sym):
        return node.pos if letter in node.indices else None
    if isinstance(node, Num):
        return None
    if isinstance(node, BinOp):
        return _find_index(node.left, letter) or _find_index(node.right, letter)
    if isinstance(node, (Interior, Lie)):
        return _find_index(node.frame, letter) or _find_index(node.operand, letter)
    if isinstance(node, Sum):
        return None if node.var == letter else _find_index(node.body, letter)
    return _find_index(node.operand, letter)


def _resolve(sym: Sym, ctx: _Context, env: dict) -> tuple:
    out = []
    for i in sym.indices:
        v = env[i] if isinstance(i, str) else i
        if not 1 <= v <= ctx.n:
            raise ElaborationError(f"index {v} of {sym.name} out of range 1..{ctx.n}", *sym.pos)
        out.append(v - 1)
    return tuple(out)


def _elab(node: Node, ctx: _Context, env: dict) -> Form:
    t = ctx.table()
    if isinstance(node, Num):
        return t.scalar(node.value)
    if isinstance(node, Sym):
        idx = _resolve(node, ctx, env)
        try:
            return ctx.symbol(node.name, idx)
        except (KeyError, FormError) as exc:
            msg = exc.args[0] if exc.args else str(exc)
            raise ElaborationError(str(msg), *node.pos) from None
    if isinstance(node, Neg):
        return -_elab(node.operand, ctx, env)
    if isinstance(node, D):
        return _elab(node.operand, ctx, env).d()
    if isinstance(node, (Interior, Lie)):
        (k,) = _resolve(node.frame, ctx, env)
        X = ctx.frame(k)
        body = _elab(node.operand, ctx, env)
        try:
            return interior(X, body) if isinstance(node, Interior) else lie_derivative(X, body)
        except FormError as exc:
            raise ElaborationError(str(exc), *node.pos) from None
    if isinstance(node, Sum):
        total = t.zero()
        for v in range(1, ctx.n + 1):
            total = total + _elab(node.body, ctx, {**env, node.var: v})
        return total
    a = _elab(node.left, ctx, env)
    b = _elab(node.right, ctx, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    return a.wedge(b)


# expressions used by the round-trip tests and the CLI examples
CORPUS = (
    "d(theta[1]) + sum(k, omega[1,k] ^ theta[k])",
    "sum(i, sum(p, sum(q, thetaL[i,p,q] ^ Omega_up[p,q])))",
    "sum(p, sum(q, thetaL[1,p,q] ^ Omega_up[p,q]))",
    "sum(k, sum(l, sum(p, eta[k,p] * thetaL[k,l] ^ Omega[l,p])))",
    "omega_up[1,2] + omega_up[2,1]",
    "d(T[1]) - sum(l, Omega[1,l] ^ theta[l] - omega[1,l] ^ T[l])",
    "-theta[1] ^ theta[2] + 1/2 * theta[2] ^ theta[1]",
    "-(theta[1] ^ theta[2])",
    "theta[1] - (theta[2] - theta[1])",
    "i_(X[1], theta[1] ^ theta[2])",
    "L(X[2], d(x[1]) ^ d(x[2]))",
    "eps[1,2] * theta[1] ^ theta[2]",
    "sum(i, sum(k, thetaL[i,k] ^ domega[i,k]))",
    "sum(s, Gamma[s,s,1]) * d(x[1])",
    "d(g[1,2]) + sum(s, g[1,s] * Gamma[2,1,s] + g[2,s] * Gamma[1,1,s]) * d(x[1])",
    "sqrtg * sqrtg",
    "e[1,1] * ej[1,2,1] - 3/4",
)
