"""Exact multivariate polynomials and rational functions over declared variables.

Polynomials are sparse dicts from packed exponent vectors to rational
coefficients.  Each variable owns a 16-bit field of the packed integer, the top
bit of every field being a guard bit used for fast divisibility tests.

A :class:`ScalarExpr` is a numerator polynomial over a product of powers of
registered primitive "atoms".  No multivariate gcd is ever computed: after each
operation we only try exact division of the numerator by the atoms that occur
in the denominator, which is enough to keep expressions small in practice.
Zero testing never depends on that cancellation, because a quotient is zero
exactly when its numerator is.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from heapq import heapify, heappop, heappush
from itertools import permutations
from math import gcd
from typing import Iterable

BITS = 16
FIELD = (1 << BITS) - 1
MAX_EXP = (1 << (BITS - 1)) - 1

KINDS = ("coordinate", "fiber", "parameter")


class RingError(ValueError):
    pass


# -- raw polynomial helpers (dict[int, int | Fraction]) ---------------------


def _qdiv(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if not r:
            return q
    res = Fraction(a) / b
    return res.numerator if res.denominator == 1 else res


def _norm_coef(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def padd(a: dict, b: dict, scale=1) -> dict:
    if len(b) > len(a) and scale == 1:
        a, b = b, a
    r = dict(a)
    get = r.get
    for k, v in b.items():
        s = get(k, 0) + (v if scale == 1 else v * scale)
        if s:
            r[k] = s
        else:
            r.pop(k, None)
    return r


def pscale(a: dict, c) -> dict:
    if c == 1:
        return a
    if not c:
        return {}
    return {k: _norm_coef(v * c) for k, v in a.items()}


def pmul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(a) == 1:
        (ka, va), = a.items()
        if ka == 0:
            return pscale(b, va)
        return {kb + ka: _norm_coef(vb * va) for kb, vb in b.items()}
    if len(b) == 1:
        (kb, vb), = b.items()
        if kb == 0:
            return pscale(a, vb)
        return {ka + kb: _norm_coef(va * vb) for ka, va in a.items()}
    r: dict = {}
    get = r.get
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka + kb
            r[k] = get(k, 0) + va * vb
    return {k: _norm_coef(v) for k, v in r.items() if v}


def ppow(a: dict, e: int) -> dict:
    result = {0: 1}
    base = a
    while e:
        if e & 1:
            result = pmul(result, base)
        e >>= 1
        if e:
            base = pmul(base, base)
    return result


def pdivexact(a: dict, b: dict, guard: int):
    """Return a/b if b divides a exactly (over the rationals), else None."""
    if not a:
        return {}
    lb = max(b)
    cb = b[lb]
    if len(b) == 1:
        out = {}
        for k, v in a.items():
            if ((k | guard) - lb) & guard != guard:
                return None
            out[k - lb] = _qdiv(v, cb)
        return out
    # trailing monomials must divide too (the packed order is a monomial order)
    tb = min(b)
    if ((min(a) | guard) - tb) & guard != guard:
        return None
    r = dict(a)
    q = {}
    rest = [(k, v) for k, v in b.items() if k != lb]
    heap = [-k for k in r]
    heapify(heap)
    while r:
        # lazy deletion: skip keys that cancelled since they were pushed
        lr = -heappop(heap)
        if lr not in r:
            continue
        if ((lr | guard) - lb) & guard != guard:
            return None
        qk = lr - lb
        qc = _qdiv(r.pop(lr), cb)
        q[qk] = qc
        for kb, vb in rest:
            k = qk + kb
            old = r.get(k)
            v = (old or 0) - qc * vb
            if v:
                r[k] = v
                if old is None:
                    heappush(heap, -k)
            elif old is not None:
                del r[k]
    return q


def pderiv(a: dict, shift: int) -> dict:
    unit = 1 << shift
    out = {}
    for k, v in a.items():
        e = (k >> shift) & FIELD
        if e:
            out[k - unit] = v * e
    return out


def primitive(a: dict):
    """Split a nonzero polynomial into (content, primitive integer polynomial).

    The primitive part has coprime integer coefficients and a positive leading
    coefficient with respect to the packed order; atoms are re-normalized to the
    declaration-order lex leading term when registered.
    """
    den = 1
    for v in a.values():
        if isinstance(v, Fraction):
            den = den * v.denominator // gcd(den, v.denominator)
    ints = {k: int(v * den) for k, v in a.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
        if g == 1:
            break
    if ints[max(ints)] < 0:
        g = -g
    prim = {k: v // g for k, v in ints.items()}
    return _norm_coef(Fraction(g, den)), prim


def monomial_gcd(a: dict, nvars: int) -> int:
    it = iter(a)
    m = next(it)
    for k in it:
        if not m:
            break
        out = 0
        for i in range(nvars):
            s = BITS * i
            e = min((m >> s) & FIELD, (k >> s) & FIELD)
            if e:
                out |= e << s
        m = out
    return m


def support_mask(a: dict, nvars: int) -> int:
    mask = 0
    for k in a:
        mask |= k
    out = 0
    for i in range(nvars):
        if (mask >> (BITS * i)) & FIELD:
            out |= 1 << i
    return out


# -- variables and rings ----------------------------------------------------


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    index: int

    @property
    def shift(self) -> int:
        return BITS * self.index


class Ring:
    """A context of declared variables shared by all scalar expressions built on it.

    Variables may be appended at any time; previously built expressions stay
    valid because exponent fields are addressed by declaration index.
    """

    def __init__(self, name: str = "R"):
        self.name = name
        self.variables: list[Variable] = []
        self._by_name: dict[str, Variable] = {}
        self._guard = 0
        self._atoms: list[dict] = []
        self._atom_info: list[tuple] = []
        self._atom_lookup: dict = {}
        self._atom_pow: dict = {}
        # var index -> ScalarExpr value of var**2
        self.square_relations: dict[int, "ScalarExpr"] = {}

    # declarations
    def declare(self, name: str, kind: str = "coordinate") -> Variable:
        if kind not in KINDS:
            raise RingError(f"unknown variable kind {kind!r}")
        if name in self._by_name:
            raise RingError(f"variable {name!r} already declared")
        v = Variable(name, kind, len(self.variables))
        self.variables.append(v)
        self._by_name[name] = v
        self._guard |= 1 << (v.shift + BITS - 1)
        return v

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def __getitem__(self, name) -> Variable:
        if isinstance(name, Variable):
            return name
        try:
            return self._by_name[name]
        except KeyError:
            raise RingError(f"variable {name!r} not declared in ring {self.name}") from None

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def guard(self) -> int:
        return self._guard

    def set_square_relation(self, var, value: "ScalarExpr") -> None:
        """Declare var**2 == value, used when normalizing for zero tests."""
        self.square_relations[self[var].index] = value

    # constructors
    def var(self, name) -> "ScalarExpr":
        v = self[name]
        return ScalarExpr(self, {1 << v.shift: 1})

    def const(self, c) -> "ScalarExpr":
        c = _norm_coef(Fraction(c)) if not isinstance(c, int) else c
        return ScalarExpr(self, {0: c} if c else {})

    @property
    def zero(self) -> "ScalarExpr":
        return ScalarExpr(self, {})

    @property
    def one(self) -> "ScalarExpr":
        return ScalarExpr(self, {0: 1})

    def coerce(self, x) -> "ScalarExpr":
        if isinstance(x, ScalarExpr):
            if x.ring is not self:
                raise RingError("scalar expression belongs to a different ring")
            return x
        if isinstance(x, (int, Fraction)):
            return self.const(x)
        if isinstance(x, Polynomial):
            return ScalarExpr(self, dict(x.terms))
        raise TypeError(f"cannot coerce {type(x).__name__} to a scalar")

    # atoms
    def _register_atom(self, prim: dict) -> int:
        key = frozenset(prim.items())
        aid = self._atom_lookup.get(key)
        if aid is None:
            aid = len(self._atoms)
            self._atoms.append(prim)
            lead = max(prim)
            tdeg = max(_tdeg(k) for k in prim)
            self._atom_info.append((lead, tdeg, support_mask(prim, self.nvars), len(prim) == 1))
            self._atom_lookup[key] = aid
        return aid

    def atom_poly(self, aid: int) -> dict:
        return self._atoms[aid]

    def atom_pow(self, aid: int, e: int) -> dict:
        if e == 1:
            return self._atoms[aid]
        key = (aid, e)
        p = self._atom_pow.get(key)
        if p is None:
            p = ppow(self._atoms[aid], e)
            self._atom_pow[key] = p
        return p

    def factor_denominator(self, p: dict):
        """Write a nonzero polynomial as content * prod(atom**e).

        Only trial division by known atoms is attempted; an unknown cofactor
        becomes a new atom.
        """
        content, prim = primitive(p)
        if len(prim) == 1 and 0 in prim:
            return content, ()
        factors: dict[int, int] = {}
        nv = self.nvars
        mg = monomial_gcd(prim, nv)
        if mg:
            for i in range(nv):
                e = (mg >> (BITS * i)) & FIELD
                if e:
                    aid = self._register_atom({1 << (BITS * i): 1})
                    factors[aid] = factors.get(aid, 0) + e
            prim = {k - mg: v for k, v in prim.items()}
        if len(prim) > 1:
            smask = support_mask(prim, nv)
            guard = self._guard
            for aid in range(len(self._atoms)):
                lead, tdeg, amask, mono = self._atom_info[aid]
                if mono or amask & ~smask:
                    continue
                while len(prim) > 1:
                    q = pdivexact(prim, self._atoms[aid], guard)
                    if q is None:
                        break
                    factors[aid] = factors.get(aid, 0) + 1
                    c2, prim = primitive(q)
                    content *= c2
                if len(prim) == 1:
                    break
            if len(prim) > 1:
                if prim[max(prim, key=self.exponents)] < 0:
                    prim = {k: -v for k, v in prim.items()}
                    content = -content
                aid = self._register_atom(prim)
                factors[aid] = factors.get(aid, 0) + 1
            else:
                content *= prim[0]
        else:
            content *= prim[0]
        return _norm_coef(content), tuple(sorted(factors.items()))

    # printing helpers
    def monomial_str(self, key: int) -> str:
        parts = []
        for v in self.variables:
            e = (key >> v.shift) & FIELD
            if e == 1:
                parts.append(v.name)
            elif e:
                parts.append(f"{v.name}**{e}")
        return "*".join(parts)

    def exponents(self, key: int) -> tuple:
        return tuple((key >> v.shift) & FIELD for v in self.variables)


def _tdeg(k: int) -> int:
    t = 0
    while k:
        t += k & FIELD
        k >>= BITS
    return t


def _coef_str(c) -> str:
    return str(c)


def poly_str(ring: Ring, terms: dict) -> str:
    if not terms:
        return "0"
    keys = sorted(terms, key=ring.exponents, reverse=True)
    out = []
    for i, k in enumerate(keys):
        c = terms[k]
        mono = ring.monomial_str(k)
        neg = c < 0
        a = -c if neg else c
        if mono:
            body = mono if a == 1 else f"{_coef_str(a)}*{mono}"
        else:
            body = _coef_str(a)
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


class Polynomial:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict | None = None):
        self.ring = ring
        self.terms = {k: _norm_coef(v) for k, v in (terms or {}).items() if v}

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.ring, padd(self.terms, other.terms))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.ring, padd(self.terms, other.terms, -1))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.ring, pmul(self.terms, other.terms))

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    __hash__ = None

    def total_degree(self) -> int:
        return max((_tdeg(k) for k in self.terms), default=0)

    def __str__(self) -> str:
        return poly_str(self.ring, self.terms)

    __repr__ = __str__


class ScalarExpr:
    """Exact rational function ``num / prod(atom**e)`` over a ring."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: Ring, num: dict, den: tuple = ()):
        self.ring = ring
        self.num = num
        self.den = den if num else ()

    # -- basic predicates
    def is_zero(self) -> bool:
        if not self.num:
            return True
        if self.ring.square_relations:
            return not self.reduce_relations().num
        return False

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_constant(self) -> bool:
        return not self.den and (not self.num or (len(self.num) == 1 and 0 in self.num))

    def constant_value(self):
        if not self.is_constant():
            raise RingError(f"{self} is not a constant")
        return self.num.get(0, 0)

    def is_polynomial(self) -> bool:
        return not self.den

    # -- structure
    @property
    def numerator(self) -> Polynomial:
        return Polynomial(self.ring, self.num)

    @property
    def denominator(self) -> Polynomial:
        d = {0: 1}
        for aid, e in self.den:
            d = pmul(d, self.ring.atom_pow(aid, e))
        return Polynomial(self.ring, d)

    def variable_indices(self) -> set:
        mask = 0
        for k in self.num:
            mask |= k
        for aid, _ in self.den:
            for k in self.ring.atom_poly(aid):
                mask |= k
        out = set()
        i = 0
        while mask:
            if mask & FIELD:
                out.add(i)
            mask >>= BITS
            i += 1
        return out

    # -- arithmetic
    def _make(self, num: dict, den: tuple) -> "ScalarExpr":
        if not num:
            return ScalarExpr(self.ring, {})
        if den and not (len(num) == 1 and 0 in num):
            num, den = _cancel(self.ring, num, den)
        return ScalarExpr(self.ring, num, den)

    def _coerce(self, other) -> "ScalarExpr":
        if isinstance(other, ScalarExpr):
            if other.ring is not self.ring:
                raise RingError("scalar expressions from different rings")
            return other
        return self.ring.coerce(other)

    def __add__(self, other) -> "ScalarExpr":
        if isinstance(other, int) and not isinstance(other, bool):
            if not other:
                return self
            other = ScalarExpr(self.ring, {0: other})
        else:
            other = self._coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return self._make(padd(self.num, other.num), self.den)
        return _add_general(self, other, 1)

    __radd__ = __add__

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr(self.ring, {k: -v for k, v in self.num.items()}, self.den)

    def __sub__(self, other) -> "ScalarExpr":
        other = self._coerce(other)
        if not other.num:
            return self
        if not self.num:
            return -other
        if self.den == other.den:
            return self._make(padd(self.num, other.num, -1), self.den)
        return _add_general(self, other, -1)

    def __rsub__(self, other) -> "ScalarExpr":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ScalarExpr":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return ScalarExpr(self.ring, {})
            return ScalarExpr(self.ring, pscale(self.num, other), self.den)
        other = self._coerce(other)
        if not self.num or not other.num:
            return ScalarExpr(self.ring, {})
        if other.is_constant():
            return ScalarExpr(self.ring, pscale(self.num, other.num[0]), self.den)
        if self.is_constant():
            return ScalarExpr(self.ring, pscale(other.num, self.num[0]), other.den)
        num = pmul(self.num, other.num)
        den = _merge_den(self.den, other.den)
        return self._make(num, den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScalarExpr":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                raise ZeroDivisionError("division by zero scalar")
            return ScalarExpr(self.ring, pscale(self.num, Fraction(1) / other), self.den)
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        if not self.num:
            return self
        if other.is_constant():
            return ScalarExpr(self.ring, pscale(self.num, Fraction(1) / other.num[0]), self.den)
        content, factors = self.ring.factor_denominator(other.num)
        num = pscale(self.num, Fraction(1) / content)
        for aid, e in other.den:
            num = pmul(num, self.ring.atom_pow(aid, e))
        den = _merge_den(self.den, factors)
        return self._make(num, den)

    def __rtruediv__(self, other) -> "ScalarExpr":
        return self._coerce(other) / self

    def __pow__(self, e: int) -> "ScalarExpr":
        if e < 0:
            return self.ring.one / (self ** (-e))
        result = self.ring.one
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def inverse(self) -> "ScalarExpr":
        return self.ring.one / self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) or isinstance(other, ScalarExpr):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    # -- calculus
    def partial(self, var) -> "ScalarExpr":
        """Exact partial derivative (quotient rule over the factored denominator)."""
        v = self.ring[var]
        s = v.shift
        if not self.num:
            return self
        dnum = pderiv(self.num, s)
        if not self.den:
            return ScalarExpr(self.ring, dnum)
        ring = self.ring
        involved = [(aid, e) for aid, e in self.den if any((k >> s) & FIELD for k in ring.atom_poly(aid))]
        if not involved:
            return self._make(dnum, self.den) if dnum else ScalarExpr(ring, {})
        # d(N / prod f^e) = (N' prod f - N sum e f' prod_{others} f) / prod f^{e+1}
        polys = [ring.atom_poly(aid) for aid, _ in involved]
        prod_all = {0: 1}
        for p in polys:
            prod_all = pmul(prod_all, p)
        total = pmul(dnum, prod_all)
        for i, (aid, e) in enumerate(involved):
            fprime = pderiv(polys[i], s)
            if not fprime:
                continue
            others = {0: e}
            for j, p in enumerate(polys):
                if j != i:
                    others = pmul(others, p)
            total = padd(total, pmul(pmul(self.num, fprime), others), -1)
        bump = dict(involved)
        den = tuple((aid, e + 1 if aid in bump else e) for aid, e in self.den)
        return self._make(total, den)

    # -- substitution
    def substitute(self, images: dict, target: Ring | None = None) -> "ScalarExpr":
        """Replace variables by scalar expressions of the target ring.

        ``images`` maps variable indices of this ring to ScalarExprs in the
        target ring.  Unmapped variables pass through by name.
        """
        target = target or self.ring
        if not self.num:
            return target.zero
        cache: dict = {}
        num = _eval_poly(self.ring, self.num, images, target, cache)
        if not self.den:
            return num
        den = target.one
        for aid, e in self.den:
            den = den * (_eval_poly(self.ring, self.ring.atom_poly(aid), images, target, cache) ** e)
        return num / den

    def reduce_relations(self) -> "ScalarExpr":
        rels = self.ring.square_relations
        if not rels:
            return self
        out = self
        for idx, value in rels.items():
            s = BITS * idx
            if not any(((k >> s) & FIELD) >= 2 for k in out.num):
                continue
            acc = ScalarExpr(self.ring, {})
            for k, c in out.num.items():
                e = (k >> s) & FIELD
                rest = ScalarExpr(self.ring, {k - (e << s) + ((e & 1) << s): c})
                acc = acc + (rest * value ** (e >> 1) if e >= 2 else rest)
            out = ScalarExpr(self.ring, acc.num, _merge_den(acc.den, out.den)) if acc.num else acc
        return out

    def evaluate(self, values: dict):
        """Evaluate at rational values given by variable name (for spot checks)."""
        vals = {}
        for name, val in values.items():
            vals[self.ring[name].index] = Fraction(val)

        def ev(p):
            total = Fraction(0)
            for k, c in p.items():
                t = Fraction(c)
                for i, v in enumerate(self.ring.variables):
                    e = (k >> v.shift) & FIELD
                    if e:
                        if i not in vals:
                            raise RingError(f"no value for {v.name}")
                        t *= vals[i] ** e
                total += t
            return total

        d = Fraction(1)
        for aid, e in self.den:
            d *= ev(self.ring.atom_poly(aid)) ** e
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the given point")
        return ev(self.num) / d

    # -- printing
    def __str__(self) -> str:
        n = poly_str(self.ring, self.num)
        if not self.den:
            return n
        parts = []
        for aid, e in self.den:
            a = poly_str(self.ring, self.ring.atom_poly(aid))
            if len(self.ring.atom_poly(aid)) > 1:
                a = f"({a})"
            parts.append(a if e == 1 else f"{a}**{e}")
        d = "*".join(parts)
        if len(self.num) > 1:
            n = f"({n})"
        if len(parts) > 1:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self) -> str:
        return f"ScalarExpr({self})"


def _merge_den(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for aid, e in b:
        d[aid] = d.get(aid, 0) + e
    return tuple(sorted(d.items()))


def _cancel(ring: Ring, num: dict, den: tuple):
    guard = ring.guard
    out = []
    changed = False
    for aid, e in den:
        poly = ring.atom_poly(aid)
        lead, _, _, mono = ring._atom_info[aid]
        while e:
            if mono:
                if any(((k | guard) - lead) & guard != guard for k in num):
                    break
                num = {k - lead: v for k, v in num.items()}
            else:
                lnum = max(num)
                if ((lnum | guard) - lead) & guard != guard:
                    break
                q = pdivexact(num, poly, guard)
                if q is None:
                    break
                num = q
            e -= 1
            changed = True
        if e:
            out.append((aid, e))
    if changed:
        num = {k: _norm_coef(v) for k, v in num.items()}
    return num, tuple(out)


def _add_general(a: ScalarExpr, b: ScalarExpr, sign: int) -> ScalarExpr:
    ring = a.ring
    da = dict(a.den)
    db = dict(b.den)
    lcm = dict(da)
    for aid, e in db.items():
        if e > lcm.get(aid, 0):
            lcm[aid] = e
    na = a.num
    for aid, e in lcm.items():
        extra = e - da.get(aid, 0)
        if extra:
            na = pmul(na, ring.atom_pow(aid, extra))
    nb = b.num
    for aid, e in lcm.items():
        extra = e - db.get(aid, 0)
        if extra:
            nb = pmul(nb, ring.atom_pow(aid, extra))
    num = padd(na, nb, sign)
    return a._make(num, tuple(sorted(lcm.items())))


def _eval_poly(ring: Ring, poly: dict, images: dict, target: Ring, cache: dict) -> ScalarExpr:
    """Evaluate a raw polynomial of ``ring`` under variable images into ``target``."""
    nv = ring.nvars
    idxs = []
    mask = 0
    for k in poly:
        mask |= k
    for i in range(nv):
        if (mask >> (BITS * i)) & FIELD:
            idxs.append(i)
    img = {}
    all_poly = True
    for i in idxs:
        im = images.get(i)
        if im is None:
            name = ring.variables[i].name
            im = target.var(name) if target is not ring else ring.var(name)
        elif not isinstance(im, ScalarExpr):
            im = target.coerce(im)
        img[i] = im
        if im.den:
            all_poly = False

    def power(i, e):
        key = (i, e)
        p = cache.get(key)
        if p is None:
            p = img[i] ** e if all_poly is False else ScalarExpr(target, ppow(img[i].num, e))
            cache[key] = p
        return p

    if all_poly:
        acc: dict = {}
        for k, c in poly.items():
            t = {0: c}
            for i in idxs:
                e = (k >> (BITS * i)) & FIELD
                if e:
                    t = pmul(t, power(i, e).num)
            acc = padd(acc, t)
        return ScalarExpr(target, acc)
    # group by denominators to keep additions on the fast path
    groups: dict = {}
    for k, c in poly.items():
        t = ScalarExpr(target, {0: c})
        for i in idxs:
            e = (k >> (BITS * i)) & FIELD
            if e:
                t = t * power(i, e)
        if t.num:
            g = groups.get(t.den)
            groups[t.den] = padd(g, t.num) if g is not None else t.num
    out = target.zero
    for den, num in groups.items():
        if num:
            out = out + ScalarExpr(target, num, den)._make(num, den)
    return out


# -- matrices ---------------------------------------------------------------


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def determinant(m) -> ScalarExpr:
    n = len(m)
    if n == 0:
        raise RingError("empty matrix")
    ring = m[0][0].ring
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    # cofactor expansion along the first row
    total = ring.zero
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [[m[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = m[0][j] * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def det_inverse(m):
    """Return (det, inverse) of a square matrix of ScalarExprs.

    The inverse is the adjugate divided by the determinant.
    """
    n = len(m)
    if any(len(row) != n for row in m):
        raise RingError("det_inverse needs a square matrix")
    det = determinant(m)
    if det.is_zero():
        raise RingError("singular matrix: determinant is the zero rational function")
    ring = det.ring
    if n == 1:
        return det, [[ring.one / det]]
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[m[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = determinant(minor)
            if (i + j) % 2:
                cof = -cof
            inv[j][i] = cof / det
    return det, inv


def leibniz_determinant(m) -> ScalarExpr:
    """Determinant by the permutation sum; kept as an independent cross-check."""
    n = len(m)
    ring = m[0][0].ring
    total = ring.zero
    for p in permutations(range(n)):
        t = ring.const(_perm_sign(p))
        for i in range(n):
            t = t * m[i][p[i]]
            if t.is_zero():
                break
        total = total + t
    return total


def matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    ring = a[0][0].ring
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = ring.zero
            for t in range(k):
                if a[i][t].num and b[t][j].num:
                    s = s + a[i][t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def identity_matrix(ring: Ring, n: int):
    return [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]


def is_zero_matrix(m: Iterable) -> bool:
    return all(x.is_zero() for row in m for x in row)
