"""Graded-commutative exterior algebra over a table of generators.

A :class:`GeneratorTable` lists generators of positive degree.  Coordinate
differentials ``dv`` are created together with their scalar variable ``v`` and
have zero derivative; abstract generators (theta, omega, torsion, curvature,
variations) carry an explicit d-rule.  A :class:`Form` maps sorted monomials
(tuples of generator indices) to :class:`ScalarExpr` coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import factorial

from .scalar_ring import Ring, RingError, ScalarExpr, _perm_sign


class FormError(ValueError):
    pass


class Generator:
    __slots__ = ("name", "degree", "index", "var_index", "d_rule")

    def __init__(self, name: str, degree: int, index: int, var_index=None):
        self.name = name
        self.degree = degree
        self.index = index
        self.var_index = var_index
        self.d_rule: Form | None = None

    @property
    def is_differential(self) -> bool:
        return self.var_index is not None

    def __repr__(self) -> str:
        return f"Generator({self.name}, deg={self.degree})"


class GeneratorTable:
    """Ordered generators plus the scalar ring their coefficients live in."""

    def __init__(self, ring: Ring | None = None, name: str = "", dim: int | None = None):
        self.ring = ring if ring is not None else Ring(name or "R")
        self.name = name
        self.dim = dim
        self.generators: list[Generator] = []
        self.degrees: list[int] = []
        self._by_name: dict[str, Generator] = {}
        self._dv: dict[int, int] = {}
        self.scalar_d_rules: dict[int, Form] = {}
        self._mul_cache: dict = {}
        self._dmono_cache: dict = {}
        for v in self.ring.variables:
            if v.kind != "parameter":
                self._add_differential(v)

    # -- declarations
    def add_generator(self, name: str, degree: int, d_rule: "Form | None" = None) -> Generator:
        if degree < 1:
            raise FormError("generators must have positive degree")
        if name in self._by_name:
            raise FormError(f"generator {name!r} already declared")
        g = Generator(name, degree, len(self.generators))
        self.generators.append(g)
        self.degrees.append(degree)
        self._by_name[name] = g
        if d_rule is not None:
            self.set_d_rule(name, d_rule)
        return g

    def _add_differential(self, v) -> Generator:
        name = "d" + v.name
        g = Generator(name, 1, len(self.generators), v.index)
        self.generators.append(g)
        self.degrees.append(1)
        self._by_name[name] = g
        self._dv[v.index] = g.index
        return g

    def declare_variable(self, name: str, kind: str = "coordinate"):
        v = self.ring.declare(name, kind)
        if kind != "parameter":
            self._add_differential(v)
        return v

    def set_d_rule(self, name, rule: "Form") -> None:
        g = self.generator(name)
        if g.is_differential:
            raise FormError(f"{g.name} is a coordinate differential; its d is zero")
        if rule.table is not self:
            raise FormError("d-rule must live in the same table")
        deg = rule.degree
        if deg is not None and deg != g.degree + 1:
            raise FormError(f"d-rule for {g.name} has degree {deg}, expected {g.degree + 1}")
        g.d_rule = rule
        self._dmono_cache.clear()

    def set_scalar_d_rule(self, var, rule: "Form") -> None:
        """Give a scalar variable an explicit differential (it then has no dv)."""
        v = self.ring[var]
        if v.index in self._dv:
            raise FormError(f"{v.name} already has a coordinate differential")
        if rule.degree not in (None, 1):
            raise FormError("scalar d-rule must be a 1-form")
        self.scalar_d_rules[v.index] = rule

    # -- lookup and constructors
    def generator(self, key) -> Generator:
        if isinstance(key, Generator):
            return key
        if isinstance(key, int):
            return self.generators[key]
        try:
            return self._by_name[key]
        except KeyError:
            raise FormError(f"generator {key!r} not in table {self.name or ''}".rstrip()) from None

    def has(self, name: str) -> bool:
        return name in self._by_name

    def gen(self, key) -> "Form":
        g = self.generator(key)
        return Form(self, {(g.index,): self.ring.one})

    def dvar(self, var) -> "Form":
        v = self.ring[var]
        return Form(self, {(self._dv[v.index],): self.ring.one})

    def differential_index(self, var) -> int:
        return self._dv[self.ring[var].index]

    def var(self, name) -> "Form":
        return self.scalar(self.ring.var(name))

    def scalar(self, c) -> "Form":
        c = self.ring.coerce(c)
        return Form(self, {(): c} if c.num else {})

    def zero(self) -> "Form":
        return Form(self, {})

    # -- monomial arithmetic
    def mono_mul(self, a: tuple, b: tuple):
        """Product of two sorted monomials: (sign, monomial) or None if zero."""
        if not a:
            return 1, b
        if not b:
            return 1, a
        key = (a, b)
        cache = self._mul_cache
        r = cache.get(key, False)
        if r is not False:
            return r
        degs = self.degrees
        seq = list(a) + list(b)
        sign = 1
        res = None
        # insertion sort counting graded transpositions
        for i in range(len(a), len(seq)):
            j = i
            while j > 0 and seq[j - 1] >= seq[j]:
                x, y = seq[j - 1], seq[j]
                if x == y:
                    if degs[x] % 2:
                        cache[key] = None
                        return None
                    break
                if degs[x] % 2 and degs[y] % 2:
                    sign = -sign
                seq[j - 1], seq[j] = y, x
                j -= 1
        res = (sign, tuple(seq))
        cache[key] = res
        return res

    def mono_degree(self, m: tuple) -> int:
        degs = self.degrees
        return sum(degs[g] for g in m)

    def d_generator(self, gi: int) -> "Form":
        g = self.generators[gi]
        if g.is_differential:
            return self.zero()
        if g.d_rule is None:
            raise FormError(f"generator {g.name} has no d-rule")
        return g.d_rule

    def d_monomial(self, m: tuple) -> "Form":
        r = self._dmono_cache.get(m)
        if r is not None:
            return r
        degs = self.degrees
        out = self.zero()
        prefix_deg = 0
        for i, gi in enumerate(m):
            dg = self.d_generator(gi)
            if dg.terms:
                left = Form(self, {m[:i]: self.ring.one})
                right = Form(self, {m[i + 1:]: self.ring.one})
                piece = left.wedge(dg).wedge(right)
                out = out - piece if prefix_deg % 2 else out + piece
            prefix_deg += degs[gi]
        self._dmono_cache[m] = out
        return out

    def d_scalar(self, c: ScalarExpr) -> "Form":
        terms: dict = {}
        ring = self.ring
        out = None
        for vi in sorted(c.variable_indices()):
            v = ring.variables[vi]
            if v.kind == "parameter":
                continue
            gi = self._dv.get(vi)
            if gi is not None:
                p = c.partial(v)
                if p.num:
                    terms[(gi,)] = p
                continue
            rule = self.scalar_d_rules.get(vi)
            if rule is None:
                raise FormError(f"variable {v.name} has neither a differential nor a d-rule")
            p = c.partial(v)
            if p.num:
                piece = rule * p
                out = piece if out is None else out + piece
        f = Form(self, terms)
        return f if out is None else f + out

    def __repr__(self) -> str:
        return f"GeneratorTable({self.name!r}, {len(self.generators)} generators)"


def _acc(terms: dict, m: tuple, c: ScalarExpr) -> None:
    cur = terms.get(m)
    terms[m] = c if cur is None else cur + c


def _clean(terms: dict) -> dict:
    return {m: c for m, c in terms.items() if c.num}


class Form:
    """Sum of coefficient * monomial terms over a generator table."""

    __slots__ = ("table", "terms")

    def __init__(self, table: GeneratorTable, terms: dict | None = None):
        self.table = table
        self.terms = terms if terms is not None else {}

    # -- structure
    @property
    def degree(self):
        """Common degree of all terms, None for the zero form; raises if mixed."""
        degs = {self.table.mono_degree(m) for m in self.terms}
        if not degs:
            return None
        if len(degs) > 1:
            raise FormError(f"mixed-degree form (degrees {sorted(degs)})")
        return degs.pop()

    def is_homogeneous(self) -> bool:
        return len({self.table.mono_degree(m) for m in self.terms}) <= 1

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.terms.values())

    def __bool__(self) -> bool:
        return not self.is_zero()

    def coefficient(self, *names) -> ScalarExpr:
        m = tuple(sorted(self.table.generator(n).index for n in names))
        return self.terms.get(m, self.table.ring.zero)

    def generators_used(self) -> set:
        return {g for m in self.terms for g in m}

    def _check(self, other: "Form") -> None:
        if other.table is not self.table:
            raise FormError("forms belong to different generator tables")

    # -- linear structure
    def __add__(self, other) -> "Form":
        if not isinstance(other, Form):
            other = self.table.scalar(other)
        self._check(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            _acc(terms, m, c)
        return Form(self.table, _clean(terms))

    __radd__ = __add__

    def __neg__(self) -> "Form":
        return Form(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Form":
        if not isinstance(other, Form):
            other = self.table.scalar(other)
        return self + (-other)

    def __rsub__(self, other) -> "Form":
        return (-self) + other

    def __mul__(self, c) -> "Form":
        if isinstance(c, Form):
            return self.wedge(c)
        if not isinstance(c, ScalarExpr):
            if c == 1:
                return self
            c = self.table.ring.coerce(c)
        if not c.num:
            return Form(self.table, {})
        return Form(self.table, _clean({m: v * c for m, v in self.terms.items()}))

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Form":
        if not isinstance(c, ScalarExpr):
            c = self.table.ring.coerce(c)
        inv = c.inverse()
        return self * inv

    def __matmul__(self, other: "Form") -> "Form":
        return self.wedge(other)

    def __eq__(self, other) -> bool:
        if isinstance(other, Form):
            return (self - other).is_zero()
        if isinstance(other, (int, Fraction, ScalarExpr)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    # -- products and derivations
    def wedge(self, other: "Form") -> "Form":
        self._check(other)
        mm = self.table.mono_mul
        terms: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                r = mm(ma, mb)
                if r is None:
                    continue
                s, m = r
                c = ca * cb
                if s < 0:
                    c = -c
                cur = terms.get(m)
                terms[m] = c if cur is None else cur + c
        return Form(self.table, _clean(terms))

    def d(self) -> "Form":
        t = self.table
        terms: dict = {}
        mm = t.mono_mul
        for m, c in self.terms.items():
            if not c.is_constant():
                dc = t.d_scalar(c)
                for mg, k in dc.terms.items():
                    r = mm(mg, m)
                    if r is not None:
                        s, m2 = r
                        _acc(terms, m2, k if s > 0 else -k)
            if m:
                dm = t.d_monomial(m)
                for m2, k in dm.terms.items():
                    _acc(terms, m2, c * k)
        return Form(t, _clean(terms))

    def split_left(self, gi: int):
        """Return (A, B) with self = g ^ A + B and g absent from B."""
        t = self.table
        degs = t.degrees
        a: dict = {}
        b: dict = {}
        for m, c in self.terms.items():
            if gi in m:
                pos = m.index(gi)
                sign = 1
                if degs[gi] % 2:
                    if sum(degs[x] for x in m[:pos]) % 2:
                        sign = -1
                rest = m[:pos] + m[pos + 1:]
                _acc(a, rest, c if sign > 0 else -c)
            else:
                b[m] = c
        return Form(t, _clean(a)), Form(t, b)

    def __str__(self) -> str:
        return format_form(self)

    def __repr__(self) -> str:
        return f"Form({format_form(self)})"


# -- public operations -------------------------------------------------------


def wedge(*forms: Form) -> Form:
    if not forms:
        raise FormError("wedge needs at least one form")
    out = forms[0]
    for f in forms[1:]:
        out = out.wedge(f)
    return out


def d(form: Form) -> Form:
    return form.d()


def check_d_squared(table: GeneratorTable) -> list:
    """Return a list of (generator name, residual) for every failure of d(d g) = 0."""
    failures = []
    for g in table.generators:
        if g.is_differential:
            continue
        if g.d_rule is None:
            failures.append((g.name, "missing d-rule"))
            continue
        try:
            r = g.d_rule.d()
        except FormError as exc:
            failures.append((g.name, str(exc)))
            continue
        if not r.is_zero():
            failures.append((g.name, r))
    for vi, rule in table.scalar_d_rules.items():
        r = rule.d()
        if not r.is_zero():
            failures.append((table.ring.variables[vi].name, r))
    return failures


def _image_map(table: GeneratorTable, target: GeneratorTable, variables, generators):
    ring, tring = table.ring, target.ring
    vimg = {}
    for k, v in (variables or {}).items():
        idx = ring[k].index
        vimg[idx] = v if isinstance(v, ScalarExpr) else tring.coerce(v)
        if vimg[idx].ring is not tring:
            raise RingError(f"image of {ring.variables[idx].name} is not in the target ring")
    gimg = {}
    for k, v in (generators or {}).items():
        g = table.generator(k)
        if v.table is not target:
            raise FormError(f"image of {g.name} is not in the target table")
        deg = v.degree
        if deg is not None and deg != g.degree:
            raise FormError(f"substitution for {g.name} has degree {deg}, expected {g.degree}")
        gimg[g.index] = v
    return vimg, gimg


class Substitution:
    """A reusable algebra morphism from one table to another (or itself).

    Variables map to ScalarExprs of the target ring, generators to Forms of the
    target table.  Differentials of mapped variables map to d(image); anything
    unmapped passes through by name.
    """

    def __init__(self, table: GeneratorTable, variables=None, generators=None,
                 target: GeneratorTable | None = None):
        self.table = table
        self.target = target or table
        self.vimg, self.gimg = _image_map(table, self.target, variables, generators)
        self._gcache: dict = {}
        self._mcache: dict = {}
        self._scache: dict = {}

    def scalar(self, c: ScalarExpr) -> ScalarExpr:
        if not self.vimg and self.target.ring is self.table.ring:
            return c
        return c.substitute(self.vimg, self.target.ring)

    def generator_image(self, gi: int) -> Form:
        r = self._gcache.get(gi)
        if r is not None:
            return r
        g = self.table.generators[gi]
        if gi in self.gimg:
            r = self.gimg[gi]
        elif g.is_differential and g.var_index in self.vimg:
            r = self.target.scalar(self.vimg[g.var_index]).d()
        elif self.target is self.table:
            r = self.table.gen(gi)
        else:
            if not self.target.has(g.name):
                raise FormError(f"generator {g.name} has no image in the target table")
            r = self.target.gen(g.name)
        self._gcache[gi] = r
        return r

    def monomial_image(self, m: tuple) -> Form:
        r = self._mcache.get(m)
        if r is not None:
            return r
        if not m:
            r = self.target.scalar(1)
        else:
            r = self.generator_image(m[0])
            for gi in m[1:]:
                if not r.terms:
                    break
                r = r.wedge(self.generator_image(gi))
        self._mcache[m] = r
        return r

    def __call__(self, form: Form) -> Form:
        if form.table is not self.table:
            raise FormError("form does not belong to the substitution's source table")
        terms: dict = {}
        for m, c in form.terms.items():
            img = self.monomial_image(m)
            if not img.terms:
                continue
            cc = self.scalar(c)
            if not cc.num:
                continue
            for m2, k in img.terms.items():
                _acc(terms, m2, cc * k)
        return Form(self.target, _clean(terms))


def substitute(form: Form, variables=None, generators=None, target: GeneratorTable | None = None) -> Form:
    return Substitution(form.table, variables, generators, target)(form)


class VectorField:
    """A vector as a pairing table against degree-1 generators.

    With ``others_zero`` the field pairs to zero with every degree-1 generator
    not listed (convenient for vertical fields); otherwise an unlisted
    generator is an error when encountered.
    """

    def __init__(self, table: GeneratorTable, values: dict, others_zero: bool = False):
        self.table = table
        self.others_zero = others_zero
        self.values: dict[int, ScalarExpr] = {}
        for k, v in values.items():
            g = table.generator(k)
            if g.degree != 1:
                raise FormError(f"vector fields pair only with 1-form generators, not {g.name}")
            self.values[g.index] = v if isinstance(v, ScalarExpr) else table.ring.coerce(v)

    def pairing(self, gi: int) -> ScalarExpr:
        v = self.values.get(gi)
        if v is not None:
            return v
        g = self.table.generators[gi]
        if g.degree != 1:
            raise FormError(f"interior product undefined on degree-{g.degree} generator {g.name}")
        if self.others_zero:
            return self.table.ring.zero
        raise FormError(f"vector field undefined on generator {g.name}")


def interior(X: VectorField, form: Form) -> Form:
    t = form.table
    if X.table is not t:
        raise FormError("vector field and form live on different tables")
    degs = t.degrees
    terms: dict = {}
    for m, c in form.terms.items():
        prefix = 0
        for i, gi in enumerate(m):
            val = X.pairing(gi)
            if val.num:
                k = c * val
                _acc(terms, m[:i] + m[i + 1:], -k if prefix % 2 else k)
            prefix += degs[gi]
    return Form(t, _clean(terms))


def lie_derivative(X: VectorField, form: Form) -> Form:
    """Cartan's formula L_X = d i_X + i_X d."""
    return interior(X, form).d() + interior(X, form.d())


def variation(form: Form, deltas: dict) -> Form:
    """Apply the degree-0 derivation fixed by generator -> variation Form.

    Generators not listed are held fixed; coefficients are not varied.
    """
    t = form.table
    dmap = {t.generator(k).index: v for k, v in deltas.items()}
    terms: dict = {}
    for m, c in form.terms.items():
        for i, gi in enumerate(m):
            dv = dmap.get(gi)
            if dv is None or not dv.terms:
                continue
            left = Form(t, {m[:i]: c})
            right = Form(t, {m[i + 1:]: t.ring.one})
            piece = left.wedge(dv).wedge(right)
            for m2, k in piece.terms.items():
                _acc(terms, m2, k)
    return Form(t, _clean(terms))


# -- epsilon-built forms -----------------------------------------------------


def levi_civita(indices) -> int:
    """epsilon_{i1..in} with epsilon_{1..n} = +1 (indices 1-based, a permutation or repeated)."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0
    order = sorted(idx)
    if order != list(range(1, len(idx) + 1)):
        raise FormError(f"epsilon indices {idx} are not a permutation of 1..{len(idx)}")
    return _perm_sign([i - 1 for i in idx])


def lowered_theta(indices, theta: list) -> Form:
    """theta_{i1..ip} = 1/(n-p)! eps_{i1..ip j..} theta^j ^ ... for a coframe list theta (1-based indices).

    Because the complementary index set is unique, only its sorted order
    survives the (n-p)! symmetrization.
    """
    n = len(theta)
    table = theta[0].table
    idx = list(indices)
    for i in idx:
        if not 1 <= i <= n:
            raise FormError(f"index {i} out of range 1..{n}")
    if len(set(idx)) != len(idx):
        return table.zero()
    rest = [j for j in range(1, n + 1) if j not in idx]
    sign = levi_civita(idx + rest)
    out = table.scalar(sign)
    for j in rest:
        out = out.wedge(theta[j - 1])
    return out


def lowered_theta_by_sum(indices, theta: list) -> Form:
    """Direct epsilon sum over all orderings of the complement (independent cross-check)."""
    n = len(theta)
    table = theta[0].table
    idx = list(indices)
    p = len(idx)
    total = table.zero()
    if len(set(idx)) != len(idx):
        return total
    rest = [j for j in range(1, n + 1) if j not in idx]
    for perm in permutations(rest):
        e = levi_civita(idx + list(perm))
        if not e:
            continue
        term = table.scalar(e)
        for j in perm:
            term = term.wedge(theta[j - 1])
        total = total + term
    return total * Fraction(1, factorial(n - p))


def volume_form(theta: list) -> Form:
    return wedge(*theta)


# -- matrix and vector valued forms -----------------------------------------


def matrix_wedge(a, b):
    n, k, m = len(a), len(b), len(b[0])
    t = a[0][0].table
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = t.zero()
            for l in range(k):
                if a[i][l].terms and b[l][j].terms:
                    s = s + a[i][l].wedge(b[l][j])
            row.append(s)
        out.append(row)
    return out


def matrix_vector_wedge(a, v):
    t = v[0].table
    out = []
    for i in range(len(a)):
        s = t.zero()
        for l in range(len(v)):
            if a[i][l].terms and v[l].terms:
                s = s + a[i][l].wedge(v[l])
        out.append(s)
    return out


def matrix_d(a):
    return [[x.d() for x in row] for row in a]


# -- printing ----------------------------------------------------------------


def format_scalar(c: ScalarExpr) -> str:
    return str(c)


def format_form(form: Form) -> str:
    t = form.table
    if not form.terms:
        return "0"
    parts = []
    for m in sorted(form.terms):
        c = form.terms[m]
        mono = " ^ ".join(t.generators[g].name for g in m)
        cs = str(c)
        neg = False
        if c.is_constant():
            v = c.constant_value()
            neg = v < 0
            cs = str(-v if neg else v)
        elif cs.startswith("-") and len(c.num) == 1:
            neg = True
            cs = cs[1:]
        if mono:
            if cs == "1":
                body = mono
            else:
                if not c.is_constant() and (len(c.num) > 1 or c.den):
                    cs = f"({cs})"
                body = f"{cs}*{mono}"
        else:
            body = cs if (c.is_constant() or not c.den) and len(c.num) == 1 else f"({cs})"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f" - {body}" if neg else f" + {body}")
    return "".join(parts)
