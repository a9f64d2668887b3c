"""Exterior differential systems: closure, certified membership, sections.

Membership ``alpha in <g_1..g_m>_alg`` is decided in two phases.

Phase A eliminates generators that contain a lone generator symbol ``s`` of
their own degree: such a generator reads ``c*(s + R)`` with ``R`` free of
``s``, so modulo it every occurrence of ``s`` can be replaced by ``-R``.
The quotient of the exterior algebra by these pivots is again free on the
remaining symbols, so no information is lost.

Phase B expands the unknown multipliers of the remaining generators over the
monomial basis of the complementary degree (restricted to the connected part
of the row/column graph touched by ``alpha``) and solves the linear system
over the rational-function field.  Both phases record how every derived form
is built from the original generators, so a successful answer is returned as
an explicit certificate that is re-verified before it is handed out.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import linalg
from .exterior_algebra import Form, FormError, GeneratorTable, Substitution, VectorField, lie_derivative


class MembershipError(ValueError):
    pass


class EDS:
    """A finite list of homogeneous generator forms over one table."""

    def __init__(self, generators, table: GeneratorTable | None = None, closed: bool = False,
                 labels=None, name: str = ""):
        gens = list(generators)
        if table is None:
            if not gens:
                raise MembershipError("an empty EDS needs an explicit table")
            table = gens[0].table
        labels = list(labels) if labels is not None else [f"g{j + 1}" for j in range(len(gens))]
        if len(labels) != len(gens):
            raise MembershipError("labels and generators differ in length")
        self.table = table
        self.generators: list[Form] = []
        self.labels: list[str] = []
        for g, lab in zip(gens, labels):
            if g.table is not table:
                raise MembershipError(f"generator {lab} lives on a different table")
            if not g.is_homogeneous():
                raise MembershipError(f"generator {lab} is not homogeneous")
            if g.is_zero():
                continue
            self.generators.append(g)
            self.labels.append(lab)
        self.closed = closed
        self.name = name
        self.closure_certificates: list = []
        self._prepared = None

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def extended(self, more, labels=None, name: str = "") -> "EDS":
        more = list(more)
        labels = list(labels) if labels is not None else [f"h{j + 1}" for j in range(len(more))]
        return EDS(self.generators + more, self.table, labels=self.labels + labels, name=name or self.name)

    def __repr__(self) -> str:
        return f"EDS({self.name or 'unnamed'}, {len(self.generators)} generators, closed={self.closed})"


@dataclass
class MembershipCertificate:
    """Witness alpha = sum_j coefficients[j] ^ generators[j]."""

    target: Form
    generators: list
    coefficients: list
    labels: list = field(default_factory=list)

    def residual(self) -> Form:
        r = self.target
        for b, g in zip(self.coefficients, self.generators):
            if b.terms:
                r = r - b.wedge(g)
        return r

    def verify(self) -> bool:
        return self.residual().is_zero()

    def text(self) -> str:
        lines = []
        for lab, b in zip(self.labels, self.coefficients):
            if b.terms:
                lines.append(f"{lab}: {b}")
        return "\n".join(lines) if lines else "0"

    def digest(self) -> str:
        return hashlib.sha256(self.text().encode("utf-8")).hexdigest()[:16]


def differential_closure(I: EDS) -> EDS:
    """Adjoin d of every generator; the result is flagged closed."""
    if I.closed:
        return I
    gens = list(I.generators)
    labels = list(I.labels)
    m = len(gens)
    extra = []
    for g, lab in zip(I.generators, I.labels):
        dg = g.d()
        if not dg.is_zero():
            extra.append((dg, f"d({lab})"))
    J = EDS(gens + [e for e, _ in extra], I.table, closed=True,
            labels=labels + [lab for _, lab in extra], name=f"closure({I.name})" if I.name else "")
    # certificates: d(g_j) is either zero or literally a generator of J
    t = I.table
    pos = m
    for g in I.generators:
        dg = g.d()
        coeffs = [t.zero() for _ in J.generators]
        if not dg.is_zero():
            coeffs[pos] = t.scalar(1)
            pos += 1
        cert = MembershipCertificate(dg, J.generators, coeffs, J.labels)
        if not cert.verify():
            raise MembershipError("closure certificate failed to verify")
        J.closure_certificates.append(cert)
    return J


# -- membership --------------------------------------------------------------


class _Derived:
    """A form together with its expression in the original generators."""

    __slots__ = ("form", "combo", "degree")

    def __init__(self, form: Form, combo: dict, degree: int):
        self.form = form
        self.combo = combo
        self.degree = degree


def _combo_axpy(target: dict, beta: Form, combo: dict, sign: int = 1) -> None:
    """target -= sign * beta ^ combo (entrywise)."""
    for k, c in combo.items():
        piece = beta.wedge(c)
        if sign < 0:
            piece = -piece
        cur = target.get(k)
        target[k] = -piece if cur is None else cur - piece


def _reduce_by_pivot(F: Form, s: int, h: Form, degs) -> tuple:
    """Return (F', beta) with F = F' + beta ^ h and the symbol s eliminated.

    ``h`` is normalized as s + R with R free of s.
    """
    t = F.table
    R = h - t.gen(s)
    beta = t.zero()
    p = degs[s]
    while True:
        A, B = F.split_left(s)
        if not A.terms:
            return F, beta
        # F = s^A + B = h^A - R^A + B
        degA = A.degree or 0
        F = B - R.wedge(A)
        beta = beta + (A if (p * degA) % 2 == 0 else -A)


class _Prepared:
    def __init__(self, I: EDS):
        t = I.table
        degs = t.degrees
        m = len(I.generators)
        self.m = m
        self.table = t
        self.unit = None
        active = []
        for j, g in enumerate(I.generators):
            deg = g.degree
            if deg == 0:
                self.unit = j
            active.append(_Derived(g, {j: t.scalar(1)}, deg))
        self.pivots: list[tuple[int, _Derived]] = []
        if self.unit is not None:
            self.active = active
            return
        while True:
            choice = None
            best = None
            for a in active:
                for mono, c in a.form.terms.items():
                    if len(mono) != 1:
                        continue
                    key = (a.degree, 0 if c.is_constant() else 1, len(a.form.terms), mono[0])
                    if best is None or key < best:
                        best = key
                        choice = (a, mono[0], c)
            if choice is None:
                break
            a, s, c = choice
            inv = c.inverse()
            h = a.form * inv
            combo = {k: v * inv for k, v in a.combo.items()}
            piv = _Derived(h, combo, a.degree)
            active.remove(a)
            new_active = []
            for b in active:
                F, beta = _reduce_by_pivot(b.form, s, h, degs)
                if beta.terms:
                    combo_b = dict(b.combo)
                    _combo_axpy(combo_b, beta, combo)
                    b = _Derived(F, combo_b, b.degree)
                if not b.form.is_zero():
                    new_active.append(b)
            active = new_active
            new_pivots = []
            for s2, q in self.pivots:
                F, beta = _reduce_by_pivot(q.form, s, h, degs)
                if beta.terms:
                    combo_q = dict(q.combo)
                    _combo_axpy(combo_q, beta, combo)
                    q = _Derived(F, combo_q, q.degree)
                new_pivots.append((s2, q))
            self.pivots = new_pivots + [(s, piv)]
        self.active = active


def _prepare(I: EDS) -> _Prepared:
    if I._prepared is None:
        I._prepared = _Prepared(I)
    return I._prepared


def _finish(alpha: Form, I: EDS, Q: dict) -> MembershipCertificate:
    t = I.table
    coeffs = []
    for j in range(len(I.generators)):
        q = Q.get(j)
        coeffs.append(q if q is not None else t.zero())
    cert = MembershipCertificate(alpha, list(I.generators), coeffs, list(I.labels))
    if not cert.verify():
        raise MembershipError("internal error: membership certificate does not verify")
    return cert


def member_alg(alpha: Form, I: EDS, degree_bound: int | None = None):
    """Decide alpha in <I>_alg over the rational-function field.

    Returns a verified MembershipCertificate or None (definitive absence).
    """
    t = I.table
    if alpha.table is not t:
        raise MembershipError("form and EDS live on different tables")
    if not alpha.is_homogeneous():
        raise MembershipError("member_alg requires a homogeneous form")
    q = alpha.degree
    bound = degree_bound if degree_bound is not None else (t.dim + 2 if t.dim is not None else None)
    if q is not None and bound is not None and q > bound:
        raise MembershipError(f"degree {q} exceeds the guard bound {bound}")
    if alpha.is_zero():
        return _finish(alpha, I, {})
    prep = _prepare(I)
    degs = t.degrees
    if prep.unit is not None:
        g = I.generators[prep.unit]
        coef = g.terms[()]
        return _finish(alpha, I, {prep.unit: alpha * coef.inverse()})
    Q: dict = {}
    F = alpha
    for s, piv in prep.pivots:
        F2, beta = _reduce_by_pivot(F, s, piv.form, degs)
        if beta.terms:
            for k, c in piv.combo.items():
                piece = beta.wedge(c)
                cur = Q.get(k)
                Q[k] = piece if cur is None else cur + piece
        F = F2
    if F.is_zero():
        return _finish(alpha, I, Q)
    sol = _solve_phase_b(F, [a for a in prep.active if a.degree <= q], t)
    if sol is None:
        return None
    for a, beta in sol:
        for k, c in a.combo.items():
            piece = beta.wedge(c)
            cur = Q.get(k)
            Q[k] = piece if cur is None else cur + piece
    return _finish(alpha, I, Q)


def _solve_phase_b(F: Form, active: list, t: GeneratorTable):
    if not active:
        return None
    mm = t.mono_mul
    # index generator terms by the multiset of symbols they contain
    gen_terms = [list(a.form.terms.items()) for a in active]
    rows: dict = {}
    row_queue = list(F.terms)
    row_index: dict = {}
    cols: dict = {}
    col_list = []
    seen_rows = set(row_queue)
    while row_queue:
        r = row_queue.pop()
        rset = r
        for j, terms in enumerate(gen_terms):
            for mono, _ in terms:
                mu = _complement(rset, mono)
                if mu is None:
                    continue
                key = (j, mu)
                if key in cols:
                    continue
                cols[key] = len(col_list)
                col_list.append(key)
                for mono2, c2 in terms:
                    prod = mm(mu, mono2)
                    if prod is None:
                        continue
                    s, r2 = prod
                    if r2 not in seen_rows:
                        seen_rows.add(r2)
                        row_queue.append(r2)
    # build the equations row by row
    for ci, (j, mu) in enumerate(col_list):
        for mono2, c2 in gen_terms[j]:
            prod = mm(mu, mono2)
            if prod is None:
                continue
            s, r2 = prod
            row = rows.setdefault(r2, {})
            val = c2 if s > 0 else -c2
            cur = row.get(ci)
            row[ci] = val if cur is None else cur + val
    for r, c in F.terms.items():
        rows.setdefault(r, {})[linalg.RHS] = c
    ech = linalg.Echelon()
    for r in sorted(rows):
        ech.add(rows[r])
        if ech.inconsistent:
            return None
    x = ech.solve()
    if x is None:
        return None
    betas: dict = {}
    for ci, val in x.items():
        j, mu = col_list[ci]
        betas.setdefault(j, {})[mu] = val
    out = []
    for j, terms in betas.items():
        out.append((active[j], Form(t, {mu: v for mu, v in terms.items() if v.num})))
    return out


def _complement(r: tuple, m: tuple):
    """Multiset difference r - m if m is contained in r, else None."""
    if len(m) > len(r):
        return None
    rest = list(r)
    for g in m:
        try:
            rest.remove(g)
        except ValueError:
            return None
    return tuple(rest)


def member_diff(alpha: Form, I: EDS, degree_bound: int | None = None):
    return member_alg(alpha, differential_closure(I), degree_bound)


# -- sections ----------------------------------------------------------------


class Section:
    """Pullback along a local section: fiber variables -> functions of the base.

    ``source`` is the bundle table, ``target`` the base table.  Every fiber
    variable of the source ring must be assigned; coordinates pass through by
    name.  Fiber differentials are pulled back as d(image).
    """

    def __init__(self, source: GeneratorTable, target: GeneratorTable, assignments: dict,
                 generators: dict | None = None, name: str = ""):
        self.source = source
        self.target = target
        self.name = name
        ring = source.ring
        assigned = {ring[k].name for k in assignments}
        missing = [v.name for v in ring.variables if v.kind == "fiber" and v.name not in assigned]
        if missing:
            raise MembershipError(f"section does not assign fiber variables {missing[:5]}")
        for v in ring.variables:
            if v.kind == "coordinate" and v.name not in target.ring:
                raise MembershipError(f"base coordinate {v.name} missing from target")
        self.assignments = dict(assignments)
        self._sub = Substitution(source, assignments, generators, target)

    def pullback(self, form: Form) -> Form:
        return self._sub(form)

    def scalar(self, c):
        return self._sub.scalar(c)


@dataclass
class IntegralityReport:
    residuals: list

    @property
    def ok(self) -> bool:
        return not self.residuals


def is_integral(s: Section, I: EDS) -> IntegralityReport:
    res = []
    for g, lab in zip(I.generators, I.labels):
        r = s.pullback(g)
        if not r.is_zero():
            res.append((lab, r))
    return IntegralityReport(res)


def is_admissible_variation(s: Section, X: VectorField, I: EDS) -> IntegralityReport:
    """Check s^*(L_X g) = 0 for every generator g."""
    t = I.table
    for g in t.generators:
        if g.is_differential and t.ring.variables[g.var_index].kind == "coordinate":
            v = X.values.get(g.index)
            if v is not None and not v.is_zero():
                raise MembershipError(f"vector field is not vertical: it pairs nontrivially with {g.name}")
    res = []
    for g, lab in zip(I.generators, I.labels):
        r = s.pullback(lie_derivative(X, g))
        if not r.is_zero():
            res.append((lab, r))
    return IntegralityReport(res)
