"""Reduction of the Palatini problem by the Lorentz group, and the contact-structure example.

The reduced space carries coordinates x^mu, the inverse metric g^{mu nu}
(one variable per slot mu <= nu) and connection symbols Gamma^s_{r c}.  The
factor sqrt(-det g) is a single variable ``sqrtg`` with the exact relation
sqrtg^2 = -det(g_{mu nu}) and the differential rule
d sqrtg = -1/2 sqrtg g_{mu nu} dg^{mu nu}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product

from .eds_engine import EDS, MembershipCertificate, MembershipError, Section, differential_closure, \
    is_admissible_variation, is_integral, member_alg
from .exterior_algebra import Form, GeneratorTable, Substitution, VectorField, levi_civita, matrix_d, matrix_wedge
from .frame_geometry import JetFrameContext, MetricSignature, _sig, canonical_forms, metricity_forms, \
    palatini_lagrangian, section_forms
from .linalg import RHS, Echelon
from .scalar_ring import Ring, ScalarExpr, det_inverse, determinant, identity_matrix, matmul
from .variational import christoffel_from_metric, koszul_christoffel


# -- reduced coordinates ------------------------------------------------------------------


class ReducedContext:
    """Coordinates (x^mu, g^{mu nu}, Gamma^s_{r c}) on C(LM) x_M Sigma.

    With ``sqrt_det`` a variable ``sqrtg`` for sqrt(-det g_{mu nu}) is added
    (square relation plus differential rule); sections then have to assign it.
    ``d_sign`` is the coefficient in d sqrtg = d_sign * sqrtg g_{mu nu} dg^{mu nu};
    only -1/2 is consistent with the square relation.
    """

    def __init__(self, n: int, eta=None, sqrt_det: bool = True, d_sign=Fraction(-1, 2), name: str = ""):
        self.n = n
        self.eta = _sig(eta, n)
        t = GeneratorTable(Ring(f"reduced{n}{name}"), name=f"reduced-{n}", dim=n)
        self.table = t
        self.ring = t.ring
        r = range(1, n + 1)
        self.x = [f"x[{m}]" for m in r]
        for v in self.x:
            t.declare_variable(v, "coordinate")
        self.gslot = {}
        for m in range(n):
            for nu in range(m, n):
                nm = f"g[{m + 1},{nu + 1}]"
                t.declare_variable(nm, "fiber")
                self.gslot[(m, nu)] = nm
                self.gslot[(nu, m)] = nm
        self.G = [[[f"G[{s},{rr},{c}]" for c in r] for rr in r] for s in r]
        for plane in self.G:
            for row in plane:
                for nm in row:
                    t.declare_variable(nm, "fiber")
        R = self.ring
        self.gup = [[R.var(self.gslot[(m, nu)]) for nu in range(n)] for m in range(n)]
        self.Gamma = [[[R.var(nm) for nm in row] for row in plane] for plane in self.G]
        self._glow = None
        self.sqrt_det = sqrt_det
        self.d_sign = Fraction(d_sign)
        if sqrt_det:
            R.declare("sqrtg", "fiber")
            self.s = R.var("sqrtg")
            R.set_square_relation("sqrtg", -self.det_lower())
            rule = t.zero()
            for m in range(n):
                for nu in range(n):
                    rule = rule + t.dvar(self.gslot[(m, nu)]) * self.glow[m][nu]
            t.set_scalar_d_rule("sqrtg", rule * (self.s * self.d_sign))
        else:
            self.s = None

    @property
    def glow(self):
        """g_{mu nu} as the inverse of g^{mu nu}."""
        if self._glow is None:
            self._det_up, self._glow = det_inverse(self.gup)
        return self._glow

    def det_lower(self) -> ScalarExpr:
        self.glow
        return self._det_up.inverse()

    def dg(self, m: int, nu: int) -> Form:
        return self.table.dvar(self.gslot[(m, nu)])

    def dx(self, m: int) -> Form:
        return self.table.dvar(self.x[m])

    def base_table(self) -> GeneratorTable:
        b = GeneratorTable(Ring(f"base{self.n}"), name=f"base-{self.n}", dim=self.n)
        for v in self.x:
            b.declare_variable(v, "coordinate")
        return b

    def section(self, base: GeneratorTable, g_lower, Gamma, sqrt_det=None, name: str = "") -> Section:
        """Section x -> (g^{mu nu}(x), Gamma(x)) from a lower metric and connection symbols on ``base``."""
        n = self.n
        _, gup = det_inverse(g_lower)
        assign = {}
        for m in range(n):
            for nu in range(m, n):
                assign[self.gslot[(m, nu)]] = gup[m][nu]
        for s, r, c in product(range(n), repeat=3):
            assign[self.G[s][r][c]] = Gamma[s][r][c]
        if self.sqrt_det:
            if sqrt_det is None:
                raise ValueError("this context needs sqrt(-det g) for its sections")
            assign["sqrtg"] = sqrt_det
        return Section(self.table, base, assign, name=name)


class ProjectionMap:
    """p_H: g^{mu nu} -> eta^{kl} e^mu_k e^nu_l, Gamma^s_{r c} -> -e^s_{k c} e^k_r, sqrtg -> det(e^k_mu).

    ``convention="transposed"`` uses Gamma^s_{r c} -> -e^s_{k r} e^k_c instead, i.e.
    the derivative index first.
    """

    def __init__(self, rctx: ReducedContext, jctx: JetFrameContext, convention: str = "literal"):
        if rctx.n != jctx.n:
            raise ValueError("dimension mismatch")
        if convention not in ("literal", "transposed"):
            raise ValueError(f"unknown convention {convention!r}")
        self.rctx, self.jctx, self.convention = rctx, jctx, convention
        n = rctx.n
        E, E1, inv = jctx.E, jctx.E1, jctx.inverse
        eta = jctx.eta
        images = {}
        R = jctx.ring
        self.gimg = [[None] * n for _ in range(n)]
        for m in range(n):
            for nu in range(m, n):
                v = R.zero
                for k in range(n):
                    v = v + E[m][k] * E[nu][k] * eta[k]
                images[rctx.gslot[(m, nu)]] = v
                self.gimg[m][nu] = self.gimg[nu][m] = v
        self.Gimg = [[[None] * n for _ in range(n)] for _ in range(n)]
        for s, r, c in product(range(n), repeat=3):
            v = R.zero
            for k in range(n):
                if convention == "literal":
                    v = v - E1[s][k][c] * inv[k][r]
                else:
                    v = v - E1[s][k][r] * inv[k][c]
            images[rctx.G[s][r][c]] = v
            self.Gimg[s][r][c] = v
        if rctx.sqrt_det:
            images["sqrtg"] = jctx.frame_det.inverse()
        self.sub = Substitution(rctx.table, images, None, jctx.table)

    def __call__(self, form: Form) -> Form:
        return self.sub(form)

    def scalar(self, c: ScalarExpr) -> ScalarExpr:
        return self.sub.scalar(c)


def square_relation_check(p: ProjectionMap) -> ScalarExpr:
    """p_H^*(-det g_{mu nu}) - det(e^k_mu)^2 (should vanish, using det eta = -1)."""
    r = p.rctx
    lhs = p.scalar(-r.det_lower())
    det_e = p.jctx.frame_det.inverse()
    return lhs - det_e * det_e


def sqrt_rule_check(p: ProjectionMap) -> Form:
    """p_H^*(d sqrtg) - d(p_H^* sqrtg)."""
    r = p.rctx
    s = r.table.scalar(r.s)
    return p(s.d()) - p(s).d()


# -- reduced Lagrangian and Levi-Civita EDS -------------------------------------------------------


def reduced_lagrangian(rctx: ReducedContext) -> Form:
    """eps_{mu_1..mu_(n-2) c k} s g^{k f} dx^{mu_1}^..^dx^{mu_(n-2)} ^ (dGamma^c_{r f} ^ dx^r + Gamma^s_{d f} Gamma^c_{b s} dx^b ^ dx^d).

    All indices are summed over their full ranges, as displayed.
    """
    n = rctx.n
    if not rctx.sqrt_det:
        raise ValueError("the reduced Lagrangian needs the sqrtg variable")
    t = rctx.table
    R = rctx.ring
    G = rctx.Gamma
    out = t.zero()
    # inner 2-forms F^c_f = dGamma^c_{r f} ^ dx^r + Gamma^s_{d f} Gamma^c_{b s} dx^b ^ dx^d
    F = {}
    for c, f in product(range(n), repeat=2):
        form = t.zero()
        for r in range(n):
            form = form + t.dvar(rctx.G[c][r][f]).wedge(rctx.dx(r))
        for b, d in product(range(n), repeat=2):
            if b == d:
                continue
            coef = R.zero
            for s in range(n):
                coef = coef + G[s][d][f] * G[c][b][s]
            if coef.num:
                form = form + rctx.dx(b).wedge(rctx.dx(d)) * coef
        F[(c, f)] = form
    for perm in permutations(range(n)):
        eps = levi_civita([i + 1 for i in perm])
        head = t.scalar(eps)
        for mu in perm[:n - 2]:
            head = head.wedge(rctx.dx(mu))
        c, k = perm[n - 2], perm[n - 1]
        inner = t.zero()
        for f in range(n):
            coef = rctx.gup[k][f]
            if coef.num:
                inner = inner + F[(c, f)] * coef
        out = out + head.wedge(inner)
    return out * rctx.s


def reduced_metricity(rctx: ReducedContext, m: int, nu: int) -> Form:
    """dg^{mu nu} + (g^{mu s} Gamma^nu_{c s} + g^{nu s} Gamma^mu_{c s}) dx^c."""
    n = rctx.n
    t = rctx.table
    R = rctx.ring
    f = rctx.dg(m, nu)
    for c in range(n):
        coef = R.zero
        for s in range(n):
            coef = coef + rctx.gup[m][s] * rctx.Gamma[nu][c][s] + rctx.gup[nu][s] * rctx.Gamma[m][c][s]
        if coef.num:
            f = f + rctx.dx(c) * coef
    return f


def reduced_torsion(rctx: ReducedContext, s: int, m: int, nu: int) -> ScalarExpr:
    return rctx.Gamma[s][m][nu] - rctx.Gamma[s][nu][m]


def reduced_trace(rctx: ReducedContext, half: bool = False) -> Form:
    """g_{mu nu} dg^{mu nu} + Gamma^s_{s r} dx^r, optionally with the factor 1/2 on the first term."""
    n = rctx.n
    t = rctx.table
    f = t.zero()
    for m, nu in product(range(n), repeat=2):
        f = f + rctx.dg(m, nu) * rctx.glow[m][nu]
    if half:
        f = f * Fraction(1, 2)
    for r in range(n):
        coef = rctx.ring.zero
        for s in range(n):
            coef = coef + rctx.Gamma[s][s][r]
        if coef.num:
            f = f + rctx.dx(r) * coef
    return f


@dataclass
class LeviCivitaEDS:
    metricity: EDS
    torsion: list
    torsion_labels: list
    rctx: ReducedContext


def levi_civita_eds(rctx: ReducedContext) -> LeviCivitaEDS:
    """<dg^{mu nu} + (..) dx^c, Gamma^s_{mu nu} - Gamma^s_{nu mu}>: 1-form part as an EDS, 0-form part listed."""
    n = rctx.n
    gens, labels = [], []
    for m in range(n):
        for nu in range(m, n):
            gens.append(reduced_metricity(rctx, m, nu))
            labels.append(f"metricity[{m + 1},{nu + 1}]")
    tors, tl = [], []
    for s in range(n):
        for m in range(n):
            for nu in range(m + 1, n):
                tors.append(reduced_torsion(rctx, s, m, nu))
                tl.append(f"torsion[{s + 1};{m + 1},{nu + 1}]")
    return LeviCivitaEDS(EDS(gens, rctx.table, labels=labels, name="levi-civita"), tors, tl, rctx)


def is_integral_lc(sec: Section, lc: LeviCivitaEDS):
    """Residuals of the Levi-Civita EDS along a section (1-forms and 0-form generators)."""
    rep = is_integral(sec, lc.metricity)
    res = list(rep.residuals)
    for f, lab in zip(lc.torsion, lc.torsion_labels):
        v = sec.scalar(f)
        if not v.is_zero():
            res.append((lab, v))
    return res


# -- pullback identities -----------------------------------------------------------------------------


@dataclass
class IdentityCheck:
    name: str
    formula: str
    residuals: list  # nonzero components only
    checked: int = 1  # number of components compared

    @property
    def ok(self) -> bool:
        return not self.residuals


def metricity_pullback_check(p: ProjectionMap) -> IdentityCheck:
    """e^mu_a e^nu_b (eta^{ak} omega^b_k + eta^{bk} omega^a_k) = p_H^*(reduced metricity^{mu nu}).

    Compared in the coordinate basis: contracting with the (polynomial) frame
    rather than its inverse keeps the nonzero residuals of a failing map small.
    The frame is invertible, so this vanishes iff the frame-basis identity does.
    """
    r, j = p.rctx, p.jctx
    n = r.n
    F = canonical_forms(j)
    E = j.E
    sym = {}
    for a in range(n):
        for b in range(a, n):
            sym[(a, b)] = sym[(b, a)] = F.omega[b][a] * F.eta[a] + F.omega[a][b] * F.eta[b]
    res = []
    for m in range(n):
        for nu in range(m, n):
            lhs = j.table.zero()
            for a, b in product(range(n), repeat=2):
                c = E[m][a] * E[nu][b]
                if c.num:
                    lhs = lhs + sym[(a, b)] * c
            d = lhs - p(reduced_metricity(r, m, nu))
            if not d.is_zero():
                res.append((f"[{m + 1},{nu + 1}]", d))
    return IdentityCheck("metricity pullback",
                         "e^mu_a e^nu_b (eta^{ak} omega^b_k + eta^{bk} omega^a_k) = dg^{mu nu} + (g^{mu s} Gamma^nu_{c s} + g^{nu s} Gamma^mu_{c s}) dx^c",
                         res, n * (n + 1) // 2)


TORSION_READINGS = {
    "literal": "T^i = e^i_s Gamma^s_{mu nu} dx^mu ^ dx^nu (full sum)",
    "ordered": "T^i = e^i_s Gamma^s_{mu nu} dx^mu ^ dx^nu (mu < nu only)",
    "antisymmetrized": "T^i = e^i_s 1/2 (Gamma^s_{mu nu} - Gamma^s_{nu mu}) dx^mu ^ dx^nu (full sum)",
    "swapped": "T^i = e^i_s Gamma^s_{nu mu} dx^mu ^ dx^nu (full sum)",
}


def torsion_pullback_check(p: ProjectionMap, reading: str = "literal") -> IdentityCheck:
    r, j = p.rctx, p.jctx
    n = r.n
    F = canonical_forms(j)
    inv = j.inverse
    t = j.table
    dx = [t.dvar(c) for c in j.x]
    G = p.Gimg
    res = []
    for i in range(n):
        rhs = t.zero()
        for m, nu in product(range(n), repeat=2):
            if m == nu or (reading == "ordered" and m > nu):
                continue
            coef = j.ring.zero
            for s in range(n):
                if reading in ("literal", "ordered"):
                    g = G[s][m][nu]
                elif reading == "antisymmetrized":
                    g = (G[s][m][nu] - G[s][nu][m]) * Fraction(1, 2)
                elif reading == "swapped":
                    g = G[s][nu][m]
                else:
                    raise ValueError(f"unknown reading {reading!r}")
                if inv[i][s].num and g.num:
                    coef = coef + inv[i][s] * g
            if coef.num:
                rhs = rhs + dx[m].wedge(dx[nu]) * coef
        d = F.T[i] - rhs
        if not d.is_zero():
            res.append((f"[{i + 1}]", d))
    return IdentityCheck(f"torsion pullback ({reading})", TORSION_READINGS[reading], res, r.n)


def trace_pullback_check(p: ProjectionMap, half: bool = False) -> IdentityCheck:
    r, j = p.rctx, p.jctx
    F = canonical_forms(j)
    d = F.trace_omega() - p(reduced_trace(r, half))
    form = ("Tr omega = 1/2 g_{mu nu} dg^{mu nu} + Gamma^s_{s r} dx^r" if half
            else "Tr omega = g_{mu nu} dg^{mu nu} + Gamma^s_{s r} dx^r")
    return IdentityCheck("trace pullback" + (" (with 1/2)" if half else ""), form, [] if d.is_zero() else [("", d)])


def lagrangian_pullback_check(p: ProjectionMap, factor=1) -> IdentityCheck:
    """p_H^* lambda_bar - factor * lambda_PG on the universal jet table."""
    lam = palatini_lagrangian(canonical_forms(p.jctx))
    d = p(reduced_lagrangian(p.rctx)) - lam * Fraction(factor)
    lhs = "p_H^* lambda_bar = " + ("" if factor == 1 else f"({factor}) ")
    return IdentityCheck("reduced Lagrangian pullback" + ("" if factor == 1 else f" (factor {factor})"),
                         lhs + "eta^{kp} theta_{kl} ^ Omega^l_p", [] if d.is_zero() else [("", d)])


def lagrangian_ratio(p: ProjectionMap, sec: Section):
    """Compare p_H^* lambda_bar and lambda_PG along a jet section; returns (ratio or None, lhs, rhs).

    Used for n = 4, where the universal comparison is too large to expand.
    """
    j = p.jctx
    n = j.n
    base = sec.target
    F = section_forms(j, sec)
    lam = palatini_lagrangian(F)
    # pull lambda_bar back along p_H o sec: compose the scalar images
    images = {}
    r = p.rctx
    for m in range(n):
        for nu in range(m, n):
            images[r.gslot[(m, nu)]] = sec.scalar(p.gimg[m][nu])
    for s, rr, c in product(range(n), repeat=3):
        images[r.G[s][rr][c]] = sec.scalar(p.Gimg[s][rr][c])
    images["sqrtg"] = sec.scalar(j.frame_det.inverse())
    sub = Substitution(r.table, images, None, base)
    lhs = sub(reduced_lagrangian(r))
    if lam.is_zero():
        return (None if not lhs.is_zero() else Fraction(1)), lhs, lam
    (m0, c0), = [(m, c) for m, c in lam.terms.items()][:1]
    cl = lhs.terms.get(m0)
    if cl is None:
        return None, lhs, lam
    q = cl / c0
    if not q.is_constant():
        return None, lhs, lam
    ratio = q.constant_value()
    return (ratio if (lhs - lam * ratio).is_zero() else None), lhs, lam


def pH_differential_checks(p: ProjectionMap) -> list:
    """p_H^*(d alpha) - d(p_H^* alpha) for the Levi-Civita generators and sqrtg."""
    lc = levi_civita_eds(p.rctx)
    out = []
    for g, lab in zip(lc.metricity.generators, lc.metricity.labels):
        out.append((lab, p(g.d()) - p(g).d()))
    t = p.rctx.table
    for f, lab in zip(lc.torsion, lc.torsion_labels):
        a = t.scalar(f)
        out.append((lab, p(a.d()) - p(a).d()))
    if p.rctx.sqrt_det:
        out.append(("sqrtg", sqrt_rule_check(p)))
    return out


# -- Levi-Civita uniqueness -----------------------------------------------------------------------


@dataclass
class UniquenessReport:
    n: int
    rank: int
    unknowns: int
    solution: list
    koszul: list
    matches: bool


def levi_civita_uniqueness(g_lower, coords) -> UniquenessReport:
    """Solve the pullback conditions of the Levi-Civita EDS for Gamma(x) and compare with Koszul.

    Conditions: d_c g^{mu nu} + g^{mu s} Gamma^nu_{c s} + g^{nu s} Gamma^mu_{c s} = 0 (mu <= nu)
    and Gamma^s_{mu nu} = Gamma^s_{nu mu}; linear in the n^3 unknowns.
    """
    n = len(coords)
    names = [c if isinstance(c, str) else str(c) for c in coords]
    ring = g_lower[0][0].ring
    _, gup = det_inverse(g_lower)

    def col(s, r, c):
        return (s * n + r) * n + c

    ech = Echelon()
    for m in range(n):
        for nu in range(m, n):
            for c in range(n):
                row: dict = {}
                for s in range(n):
                    for k, coef in ((col(nu, c, s), gup[m][s]), (col(m, c, s), gup[nu][s])):
                        if coef.num:
                            row[k] = row.get(k, ring.zero) + coef
                rhs = -gup[m][nu].partial(names[c])
                row = {k: v for k, v in row.items() if v.num}
                if rhs.num:
                    row[RHS] = rhs
                ech.add(row)
    for s in range(n):
        for m in range(n):
            for nu in range(m + 1, n):
                ech.add({col(s, m, nu): ring.one, col(s, nu, m): -ring.one})
    N = n ** 3
    if ech.inconsistent:
        raise MembershipError(f"Levi-Civita conditions are inconsistent (rank {ech.rank} of {N})")
    if ech.rank < N:
        raise MembershipError(f"Levi-Civita conditions are degenerate: rank {ech.rank} < {N} unknowns")
    x = ech.solve()
    sol = [[[x.get(col(s, r, c), ring.zero) for c in range(n)] for r in range(n)] for s in range(n)]
    K = koszul_christoffel(g_lower, names)
    C = christoffel_from_metric(g_lower, names)
    ok = all((sol[s][r][c] - K[s][r][c]).is_zero() and (sol[s][r][c] - C[s][r][c]).is_zero()
             for s, r, c in product(range(n), repeat=3))
    return UniquenessReport(n, ech.rank, N, sol, K, ok)


# -- contact structure reduction -----------------------------------------------------------------


class ContactReductionContext:
    """J^1P = P x_M (T*M (x) gl(r)) for P = M x GL(r): coordinates x^mu, h^a_b, xi^a_{b,mu}.

    The reduced table carries only x and xi; ``pG`` maps it into the J^1P table.
    """

    def __init__(self, dim_m: int, r: int, name: str = ""):
        self.m, self.r = dim_m, r
        self.x = [f"x[{mu}]" for mu in range(1, dim_m + 1)]
        self.h = [[f"h[{a},{b}]" for b in range(1, r + 1)] for a in range(1, r + 1)]
        self.xi = [[[f"xi[{a},{b},{mu}]" for mu in range(1, dim_m + 1)] for b in range(1, r + 1)]
                   for a in range(1, r + 1)]
        self.big = GeneratorTable(Ring(f"J1P{name}"), name="J1P", dim=dim_m)
        self.red = GeneratorTable(Ring(f"CP{name}"), name="C(P)", dim=dim_m)
        for t in (self.big, self.red):
            for v in self.x:
                t.declare_variable(v, "coordinate")
        for row in self.h:
            for v in row:
                self.big.declare_variable(v, "fiber")
        for t in (self.big, self.red):
            for plane in self.xi:
                for row in plane:
                    for v in row:
                        t.declare_variable(v, "fiber")
        self.pG = Substitution(self.red, None, None, self.big)

    def xi_forms(self, t: GeneratorTable):
        r = self.r
        out = []
        for a in range(r):
            row = []
            for b in range(r):
                f = t.zero()
                for mu, v in enumerate(self.xi[a][b]):
                    f = f + t.dvar(self.x[mu]) * t.ring.var(v)
                row.append(f)
            out.append(row)
        return out

    def contact_forms(self):
        """theta = dh h^{-1} - xi on J^1P."""
        t = self.big
        R = t.ring
        H = [[R.var(v) for v in row] for row in self.h]
        _, Hinv = det_inverse(H)
        dH = [[t.dvar(v) for v in row] for row in self.h]
        xi = self.xi_forms(t)
        r = self.r
        th = []
        for a in range(r):
            row = []
            for b in range(r):
                f = t.zero()
                for c in range(r):
                    if Hinv[c][b].num:
                        f = f + dH[a][c] * Hinv[c][b]
                row.append(f - xi[a][b])
            th.append(row)
        return th

    def omega2(self, t: GeneratorTable | None = None):
        """1/2 [xi ^ xi] - dxi = xi ^ xi - dxi (matrix entries)."""
        t = t or self.red
        xi = self.xi_forms(t)
        ww = matrix_wedge(xi, xi)
        return [[ww[a][b] - xi[a][b].d() for b in range(self.r)] for a in range(self.r)]


@dataclass
class ContactReductionReport:
    dim_m: int
    r: int
    certificates: list
    fibered: dict
    euler_poincare: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (all(c is not None and c.verify() for _, c in self.certificates)
                and all(self.fibered.values()) and all(self.euler_poincare.values()))


def contact_reduction_demo(dim_m: int, r: int, sample_g0=None, sample_eta=None) -> ContactReductionReport:
    """Certificates that p_G^*(xi ^ xi - dxi) lies in <theta, dtheta>_alg, plus the fibered case
    and the Euler-Poincare admissibility check."""
    ctx = ContactReductionContext(dim_m, r)
    th = ctx.contact_forms()
    gens, labels = [], []
    for a in range(r):
        for b in range(r):
            gens.append(th[a][b])
            labels.append(f"theta[{a + 1},{b + 1}]")
    I = differential_closure(EDS(gens, ctx.big, labels=labels, name="contact"))
    certs = []
    for a in range(r):
        for b in range(r):
            red = ctx.omega2()[a][b]
            certs.append((f"Omega2[{a + 1},{b + 1}]", member_alg(ctx.pG(red), I)))
    fib = fibered_reduction_check(ctx)
    ep, diag = euler_poincare_check(dim_m, r, sample_g0, sample_eta)
    return ContactReductionReport(dim_m, r, certs, fib, ep, diag)


def fibered_reduction_check(ctx: ContactReductionContext) -> dict:
    """Generators that are pullbacks: <p^* beta>_diff on J^1P against <beta>_diff on C(P).

    A reduced form built from the beta's pulls back into the upstairs ideal; a
    reduced form outside <beta> does not.
    """
    r, m = ctx.r, ctx.m
    beta = [f for row in ctx.omega2() for f in row]
    lab = [f"beta{j + 1}" for j in range(len(beta))]
    down = differential_closure(EDS(beta, ctx.red, labels=lab, name="beta"))
    up = differential_closure(EDS([ctx.pG(b) for b in beta], ctx.big, labels=lab, name="p*beta"))
    t = ctx.red
    x1 = t.var(ctx.x[0])
    dx1 = t.dvar(ctx.x[0])
    xi0 = t.ring.var(ctx.xi[0][0][0])
    member = beta[0].wedge(dx1) * (x1 + t.scalar(1)) + beta[-1].wedge(t.dvar(ctx.xi[0][0][0])) * xi0
    # the ideal is generated in degree 2, so no nonzero 1-form lies in it
    non_member = dx1 + t.dvar(ctx.xi[0][0][0]) * x1
    out = {}
    c1 = member_alg(member, down)
    c2 = member_alg(ctx.pG(member), up)
    out["sample form in <beta> downstairs"] = c1 is not None and c1.verify()
    out["its pullback in <p^* beta> upstairs"] = c2 is not None and c2.verify()
    out["non-member downstairs detected"] = member_alg(non_member, down) is None
    out["its pullback is not in <p^* beta>"] = member_alg(ctx.pG(non_member), up) is None
    return out


def _commutator(a, b, graded: bool):
    """[a, b] for matrices of forms; with ``graded`` (both 1-forms) a^b + b^a, else ab - ba."""
    ab = matrix_wedge(a, b)
    ba = matrix_wedge(b, a)
    n = len(a)
    return [[(ab[i][j] + ba[i][j]) if graded else (ab[i][j] - ba[i][j]) for j in range(n)] for i in range(n)]


def default_g0(base: GeneratorTable, xs, r: int):
    """A unimodular polynomial matrix for r >= 2: a product of shears in the coordinates."""
    R = base.ring
    g = identity_matrix(R, r)
    for k, x in enumerate(xs):
        a = k % (r - 1)
        S = identity_matrix(R, r)
        if k % 2 == 0:
            S[a][a + 1] = R.var(x)
        else:
            S[a + 1][a] = R.var(x) * R.var(x)
        g = matmul(g, S)
    return g


def euler_poincare_check(dim_m: int, r: int, g0=None, eta=None):
    """Flat xi = dg0 g0^{-1}; variations Xi = d eta - [xi, eta] solve d Xi - [Xi ^ xi] = 0.

    Also checked at bundle level: the vertical field with components Xi is an
    admissible variation of the section xi for <xi ^ xi - dxi>.  Returns
    (checks, diagnostics); the diagnostics record the opposite conventions.
    """
    ctx = ContactReductionContext(dim_m, r, name="ep")
    base = GeneratorTable(Ring("ep-base"), name="ep-base", dim=dim_m)
    for v in ctx.x:
        base.declare_variable(v, "coordinate")
    R = base.ring
    if g0 is None:
        if r == 1:
            g0 = [[R.one + R.var(ctx.x[0]) * R.var(ctx.x[0])]]
        else:
            g0 = default_g0(base, ctx.x, r)
    if eta is None:
        eta = [[R.var(ctx.x[(a + b) % dim_m]) * (a + 2 * b + 1) + R.var(ctx.x[a % dim_m]) * R.var(ctx.x[b % dim_m])
                for b in range(r)] for a in range(r)]
    _, g0inv = det_inverse(g0)
    dg0 = matrix_d([[base.scalar(v) for v in row] for row in g0])
    xi = [[sum((dg0[a][c] * g0inv[c][b] for c in range(r)), base.zero()) for b in range(r)] for a in range(r)]
    ww = matrix_wedge(xi, xi)
    flat = all((xi[a][b].d() - ww[a][b]).is_zero() for a in range(r) for b in range(r))
    # the other ordering g0^{-1} dg0 satisfies d xi = -xi ^ xi instead
    xi_left = [[sum((dg0[c][b] * g0inv[a][c] for c in range(r)), base.zero()) for b in range(r)] for a in range(r)]
    wl = matrix_wedge(xi_left, xi_left)
    left_flat = all((xi_left[a][b].d() - wl[a][b]).is_zero() for a in range(r) for b in range(r))
    E = [[base.scalar(v) for v in row] for row in eta]
    dE = matrix_d(E)
    br = _commutator(xi, E, graded=False)
    Xi = [[dE[a][b] - br[a][b] for b in range(r)] for a in range(r)]
    Xi_wrong = [[dE[a][b] + br[a][b] for b in range(r)] for a in range(r)]

    def linearized(X):
        g = _commutator(X, xi, graded=True)
        return all((X[a][b].d() - g[a][b]).is_zero() for a in range(r) for b in range(r))

    out = {"xi = dg0 g0^-1 is flat (d xi = xi ^ xi)": flat,
           "Xi = d eta - [xi, eta] solves d Xi - [Xi ^ xi] = 0": linearized(Xi)}
    # bundle-level admissibility on C(P)
    assign = {}
    for a, b, mu in product(range(r), range(r), range(dim_m)):
        c = xi[a][b].terms.get((base.differential_index(ctx.x[mu]),), R.zero)
        assign[ctx.xi[a][b][mu]] = c
    sec = Section(ctx.red, base, assign, name="flat-xi")
    om2 = ctx.omega2()
    I = EDS([f for row in om2 for f in row], ctx.red,
            labels=[f"Omega2[{a + 1},{b + 1}]" for a in range(r) for b in range(r)])
    out["flat section is integral for <Omega2>"] = is_integral(sec, I).ok
    vals = {}
    t = ctx.red
    for a, b, mu in product(range(r), range(r), range(dim_m)):
        c = Xi[a][b].terms.get((base.differential_index(ctx.x[mu]),), R.zero)
        vals[t.differential_index(ctx.xi[a][b][mu])] = c.substitute({}, t.ring) if c.num else t.ring.zero
    X = VectorField(t, vals, others_zero=True)
    out["Xi is an admissible variation of the section"] = is_admissible_variation(sec, X, I).ok
    diagnostics = {"g0^-1 dg0 satisfies d xi = xi ^ xi": left_flat,
                   "Xi = d eta + [xi, eta] solves the linearized equation": linearized(Xi_wrong)}
    return out, diagnostics


# -- test metrics and sections ------------------------------------------------------------------


def _diag(R, entries):
    n = len(entries)
    return [[entries[i] if i == j else R.zero for j in range(n)] for i in range(n)]


def catalogue_metric(name: str, base: GeneratorTable, coords):
    """Lower metrics g_{mu nu} used by the uniqueness and integrality checks."""
    R = base.ring
    X = [R.var(c) for c in coords]
    n = len(coords)
    if name == "polar-2":
        if n != 2:
            raise ValueError("polar-2 is two-dimensional")
        return _diag(R, [R.one, X[0] * X[0]])
    if name == "lorentz-3":
        if n != 3:
            raise ValueError("lorentz-3 is three-dimensional")
        return _diag(R, [-R.one, R.one, X[1] * X[1]])
    if name == "ppwave":
        if n != 4:
            raise ValueError("the pp-wave metric is four-dimensional")
        from .frame_geometry import ppwave_coframe

        cf = ppwave_coframe(base, coords)
        eta = MetricSignature.lorentzian(4)
        return [[sum((cf[k][m] * cf[k][nu] * eta[k] for k in range(4)), R.zero) for nu in range(4)]
                for m in range(4)]
    if name == "constant":
        return _diag(R, [-R.one] + [R.one] * (n - 1))
    raise KeyError(f"unknown metric {name!r}")


METRIC_CATALOGUE = {
    "constant": ("any", "eta = diag(-1, 1, .., 1)"),
    "polar-2": (2, "diag(1, (x^1)^2)"),
    "lorentz-3": (3, "diag(-1, 1, (x^2)^2)"),
    "ppwave": (4, "2 du dv + (x^2 - y^2) du^2 + dx^2 + dy^2"),
}


def metrics_for_dimension(n: int) -> list:
    return [k for k, (dim, _) in METRIC_CATALOGUE.items() if dim == "any" or dim == n]


def polynomial_jet_section(jctx: JetFrameContext, base: GeneratorTable | None = None) -> Section:
    """A section of J^1LM with a polynomial frame and unrelated polynomial jet coordinates.

    The jet part is deliberately not the derivative of the frame, so nothing
    holonomic or metric-compatible is built in.
    """
    base = base or jctx.base_table()
    R = base.ring
    n = jctx.n
    X = [R.var(v) for v in jctx.x]
    E = identity_matrix(R, n)
    for a in range(n):
        E[a][(a + 1) % n] = E[a][(a + 1) % n] + X[(a + 2) % n] * Fraction(1, a + 2)
    E[n - 1][n - 1] = E[n - 1][n - 1] + X[0] * X[0]
    E1 = [[[X[(s + k + c) % n] * (s - k + 2 * c - 1) + (X[s] * X[c] if (s + k) % 2 else R.zero)
            for c in range(n)] for k in range(n)] for s in range(n)]
    return jctx.section(base, E, E1, name="polynomial-jet")
