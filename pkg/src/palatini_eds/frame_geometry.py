"""Canonical forms of the first jet of the frame bundle, abstract and in coordinates.

Index conventions: Python lists are 0-based, generator and variable names are
1-based.  ``omega[i][j]`` is omega^i_j, ``E[nu][k]`` is the frame e^nu_k,
``E1[s][k][r]`` the jet coordinate e^s_{kr}, and ``inverse[k][mu]`` the coframe
e^k_mu.  eta is diagonal, so eta^{ij} = eta_{ij}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .eds_engine import EDS, Section
from .exterior_algebra import (Form, FormError, GeneratorTable, Substitution, lowered_theta, matrix_vector_wedge,
                               matrix_wedge, volume_form)
from .scalar_ring import Ring, RingError, det_inverse, identity_matrix


class MetricSignature:
    """Diagonal eta with entries +-1."""

    def __init__(self, entries):
        entries = tuple(int(e) for e in entries)
        if not entries or any(e not in (1, -1) for e in entries):
            raise ValueError(f"signature entries must be +1 or -1, got {entries}")
        self.entries = entries

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "MetricSignature":
        if not text or any(ch not in "+-" for ch in text):
            raise ValueError(f"signature literal must be a string over '+-', got {text!r}")
        if n is not None and len(text) != n:
            raise ValueError(f"signature {text!r} has length {len(text)}, expected {n}")
        return cls(1 if ch == "+" else -1 for ch in text)

    @classmethod
    def lorentzian(cls, n: int) -> "MetricSignature":
        return cls([-1] + [1] * (n - 1))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def up(self, i: int, j: int) -> int:
        return self.entries[i] if i == j else 0

    down = up

    @property
    def det(self) -> int:
        out = 1
        for e in self.entries:
            out *= e
        return out

    @property
    def text(self) -> str:
        return "".join("+" if e > 0 else "-" for e in self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, MetricSignature) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"MetricSignature({self.text!r})"


def _sig(eta, n: int) -> MetricSignature:
    if eta is None:
        return MetricSignature.lorentzian(n)
    if isinstance(eta, str):
        return MetricSignature.parse(eta, n)
    if isinstance(eta, MetricSignature):
        if eta.n != n:
            raise ValueError(f"signature has length {eta.n}, expected {n}")
        return eta
    return MetricSignature(eta)


@dataclass
class FrameForms:
    """theta, omega, T, Omega (and optionally Gamma) realized on one table."""

    n: int
    eta: MetricSignature
    table: GeneratorTable
    theta: list
    omega: list
    T: list
    Omega: list
    mode: str = "abstract"
    Gamma: list | None = None
    extras: dict = field(default_factory=dict)
    _low: dict = field(default_factory=dict, repr=False)

    def omega_up(self, i: int, j: int) -> Form:
        """omega^{ij} = eta^{jp} omega^i_p (0-based)."""
        return self.omega[i][j] * self.eta[j]

    def Omega_up(self, i: int, j: int) -> Form:
        return self.Omega[i][j] * self.eta[j]

    def trace_omega(self) -> Form:
        out = self.table.zero()
        for s in range(self.n):
            out = out + self.omega[s][s]
        return out

    def low(self, *indices) -> Form:
        """theta_{i1..ip} for 0-based indices (cached)."""
        key = tuple(indices)
        f = self._low.get(key)
        if f is None:
            f = lowered_theta([i + 1 for i in key], self.theta)
            self._low[key] = f
        return f

    def volume(self) -> Form:
        return volume_form(self.theta)


# -- abstract tables -----------------------------------------------------------


def _names(n):
    r = range(1, n + 1)
    return r


def cartan_table(n: int, eta=None, variations: bool = False, corrupt_bianchi: bool = False) -> FrameForms:
    """Abstract theta, omega, T, Omega with structure equations and Bianchi identities as d-rules.

    With ``variations`` fresh generators dtheta[k] (delta theta^k) and
    domega[i,j] (delta omega^{ij}) are adjoined, each with a fresh closed 2-form
    as its derivative.  ``corrupt_bianchi`` flips the sign of the first term of
    the curvature d-rule (negative control).
    """
    eta = _sig(eta, n)
    t = GeneratorTable(Ring(f"cartan{n}"), name=f"cartan-{n}", dim=n)
    th = [t.add_generator(f"theta[{i}]", 1) for i in _names(n)]
    om = [[t.add_generator(f"omega[{i},{j}]", 1) for j in _names(n)] for i in _names(n)]
    Tg = [t.add_generator(f"T[{i}]", 2) for i in _names(n)]
    Og = [[t.add_generator(f"Omega[{i},{j}]", 2) for j in _names(n)] for i in _names(n)]
    theta = [t.gen(g) for g in th]
    omega = [[t.gen(g) for g in row] for row in om]
    T = [t.gen(g) for g in Tg]
    Omega = [[t.gen(g) for g in row] for row in Og]
    ow_th = matrix_vector_wedge(omega, theta)
    ow_ow = matrix_wedge(omega, omega)
    Ow_th = matrix_vector_wedge(Omega, theta)
    ow_T = matrix_vector_wedge(omega, T)
    Ow_ow = matrix_wedge(Omega, omega)
    ow_Ow = matrix_wedge(omega, Omega)
    sgn = -1 if corrupt_bianchi else 1
    for i in range(n):
        t.set_d_rule(th[i], T[i] - ow_th[i])
        t.set_d_rule(Tg[i], Ow_th[i] - ow_T[i])
        for j in range(n):
            t.set_d_rule(om[i][j], Omega[i][j] - ow_ow[i][j])
            t.set_d_rule(Og[i][j], Ow_ow[i][j] * sgn - ow_Ow[i][j])
    forms = FrameForms(n, eta, t, theta, omega, T, Omega, mode="abstract")
    if variations:
        add_variation_generators(forms)
    return forms


def add_variation_generators(forms: FrameForms) -> None:
    t = forms.table
    n = forms.n
    dth = []
    for k in _names(n):
        D = t.add_generator(f"Ddtheta[{k}]", 2)
        t.set_d_rule(D, t.zero())
        g = t.add_generator(f"dtheta[{k}]", 1)
        t.set_d_rule(g, t.gen(D))
        dth.append(t.gen(g))
    dom = []
    for i in _names(n):
        row = []
        for j in _names(n):
            D = t.add_generator(f"Ddomega[{i},{j}]", 2)
            t.set_d_rule(D, t.zero())
            g = t.add_generator(f"domega[{i},{j}]", 1)
            t.set_d_rule(g, t.gen(D))
            row.append(t.gen(g))
        dom.append(row)
    forms.extras["dtheta"] = dth
    forms.extras["domega_up"] = dom


def free_table(n: int, eta=None) -> FrameForms:
    """Free differential algebra on theta, omega with Dtheta = d theta, Domega = d omega.

    T and Omega are then the eliminated expressions Dtheta + omega^theta and
    Domega + omega^omega.
    """
    eta = _sig(eta, n)
    t = GeneratorTable(Ring(f"free{n}"), name=f"free-{n}", dim=n)
    th = [t.add_generator(f"theta[{i}]", 1) for i in _names(n)]
    om = [[t.add_generator(f"omega[{i},{j}]", 1) for j in _names(n)] for i in _names(n)]
    Dth = [t.add_generator(f"Dtheta[{i}]", 2) for i in _names(n)]
    Dom = [[t.add_generator(f"Domega[{i},{j}]", 2) for j in _names(n)] for i in _names(n)]
    for i in range(n):
        t.set_d_rule(th[i], t.gen(Dth[i]))
        t.set_d_rule(Dth[i], t.zero())
        for j in range(n):
            t.set_d_rule(om[i][j], t.gen(Dom[i][j]))
            t.set_d_rule(Dom[i][j], t.zero())
    theta = [t.gen(g) for g in th]
    omega = [[t.gen(g) for g in row] for row in om]
    T = [a + b for a, b in zip([t.gen(g) for g in Dth], matrix_vector_wedge(omega, theta))]
    ww = matrix_wedge(omega, omega)
    Omega = [[t.gen(Dom[i][j]) + ww[i][j] for j in range(n)] for i in range(n)]
    return FrameForms(n, eta, t, theta, omega, T, Omega, mode="eliminated")


def realization_map(abstract: FrameForms, concrete: FrameForms) -> Substitution:
    """Map abstract theta, omega, T, Omega generators to their realizations in another table.

    For the free table this is the elimination T -> d theta + omega^theta,
    Omega -> d omega + omega^omega; for a coordinate table it is the canonical
    forms.  Either way the map commutes with d.
    """
    n = abstract.n
    t = abstract.table
    gmap = {}
    for i in range(n):
        gmap[f"theta[{i + 1}]"] = concrete.theta[i]
        gmap[f"T[{i + 1}]"] = concrete.T[i]
        for j in range(n):
            gmap[f"omega[{i + 1},{j + 1}]"] = concrete.omega[i][j]
            gmap[f"Omega[{i + 1},{j + 1}]"] = concrete.Omega[i][j]
    return Substitution(t, None, gmap, concrete.table)


def eliminate(form: Form, abstract: FrameForms, free: FrameForms | None = None) -> Form:
    """Rewrite an abstract form with T and Omega eliminated via the structure equations."""
    free = free or free_table(abstract.n, abstract.eta)
    return realization_map(abstract, free)(form)


# -- coordinates -----------------------------------------------------------------


class JetFrameContext:
    """Coordinates (x^mu, e^nu_k, e^sigma_{k rho}) on the first jet of the frame bundle."""

    def __init__(self, n: int, eta=None, names=("x", "e", "ej"), ring: Ring | None = None):
        self.n = n
        self.eta = _sig(eta, n)
        xs, es, ejs = names
        self.names = names
        t = GeneratorTable(ring or Ring(f"jet{n}"), name=f"jet-{n}", dim=n)
        self.table = t
        self.ring = t.ring
        r = range(1, n + 1)
        self.x = [f"{xs}[{m}]" for m in r]
        self.e = [[f"{es}[{nu},{k}]" for k in r] for nu in r]
        self.ej = [[[f"{ejs}[{s},{k},{rho}]" for rho in r] for k in r] for s in r]
        for name in self.x:
            t.declare_variable(name, "coordinate")
        for row in self.e:
            for name in row:
                t.declare_variable(name, "fiber")
        for plane in self.ej:
            for row in plane:
                for name in row:
                    t.declare_variable(name, "fiber")
        R = self.ring
        self.E = [[R.var(v) for v in row] for row in self.e]
        self.E1 = [[[R.var(v) for v in row] for row in plane] for plane in self.ej]
        self._det = None
        self._inverse = None
        self._forms = None

    @property
    def inverse(self):
        """Coframe e^k_mu as inverse[k][mu]."""
        if self._inverse is None:
            self._det, self._inverse = det_inverse(self.E)
        return self._inverse

    @property
    def frame_det(self):
        self.inverse
        return self._det

    def section(self, base: GeneratorTable, E, E1, name: str = "") -> Section:
        """Section assigning e^nu_k = E[nu][k](x), e^s_{kr} = E1[s][k][r](x)."""
        n = self.n
        assign = {}
        for nu in range(n):
            for k in range(n):
                assign[self.e[nu][k]] = E[nu][k]
        for s in range(n):
            for k in range(n):
                for r in range(n):
                    assign[self.ej[s][k][r]] = E1[s][k][r]
        return Section(self.table, base, assign, name=name)

    def base_table(self) -> GeneratorTable:
        t = GeneratorTable(Ring(f"base{self.n}"), name=f"base-{self.n}", dim=self.n)
        for name in self.x:
            t.declare_variable(name, "coordinate")
        return t


def frame_forms(table: GeneratorTable, coords, E, E1, eta: MetricSignature, inverse=None) -> FrameForms:
    """Canonical forms from frame data given as scalars on ``table``.

    ``coords`` are the base coordinate names; E, E1 may be universal jet
    variables or functions of x (a section), which gives the pulled-back forms.
    """
    n = len(coords)
    if inverse is None:
        _, inverse = det_inverse(E)
    dx = [table.dvar(c) for c in coords]
    theta = []
    for k in range(n):
        f = table.zero()
        for mu in range(n):
            if inverse[k][mu].num:
                f = f + dx[mu] * inverse[k][mu]
        theta.append(f)
    # A[mu][l] = d e^mu_l - e^mu_{l s} dx^s
    A = []
    for mu in range(n):
        row = []
        for l in range(n):
            f = table.scalar(E[mu][l]).d()
            for s in range(n):
                if E1[mu][l][s].num:
                    f = f - dx[s] * E1[mu][l][s]
            row.append(f)
        A.append(row)
    omega = []
    for k in range(n):
        row = []
        for l in range(n):
            f = table.zero()
            for mu in range(n):
                if inverse[k][mu].num and A[mu][l].terms:
                    f = f + A[mu][l] * inverse[k][mu]
            row.append(f)
        omega.append(row)
    ow_th = matrix_vector_wedge(omega, theta)
    T = [theta[i].d() + ow_th[i] for i in range(n)]
    ww = matrix_wedge(omega, omega)
    Omega = [[omega[i][j].d() + ww[i][j] for j in range(n)] for i in range(n)]
    R = table.ring
    Gamma = [[[R.zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for s in range(n):
        for mu in range(n):
            for nu in range(n):
                acc = R.zero
                for k in range(n):
                    if E1[s][k][nu].num and inverse[k][mu].num:
                        acc = acc - E1[s][k][nu] * inverse[k][mu]
                Gamma[s][mu][nu] = acc
    return FrameForms(n, eta, table, theta, omega, T, Omega, mode="coordinates", Gamma=Gamma,
                      extras={"inverse": inverse, "E": E, "E1": E1, "coords": list(coords)})


def canonical_forms(ctx: JetFrameContext) -> FrameForms:
    if ctx._forms is None:
        ctx._forms = frame_forms(ctx.table, ctx.x, ctx.E, ctx.E1, ctx.eta, ctx.inverse)
    return ctx._forms


def section_forms(ctx: JetFrameContext, section: Section) -> FrameForms:
    """Canonical forms computed directly from a section's frame data on the base."""
    base = section.target
    n = ctx.n
    E = [[section.scalar(ctx.E[nu][k]) for k in range(n)] for nu in range(n)]
    E1 = [[[section.scalar(ctx.E1[s][k][r]) for r in range(n)] for k in range(n)] for s in range(n)]
    return frame_forms(base, ctx.x, E, E1, ctx.eta)


def curvature_in_christoffels(forms: FrameForms):
    """Residuals of e^l_mu Omega^k_l = e^k_g (dGamma^g_{mu r}^dx^r + Gamma^g_{s b} Gamma^s_{mu d} dx^b^dx^d)."""
    n = forms.n
    t = forms.table
    inv = forms.extras["inverse"]
    coords = forms.extras["coords"]
    G = forms.Gamma
    dx = [t.dvar(c) for c in coords]
    out = []
    for k in range(n):
        for mu in range(n):
            lhs = t.zero()
            for l in range(n):
                if inv[l][mu].num:
                    lhs = lhs + forms.Omega[k][l] * inv[l][mu]
            rhs = t.zero()
            for g in range(n):
                if not inv[k][g].num:
                    continue
                inner = t.zero()
                for r in range(n):
                    inner = inner + t.scalar(G[g][mu][r]).d().wedge(dx[r])
                for b in range(n):
                    for dd in range(n):
                        c = t.ring.zero
                        for s in range(n):
                            if G[g][s][b].num and G[s][mu][dd].num:
                                c = c + G[g][s][b] * G[s][mu][dd]
                        if c.num:
                            inner = inner + dx[b].wedge(dx[dd]) * c
                rhs = rhs + inner * inv[k][g]
            out.append(((k, mu), lhs - rhs))
    return out


# -- Lagrangian and EDSs -----------------------------------------------------------


def palatini_terms(forms: FrameForms):
    """Unsimplified summands eta^{kp} theta_{kl} ^ Omega^l_p, one per index triple (k, l, p)."""
    n = forms.n
    out = []
    for k, l, p in product(range(n), repeat=3):
        e = forms.eta.up(k, p)
        piece = forms.low(k, l).wedge(forms.Omega[l][p]) * e if e else forms.table.zero()
        out.append(((k, l, p), piece))
    return out


def palatini_lagrangian(forms: FrameForms) -> Form:
    """lambda = eta^{kp} theta_{kl} ^ Omega^l_p."""
    if forms.n < 2:
        raise ValueError("the Palatini Lagrangian needs n >= 2")
    out = forms.table.zero()
    for _, piece in palatini_terms(forms):
        out = out + piece
    return out


def metricity_forms(forms: FrameForms):
    """(pi_p omega)^{ij} = eta^{ik} omega^j_k + eta^{jk} omega^i_k for i <= j, with labels."""
    n = forms.n
    gens, labels = [], []
    for i in range(n):
        for j in range(i, n):
            gens.append(forms.omega[j][i] * forms.eta[i] + forms.omega[i][j] * forms.eta[j])
            labels.append(f"metricity[{i + 1},{j + 1}]")
    return gens, labels


def einstein_generators(forms: FrameForms):
    """theta_{ipq} ^ Omega^{pq} (summed over p, q) for each i."""
    n = forms.n
    out = []
    for i in range(n):
        f = forms.table.zero()
        for p in range(n):
            for q in range(n):
                if p == q or i in (p, q):
                    continue
                f = f + forms.low(i, p, q).wedge(forms.Omega_up(p, q))
        out.append(f)
    return out


@dataclass
class EinsteinEDS:
    restriction: EDS
    equations: EDS


def einstein_eds(forms: FrameForms) -> EinsteinEDS:
    n = forms.n
    met, mlab = metricity_forms(forms)
    tors = [forms.T[i] for i in range(n)]
    tlab = [f"torsion[{i + 1}]" for i in range(n)]
    restriction = EDS(met + tors, forms.table, labels=mlab + tlab, name="restriction")
    ein = einstein_generators(forms)
    elab = [f"einstein[{i + 1}]" for i in range(n)]
    equations = EDS(tors + ein + met, forms.table, labels=tlab + elab + mlab, name="einstein")
    return EinsteinEDS(restriction, equations)


def einstein_algebraic_presentation(forms: FrameForms) -> EDS:
    """<omega^{lp}+omega^{pl}, Omega^{lp}+Omega^{pl}, T^l, Omega^k_l ^ theta^l, theta_{ipq} ^ Omega^{pq}>_alg."""
    n = forms.n
    gens, labels = [], []
    for l in range(n):
        for p in range(l, n):
            gens.append(forms.omega_up(l, p) + forms.omega_up(p, l))
            labels.append(f"omega_sym[{l + 1},{p + 1}]")
    for l in range(n):
        for p in range(l, n):
            gens.append(forms.Omega_up(l, p) + forms.Omega_up(p, l))
            labels.append(f"Omega_sym[{l + 1},{p + 1}]")
    for l in range(n):
        gens.append(forms.T[l])
        labels.append(f"torsion[{l + 1}]")
    for k in range(n):
        f = forms.table.zero()
        for l in range(n):
            f = f + forms.Omega[k][l].wedge(forms.theta[l])
        gens.append(f)
        labels.append(f"bianchi_algebraic[{k + 1}]")
    for i, f in enumerate(einstein_generators(forms)):
        gens.append(f)
        labels.append(f"einstein[{i + 1}]")
    return EDS(gens, forms.table, labels=labels, name="einstein-algebraic")


# -- transformation laws -----------------------------------------------------------


def _inv(m):
    return det_inverse(m)[1]


def gauge_transform_check(ctx: JetFrameContext, g) -> dict:
    """Residuals of theta -> g^{-1} theta and omega -> g^{-1} dg + g^{-1} omega g.

    The transformation acts as e^nu_k -> e^nu_l g^l_k, e^s_{kr} -> e^s_{lr} g^l_k;
    ``g`` is an n x n matrix of scalars on the context ring (g[l][k] = g^l_k).
    """
    n = ctx.n
    t = ctx.table
    det, ginv = det_inverse(g)
    forms = canonical_forms(ctx)
    R = ctx.ring
    vmap = {}
    for nu in range(n):
        for k in range(n):
            acc = R.zero
            for l in range(n):
                acc = acc + ctx.E[nu][l] * g[l][k]
            vmap[ctx.e[nu][k]] = acc
    for s in range(n):
        for k in range(n):
            for r in range(n):
                acc = R.zero
                for l in range(n):
                    acc = acc + ctx.E1[s][l][r] * g[l][k]
                vmap[ctx.ej[s][k][r]] = acc
    sub = Substitution(t, vmap)
    out = {}
    for i in range(n):
        expect = t.zero()
        for k in range(n):
            expect = expect + forms.theta[k] * ginv[i][k]
        out[f"theta[{i + 1}]"] = sub(forms.theta[i]) - expect
    dg = [[t.scalar(g[a][b]).d() for b in range(n)] for a in range(n)]
    for i in range(n):
        for j in range(n):
            expect = t.zero()
            for k in range(n):
                expect = expect + dg[k][j] * ginv[i][k]
                for l in range(n):
                    c = ginv[i][k] * g[l][j]
                    if c.num:
                        expect = expect + forms.omega[k][l] * c
            out[f"omega[{i + 1},{j + 1}]"] = sub(forms.omega[i][j]) - expect
    return out


def coordinate_change_check(ctx: JetFrameContext, xbar) -> dict:
    """Residuals of theta-bar = theta, omega-bar = omega and the Christoffel law under x -> xbar(x).

    ``xbar`` lists polynomials (ScalarExpr on ctx.ring) in the coordinates x.
    The barred universal forms live on a second context and are pulled back
    through the induced map on jet coordinates.
    """
    n = ctx.n
    t = ctx.table
    R = ctx.ring
    J = [[xbar[m].partial(ctx.x[s]) for s in range(n)] for m in range(n)]
    det, Jinv = det_inverse(J)
    H = [[[xbar[m].partial(ctx.x[a]).partial(ctx.x[b]) for b in range(n)] for a in range(n)] for m in range(n)]
    bar = JetFrameContext(n, ctx.eta, names=("xb", "eb", "ejb"))
    bforms = canonical_forms(bar)
    forms = canonical_forms(ctx)
    vmap = {}
    for m in range(n):
        vmap[bar.x[m]] = xbar[m]
    ebar = [[None] * n for _ in range(n)]
    for m in range(n):
        for k in range(n):
            acc = R.zero
            for s in range(n):
                acc = acc + J[m][s] * ctx.E[s][k]
            ebar[m][k] = acc
            vmap[bar.e[m][k]] = acc
    for m in range(n):
        for k in range(n):
            for nu in range(n):
                acc = R.zero
                for rho in range(n):
                    if not Jinv[rho][nu].num:
                        continue
                    inner = R.zero
                    for s in range(n):
                        inner = inner + J[m][s] * ctx.E1[s][k][rho] + H[m][s][rho] * ctx.E[s][k]
                    acc = acc + inner * Jinv[rho][nu]
                vmap[bar.ej[m][k][nu]] = acc
    sub = Substitution(bar.table, vmap, None, t)
    out = {}
    for k in range(n):
        out[f"theta[{k + 1}]"] = sub(bforms.theta[k]) - forms.theta[k]
        for l in range(n):
            out[f"omega[{k + 1},{l + 1}]"] = sub(bforms.omega[k][l]) - forms.omega[k][l]
    G = forms.Gamma
    for m in range(n):
        for a in range(n):
            for b in range(n):
                lhs = sub.scalar(bforms.Gamma[m][a][b])
                rhs = R.zero
                for s in range(n):
                    for rho in range(n):
                        for tau in range(n):
                            c = Jinv[rho][a] * Jinv[tau][b]
                            if not c.num:
                                continue
                            rhs = rhs + J[m][s] * G[s][rho][tau] * c
                for rho in range(n):
                    for tau in range(n):
                        if H[m][rho][tau].num:
                            rhs = rhs - H[m][rho][tau] * Jinv[rho][a] * Jinv[tau][b]
                out[f"Gamma[{m + 1},{a + 1},{b + 1}]"] = t.scalar(lhs - rhs)
    return out


def tetrad_postulate(ctx: JetFrameContext, Gamma):
    """Substitute e^mu_{k nu} -> -e^rho_k Gamma^mu_{rho nu}(x) into omega.

    Returns (omega_sub, residuals) where residuals compare against
    e^k_mu (d e^mu_l + e^s_l Gamma^mu_{s r} dx^r).
    """
    n = ctx.n
    t = ctx.table
    R = ctx.ring
    forms = canonical_forms(ctx)
    vmap = {}
    for m in range(n):
        for k in range(n):
            for nu in range(n):
                acc = R.zero
                for rho in range(n):
                    if Gamma[m][rho][nu].num:
                        acc = acc - ctx.E[rho][k] * Gamma[m][rho][nu]
                vmap[ctx.ej[m][k][nu]] = acc
    sub = Substitution(t, vmap)
    inv = ctx.inverse
    dx = [t.dvar(c) for c in ctx.x]
    omega_sub = [[sub(forms.omega[k][l]) for l in range(n)] for k in range(n)]
    residuals = {}
    for k in range(n):
        for l in range(n):
            expect = t.zero()
            for m in range(n):
                inner = t.dvar(ctx.e[m][l])
                for s in range(n):
                    for r in range(n):
                        if Gamma[m][s][r].num:
                            inner = inner + dx[r] * (ctx.E[s][l] * Gamma[m][s][r])
                expect = expect + inner * inv[k][m]
            residuals[f"omega[{k + 1},{l + 1}]"] = omega_sub[k][l] - expect
    return omega_sub, residuals


# -- identities ---------------------------------------------------------------------


def identity_checks(forms: FrameForms):
    """The structure-equation identities as (name, description, residual) triples, one per index tuple."""
    n = forms.n
    t = forms.table
    th, om, T, Om = forms.theta, forms.omega, forms.T, forms.Omega
    trw = forms.trace_omega()
    out = []
    for i in range(n):
        rhs = t.zero()
        for k in range(n):
            rhs = rhs + om[i][k].wedge(th[k])
        out.append((f"first structure equation [{i + 1}]", "d theta^i + omega^i_k ^ theta^k = T^i",
                    th[i].d() + rhs - T[i]))
    for i in range(n):
        for j in range(n):
            rhs = t.zero()
            for k in range(n):
                rhs = rhs + om[i][k].wedge(om[k][j])
            out.append((f"second structure equation [{i + 1},{j + 1}]",
                        "d omega^i_j + omega^i_k ^ omega^k_j = Omega^i_j", om[i][j].d() + rhs - Om[i][j]))
    for k in range(n):
        rhs = t.zero()
        for l in range(n):
            rhs = rhs + Om[k][l].wedge(th[l]) - om[k][l].wedge(T[l])
        out.append((f"torsion Bianchi [{k + 1}]", "d T^k = Omega^k_l ^ theta^l - omega^k_l ^ T^l", T[k].d() - rhs))
    for i in range(n):
        for j in range(n):
            rhs = t.zero()
            for k in range(n):
                rhs = rhs + Om[i][k].wedge(om[k][j]) - om[i][k].wedge(Om[k][j])
            out.append((f"curvature Bianchi [{i + 1},{j + 1}]",
                        "d Omega^i_j = Omega^i_k ^ omega^k_j - omega^i_k ^ Omega^k_j", Om[i][j].d() - rhs))
    low = forms.low
    for l in range(n):
        for i in range(n):
            rhs = -trw.wedge(low(l, i))
            for k in range(n):
                rhs = rhs + om[k][l].wedge(low(k, i)) - om[k][i].wedge(low(k, l)) + T[k].wedge(low(l, i, k))
            out.append((f"d theta_li [{l + 1},{i + 1}]",
                        "d theta_{li} = omega^k_l ^ theta_{ki} - omega^k_i ^ theta_{kl} - omega^s_s ^ theta_{li}"
                        " + T^k ^ theta_{lik}", low(l, i).d() - rhs))
    Omu = forms.Omega_up
    omu = forms.omega_up
    for p in range(n):
        for q in range(n):
            rhs = t.zero()
            for k in range(n):
                rhs = rhs + Om[p][k].wedge(omu(k, q)) - om[p][k].wedge(Omu(k, q))
            out.append((f"d Omega^pq [{p + 1},{q + 1}]", "d Omega^{pq} = Omega^p_k ^ omega^{kq} - omega^p_k ^ Omega^{kq}",
                        Omu(p, q).d() - rhs))
    for l in range(n):
        for p in range(n):
            rhs = Omu(l, p)
            for s in range(n):
                rhs = rhs - om[l][s].wedge(omu(s, p))
            out.append((f"d omega^lp [{l + 1},{p + 1}]", "d omega^{lp} = -omega^l_s ^ omega^{sp} + Omega^{lp}",
                        omu(l, p).d() - rhs))
    for i, p, q in product(range(n), repeat=3):
        rhs = -trw.wedge(low(i, p, q))
        for k in range(n):
            rhs = (rhs + om[k][i].wedge(low(k, p, q)) + om[k][p].wedge(low(k, q, i))
                   + om[k][q].wedge(low(k, i, p)) + T[k].wedge(low(i, p, q, k)))
        out.append((f"d theta_ipq [{i + 1},{p + 1},{q + 1}]",
                    "d theta_{ipq} = omega^k_i ^ theta_{kpq} + omega^k_p ^ theta_{kqi} + omega^k_q ^ theta_{kip}"
                    " - omega^s_s ^ theta_{ipq} + T^k ^ theta_{ipqk}", low(i, p, q).d() - rhs))
    return out


IDENTITY_FAMILIES = (
    "first structure equation", "second structure equation", "torsion Bianchi", "curvature Bianchi",
    "d theta_li", "d Omega^pq", "d omega^lp", "d theta_ipq",
)


def identity_suite(forms: FrameForms) -> dict:
    """Group identity residuals by family: {family: (description, [(index label, residual)])}."""
    out: dict = {}
    for name, desc, res in identity_checks(forms):
        fam, _, idx = name.partition(" [")
        entry = out.setdefault(fam, (desc, []))
        entry[1].append(("[" + idx, res))
    return out


# -- section catalogue ----------------------------------------------------------------


def metric_section(ctx: JetFrameContext, base: GeneratorTable, coframe, name: str = "") -> Section:
    """Levi-Civita section for a coframe e^k_mu = coframe[k][mu] (scalars on ``base``).

    The frame is the inverse matrix, the metric g_{mu nu} = eta_{kl} e^k_mu e^l_nu,
    and e^s_{k nu} = -Gamma^s_{rho nu} e^rho_k with Gamma from the Koszul formula.
    """
    from .variational import christoffel_from_metric

    n = ctx.n
    R = base.ring
    _, frame = det_inverse(coframe)
    g = [[sum((coframe[k][m] * coframe[k][nu] * ctx.eta[k] for k in range(n)), R.zero) for nu in range(n)]
         for m in range(n)]
    G = christoffel_from_metric(g, ctx.x)
    E1 = [[[R.zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for s in range(n):
        for k in range(n):
            for nu in range(n):
                acc = R.zero
                for rho in range(n):
                    if G[s][rho][nu].num and frame[rho][k].num:
                        acc = acc - G[s][rho][nu] * frame[rho][k]
                E1[s][k][nu] = acc
    sec = ctx.section(base, frame, E1, name=name)
    sec.metric = g
    sec.christoffel = G
    sec.coframe = coframe
    return sec


def flat_section(ctx: JetFrameContext, base: GeneratorTable | None = None) -> Section:
    base = base or ctx.base_table()
    R = base.ring
    n = ctx.n
    E = identity_matrix(R, n)
    E1 = [[[R.zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    sec = ctx.section(base, E, E1, name="flat")
    sec.metric = [[R.const(ctx.eta.up(i, j)) for j in range(n)] for i in range(n)]
    sec.christoffel = E1
    sec.coframe = E
    return sec


def ppwave_coframe(base: GeneratorTable, coords, H=None):
    """Rational coframe for 2 du dv + H du^2 + dx^2 + dy^2 with eta = (-,+,+,+), default H = x^2 - y^2.

    H is vacuum exactly when it is harmonic in (x, y).

    theta^1 = -(p du + dv), theta^2 = r du + dv with p = (H-1)/2, r = (H+1)/2,
    theta^3 = dx, theta^4 = dy; the sign of theta^1 makes det(e^k_mu) = +1.
    """
    R = base.ring
    u, v, x, y = (R.var(c) for c in coords)
    if H is None:
        H = x * x - y * y
    p = (H - 1) * Fraction(1, 2)
    r = (H + 1) * Fraction(1, 2)
    one, zero = R.one, R.zero
    return [[-p, -one, zero, zero], [r, one, zero, zero], [zero, zero, one, zero], [zero, zero, zero, one]]


BOOST = ((Fraction(5, 4), Fraction(3, 4)), (Fraction(3, 4), Fraction(5, 4)))


def boosted(ctx: JetFrameContext, section: Section, Lam) -> Section:
    """Apply the constant gauge transformation k . s: e^nu_k -> e^nu_l L^l_k."""
    n = ctx.n
    base = section.target
    R = base.ring
    E = [[section.scalar(ctx.E[nu][k]) for k in range(n)] for nu in range(n)]
    E1 = [[[section.scalar(ctx.E1[s][k][r]) for r in range(n)] for k in range(n)] for s in range(n)]
    L = [[R.const(Lam[a][b]) for b in range(n)] for a in range(n)]
    E2 = [[sum((E[nu][l] * L[l][k] for l in range(n)), R.zero) for k in range(n)] for nu in range(n)]
    E12 = [[[sum((E1[s][l][r] * L[l][k] for l in range(n)), R.zero) for r in range(n)] for k in range(n)]
           for s in range(n)]
    return ctx.section(base, E2, E12, name=section.name + "-boosted")


def boost_matrix(n: int):
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    L[0][0], L[0][1] = BOOST[0]
    L[1][0], L[1][1] = BOOST[1]
    return L


def poly_metric_coframe(base: GeneratorTable, coords, eta: MetricSignature):
    """Coframe diag(1, .., 1, x^{n-1}) (x^1 when n = 2): flat space in polar-type coordinates."""
    R = base.ring
    n = len(coords)
    c = [[R.const(int(i == j)) for j in range(n)] for i in range(n)]
    c[n - 1][n - 1] = R.var(coords[n - 2])
    return c


SECTION_CATALOGUE = {
    "flat": "flat frame e = identity, zero connection (any n)",
    "ppwave": "pp-wave 2 du dv + (x^2 - y^2) du^2 + dx^2 + dy^2 with Levi-Civita jet (n = 4, eta = -+++)",
    "ppwave-boosted": "the pp-wave section transformed by a constant boost with cosh = 5/4, sinh = 3/4 (n = 4)",
    "poly-metric": "flat metric with one polynomial entry, coframe diag(1, .., 1, x^(n-1)), Levi-Civita jet (n >= 2)",
}


def catalogue_section(name: str, ctx: JetFrameContext, base: GeneratorTable | None = None) -> Section:
    base = base or ctx.base_table()
    n = ctx.n
    if name == "flat":
        return flat_section(ctx, base)
    if name in ("ppwave", "ppwave-boosted"):
        if n != 4:
            raise ValueError("the pp-wave sections need n = 4")
        if ctx.eta != MetricSignature.lorentzian(4):
            raise ValueError("the pp-wave sections need eta = -+++")
        sec = metric_section(ctx, base, ppwave_coframe(base, ctx.x), name="ppwave")
        if name == "ppwave":
            return sec
        return boosted(ctx, sec, boost_matrix(4))
    if name == "poly-metric":
        return metric_section(ctx, base, poly_metric_coframe(base, ctx.x, ctx.eta), name="poly-metric")
    raise KeyError(f"unknown section {name!r}; known: {', '.join(SECTION_CATALOGUE)}")
