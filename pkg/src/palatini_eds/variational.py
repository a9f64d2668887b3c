"""Variational calculations for the Palatini Lagrangian and classical field theory.

Integration by parts is never searched for: every step that holds only modulo
exact forms comes with an explicit potential, and the claimed equality is
checked by subtracting d(potential) and normalizing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .eds_engine import EDS, MembershipCertificate, member_alg
from .exterior_algebra import Form, GeneratorTable, VectorField, interior, variation
from .frame_geometry import FrameForms, cartan_table, palatini_lagrangian
from .linalg import RHS, Echelon
from .scalar_ring import Ring, RingError, ScalarExpr, det_inverse


# -- classical Euler-Lagrange --------------------------------------------------------


class ClassicalVariationalProblem:
    """First-order Lagrangian L(x, u, u_k) dx^1 ^ .. ^ dx^n on J^1E.

    Variables are named ``x[k]``, ``u[A]`` and ``u[A,k]`` (1-based) on a fresh
    jet table; build the Lagrangian from :meth:`x`, :meth:`u`, :meth:`uk`.
    """

    def __init__(self, n: int, fields: int = 1, name: str = "L"):
        if n < 1 or fields < 1:
            raise ValueError("need n >= 1 and at least one field")
        self.n = n
        self.fields = fields
        t = GeneratorTable(Ring(f"jet1-{name}"), name=f"J1E-{n}", dim=n)
        self.table = t
        self.ring = t.ring
        self.xs = [f"x[{k}]" for k in range(1, n + 1)]
        self.us = [f"u[{A}]" for A in range(1, fields + 1)]
        self.uks = [[f"u[{A},{k}]" for k in range(1, n + 1)] for A in range(1, fields + 1)]
        for v in self.xs:
            t.declare_variable(v, "coordinate")
        for v in self.us:
            t.declare_variable(v, "fiber")
        for row in self.uks:
            for v in row:
                t.declare_variable(v, "fiber")
        self.L: ScalarExpr = self.ring.zero

    def x(self, k: int) -> ScalarExpr:
        return self.ring.var(self.xs[k - 1])

    def u(self, A: int = 1) -> ScalarExpr:
        return self.ring.var(self.us[A - 1])

    def uk(self, A: int, k: int) -> ScalarExpr:
        return self.ring.var(self.uks[A - 1][k - 1])

    def set_lagrangian(self, L) -> "ClassicalVariationalProblem":
        L = self.ring.coerce(L)
        known = {self.ring[v].index for v in self.xs + self.us + [w for r in self.uks for w in r]}
        stray = L.variable_indices() - known
        if stray:
            raise RingError("Lagrangian uses undeclared variables")
        self.L = L
        return self

    def volume(self) -> Form:
        out = self.table.scalar(1)
        for v in self.xs:
            out = out.wedge(self.table.dvar(v))
        return out

    def sigma(self, A: int) -> Form:
        """sigma_A = (dL/du^A_k d/dx^k) _| dx^1 ^ .. ^ dx^n."""
        t = self.table
        vals = {t.differential_index(v): self.L.partial(self.uks[A - 1][k]) for k, v in enumerate(self.xs)}
        X = VectorField(t, vals, others_zero=True)
        return interior(X, self.volume())

    def base_table(self) -> GeneratorTable:
        b = GeneratorTable(Ring("base"), name=f"base-{self.n}", dim=self.n)
        for v in self.xs:
            b.declare_variable(v, "coordinate")
        return b

    def prolong(self, base: GeneratorTable, us):
        """Substitution for the prolongation of u^A = us[A-1] (scalars on ``base``)."""
        from .exterior_algebra import Substitution

        images = {}
        for A, f in enumerate(us):
            images[self.us[A]] = f
            for k, xk in enumerate(self.xs):
                images[self.uks[A][k]] = f.partial(xk)
        return Substitution(self.table, images, None, base)


def classical_euler_lagrange(p: ClassicalVariationalProblem, convention: str = "verbatim") -> list:
    """Generators alpha_A = s dsigma_A + dL/du^A dx^1 ^ .. ^ dx^n, one per field.

    ``verbatim`` uses s = (-1)^(n+1); ``corrected`` uses s = -1, which is what
    the integration by parts gives in every dimension (the two agree for even n).
    """
    if convention == "verbatim":
        s = (-1) ** (p.n + 1)
    elif convention == "corrected":
        s = -1
    else:
        raise ValueError(f"unknown convention {convention!r}")
    vol = p.volume()
    out = []
    for A in range(1, p.fields + 1):
        out.append(p.sigma(A).d() * s + vol * p.L.partial(p.us[A - 1]))
    return out


def euler_lagrange_oracle(p: ClassicalVariationalProblem, base: GeneratorTable, us) -> list:
    """dL/du^A - d/dx^k (dL/du^A_k) evaluated along the section u = us (no forms involved)."""
    sub = p.prolong(base, us)
    out = []
    for A in range(p.fields):
        e = sub.scalar(p.L.partial(p.us[A]))
        for k, xk in enumerate(p.xs):
            e = e - sub.scalar(p.L.partial(p.uks[A][k])).partial(xk)
        out.append(e)
    return out


@dataclass
class ELComparison:
    n: int
    convention: str
    pulled: list
    oracle: list
    sign: int | None

    @property
    def ok(self) -> bool:
        return self.sign is not None


def compare_euler_lagrange(p: ClassicalVariationalProblem, us, convention: str = "verbatim",
                           base: GeneratorTable | None = None) -> ELComparison:
    """Pull the generators back along the prolonged section and compare with the oracle.

    ``sign`` is the global sign s with s^*alpha_A = sign * oracle_A dx^1^..^dx^n for
    every A, or None when neither sign works.
    """
    base = base or p.base_table()
    us = [base.ring.coerce(f) for f in us]
    sub = p.prolong(base, us)
    gens = classical_euler_lagrange(p, convention)
    vol = tuple(base.differential_index(x) for x in p.xs)
    pulled = []
    for a in gens:
        f = sub(a)
        extra = [m for m in f.terms if m != vol]
        if extra:
            raise RingError("pulled-back generator is not a multiple of the volume")
        pulled.append(f.terms.get(vol, base.ring.zero))
    oracle = euler_lagrange_oracle(p, base, us)
    sign = None
    for s in (1, -1):
        if all((a - o * s).is_zero() for a, o in zip(pulled, oracle)):
            sign = s
            break
    return ELComparison(p.n, convention, pulled, oracle, sign)


# -- the algebraic solver and Christoffel symbols ---------------------------------------


class SymTensor3:
    """n^3 entries t_{ijk} (0-based storage)."""

    def __init__(self, n: int, entries=None, ring: Ring | None = None):
        self.n = n
        self.ring = ring
        if entries is None:
            zero = ring.zero if ring is not None else Fraction(0)
            entries = {(i, j, k): zero for i, j, k in product(range(n), repeat=3)}
        elif callable(entries):
            entries = {idx: entries(*idx) for idx in product(range(n), repeat=3)}
        self.entries = dict(entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __setitem__(self, idx, value):
        self.entries[idx] = value

    def is_zero(self) -> bool:
        return all(not v for v in self.entries.values())

    def __sub__(self, other: "SymTensor3") -> "SymTensor3":
        return SymTensor3(self.n, {k: v - other.entries[k] for k, v in self.entries.items()}, self.ring)


class SymmetryError(ValueError):
    pass


def _sgn(sign) -> int:
    if sign in (1, "+", "upper"):
        return 1
    if sign in (-1, "-", "lower"):
        return -1
    raise ValueError(f"sign must be +1/-1, got {sign!r}")


def input_constraint_residuals(a: SymTensor3, b: SymTensor3, sign) -> dict:
    """Necessary conditions for solvability of the two-symmetry system.

    With e = +1 (upper sign) the system reads c_ijk - c_jik = b_ijk and
    c_ijk + c_ikj = a_ijk, so b must be antisymmetric in (i, j) and a symmetric
    in (j, k): b_ijk + e b_jik = 0 and a_ijk - e a_ikj = 0.
    """
    e = _sgn(sign)
    n = a.n
    bad = {}
    for i, j, k in product(range(n), repeat=3):
        rb = b[i, j, k] + b[j, i, k] * e
        ra = a[i, j, k] - a[i, k, j] * e
        if rb:
            bad[("b", i, j, k)] = rb
        if ra:
            bad[("a", i, j, k)] = ra
    return bad


def literal_constraint_residuals(a: SymTensor3, b: SymTensor3, sign) -> dict:
    """The constraints b_ijk -+ b_jik = 0, a_ijk +- a_ikj = 0 read with the opposite pairing.

    Kept for the consistency analysis: together with solvability they force
    a = b = 0 (see :func:`literal_constraint_dimension`).
    """
    e = _sgn(sign)
    n = a.n
    bad = {}
    for i, j, k in product(range(n), repeat=3):
        rb = b[i, j, k] - b[j, i, k] * e
        ra = a[i, j, k] + a[i, k, j] * e
        if rb:
            bad[("b", i, j, k)] = rb
        if ra:
            bad[("a", i, j, k)] = ra
    return bad


def solve_sym_system(a: SymTensor3, b: SymTensor3, sign) -> SymTensor3:
    """c_ijk = 1/2 (a_ijk + a_jki - a_kij + b_ijk + b_kij - b_jki).

    Solves c_ijk - e c_jik = b_ijk, c_ijk + e c_ikj = a_ijk (e = +-1) after
    checking the solvability constraints; the result is verified against both
    equations before returning.
    """
    e = _sgn(sign)
    bad = input_constraint_residuals(a, b, e)
    if bad:
        key = sorted(bad, key=str)[0]
        raise SymmetryError(f"input violates the symmetry constraint at {key[0]}[{key[1] + 1},{key[2] + 1},{key[3] + 1}]")
    n = a.n
    half = Fraction(1, 2)
    c = SymTensor3(n, lambda i, j, k: (a[i, j, k] + a[j, k, i] - a[k, i, j] + b[i, j, k] + b[k, i, j] - b[j, k, i]) * half,
                   a.ring)
    res = sym_system_residual(c, a, b, e)
    if res:
        raise ArithmeticError("closed-form solution failed verification")
    return c


def sym_system_residual(c: SymTensor3, a: SymTensor3, b: SymTensor3, sign) -> list:
    e = _sgn(sign)
    n = c.n
    out = []
    for i, j, k in product(range(n), repeat=3):
        r1 = c[i, j, k] - c[j, i, k] * e - b[i, j, k]
        r2 = c[i, j, k] + c[i, k, j] * e - a[i, j, k]
        if r1:
            out.append(("first", (i, j, k), r1))
        if r2:
            out.append(("second", (i, j, k), r2))
    return out


def _col(n, i, j, k):
    return (i * n + j) * n + k


def sym_system_rows(n: int, sign, a: SymTensor3 | None = None, b: SymTensor3 | None = None) -> list:
    """The 2 n^3 x n^3 system as sparse rows (with right-hand sides when a, b are given)."""
    e = _sgn(sign)
    rows = []
    for i, j, k in product(range(n), repeat=3):
        r = {}
        r[_col(n, i, j, k)] = r.get(_col(n, i, j, k), 0) + 1
        c2 = _col(n, j, i, k)
        r[c2] = r.get(c2, 0) - e
        if b is not None:
            r[RHS] = b[i, j, k]
        rows.append({kk: v for kk, v in r.items() if (v if kk != RHS else True)})
        r = {}
        r[_col(n, i, j, k)] = r.get(_col(n, i, j, k), 0) + 1
        c2 = _col(n, i, k, j)
        r[c2] = r.get(c2, 0) + e
        if a is not None:
            r[RHS] = a[i, j, k]
        rows.append({kk: v for kk, v in r.items() if (v if kk != RHS else True)})
    return rows


def sym_system_kernel_dimension(n: int, sign) -> int:
    ech = Echelon()
    for r in sym_system_rows(n, sign):
        ech.add({k: Fraction(v) for k, v in r.items()})
    return n ** 3 - ech.rank


def dense_sym_solve(a: SymTensor3, b: SymTensor3, sign) -> SymTensor3 | None:
    """Solve the same system by elimination (independent of the closed form)."""
    n = a.n
    ring = a.ring
    ech = Echelon()
    for r in sym_system_rows(n, sign, a, b):
        if ring is not None:
            row = {k: (ring.coerce(v) if k != RHS else v) for k, v in r.items()}
        else:
            row = {k: Fraction(v) for k, v in r.items()}
        ech.add(row)
    if ech.inconsistent:
        return None
    x = ech.solve()
    zero = ring.zero if ring is not None else Fraction(0)
    return SymTensor3(n, lambda i, j, k: x.get(_col(n, i, j, k), zero), ring)


def literal_constraint_dimension(n: int, sign) -> int:
    """Dimension of the space of (a, b) that satisfy the literal constraints and admit a solution c.

    Unknowns are c (n^3 entries); a and b are the images of c, so the space
    is the image of {c : a(c), b(c) satisfy the literal constraints}.
    """
    e = _sgn(sign)
    N = n ** 3
    ech = Echelon()
    # b(c)_ijk -+ b(c)_jik = 0 and a(c)_ijk +- a(c)_ikj = 0 as equations on c
    for i, j, k in product(range(n), repeat=3):
        row: dict = {}

        def add(col, v):
            row[col] = row.get(col, 0) + v

        # b_ijk = c_ijk - e c_jik ; b_jik = c_jik - e c_ijk
        add(_col(n, i, j, k), 1)
        add(_col(n, j, i, k), -e)
        add(_col(n, j, i, k), -e)
        add(_col(n, i, j, k), e * e)
        ech.add({kk: Fraction(v) for kk, v in row.items() if v})
        row = {}
        # a_ijk = c_ijk + e c_ikj ; a_ikj = c_ikj + e c_ijk
        add(_col(n, i, j, k), 1)
        add(_col(n, i, k, j), e)
        add(_col(n, i, k, j), e)
        add(_col(n, i, j, k), e * e)
        ech.add({kk: Fraction(v) for kk, v in row.items() if v})
    # the map c -> (a, b) is injective (trivial kernel), so the image dimension
    # equals the dimension of the admissible c-space
    return N - ech.rank


def christoffel_from_metric(g, coords, check: bool = True):
    """Levi-Civita symbols Gamma[s][m][n] of a metric g[m][n] in coordinates ``coords``.

    The lowered symbols c_{ijk} = g_{is} Gamma^s_{jk} solve the two-symmetry
    system with the lower sign, a = 0 and b_ijk = d_k g_ij; they are then raised
    with the inverse metric.  With ``check`` the result is verified to be
    symmetric and metric compatible.
    """
    n = len(coords)
    if not n or len(g) != n or any(len(row) != n for row in g):
        raise ValueError("metric must be an n x n matrix matching the coordinates")
    ring = g[0][0].ring
    names = [c if isinstance(c, str) else str(c) for c in coords]
    for i in range(n):
        for j in range(n):
            if not (g[i][j] - g[j][i]).is_zero():
                raise ValueError("metric is not symmetric")
    det, ginv = det_inverse(g)
    a = SymTensor3(n, ring=ring)
    b = SymTensor3(n, lambda i, j, k: g[i][j].partial(names[k]), ring)
    c = solve_sym_system(a, b, -1)
    G = [[[ring.zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for s in range(n):
        for j in range(n):
            for k in range(n):
                acc = ring.zero
                for i in range(n):
                    if ginv[s][i].num and c[i, j, k].num:
                        acc = acc + ginv[s][i] * c[i, j, k]
                G[s][j][k] = acc
    if check:
        bad = metric_compatibility_residuals(g, G, names)
        if bad:
            raise ArithmeticError(f"Levi-Civita check failed: {bad[0][0]}")
    return G


def metric_compatibility_residuals(g, G, coords) -> list:
    """Components of d_r g_mn - Gamma^s_{rm} g_sn - Gamma^s_{rn} g_ms and of Gamma^s_{mn} - Gamma^s_{nm}."""
    n = len(coords)
    names = [c if isinstance(c, str) else str(c) for c in coords]
    out = []
    for r, m, nn in product(range(n), repeat=3):
        e = g[m][nn].partial(names[r])
        for s in range(n):
            e = e - G[s][r][m] * g[s][nn] - G[s][r][nn] * g[m][s]
        if not e.is_zero():
            out.append((f"nabla_{r + 1} g_{m + 1}{nn + 1}", e))
    for s, m, nn in product(range(n), repeat=3):
        e = G[s][m][nn] - G[s][nn][m]
        if not e.is_zero():
            out.append((f"torsion^{s + 1}_{m + 1}{nn + 1}", e))
    return out


def koszul_christoffel(g, coords):
    """Direct expansion 1/2 g^{sl}(d_m g_ln + d_n g_lm - d_l g_mn) (cross-check)."""
    n = len(coords)
    names = [c if isinstance(c, str) else str(c) for c in coords]
    ring = g[0][0].ring
    _, ginv = det_inverse(g)
    G = [[[ring.zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for s, m, nn in product(range(n), repeat=3):
        acc = ring.zero
        for l in range(n):
            if ginv[s][l].num:
                acc = acc + ginv[s][l] * (g[l][nn].partial(names[m]) + g[l][m].partial(names[nn])
                                          - g[m][nn].partial(names[l]))
        G[s][m][nn] = acc * Fraction(1, 2)
    return G


# -- m-lemma -----------------------------------------------------------------------------


@dataclass
class MLemmaReport:
    n: int
    sign: int
    unknowns: int
    equations: int
    rank: int
    kernel_dim: int
    rank_without_trace: int
    kernel_dim_without_trace: int
    kernel_sample: dict = field(default_factory=dict)

    @property
    def trivial(self) -> bool:
        return self.kernel_dim == 0


def _m_index(n, p, k, r):
    return (p * n + k) * n + r


def m_lemma_rows(n: int, sign, eta=None, trace: bool = True) -> list:
    """Rows of the linear system on m^{pk}_r expanded over theta monomials.

    m^{pk} ^ (eta_pq theta_kl +- eta_pl theta_kq) = 0 for all q, l, together with
    m^{pk} -+ m^{kp} = 0 and (optionally) eta_ij m^{ij} = 0.
    """
    e = _sgn(sign)
    F = cartan_table(n, eta)
    eta = F.eta
    rows = []
    for q, l in product(range(n), repeat=2):
        acc: dict = {}
        for p, k, r in product(range(n), repeat=3):
            form = F.table.zero()
            if eta.up(p, q):
                form = form + F.low(k, l) * eta.up(p, q)
            if eta.up(p, l):
                form = form + F.low(k, q) * (eta.up(p, l) * e)
            if not form.terms:
                continue
            piece = F.theta[r].wedge(form)
            for mono, c in piece.terms.items():
                row = acc.setdefault(mono, {})
                col = _m_index(n, p, k, r)
                row[col] = row.get(col, 0) + c.constant_value()
        rows.extend({k: Fraction(v) for k, v in row.items() if v} for row in acc.values())
    for p, k, r in product(range(n), repeat=3):
        row: dict = {}
        row[_m_index(n, p, k, r)] = row.get(_m_index(n, p, k, r), 0) + 1
        row[_m_index(n, k, p, r)] = row.get(_m_index(n, k, p, r), 0) - e
        rows.append({kk: Fraction(v) for kk, v in row.items() if v})
    if trace:
        for r in range(n):
            rows.append({_m_index(n, i, i, r): Fraction(eta[i]) for i in range(n)})
    return [r for r in rows if r]


def _kernel_basis_vector(ech: Echelon, N: int) -> dict:
    """One nonzero kernel vector (free column set to 1), or {} if the kernel is trivial."""
    free = [c for c in range(N) if c not in ech.pivots]
    if not free:
        return {}
    f = free[0]
    x = {f: Fraction(1)}
    for c in sorted(ech.pivots, reverse=True):
        row = ech.pivots[c]
        acc = Fraction(0)
        for k, v in row.items():
            if k != c and k in x:
                acc -= v * x[k]
        if acc:
            x[c] = acc
    return x


def m_lemma_nullspace(n: int, sign, eta=None) -> MLemmaReport:
    if n < 2:
        raise ValueError("the m-lemma needs n >= 2")
    e = _sgn(sign)
    N = n ** 3
    rows = m_lemma_rows(n, e, eta, trace=True)
    ech = Echelon()
    for r in rows:
        ech.add(r)
    ech2 = Echelon()
    for r in m_lemma_rows(n, e, eta, trace=False):
        ech2.add(r)
    sample = {}
    vec = _kernel_basis_vector(ech, N)
    for col, v in vec.items():
        p, rest = divmod(col, n * n)
        k, r = divmod(rest, n)
        sample[f"m[{p + 1},{k + 1}]_{r + 1}"] = v
    return MLemmaReport(n, e, N, len(rows), ech.rank, N - ech.rank, ech2.rank, N - ech2.rank, sample)


# -- Palatini connection variation ---------------------------------------------------------


@dataclass
class ChainStep:
    label: str
    formula: str
    residual: Form

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


@dataclass
class ConnectionVariationResult:
    n: int
    forms: FrameForms
    leibniz: Form
    lines: list
    potential: Form
    steps: list
    overall_sign: int | None
    chain_residual: Form
    corrected_residual: Form
    final_certificate: MembershipCertificate | None
    leibniz_certificate: MembershipCertificate | None
    residual_trace_certificate: MembershipCertificate | None

    @property
    def chain_ok(self) -> bool:
        return self.chain_residual.is_zero()


def _variation_ideal(F: FrameForms) -> EDS:
    """<omega^{lp} + omega^{pl}, T^l> (algebraic)."""
    n = F.n
    gens, labels = [], []
    for l in range(n):
        for p in range(l, n):
            gens.append(F.omega_up(l, p) + F.omega_up(p, l))
            labels.append(f"omega_sym[{l + 1},{p + 1}]")
    for l in range(n):
        gens.append(F.T[l])
        labels.append(f"torsion[{l + 1}]")
    return EDS(gens, F.table, labels=labels, name="I_PG")


def omega_variation_map(F: FrameForms) -> dict:
    """omega^i_j -> delta omega^i_j, Omega^i_j -> d delta omega^i_j + delta omega ^ omega + omega ^ delta omega."""
    n = F.n
    D = F.extras["domega_up"]
    e = F.eta
    mix = [[D[i][j] * e[j] for j in range(n)] for i in range(n)]
    out = {}
    for i in range(n):
        for j in range(n):
            f = mix[i][j].d()
            for k in range(n):
                f = f + mix[i][k].wedge(F.omega[k][j]) + F.omega[i][k].wedge(mix[k][j])
            out[f"Omega[{i + 1},{j + 1}]"] = f
    return out


def connection_variation_lines(F: FrameForms, trace_term: bool = False) -> list:
    """The six displayed lines of the connection-variation chain, built term by term.

    With ``trace_term`` the term -omega^s_s ^ theta_{ik} that the differential of
    theta_{ik} contains is kept from the third line on.
    """
    n = F.n
    t = F.table
    e = F.eta
    D = F.extras["domega_up"]
    ou, low, T = F.omega_up, F.low, F.T
    R = range(n)
    Z = t.zero()
    sg = (-1) ** (n + 1)
    tr = F.trace_omega()

    def eta_(a, b):
        return e.up(a, b)

    def tail():
        f = Z
        for i, k in product(R, R):
            inner = Z
            for p, q in product(R, R):
                if eta_(p, q):
                    inner = inner - ou(k, q).wedge(D[p][i]) * eta_(p, q) + ou(p, i).wedge(D[k][q]) * eta_(p, q)
            f = f + low(i, k).wedge(inner)
        return f

    def dtheta_ik(i, k):
        f = Z
        for l in R:
            for p in R:
                if eta_(i, p):
                    f = f + ou(l, p).wedge(low(l, k)) * eta_(i, p)
                if eta_(k, p):
                    f = f - ou(l, p).wedge(low(l, i)) * eta_(k, p)
            f = f + T[l].wedge(low(i, k, l))
        if trace_term:
            f = f - tr.wedge(low(i, k))
        return f

    L1 = Z
    for i, k in product(R, R):
        br = D[i][k].d()
        for p, q in product(R, R):
            if eta_(p, q):
                br = br + D[p][i].wedge(ou(k, q)) * eta_(p, q) + ou(p, i).wedge(D[k][q]) * eta_(p, q)
        L1 = L1 + low(i, k).wedge(br)
    L2 = Z
    for i, k in product(R, R):
        L2 = L2 + low(i, k).d().wedge(D[i][k]) * sg
    L2 = L2 + tail()
    L3 = Z
    for i, k in product(R, R):
        L3 = L3 + dtheta_ik(i, k).wedge(D[i][k]) * sg
    L3 = L3 + tail()

    def quad(i, k):
        f = Z
        for l in R:
            for q in R:
                if eta_(i, q):
                    f = f - low(k, l).wedge(ou(l, q)) * eta_(i, q)
            for p in R:
                if eta_(p, k):
                    f = f + low(l, i).wedge(ou(p, l)) * eta_(p, k)
        return f

    L4 = Z
    for i, k in product(R, R):
        L4 = L4 + (dtheta_ik(i, k) * sg + quad(i, k)).wedge(D[i][k])
    L5 = Z
    for i, k in product(R, R):
        f = Z
        for l in R:
            for p in R:
                if eta_(i, p):
                    f = f - low(l, k).wedge(ou(l, p)) * eta_(i, p)
                if eta_(k, p):
                    f = f + low(l, i).wedge(ou(l, p)) * eta_(k, p)
            f = f + T[l].wedge(low(i, k, l)) * sg
        if trace_term:
            f = f - tr.wedge(low(i, k)) * sg
        L5 = L5 + (f + quad(i, k)).wedge(D[i][k])
    L6 = Z
    for i, k in product(R, R):
        f = Z
        for l in R:
            for p in R:
                if eta_(k, p):
                    f = f + low(l, i).wedge(ou(l, p) + ou(p, l)) * eta_(k, p)
            f = f + T[l].wedge(low(i, k, l)) * sg
        if trace_term:
            f = f - tr.wedge(low(i, k)) * sg
        L6 = L6 + f.wedge(D[i][k])
    return [L1, L2, L3, L4, L5, L6]


LINE_FORMULAS = [
    "theta_{ik} ^ [d(delta omega^{ik}) + eta_{pq} delta omega^{pi} ^ omega^{kq} + eta_{pq} omega^{pi} ^ delta omega^{kq}]",
    "(-1)^(n+1) d theta_{ik} ^ delta omega^{ik} + theta_{ik} ^ (-eta_{pq} omega^{kq} ^ delta omega^{pi} + eta_{pq} omega^{pi} ^ delta omega^{kq})",
    "(-1)^(n+1) (eta_{ip} omega^{lp} ^ theta_{lk} - eta_{kp} omega^{lp} ^ theta_{li} + T^l ^ theta_{ikl}) ^ delta omega^{ik} + (same quadratic tail)",
    "[(-1)^(n+1)(...) - eta_{iq} theta_{kl} ^ omega^{lq} + eta_{pk} theta_{li} ^ omega^{pl}] ^ delta omega^{ik}",
    "[-eta_{ip} theta_{lk} ^ omega^{lp} + eta_{kp} theta_{li} ^ omega^{lp} + (-1)^(n+1) T^l ^ theta_{ikl} - eta_{iq} theta_{kl} ^ omega^{lq} + eta_{pk} theta_{li} ^ omega^{pl}] ^ delta omega^{ik}",
    "[eta_{kp} theta_{li} ^ (omega^{lp} + omega^{pl}) + (-1)^(n+1) T^l ^ theta_{ikl}] ^ delta omega^{ik}",
]


def connection_potential(F: FrameForms) -> Form:
    """(-1)^n theta_{ik} ^ delta omega^{ik}: theta_{ik} ^ d(delta omega^{ik}) = (-1)^(n+1) d theta_{ik} ^ delta omega^{ik} + d(this)."""
    n = F.n
    D = F.extras["domega_up"]
    out = F.table.zero()
    for i, k in product(range(n), repeat=2):
        out = out + F.low(i, k).wedge(D[i][k])
    return out * ((-1) ** n)


def connection_variation(n: int, eta=None, forms: FrameForms | None = None) -> ConnectionVariationResult:
    """Vary lambda_PG in omega only and certify each displayed step of the chain.

    ``leibniz`` is delta lambda computed by the derivation rule on the abstract
    table.  Each step compares consecutive lines (the first step modulo
    d(potential)); ``overall_sign`` is the sign s with leibniz = s * first line, if any.
    The chain residual is leibniz - s (last line + d potential); the corrected
    residual does the same with the trace term restored.
    """
    F = forms or cartan_table(n, eta, variations=True)
    if "domega_up" not in F.extras:
        raise ValueError("forms need variation generators")
    lam = palatini_lagrangian(F)
    leibniz = variation(lam, omega_variation_map(F))
    lines = connection_variation_lines(F)
    pot = connection_potential(F)
    dpot = pot.d()
    steps = []
    for j in range(5):
        res = lines[j] - lines[j + 1] - (dpot if j == 0 else F.table.zero())
        name = f"line {j + 1} -> line {j + 2}" + (" (mod d)" if j == 0 else "")
        steps.append(ChainStep(name, LINE_FORMULAS[j + 1], res))
    sign = None
    for s in (1, -1):
        if (leibniz - lines[0] * s).is_zero():
            sign = s
            break
    s = sign if sign is not None else 1
    chain_residual = leibniz - (lines[5] + dpot) * s
    fixed = connection_variation_lines(F, trace_term=True)
    corrected_residual = leibniz - (fixed[5] + dpot) * s
    I = _variation_ideal(F)
    final_cert = member_alg(lines[5], I)
    leib_cert = member_alg(leibniz - dpot * s, I)
    tr_cert = None
    if not chain_residual.is_zero():
        tr_cert = member_alg(chain_residual, EDS([F.trace_omega()], F.table, labels=["trace_omega"]))
    return ConnectionVariationResult(n, F, leibniz, lines, pot, steps, sign, chain_residual,
                                     corrected_residual, final_cert, leib_cert, tr_cert)


def euler_lagrange_connection(F: FrameForms) -> list:
    """E_ik = eta_kp theta_li ^ (omega^{lp} + omega^{pl}) + (-1)^(n+1) T^l ^ theta_{ikl}."""
    n = F.n
    sg = (-1) ** (n + 1)
    out = {}
    for i, k in product(range(n), repeat=2):
        f = F.table.zero()
        for l in range(n):
            for p in range(n):
                if F.eta.up(k, p):
                    f = f + F.low(l, i).wedge(F.omega_up(l, p) + F.omega_up(p, l)) * F.eta.up(k, p)
            f = f + F.T[l].wedge(F.low(i, k, l)) * sg
        out[(i, k)] = f
    return out


def el1_restricted_residuals(n: int, eta=None) -> dict:
    """EL1 with omega replaced by an eta-antisymmetric matrix and T by 0; every entry should vanish.

    The replacement is a map of the abstract table into a table carrying
    theta, generic a[i,j] (i < j) and Omega; it commutes with nothing in
    particular, so only algebraic expressions are pushed through it.
    """
    F = cartan_table(n, eta)
    from .exterior_algebra import Substitution

    t2 = GeneratorTable(Ring(f"antisym{n}"), name=f"antisym-{n}", dim=n)
    th = [t2.add_generator(f"theta[{i + 1}]", 1) for i in range(n)]
    a = {}
    for i in range(n):
        for j in range(i + 1, n):
            a[(i, j)] = t2.gen(t2.add_generator(f"a[{i + 1},{j + 1}]", 1))
    gmap = {}
    e = F.eta
    for i in range(n):
        gmap[f"theta[{i + 1}]"] = t2.gen(th[i])
        gmap[f"T[{i + 1}]"] = t2.zero()
        for j in range(n):
            # omega^{ij} antisymmetric; omega^i_j = omega^{ij} eta_jj
            if i == j:
                up = t2.zero()
            elif i < j:
                up = a[(i, j)]
            else:
                up = -a[(j, i)]
            gmap[f"omega[{i + 1},{j + 1}]"] = up * e[j]
            gmap[f"Omega[{i + 1},{j + 1}]"] = t2.zero()
    sub = Substitution(F.table, None, gmap, t2)
    # trace omega must map to zero too
    assert sub(F.trace_omega()).is_zero()
    return {k: sub(v) for k, v in euler_lagrange_connection(F).items()}


# -- frame variation --------------------------------------------------------------------------


@dataclass
class FrameVariationResult:
    n: int
    forms: FrameForms
    leibniz: Form
    generators: list
    displayed: dict
    comparisons: dict


def frame_generators(F: FrameForms) -> list:
    """generator_m with delta lambda = delta theta^m ^ generator_m (theta_{ij} varied by delta theta^k ^ theta_{kij})."""
    n = F.n
    out = []
    for m in range(n):
        f = F.table.zero()
        for k, l, p in product(range(n), repeat=3):
            ek = F.eta.up(k, p)
            if ek and len({m, k, l}) == 3:
                f = f + F.low(m, k, l).wedge(F.Omega[l][p]) * ek
        out.append(f)
    return out


def theta_variation_map(F: FrameForms) -> dict:
    dth = F.extras["dtheta"]
    return {f"theta[{k + 1}]": dth[k] for k in range(F.n)}


def displayed_frame_generator(F: FrameForms, m: int, reading: str = "renamed") -> Form:
    """theta_{mki} ^ (d omega^{ki} + eta_{lm} omega^{li} ^ omega^{km}).

    The index m appears both free and summed.  ``renamed`` treats the summed
    pair as a fresh dummy q; ``literal`` keeps it equal to the free m.
    d omega^{ki} is taken from the structure equation, Omega - omega ^ omega.
    """
    n = F.n
    e = F.eta
    out = F.table.zero()
    for k, i in product(range(n), repeat=2):
        if len({m, k, i}) < 3:
            continue
        dom = F.omega_up(k, i).d()
        quad = F.table.zero()
        for l in range(n):
            if reading == "renamed":
                for q in range(n):
                    if e.up(l, q):
                        quad = quad + F.omega_up(l, i).wedge(F.omega_up(k, q)) * e.up(l, q)
            elif reading == "literal":
                if e.up(l, m):
                    quad = quad + F.omega_up(l, i).wedge(F.omega_up(k, m)) * e.up(l, m)
            else:
                raise ValueError(f"unknown reading {reading!r}")
        out = out + F.low(m, k, i).wedge(dom + quad)
    return out


def frame_variation(n: int, eta=None) -> FrameVariationResult:
    """Vary lambda_PG in theta, extract generator_m and compare with the displayed form.

    Comparisons (per m) hold the difference forms and, for each, a membership
    certificate in the metricity ideal <omega^{ab} + omega^{ba}>_alg or None.
    """
    F = cartan_table(n, eta, variations=True)
    lam = palatini_lagrangian(F)
    dth = F.extras["dtheta"]
    leibniz = variation(lam, theta_variation_map(F))
    gens = frame_generators(F)
    total = F.table.zero()
    for m in range(n):
        total = total + dth[m].wedge(gens[m])
    if not (leibniz - total).is_zero():
        raise ArithmeticError("frame variation does not factor through the generators")
    met = []
    labels = []
    for a in range(n):
        for b in range(a, n):
            met.append(F.omega_up(a, b) + F.omega_up(b, a))
            labels.append(f"omega_sym[{a + 1},{b + 1}]")
    I = EDS(met, F.table, labels=labels, name="metricity")
    displayed = {r: [displayed_frame_generator(F, m, r) for m in range(n)] for r in ("renamed", "literal")}
    comparisons = {}
    for m in range(n):
        thO = F.table.zero()
        for k, i in product(range(n), repeat=2):
            if len({m, k, i}) == 3:
                thO = thO + F.low(m, k, i).wedge(F.Omega_up(k, i))
        cands = {"generator - theta_{mki}^Omega^{ki}": gens[m] - thO,
                 "generator + theta_{mki}^Omega^{ki}": gens[m] + thO}
        for r, lst in displayed.items():
            cands[f"generator - displayed({r})"] = gens[m] - lst[m]
            cands[f"generator + displayed({r})"] = gens[m] + lst[m]
        comparisons[m] = {name: (f, None if f.is_zero() else member_alg(f, I)) for name, f in cands.items()}
    return FrameVariationResult(n, F, leibniz, gens, displayed, comparisons)

