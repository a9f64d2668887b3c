from fractions import Fraction

import pytest
import sympy

from oracles import christoffel as sympy_christoffel
from oracles import sym
from palatini_eds import reduction as rd
from palatini_eds.frame_geometry import JetFrameContext
from palatini_eds.variational import christoffel_from_metric


def maps(n, eta=None, **kw):
    j = JetFrameContext(n, eta)
    r = rd.ReducedContext(n, eta, **kw)
    return j, r, {c: rd.ProjectionMap(r, j, c) for c in ("literal", "transposed")}


@pytest.mark.parametrize("n", [2, 3])
def test_square_relation_and_sqrt_rule(n):
    _, _, ps = maps(n)
    for p in ps.values():
        assert rd.square_relation_check(p).is_zero()
        assert rd.sqrt_rule_check(p).is_zero()


def test_sqrt_rule_with_positive_half_fails():
    _, _, ps = maps(2, d_sign=Fraction(1, 2))
    assert not rd.sqrt_rule_check(ps["transposed"]).is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_pH_commutes_with_d(n):
    _, _, ps = maps(n)
    for p in ps.values():
        assert all(f.is_zero() for _, f in rd.pH_differential_checks(p))


@pytest.mark.parametrize("n", [2, 3])
def test_identity_verdicts_per_convention(n):
    _, _, ps = maps(n)
    lit, tr = ps["literal"], ps["transposed"]
    assert rd.metricity_pullback_check(tr).ok
    assert not rd.metricity_pullback_check(lit).ok
    assert {k for k in rd.TORSION_READINGS if rd.torsion_pullback_check(tr, k).ok} == {"literal", "antisymmetrized"}
    assert {k for k in rd.TORSION_READINGS if rd.torsion_pullback_check(lit, k).ok} == {"swapped"}
    assert rd.trace_pullback_check(lit, half=True).ok and not rd.trace_pullback_check(lit).ok
    assert not rd.trace_pullback_check(tr).ok and not rd.trace_pullback_check(tr, half=True).ok


@pytest.mark.parametrize("n", [2, 3])
def test_reduced_lagrangian_pullback(n):
    j, _, ps = maps(n)
    assert not rd.lagrangian_pullback_check(ps["transposed"]).ok
    assert rd.lagrangian_pullback_check(ps["transposed"], factor=-1).ok
    sec = rd.polynomial_jet_section(j)
    assert rd.lagrangian_ratio(ps["transposed"], sec)[0] == -1
    assert rd.lagrangian_ratio(ps["literal"], sec)[0] is None


@pytest.mark.parametrize("n,names", [(2, ["constant", "polar-2"]), (3, ["constant", "lorentz-3"])])
def test_uniqueness_reproduces_koszul(n, names):
    r = rd.ReducedContext(n, sqrt_det=False)
    base = r.base_table()
    for name in names:
        u = rd.levi_civita_uniqueness(rd.catalogue_metric(name, base, r.x), r.x)
        assert u.matches and u.rank == u.unknowns == n ** 3


def test_lorentz3_christoffels_match_sympy_and_trace_rule():
    r = rd.ReducedContext(3, sqrt_det=False)
    base = r.base_table()
    g = rd.catalogue_metric("lorentz-3", base, r.x)
    G = christoffel_from_metric(g, r.x)
    xs = sympy.symbols("x_1 x_2 x_3")
    sg = sympy.Matrix(3, 3, lambda a, b: sym(g[a][b]))
    ref = sympy_christoffel(sg, xs)
    for s in range(3):
        for a in range(3):
            for b in range(3):
                assert sympy.simplify(sym(G[s][a][b]) - ref[s][a][b]) == 0
    # contracted symbols: Gamma^s_{s r} = d_r log sqrt|det g| = d_r(det g) / (2 det g)
    det = sg.det()
    for rr in range(3):
        tr = sum(sym(G[s][s][rr]) for s in range(3))
        assert sympy.simplify(tr - sympy.diff(det, xs[rr]) / (2 * det)) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_levi_civita_section_integral_and_perturbation(n):
    r = rd.ReducedContext(n, sqrt_det=False)
    lc = rd.levi_civita_eds(r)
    base = r.base_table()
    g = rd.catalogue_metric(rd.metrics_for_dimension(n)[-1], base, r.x)
    G = christoffel_from_metric(g, r.x)
    assert rd.is_integral_lc(r.section(base, g, G), lc) == []
    G[0][0][n - 1] = G[0][0][n - 1] + base.ring.var(r.x[0])
    assert rd.is_integral_lc(r.section(base, g, G), lc) != []


def test_catalogue_dimension_guards():
    r = rd.ReducedContext(3, sqrt_det=False)
    with pytest.raises(ValueError):
        rd.catalogue_metric("polar-2", r.base_table(), r.x)
    with pytest.raises(KeyError):
        rd.catalogue_metric("nope", r.base_table(), r.x)
    assert rd.metrics_for_dimension(4) == ["constant", "ppwave"]


@pytest.mark.parametrize("m,r", [(1, 1), (2, 1), (2, 2)])
def test_contact_reduction_demo(m, r):
    rep = rd.contact_reduction_demo(m, r)
    assert rep.ok
    assert all(c.verify() for _, c in rep.certificates)


def test_euler_poincare_ordering_diagnostic():
    checks, diag = rd.euler_poincare_check(2, 2)
    assert all(checks.values())
    # the left-invariant ordering g0^-1 dg0 is not flat in this convention
    assert diag["g0^-1 dg0 satisfies d xi = xi ^ xi"] is False
    assert diag["Xi = d eta + [xi, eta] solves the linearized equation"] is False
