import pytest
import sympy

from oracles import coords, ricci, sym
from palatini_eds.eds_engine import is_integral
from palatini_eds.exterior_algebra import check_d_squared
from palatini_eds.frame_geometry import (
    JetFrameContext, MetricSignature, boost_matrix, canonical_forms, cartan_table, catalogue_section,
    einstein_eds, free_table, metric_section, ppwave_coframe, realization_map, section_forms,
)
from palatini_eds.reduction import polynomial_jet_section


def test_signature_literals():
    s = MetricSignature.parse("-+++", 4)
    assert s.entries == (-1, 1, 1, 1) and s.text == "-+++" and s.det == -1
    assert s == MetricSignature.lorentzian(4)
    for bad in ("", "-+x", "+-"):
        with pytest.raises(ValueError):
            MetricSignature.parse(bad, 3)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cartan_table_is_a_differential_algebra(n):
    assert check_d_squared(cartan_table(n).table) == []


@pytest.mark.parametrize("n", [2, 3])
def test_corrupted_bianchi_breaks_d_squared(n):
    assert check_d_squared(cartan_table(n, corrupt_bianchi=True).table) != []


@pytest.mark.parametrize("n", [2, 3])
def test_elimination_commutes_with_d(n):
    A = cartan_table(n)
    F = free_table(n)
    phi = realization_map(A, F)
    for g in A.table.generators:
        f = A.table.gen(g.index)
        assert phi(f.d()) == phi(f).d(), g.name


def test_canonical_forms_satisfy_structure_equations_n2():
    ctx = JetFrameContext(2)
    F = canonical_forms(ctx)
    n = 2
    for i in range(n):
        lhs = F.theta[i].d()
        for k in range(n):
            lhs = lhs + F.omega[i][k].wedge(F.theta[k])
        assert lhs == F.T[i]
        for j in range(n):
            lhs = F.omega[i][j].d()
            for k in range(n):
                lhs = lhs + F.omega[i][k].wedge(F.omega[k][j])
            assert lhs == F.Omega[i][j]


def _compare_routes(ctx, sec):
    F = canonical_forms(ctx)
    S = section_forms(ctx, sec)
    n = ctx.n
    for i in range(n):
        assert sec.pullback(F.theta[i]) == S.theta[i]
        assert sec.pullback(F.T[i]) == S.T[i]
        for j in range(n):
            assert sec.pullback(F.omega[i][j]) == S.omega[i][j]
            assert sec.pullback(F.Omega[i][j]) == S.Omega[i][j]


def test_section_forms_match_pullback_of_canonical_forms_generic_n2():
    ctx = JetFrameContext(2)
    _compare_routes(ctx, polynomial_jet_section(ctx))


def test_section_forms_match_pullback_of_canonical_forms_poly_metric_n3():
    ctx = JetFrameContext(3, "+++")
    _compare_routes(ctx, catalogue_section("poly-metric", ctx))


U, V, X, Y = sympy.symbols("x_1 x_2 x_3 x_4")


def ppwave_metric(H):
    return sympy.Matrix([[H, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def test_ppwave_metric_and_ricci_oracle():
    ctx = JetFrameContext(4, "-+++")
    sec = catalogue_section("ppwave", ctx)
    H = X ** 2 - Y ** 2
    ours = sympy.Matrix(4, 4, lambda a, b: sym(sec.metric[a][b]))
    assert sympy.simplify(ours - ppwave_metric(H)) == sympy.zeros(4, 4)
    assert ricci(ppwave_metric(H), (U, V, X, Y)) == sympy.zeros(4, 4)
    # the oracle is not vacuous: a non-harmonic profile has R_uu = -1
    assert ricci(ppwave_metric(X ** 2), (U, V, X, Y))[0, 0] == -1


def _einstein_residuals(ctx, sec):
    E = einstein_eds(section_forms(ctx, sec)).equations
    return [lab for g, lab in zip(E.generators, E.labels) if not g.is_zero()]


def test_vacuum_sections_are_integral_and_control_fails():
    ctx = JetFrameContext(4, "-+++")
    for name in ("flat", "ppwave", "ppwave-boosted"):
        assert _einstein_residuals(ctx, catalogue_section(name, ctx)) == [], name
    base = ctx.base_table()
    x = base.ring.var(ctx.x[2])
    bad = metric_section(ctx, base, ppwave_coframe(base, ctx.x, H=x * x), name="non-harmonic")
    failing = _einstein_residuals(ctx, bad)
    assert failing and all(lab.startswith("einstein") for lab in failing)


@pytest.mark.slow
def test_ppwave_integral_via_universal_pullback():
    # second route: pull the universal Einstein EDS on the jet space back along the section
    ctx = JetFrameContext(4, "-+++")
    E = einstein_eds(canonical_forms(ctx)).equations
    assert is_integral(catalogue_section("ppwave", ctx), E).ok


def test_boost_preserves_eta():
    L = sympy.Matrix(boost_matrix(4))
    eta = sympy.diag(-1, 1, 1, 1)
    assert L.T * eta * L == eta


def test_catalogue_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        catalogue_section("ppwave", JetFrameContext(3))
    with pytest.raises(KeyError):
        catalogue_section("nope", JetFrameContext(2))


def test_sympy_coordinate_helper():
    assert coords(2) == sympy.symbols("x_1 x_2")
