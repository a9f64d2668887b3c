from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from palatini_eds import formlang as fl
from palatini_eds.eds_engine import member_diff
from palatini_eds.frame_geometry import cartan_table, einstein_eds


def test_sum_binder_in_ast():
    ast = fl.parse("d(theta[1]) + sum(k, omega[1,k] ^ theta[k])")
    assert isinstance(ast, fl.BinOp) and ast.op == "+"
    assert isinstance(ast.left, fl.D)
    assert isinstance(ast.right, fl.Sum) and ast.right.var == "k"
    assert fl.free_indices(ast) == set()


def test_wedge_is_left_associative_and_binds_tighter():
    ast = fl.parse("theta[1] + theta[2] ^ theta[3] ^ theta[1]")
    assert ast.op == "+"
    w = ast.right
    assert w.op == "^" and w.left.op == "^" and w.right == fl.Sym("theta", (1,))


def test_dangling_wedge_reports_eof():
    with pytest.raises(fl.ParseError) as exc:
        fl.parse("theta[1] ^")
    e = exc.value
    assert "end of input" in e.message
    assert e.expected == {"operand"}
    assert (e.line, e.col) == (1, 11)


def test_error_positions_on_later_lines():
    with pytest.raises(fl.LexError) as exc:
        fl.parse("theta[1]\n  + $")
    assert (exc.value.line, exc.value.col) == (2, 5)
    with pytest.raises(fl.ArityError) as exc:
        fl.parse("theta[1] +\n omega[1]")
    assert (exc.value.line, exc.value.col) == (2, 2)
    with pytest.raises(fl.ParseError) as exc:
        fl.parse("sum(k theta[k])")
    assert exc.value.expected == {","}


@pytest.mark.parametrize("text", fl.CORPUS)
def test_corpus_round_trip(text):
    ast = fl.parse(text)
    printed = fl.to_text(ast)
    assert fl.parse(printed) == ast
    assert fl.to_text(fl.parse(printed)) == printed


LETTERS = st.sampled_from("ijkpq")
IDX = st.one_of(st.integers(1, 3), LETTERS)


def _sym(name, arity):
    return st.tuples(*[IDX] * arity).map(lambda t: fl.Sym(name, t))


leaves = st.one_of(
    st.fractions(min_value=0, max_value=9, max_denominator=5).map(fl.Num),
    _sym("theta", 1), _sym("omega", 2), _sym("Omega", 2), _sym("T", 1),
    st.integers(0, 3).flatmap(lambda k: _sym("thetaL", k) if k else _sym("thetaL", 1)),
)
frames = _sym("X", 1)


def _extend(child):
    return st.one_of(
        child.map(fl.Neg),
        child.map(fl.D),
        st.tuples(st.sampled_from("+-^*"), child, child).map(lambda t: fl.BinOp(*t)),
        st.tuples(frames, child).map(lambda t: fl.Interior(*t)),
        st.tuples(frames, child).map(lambda t: fl.Lie(*t)),
        st.tuples(LETTERS, child).map(lambda t: fl.Sum(*t)),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@given(asts)
def test_print_parse_round_trip(ast):
    assert fl.parse(fl.to_text(ast)) == ast


@given(asts)
def test_parse_print_parse_idempotent(ast):
    once = fl.parse(fl.to_text(ast))
    assert fl.parse(fl.to_text(once)) == once


def test_eps_values():
    one = fl.elaborate(fl.parse("eps[1,2]"), "abstract-cartan", 2)
    assert one == one.table.scalar(1)
    ctx = fl.make_context("abstract-cartan", 3)
    t = ctx.table()
    assert fl.elaborate(fl.parse("eps[2,1,3]"), ctx) == t.scalar(-1)
    assert fl.elaborate(fl.parse("eps[1,1,3]"), ctx).is_zero()


def test_einstein_generator_text_is_a_differential_member():
    F = cartan_table(3)
    E = einstein_eds(F).equations
    text = "sum(p, sum(q, thetaL[1,p,q] ^ Omega_up[p,q]))"
    form = fl.elaborate(fl.parse(text), fl.AbstractCartanContext(3, forms=F))
    cert = member_diff(form, E)
    assert cert is not None and cert.verify()


@pytest.mark.parametrize("context", ["abstract-cartan", "jet-coordinates"])
def test_first_structure_equation_elaborates_to_torsion(context):
    ctx = fl.make_context(context, 2)
    lhs = fl.elaborate(fl.parse("d(theta[1]) + sum(k, omega[1,k] ^ theta[k])"), ctx)
    assert lhs == fl.elaborate(fl.parse("T[1]"), ctx)


def test_interior_with_dual_frame():
    ctx = fl.make_context("abstract-cartan", 2)
    got = fl.elaborate(fl.parse("i_(X[1], theta[1] ^ theta[2])"), ctx)
    assert got == fl.elaborate(fl.parse("theta[2]"), ctx)


def test_sum_expands_over_one_to_n():
    ctx = fl.make_context("reduced", 3)
    a = fl.elaborate(fl.parse("sum(s, Gamma[s,s,1])"), ctx)
    b = fl.elaborate(fl.parse("Gamma[1,1,1] + Gamma[2,2,1] + Gamma[3,3,1]"), ctx)
    assert a == b


def test_free_index_values():
    ast = fl.parse("theta[i] ^ theta[j]")
    ctx = fl.make_context("abstract-cartan", 3)
    assert fl.elaborate(ast, ctx, free={"i": 1, "j": 2}) == -fl.elaborate(ast, ctx, free={"i": 2, "j": 1})
    with pytest.raises(fl.ElaborationError):
        fl.elaborate(ast, ctx, free={"i": 1})


def test_fraction_literals():
    ast = fl.parse("3/4")
    assert ast == fl.Num(Fraction(3, 4))
    with pytest.raises(fl.ParseError):
        fl.parse("1/0")


@pytest.mark.parametrize("text,context,n", [
    ("domega[1,2]", "reduced", 2),
    ("dtheta[1]", "jet-coordinates", 2),
    ("Gamma[1,1,1]", "abstract-cartan", 2),
    ("theta[3]", "abstract-cartan", 2),
    ("eps[1,2]", "abstract-cartan", 3),
])
def test_elaboration_errors(text, context, n):
    with pytest.raises(fl.ElaborationError) as exc:
        fl.elaborate(fl.parse(text), context, n)
    assert exc.value.line == 1 and exc.value.col == 1


def test_degree_errors():
    with pytest.raises(fl.DegreeError):
        fl.degree(fl.parse("theta[1] + theta[1] ^ theta[2]"), 3)
    with pytest.raises(fl.DegreeError):
        fl.degree(fl.parse("theta[1] * theta[2]"), 3)
    with pytest.raises(fl.DegreeError):
        fl.degree(fl.parse("i_(X[1], 1)"), 3)
    assert fl.degree(fl.parse("thetaL[1]"), 4) == 3


def test_unknown_context():
    with pytest.raises(ValueError):
        fl.make_context("nope", 2)
