from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from palatini_eds.scalar_ring import (
    Ring, RingError, det_inverse, determinant, identity_matrix, is_zero_matrix,
    leibniz_determinant, matmul,
)

NAMES = ("x", "y", "z")


def make_ring():
    R = Ring("T")
    for n in NAMES:
        R.declare(n)
    return R


SYM = {n: sympy.Symbol(n) for n in NAMES}

# expression trees: ("var", name) | ("const", q) | (op, a, b)
leaf = st.one_of(
    st.sampled_from(NAMES).map(lambda n: ("var", n)),
    st.fractions(min_value=-5, max_value=5, max_denominator=4).map(lambda q: ("const", q)),
)
trees = st.recursive(
    leaf,
    lambda sub: st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*"]), sub, sub),
        st.tuples(st.just("/"), sub, sub),
        st.tuples(st.just("^"), sub, st.integers(0, 3)),
    ),
    max_leaves=8,
)


def build(tree, R):
    """Return (ours, sympy) for a tree; raise ZeroDivisionError on a zero divisor."""
    kind = tree[0]
    if kind == "var":
        return R.var(tree[1]), SYM[tree[1]]
    if kind == "const":
        return R.const(tree[1]), sympy.Rational(tree[1].numerator, tree[1].denominator)
    if kind == "^":
        a, sa = build(tree[1], R)
        return a ** tree[2], sa ** tree[2]
    a, sa = build(tree[1], R)
    b, sb = build(tree[2], R)
    if kind == "+":
        return a + b, sa + sb
    if kind == "-":
        return a - b, sa - sb
    if kind == "*":
        return a * b, sa * sb
    if b.is_zero():
        raise ZeroDivisionError
    return a / b, sa / sb


def agrees(ours, ref) -> bool:
    return sympy.cancel(sympy.sympify(str(ours)) - ref) == 0


@given(trees)
def test_arithmetic_matches_sympy(tree):
    R = make_ring()
    try:
        ours, ref = build(tree, R)
    except ZeroDivisionError:
        assume(False)
    assert agrees(ours, ref)
    assert ours.is_zero() == (sympy.cancel(ref) == 0)


@given(trees, st.sampled_from(NAMES))
def test_partial_matches_sympy(tree, var):
    R = make_ring()
    try:
        ours, ref = build(tree, R)
    except ZeroDivisionError:
        assume(False)
    assert agrees(ours.partial(var), sympy.diff(ref, SYM[var]))


@given(trees, trees, st.sampled_from(NAMES))
def test_leibniz_rule(t1, t2, var):
    R = make_ring()
    try:
        a, _ = build(t1, R)
        b, _ = build(t2, R)
    except ZeroDivisionError:
        assume(False)
    assert (a * b).partial(var) == a.partial(var) * b + a * b.partial(var)


@given(trees, trees)
def test_substitution_is_a_homomorphism(t1, t2):
    R = make_ring()
    try:
        a, _ = build(t1, R)
        b, _ = build(t2, R)
    except ZeroDivisionError:
        assume(False)
    x, y, z = (R.var(n) for n in NAMES)
    images = {R["x"].index: y + 1, R["y"].index: x * z, R["z"].index: R.const(2)}
    try:
        lhs = (a * b - a).substitute(images)
        rhs = a.substitute(images) * b.substitute(images) - a.substitute(images)
    except (RingError, ZeroDivisionError):
        assume(False)
    assert lhs == rhs


@given(trees, st.tuples(*[st.integers(-3, 3) for _ in NAMES]))
def test_evaluate_matches_sympy(tree, point):
    R = make_ring()
    try:
        ours, ref = build(tree, R)
    except ZeroDivisionError:
        assume(False)
    vals = dict(zip(NAMES, point))
    try:
        got = ours.evaluate(vals)
    except ZeroDivisionError:
        assume(False)
    want = sympy.cancel(ref).subs({SYM[k]: v for k, v in vals.items()})
    assume(want.is_finite)
    assert sympy.Rational(got.numerator, got.denominator) == want


def test_fraction_printing_and_cancellation():
    R = make_ring()
    x, y = R.var("x"), R.var("y")
    e = (x * x - y * y) / (x - y)
    assert e == x + y
    assert str((x + y) ** 2) == "x**2 + 2*x*y + y**2"
    assert R.const(Fraction(1, 2)).constant_value() == Fraction(1, 2)


def test_square_relation_reduction():
    R = make_ring()
    x, y = R.var("x"), R.var("y")
    R.set_square_relation("x", y + 1)
    assert (x ** 3).reduce_relations() == x * (y + 1)
    assert (x ** 4 - (y + 1) ** 2).reduce_relations().is_zero()


def test_undeclared_variable_raises():
    R = make_ring()
    with pytest.raises(RingError):
        R.var("w")
    with pytest.raises(RingError):
        R.declare("x")


small_int = st.integers(-3, 3)


@given(st.lists(st.lists(small_int, min_size=3, max_size=3), min_size=3, max_size=3))
def test_determinant_two_routes_and_sympy(rows):
    R = make_ring()
    x = R.var("x")
    m = [[R.const(v) + (x if i == j else R.zero) for j, v in enumerate(row)] for i, row in enumerate(rows)]
    ref = sympy.Matrix([[v + (SYM["x"] if i == j else 0) for j, v in enumerate(row)]
                        for i, row in enumerate(rows)]).det()
    d = determinant(m)
    assert d == leibniz_determinant(m)
    assert agrees(d, ref)


@given(st.lists(st.lists(small_int, min_size=3, max_size=3), min_size=3, max_size=3))
def test_inverse_is_two_sided(rows):
    R = make_ring()
    x, y = R.var("x"), R.var("y")
    m = [[R.const(v) + (x if i == j else R.zero) + (y if j == i + 1 else R.zero)
          for j, v in enumerate(row)] for i, row in enumerate(rows)]
    det, inv = det_inverse(m)
    I = identity_matrix(R, 3)
    diff = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(matmul(m, inv), I)]
    assert is_zero_matrix(diff)
    diff = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(matmul(inv, m), I)]
    assert is_zero_matrix(diff)


def test_singular_matrix_rejected():
    R = make_ring()
    x = R.var("x")
    with pytest.raises(RingError):
        det_inverse([[x, x], [x, x]])
