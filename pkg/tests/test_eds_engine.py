import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from palatini_eds.eds_engine import (
    EDS, MembershipError, Section, differential_closure, is_admissible_variation, is_integral,
    member_alg, member_diff,
)
from palatini_eds.exterior_algebra import GeneratorTable, VectorField
from palatini_eds.scalar_ring import Ring


def free_table(k=5):
    R = Ring()
    for i in range(k):
        R.declare(f"y{i}")
    return GeneratorTable(R, dim=k)


def one_form(t, coeffs):
    out = t.zero()
    for i, c in enumerate(coeffs):
        if c:
            out = out + t.dvar(f"y{i}") * c
    return out


vec = st.lists(st.integers(-2, 2), min_size=5, max_size=5)


@given(st.lists(vec, min_size=1, max_size=3), st.lists(st.tuples(vec, vec), min_size=3, max_size=3))
def test_constructed_members_are_certified(gens, betas):
    t = free_table()
    G = [one_form(t, g) for g in gens]
    assume(all(not g.is_zero() for g in G))
    I = EDS(G, t)
    alpha = t.zero()
    for g, (b1, b2) in zip(G, betas):
        alpha = alpha + one_form(t, b1).wedge(one_form(t, b2)).wedge(g)
    cert = member_alg(alpha, I)
    assert cert is not None and cert.verify()


@given(vec, vec, st.lists(st.tuples(vec, vec), min_size=1, max_size=3))
def test_membership_agrees_with_wedge_criterion(g1, g2, pairs):
    # for independent 1-forms g1, g2: alpha in <g1, g2> iff alpha ^ g1 ^ g2 = 0
    t = free_table()
    a, b = one_form(t, g1), one_form(t, g2)
    assume(not a.wedge(b).is_zero())
    alpha = t.zero()
    for p, q in pairs:
        alpha = alpha + one_form(t, p).wedge(one_form(t, q))
    assume(not alpha.is_zero())
    criterion = alpha.wedge(a).wedge(b).is_zero()
    cert = member_alg(alpha, EDS([a, b], t))
    assert (cert is not None) == criterion
    if cert is not None:
        assert cert.verify()


def contact_table():
    R = Ring("J1")
    R.declare("x")
    R.declare("u", "fiber")
    R.declare("p", "fiber")
    return GeneratorTable(R, "J1", dim=3)


def contact_eds(t):
    theta = t.dvar("u") - t.dvar("x") * t.ring.var("p")
    return EDS([theta], t, labels=["theta"], name="contact")


def test_contact_membership_examples():
    t = contact_table()
    I = contact_eds(t)
    theta = I.generators[0]
    assert member_alg(t.dvar("x"), I) is None
    assert member_alg(t.dvar("p").wedge(t.dvar("x")), I) is None
    c = member_alg(theta.wedge(t.dvar("x")) * t.ring.var("u"), I)
    assert c is not None and c.verify()
    # d theta = dx ^ dp lies in the closure only
    assert member_diff(theta.d(), I).verify()


def test_differential_closure_certificates():
    t = contact_table()
    J = differential_closure(contact_eds(t))
    assert J.closed and len(J) == 2
    assert all(c.verify() for c in J.closure_certificates)
    assert differential_closure(J) is J


def test_certificate_digest_is_stable():
    t = contact_table()
    I = contact_eds(t)
    alpha = I.generators[0].wedge(t.dvar("p"))
    assert member_alg(alpha, I).digest() == member_alg(alpha, I).digest()


def test_inhomogeneous_rejected():
    t = contact_table()
    with pytest.raises(MembershipError):
        EDS([t.dvar("x") + t.dvar("x").wedge(t.dvar("u"))], t)
    with pytest.raises(MembershipError):
        member_alg(t.dvar("x") + t.scalar(1), contact_eds(t))


def base_table():
    R = Ring("base")
    R.declare("x")
    return GeneratorTable(R, "base", dim=1)


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=4), st.integers(-2, 2))
def test_prolonged_sections_are_integral(coeffs, bump):
    t, b = contact_table(), base_table()
    x = b.ring.var("x")
    f = b.ring.zero
    for k, c in enumerate(coeffs):
        f = f + x ** k * c
    I = contact_eds(t)
    good = Section(t, b, {"u": f, "p": f.partial("x")})
    assert is_integral(good, I).ok
    bad = Section(t, b, {"u": f, "p": f.partial("x") + bump})
    assert is_integral(bad, I).ok == (bump == 0)


def test_section_must_assign_fibers():
    t, b = contact_table(), base_table()
    with pytest.raises(MembershipError):
        Section(t, b, {"u": b.ring.var("x")})


def test_admissible_variation_prolonged_field():
    t, b = contact_table(), base_table()
    x = b.ring.var("x")
    s = Section(t, b, {"u": x ** 3, "p": x * x * 3})
    I = contact_eds(t)
    # X = phi d/du + D_x(phi) d/dp with phi = u is the prolongation of u d/du
    R = t.ring
    X = VectorField(t, {"du": R.var("u"), "dp": R.var("p")}, others_zero=True)
    assert is_admissible_variation(s, X, I).ok
    Y = VectorField(t, {"du": R.var("u")}, others_zero=True)
    assert not is_admissible_variation(s, Y, I).ok
    with pytest.raises(MembershipError):
        is_admissible_variation(s, VectorField(t, {"dx": 1}, others_zero=True), I)
