from fractions import Fraction

import sympy
from hypothesis import given
from hypothesis import strategies as st

from palatini_eds.linalg import RHS, rank, solve

matrices = st.integers(1, 5).flatmap(
    lambda cols: st.lists(st.lists(st.integers(-2, 2), min_size=cols, max_size=cols), min_size=1, max_size=6)
)


def rows_of(m):
    return [{j: Fraction(v) for j, v in enumerate(r) if v} for r in m]


@given(matrices)
def test_rank_matches_sympy(m):
    assert rank(rows_of(m)) == sympy.Matrix(m).rank()


@given(matrices, st.data())
def test_solve_consistent_systems(m, data):
    # build b = A x0 so the system is consistent, then check A x = b
    x0 = data.draw(st.lists(st.integers(-3, 3), min_size=len(m[0]), max_size=len(m[0])))
    b = [sum(a * x for a, x in zip(r, x0)) for r in m]
    rows = rows_of(m)
    for r, bi in zip(rows, b):
        if bi:
            r[RHS] = Fraction(bi)
    x = solve(rows)
    assert x is not None
    for r, bi in zip(m, b):
        assert sum(a * x.get(j, 0) for j, a in enumerate(r)) == bi


def test_inconsistent_system():
    rows = [{0: Fraction(1), 1: Fraction(1)}, {0: Fraction(2), 1: Fraction(2), RHS: Fraction(1)}]
    assert solve(rows) is None
