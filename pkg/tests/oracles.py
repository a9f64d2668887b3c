"""Independent sympy reference computations used by the tests."""

import re

import sympy


def sym(expr):
    """Convert a ScalarExpr (or its text) to sympy, mapping x[1] -> x_1, e[1,2] -> e_1_2."""
    text = re.sub(r"(\w+)\[([\d,]+)\]", lambda m: m.group(1) + "_" + m.group(2).replace(",", "_"), str(expr))
    return sympy.sympify(text)


def coords(n, name="x"):
    return sympy.symbols(" ".join(f"{name}_{i}" for i in range(1, n + 1)))


def christoffel(g, xs):
    """Gamma^s_{a b} = 1/2 g^{s l} (d_a g_{l b} + d_b g_{l a} - d_l g_{a b}) as G[s][a][b]."""
    n = len(xs)
    g = sympy.Matrix(g)
    gi = g.inv()
    return [[[sympy.simplify(sum(gi[s, l] * (sympy.diff(g[l, b], xs[a]) + sympy.diff(g[l, a], xs[b])
                                             - sympy.diff(g[a, b], xs[l])) for l in range(n)) / 2)
              for b in range(n)] for a in range(n)] for s in range(n)]


def ricci(g, xs):
    """R_{a b} = d_s G^s_{ab} - d_b G^s_{as} + G^s_{sl} G^l_{ab} - G^s_{bl} G^l_{as}."""
    n = len(xs)
    G = christoffel(g, xs)
    out = sympy.zeros(n, n)
    for a in range(n):
        for b in range(n):
            v = 0
            for s in range(n):
                v += sympy.diff(G[s][a][b], xs[s]) - sympy.diff(G[s][a][s], xs[b])
                for l in range(n):
                    v += G[s][s][l] * G[l][a][b] - G[s][b][l] * G[l][a][s]
            out[a, b] = sympy.simplify(v)
    return out


def euler_lagrange(L, u, x_syms, derivs):
    """dL/du - sum_k D_k(dL/du_k) along u = u(x), returning an expression in x."""
    subs = {derivs[k]: sympy.diff(u, x_syms[k]) for k in range(len(x_syms))}
    U = sympy.Symbol("U")
    Lu = sympy.diff(L.subs(sympy.Symbol("u"), U), U).subs(U, sympy.Symbol("u"))
    out = Lu.subs(subs).subs(sympy.Symbol("u"), u)
    for k, xk in enumerate(x_syms):
        out -= sympy.diff(sympy.diff(L, derivs[k]).subs(subs).subs(sympy.Symbol("u"), u), xk)
    return sympy.simplify(out)
