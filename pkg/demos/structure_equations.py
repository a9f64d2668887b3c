"""Structure equations and Bianchi identities on the abstract Cartan table.

Run: python3 demos/structure_equations.py
"""
from palatini_eds.exterior_algebra import check_d_squared, format_form
from palatini_eds.formlang import AbstractCartanContext, elaborate, parse
from palatini_eds.frame_geometry import cartan_table

n = 3
F = cartan_table(n)
print(f"Cartan table n={n}: {len(F.table.generators)} generators")
print("d^2 = 0 on every generator:", check_d_squared(F.table) == [])

ctx = AbstractCartanContext(n, forms=F)
for text in ("d(theta[1]) + sum(k, omega[1,k] ^ theta[k])",
             "d(T[1]) - sum(l, Omega[1,l] ^ theta[l] - omega[1,l] ^ T[l])"):
    print(f"\n{text}\n  = {format_form(elaborate(parse(text), ctx))}")

# the same table with the curvature rule's sign flipped is no longer a differential algebra
bad = check_d_squared(cartan_table(n, corrupt_bianchi=True).table)
print(f"\ncorrupted curvature rule: d^2 fails on {len(bad)} generators, e.g. {bad[0][0]}")
