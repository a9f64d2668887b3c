"""Compare the two readings of the projection p_H on the Levi-Civita identities.

"literal" substitutes Gamma exactly as displayed, "transposed" swaps the two
lower indices.  Neither reading makes every identity exact.
"""
from palatini_eds import reduction as rd
from palatini_eds.frame_geometry import JetFrameContext

for n in (2, 3):
    j = JetFrameContext(n)
    r = rd.ReducedContext(n)
    sec = rd.polynomial_jet_section(j)
    print(f"n = {n}")
    for conv in ("literal", "transposed"):
        p = rd.ProjectionMap(r, j, conv)
        tors = [k for k in rd.TORSION_READINGS if rd.torsion_pullback_check(p, k).ok]
        print(f"  {conv:10s} metricity={rd.metricity_pullback_check(p).ok!s:5s} torsion readings={tors}"
              f" trace={rd.trace_pullback_check(p).ok} trace(1/2)={rd.trace_pullback_check(p, half=True).ok}"
              f" lagrangian ratio={rd.lagrangian_ratio(p, sec)[0]}")
    print("  d sqrtg = -1/2 sqrtg g dg consistent:", rd.sqrt_rule_check(p).is_zero())
