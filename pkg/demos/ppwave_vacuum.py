"""pp-wave sections of the Einstein EDS in n = 4.

2 du dv + H du^2 + dx^2 + dy^2 is vacuum iff H is harmonic in (x, y).  The
harmonic profile and a boosted copy are integral; H = x^2 is not, and only the
Einstein generators notice.
"""
from palatini_eds.frame_geometry import (
    JetFrameContext, catalogue_section, einstein_eds, metric_section, ppwave_coframe, section_forms,
)

ctx = JetFrameContext(4, "-+++")


def failing(sec):
    E = einstein_eds(section_forms(ctx, sec)).equations
    return [lab for g, lab in zip(E.generators, E.labels) if not g.is_zero()]


for name in ("flat", "ppwave", "ppwave-boosted"):
    print(f"{name:15s} failing generators: {failing(catalogue_section(name, ctx)) or 'none'}")

base = ctx.base_table()
x = base.ring.var(ctx.x[2])
sec = metric_section(ctx, base, ppwave_coframe(base, ctx.x, H=x * x), name="H = x^2")
print(f"{'H = x^2':15s} failing generators: {failing(sec)}")
