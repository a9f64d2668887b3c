"""Exact exterior-calculus engine for the Palatini formulation of gravity as an EDS.

Modules: scalar_ring (rational functions), exterior_algebra (forms),
eds_engine (ideals, membership certificates, sections), frame_geometry
(canonical forms on the frame jet bundle), variational, reduction,
formlang/report/suites/cli (surface language and verification runner).
"""

from .eds_engine import EDS, MembershipCertificate, Section, differential_closure, is_integral, member_alg, member_diff
from .exterior_algebra import Form, GeneratorTable, Substitution, VectorField, format_form
from .formlang import elaborate, parse, to_text
from .frame_geometry import JetFrameContext, MetricSignature, cartan_table, canonical_forms
from .scalar_ring import Ring, ScalarExpr

__all__ = [
    "EDS", "MembershipCertificate", "Section", "differential_closure", "is_integral", "member_alg", "member_diff",
    "Form", "GeneratorTable", "Substitution", "VectorField", "format_form",
    "elaborate", "parse", "to_text",
    "JetFrameContext", "MetricSignature", "cartan_table", "canonical_forms",
    "Ring", "ScalarExpr",
]
__version__ = "0.1.0"
