"""Suite reports: a key-value tree written as YAML, with a JSON copy alongside.

Field order is fixed (suite, dim, eta, checks, summary) so reports diff
cleanly; timing fields are the only volatile content and are dropped by
``golden=True``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .exterior_algebra import Form, format_form
from .scalar_ring import ScalarExpr

MAX_TERMS = 12


def render(value) -> str:
    """Canonical text for forms and scalars; long forms are cut after MAX_TERMS terms."""
    if isinstance(value, Form):
        if not value.terms:
            return "0"
        text = format_form(value)
        terms = len(value.terms)
        if terms > MAX_TERMS:
            head = Form(value.table, {m: value.terms[m] for m in sorted(value.terms)[:MAX_TERMS]})
            text = f"{format_form(head)} + ... ({terms - MAX_TERMS} more terms)"
        return text
    if isinstance(value, ScalarExpr):
        return str(value)
    return str(value)


def _plain(v):
    """Make data values YAML/JSON friendly (Fractions become strings)."""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return render(v)


@dataclass
class Check:
    name: str
    anchor: str
    status: str  # "pass" or "fail"
    residual: str = ""
    certificate: str = ""
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def tree(self, golden: bool = False) -> dict:
        out = {"name": self.name, "anchor": self.anchor, "status": self.status}
        if self.residual:
            out["residual"] = self.residual
        if self.certificate:
            out["certificate"] = self.certificate
        if self.data:
            out["data"] = _plain(self.data)
        if not golden:
            out["seconds"] = round(self.seconds, 3)
        return out

    @classmethod
    def from_tree(cls, t: dict) -> "Check":
        return cls(t["name"], t["anchor"], t["status"], t.get("residual", ""), t.get("certificate", ""),
                   float(t.get("seconds", 0.0)), dict(t.get("data", {})))


@dataclass
class SuiteReport:
    suite: str
    dim: int
    eta: str
    checks: list = field(default_factory=list)
    error: str = ""

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def failed(self) -> int:
        return len(self.checks) - self.passed

    @property
    def ok(self) -> bool:
        return not self.error and self.failed == 0

    def tree(self, golden: bool = False) -> dict:
        summary = {"total": len(self.checks), "passed": self.passed, "failed": self.failed,
                   "status": "pass" if self.ok else "fail"}
        if self.error:
            summary["error"] = self.error
        if not golden:
            summary["seconds"] = round(sum(c.seconds for c in self.checks), 3)
        return {"suite": self.suite, "dim": self.dim, "eta": self.eta,
                "checks": [c.tree(golden) for c in self.checks], "summary": summary}

    @classmethod
    def from_tree(cls, t: dict) -> "SuiteReport":
        return cls(t["suite"], int(t["dim"]), t["eta"], [Check.from_tree(c) for c in t["checks"]],
                   t["summary"].get("error", ""))

    def to_yaml(self, golden: bool = False) -> str:
        return yaml.safe_dump(self.tree(golden), sort_keys=False, allow_unicode=True, width=100)

    def to_json(self, golden: bool = False) -> str:
        return json.dumps(self.tree(golden), indent=2, ensure_ascii=False) + "\n"

    def write(self, path, golden: bool = False) -> tuple:
        """Write PATH (YAML) and PATH with suffix .json; returns both paths."""
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(self.to_yaml(golden), encoding="utf-8")
        j = p.with_suffix(".json")
        if j == p:
            j = p.with_name(p.name + ".json")
        j.write_text(self.to_json(golden), encoding="utf-8")
        return p, j


def load_report(path) -> SuiteReport:
    text = Path(path).read_text(encoding="utf-8")
    return SuiteReport.from_tree(yaml.safe_load(text))


def strip_volatile(tree: dict) -> dict:
    """Drop timing fields, the only content allowed to differ between runs."""
    out = dict(tree)
    out["checks"] = [{k: v for k, v in c.items() if k != "seconds"} for c in tree["checks"]]
    out["summary"] = {k: v for k, v in tree["summary"].items() if k != "seconds"}
    return out


def digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]
