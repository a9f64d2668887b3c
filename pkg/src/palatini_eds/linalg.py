"""Sparse exact Gaussian elimination over a field.

Entries may be Fractions or ScalarExprs (anything with +, -, *, / and a
truthiness that means "nonzero").  Rows are dicts ``{column: entry}``; the
right-hand side, when present, lives under the key ``RHS``.
"""

from __future__ import annotations

from fractions import Fraction

RHS = 1 << 62


class Echelon:
    """Incremental row echelon form with normalized (unit) pivots."""

    def __init__(self):
        self.pivots: dict[int, dict] = {}
        self.inconsistent = False

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict) -> dict:
        row = {k: v for k, v in row.items() if v}
        pivots = self.pivots
        while row:
            c = min(row)
            if c == RHS or c not in pivots:
                return row
            _axpy(row, -row[c], pivots[c])
        return row

    def add(self, row: dict) -> bool:
        """Insert a row; return True if it increased the rank."""
        row = self.reduce(row)
        if not row:
            return False
        c = min(row)
        if c == RHS:
            self.inconsistent = True
            return False
        lead = row[c]
        inv = lead.inverse() if hasattr(lead, "inverse") else Fraction(1) / lead
        row = {k: (v * inv if k != c else _one_like(v)) for k, v in row.items()}
        self.pivots[c] = row
        return True

    def solve(self, ncols: int | None = None) -> dict | None:
        """Back-substitute; free columns are set to zero."""
        if self.inconsistent:
            return None
        x: dict = {}
        for c in sorted(self.pivots, reverse=True):
            row = self.pivots[c]
            acc = row.get(RHS)
            for k, v in row.items():
                if k == c or k == RHS:
                    continue
                xk = x.get(k)
                if xk is not None and xk:
                    t = v * xk
                    acc = -t if acc is None else acc - t
            if acc is not None and acc:
                x[c] = acc
        return x


def _one_like(v):
    return v / v


def _axpy(row: dict, a, piv: dict) -> None:
    """row += a * piv in place, dropping zeros."""
    for k, v in piv.items():
        t = a * v
        cur = row.get(k)
        s = t if cur is None else cur + t
        if s:
            row[k] = s
        else:
            row.pop(k, None)


def rank(rows) -> int:
    e = Echelon()
    for r in rows:
        e.add(dict(r))
    return e.rank


def solve(rows) -> dict | None:
    """Solve a linear system given as rows with optional RHS entries.

    Returns a particular solution (free variables zero) or None if the system
    is inconsistent.
    """
    e = Echelon()
    for r in rows:
        e.add(dict(r))
    return e.solve()
