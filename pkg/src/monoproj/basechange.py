"""Linearization over a field: K[M], global sections of F_K and the map phi_K.

Sections of F_K are pairs (u, v) of finite linear combinations of chart
elements whose images agree on the overlap.  Each overlap coordinate gives
one linear equation.  Explicit vertices are always unknowns, since several
may share a coordinate and cancel.  A tail element outside the window where
both charts have elements is the only chart element at its coordinate, so
its coefficient is forced to vanish and it is left out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import p1sheaf
from .p1sheaf import GlobalSection, P1Sheaf
from .tmod import Elem, FunctionalGraph


class FieldError(ValueError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldCtx:
    """The rationals (``p is None``) or the prime field F_p."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None and not _is_prime(self.p):
            raise FieldError(f"{self.p} is not prime")

    @classmethod
    def parse(cls, spec: str) -> "FieldCtx":
        spec = spec.strip().lower()
        if spec in ("q", "qq", "rationals"):
            return cls(None)
        if spec.startswith("f") and spec[1:].isdigit():
            return cls(int(spec[1:]))
        raise FieldError(f"unknown field {spec!r}; use q or f<p>")

    @property
    def name(self) -> str:
        return "q" if self.p is None else f"f{self.p}"

    def __call__(self, x: int):
        return Fraction(x) if self.p is None else x % self.p

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / x if self.p is None else pow(x, self.p - 2, self.p)

    def norm(self, x):
        return x if self.p is None else x % self.p

    def format(self, x) -> str:
        return str(x)


QQ = FieldCtx()


def rref(K: FieldCtx, rows: Sequence[Sequence], ncols: int) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [[K.norm(K(0) + x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = K.inv(m[r][c])
        m[r] = [K.norm(x * inv) for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [K.norm(x - f * y) for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(K: FieldCtx, rows: Sequence[Sequence], ncols: int) -> int:
    return len(rref(K, rows, ncols)[1])


def nullspace(K: FieldCtx, rows: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of {x : A x = 0}, one vector per free column, free entry 1."""
    red, pivots = rref(K, rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [K(0)] * ncols
        v[f] = K(1)
        for row, pc in zip(red, pivots):
            v[pc] = K.norm(-row[f])
        basis.append(v)
    return basis


def linear_dim(M: FunctionalGraph) -> int:
    """dim K[M]: the nonzero elements form a basis."""
    if not M.is_finite():
        raise FieldError("K[M] is infinite-dimensional for a module with a free tail")
    return len(M)


@dataclass(frozen=True)
class Unknown:
    side: str
    elem: Elem


@dataclass(frozen=True)
class LinearSystemReport:
    field: str
    dim: int
    unknowns: tuple[Unknown, ...]
    basis: tuple[tuple, ...]
    sections: tuple[GlobalSection, ...] = ()
    rank: int | None = None
    kernel: tuple[tuple, ...] = ()
    surjective: bool | None = None

    @property
    def kernel_dim(self) -> int:
        return len(self.kernel)


def _unknowns(F: P1Sheaf) -> list[Unknown]:
    out = []
    for side, G in (("plus", F.plus), ("minus", F.minus)):
        for v in G.vertices:
            out.append(Unknown(side, (v, 0)))
    for g in F.glue:
        if g.kind != "line":
            continue
        lo, hi = p1sheaf.line_window(F, g)
        for h in range(1, hi + 1):
            out.append(Unknown("plus", (g.plus, h)))
        for h in range(1, g.shift - lo + 1):
            out.append(Unknown("minus", (g.minus, h)))
    return out


def _usable(F: P1Sheaf, u: Unknown) -> bool:
    """Whether the unknown can be nonzero.

    Explicit vertices always can: several of them may share a coordinate
    and cancel there.  A tail element is alone at its coordinate within its
    chart, so it needs a partner from the other chart inside the window.
    """
    if u.elem[1] == 0:
        return True
    c = F.plus_coord(u.elem) if u.side == "plus" else F.minus_coord(u.elem)
    g = F._by_plus[c[0]]
    if g.kind == "cycle":
        return True
    lo, hi = p1sheaf.line_window(F, g)
    return lo <= c[1] <= hi


def _system(F: P1Sheaf) -> tuple[list[Unknown], list[list[int]]]:
    unknowns = [u for u in _unknowns(F) if _usable(F, u)]
    eqs: dict[tuple, dict[int, int]] = {}
    for idx, u in enumerate(unknowns):
        if u.side == "plus":
            c, sign = F.plus_coord(u.elem), 1
        else:
            c, sign = F.minus_coord(u.elem), -1
        if c is not None:
            eqs.setdefault(c, {})[idx] = sign
    rows = []
    for c in sorted(eqs):
        row = [0] * len(unknowns)
        for idx, sign in eqs[c].items():
            row[idx] = sign
        rows.append(row)
    return unknowns, rows


def gamma_K(F: P1Sheaf, K: FieldCtx = QQ) -> LinearSystemReport:
    unknowns, rows = _system(F)
    basis = nullspace(K, rows, len(unknowns))
    return LinearSystemReport(K.name, len(basis), tuple(unknowns), tuple(tuple(v) for v in basis))


def phi_K(F: P1Sheaf, K: FieldCtx = QQ) -> LinearSystemReport:
    """The map K[Gamma(X, F)] -> Gamma(X_K, F_K), each section to itself."""
    report = gamma_K(F, K)
    sections = p1sheaf.global_sections(F)
    index = {(u.side, u.elem): i for i, u in enumerate(report.unknowns)}
    cols = []
    for s in sections:
        col = [K(0)] * len(report.unknowns)
        if s.plus is not None:
            col[index[("plus", s.plus)]] = K(1)
        if s.minus is not None:
            col[index[("minus", s.minus)]] = K(1)
        cols.append(col)
    n = len(sections)
    # the matrix has the sections as columns; its rows are the unknowns
    matrix = [[cols[j][i] for j in range(n)] for i in range(len(report.unknowns))]
    r = rank(K, matrix, n)
    kernel = nullspace(K, matrix, n)
    return LinearSystemReport(
        report.field, report.dim, report.unknowns, report.basis,
        tuple(sections), r, tuple(tuple(v) for v in kernel), r == report.dim,
    )


def describe_vector(F: P1Sheaf, report: LinearSystemReport, v: Sequence) -> list[tuple[str, str]]:
    """Nonzero entries of a kernel vector as (section name, coefficient)."""
    return [
        (F.section_name(s), str(c)) for s, c in zip(report.sections, v) if c != 0
    ]


def describe_basis_vector(F: P1Sheaf, report: LinearSystemReport, v: Sequence) -> list[tuple[str, str, str]]:
    """Nonzero entries of a Gamma_K basis vector as (chart, element, coefficient)."""
    out = []
    for u, c in zip(report.unknowns, v):
        if c != 0:
            G = F.plus if u.side == "plus" else F.minus
            out.append((u.side, G.name(u.elem), str(c)))
    return out


def report_json(F: P1Sheaf, report: LinearSystemReport) -> dict:
    out = {"field": report.field, "dim": report.dim,
           "basis": [describe_basis_vector(F, report, v) for v in report.basis]}
    if report.rank is not None:
        out.update({
            "sections": len(report.sections),
            "rank": report.rank,
            "kernel_dim": report.kernel_dim,
            "kernel": [describe_vector(F, report, v) for v in report.kernel],
            "surjective": report.surjective,
        })
    return out
