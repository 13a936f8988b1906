"""Graded presentations over <x_0, ..., x_r>, charts and the sheaf functor on P^1.

For r = 1 a graded presentation sheafifies to a :class:`P1Sheaf`.  The
gluing is read off by following each generator into both charts: a
generator ``g`` of degree ``d`` becomes ``g/x0^d`` on U1 and ``g/x1^d`` on
U2, and on the overlap ``g/x1^d = t^-d * g/x0^d`` with ``t = x1/x0``.
Nothing about the sign of a twist is assumed anywhere else.

For r >= 2 only degree-window truncations are computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from . import p1sheaf, tmod
from .monoid import MonoidCtx, Monomial, count_monomials, monomials
from .p1sheaf import GlobalSection, Glue, P1Sheaf, SheafError, SheafMap


class GradedError(ValueError):
    pass


Term = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class GRelation:
    """``x^lhs[1] * g[lhs[0]] = x^rhs[1] * g[rhs[0]]``, or ``= 0`` if rhs is None."""

    lhs: Term
    rhs: Term | None = None


@dataclass(frozen=True)
class GradedPresentation:
    nvars: int
    gens: tuple[str, ...]
    degrees: tuple[int, ...]
    rels: tuple[GRelation, ...] = ()
    var_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        object.__setattr__(self, "degrees", tuple(self.degrees))
        object.__setattr__(self, "rels", tuple(self.rels))
        if not self.var_names:
            object.__setattr__(self, "var_names", tuple(f"x{i}" for i in range(self.nvars)))
        if self.nvars < 2:
            raise GradedError("need at least two variables")
        if len(self.var_names) != self.nvars:
            raise GradedError("one name per variable")
        if len(self.gens) != len(self.degrees):
            raise GradedError("one degree per generator")
        if len(set(self.gens)) != len(self.gens):
            raise GradedError(f"duplicate generator names: {self.gens}")
        for rel in self.rels:
            degs = [self.term_degree(t) for t in (rel.lhs, rel.rhs) if t is not None]
            if len(set(degs)) > 1:
                raise GradedError(f"relation {self.format_rel(rel)} is not homogeneous")

    def term_degree(self, term: Term) -> int:
        i, exps = term
        if not 0 <= i < len(self.gens):
            raise GradedError(f"generator index {i} out of range")
        if len(exps) != self.nvars:
            raise GradedError(f"monomial {exps} has the wrong number of variables")
        if any(e < 0 for e in exps):
            raise GradedError(f"negative exponent in {exps}")
        return sum(exps) + self.degrees[i]

    def rel_degree(self, rel: GRelation) -> int:
        return self.term_degree(rel.lhs)

    def format_term(self, term: Term) -> str:
        i, exps = term
        mono = MonoidCtx(self.var_names).format(Monomial(exps))
        return self.gens[i] if mono == "1" else f"{mono}*{self.gens[i]}"

    def format_rel(self, rel: GRelation) -> str:
        rhs = "0" if rel.rhs is None else self.format_term(rel.rhs)
        return f"{self.format_term(rel.lhs)} = {rhs}"


def free_module(r: int = 1, n: int = 0) -> GradedPresentation:
    """A(n): one generator of degree -n."""
    return GradedPresentation(r + 1, ("e",), (-n,))


def shift(M: GradedPresentation, n: int) -> GradedPresentation:
    """M(n), with M(n)_i = M_{i+n}."""
    return GradedPresentation(M.nvars, M.gens, tuple(d - n for d in M.degrees), M.rels, M.var_names)


def degree_zero_localization(M: GradedPresentation, i: int) -> tmod.TPresentation:
    """The chart module M_(x_i) over t = x_{1-i}/x_i, generated by g/x_i^deg(g)."""
    if M.nvars != 2:
        raise GradedError("chart presentations are only built over <x0, x1>")
    if i not in (0, 1):
        raise GradedError(f"chart index {i} out of range")
    other = 1 - i
    rels = []
    for rel in M.rels:
        lhs = (rel.lhs[0], rel.lhs[1][other])
        rhs = None if rel.rhs is None else (rel.rhs[0], rel.rhs[1][other])
        rels.append(tmod.Relation(lhs, rhs))
    return tmod.TPresentation(M.gens, tuple(rels))


def gamma_On(A: MonoidCtx | int, n: int) -> list[Monomial]:
    """Degree-n monomials of <x_0, ..., x_r>: the global sections of O(n)."""
    nvars = A if isinstance(A, int) else A.rank
    return [Monomial(m) for m in monomials(nvars, n)]


def sheafify(M: GradedPresentation) -> P1Sheaf:
    if M.nvars != 2:
        raise GradedError("sheafify is implemented on P^1 only")
    cp = tmod.compile_presentation(degree_zero_localization(M, 0))
    cm = tmod.compile_presentation(degree_zero_localization(M, 1))
    po, mo = tmod.localize(cp.graph), tmod.localize(cm.graph)
    records: dict[int, Glue] = {}
    for i, d in enumerate(M.degrees):
        hp = po.position(cp.graph, cp.generators[i])
        hm = mo.position(cm.graph, cm.generators[i])
        if (hp is None) != (hm is None):
            raise SheafError(f"charts fail to glue at generator {M.gens[i]}")
        if hp is None:
            continue
        op, om = po.orbits[hp[0]], mo.orbits[hm[0]]
        if op.kind != om.kind or op.k != om.k:
            raise SheafError(f"charts fail to glue at generator {M.gens[i]}")
        # the overlap position of g/x1^d is p - d; the minus anchor sits hm[1] further along
        n = hp[1] - d + hm[1]
        g = Glue(op.kind, op.anchor, om.anchor, n % op.k if op.k else n, op.k)
        old = records.get(op.anchor)
        if old is not None and old != g:
            raise SheafError(f"charts fail to glue at generator {M.gens[i]}")
        records[op.anchor] = g
    return p1sheaf.assemble(cp.graph, cm.graph, records.values())


@lru_cache(maxsize=None)
def line_bundle(n: int) -> P1Sheaf:
    """O(n), defined as the sheaf of A(n)."""
    return sheafify(free_module(1, n))


# ---------------------------------------------------------------------------
# Gamma_* and the comparison map


def act_section(s: GlobalSection, F: P1Sheaf, var: int) -> GlobalSection | None:
    """x0 or x1 times a section of F(n), as a section of F(n+1).

    On U1 the chart coordinate of x_i is x_i/x0, on U2 it is x_i/x1.
    """
    if var == 0:
        out = GlobalSection(s.plus, F.minus.act(s.minus, 1))
    else:
        out = GlobalSection(F.plus.act(s.plus, 1), s.minus)
    if out.plus is None and out.minus is None:
        return None
    return out


def gamma_star_sections(F: P1Sheaf, lo: int, hi: int, saturate: int = 0) -> dict[int, list[GlobalSection]]:
    """Sections of F(n) for lo <= n <= hi, then ``saturate`` more degrees
    holding only the x-multiples of the degree-``hi`` sections."""
    secs = {n: p1sheaf.global_sections(p1sheaf.twist(F, n)) for n in range(lo, hi + 1)}
    for n in range(hi + 1, hi + saturate + 1):
        reach = set()
        for s in secs[n - 1]:
            for var in (0, 1):
                img = act_section(s, F, var)
                if img is not None:
                    reach.add(img)
        secs[n] = sorted(reach, key=GlobalSection.sort_key)
    return secs


def _deg_name(n: int) -> str:
    return f"m{-n}" if n < 0 else str(n)


def gamma_star(F: P1Sheaf, D: int, saturate: int = 0, lo: int | None = None) -> GradedPresentation:
    """Gamma_*(F) truncated to degrees [-D, D] (``lo`` overrides -D).

    Generators are the sections; every x0/x1 multiple landing inside the
    window is recorded as a relation, a multiple that vanishes as ``= 0``.
    """
    if D < 0:
        raise GradedError("window radius must be nonnegative")
    lo = -D if lo is None else lo
    secs = gamma_star_sections(F, lo, D, saturate)
    top = D + saturate
    gens, degrees, index = [], [], {}
    for n in range(lo, top + 1):
        for j, s in enumerate(secs[n]):
            index[(n, s)] = len(gens)
            gens.append(f"s{_deg_name(n)}_{j}")
            degrees.append(n)
    rels = []
    unit = ((1, 0), (0, 1))
    for n in range(lo, top):
        for s in secs[n]:
            i = index[(n, s)]
            for var in (0, 1):
                img = act_section(s, F, var)
                if img is None:
                    rels.append(GRelation((i, unit[var]), None))
                    continue
                j = index.get((n + 1, img))
                if j is None:
                    raise SheafError("section multiple missing from the enumeration")
                rels.append(GRelation((i, unit[var]), (j, (0, 0))))
    return GradedPresentation(2, tuple(gens), tuple(degrees), tuple(rels))


@dataclass(frozen=True)
class BetaResult:
    ok: bool
    D: int
    tried: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def _chart_size(F: P1Sheaf) -> int:
    return len(F.plus) + len(F.minus)


def beta_start(F: P1Sheaf) -> int:
    """Initial window radius: largest shift plus chart sizes plus 4."""
    shifts = [abs(g.shift) for g in F.glue]
    return max(shifts, default=0) + max(len(F.plus), len(F.minus)) + 4


def beta_check(F: P1Sheaf, D: int | None = None, cap: int = 64) -> BetaResult:
    """Compare F with the sheaf of its truncated Gamma_*.

    Degree-``D`` sections generate both charts once D is large; the
    saturation degrees above D supply the identifications between their
    multiples, which need at most as many steps as the charts have vertices.
    The window doubles until the comparison succeeds or passes ``cap``.
    """
    D = beta_start(F) if D is None else D
    sat = _chart_size(F) + 2
    tried = []
    while True:
        tried.append(D)
        G = sheafify(gamma_star(F, D, saturate=sat))
        if p1sheaf.is_isomorphic(F, G):
            return BetaResult(True, D, tuple(tried))
        if D >= cap:
            return BetaResult(False, D, tuple(tried))
        D = min(2 * D, cap)


def _generates(G: tmod.FunctionalGraph, elems: Iterable) -> bool:
    sub = tmod.closure(G, elems)
    if any(v not in sub.vertices for v in G.vertices):
        return False
    return all(sub.tail_start(v) in (None, 0) for v in G.vertices if G.is_free(v))


def generated_by_sections(F: P1Sheaf) -> bool:
    """Whether Gamma(F) generates both chart modules (hence every stalk)."""
    secs = p1sheaf.global_sections(F)
    return _generates(F.plus, [s.plus for s in secs]) and _generates(F.minus, [s.minus for s in secs])


class SearchBoundExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Generation:
    n0: int
    sections: tuple[GlobalSection, ...]


def default_floor(F: P1Sheaf) -> int:
    shifts = [abs(g.shift) for g in F.glue]
    return -(max(shifts, default=0) + _chart_size(F) + 1)


def global_generation(F: P1Sheaf, floor: int | None = None, bound: int = 64, run: int = 6) -> Generation:
    """Smallest n0 >= floor with F(n) generated by sections for n0 <= n < n0 + run.

    Torsion sheaves are generated in every degree, so for them n0 is the
    floor itself.  The default floor sits below every degree where a glued
    line could have a section.
    """
    floor = default_floor(F) if floor is None else floor
    ok = {}

    def good(n):
        if n not in ok:
            ok[n] = generated_by_sections(p1sheaf.twist(F, n))
        return ok[n]

    n0 = floor
    while n0 <= floor + bound:
        bad = next((n for n in range(n0, n0 + run) if not good(n)), None)
        if bad is None:
            return Generation(n0, tuple(p1sheaf.global_sections(p1sheaf.twist(F, n0))))
        n0 = bad + 1
    raise SearchBoundExceeded(f"no generating degree within {bound} of {floor}")


def quotient_presentation(F: P1Sheaf, n: int, sections: Sequence[GlobalSection]) -> SheafMap:
    """The map O(-n)^k -> F sending the j-th unit section to ``sections[j]``."""
    k = len(sections)
    if k == 0 and not F.is_zero():
        raise SheafError("no sections to map from")
    Fn = p1sheaf.twist(F, n)
    for s in sections:
        if not p1sheaf.is_section(Fn, s):
            raise SheafError(f"{Fn.section_name(s)} is not a section of F({n})")
    source = p1sheaf.direct_sum_all([line_bundle(-n)] * k)
    f = SheafMap(
        source, F,
        tmod.TModMap(source.plus, F.plus, tuple(s.plus for s in sections)),
        tmod.TModMap(source.minus, F.minus, tuple(s.minus for s in sections)),
    )
    p1sheaf.check_sheaf_map(f)
    Q, _ = p1sheaf.cokernel(f)
    if not Q.is_zero():
        raise SheafError("the sections do not generate: nonzero cokernel")
    return f


# ---------------------------------------------------------------------------
# truncations, valid in any number of variables


@dataclass(frozen=True)
class TruncatedModule:
    """Degree pieces M_lo .. M_hi as classes of (generator, monomial) pairs."""

    nvars: int
    lo: int
    hi: int
    classes: dict[int, tuple[tuple[Term, ...], ...]] = field(compare=False)
    action: dict[tuple[int, int], tuple[int | None, ...]] = field(compare=False)

    def count(self, n: int) -> int:
        return len(self.classes[n])

    def class_of(self, n: int, term: Term) -> int | None:
        for idx, members in enumerate(self.classes[n]):
            if term in members:
                return idx
        return None


def _degree_piece(M: GradedPresentation, n: int) -> tuple[tuple[Term, ...], ...]:
    nodes: list[Term] = []
    for i, d in enumerate(M.degrees):
        for m in monomials(M.nvars, n - d):
            nodes.append((i, m))
    index = {t: k for k, t in enumerate(nodes)}
    zero = len(nodes)
    parent = list(range(zero + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for rel in M.rels:
        e = M.rel_degree(rel)
        for c in monomials(M.nvars, n - e):
            a = index[(rel.lhs[0], tuple(x + y for x, y in zip(rel.lhs[1], c)))]
            if rel.rhs is None:
                b = zero
            else:
                b = index[(rel.rhs[0], tuple(x + y for x, y in zip(rel.rhs[1], c)))]
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
                if zero in (ra, rb):
                    parent[min(ra, rb)] = zero
                    parent[zero] = zero
    groups: dict[int, list[Term]] = {}
    zroot = find(zero)
    for k, t in enumerate(nodes):
        r = find(k)
        if r != zroot:
            groups.setdefault(r, []).append(t)
    return tuple(sorted(tuple(sorted(g)) for g in groups.values()))


def truncate(M: GradedPresentation, lo: int, hi: int) -> TruncatedModule:
    """Exact degree pieces: homogeneity lets each degree close on its own."""
    if lo > hi:
        raise GradedError("empty degree window")
    classes = {n: _degree_piece(M, n) for n in range(lo, hi + 1)}
    lookup = {n: {t: idx for idx, g in enumerate(cl) for t in g} for n, cl in classes.items()}
    action = {}
    for n in range(lo, hi):
        for var in range(M.nvars):
            imgs = []
            for members in classes[n]:
                i, m = members[0]
                m2 = tuple(e + (1 if j == var else 0) for j, e in enumerate(m))
                imgs.append(lookup[n + 1].get((i, m2)))
            action[(n, var)] = tuple(imgs)
    return TruncatedModule(M.nvars, lo, hi, classes, action)


def _max_rel_degree(M: GradedPresentation) -> int:
    return max((M.rel_degree(r) for r in M.rels), default=min(M.degrees, default=0))


def truncation_presentation(M: GradedPresentation, d: int) -> GradedPresentation:
    """A presentation of M_{>=d}.

    Generators are the classes of degrees d .. H + 1, where H bounds every
    generator and relation degree; relations are the action maps.  Above H
    the module is generated by its degree-H piece with no new relations, and
    the extra degree carries the commuting squares.
    """
    H = max([d, _max_rel_degree(M)] + list(M.degrees)) + 1
    T = truncate(M, d, H)
    gens, degrees, index = [], [], {}
    for n in range(d, H + 1):
        for c in range(T.count(n)):
            index[(n, c)] = len(gens)
            gens.append(f"c{_deg_name(n)}_{c}")
            degrees.append(n)
    zero = (0,) * M.nvars
    rels = []
    for n in range(d, H):
        for var in range(M.nvars):
            unit = tuple(1 if j == var else 0 for j in range(M.nvars))
            for c, img in enumerate(T.action[(n, var)]):
                lhs = (index[(n, c)], unit)
                rels.append(GRelation(lhs, None if img is None else (index[(n + 1, img)], zero)))
    return GradedPresentation(M.nvars, tuple(gens), tuple(degrees), tuple(rels), M.var_names)


@dataclass(frozen=True)
class ChartView:
    """Elements g * u / x_i^(deg g + |u|) of M_(x_i) with |u| <= depth.

    Two such fractions agree in the localization exactly when they agree
    after multiplying up to a common degree, which is ``level``.
    """

    index: int
    level: int
    elements: tuple[Term, ...]
    classes: tuple[int | None, ...]

    def distinct(self) -> int:
        return len({c for c in self.classes if c is not None})


def chart_view(M: GradedPresentation, i: int, depth: int, level: int | None = None) -> ChartView:
    if not 0 <= i < M.nvars:
        raise GradedError(f"chart index {i} out of range")
    need = max(M.degrees, default=0) + depth
    level = max(need, _max_rel_degree(M)) + depth + 1 if level is None else level
    if level < need:
        raise GradedError("level too small for the requested depth")
    T = truncate(M, level, level)
    elements, classes = [], []
    for g, dg in enumerate(M.degrees):
        for size in range(depth + 1):
            for u in monomials(M.nvars - 1, size):
                exps = list(u)
                exps.insert(i, level - dg - size)
                elements.append((g, u))
                classes.append(T.class_of(level, (g, tuple(exps))))
    return ChartView(i, level, tuple(elements), tuple(classes))


@dataclass(frozen=True)
class ProjSheaf:
    """Chart data of M~ on MProj <x_0, ..., x_r>.

    For r = 1 the two chart presentations and the glued sheaf are kept;
    for r >= 2 each chart is a truncated view.  All views are cut from the
    same degree pieces of M, so they agree on overlaps by construction.
    """

    module: GradedPresentation
    charts: tuple
    sheaf: P1Sheaf | None = None


def proj_sheaf(M: GradedPresentation, depth: int = 3) -> ProjSheaf:
    if M.nvars == 2:
        charts = (degree_zero_localization(M, 0), degree_zero_localization(M, 1))
        return ProjSheaf(M, charts, sheafify(M))
    views = tuple(chart_view(M, i, depth) for i in range(M.nvars))
    return ProjSheaf(M, views)

