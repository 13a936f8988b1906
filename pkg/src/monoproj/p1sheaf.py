"""Coherent sheaves on P^1 as gluing triples.

A sheaf is a module over <t> on U1 (``plus``), a module over <t^-1> on U2
(``minus``) and an identification of their localizations on the overlap.
Both localizations are disjoint unions of Z-orbits: lines and k-cycles.
Each glue record pairs one orbit of each chart and carries the shift
``n`` with

    minus anchor = t^n * plus anchor      (on the overlap; mod k for cycles)

where the anchors are the canonical base points chosen by
:func:`monoproj.tmod.localize`.  Positions on the overlap are always
measured in the plus chart's coordinate, so a minus element at s-position
``p`` (s = t^-1) sits at overlap position ``n - p``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

from . import tmod
from .tmod import (
    EMPTY,
    FREE,
    Elem,
    FunctionalGraph,
    Submodule,
    TModMap,
    ZOrbitData,
)


class SheafError(ValueError):
    pass


class NotExact(ValueError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


Coord = tuple[int, int]


@dataclass(frozen=True)
class Glue:
    kind: str
    plus: int
    minus: int
    shift: int
    k: int | None = None


@dataclass(frozen=True)
class Match:
    """User-level gluing datum: ``minus = t^shift * plus`` on the overlap."""

    kind: str
    plus: Elem
    minus: Elem
    shift: int = 0
    k: int | None = None


@dataclass(frozen=True)
class P1Sheaf:
    plus: FunctionalGraph = EMPTY
    minus: FunctionalGraph = EMPTY
    glue: tuple[Glue, ...] = ()

    @cached_property
    def plus_orbits(self) -> ZOrbitData:
        return tmod.localize(self.plus)

    @cached_property
    def minus_orbits(self) -> ZOrbitData:
        return tmod.localize(self.minus)

    @cached_property
    def _by_minus(self) -> dict[int, Glue]:
        return {g.minus: g for g in self.glue}

    @cached_property
    def _by_plus(self) -> dict[int, Glue]:
        return {g.plus: g for g in self.glue}

    def plus_coord(self, e: Elem | None) -> Coord | None:
        """Overlap coordinate ``(plus anchor, position)`` of a plus element."""
        hit = self.plus_orbits.position(self.plus, e)
        if hit is None:
            return None
        orbit, pos = hit
        return (self.plus_orbits.orbits[orbit].anchor, pos)

    def minus_coord(self, e: Elem | None) -> Coord | None:
        hit = self.minus_orbits.position(self.minus, e)
        if hit is None:
            return None
        orbit, spos = hit
        g = self._by_minus[self.minus_orbits.orbits[orbit].anchor]
        pos = g.shift - spos
        return (g.plus, pos % g.k if g.kind == "cycle" else pos)

    def element_name(self, side: str, e: Elem | None) -> str:
        return (self.plus if side == "plus" else self.minus).name(e)

    def section_name(self, s: "GlobalSection") -> str:
        return f"({self.plus.name(s.plus)}, {self.minus.name(s.minus)})"

    def is_zero(self) -> bool:
        return len(self.plus) == 0 and len(self.minus) == 0


ZERO_SHEAF = P1Sheaf()


def _free_line() -> FunctionalGraph:
    return FunctionalGraph((None,), (FREE,), (("e", 0),))


def line_bundle_raw(shift: int) -> P1Sheaf:
    """Rank-one sheaf with the given raw shift (no sign convention implied)."""
    g = _free_line()
    return P1Sheaf(g, g, (Glue("line", 0, 0, shift),))


def structure_sheaf() -> P1Sheaf:
    return line_bundle_raw(0)


def _validate(F: P1Sheaf) -> None:
    po, mo = F.plus_orbits, F.minus_orbits
    plus_kinds = {o.anchor: o for o in po.orbits}
    minus_kinds = {o.anchor: o for o in mo.orbits}
    seen_p, seen_m = set(), set()
    for g in F.glue:
        op = plus_kinds.get(g.plus)
        om = minus_kinds.get(g.minus)
        if op is None or om is None:
            raise SheafError("glue record does not refer to orbit anchors")
        if g.plus in seen_p or g.minus in seen_m:
            raise SheafError("an orbit is glued twice")
        seen_p.add(g.plus)
        seen_m.add(g.minus)
        if op.kind != g.kind or om.kind != g.kind:
            raise SheafError(f"cannot glue a {op.kind} orbit to a {om.kind} orbit")
        if g.kind == "cycle":
            if not (op.k == om.k == g.k):
                raise SheafError(f"cycle lengths differ: {op.k} vs {om.k}")
            if not 0 <= g.shift < g.k:
                raise SheafError("cycle shift not reduced")
    if len(seen_p) != len(po.orbits) or len(seen_m) != len(mo.orbits):
        raise SheafError(
            f"orbit mismatch on the overlap: plus {po.signature()} vs minus {mo.signature()}"
        )


def assemble(plus: FunctionalGraph, minus: FunctionalGraph, glue: Iterable[Glue]) -> P1Sheaf:
    """Build from anchor-level glue records, reducing cycle shifts; validates."""
    out = []
    for g in glue:
        if g.kind == "cycle":
            g = Glue("cycle", g.plus, g.minus, g.shift % g.k, g.k)
        out.append(g)
    out.sort(key=lambda g: (g.plus, g.minus))
    F = P1Sheaf(plus, minus, tuple(out))
    _validate(F)
    return F


def make_sheaf(plus: FunctionalGraph, minus: FunctionalGraph, matching: Iterable[Match]) -> P1Sheaf:
    """Validate user gluing data and rewrite it against canonical anchors.

    Every non-torsion orbit on each side must be matched exactly once;
    repeated matches of the same pair must agree.
    """
    po, mo = tmod.localize(plus), tmod.localize(minus)
    records: dict[int, Glue] = {}
    for m in matching:
        hp = po.position(plus, m.plus)
        hm = mo.position(minus, m.minus)
        if hp is None or hm is None:
            raise SheafError(
                f"{plus.name(m.plus)} ~ {minus.name(m.minus)}: torsion elements vanish on the overlap"
            )
        op, om = po.orbits[hp[0]], mo.orbits[hm[0]]
        if op.kind != om.kind:
            raise SheafError(f"cannot glue a {op.kind} orbit to a {om.kind} orbit")
        if m.kind != op.kind:
            raise SheafError(f"{plus.name(m.plus)} lies on a {op.kind} orbit, not a {m.kind}")
        if op.kind == "cycle":
            if op.k != om.k:
                raise SheafError(f"cycle lengths differ: {op.k} vs {om.k}")
            if m.k is not None and m.k != op.k:
                raise SheafError(f"declared cycle length {m.k} but the orbit has length {op.k}")
        # overlap position of m.minus is hp + shift; of the minus anchor, that plus the s-position
        n = hp[1] + m.shift + hm[1]
        g = Glue(op.kind, op.anchor, om.anchor, n % op.k if op.k else n, op.k)
        old = records.get(op.anchor)
        if old is not None and old != g:
            raise SheafError(f"inconsistent gluing for the orbit of {plus.name(m.plus)}")
        records[op.anchor] = g
    return assemble(plus, minus, records.values())


def direct_sum(F: P1Sheaf, G: P1Sheaf) -> P1Sheaf:
    op, om = len(F.plus), len(F.minus)
    glue = list(F.glue) + [Glue(g.kind, g.plus + op, g.minus + om, g.shift, g.k) for g in G.glue]
    return P1Sheaf(tmod.direct_sum(F.plus, G.plus), tmod.direct_sum(F.minus, G.minus), tuple(glue))


def direct_sum_all(sheaves: Iterable[P1Sheaf]) -> P1Sheaf:
    out = ZERO_SHEAF
    for F in sheaves:
        out = direct_sum(out, F)
    return out


# ---------------------------------------------------------------------------
# decomposition and isomorphism


def _restrict(G: FunctionalGraph, comp: Sequence[int]) -> tuple[FunctionalGraph, dict[int, int]]:
    comp = sorted(comp)
    return tmod.subgraph(G, comp), {v: i for i, v in enumerate(comp)}


def decompose(F: P1Sheaf) -> list[P1Sheaf]:
    """Indecomposable summands: torsion components and glued orbit pairs."""
    out = []
    pinfo = {i.vertices[0]: i for i in tmod.component_infos(F.plus)}
    minfo = {i.vertices[0]: i for i in tmod.component_infos(F.minus)}
    p_anchor = {}
    for info in pinfo.values():
        if info.type.kind == 1:
            out.append(P1Sheaf(_restrict(F.plus, info.vertices)[0], EMPTY, ()))
        else:
            p_anchor[info.root if info.type.kind == 2 else info.anchor] = info
    m_anchor = {}
    for info in minfo.values():
        if info.type.kind == 1:
            out.append(P1Sheaf(EMPTY, _restrict(F.minus, info.vertices)[0], ()))
        else:
            m_anchor[info.root if info.type.kind == 2 else info.anchor] = info
    for g in F.glue:
        gp, mp = _restrict(F.plus, p_anchor[g.plus].vertices)
        gm, mm = _restrict(F.minus, m_anchor[g.minus].vertices)
        out.append(P1Sheaf(gp, gm, (Glue(g.kind, mp[g.plus], mm[g.minus], g.shift, g.k),)))
    return out


def _summand_keys(F: P1Sheaf) -> Counter:
    keys: Counter = Counter()
    pinfo = tmod.component_infos(F.plus)
    minfo = tmod.component_infos(F.minus)
    p_anchor, m_anchor = {}, {}
    for info in pinfo:
        if info.type.kind == 1:
            keys[("T1+", info.form)] += 1
        else:
            p_anchor[info.root if info.type.kind == 2 else info.anchor] = info
    for info in minfo:
        if info.type.kind == 1:
            keys[("T1-", info.form)] += 1
        else:
            m_anchor[info.root if info.type.kind == 2 else info.anchor] = info
    for g in F.glue:
        ip, im = p_anchor[g.plus], m_anchor[g.minus]
        if g.kind == "line":
            keys[("L", ip.form, im.form, g.shift)] += 1
        else:
            sym = gcd(ip.period, im.period)
            keys[("C", g.k, ip.form, im.form, g.shift % sym)] += 1
    return keys


def summand_keys(F: P1Sheaf) -> list[tuple]:
    return sorted(_summand_keys(F).elements())


def is_isomorphic(F: P1Sheaf, G: P1Sheaf) -> bool:
    """Isomorphism of gluing triples.

    Chart automorphisms fix the FREE vertex of a line component, so line
    shifts must agree exactly; on a cycle they rotate by multiples of the
    decorated cycle's period, so cycle shifts agree modulo the gcd of the
    two periods.
    """
    return _summand_keys(F) == _summand_keys(G)


def shape(F: P1Sheaf) -> int:
    """Which of the four indecomposable shapes an indecomposable sheaf has."""
    parts = decompose(F)
    if len(parts) != 1:
        raise SheafError(f"sheaf has {len(parts)} indecomposable summands")
    if not F.glue:
        return 1 if len(F.plus) else 2
    return 3 if F.glue[0].kind == "line" else 4


# ---------------------------------------------------------------------------
# twists


def twist(F: P1Sheaf, n: int) -> P1Sheaf:
    """F tensor O(n); the shift of O(n) is read off ``sheafify(A(n))``."""
    from .grproj import line_bundle

    (o,) = line_bundle(n).glue
    delta = o.shift
    glue = []
    for g in F.glue:
        s = g.shift + delta
        glue.append(Glue(g.kind, g.plus, g.minus, s % g.k if g.kind == "cycle" else s, g.k))
    return P1Sheaf(F.plus, F.minus, tuple(glue))


# ---------------------------------------------------------------------------
# global sections


@dataclass(frozen=True)
class GlobalSection:
    plus: Elem | None
    minus: Elem | None

    def sort_key(self):
        return (self.plus or (-1, -1), self.minus or (-1, -1))


def _explicit_range(G: FunctionalGraph, orbits: ZOrbitData, anchor: int) -> list[tuple[int, int]]:
    """(vertex, position) for vertices of the orbit with the given anchor."""
    idx = orbits.orbit_of_anchor(anchor)
    return [(v, pos) for v, (o, pos) in orbits.positions.items() if o == idx]


def line_window(F: P1Sheaf, g: Glue) -> tuple[int, int]:
    """Overlap positions where both charts of a glued line have elements."""
    pv = _explicit_range(F.plus, F.plus_orbits, g.plus)
    mv = _explicit_range(F.minus, F.minus_orbits, g.minus)
    lo = min(p for _, p in pv)
    hi = g.shift - min(p for _, p in mv)
    return lo, hi


def _line_elements(G: FunctionalGraph, orbits: ZOrbitData, anchor: int, lo: int, hi: int, sign: int, base: int):
    """Elements of a line orbit whose overlap position lies in [lo, hi].

    Overlap position of a vertex is ``base + sign * position``; the tail
    element of height h has chart position h.
    """
    out = []
    for v, p in _explicit_range(G, orbits, anchor):
        q = base + sign * p
        if lo <= q <= hi:
            out.append(((v, 0), q))
    h = 1
    while True:
        q = base + sign * h
        if (sign > 0 and q > hi) or (sign < 0 and q < lo):
            break
        if lo <= q <= hi:
            out.append(((anchor, h), q))
        h += 1
    return out


def global_sections(F: P1Sheaf, margin: int = 0) -> list[GlobalSection]:
    """All nonzero global sections.

    Plus tails run toward +infinity and minus tails toward -infinity on the
    overlap, so only the window between the two charts' explicit vertices
    can carry a matched pair.  ``margin`` widens that window; the result
    must not change.
    """
    sections: list[GlobalSection] = []
    tplus = [None] + [(v, 0) for v in tmod.torsion_vertices(F.plus)]
    tminus = [None] + [(v, 0) for v in tmod.torsion_vertices(F.minus)]
    for x in tplus:
        for y in tminus:
            if x is not None or y is not None:
                sections.append(GlobalSection(x, y))
    for g in F.glue:
        if g.kind == "line":
            lo, hi = line_window(F, g)
            lo, hi = lo - margin, hi + margin
            px = _line_elements(F.plus, F.plus_orbits, g.plus, lo, hi, 1, 0)
            my = _line_elements(F.minus, F.minus_orbits, g.minus, lo, hi, -1, g.shift)
        else:
            px = [((v, 0), p) for v, p in _explicit_range(F.plus, F.plus_orbits, g.plus)]
            my = [((v, 0), (g.shift - p) % g.k) for v, p in _explicit_range(F.minus, F.minus_orbits, g.minus)]
        by_pos: dict[int, list[Elem]] = {}
        for y, q in my:
            by_pos.setdefault(q, []).append(y)
        for x, p in px:
            for y in by_pos.get(p, ()):
                sections.append(GlobalSection(x, y))
    sections.sort(key=GlobalSection.sort_key)
    return sections


def is_section(F: P1Sheaf, s: GlobalSection) -> bool:
    if s.plus is None and s.minus is None:
        return True
    if not (F.plus.is_elem(s.plus) and F.minus.is_elem(s.minus)):
        return False
    return F.plus_coord(s.plus) == F.minus_coord(s.minus)


# ---------------------------------------------------------------------------
# maps, subsheaves and quotients


@dataclass(frozen=True)
class SheafMap:
    source: P1Sheaf
    target: P1Sheaf
    plus: TModMap
    minus: TModMap


def _shift_coord(F: P1Sheaf, c: Coord | None, n: int) -> Coord | None:
    if c is None:
        return None
    key, pos = c
    g = F._by_plus[key]
    pos += n
    return (key, pos % g.k if g.kind == "cycle" else pos)


def check_sheaf_map(f: SheafMap) -> None:
    """Chart maps must be equivariant and agree on the overlap."""
    tmod.map_check(f.plus)
    tmod.map_check(f.minus)
    S, T = f.source, f.target
    for g in S.glue:
        cx = T.plus_coord(f.plus((g.plus, 0)))
        cy = T.minus_coord(f.minus((g.minus, 0)))
        if cy != _shift_coord(T, cx, g.shift):
            raise SheafError(
                f"chart maps disagree on the overlap at {S.plus.name((g.plus, 0))} / {S.minus.name((g.minus, 0))}"
            )


def identity(F: P1Sheaf) -> SheafMap:
    return SheafMap(F, F, tmod.identity_map(F.plus), tmod.identity_map(F.minus))


def _reglue(plus: FunctionalGraph, pcoord, minus: FunctionalGraph, mcoord) -> P1Sheaf:
    """Glue two chart modules whose elements carry ambient overlap coordinates."""
    po, mo = tmod.localize(plus), tmod.localize(minus)
    by_key: dict[int, tuple] = {}
    for o in po.orbits:
        c = pcoord((o.anchor, 0))
        if c is None:
            raise SheafError("chart results fail to glue: orbit without overlap image")
        by_key[c[0]] = (o, c[1])
    glue = []
    for o in mo.orbits:
        c = mcoord((o.anchor, 0))
        if c is None or c[0] not in by_key:
            raise SheafError("chart results fail to glue: overlap orbits differ")
        op, p = by_key.pop(c[0])
        if op.kind != o.kind or op.k != o.k:
            raise SheafError("chart results fail to glue: orbit types differ")
        glue.append(Glue(o.kind, op.anchor, o.anchor, c[1] - p, o.k))
    if by_key:
        raise SheafError("chart results fail to glue: overlap orbits differ")
    return assemble(plus, minus, glue)


def subsheaf(F: P1Sheaf, sub_plus: Submodule, sub_minus: Submodule) -> tuple[P1Sheaf, SheafMap]:
    hp, inc_p = tmod.submodule_graph(F.plus, sub_plus)
    hm, inc_m = tmod.submodule_graph(F.minus, sub_minus)
    ip = TModMap(hp, F.plus, tuple(inc_p))
    im = TModMap(hm, F.minus, tuple(inc_m))
    S = _reglue(hp, lambda e: F.plus_coord(ip(e)), hm, lambda e: F.minus_coord(im(e)))
    return S, SheafMap(S, F, ip, im)


def subsheaf_generated(F: P1Sheaf, sections: Iterable[GlobalSection]) -> tuple[P1Sheaf, SheafMap]:
    sections = list(sections)
    for s in sections:
        if not is_section(F, s):
            raise SheafError(f"{F.section_name(s)} is not a global section")
    sp = tmod.closure(F.plus, [s.plus for s in sections])
    sm = tmod.closure(F.minus, [s.minus for s in sections])
    return subsheaf(F, sp, sm)


def quotient(F: P1Sheaf, sub_plus: Submodule, sub_minus: Submodule) -> tuple[P1Sheaf, SheafMap]:
    qp, proj_p, pre_p = tmod.quotient_graph(F.plus, sub_plus)
    qm, proj_m, pre_m = tmod.quotient_graph(F.minus, sub_minus)

    def lift(G, pre, e):
        v, h = e
        return G.act(pre[v], h)

    Q = _reglue(
        qp, lambda e: F.plus_coord(lift(F.plus, pre_p, e)),
        qm, lambda e: F.minus_coord(lift(F.minus, pre_m, e)),
    )
    return Q, SheafMap(F, Q, TModMap(F.plus, qp, tuple(proj_p)), TModMap(F.minus, qm, tuple(proj_m)))


def quotient_by(F: P1Sheaf, inclusion: SheafMap) -> tuple[P1Sheaf, SheafMap]:
    """Quotient of the target of ``inclusion`` by its image."""
    return quotient(F, tmod.image(inclusion.plus), tmod.image(inclusion.minus))


def kernel(f: SheafMap) -> tuple[P1Sheaf, SheafMap]:
    check_sheaf_map(f)
    return subsheaf(f.source, tmod.kernel(f.plus), tmod.kernel(f.minus))


def image(f: SheafMap) -> tuple[P1Sheaf, SheafMap]:
    check_sheaf_map(f)
    return subsheaf(f.target, tmod.image(f.plus), tmod.image(f.minus))


def cokernel(f: SheafMap) -> tuple[P1Sheaf, SheafMap]:
    check_sheaf_map(f)
    return quotient(f.target, tmod.image(f.plus), tmod.image(f.minus))


def _same_sub(a: Submodule, b: Submodule) -> bool:
    return a.vertices == b.vertices and dict(a.tails) == dict(b.tails)


def _full_component(sub: Submodule, G: FunctionalGraph, comp: Sequence[int]) -> bool | None:
    """True if sub contains the component, False if disjoint, None otherwise."""
    inside = [v in sub.vertices for v in comp]
    tails = [sub.tail_start(v) for v in comp if G.is_free(v)]
    if all(inside):
        return True
    if not any(inside) and all(t is None for t in tails):
        return False
    return None


def check_exact(sub: SheafMap, quot: SheafMap) -> None:
    """Raise :class:`NotExact` unless 0 -> A -> E -> B -> 0 is exact."""
    if sub.target != quot.source:
        raise NotExact("composable", "the middle sheaves differ")
    try:
        check_sheaf_map(sub)
        check_sheaf_map(quot)
    except (SheafError, tmod.MapError) as exc:
        raise NotExact("maps", str(exc)) from exc
    if not (tmod.is_injective(sub.plus) and tmod.is_injective(sub.minus)):
        raise NotExact("injective", "the first map is not injective")
    if not (tmod.is_surjective(quot.plus) and tmod.is_surjective(quot.minus)):
        raise NotExact("surjective", "the second map is not surjective")
    for a, b in ((sub.plus, quot.plus), (sub.minus, quot.minus)):
        if not _same_sub(tmod.image(a), tmod.kernel(b)):
            raise NotExact("middle", "image of the first map differs from the kernel of the second")


def is_split(sub: SheafMap, quot: SheafMap) -> bool:
    """Whether an exact sequence 0 -> A -> E -> B -> 0 splits.

    A subsheaf of a direct sum is the sum of its intersections with the
    summands, so the sequence splits exactly when the image of A is a union
    of indecomposable summands of E; then E is A plus B.
    """
    check_exact(sub, quot)
    E = sub.target
    ip, im = tmod.image(sub.plus), tmod.image(sub.minus)
    pcomps = {min(c): c for c in E.plus.components()}
    mcomps = {min(c): c for c in E.minus.components()}
    pcomp_of = {v: r for r, c in pcomps.items() for v in c}
    mcomp_of = {v: r for r, c in mcomps.items() for v in c}
    glued_p = {pcomp_of[g.plus]: mcomp_of[g.minus] for g in E.glue}
    for r, comp in pcomps.items():
        a = _full_component(ip, E.plus, comp)
        if a is None:
            return False
        if r in glued_p:
            b = _full_component(im, E.minus, mcomps[glued_p[r]])
            if b is not a:
                return False
    for r, comp in mcomps.items():
        if _full_component(im, E.minus, comp) is None:
            return False
    return is_isomorphic(E, direct_sum(sub.source, quot.target))


# ---------------------------------------------------------------------------
# local properties


def is_locally_free(F: P1Sheaf) -> bool:
    def free(G):
        return all(G.is_free(v) for v in G.vertices) and not any(G.in_degree())

    return free(F.plus) and free(F.minus)


def rank(F: P1Sheaf) -> int:
    if not is_locally_free(F):
        raise SheafError("rank is defined for locally free sheaves only")
    return len(F.plus)


def is_torsion(F: P1Sheaf) -> bool:
    return not F.glue


def is_torsion_free(F: P1Sheaf) -> bool:
    return not tmod.torsion_vertices(F.plus) and not tmod.torsion_vertices(F.minus)


# ---------------------------------------------------------------------------
# serialization


def _graph_json(G: FunctionalGraph) -> list[dict]:
    """One row per vertex, in vertex order; ``succ`` is a row index.

    Names are for reading only: direct sums can repeat them.
    """
    return [
        {"name": G.name((v, 0)), "label": list(G.labels[v]), "succ": G.succ[v], "tag": G.tags[v]}
        for v in G.vertices
    ]


def to_json(F: P1Sheaf) -> dict:
    return {
        "plus": _graph_json(F.plus),
        "minus": _graph_json(F.minus),
        "matching": [
            {"kind": g.kind, "plus": g.plus, "minus": g.minus, "shift": g.shift, "k": g.k}
            for g in F.glue
        ],
    }


def _graph_from_json(rows: list[dict]) -> FunctionalGraph:
    return FunctionalGraph(
        tuple(row["succ"] for row in rows),
        tuple(row["tag"] for row in rows),
        tuple((row["label"][0], row["label"][1]) for row in rows),
    )


def from_json(data: dict) -> P1Sheaf:
    plus = _graph_from_json(data["plus"])
    minus = _graph_from_json(data["minus"])
    glue = [Glue(m["kind"], m["plus"], m["minus"], m["shift"], m["k"]) for m in data["matching"]]
    return assemble(plus, minus, glue)
