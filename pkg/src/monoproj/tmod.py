"""Finitely presented modules over the free monoid <t>.

A module is stored as a :class:`FunctionalGraph`: one vertex per nonzero
element, an edge ``v -> t*v``, and a tag on every vertex without a
successor.  ``ZERO`` means ``t*v = *``; ``FREE`` means the free orbit
``t*v, t^2*v, ...`` continues implicitly.  Elements of the module are pairs
``(vertex, height)``; a positive height is only allowed on a FREE vertex and
names the implicit tail element ``t^height * vertex``.  The zero element is
``None``.

The same machinery describes modules over <t^-1>; the caller decides what
the edges mean.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

ZERO = "ZERO"
FREE = "FREE"

Elem = tuple[int, int]


class PresentationError(ValueError):
    pass


class GraphError(ValueError):
    """A graph violates the functional-graph invariants (an internal bug)."""


class MapError(ValueError):
    def __init__(self, message: str, vertex: int | None = None):
        super().__init__(message)
        self.vertex = vertex


class SubmoduleError(ValueError):
    pass


def format_term(name: str, exp: int) -> str:
    if exp == 0:
        return name
    if exp == 1:
        return f"t*{name}"
    return f"t^{exp}*{name}"


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class Relation:
    """``t^lhs[1] * g[lhs[0]] = t^rhs[1] * g[rhs[0]]``, or ``= *`` if rhs is None."""

    lhs: tuple[int, int]
    rhs: tuple[int, int] | None = None


@dataclass(frozen=True)
class TPresentation:
    gens: tuple[str, ...]
    rels: tuple[Relation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        object.__setattr__(self, "rels", tuple(self.rels))
        if len(set(self.gens)) != len(self.gens):
            raise PresentationError(f"duplicate generator names: {self.gens}")
        n = len(self.gens)
        for rel in self.rels:
            for side in (rel.lhs, rel.rhs):
                if side is None:
                    continue
                i, a = side
                if not 0 <= i < n:
                    raise PresentationError(f"generator index {i} out of range")
                if a < 0:
                    raise PresentationError(f"negative exponent {a} in a <t>-presentation")

    @classmethod
    def build(cls, gens: Sequence[str], rels: Iterable[tuple] = ()) -> "TPresentation":
        """Convenience constructor: rels are ``(i, a, j, b)`` or ``(i, a)`` for ``= *``."""
        out = []
        for r in rels:
            if len(r) == 2:
                out.append(Relation((r[0], r[1]), None))
            else:
                out.append(Relation((r[0], r[1]), (r[2], r[3])))
        return cls(tuple(gens), tuple(out))

    def format_rel(self, rel: Relation) -> str:
        lhs = format_term(self.gens[rel.lhs[0]], rel.lhs[1])
        if rel.rhs is None:
            return f"{lhs} = 0"
        return f"{lhs} = {format_term(self.gens[rel.rhs[0]], rel.rhs[1])}"


def free_presentation(rank: int, prefix: str = "e") -> TPresentation:
    if rank == 1:
        return TPresentation((prefix,))
    return TPresentation(tuple(f"{prefix}{i + 1}" for i in range(rank)))


# ---------------------------------------------------------------------------
# functional graphs


@dataclass(frozen=True)
class FunctionalGraph:
    succ: tuple[Optional[int], ...] = ()
    tags: tuple[Optional[str], ...] = ()
    labels: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        n = len(self.succ)
        if len(self.tags) != n or len(self.labels) != n:
            raise GraphError("succ, tags and labels must have equal length")
        for v, (s, tag) in enumerate(zip(self.succ, self.tags)):
            if s is None:
                if tag not in (ZERO, FREE):
                    raise GraphError(f"vertex {v} has no successor and no terminal tag")
            else:
                if tag is not None:
                    raise GraphError(f"vertex {v} has a successor and a terminal tag")
                if not 0 <= s < n:
                    raise GraphError(f"successor of {v} out of range")

    def __len__(self) -> int:
        return len(self.succ)

    @property
    def vertices(self) -> range:
        return range(len(self.succ))

    def is_free(self, v: int) -> bool:
        return self.succ[v] is None and self.tags[v] == FREE

    def is_finite(self) -> bool:
        return FREE not in self.tags

    def is_elem(self, e: Elem | None) -> bool:
        if e is None:
            return True
        v, h = e
        return 0 <= v < len(self) and (h == 0 or (h > 0 and self.is_free(v)))

    def name(self, e: Elem | None) -> str:
        if e is None:
            return "0"
        v, h = e
        g, k = self.labels[v]
        return format_term(g, k + h)

    def vertex_by_name(self) -> dict[str, int]:
        return {format_term(*lab): v for v, lab in enumerate(self.labels)}

    def act(self, e: Elem | None, k: int = 1) -> Elem | None:
        """Multiply the element ``e`` by ``t^k``."""
        if e is None:
            return None
        v, h = e
        while k > 0:
            if h > 0:
                return (v, h + k)
            s = self.succ[v]
            if s is None:
                if self.tags[v] == ZERO:
                    return None
                return (v, k)
            v = s
            k -= 1
        return (v, h)

    def preds(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.succ]
        for v, s in enumerate(self.succ):
            if s is not None:
                out[s].append(v)
        return out

    def in_degree(self) -> list[int]:
        deg = [0] * len(self)
        for s in self.succ:
            if s is not None:
                deg[s] += 1
        return deg

    def leaves(self) -> list[int]:
        return [v for v, d in enumerate(self.in_degree()) if d == 0]

    def components(self) -> list[list[int]]:
        parent = list(self.vertices)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for v, s in enumerate(self.succ):
            if s is not None:
                a, b = find(v), find(s)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        groups: dict[int, list[int]] = {}
        for v in self.vertices:
            groups.setdefault(find(v), []).append(v)
        return [groups[r] for r in sorted(groups)]

    def zero_height(self, e: Elem | None) -> int | None:
        """Least k with ``t^k * e = *``, or None if e is never killed."""
        if e is None:
            return 0
        v, h = e
        if h > 0:
            return None
        seen = set()
        k = 0
        while True:
            if v in seen:
                return None
            seen.add(v)
            s = self.succ[v]
            if s is None:
                return k + 1 if self.tags[v] == ZERO else None
            v = s
            k += 1

    def element_names(self) -> list[str]:
        return [self.name((v, 0)) for v in self.vertices]


EMPTY = FunctionalGraph()


def _finalize(
    succ: Sequence[Optional[int]],
    tags: Sequence[Optional[str]],
    labels: Sequence[tuple[str, int]],
    keys: Sequence | None = None,
) -> tuple[FunctionalGraph, list[Elem]]:
    """Retract FREE vertices with a single predecessor and renumber.

    Returns the graph and, for every input vertex, the element it became.
    """
    n = len(succ)
    succ = list(succ)
    tags = list(tags)
    preds: list[set[int]] = [set() for _ in range(n)]
    for v, s in enumerate(succ):
        if s is not None:
            preds[s].add(v)
    alive = [True] * n
    into: list[Optional[int]] = [None] * n
    stack = [v for v in range(n) if tags[v] == FREE and len(preds[v]) == 1]
    while stack:
        f = stack.pop()
        if not alive[f] or tags[f] != FREE or len(preds[f]) != 1:
            continue
        (u,) = preds[f]
        succ[u] = None
        tags[u] = FREE
        alive[f] = False
        into[f] = u
        preds[f].clear()
        if len(preds[u]) == 1:
            stack.append(u)
    if keys is None:
        keys = [(lab[1], lab[0]) for lab in labels]
    order = sorted((v for v in range(n) if alive[v]), key=lambda v: (keys[v], v))
    new = {v: i for i, v in enumerate(order)}
    graph = FunctionalGraph(
        tuple(None if succ[v] is None else new[succ[v]] for v in order),
        tuple(tags[v] for v in order),
        tuple(labels[v] for v in order),
    )
    remap: list[Elem] = []
    for v in range(n):
        h = 0
        while not alive[v]:
            v = into[v]
            h += 1
        remap.append((new[v], h))
    return graph, remap


# ---------------------------------------------------------------------------
# normalization


@dataclass(frozen=True)
class Compiled:
    graph: FunctionalGraph
    generators: tuple[Elem | None, ...]
    names: tuple[str, ...]

    def element(self, gen: str | int, exp: int = 0) -> Elem | None:
        i = self.names.index(gen) if isinstance(gen, str) else gen
        return self.graph.act(self.generators[i], exp)


def compile_presentation(p: TPresentation) -> Compiled:
    """Congruence closure of a presentation over (generator, exponent) pairs.

    Every generator gets an explicit chain up to the largest exponent any
    relation mentions; the top of each chain is FREE.  The zero element is
    an extra node whose successor is itself.  Merging two classes merges
    their successors; a FREE class merged with anything adopts the other
    successor, which is how cycles and zero tails appear.
    """
    n = len(p.gens)
    top = [0] * n
    for rel in p.rels:
        for side in (rel.lhs, rel.rhs):
            if side is not None:
                top[side[0]] = max(top[side[0]], side[1])
    offset = [0] * n
    total = 0
    for i in range(n):
        offset[i] = total
        total += top[i] + 1
    star = total
    parent = list(range(total + 1))
    csucc: list[Optional[int]] = [None] * (total + 1)
    member: list[tuple[int, int]] = []
    for i in range(n):
        for k in range(top[i] + 1):
            member.append((i, k))
            csucc[offset[i] + k] = offset[i] + k + 1 if k < top[i] else None
    csucc[star] = star

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    pending = []
    for rel in p.rels:
        a = offset[rel.lhs[0]] + rel.lhs[1]
        b = star if rel.rhs is None else offset[rel.rhs[0]] + rel.rhs[1]
        pending.append((a, b))
    while pending:
        x, y = pending.pop()
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        if ry == find(star):
            rx, ry = ry, rx
        parent[ry] = rx
        sx, sy = csucc[rx], csucc[ry]
        if sx is None:
            csucc[rx] = sy
        elif sy is not None:
            pending.append((sx, sy))

    zero_root = find(star)
    rep: dict[int, tuple[int, int]] = {}
    for node in range(total):
        r = find(node)
        if r == zero_root:
            continue
        i, k = member[node]
        if r not in rep or (k, i) < (rep[r][1], rep[r][0]):
            rep[r] = (i, k)
    roots = sorted(rep, key=lambda r: (rep[r][1], rep[r][0]))
    index = {r: j for j, r in enumerate(roots)}
    succ: list[Optional[int]] = []
    tags: list[Optional[str]] = []
    for r in roots:
        s = csucc[r]
        if s is None:
            succ.append(None)
            tags.append(FREE)
        else:
            rs = find(s)
            if rs == zero_root:
                succ.append(None)
                tags.append(ZERO)
            else:
                succ.append(index[rs])
                tags.append(None)
    labels = [(p.gens[rep[r][0]], rep[r][1]) for r in roots]
    keys = [(rep[r][1], rep[r][0]) for r in roots]
    graph, remap = _finalize(succ, tags, labels, keys)
    gens: list[Elem | None] = []
    for i in range(n):
        r = find(offset[i])
        gens.append(None if r == zero_root else remap[index[r]])
    return Compiled(graph, tuple(gens), p.gens)


def normalize(p: TPresentation) -> FunctionalGraph:
    return compile_presentation(p).graph


def to_presentation(G: FunctionalGraph) -> TPresentation:
    """Presentation with one generator per leaf (one per leafless cycle)."""
    preds = G.preds()
    starts = [v for v in G.vertices if not preds[v]]
    covered: set[int] = set()
    for v in starts:
        w = v
        while w is not None and w not in covered:
            covered.add(w)
            w = G.succ[w]
    for comp in G.components():
        if not any(v in covered for v in comp):
            starts.append(min(comp))
            w = min(comp)
            while w is not None and w not in covered:
                covered.add(w)
                w = G.succ[w]
    names = []
    used: set[str] = set()
    for v in starts:
        base = G.name((v, 0)).replace("^", "").replace("*", "_")
        name = base
        j = 1
        while name in used:
            j += 1
            name = f"{base}_{j}"
        used.add(name)
        names.append(name)
    first: dict[int, tuple[int, int]] = {}
    rels = []
    for gi, v in enumerate(starts):
        steps = 0
        w = v
        while True:
            if w in first:
                rels.append(Relation((gi, steps), first[w]))
                break
            first[w] = (gi, steps)
            s = G.succ[w]
            if s is None:
                if G.tags[w] == ZERO:
                    rels.append(Relation((gi, steps + 1), None))
                break
            w = s
            steps += 1
    return TPresentation(tuple(names), tuple(rels))


# ---------------------------------------------------------------------------
# components, classification and canonical forms


@dataclass(frozen=True)
class ComponentType:
    kind: int
    k: int | None = None

    def __str__(self) -> str:
        return f"Type3({self.k})" if self.kind == 3 else f"Type{self.kind}"


TYPE1 = ComponentType(1)
TYPE2 = ComponentType(2)


def Type3(k: int) -> ComponentType:
    return ComponentType(3, k)


@dataclass(frozen=True)
class ComponentInfo:
    vertices: tuple[int, ...]
    type: ComponentType
    root: int | None = None
    cycle: tuple[int, ...] = ()
    anchor: int | None = None
    period: int | None = None
    form: str = ""


def _cycle_of(G: FunctionalGraph, start: int) -> list[int]:
    seen: dict[int, int] = {}
    path = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = G.succ[v]
        if v is None:
            raise GraphError("walk reached a terminal inside a cyclic component")
    return path[seen[v]:]


def _labels(G: FunctionalGraph, preds, roots: Iterable[int], skip: Mapping[int, int]) -> dict[int, str]:
    """AHU labels of the in-trees hanging at ``roots``; ``skip[v]`` is an excluded child."""
    order = []
    queue = deque(roots)
    while queue:
        v = queue.popleft()
        order.append(v)
        for c in preds[v]:
            if skip.get(v) != c:
                queue.append(c)
    lab: dict[int, str] = {}
    for v in reversed(order):
        kids = sorted(lab[c] for c in preds[v] if skip.get(v) != c)
        lab[v] = "(" + "".join(kids) + ")"
    return lab


def component_info(G: FunctionalGraph, comp: Sequence[int], preds=None) -> ComponentInfo:
    if preds is None:
        preds = G.preds()
    terminals = [v for v in comp if G.succ[v] is None]
    if len(terminals) > 1:
        raise GraphError(f"component {list(comp)} has {len(terminals)} terminal vertices")
    if terminals:
        (root,) = terminals
        lab = _labels(G, preds, [root], {})
        if len(lab) != len(comp):
            raise GraphError(f"component {list(comp)} is not a single in-tree")
        if G.tags[root] == ZERO:
            return ComponentInfo(tuple(comp), TYPE1, root=root, form="T1" + lab[root])
        return ComponentInfo(tuple(comp), TYPE2, root=root, form="T2" + lab[root])
    cyc = _cycle_of(G, comp[0])
    k = len(cyc)
    skip = {cyc[(j + 1) % k]: cyc[j] for j in range(k)}
    lab = _labels(G, preds, cyc, skip)
    if len(lab) != len(comp):
        raise GraphError(f"component {list(comp)} is not a cycle with trees")
    seq = [lab[c] for c in cyc]
    best = min(range(k), key=lambda r: (seq[r:] + seq[:r], r))
    rot = seq[best:] + seq[:best]
    period = next(p for p in range(1, k + 1) if k % p == 0 and rot[p:] + rot[:p] == rot)
    form = "T3[" + ",".join(rot) + "]"
    return ComponentInfo(
        tuple(comp), Type3(k), cycle=tuple(cyc[best:] + cyc[:best]),
        anchor=cyc[best], period=period, form=form,
    )


def component_infos(G: FunctionalGraph) -> list[ComponentInfo]:
    preds = G.preds()
    return [component_info(G, comp, preds) for comp in G.components()]


def subgraph(G: FunctionalGraph, verts: Iterable[int]) -> FunctionalGraph:
    """The full subgraph on a succ-closed vertex set, renumbered in order."""
    verts = sorted(verts)
    new = {v: i for i, v in enumerate(verts)}
    succ = []
    for v in verts:
        s = G.succ[v]
        if s is not None and s not in new:
            raise SubmoduleError(f"vertex set is not closed under t (at {G.name((v, 0))})")
        succ.append(None if s is None else new[s])
    return FunctionalGraph(tuple(succ), tuple(G.tags[v] for v in verts), tuple(G.labels[v] for v in verts))


def decompose(G: FunctionalGraph) -> list[FunctionalGraph]:
    return [subgraph(G, comp) for comp in G.components()]


def classify(G: FunctionalGraph) -> ComponentType:
    comps = G.components()
    if len(comps) != 1:
        raise GraphError(f"classify expects a connected graph, got {len(comps)} components")
    return component_info(G, comps[0]).type


def canonical_form(G: FunctionalGraph) -> str:
    forms = sorted(info.form for info in component_infos(G))
    return "+".join(forms) if forms else "0"


def is_isomorphic(G: FunctionalGraph, H: FunctionalGraph) -> bool:
    return len(G) == len(H) and canonical_form(G) == canonical_form(H)


def direct_sum(G: FunctionalGraph, H: FunctionalGraph) -> FunctionalGraph:
    off = len(G)
    return FunctionalGraph(
        G.succ + tuple(None if s is None else s + off for s in H.succ),
        G.tags + H.tags,
        G.labels + H.labels,
    )


def direct_sum_all(graphs: Iterable[FunctionalGraph]) -> FunctionalGraph:
    out = EMPTY
    for g in graphs:
        out = direct_sum(out, g)
    return out


def tensor(P: TPresentation, Q: TPresentation) -> TPresentation:
    m = len(Q.gens)
    gens = tuple(f"{g}_{h}" for g in P.gens for h in Q.gens)
    rels = []
    for rel in P.rels:
        for l in range(m):
            lhs = (rel.lhs[0] * m + l, rel.lhs[1])
            rhs = None if rel.rhs is None else (rel.rhs[0] * m + l, rel.rhs[1])
            rels.append(Relation(lhs, rhs))
    for rel in Q.rels:
        for i in range(len(P.gens)):
            lhs = (i * m + rel.lhs[0], rel.lhs[1])
            rhs = None if rel.rhs is None else (i * m + rel.rhs[0], rel.rhs[1])
            rels.append(Relation(lhs, rhs))
    return TPresentation(gens, tuple(rels))


# ---------------------------------------------------------------------------
# localization at t


@dataclass(frozen=True)
class Orbit:
    kind: str
    anchor: int
    k: int | None = None
    period: int | None = None
    form: str = ""


@dataclass(frozen=True)
class ZOrbitData:
    """Orbits of M_t and the position of every vertex of M in its orbit."""

    orbits: tuple[Orbit, ...]
    positions: Mapping[int, tuple[int, int]] = field(compare=False)

    def signature(self) -> list[tuple]:
        return sorted(("line",) if o.kind == "line" else ("cycle", o.k) for o in self.orbits)

    def position(self, G: FunctionalGraph, e: Elem | None) -> tuple[int, int] | None:
        if e is None:
            return None
        v, h = e
        hit = self.positions.get(v)
        if hit is None:
            return None
        orbit, pos = hit
        o = self.orbits[orbit]
        pos += h
        return (orbit, pos % o.k if o.kind == "cycle" else pos)

    def orbit_of_anchor(self, anchor: int) -> int:
        for i, o in enumerate(self.orbits):
            if o.anchor == anchor:
                return i
        raise KeyError(anchor)


def _depths(G: FunctionalGraph, preds, roots: Iterable[int], skip: Mapping[int, int]) -> dict[int, int]:
    depth = {r: 0 for r in roots}
    queue = deque(depth)
    while queue:
        v = queue.popleft()
        for c in preds[v]:
            if skip.get(v) != c and c not in depth:
                depth[c] = depth[v] + 1
                queue.append(c)
    return depth


def localize(G: FunctionalGraph) -> ZOrbitData:
    preds = G.preds()
    orbits = []
    positions: dict[int, tuple[int, int]] = {}
    for info in component_infos(G):
        if info.type.kind == 1:
            continue
        idx = len(orbits)
        if info.type.kind == 2:
            orbits.append(Orbit("line", info.root, form=info.form))
            for v, d in _depths(G, preds, [info.root], {}).items():
                positions[v] = (idx, -d)
        else:
            cyc = info.cycle
            k = len(cyc)
            orbits.append(Orbit("cycle", info.anchor, k=k, period=info.period, form=info.form))
            skip = {cyc[(j + 1) % k]: cyc[j] for j in range(k)}
            for j, c in enumerate(cyc):
                for v, d in _depths(G, preds, [c], skip).items():
                    positions[v] = (idx, (j - d) % k)
    return ZOrbitData(tuple(orbits), positions)


# ---------------------------------------------------------------------------
# torsion


def torsion_vertices(G: FunctionalGraph) -> list[int]:
    out = []
    for info in component_infos(G):
        if info.type.kind == 1:
            out.extend(info.vertices)
    return sorted(out)


def torsion_submodule(G: FunctionalGraph) -> FunctionalGraph:
    return subgraph(G, torsion_vertices(G))


def length(G: FunctionalGraph) -> int | None:
    """Number of nonzero elements, or None if the module is infinite."""
    return len(G) if G.is_finite() else None


def torsion_length(G: FunctionalGraph) -> int:
    return len(torsion_vertices(G))


def annihilator(G: FunctionalGraph, e: Elem) -> int | None:
    """Least e with ``t^e * v = *`` (the ideal (t^e)); None for the zero ideal."""
    if e is None or not G.is_elem(e):
        raise SubmoduleError(f"{e!r} is not an element of the module")
    return G.zero_height(e)


# ---------------------------------------------------------------------------
# submodules and quotients


@dataclass(frozen=True)
class Submodule:
    """A t-closed subset: explicit vertices plus the start height of each tail.

    ``tails[f] = h`` means ``t^j f`` lies in the submodule for all j >= h.
    Every FREE vertex in ``vertices`` has tail start 0.
    """

    vertices: frozenset[int]
    tails: tuple[tuple[int, int], ...] = ()

    def tail_start(self, f: int) -> int | None:
        for v, h in self.tails:
            if v == f:
                return h
        return None

    def __contains__(self, e) -> bool:
        if e is None:
            return True
        v, h = e
        if h == 0:
            return v in self.vertices
        start = self.tail_start(v)
        return start is not None and h >= start

    def is_empty(self) -> bool:
        return not self.vertices and not self.tails


def closure(G: FunctionalGraph, elems: Iterable[Elem | None]) -> Submodule:
    """The submodule generated by ``elems``."""
    verts: set[int] = set()
    tails: dict[int, int] = {}
    for e in elems:
        if e is None:
            continue
        if not G.is_elem(e):
            raise SubmoduleError(f"{e!r} is not an element of the module")
        v, h = e
        if h > 0:
            tails[v] = min(tails.get(v, h), h)
            continue
        while v is not None and v not in verts:
            verts.add(v)
            if G.is_free(v):
                tails[v] = 0
            v = G.succ[v]
    return Submodule(frozenset(verts), tuple(sorted(tails.items())))


def check_submodule(G: FunctionalGraph, sub: Submodule) -> None:
    for v in sub.vertices:
        s = G.succ[v]
        if s is not None and s not in sub.vertices:
            raise SubmoduleError(f"{G.name((v, 0))} lies in the subset but t*{G.name((v, 0))} does not")
        if G.is_free(v) and sub.tail_start(v) != 0:
            raise SubmoduleError(f"the tail of {G.name((v, 0))} is missing from the subset")
    for f, h in sub.tails:
        if not G.is_free(f):
            raise SubmoduleError(f"tail recorded on non-FREE vertex {f}")


def submodule_graph(G: FunctionalGraph, sub: Submodule) -> tuple[FunctionalGraph, list[Elem]]:
    """Graph of a submodule and the inclusion (image of each new vertex)."""
    check_submodule(G, sub)
    verts = sorted(sub.vertices)
    index = {v: i for i, v in enumerate(verts)}
    succ, tags, labels, back = [], [], [], []
    for v in verts:
        s = G.succ[v]
        succ.append(None if s is None else index[s])
        tags.append(G.tags[v])
        labels.append(G.labels[v])
        back.append((v, 0))
    for f, h in sub.tails:
        if h == 0:
            continue
        succ.append(None)
        tags.append(FREE)
        labels.append((G.labels[f][0], G.labels[f][1] + h))
        back.append((f, h))
    graph, remap = _finalize(succ, tags, labels)
    images: list[Elem] = [None] * len(graph)
    for old, (v, h) in enumerate(remap):
        if h == 0:
            images[v] = back[old]
    return graph, images


def submodule_generated(G: FunctionalGraph, elems: Iterable[Elem | None]) -> FunctionalGraph:
    return submodule_graph(G, closure(G, elems))[0]


def quotient_graph(
    G: FunctionalGraph, sub: Submodule
) -> tuple[FunctionalGraph, list[Elem | None], list[Elem]]:
    """G / sub.

    Returns the quotient graph, the projection of every vertex of G, and for
    every vertex of the quotient one preimage in G.
    """
    check_submodule(G, sub)
    keep = [v for v in G.vertices if v not in sub.vertices]
    index = {v: i for i, v in enumerate(keep)}
    succ, tags, labels, back = [], [], [], []
    for v in keep:
        s = G.succ[v]
        if s is None:
            succ.append(None)
            tags.append(G.tags[v])
        elif s in sub.vertices:
            succ.append(None)
            tags.append(ZERO)
        else:
            succ.append(index[s])
            tags.append(None)
        labels.append(G.labels[v])
        back.append((v, 0))
    for v in keep:
        if not G.is_free(v):
            continue
        h = sub.tail_start(v)
        if h is None:
            continue
        # t^j v for 0 < j < h survive; t^h v dies
        prev = index[v]
        if h == 1:
            tags[prev] = ZERO
            continue
        tags[prev] = None
        for j in range(1, h):
            cur = len(succ)
            succ[prev] = cur
            succ.append(None)
            tags.append(None)
            labels.append((G.labels[v][0], G.labels[v][1] + j))
            back.append((v, j))
            prev = cur
        tags[prev] = ZERO
    graph, remap = _finalize(succ, tags, labels)
    proj: list[Elem | None] = [None if v in sub.vertices else remap[index[v]] for v in G.vertices]
    pre: list[Elem] = [None] * len(graph)
    for old, (v, h) in enumerate(remap):
        if h == 0:
            pre[v] = back[old]
    return graph, proj, pre


def quotient(G: FunctionalGraph, sub: Submodule) -> FunctionalGraph:
    return quotient_graph(G, sub)[0]


def project(G: FunctionalGraph, sub: Submodule, proj: Sequence[Elem | None], Q: FunctionalGraph, e: Elem | None):
    """Image of an element of G in G / sub."""
    if e is None or e in sub:
        return None
    v, h = e
    return Q.act(proj[v], h)


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True)
class TModMap:
    """A t-equivariant map; ``images[v]`` is the image of vertex v.

    Images of tail elements follow by equivariance.
    """

    source: FunctionalGraph
    target: FunctionalGraph
    images: tuple[Elem | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != len(self.source):
            raise MapError("one image per source vertex is required")

    def __call__(self, e: Elem | None) -> Elem | None:
        if e is None:
            return None
        v, h = e
        return self.target.act(self.images[v], h)


def map_check(f: TModMap) -> None:
    """Raise :class:`MapError` naming the first vertex where f(t*v) != t*f(v)."""
    S, T = f.source, f.target
    for v in S.vertices:
        img = f.images[v]
        if not T.is_elem(img):
            raise MapError(f"image of {S.name((v, 0))} is not an element of the target", v)
        s = S.succ[v]
        if s is not None:
            ok = f.images[s] == T.act(img)
        elif S.tags[v] == ZERO:
            ok = T.act(img) is None
        else:
            ok = True
        if not ok:
            raise MapError(f"map is not t-equivariant at {S.name((v, 0))}", v)


def identity_map(G: FunctionalGraph) -> TModMap:
    return TModMap(G, G, tuple((v, 0) for v in G.vertices))


def compose(g: TModMap, f: TModMap) -> TModMap:
    return TModMap(f.source, g.target, tuple(g(e) for e in f.images))


def kernel(f: TModMap) -> Submodule:
    map_check(f)
    S = f.source
    verts = set()
    tails = {}
    for v in S.vertices:
        img = f.images[v]
        if img is None:
            verts.add(v)
            if S.is_free(v):
                tails[v] = 0
        elif S.is_free(v):
            h = f.target.zero_height(img)
            if h is not None:
                tails[v] = h
    return Submodule(frozenset(verts), tuple(sorted(tails.items())))


def image(f: TModMap) -> Submodule:
    map_check(f)
    return closure(f.target, f.images)


def kernel_graph(f: TModMap) -> FunctionalGraph:
    return submodule_graph(f.source, kernel(f))[0]


def image_graph(f: TModMap) -> FunctionalGraph:
    return submodule_graph(f.target, image(f))[0]


def cokernel(f: TModMap) -> FunctionalGraph:
    return quotient(f.target, image(f))


def is_injective(f: TModMap) -> bool:
    """Injective as a map of pointed sets (not merely trivial kernel).

    Two forward orbits of the target that meet do so within len(target)
    steps, so tail heights beyond that bound add no new collisions.
    """
    if not kernel(f).is_empty():
        return False
    seen = set()
    for e in explicit_elements(f.source, len(f.target) + 2):
        img = f(e)
        if img is None or img in seen:
            return False
        seen.add(img)
    return True


def is_surjective(f: TModMap) -> bool:
    return len(cokernel(f)) == 0


# ---------------------------------------------------------------------------
# brute-force helpers used by property checks


def explicit_elements(G: FunctionalGraph, height: int) -> list[Elem]:
    """All vertices plus tail elements up to the given height."""
    out: list[Elem] = [(v, 0) for v in G.vertices]
    for v in G.vertices:
        if G.is_free(v):
            out.extend((v, h) for h in range(1, height + 1))
    return out


def iter_orbit(G: FunctionalGraph, e: Elem | None, steps: int) -> Iterator[Elem | None]:
    for _ in range(steps):
        yield e
        e = G.act(e)


def form_counter(graphs: Iterable[FunctionalGraph]) -> Counter:
    return Counter(canonical_form(g) for g in graphs)
