"""Random modules and sheaves for property tests and the acceptance suite."""

from __future__ import annotations

import os
import random

from . import p1sheaf, tmod
from .grproj import GRelation, GradedPresentation, sheafify
from .monoid import monomials
from .p1sheaf import Glue, P1Sheaf


def seed_from_env(default: int = 20260101) -> int:
    raw = os.environ.get("MONOPROJ_SEED")
    return int(raw) if raw not in (None, "") else default


def rng(offset: int = 0) -> random.Random:
    return random.Random(seed_from_env() + offset)


def random_presentation(r: random.Random, max_gens: int = 8, max_exp: int = 10, max_rels: int | None = None) -> tmod.TPresentation:
    n = r.randint(1, max_gens)
    gens = [f"g{i}" for i in range(n)]
    nrels = r.randint(0, max_rels if max_rels is not None else n + 1)
    rels = []
    for _ in range(nrels):
        i, a = r.randrange(n), r.randint(0, max_exp)
        if r.random() < 0.15:
            rels.append((i, a))
        else:
            rels.append((i, a, r.randrange(n), r.randint(0, max_exp)))
    return tmod.TPresentation.build(gens, rels)


def random_graph(r: random.Random, max_gens: int = 4, max_exp: int = 4) -> tmod.FunctionalGraph:
    return tmod.normalize(random_presentation(r, max_gens, max_exp))


def random_graded(r: random.Random, max_gens: int = 3, max_deg: int = 3, max_rels: int = 3) -> GradedPresentation:
    """A random homogeneous presentation over <x0, x1>."""
    n = r.randint(1, max_gens)
    degrees = [r.randint(-max_deg, max_deg) for _ in range(n)]
    rels = []
    for _ in range(r.randint(0, max_rels)):
        i, j = r.randrange(n), r.randrange(n)
        e = max(degrees[i], degrees[j]) + r.randint(0, 3)
        a = r.choice(list(monomials(2, e - degrees[i])))
        if r.random() < 0.15:
            rels.append(GRelation((i, a), None))
        else:
            b = r.choice(list(monomials(2, e - degrees[j])))
            rels.append(GRelation((i, a), (j, b)))
    return GradedPresentation(2, tuple(f"g{i}" for i in range(n)), tuple(degrees), tuple(rels))


def random_sheaf_graded(r: random.Random, **kw) -> P1Sheaf:
    return sheafify(random_graded(r, **kw))


def _component(r: random.Random, kind: int, max_exp: int = 3) -> tmod.FunctionalGraph:
    """A random indecomposable chart module of the given type."""
    while True:
        G = random_graph(r, max_gens=3, max_exp=max_exp)
        comps = tmod.component_infos(G)
        hits = [c for c in comps if c.type.kind == kind]
        if hits:
            return tmod.subgraph(G, hits[0].vertices)


def random_sheaf_assembled(r: random.Random, max_parts: int = 3, max_shift: int = 4) -> P1Sheaf:
    """A direct sum of random indecomposables of all four shapes."""
    parts = []
    for _ in range(r.randint(1, max_parts)):
        shape = r.choice((1, 2, 3, 3, 4))
        if shape == 1:
            parts.append(P1Sheaf(_component(r, 1), tmod.EMPTY, ()))
        elif shape == 2:
            parts.append(P1Sheaf(tmod.EMPTY, _component(r, 1), ()))
        elif shape == 3:
            gp, gm = _component(r, 2), _component(r, 2)
            ap, am = tmod.localize(gp).orbits[0].anchor, tmod.localize(gm).orbits[0].anchor
            parts.append(p1sheaf.assemble(gp, gm, [Glue("line", ap, am, r.randint(-max_shift, max_shift))]))
        else:
            gp = _component(r, 3)
            k = tmod.localize(gp).orbits[0].k
            gm = None
            for _ in range(50):
                cand = _component(r, 3)
                if tmod.localize(cand).orbits[0].k == k:
                    gm = cand
                    break
            if gm is None:
                gm = gp
            ap, am = tmod.localize(gp).orbits[0].anchor, tmod.localize(gm).orbits[0].anchor
            parts.append(p1sheaf.assemble(gp, gm, [Glue("cycle", ap, am, r.randrange(k), k)]))
    return p1sheaf.direct_sum_all(parts)


def random_sheaf(r: random.Random) -> P1Sheaf:
    """Alternate between sheafified graded modules and assembled sums."""
    if r.random() < 0.5:
        return random_sheaf_graded(r)
    return random_sheaf_assembled(r)
