import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from monoproj import generators, tmod
from monoproj.tmod import (
    FREE, ZERO, PresentationError, Submodule, TModMap, TPresentation, Type3,
)


def pres(gens, rels=()):
    return TPresentation.build(gens, rels)


def ladder(n):
    return tmod.normalize(pres(["a", "b"], [(0, n, 1, 1)]))


def test_free_module():
    G = tmod.normalize(tmod.free_presentation(1))
    assert len(G) == 1 and G.tags == (FREE,)
    assert str(tmod.classify(G)) == "Type2"


def test_zero_relation_gives_type1():
    G = tmod.normalize(pres(["a"], [(0, 3)]))
    assert len(G) == 3
    assert str(tmod.classify(G)) == "Type1"
    assert tmod.annihilator(G, (0, 0)) == 3


def test_cycle():
    G = tmod.normalize(pres(["a"], [(0, 3, 0, 0)]))
    assert tmod.classify(G) == Type3(3)
    assert tmod.canonical_form(G) == "T3[(),(),()]"


def test_cycle_with_offset():
    # t^5 a = t^2 a: a tail of length 2 into a 3-cycle
    G = tmod.normalize(pres(["a"], [(0, 5, 0, 2)]))
    assert tmod.classify(G) == Type3(3)
    assert len(G) == 5


def test_ladder_shape():
    G = ladder(3)
    assert str(tmod.classify(G)) == "Type2"
    names = G.element_names()
    assert names == ["a", "b", "t*a", "t*b", "t^2*a"]
    data = tmod.localize(G)
    assert data.position(G, (names.index("a"), 0))[1] == -3
    assert data.position(G, (names.index("b"), 0))[1] == -1


def test_retraction_merges_single_predecessor_free_vertex():
    # t^2 a is FREE with one predecessor in the raw closure; it is merged away
    G = tmod.normalize(pres(["a"], [(0, 2, 0, 2)]))
    assert len(G) == 1


def test_zero_dominates_cycle():
    # a = t^2 a = t (t a) = 0
    G = tmod.normalize(pres(["a"], [(0, 2, 0, 0), (0, 1)]))
    assert len(G) == 0


def test_negative_exponent_rejected():
    with pytest.raises(PresentationError):
        pres(["a"], [(0, -1, 0, 0)])


def test_duplicate_generators_rejected():
    with pytest.raises(PresentationError):
        TPresentation(("a", "a"))


def test_generator_can_vanish():
    c = tmod.compile_presentation(pres(["a"], [(0, 0)]))
    assert c.element("a") is None
    assert len(c.graph) == 0


def test_to_presentation_round_trip(rng):
    for _ in range(200):
        G = generators.random_graph(rng, 5, 6)
        H = tmod.normalize(tmod.to_presentation(G))
        assert tmod.canonical_form(G) == tmod.canonical_form(H)


def test_classification_and_localization(rng):
    for _ in range(200):
        G = generators.random_graph(rng, 6, 8)
        infos = tmod.component_infos(G)
        data = tmod.localize(G)
        lines = sum(1 for c in infos if c.type.kind == 2)
        cycles = sorted(c.type.k for c in infos if c.type.kind == 3)
        assert sum(1 for o in data.orbits if o.kind == "line") == lines
        assert sorted(o.k for o in data.orbits if o.kind == "cycle") == cycles


def test_positions_respect_action(rng):
    """t^i x = t^j y forces pos(x) + i = pos(y) + j."""
    for _ in range(100):
        G = generators.random_graph(rng, 4, 5)
        data = tmod.localize(G)
        vs = list(G.vertices)
        for x in vs:
            for y in vs:
                for i in range(len(G) + 1):
                    for j in range(len(G) + 1):
                        ex, ey = G.act((x, 0), i), G.act((y, 0), j)
                        if ex is not None and ex == ey:
                            px, py = data.position(G, (x, 0)), data.position(G, (y, 0))
                            if px is None:
                                # torsion is invisible to the localization
                                assert py is None
                                continue
                            o = data.orbits[px[0]]
                            if o.kind == "line":
                                assert px[1] + i == py[1] + j
                            else:
                                assert (px[1] + i - py[1] - j) % o.k == 0


def test_canonical_form_matches_brute_iso():
    r = random.Random(7)
    comps = []
    for _ in range(150):
        for c in tmod.decompose(generators.random_graph(r, 4, 4)):
            if len(c) <= 7:
                comps.append(c)
    for i, c in enumerate(comps):
        assert oracles.brute_iso(c, oracles.relabel(c, r))
        for d in comps[i + 1:i + 6]:
            assert tmod.is_isomorphic(c, d) == oracles.brute_iso(c, d)


def test_decompose_and_direct_sum():
    G = tmod.direct_sum(ladder(2), tmod.normalize(pres(["a"], [(0, 2)])))
    parts = tmod.decompose(G)
    assert len(parts) == 2
    assert tmod.is_isomorphic(tmod.direct_sum_all(parts), G)


def test_tensor_with_free_is_identity(rng):
    one = tmod.free_presentation(1)
    for _ in range(50):
        p = generators.random_presentation(rng, 3, 4)
        T = tmod.normalize(tmod.tensor(p, one))
        assert tmod.is_isomorphic(T, tmod.normalize(p))


def test_tensor_matches_brute_force_small():
    mods = oracles.finite_modules(3)
    for G in mods:
        for H in mods:
            T = tmod.normalize(tmod.tensor(tmod.to_presentation(G), tmod.to_presentation(H)))
            assert tmod.is_isomorphic(T, oracles.brute_tensor(G, H))


def test_torsion():
    G = tmod.direct_sum(ladder(2), tmod.normalize(pres(["a"], [(0, 2)])))
    assert tmod.torsion_length(G) == 2
    assert str(tmod.classify(tmod.torsion_submodule(G))) == "Type1"
    assert tmod.length(G) is None
    assert tmod.length(tmod.torsion_submodule(G)) == 2


def test_closure_and_quotient():
    G = ladder(3)
    idx = G.vertex_by_name()
    sub = tmod.closure(G, [(idx["a"], 0)])
    assert (idx["t^2*a"], 0) in sub
    assert (idx["b"], 0) not in sub
    Q = tmod.quotient(G, sub)
    assert len(Q) == 1
    assert str(tmod.classify(Q)) == "Type1"


def test_closure_of_tail_element():
    G = tmod.normalize(tmod.free_presentation(1))
    sub = tmod.closure(G, [(0, 2)])
    assert sub.vertices == frozenset() and sub.tail_start(0) == 2
    Q = tmod.quotient(G, sub)
    assert len(Q) == 2 and str(tmod.classify(Q)) == "Type1"


def test_maps_kernel_image():
    G = ladder(2)
    F = tmod.normalize(tmod.free_presentation(1))
    idx = G.vertex_by_name()
    # the free module onto the orbit of a
    f = TModMap(F, G, ((idx["a"], 0),))
    tmod.map_check(f)
    assert tmod.is_injective(f)
    assert not tmod.is_surjective(f)
    assert tmod.kernel(f).is_empty()
    im = tmod.image(f)
    assert (idx["b"], 0) not in im
    C = tmod.cokernel(f)
    assert len(C) == 1


def test_map_check_rejects_non_equivariant():
    G = tmod.normalize(pres(["a"], [(0, 1)]))
    F = tmod.normalize(tmod.free_presentation(1))
    # free generator cannot go to an element killed by t and stay injective, but it is a map
    f = TModMap(F, G, ((0, 0),))
    tmod.map_check(f)
    assert not tmod.is_injective(f)
    # a torsion element cannot map to a free one
    g = TModMap(G, F, ((0, 0),))
    with pytest.raises(tmod.MapError):
        tmod.map_check(g)


def test_identity_and_compose(rng):
    G = generators.random_graph(rng)
    i = tmod.identity_map(G)
    assert tmod.compose(i, i).images == i.images
    assert tmod.is_injective(i) and tmod.is_surjective(i)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6))
def test_ladder_family_pairwise_distinct(n, m):
    assert tmod.is_isomorphic(ladder(n), ladder(m)) == (n == m)


def test_submodule_check():
    G = ladder(2)
    with pytest.raises(tmod.SubmoduleError):
        tmod.check_submodule(G, Submodule(frozenset({0})))


def test_zero_tagged_vertices():
    G = tmod.normalize(pres(["a"], [(0, 2)]))
    assert G.tags.count(ZERO) == 1
