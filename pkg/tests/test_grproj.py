import math

import pytest

from monoproj import generators, grproj, p1sheaf, worked_examples, tmod
from monoproj.grproj import GradedError, GradedPresentation, GRelation
from monoproj.p1sheaf import SheafError


def torsion_pair():
    """T_0 + T_inf: one point at each pole."""
    T0 = worked_examples.torsion_at_zero()
    Tinf = p1sheaf.P1Sheaf(tmod.EMPTY, T0.plus, ())
    return p1sheaf.direct_sum(T0, Tinf)


@pytest.mark.parametrize("n", range(-4, 8))
def test_line_bundle_shift_and_sections(n):
    O = grproj.line_bundle(n)
    assert O.glue[0].shift == n
    assert len(p1sheaf.global_sections(O)) == max(n + 1, 0)
    assert p1sheaf.is_locally_free(O) and p1sheaf.rank(O) == 1


def test_non_homogeneous_relation_rejected():
    with pytest.raises(GradedError):
        GradedPresentation(2, ("g", "h"), (0, 1), (GRelation((0, (1, 0)), (1, (1, 0))),))


def test_presentation_validation():
    with pytest.raises(GradedError):
        GradedPresentation(1, ("g",), (0,))
    with pytest.raises(GradedError):
        GradedPresentation(2, ("g", "g"), (0, 0))
    with pytest.raises(GradedError):
        GradedPresentation(2, ("g",), (0,), (GRelation((0, (-1, 1)), None),))


def test_degree_zero_localization_drops_the_inverted_variable():
    M = GradedPresentation(2, ("g", "h"), (0, 0), (GRelation((0, (1, 2)), (1, (3, 0))),))
    p0 = grproj.degree_zero_localization(M, 0)
    assert p0.rels[0] == tmod.Relation((0, 2), (1, 0))
    p1 = grproj.degree_zero_localization(M, 1)
    assert p1.rels[0] == tmod.Relation((0, 1), (1, 3))


def test_shift_commutes_with_twist(rng):
    for _ in range(40):
        M = generators.random_graded(rng)
        F = grproj.sheafify(M)
        for n in (-2, 1, 3):
            assert p1sheaf.is_isomorphic(grproj.sheafify(grproj.shift(M, n)), p1sheaf.twist(F, n))


def test_generator_killed_on_one_chart():
    # x1 g = 0 kills g on U1 after one step; on U2 x1 is a unit, so g vanishes there
    M = GradedPresentation(2, ("g",), (0,), (GRelation((0, (0, 1)), None),))
    F = grproj.sheafify(M)
    assert p1sheaf.is_torsion(F)
    assert (len(F.plus), len(F.minus)) == (1, 0)


@pytest.mark.parametrize("d", [-3, 0, 2, 5])
def test_truncation_gives_same_sheaf(rng, d):
    for _ in range(15):
        M = generators.random_graded(rng)
        T = grproj.truncation_presentation(M, d)
        assert min(T.degrees, default=d) >= d
        assert p1sheaf.is_isomorphic(grproj.sheafify(T), grproj.sheafify(M))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_truncated_free_module_counts(r):
    M = grproj.free_module(r, 0)
    T = grproj.truncate(M, 0, 6)
    for n in range(0, 7):
        assert T.count(n) == math.comb(n + r, r)


def test_truncation_with_relation():
    # x0 g = x1 g: degree n has one class
    M = GradedPresentation(2, ("g",), (0,), (GRelation((0, (1, 0)), (0, (0, 1))),))
    T = grproj.truncate(M, 0, 5)
    assert [T.count(n) for n in range(6)] == [1] * 6
    assert T.action[(0, 0)] == T.action[(0, 1)] == (0,)


def test_truncation_zero_relation():
    M = GradedPresentation(2, ("g",), (0,), (GRelation((0, (2, 0)), None),))
    T = grproj.truncate(M, 0, 3)
    # monomials not divisible by x0^2
    assert [T.count(n) for n in range(4)] == [1, 2, 2, 2]


def test_gamma_star_of_line_bundle():
    O = grproj.line_bundle(0)
    secs = grproj.gamma_star_sections(O, -2, 4)
    assert [len(secs[n]) for n in range(-2, 5)] == [0, 0, 1, 2, 3, 4, 5]
    G = grproj.gamma_star(O, 4)
    assert p1sheaf.is_isomorphic(grproj.sheafify(G), O)


def test_unsaturated_truncation_misses_torsion_identifications():
    F = torsion_pair()
    D = grproj.beta_start(F)
    assert not p1sheaf.is_isomorphic(grproj.sheafify(grproj.gamma_star(F, D)), F)
    assert grproj.beta_check(F).ok


def test_beta_check_fixtures():
    for name, F in worked_examples.fixture_sheaves().items():
        res = grproj.beta_check(F)
        assert res, name
        assert res.tried[0] == grproj.beta_start(F)


def test_beta_check_cap_reports_failure():
    # O(-3) has no sections in degrees [0, 0]
    res = grproj.beta_check(grproj.line_bundle(-3), D=0, cap=0)
    assert not res and res.tried == (0,)
    assert grproj.beta_check(grproj.line_bundle(-3), D=1, cap=64).ok


@pytest.mark.parametrize("m", range(-4, 5))
def test_global_generation_of_line_bundles(m):
    gen = grproj.global_generation(grproj.line_bundle(m))
    assert gen.n0 == -m
    assert len(gen.sections) == 1
    f = grproj.quotient_presentation(grproj.line_bundle(m), gen.n0, gen.sections)
    assert p1sheaf.is_isomorphic(f.source, grproj.line_bundle(m))


def test_quotient_presentation_rejects_non_generating():
    O2 = grproj.line_bundle(2)
    secs = p1sheaf.global_sections(O2)
    # x0^2 alone does not generate O(2) from O
    with pytest.raises(SheafError):
        grproj.quotient_presentation(O2, 0, secs[:1])
    f = grproj.quotient_presentation(O2, 0, secs)
    assert len(f.source.plus) == 3


def test_quotient_presentation_rejects_non_sections():
    O = grproj.line_bundle(0)
    with pytest.raises(SheafError):
        grproj.quotient_presentation(O, 0, [p1sheaf.GlobalSection((0, 1), (0, 0))])


def test_generation_example_7_2():
    for n in range(1, 4):
        G = worked_examples.g_n(n)
        gen = grproj.global_generation(G)
        assert grproj.generated_by_sections(p1sheaf.twist(G, gen.n0))
        assert not grproj.generated_by_sections(p1sheaf.twist(G, gen.n0 - 1))


def test_gamma_On_counts():
    for r in range(1, 4):
        for n in range(0, 10):
            assert len(grproj.gamma_On(r + 1, n)) == math.comb(n + r, r)
    assert grproj.gamma_On(2, -1) == []


def test_chart_view_free_module_r2():
    M = grproj.free_module(2, 0)
    v = grproj.chart_view(M, 1, depth=3)
    # monomials in two chart coordinates of degree <= 3 are all distinct
    assert v.distinct() == len(v.elements) == 10


def test_chart_view_relation_identifies():
    # x0 g = x1 g on the chart x2 != 0 identifies x0/x2 and x1/x2 multiples of g
    M = GradedPresentation(3, ("g",), (0,), (GRelation((0, (1, 0, 0)), (0, (0, 1, 0))),))
    v = grproj.chart_view(M, 2, depth=2)
    assert v.distinct() == 3


def test_proj_sheaf():
    M = grproj.free_module(1, 2)
    P = grproj.proj_sheaf(M)
    assert p1sheaf.is_isomorphic(P.sheaf, grproj.line_bundle(2))
    Q = grproj.proj_sheaf(grproj.free_module(2, 0), depth=2)
    assert Q.sheaf is None and len(Q.charts) == 3


def test_sheafify_needs_two_variables():
    with pytest.raises(GradedError):
        grproj.sheafify(grproj.free_module(2, 0))
