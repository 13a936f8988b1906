import json
from fractions import Fraction

import pytest
import sympy

import oracles
from monoproj import basechange, generators, grproj, p1sheaf, worked_examples, tmod
from monoproj.basechange import QQ, FieldCtx, FieldError

F5 = FieldCtx(5)


def test_field_parse():
    assert FieldCtx.parse("q") == QQ
    assert FieldCtx.parse("F7").p == 7
    for bad in ("f4", "f1", "r", "f"):
        with pytest.raises(FieldError):
            FieldCtx.parse(bad)


def test_field_arithmetic():
    assert F5.inv(2) == 3
    assert QQ.inv(Fraction(2, 3)) == Fraction(3, 2)
    with pytest.raises(ZeroDivisionError):
        F5.inv(0)


def test_rref_matches_sympy(rng):
    for _ in range(50):
        rows = [[rng.randint(-3, 3) for _ in range(6)] for _ in range(rng.randint(1, 5))]
        assert basechange.rank(QQ, rows, 6) == sympy.Matrix(rows).rank()
        for v in basechange.nullspace(QQ, rows, 6):
            assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)


def test_rank_mod_p_can_drop():
    rows = [[1, 2], [3, 1]]
    assert basechange.rank(QQ, rows, 2) == 2
    assert basechange.rank(F5, rows, 2) == 1


def test_two_branch_sheaf_kernel_vector():
    F = worked_examples.two_branch_sheaf()
    for K in (QQ, F5, FieldCtx(2)):
        r = basechange.phi_K(F, K)
        assert r.dim == 3 and r.rank == 3 and r.surjective
        (v,) = r.kernel
        named = dict(zip((F.section_name(s) for s in r.sections), v))
        # (a,a) - (a,b) - (b,a) + (b,b)
        want = {"(a, a)": 1, "(a, b)": -1, "(b, a)": -1, "(b, b)": 1}
        assert all(K.norm(named[k] - K(w) * named["(a, a)"]) == 0 for k, w in want.items())


def test_two_branch_sheaf_basis_described():
    F = worked_examples.two_branch_sheaf()
    r = basechange.phi_K(F)
    data = basechange.report_json(F, r)
    assert data["dim"] == 3 and data["kernel_dim"] == 1 and data["sections"] == 4
    assert json.loads(json.dumps(data["kernel"])) == [[["(a, a)", "1"], ["(a, b)", "-1"], ["(b, a)", "-1"], ["(b, b)", "1"]]]


@pytest.mark.parametrize("n", range(1, 8))
def test_g_n_over_a_field(n):
    G = worked_examples.g_n(n)
    r = basechange.phi_K(G)
    assert r.dim == 2
    assert r.kernel_dim == 0
    # for n = 1 both a and b meet c on the overlap; otherwise only a does
    assert len(r.sections) == (2 if n == 1 else 1)
    assert r.surjective == (n == 1)


@pytest.mark.parametrize("n", range(-2, 6))
def test_line_bundle_over_a_field(n):
    r = basechange.phi_K(grproj.line_bundle(n))
    assert r.dim == max(n + 1, 0)
    assert r.surjective


def test_dim_matches_brute_force_at_three_heights(rng):
    for _ in range(25):
        F = generators.random_sheaf(rng)
        base = max(len(F.plus), len(F.minus)) + max((abs(g.shift) for g in F.glue), default=0) + 2
        dim = basechange.gamma_K(F).dim
        assert {oracles.brute_gamma_K_dim(F, base + k) for k in (0, 2, 5)} == {dim}


def test_field_independence(rng):
    # every equation has at most one entry per unknown with coefficient +-1
    for _ in range(30):
        F = generators.random_sheaf(rng)
        dims = {basechange.gamma_K(F, K).dim for K in (QQ, F5, FieldCtx(2))}
        assert len(dims) == 1


def test_linear_dim():
    G = tmod.normalize(tmod.TPresentation.build(["a", "b"], [(0, 2), (1, 1, 0, 1)]))
    assert basechange.linear_dim(G) == 3
    with pytest.raises(FieldError):
        basechange.linear_dim(tmod.normalize(tmod.free_presentation(1)))


def test_phi_columns_are_sections(rng):
    for _ in range(20):
        F = generators.random_sheaf(rng)
        r = basechange.phi_K(F)
        assert len(r.sections) == len(p1sheaf.global_sections(F))
        assert r.rank <= r.dim
