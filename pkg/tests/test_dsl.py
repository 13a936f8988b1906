import json

import pytest

from monoproj import dsl, p1sheaf, worked_examples, tmod
from monoproj.cli import fixture_dir

FIXTURES = sorted(fixture_dir().glob("*.mp"))

LADDER = """
tmodule M {
  gens a, b;
  rels { t^3*a = t*b; }
}
classify M;
"""


def codes(text):
    with pytest.raises(dsl.DslError) as info:
        list(dsl.run(dsl.parse(text)))
    return [d.code for d in info.value.diagnostics]


def eval_code(text):
    with pytest.raises(dsl.EvalError) as info:
        dsl.evaluate(text)
    return info.value.diagnostic.code


def test_classify_ladder():
    _, results = dsl.evaluate(LADDER)
    assert results == [{"command": "classify", "name": "M", "type": "Type2"}]


def test_comments_and_empty_gens():
    _, results = dsl.evaluate("# note\ntmodule Z { gens; } // trailing\nclassify Z;")
    assert results[0]["type"] == "zero"


def test_two_branch_sheaf_commands():
    _, results = dsl.evaluate(worked_examples.script_text("two_branch"))
    by = {r["command"]: r for r in results}
    assert by["gamma"]["count"] == 4
    assert by["basechange"]["dim"] == 3 and by["basechange"]["kernel_dim"] == 1


def test_sheaf_from_graded_module():
    text = "gmodule N { gens e:-2; }\nsheaf O2 on P1 from N;\ngamma O2;"
    _, results = dsl.evaluate(text)
    assert results[0]["count"] == 3


def test_twist_binding():
    text = worked_examples.g_n_text(2) + "twist G 3 as G3;\ngamma G3;\niso G G3;"
    env, results = dsl.evaluate(text)
    assert results[0]["bound"] == "G3"
    assert p1sheaf.is_isomorphic(env.sheaves["G3"], p1sheaf.twist(env.sheaves["G"], 3))
    assert results[2]["iso"] is False


def test_cycle_glue_item():
    text = """
tmodule C { gens a; rels { t^3*a = a; } }
sheaf F on P1 { plus C; minus C; glue { cycle 3 a ~ a shift 1; } }
classify F;
"""
    _, results = dsl.evaluate(text)
    assert results[0]["shapes"] == [4]


def test_points():
    _, results = dsl.evaluate("monoid A = <x0, x1>;\npoints A;\npoints 3;")
    assert results[0]["count"] == 3 and results[0]["points"] == ["(0)", "(x0)", "(x1)"]
    assert results[1]["count"] == 15


@pytest.mark.parametrize("text", [
    "tmodule M { gens a }",
    "tmodule M { gens a; rels { t^*a = a; } }",
    "frobnicate M;",
    "tmodule M { gens a; } $",
    "sheaf F on P1 { plus M; glue { } }",
])
def test_syntax_errors(text):
    assert codes(text) == ["E001"]


def test_diagnostic_span():
    with pytest.raises(dsl.DslError) as info:
        dsl.parse("tmodule M {\n  gens a\n}")
    d = info.value.diagnostics[0]
    assert d.span.line == 3
    assert d.format("x.mp").startswith("x.mp:3:")
    assert d.to_json()["code"] == "E001"


@pytest.mark.parametrize("text", [
    "classify M;",
    "tmodule M { gens a; rels { t*b = a; } }",
    "tmodule M { gens a; }\nsheaf F on P1 { plus M; minus N; glue { line a ~ a shift 0; } }",
    "tmodule M { gens a; }\nsheaf F on P1 { plus M; minus M; glue { line a ~ z shift 0; } }",
    "gmodule N over B { gens e:0; }",
])
def test_undeclared(text):
    assert "E002" in codes(text)


@pytest.mark.parametrize("text", [
    "tmodule M { gens a; rels { t^-1*a = a; } }",
    "tmodule M { gens a; }\niso M;",
    "tmodule M { gens a; }\ngamma M;",
    "gmodule N { gens g:0, h:1; rels { x0*g = x0*h; } }",
    "tmodule M { gens a; }\nsheaf F on P2 { plus M; minus M; glue { } }",
    "tmodule M { gens a; }\nsheaf F on P1 { plus M; minus M; glue { line a ~ a shift 0; } }\nbasechange F field f4;",
    "tmodule M { gens a; }\nsheaf F on P1 { plus M; minus M; glue { line a ~ a shift 0; } }\ntwist F x;",
    "points 0;",
    "classify;",
])
def test_arity_kind_degree(text):
    assert "E003" in codes(text)


@pytest.mark.parametrize("text", [
    "tmodule M { gens a; }\ntmodule M { gens b; }",
    "tmodule M { gens a, a; }",
])
def test_duplicates(text):
    assert "E004" in codes(text)


def test_invalid_gluing():
    text = """
tmodule L { gens a; }
tmodule C { gens a; rels { t^2*a = a; } }
sheaf F on P1 { plus L; minus C; glue { line a ~ a shift 0; } }
"""
    assert eval_code(text) == "E005"


def test_unmatched_orbit():
    text = """
tmodule L { gens a, b; }
tmodule R { gens c; }
sheaf F on P1 { plus L; minus R; glue { line a ~ c shift 0; } }
"""
    assert eval_code(text) == "E005"


def test_errors_reported_before_running():
    text = "tmodule M { gens a; }\nclassify M;\nclassify Q;"
    with pytest.raises(dsl.DslError):
        next(dsl.run(dsl.parse(text)))


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.name)
def test_print_parse_fixpoint(path):
    s1 = dsl.parse(path.read_text())
    printed = dsl.format_script(s1)
    assert dsl.format_script(dsl.parse(printed)) == printed


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.name)
def test_output_deterministic(path):
    text = path.read_text()
    a = [json.dumps(r, sort_keys=True) for r in dsl.evaluate(text)[1]]
    b = [json.dumps(r, sort_keys=True) for r in dsl.evaluate(text)[1]]
    assert a == b


def test_printed_script_evaluates_identically():
    for path in FIXTURES:
        text = path.read_text()
        again = dsl.format_script(dsl.parse(text))
        assert dsl.evaluate(text)[1] == dsl.evaluate(again)[1]


def test_shape_modules():
    assert str(tmod.classify(worked_examples.shape_graph(1))) == "Type1"
    assert str(tmod.classify(worked_examples.shape_graph(2))) == "Type2"
    assert str(tmod.classify(worked_examples.shape_graph(3))) == "Type3(4)"
