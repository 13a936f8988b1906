"""Worked examples built through the DSL: the two-branch sheaf, the ladders G_n and the three component shapes."""

from __future__ import annotations

from importlib import resources

from . import dsl, grproj, p1sheaf, tmod
from .p1sheaf import P1Sheaf, SheafMap


def script_text(name: str) -> str:
    return (resources.files("monoproj") / "fixtures" / f"{name}.mp").read_text(encoding="utf-8")


def _declarations(text: str) -> dsl.Env:
    script = dsl.parse(text)
    decls = dsl.Script(tuple(it for it in script.items if not isinstance(it, dsl.Command)))
    env = dsl.Env()
    list(dsl.run(decls, env=env))
    return env


def two_branch_sheaf() -> P1Sheaf:
    return _declarations(script_text("two_branch")).sheaves["F"]


def g_n_text(n: int) -> str:
    return f"""
tmodule P {{
  gens a, b;
  rels {{
    t^{n}*a = t*b;
  }}
}}
tmodule C {{
  gens c;
}}
tmodule T {{
  gens b;
  rels {{
    t*b = 0;
  }}
}}
tmodule Z {{
  gens;
}}
sheaf G on P1 {{
  plus P;
  minus C;
  glue {{
    line a ~ c shift 0;
  }}
}}
sheaf T0 on P1 {{
  plus T;
  minus Z;
  glue {{
  }}
}}
"""


def g_n(n: int) -> P1Sheaf:
    """G_n: the ladder t^n a = t b on U1 glued along a to a free module on U2."""
    return _declarations(g_n_text(n)).sheaves["G"]


def torsion_at_zero() -> P1Sheaf:
    """T: one point at 0 killed by t."""
    return _declarations(g_n_text(1)).sheaves["T0"]


def g_n_sequence(n: int) -> tuple[SheafMap, SheafMap]:
    """0 -> O -> G_n -> T -> 0, with O generated by the section (a, c)."""
    G = g_n(n)
    a = (G.plus.vertex_by_name()["a"], 0)
    c = (G.minus.vertex_by_name()["c"], 0)
    _, inc = p1sheaf.subsheaf_generated(G, [p1sheaf.GlobalSection(a, c)])
    _, proj = p1sheaf.quotient_by(G, inc)
    return inc, proj


def split_sequence() -> tuple[SheafMap, SheafMap]:
    """0 -> O -> O + T -> T -> 0 with the obvious maps."""
    E = p1sheaf.direct_sum(grproj.line_bundle(0), torsion_at_zero())
    o_plus = (0, 0)
    o_minus = (0, 0)
    _, inc = p1sheaf.subsheaf_generated(E, [p1sheaf.GlobalSection(o_plus, o_minus)])
    _, proj = p1sheaf.quotient_by(E, inc)
    return inc, proj


def shape_graph(k: int) -> tmod.FunctionalGraph:
    env = _declarations(script_text(("type1_tree", "type2_ray", "type3_cycle")[k - 1]))
    (compiled,) = env.tmodules.values()
    return compiled.graph


def fixture_sheaves() -> dict[str, P1Sheaf]:
    """O(n) for |n| <= 5, the two-branch sheaf and G_1 .. G_5."""
    out = {f"O({n})": grproj.line_bundle(n) for n in range(-5, 6)}
    out["two_branch"] = two_branch_sheaf()
    for n in range(1, 6):
        out[f"G_{n}"] = g_n(n)
    return out
