"""Graphviz export of chart modules and sheaves."""

from __future__ import annotations

from .p1sheaf import P1Sheaf
from .tmod import FREE, ZERO, FunctionalGraph


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _graph_lines(G: FunctionalGraph, prefix: str, indent: str) -> list[str]:
    lines = []
    for v in G.vertices:
        lines.append(f"{indent}{_quote(prefix + str(v))} [label={_quote(G.name((v, 0)))}];")
    if any(G.tags[v] == ZERO for v in G.vertices):
        lines.append(f"{indent}{_quote(prefix + '*')} [label=\"*\", shape=plaintext];")
    for v in G.vertices:
        s = G.succ[v]
        src = _quote(prefix + str(v))
        if s is not None:
            lines.append(f"{indent}{src} -> {_quote(prefix + str(s))};")
        elif G.tags[v] == ZERO:
            lines.append(f"{indent}{src} -> {_quote(prefix + '*')};")
        elif G.tags[v] == FREE:
            open_end = _quote(prefix + f"tail{v}")
            lines.append(f"{indent}{open_end} [label=\"\", shape=none, width=0];")
            lines.append(f"{indent}{src} -> {open_end} [style=dashed];")
    return lines


def module_dot(G: FunctionalGraph, name: str = "M") -> str:
    body = _graph_lines(G, "v", "  ")
    return "\n".join([f"digraph {_quote(name)} {{", *body, "}"]) + "\n"


def sheaf_dot(F: P1Sheaf, name: str = "F") -> str:
    lines = [f"digraph {_quote(name)} {{", "  compound=true;"]
    for side, G, prefix in (("plus", F.plus, "p"), ("minus", F.minus, "m")):
        lines.append(f"  subgraph {_quote('cluster_' + side)} {{")
        lines.append(f"    label={_quote(side)};")
        lines.extend(_graph_lines(G, prefix, "    "))
        lines.append("  }")
    for g in F.glue:
        label = f"shift {g.shift}" if g.kind == "line" else f"shift {g.shift} mod {g.k}"
        lines.append(
            f"  {_quote('p' + str(g.plus))} -> {_quote('m' + str(g.minus))} "
            f"[style=dashed, dir=none, constraint=false, label={_quote(label)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
