"""A small language for modules, graded modules and sheaves on P^1.

    monoid A = <x0, x1>;
    tmodule M { gens a, b; rels { t*a = t*b; } }
    gmodule N over A { gens g:0, h:1; rels { x1*g = h; } }
    sheaf F on P1 { plus M; minus M; glue { line a ~ a shift 0; } }
    sheaf G on P1 from N;
    gamma F;

In a minus-chart module ``t`` stands for t^-1.  Diagnostics carry a code:
E001 syntax, E002 unknown name, E003 arity, kind, degree or exponent
problems, E004 a name defined twice, E005 data that is well formed but not
mathematically valid (for example a gluing that is not an isomorphism).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

from . import basechange, grproj, p1sheaf, tmod
from .dot import module_dot, sheaf_dot
from .monoid import MonoidCtx, free_graded, mproj_points


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span
    severity: str = "error"

    def format(self, source: str = "<input>") -> str:
        return f"{source}:{self.span.line}:{self.span.col}: {self.severity} {self.code}: {self.message}"

    def to_json(self) -> dict:
        return {
            "code": self.code, "message": self.message, "severity": self.severity,
            "line": self.span.line, "col": self.span.col,
        }


class DslError(Exception):
    def __init__(self, diags: list[Diagnostic]):
        super().__init__("; ".join(d.message for d in diags))
        self.diagnostics = diags


def _err(code: str, message: str, span: Span) -> DslError:
    return DslError([Diagnostic(code, message, span)])


# ---------------------------------------------------------------------------
# tokens

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>(#|//)[^\n]*)"
    r"|(?P<int>-?\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[{};,=~*^<>:])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    span: Span


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise _err("E001", f"unexpected character {text[pos]!r}", Span(line, col))
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("int", "id", "sym"):
                out.append(Token(kind, value, Span(line, col)))
            col += len(value)
        pos = m.end()
    out.append(Token("eof", "", Span(line, col)))
    return out


# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class TTerm:
    gen: str
    exp: int
    span: Span


@dataclass(frozen=True)
class GTerm:
    gen: str
    factors: tuple[tuple[str, int], ...]
    span: Span


@dataclass(frozen=True)
class Rel:
    lhs: object
    rhs: object | None
    span: Span


@dataclass(frozen=True)
class MonoidDecl:
    name: str
    variables: tuple[str, ...]
    span: Span


@dataclass(frozen=True)
class TModuleDecl:
    name: str
    gens: tuple[str, ...]
    rels: tuple[Rel, ...]
    span: Span
    gen_spans: tuple[Span, ...] = ()


@dataclass(frozen=True)
class GModuleDecl:
    name: str
    over: str | None
    gens: tuple[tuple[str, int], ...]
    rels: tuple[Rel, ...]
    span: Span
    gen_spans: tuple[Span, ...] = ()


@dataclass(frozen=True)
class GlueItem:
    kind: str
    k: int | None
    plus: str
    minus: str
    shift: int
    span: Span


@dataclass(frozen=True)
class SheafDecl:
    name: str
    plus: str | None
    minus: str | None
    glue: tuple[GlueItem, ...]
    source: str | None
    span: Span


@dataclass(frozen=True)
class Arg:
    kind: str
    value: str
    span: Span


@dataclass(frozen=True)
class Command:
    name: str
    args: tuple[Arg, ...]
    span: Span
    bind: str | None = None


@dataclass(frozen=True)
class Script:
    items: tuple = ()


COMMANDS = (
    "classify", "decompose", "iso", "gamma", "gammastar", "twist",
    "globgen", "betacheck", "basechange", "dot", "points",
)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, what: str) -> DslError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.value)
        return _err("E001", f"expected {what}, found {found}", t.span)

    def expect(self, value: str) -> Token:
        if self.tok.value != value or self.tok.kind not in ("sym", "id"):
            raise self.fail(repr(value))
        return self.next()

    def accept(self, value: str) -> bool:
        if self.tok.value == value and self.tok.kind in ("sym", "id"):
            self.i += 1
            return True
        return False

    def ident(self) -> Token:
        if self.tok.kind != "id":
            raise self.fail("a name")
        return self.next()

    def integer(self) -> int:
        if self.tok.kind != "int":
            raise self.fail("an integer")
        return int(self.next().value)

    def script(self) -> Script:
        items = []
        while self.tok.kind != "eof":
            items.append(self.item())
        return Script(tuple(items))

    def item(self):
        t = self.tok
        if t.kind != "id":
            raise self.fail("a declaration or command")
        if t.value == "monoid":
            return self.monoid()
        if t.value == "tmodule":
            return self.tmodule()
        if t.value == "gmodule":
            return self.gmodule()
        if t.value == "sheaf":
            return self.sheaf()
        if t.value in COMMANDS:
            return self.command()
        raise _err("E001", f"unknown statement {t.value!r}", t.span)

    def monoid(self) -> MonoidDecl:
        start = self.next().span
        name = self.ident().value
        self.expect("=")
        self.expect("<")
        names = [self.ident().value]
        while self.accept(","):
            names.append(self.ident().value)
        self.expect(">")
        self.expect(";")
        return MonoidDecl(name, tuple(names), start)

    def _gens(self, graded: bool):
        self.expect("gens")
        gens, spans = [], []
        if self.tok.value != ";":
            while True:
                t = self.ident()
                spans.append(t.span)
                if graded:
                    self.expect(":")
                    gens.append((t.value, self.integer()))
                else:
                    gens.append(t.value)
                if not self.accept(","):
                    break
        self.expect(";")
        return tuple(gens), tuple(spans)

    def _rels(self, term):
        rels = []
        if self.accept("rels"):
            self.expect("{")
            while not self.accept("}"):
                span = self.tok.span
                lhs = term()
                self.expect("=")
                if self.tok.kind == "int" and self.tok.value == "0":
                    self.next()
                    rhs = None
                else:
                    rhs = term()
                self.expect(";")
                rels.append(Rel(lhs, rhs, span))
        return tuple(rels)

    def _factors(self) -> list[tuple[str, int | None, Span]]:
        out = []
        while True:
            t = self.ident()
            exp = None
            if self.accept("^"):
                exp = self.integer()
            out.append((t.value, exp, t.span))
            if not self.accept("*"):
                return out

    def tterm(self) -> TTerm:
        fs = self._factors()
        span = fs[0][2]
        if len(fs) == 1 and fs[0][1] is None and fs[0][0] != "t":
            return TTerm(fs[0][0], 0, span)
        if len(fs) == 2 and fs[0][0] == "t" and fs[1][1] is None:
            exp = 1 if fs[0][1] is None else fs[0][1]
            return TTerm(fs[1][0], exp, span)
        raise _err("E001", "expected a term of the form t^k*name", span)

    def gterm(self) -> GTerm:
        fs = self._factors()
        *mono, (gen, exp, span) = fs
        if exp is not None:
            raise _err("E001", "the last factor of a term must be a generator", span)
        return GTerm(gen, tuple((v, 1 if e is None else e) for v, e, _ in mono), fs[0][2])

    def tmodule(self) -> TModuleDecl:
        start = self.next().span
        name = self.ident().value
        self.expect("{")
        gens, spans = self._gens(False)
        rels = self._rels(self.tterm)
        self.expect("}")
        return TModuleDecl(name, gens, rels, start, spans)

    def gmodule(self) -> GModuleDecl:
        start = self.next().span
        name = self.ident().value
        over = self.ident().value if self.accept("over") else None
        self.expect("{")
        gens, spans = self._gens(True)
        rels = self._rels(self.gterm)
        self.expect("}")
        return GModuleDecl(name, over, gens, rels, start, spans)

    def sheaf(self) -> SheafDecl:
        start = self.next().span
        name = self.ident().value
        self.expect("on")
        space = self.ident()
        if space.value != "P1":
            raise _err("E003", f"sheaves are supported on P1 only, not {space.value}", space.span)
        if self.accept("from"):
            src = self.ident().value
            self.expect(";")
            return SheafDecl(name, None, None, (), src, start)
        self.expect("{")
        self.expect("plus")
        plus = self.ident().value
        self.expect(";")
        self.expect("minus")
        minus = self.ident().value
        self.expect(";")
        self.expect("glue")
        self.expect("{")
        items = []
        while not self.accept("}"):
            span = self.tok.span
            if self.accept("line"):
                kind, k = "line", None
            elif self.accept("cycle"):
                kind = "cycle"
                k = self.integer() if self.tok.kind == "int" else None
            else:
                raise self.fail("'line' or 'cycle'")
            a = self.ident().value
            self.expect("~")
            c = self.ident().value
            self.expect("shift")
            s = self.integer()
            self.expect(";")
            items.append(GlueItem(kind, k, a, c, s, span))
        self.expect("}")
        return SheafDecl(name, plus, minus, tuple(items), None, start)

    def command(self) -> Command:
        t = self.next()
        args = []
        bind = None
        while not self.accept(";"):
            a = self.tok
            if a.kind == "eof":
                raise self.fail("';'")
            if a.kind == "id" and a.value == "as":
                self.next()
                bind = self.ident().value
                continue
            if a.kind not in ("id", "int"):
                raise self.fail("an argument")
            self.next()
            args.append(Arg(a.kind, a.value, a.span))
        return Command(t.value, tuple(args), t.span, bind)


def parse(text: str) -> Script:
    return _Parser(text).script()


# ---------------------------------------------------------------------------
# printing


def _fmt_tterm(t: TTerm) -> str:
    return tmod.format_term(t.gen, t.exp)


def _fmt_gterm(t: GTerm) -> str:
    parts = [v if e == 1 else f"{v}^{e}" for v, e in t.factors]
    return "*".join(parts + [t.gen])


def _fmt_rels(rels, fmt) -> list[str]:
    if not rels:
        return []
    lines = ["  rels {"]
    for r in rels:
        rhs = "0" if r.rhs is None else fmt(r.rhs)
        lines.append(f"    {fmt(r.lhs)} = {rhs};")
    lines.append("  }")
    return lines


def format_script(script: Script) -> str:
    out = []
    for it in script.items:
        if isinstance(it, MonoidDecl):
            out.append(f"monoid {it.name} = <{', '.join(it.variables)}>;")
        elif isinstance(it, TModuleDecl):
            out.append(f"tmodule {it.name} {{")
            out.append(f"  gens {', '.join(it.gens)};")
            out.extend(_fmt_rels(it.rels, _fmt_tterm))
            out.append("}")
        elif isinstance(it, GModuleDecl):
            over = f" over {it.over}" if it.over else ""
            out.append(f"gmodule {it.name}{over} {{")
            out.append(f"  gens {', '.join(f'{g}:{d}' for g, d in it.gens)};")
            out.extend(_fmt_rels(it.rels, _fmt_gterm))
            out.append("}")
        elif isinstance(it, SheafDecl):
            if it.source is not None:
                out.append(f"sheaf {it.name} on P1 from {it.source};")
                continue
            out.append(f"sheaf {it.name} on P1 {{")
            out.append(f"  plus {it.plus};")
            out.append(f"  minus {it.minus};")
            out.append("  glue {")
            for g in it.glue:
                head = "line" if g.kind == "line" else ("cycle" if g.k is None else f"cycle {g.k}")
                out.append(f"    {head} {g.plus} ~ {g.minus} shift {g.shift};")
            out.append("  }")
            out.append("}")
        else:
            words = [it.name] + [a.value for a in it.args]
            if it.bind:
                words += ["as", it.bind]
            out.append(" ".join(words) + ";")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# static checks

# command -> (argument kinds, number of optional trailing arguments)
_SIGNATURES = {
    "classify": (("obj",), 0),
    "decompose": (("obj",), 0),
    "iso": (("obj", "obj"), 0),
    "gamma": (("sheaf",), 0),
    "gammastar": (("sheaf", "int"), 1),
    "twist": (("sheaf", "int"), 0),
    "globgen": (("sheaf",), 0),
    "betacheck": (("sheaf", "int"), 1),
    "basechange": (("sheaf", "kw_field", "word"), 2),
    "dot": (("obj",), 0),
    "points": (("points",), 0),
}


def check(script: Script) -> list[Diagnostic]:
    """Name resolution, arity, degrees and exponents; nothing is computed."""
    diags: list[Diagnostic] = []
    kinds: dict[str, str] = {}
    info: dict[str, object] = {}

    def define(name: str, kind: str, span: Span, data=None) -> None:
        if name in kinds:
            diags.append(Diagnostic("E004", f"{name} is already defined", span))
            return
        kinds[name] = kind
        info[name] = data

    for it in script.items:
        if isinstance(it, MonoidDecl):
            if len(set(it.variables)) != len(it.variables):
                diags.append(Diagnostic("E003", f"repeated variable in monoid {it.name}", it.span))
            elif len(it.variables) < 2:
                diags.append(Diagnostic("E003", "a graded monoid needs at least two variables", it.span))
            define(it.name, "monoid", it.span, it.variables)
        elif isinstance(it, TModuleDecl):
            diags.extend(_check_tmodule(it))
            define(it.name, "tmodule", it.span, set(it.gens))
        elif isinstance(it, GModuleDecl):
            variables = ("x0", "x1")
            if it.over is not None:
                if kinds.get(it.over) != "monoid":
                    code = "E002" if it.over not in kinds else "E003"
                    diags.append(Diagnostic(code, f"{it.over} is not a declared monoid", it.span))
                else:
                    variables = info[it.over]
            diags.extend(_check_gmodule(it, variables))
            define(it.name, "gmodule", it.span, len(variables))
        elif isinstance(it, SheafDecl):
            if it.source is not None:
                if it.source not in kinds:
                    diags.append(Diagnostic("E002", f"undeclared name {it.source}", it.span))
                elif kinds[it.source] != "gmodule":
                    diags.append(Diagnostic("E003", f"{it.source} is not a graded module", it.span))
                elif info[it.source] != 2:
                    diags.append(Diagnostic("E003", f"{it.source} does not live over two variables", it.span))
            else:
                for side, mod in (("plus", it.plus), ("minus", it.minus)):
                    if mod not in kinds:
                        diags.append(Diagnostic("E002", f"undeclared name {mod}", it.span))
                    elif kinds[mod] != "tmodule":
                        diags.append(Diagnostic("E003", f"{side} chart {mod} is not a tmodule", it.span))
                for g in it.glue:
                    for mod, gen in ((it.plus, g.plus), (it.minus, g.minus)):
                        if kinds.get(mod) == "tmodule" and gen not in info[mod]:
                            diags.append(Diagnostic("E002", f"{gen} is not a generator of {mod}", g.span))
                    if g.k is not None and g.k < 1:
                        diags.append(Diagnostic("E003", "cycle length must be positive", g.span))
            define(it.name, "sheaf", it.span)
        else:
            diags.extend(_check_command(it, kinds))
            if it.bind is not None:
                if it.name != "twist":
                    diags.append(Diagnostic("E003", f"{it.name} does not produce a value to bind", it.span))
                define(it.bind, "sheaf", it.span)
    return diags


def _check_tmodule(it: TModuleDecl) -> list[Diagnostic]:
    diags = []
    gens = set(it.gens)
    if len(gens) != len(it.gens):
        diags.append(Diagnostic("E004", f"repeated generator in {it.name}", it.span))
    if "t" in gens:
        diags.append(Diagnostic("E003", "t is reserved for the monoid variable", it.span))
    for r in it.rels:
        for term in (r.lhs, r.rhs):
            if term is None:
                continue
            if term.gen not in gens:
                diags.append(Diagnostic("E002", f"{term.gen} is not a generator of {it.name}", term.span))
            if term.exp < 0:
                diags.append(Diagnostic("E003", f"negative exponent {term.exp} in a <t>-presentation", term.span))
    return diags


def _check_gmodule(it: GModuleDecl, variables) -> list[Diagnostic]:
    diags = []
    degs = dict(it.gens)
    if len(degs) != len(it.gens):
        diags.append(Diagnostic("E004", f"repeated generator in {it.name}", it.span))
    for r in it.rels:
        tdeg = []
        for term in (r.lhs, r.rhs):
            if term is None:
                continue
            ok = True
            if term.gen not in degs:
                diags.append(Diagnostic("E002", f"{term.gen} is not a generator of {it.name}", term.span))
                ok = False
            for v, e in term.factors:
                if v not in variables:
                    diags.append(Diagnostic("E002", f"{v} is not a variable of the monoid", term.span))
                    ok = False
                if e < 0:
                    diags.append(Diagnostic("E003", f"negative exponent {e}", term.span))
                    ok = False
            if ok:
                tdeg.append(degs[term.gen] + sum(e for _, e in term.factors))
        if len(set(tdeg)) > 1:
            diags.append(Diagnostic("E003", f"relation is not homogeneous (degrees {tdeg[0]} and {tdeg[1]})", r.span))
    return diags


def _check_command(cmd: Command, kinds: dict[str, str]) -> list[Diagnostic]:
    sig, optional = _SIGNATURES[cmd.name]
    args = cmd.args
    if not len(sig) - optional <= len(args) <= len(sig):
        want = str(len(sig)) if not optional else f"{len(sig) - optional} to {len(sig)}"
        return [Diagnostic("E003", f"{cmd.name} takes {want} arguments, got {len(args)}", cmd.span)]
    diags = []
    for want, a in zip(sig, args):
        if want == "int":
            if a.kind != "int":
                diags.append(Diagnostic("E003", f"{cmd.name} expects an integer, got {a.value}", a.span))
        elif want == "kw_field":
            if a.value != "field":
                diags.append(Diagnostic("E001", f"expected 'field', found {a.value!r}", a.span))
        elif want == "word":
            try:
                basechange.FieldCtx.parse(a.value)
            except (basechange.FieldError, ValueError) as exc:
                diags.append(Diagnostic("E003", str(exc), a.span))
        elif want == "points":
            if a.kind == "int":
                if int(a.value) < 1:
                    diags.append(Diagnostic("E003", "MProj needs r >= 1", a.span))
            elif a.value not in kinds:
                diags.append(Diagnostic("E002", f"undeclared name {a.value}", a.span))
            elif kinds[a.value] != "monoid":
                diags.append(Diagnostic("E003", f"{a.value} is not a monoid", a.span))
        else:
            if a.kind != "id":
                diags.append(Diagnostic("E003", f"{cmd.name} expects a name, got {a.value}", a.span))
            elif a.value not in kinds:
                diags.append(Diagnostic("E002", f"undeclared name {a.value}", a.span))
            elif want == "sheaf" and kinds[a.value] != "sheaf":
                diags.append(Diagnostic("E003", f"{cmd.name} expects a sheaf, {a.value} is a {kinds[a.value]}", a.span))
            elif want == "obj" and kinds[a.value] == "monoid":
                diags.append(Diagnostic("E003", f"{cmd.name} expects a module or sheaf", a.span))
    if cmd.name == "iso" and not diags:
        k1, k2 = kinds[args[0].value], kinds[args[1].value]
        if (k1 == "sheaf") != (k2 == "sheaf"):
            diags.append(Diagnostic("E003", "iso compares two modules or two sheaves", cmd.span))
    return diags


# ---------------------------------------------------------------------------
# evaluation


class EvalError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diagnostic = diag


@dataclass
class Options:
    field: str = "q"
    window: int = 3
    dot_file: str | None = None


@dataclass
class Env:
    monoids: dict[str, MonoidCtx] = field(default_factory=dict)
    tmodules: dict[str, tmod.Compiled] = field(default_factory=dict)
    gmodules: dict[str, grproj.GradedPresentation] = field(default_factory=dict)
    sheaves: dict[str, p1sheaf.P1Sheaf] = field(default_factory=dict)
    presentations: dict[str, tmod.TPresentation] = field(default_factory=dict)

    def module(self, name: str) -> tmod.FunctionalGraph:
        return self.tmodules[name].graph


def _tpresentation(it: TModuleDecl) -> tmod.TPresentation:
    idx = {g: i for i, g in enumerate(it.gens)}
    rels = []
    for r in it.rels:
        lhs = (idx[r.lhs.gen], r.lhs.exp)
        rhs = None if r.rhs is None else (idx[r.rhs.gen], r.rhs.exp)
        rels.append(tmod.Relation(lhs, rhs))
    return tmod.TPresentation(it.gens, tuple(rels))


def _gpresentation(it: GModuleDecl, variables: tuple[str, ...]) -> grproj.GradedPresentation:
    idx = {g: i for i, (g, _) in enumerate(it.gens)}

    def term(t: GTerm):
        exps = [0] * len(variables)
        for v, e in t.factors:
            exps[variables.index(v)] += e
        return (idx[t.gen], tuple(exps))

    rels = [grproj.GRelation(term(r.lhs), None if r.rhs is None else term(r.rhs)) for r in it.rels]
    return grproj.GradedPresentation(
        len(variables), tuple(g for g, _ in it.gens), tuple(d for _, d in it.gens), tuple(rels), variables,
    )


def _build_sheaf(it: SheafDecl, env: Env) -> p1sheaf.P1Sheaf:
    if it.source is not None:
        return grproj.sheafify(env.gmodules[it.source])
    cp, cm = env.tmodules[it.plus], env.tmodules[it.minus]
    matches = []
    for g in it.glue:
        x, y = cp.element(g.plus), cm.element(g.minus)
        if x is None or y is None:
            raise EvalError(Diagnostic("E005", f"{g.plus if x is None else g.minus} is zero and cannot be glued", g.span))
        matches.append(p1sheaf.Match(g.kind, x, y, g.shift, g.k))
    try:
        return p1sheaf.make_sheaf(cp.graph, cm.graph, matches)
    except p1sheaf.SheafError as exc:
        raise EvalError(Diagnostic("E005", f"sheaf {it.name}: {exc}", it.span)) from exc


def _module_summary(G: tmod.FunctionalGraph) -> dict:
    comps = tmod.component_infos(G)
    return {
        "components": [
            {"type": str(c.type), "form": c.form, "size": len(c.vertices)}
            for c in sorted(comps, key=lambda c: (str(c.type), c.form))
        ],
    }


def _sheaf_summary(F: p1sheaf.P1Sheaf) -> list[dict]:
    out = []
    for S in p1sheaf.decompose(F):
        row = {"shape": p1sheaf.shape(S), "plus": len(S.plus), "minus": len(S.minus)}
        if S.glue:
            g = S.glue[0]
            row["shift"] = g.shift
            if g.kind == "cycle":
                row["k"] = g.k
        out.append(row)
    out.sort(key=lambda r: (r["shape"], r["plus"], r["minus"], r.get("shift", 0)))
    return out


def _sections(F: p1sheaf.P1Sheaf, secs) -> list[str]:
    return [F.section_name(s) for s in secs]


def execute(cmd: Command, env: Env, opts: Options) -> dict:
    a = [x.value for x in cmd.args]
    out: dict = {"command": cmd.name}
    if cmd.name in ("classify", "decompose", "dot"):
        name = a[0]
        out["name"] = name
        if name in env.sheaves:
            F = env.sheaves[name]
            if cmd.name == "classify":
                shapes = sorted(p1sheaf.shape(S) for S in p1sheaf.decompose(F))
                out["shapes"] = shapes
                out["indecomposable"] = len(shapes) == 1
                out["locally_free"] = p1sheaf.is_locally_free(F)
                out["torsion"] = p1sheaf.is_torsion(F)
                out["torsion_free"] = p1sheaf.is_torsion_free(F)
                if p1sheaf.is_locally_free(F):
                    out["rank"] = p1sheaf.rank(F)
            elif cmd.name == "decompose":
                out["summands"] = _sheaf_summary(F)
            else:
                out["dot"] = sheaf_dot(F, name)
        else:
            G = env.module(name) if name in env.tmodules else None
            if G is None:
                G = grproj.sheafify(env.gmodules[name]).plus
            if cmd.name == "classify":
                types = sorted(str(c.type) for c in tmod.component_infos(G))
                out["type"] = types[0] if len(types) == 1 else ("zero" if not types else "decomposable")
                if len(types) > 1:
                    out["components"] = types
            elif cmd.name == "decompose":
                out.update(_module_summary(G))
            else:
                out["dot"] = module_dot(G, name)
        if cmd.name == "dot" and opts.dot_file:
            with open(opts.dot_file, "a", encoding="utf-8") as fh:
                fh.write(out.pop("dot"))
            out["file"] = opts.dot_file
        return out
    if cmd.name == "iso":
        out["names"] = a
        if a[0] in env.sheaves:
            out["iso"] = p1sheaf.is_isomorphic(env.sheaves[a[0]], env.sheaves[a[1]])
        else:
            graphs = []
            for n in a:
                graphs.append(env.module(n) if n in env.tmodules else grproj.sheafify(env.gmodules[n]).plus)
            out["iso"] = tmod.is_isomorphic(*graphs)
        return out
    if cmd.name == "points":
        arg = cmd.args[0]
        if arg.kind == "int":
            r = int(arg.value)
            names = None
        else:
            names = env.monoids[arg.value].names
            r = len(names) - 1
        pts = mproj_points(r)
        out.update({"r": r, "count": len(pts), "points": [p.label(names) for p in pts]})
        return out
    F = env.sheaves[a[0]]
    out["name"] = a[0]
    if cmd.name == "gamma":
        secs = p1sheaf.global_sections(F)
        out.update({"count": len(secs), "sections": _sections(F, secs)})
    elif cmd.name == "gammastar":
        D = int(a[1]) if len(a) > 1 else opts.window
        secs = grproj.gamma_star_sections(F, -D, D)
        out["window"] = [-D, D]
        out["degrees"] = [
            {"degree": n, "count": len(secs[n]), "sections": _sections(F, secs[n])} for n in range(-D, D + 1)
        ]
    elif cmd.name == "twist":
        n = int(a[1])
        G = p1sheaf.twist(F, n)
        out.update({"by": n, "sheaf": p1sheaf.to_json(G)})
        if cmd.bind:
            env.sheaves[cmd.bind] = G
            out["bound"] = cmd.bind
    elif cmd.name == "globgen":
        gen = grproj.global_generation(F)
        out.update({"n0": gen.n0, "k": len(gen.sections),
                    "sections": _sections(p1sheaf.twist(F, gen.n0), gen.sections)})
        f = grproj.quotient_presentation(F, gen.n0, gen.sections)
        out["surjection_from"] = f"O({-gen.n0})^{len(gen.sections)}"
    elif cmd.name == "betacheck":
        res = grproj.beta_check(F, int(a[1]) if len(a) > 1 else None)
        out.update({"ok": res.ok, "D": res.D, "tried": list(res.tried)})
        if not res.ok:
            raise EvalError(Diagnostic("E005", f"window too small: comparison failed up to D = {res.D}", cmd.span))
    elif cmd.name == "basechange":
        K = basechange.FieldCtx.parse(a[2] if len(a) > 2 else opts.field)
        report = basechange.phi_K(F, K)
        out.update(basechange.report_json(F, report))
    return out


def declare(it, env: Env) -> None:
    if isinstance(it, MonoidDecl):
        env.monoids[it.name] = MonoidCtx(it.variables)
    elif isinstance(it, TModuleDecl):
        pres = _tpresentation(it)
        env.presentations[it.name] = pres
        env.tmodules[it.name] = tmod.compile_presentation(pres)
    elif isinstance(it, GModuleDecl):
        variables = env.monoids[it.over].names if it.over else free_graded(1).names
        env.gmodules[it.name] = _gpresentation(it, variables)
    elif isinstance(it, SheafDecl):
        env.sheaves[it.name] = _build_sheaf(it, env)


def run(script: Script, opts: Options | None = None, env: Env | None = None) -> Iterator[dict]:
    """Execute in order, yielding one result per command.

    Raises :class:`DslError` for static problems (before anything runs) and
    :class:`EvalError` when a declaration or command is mathematically
    invalid.
    """
    opts = opts or Options()
    diags = check(script)
    if diags:
        raise DslError(diags)
    env = Env() if env is None else env
    for it in script.items:
        try:
            if isinstance(it, Command):
                result = execute(it, env, opts)
            else:
                declare(it, env)
                continue
        except EvalError:
            raise
        except (p1sheaf.SheafError, p1sheaf.NotExact, grproj.SearchBoundExceeded,
                tmod.SubmoduleError, tmod.MapError, basechange.FieldError) as exc:
            raise EvalError(Diagnostic("E005", str(exc), it.span)) from exc
        yield result


def evaluate(text: str, opts: Options | None = None) -> tuple[Env, list[dict]]:
    """Parse and run a whole script, returning the final environment too."""
    env = Env()
    results = list(run(parse(text), opts, env))
    return env, results
