"""Command line driver: ``monoproj script.mp [--json] [--dot out.dot] ...``."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import dsl
from .basechange import FieldCtx, FieldError

EXIT_OK, EXIT_DIAG, EXIT_INTERNAL = 0, 1, 2


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _text(result: dict) -> str:
    """One-line human summary; nested data is left to --json."""
    head = result["command"]
    if "name" in result:
        head += f" {result['name']}"
    elif "names" in result:
        head += " " + " ".join(result["names"])
    parts = []
    for k in sorted(result):
        v = result[k]
        if k in ("command", "name", "names", "sheaf", "dot", "basis"):
            continue
        if isinstance(v, list) and v and isinstance(v[0], (dict, list)):
            v = f"[{len(v)} items]"
        parts.append(f"{k}={v}")
    line = head + ": " + ", ".join(parts)
    if "dot" in result:
        line += "\n" + result["dot"].rstrip("\n")
    return line


def run_text(text: str, opts: dsl.Options, as_json: bool, out, err, source: str = "<input>") -> int:
    try:
        script = dsl.parse(text)
        for result in dsl.run(script, opts):
            print(_dump(result) if as_json else _text(result), file=out)
    except dsl.DslError as exc:
        for d in exc.diagnostics:
            print(d.format(source), file=err)
            if as_json:
                print(_dump({"diagnostic": d.to_json()}), file=out)
        return EXIT_DIAG
    except dsl.EvalError as exc:
        d = exc.diagnostic
        print(d.format(source), file=err)
        if as_json:
            print(_dump({"diagnostic": d.to_json()}), file=out)
        return EXIT_DIAG
    except Exception as exc:  # invariant violations inside the library
        print(f"{source}: internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL
    return EXIT_OK


def fixture_dir() -> Path:
    return Path(str(resources.files("monoproj") / "fixtures"))


def golden_outputs(path: Path) -> list[dict]:
    opts = dsl.Options()
    results = list(dsl.run(dsl.parse(path.read_text(encoding="utf-8")), opts))
    return json.loads(json.dumps(results))


def run_golden(directory: Path, update: bool, out) -> int:
    failures = 0
    scripts = sorted(directory.glob("*.mp"))
    for path in scripts:
        expected_path = path.with_suffix(".json")
        try:
            got = golden_outputs(path)
        except (dsl.DslError, dsl.EvalError) as exc:
            print(f"FAIL {path.name}: {exc}", file=out)
            failures += 1
            continue
        if update:
            expected_path.write_text(json.dumps(got, sort_keys=True, indent=1) + "\n", encoding="utf-8")
            print(f"wrote {expected_path.name}", file=out)
            continue
        if not expected_path.exists():
            print(f"FAIL {path.name}: no expected output", file=out)
            failures += 1
            continue
        want = json.loads(expected_path.read_text(encoding="utf-8"))
        if want == got:
            print(f"ok   {path.name}", file=out)
        else:
            failures += 1
            print(f"FAIL {path.name}: output differs", file=out)
    print(f"{len(scripts) - failures}/{len(scripts)} fixtures match", file=out)
    return EXIT_OK if failures == 0 else EXIT_DIAG


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="monoproj", description="Modules over pointed monoids and sheaves on P^1.")
    p.add_argument("script", nargs="?", help="script file, or - for stdin")
    p.add_argument("--json", action="store_true", help="one JSON object per command")
    p.add_argument("--dot", metavar="FILE", help="write DOT output of dot commands to FILE")
    p.add_argument("--field", default="q", help="default field for basechange: q or f<p>")
    p.add_argument("--window", type=int, default=3, help="default window radius for gammastar")
    p.add_argument("--golden", nargs="?", const="", metavar="DIR", help="run the golden fixtures")
    p.add_argument("--update-golden", action="store_true", help=argparse.SUPPRESS)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.golden is not None:
        directory = Path(args.golden) if args.golden else fixture_dir()
        return run_golden(directory, args.update_golden, sys.stdout)
    if args.script is None:
        build_parser().print_usage(sys.stderr)
        return EXIT_DIAG
    try:
        FieldCtx.parse(args.field)
    except FieldError as exc:
        print(f"monoproj: {exc}", file=sys.stderr)
        return EXIT_DIAG
    if args.window < 0:
        print("monoproj: --window must be nonnegative", file=sys.stderr)
        return EXIT_DIAG
    if args.script == "-":
        text, source = sys.stdin.read(), "<stdin>"
    else:
        try:
            text = Path(args.script).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"monoproj: {exc}", file=sys.stderr)
            return EXIT_DIAG
        source = args.script
    if args.dot:
        Path(args.dot).write_text("", encoding="utf-8")
    opts = dsl.Options(field=args.field, window=args.window, dot_file=args.dot)
    return run_text(text, opts, args.json, sys.stdout, sys.stderr, source)


if __name__ == "__main__":
    sys.exit(main())
