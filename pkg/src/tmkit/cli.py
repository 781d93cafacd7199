"""Command-line entry point: ``tmkit <command> FILE ...``.

Exit status: 0 success, 1 parse/validation errors, 2 usage errors,
3 runtime failures (unreadable files, tick budget).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bpmn import import_bpmn
from .decls import DynamicDecls
from .dsl import SourceFile, format_model, parse
from .dynamics import compile_dynamic, natural_key
from .errors import (
    BpmnError,
    DiagnosticError,
    ModelError,
    ScenarioError,
    TickBudgetExceeded,
)
from .render import VIEWS, simplify, to_dot
from .simulator import DEFAULT_TICK_BUDGET, Scenario, init
from .validator import validate

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
BPMN_SUFFIXES = (".bpmn", ".xml")


class _Failure(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _color() -> bool:
    return os.environ.get("TM_COLOR", "1") != "0" and sys.stderr.isatty()


def _report(diags, name: str) -> None:
    color = _color()
    for diag in diags:
        print(diag.format(name, color), file=sys.stderr)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Failure(EXIT_RUNTIME, f"cannot read {path}: {exc}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _Failure(EXIT_RUNTIME, f"cannot write {path}: {exc}") from None


def _load(path: str, bpmn: Optional[bool] = None):
    """Read a ``.tm`` or BPMN file into (model, decls)."""
    text = _read(path)
    name = "<stdin>" if path == "-" else path
    if bpmn is None:
        bpmn = path.lower().endswith(BPMN_SUFFIXES)
    try:
        if bpmn:
            model, decls, warnings = import_bpmn(text.encode("utf-8"))
            _report(warnings, name)
            return model, decls
        return parse(SourceFile(text, name))
    except DiagnosticError as exc:
        _report(exc.diagnostics, name)
        raise _Failure(EXIT_INVALID) from None


def _checked(path: str):
    model, decls = _load(path)
    diags = validate(model, decls)
    if diags.has_errors:
        _report(diags, path)
        raise _Failure(EXIT_INVALID)
    return model, decls, diags


def cmd_parse(args) -> int:
    model, decls = _load(args.file)
    _write(args.output, format_model(model, decls))
    return EXIT_OK


def cmd_validate(args) -> int:
    model, decls = _load(args.file)
    diags = validate(model, decls)
    _report(diags, args.file)
    if diags.has_errors:
        return EXIT_INVALID
    print(f"{args.file}: ok ({len(diags.warnings)} warning(s))")
    return EXIT_OK


def _compile(path: str):
    model, decls, _ = _checked(path)
    try:
        return compile_dynamic(model, decls)
    except DiagnosticError as exc:
        _report(exc.diagnostics, path)
        raise _Failure(EXIT_INVALID) from None


def cmd_compile(args) -> int:
    dyn = _compile(args.file)
    chron = dyn.chronology
    lines = [f"events: {len(dyn.events)}"]
    for name in sorted(dyn.events, key=natural_key):
        ev = dyn.events[name]
        flags = [f for f, on in (("extended", ev.extended), ("entity", ev.kind.value == "entity"), ("instant", ev.instant)) if on]
        extra = f" [{', '.join(flags)}]" if flags else ""
        lines.append(f"  {name} duration={ev.duration} stages={len(ev.region)}{extra} {json.dumps(ev.description)}")
    lines.append(f"negatives: {len(dyn.negatives)}")
    for name in sorted(dyn.negatives, key=natural_key):
        lines.append(f"  {name} of {dyn.negatives[name].paired}")
    lines.append(f"chronology: {len(chron.edges)} edge(s), {len(chron.joins)} join(s)")
    lines.append(f"  roots: {', '.join(chron.roots()) or '-'}")
    guards = sorted(chron.guards())
    lines.append(f"  guards: {', '.join(guards) or '-'}")
    _write(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    dyn = _compile(args.file)
    try:
        scenario = Scenario.load(args.scenario) if args.scenario else Scenario([0])
        if args.seed is not None:
            scenario.seed = args.seed
        state = init(dyn, scenario, args.max_ticks)
        trace = state.run(args.until)
    except OSError as exc:
        raise _Failure(EXIT_RUNTIME, f"cannot read scenario: {exc}") from None
    except TickBudgetExceeded as exc:
        raise _Failure(EXIT_RUNTIME, str(exc)) from None
    except ScenarioError as exc:
        raise _Failure(EXIT_INVALID, f"scenario: {exc}") from None
    if args.trace is not None or not args.stats:
        _write(args.trace, trace.to_jsonl())
    if args.stats:
        _write(None, json.dumps(state.stats().as_dict(), indent=2) + "\n")
    return EXIT_OK


def cmd_import_bpmn(args) -> int:
    model, decls = _load(args.file, bpmn=True)
    _write(args.output, format_model(model, decls))
    return EXIT_OK


def cmd_render(args) -> int:
    if args.view == "static":
        model, _, _ = _checked(args.file)
        target = model
    else:
        target = _compile(args.file)
    _write(args.output, to_dot(target, args.view))
    return EXIT_OK


def cmd_simplify(args) -> int:
    model, _, _ = _checked(args.file)
    _write(args.output, format_model(simplify(model), DynamicDecls()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmkit", description="Thinging-machine modeling toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, func, help_text, output=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", metavar="FILE", help="model file (.tm or .bpmn); '-' reads stdin")
        if output:
            p.add_argument("-o", "--output", metavar="OUT", help="output file ('-' for stdout, the default)")
        p.set_defaults(func=func)
        return p

    command("parse", cmd_parse, "print the canonical form of a model")
    command("validate", cmd_validate, "report diagnostics", output=False)
    command("compile", cmd_compile, "summarize the compiled dynamic model")
    p = command("simulate", cmd_simulate, "run a scenario and export the trace", output=False)
    p.add_argument("--scenario", metavar="S.json", help="scenario file (default: one instance at tick 0)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--until", type=int, metavar="T", help="stop after tick T")
    p.add_argument("--trace", metavar="OUT.jsonl", help="write the trace as JSON lines ('-' for stdout)")
    p.add_argument("--stats", action="store_true", help="print per-region counters as JSON")
    p.add_argument("--max-ticks", type=int, default=DEFAULT_TICK_BUDGET, help=argparse.SUPPRESS)
    command("import-bpmn", cmd_import_bpmn, "convert BPMN 2.0 XML to the model language")
    p = command("render", cmd_render, "emit Graphviz DOT")
    p.add_argument("--view", choices=VIEWS, default="static")
    command("simplify", cmd_simplify, "drop release/transfer/receive stages")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _Failure as exc:
        if str(exc):
            print(f"tmkit: {exc}", file=sys.stderr)
        return exc.code
    except ModelError as exc:
        print(f"tmkit: error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BpmnError as exc:  # pragma: no cover - _load reports these
        _report(exc.diagnostics, args.file)
        return EXIT_INVALID
    except BrokenPipeError:  # pragma: no cover
        return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
