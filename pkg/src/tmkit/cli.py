"""``tm`` command line: validate, simulate, render, fmt.

Exit codes: 0 ok, 1 model diagnostics or simulation failure,
2 usage, IO or parse failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .dsl import ParseError, parse, parse_scenario, serialize, serialize_scenario
from .levels import ModelBundle, check_bundle
from .render import Level, RenderError, RenderOptions, render
from .simulator import SimulationError, simulate
from .validator import Diagnostic, format_json, has_errors

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_FAILURE = 2

_COLORS = {"error": "\033[31m", "warning": "\033[33m"}
_RESET = "\033[0m"


class _Failure(Exception):
    """Aborts a command with exit code 2 after printing to stderr."""


def _use_color(stream: TextIO) -> bool:
    mode = os.environ.get("TM_COLOR", "auto").lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    return hasattr(stream, "isatty") and stream.isatty() and "NO_COLOR" not in os.environ


def _diag_line(d: Diagnostic, color: bool) -> str:
    if not color:
        return str(d)
    sev = d.severity.value
    return f"{_COLORS[sev]}{d.rule} {sev}{_RESET} {d.subject}: {d.message}"


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Failure(f"tm: cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Failure(f"tm: cannot write {path}: {exc.strerror or exc}") from None


def _parse_error(path: str, err: ParseError) -> _Failure:
    return _Failure("\n".join(f"{path}:{d}" for d in err.diagnostics))


def _load_model(path: str) -> ModelBundle:
    try:
        return parse(_read(path))
    except ParseError as err:
        raise _parse_error(path, err) from None


def _print_diagnostics(diags: list[Diagnostic], fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(format_json(diags))
        return
    color = _use_color(sys.stdout)
    for d in diags:
        print(_diag_line(d, color))


def cmd_validate(args: argparse.Namespace) -> int:
    bundle = _load_model(args.model)
    diags = check_bundle(bundle, strict=args.strict)
    _print_diagnostics(diags, args.format)
    return EXIT_DIAGNOSTICS if has_errors(diags) else EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    bundle = _load_model(args.model)
    try:
        scenario = parse_scenario(_read(args.scenario))
    except ParseError as err:
        raise _parse_error(args.scenario, err) from None
    diags = check_bundle(bundle)
    if has_errors(diags):
        _print_diagnostics([d for d in diags if d.is_error], "text")
        return EXIT_DIAGNOSTICS
    try:
        trace = simulate(bundle, scenario)
    except SimulationError as err:
        print(err)
        return EXIT_DIAGNOSTICS
    if args.trace:
        _write(args.trace, trace.to_json())
    elif not args.table:
        sys.stdout.write(trace.to_json())
    if args.table:
        sys.stdout.write(trace.to_table())
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    level = Level(args.level)
    if args.highlight is not None and level is not Level.EVENTS:
        raise _Failure("tm: --highlight requires --level events")
    if args.focus is not None and level is not Level.BEHAVIOR:
        raise _Failure("tm: --focus requires --level behavior")
    bundle = _load_model(args.model)
    missing = (level is Level.EVENTS and bundle.events is None) or (
        level is Level.BEHAVIOR and bundle.behavior is None
    )
    if missing:
        print(f"tm: {args.model} declares no {level.value} level")
        return EXIT_DIAGNOSTICS
    opts = RenderOptions(level, args.highlight, args.rankdir, args.focus)
    try:
        dot = render(bundle, opts)
    except RenderError as err:
        raise _Failure(f"tm: {err}") from None
    if args.output:
        _write(args.output, dot)
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def cmd_fmt(args: argparse.Namespace) -> int:
    raw = _read(args.file)
    try:
        if args.file.endswith(".tms"):
            text = serialize_scenario(parse_scenario(raw))
        else:
            text = serialize(parse(raw))
    except ParseError as err:
        raise _parse_error(args.file, err) from None
    if args.write:
        if text.encode("utf-8") != raw:
            _write(args.file, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tm", description="Thinging-machine model toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="check a model on all three levels")
    p.add_argument("model")
    p.add_argument("--strict", action="store_true", help="treat coverage warnings as errors")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a scenario over a model")
    p.add_argument("model")
    p.add_argument("scenario")
    p.add_argument("--trace", metavar="OUT", help="write the JSON trace here")
    p.add_argument("--table", action="store_true", help="print the occurrence table")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("render", help="emit a DOT diagram")
    p.add_argument("model")
    p.add_argument("--level", choices=[lv.value for lv in Level], default="static")
    p.add_argument("--highlight", metavar="EVENT")
    p.add_argument("--focus", metavar="EVENT", help="behavior level: only events reachable from EVENT")
    p.add_argument("--rankdir", choices=("LR", "TB"), default="LR")
    p.add_argument("-o", "--output", metavar="OUT")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("fmt", help="print the canonical form of a .tm or .tms file")
    p.add_argument("file")
    p.add_argument("--write", action="store_true", help="rewrite the file in place")
    p.set_defaults(func=cmd_fmt)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_FAILURE
    try:
        return args.func(args)
    except _Failure as exc:
        print(exc, file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
