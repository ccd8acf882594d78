"""Command-line front end.

Exit codes:

0  no violations
1  violations found
2  usage error or rule-file syntax error
3  source I/O or network error
4  evaluation errors in the rules (unless ``--no-fail-on-error``)
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO

from webcheck import __version__
from webcheck.constraint_dsl import RuleFile, RuleSyntaxError, parse_rules
from webcheck.engine import Report, evaluate, load_rules_text
from webcheck.errors import SourceError
from webcheck.html_model import parse_document
from webcheck.rulepacks import UnknownPack, available_packs, get_rulepack
from webcheck.sources import FetchPolicy, SourceSpec, resolve

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_EVAL_ERRORS = 4

FORMATS = ("text", "json")


@dataclass(frozen=True)
class CliConfig:
    source: SourceSpec
    rules: str
    rules_is_pack: bool
    format: str = "text"
    fragment: bool = False
    fail_on_error: bool = True
    quiet: bool = False


def render_report(report: Report, fmt: str = "text") -> str:
    """Render ``report`` as ``text`` or ``json``; output ends with a newline."""
    if fmt == "json":
        payload = {
            "source": report.source_name,
            "violations": [
                {
                    "constraint": v.constraint_name,
                    "context": v.context_tag,
                    "path": v.element_path,
                    "line": v.line,
                    "column": v.column,
                    "message": v.message,
                }
                for v in report.violations
            ],
            "elements_checked": report.elements_checked,
            "constraints_evaluated": report.constraints_evaluated,
            "errors": [
                {
                    "constraint": e.constraint_name,
                    "context": e.context_tag,
                    "block": e.block,
                    "path": e.element_path,
                    "message": e.message,
                }
                for e in report.errors
            ],
        }
        return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        f"{report.source_name}:{v.line}:{v.column} [{v.constraint_name}] {v.message} (at {v.element_path})"
        for v in report.violations
    ]
    lines.append(f"{len(report.violations)} violation(s), {report.elements_checked} element(s) checked")
    return "\n".join(lines) + "\n"


def render_errors(report: Report) -> str:
    return "".join(
        f"{report.source_name}: error: [{e.constraint_name}] {e.block}: {e.message} (at {e.element_path})\n"
        for e in report.errors
    )


def exit_code(report: Report, fail_on_error: bool = True) -> int:
    if report.errors and fail_on_error:
        return EXIT_EVAL_ERRORS
    return EXIT_VIOLATIONS if report.violations else EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="webcheck",
        description="Validate HTML against guard/check/message constraint rules.",
    )
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--source", metavar="PATH|URL|-", help="HTML file, http(s) URL, or - for stdin")
    src.add_argument("--inline", metavar="HTML", help="HTML text given on the command line")
    parser.add_argument("--fragment", action="store_true", help="treat the HTML as a page section")
    rules = parser.add_mutually_exclusive_group(required=True)
    rules.add_argument("--rules", metavar="FILE.evl", help="constraint rule file")
    rules.add_argument("--rulepack", metavar="NAME", help=f"built-in rules ({', '.join(available_packs())})")
    parser.add_argument("--format", choices=FORMATS, default="text")
    parser.add_argument("--quiet", action="store_true", help="print nothing; report through the exit code")
    parser.add_argument(
        "--no-fail-on-error",
        dest="fail_on_error",
        action="store_false",
        help="do not exit 4 when rule expressions fail to evaluate",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def _load_rules(config: CliConfig) -> RuleFile:
    if config.rules_is_pack:
        return get_rulepack(config.rules).parse()
    text, name = load_rules_text(Path(config.rules))
    return parse_rules(text, name)


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.inline is not None:
            source = SourceSpec("inline", args.inline, args.fragment)
        else:
            source = SourceSpec.from_string(args.source, args.fragment)
    except SourceError as exc:
        print(f"webcheck: error: {exc}", file=stderr)
        return EXIT_USAGE
    config = CliConfig(
        source=source,
        rules=args.rulepack if args.rulepack is not None else args.rules,
        rules_is_pack=args.rulepack is not None,
        format=args.format,
        fragment=args.fragment,
        fail_on_error=args.fail_on_error,
        quiet=args.quiet,
    )

    try:
        rules = _load_rules(config)
    except (RuleSyntaxError, UnknownPack) as exc:
        print(f"webcheck: error: {exc}", file=stderr)
        return EXIT_USAGE
    except SourceError as exc:
        print(f"webcheck: error: {exc}", file=stderr)
        return EXIT_IO

    try:
        html, name = resolve(config.source, FetchPolicy())
    except SourceError as exc:
        print(f"webcheck: error: {exc}", file=stderr)
        return EXIT_IO

    report = evaluate(rules, parse_document(html, name, fragment=config.fragment))
    if not config.quiet:
        stdout.write(render_report(report, config.format))
        if config.format == "text":
            stderr.write(render_errors(report))
    return exit_code(report, config.fail_on_error)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
