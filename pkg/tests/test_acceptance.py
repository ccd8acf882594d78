"""Exit criteria for the build; each test records one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section of the terminal summary.
"""

from __future__ import annotations

import contextlib
import io
import itertools
import json
import random
import re
import subprocess
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema

from acceptance_log import RESULTS
from generators import random_rule_file, random_undefined_chain
from oracles import nested_if_oracle
from webcheck.cli import run
from webcheck.constraint_dsl import parse_expression, parse_rules, render_rules
from webcheck.engine import UNDEFINED, eval_expr, evaluate
from webcheck.html_model import match_class_pattern, parse_document
from webcheck.rulepacks import get_rulepack

FIXTURES = Path(__file__).parent / "fixtures"
COL_MESSAGE = "A <div> element with class col should have a parent <div> element with class row."
NAMED_RULES = [
    "ScreenReaderButton",
    "AlertLinkInDivAlert",
    "BtnGroupToggle",
    "BadgeClassSiblingRelation",
    "ImageInPictureWithImgClass",
]
GRID_RULES = {"DivWithColHasRowParent", "DivWithRowHasContainerParent"}


@contextlib.contextmanager
def criterion(label: str):
    try:
        yield
    except BaseException:
        RESULTS[label] = "FAIL"
        print(f"FAIL criterion {label}")
        raise
    RESULTS[label] = "PASS"
    print(f"PASS criterion {label}")


def _sample_page() -> str:
    return (FIXTURES / "sample.html").read_text(encoding="utf-8")


# 1 ------------------------------------------------------------------------


def test_1_grid_rules_on_sample_page():
    with criterion("1 grid rules (widened guard) on the sample page: clean page, row mutations, < 1 s"):
        start = time.perf_counter()
        rules = parse_rules((FIXTURES / "sample_widened.evl").read_text(encoding="utf-8"))
        page = _sample_page()
        clean = evaluate(rules, parse_document(page, "sample.html"))
        assert clean.violations == [] and clean.errors == []
        assert clean.elements_checked == 5

        # replacements that do not themselves match the col guard
        for replacement in ["rowx", "", "Row", "container", "my-row", "row-1", "ROW"]:
            mutated = page.replace('class="row"', f'class="{replacement}"')
            report = evaluate(rules, parse_document(mutated, "mutated.html"))
            assert len(report.violations) == 3, replacement
            assert {v.constraint_name for v in report.violations} == {"DivWithColHasRowParent"}
            assert [v.element_path for v in report.violations] == [f"html/body/div/div/div[{i}]" for i in range(3)]
            assert all(v.message == COL_MESSAGE for v in report.violations)
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, elapsed


# 2 ------------------------------------------------------------------------


def _page(tree) -> str:
    def render(node) -> str:
        if isinstance(node, str):
            return node
        tag, cls, kids = node
        attr = "" if cls is None else f' class="{cls}"'
        return f"<{tag}{attr}>" + "".join(render(k) for k in kids) + f"</{tag}>"

    return "".join(render(n) for n in tree)


def _cols(*classes):
    return [("div", c, [f"Column {i}"]) for i, c in enumerate(classes, 1)]


def grid_mutations() -> dict[str, str]:
    base_cols = _cols("col", "col", "col")

    def grid(container="container", row="row", cols=None, extra_in_container=(), after=(), row_tag="div"):
        row_node = (row_tag, row, cols if cols is not None else base_cols)
        return _page([("div", container, [*extra_in_container, row_node]), *after])

    c1, c2, c3 = base_cols
    return {
        "original": grid(),
        "container renamed": grid(container="containerx"),
        "container class removed": grid(container=None),
        "container fluid": grid(container="container-fluid"),
        "row renamed": grid(row="rowx"),
        "row class removed": grid(row=None),
        "row extra class": grid(row="row gx-0"),
        "col 1 renamed": grid(cols=_cols("colx", "col", "col")),
        "col 2 class removed": grid(cols=_cols("col", None, "col")),
        "col 3 breakpoint class": grid(cols=_cols("col", "col", "col-sm-4")),
        "col 1 renamed to row": grid(cols=_cols("row", "col", "col")),
        "row renamed to col": grid(row="col"),
        "container renamed to row": grid(container="row"),
        "container renamed to col": grid(container="col"),
        "col 1 reparented to container": grid(cols=[c2, c3], extra_in_container=[c1]),
        "col 3 reparented to body": grid(cols=[c1, c2], after=[c3]),
        "row reparented to body": _page([("div", "container", []), ("div", "row", base_cols)]),
        "row wrapped in section": _page([("div", "container", [("section", None, [("div", "row", base_cols)])])]),
        "col 2 wrapped in span": grid(cols=[c1, ("span", None, [c2]), c3]),
        "container wrapped in row": _page([("div", "row", [("div", "container", [("div", "row", base_cols)])])]),
        "col 2 nested in col 1": grid(cols=[("div", "col", ["Column 1", c2]), c3]),
    }


def test_2_oracle_equivalence():
    with criterion("2 hand-written nested-if oracle agrees with engine on original + 20 mutations"):
        rules = get_rulepack("bootstrap").parse()
        cases = grid_mutations()
        assert len(cases) == 21
        disagreements = []
        for name, page in cases.items():
            report = evaluate(rules, parse_document(page, name))
            engine_verdicts = {
                (v.constraint_name, v.element_path) for v in report.violations if v.constraint_name in GRID_RULES
            }
            if engine_verdicts != nested_if_oracle(page):
                disagreements.append((name, engine_verdicts, nested_if_oracle(page)))
        assert disagreements == []
        # the family must actually exercise both verdicts
        assert sum(1 for p in cases.values() if nested_if_oracle(p)) >= 15


# 3 ------------------------------------------------------------------------


def test_3_named_rule_fixtures():
    with criterion("3 five named rules: 10/10 pass/fail fixtures correct"):
        rules = get_rulepack("bootstrap").parse()
        correct = 0
        for rule in NAMED_RULES:
            for outcome in ("pass", "fail"):
                path = FIXTURES / "bootstrap" / f"{rule}.{outcome}.html"
                report = evaluate(rules, parse_document(path.read_text(encoding="utf-8"), str(path)))
                names = [v.constraint_name for v in report.violations]
                if report.errors == [] and names == ([] if outcome == "pass" else [rule]):
                    correct += 1
        assert correct == 10


# 4 ------------------------------------------------------------------------


def test_4_wildcard_exhaustive():
    with criterion("4 wildcard matcher equals anchored-regex oracle over {a,b,-,*}^<=4"):
        words = ["".join(p) for n in range(5) for p in itertools.product("ab-*", repeat=n)]
        total = agree = 0
        for pattern in words:
            if not pattern:
                continue
            regex = re.compile("".join(".*" if c == "*" else re.escape(c) for c in pattern), re.DOTALL)
            for token in words:
                total += 1
                agree += match_class_pattern([token], pattern) == (regex.fullmatch(token) is not None)
        assert total == 340 * 341
        assert agree == total


# 5 ------------------------------------------------------------------------


def test_5_undefined_absorption():
    with criterion("5 1000 chains from an orphan's .parent: booleans false, navigation Undefined"):
        orphan = parse_document('<div class="col"><span></span></div>', fragment=True).elements[0]
        assert orphan.parent is None
        rng = random.Random(5)
        n_bool = 0
        for _ in range(1000):
            source, is_bool = random_undefined_chain(rng, max_depth=4)
            value = eval_expr(parse_expression(source), orphan)
            if is_bool:
                n_bool += 1
                assert value is False, source
            else:
                assert value is UNDEFINED, source
        assert 0 < n_bool < 1000


# 6 ------------------------------------------------------------------------


def test_6_dsl_round_trip():
    with criterion("6 500 generated rule files round-trip; sample page and rules parse verbatim"):
        rng = random.Random(6)
        for _ in range(500):
            original = random_rule_file(rng)
            first = parse_rules(render_rules(original))
            assert first == original
            assert parse_rules(render_rules(first)) == first
        sample_rules_file = parse_rules((FIXTURES / "sample.evl").read_text(encoding="utf-8"))
        assert [c.name for c in sample_rules_file.constraints] == ["DivWithColHasRowParent", "DivWithRowHasContainerParent"]
        sample = parse_document(_sample_page())
        assert len(sample.elements_by_tag("div")) == 5


# 7 ------------------------------------------------------------------------


def _corpus() -> list[tuple[str, list[str]]]:
    runs = []
    for html in sorted(FIXTURES.rglob("*.html")):
        runs.append((str(html), ["--rulepack", "bootstrap"]))
    for evl in ("sample.evl", "sample_widened.evl"):
        runs.append((str(FIXTURES / "sample.html"), ["--rules", str(FIXTURES / evl)]))
    for name, page in grid_mutations().items():
        runs.append((page, ["--rulepack", "bootstrap", "--inline-marker"]))
    return runs


def _cli_bytes(source: str, rule_args: list[str], fmt: str) -> bytes:
    out = io.StringIO()
    if "--inline-marker" in rule_args:
        argv = ["--inline", source, *[a for a in rule_args if a != "--inline-marker"]]
    else:
        argv = ["--source", source, *rule_args]
    run([*argv, "--format", fmt], stdout=out, stderr=io.StringIO())
    return out.getvalue().encode("utf-8")


def test_7_determinism():
    with criterion("7 byte-identical text and JSON reports across 3 runs for every corpus fixture"):
        corpus = _corpus()
        assert len(corpus) >= 30
        for source, rule_args in corpus:
            for fmt in ("text", "json"):
                outputs = {_cli_bytes(source, rule_args, fmt) for _ in range(3)}
                assert len(outputs) == 1, (source[:40], fmt)


# 8 ------------------------------------------------------------------------


def _webcheck(*args, cwd):
    return subprocess.run([sys.executable, "-m", "webcheck", *args], capture_output=True, text=True, cwd=cwd)


def test_8_cli_contract(tmp_path):
    with criterion("8 CLI exit codes 0/1/2/3 by scripted invocation; JSON validates against schema"):
        (tmp_path / "files" / "bootstrap").mkdir(parents=True)
        for name in ("newCheck.html", "newCheck.evl"):
            (tmp_path / "files" / "bootstrap" / name).write_text(
                (FIXTURES / "files" / "bootstrap" / name).read_text(encoding="utf-8"), encoding="utf-8"
            )
        (tmp_path / "mutated.html").write_text(_sample_page().replace(' class="row"', ""), encoding="utf-8")
        (tmp_path / "widened.evl").write_text((FIXTURES / "sample_widened.evl").read_text(), encoding="utf-8")
        (tmp_path / "broken.evl").write_text("context div { }", encoding="utf-8")

        ok = _webcheck("--source", "files/bootstrap/newCheck.html", "--rules", "files/bootstrap/newCheck.evl", cwd=tmp_path)
        assert ok.returncode == 0, ok.stderr
        assert ok.stdout == "0 violation(s), 5 element(s) checked\n"

        bad = _webcheck("--source", "mutated.html", "--rules", "widened.evl", cwd=tmp_path)
        assert bad.returncode == 1
        assert COL_MESSAGE in bad.stdout

        usage = _webcheck("--source", "mutated.html", cwd=tmp_path)
        assert usage.returncode == 2
        syntax = _webcheck("--source", "mutated.html", "--rules", "broken.evl", cwd=tmp_path)
        assert syntax.returncode == 2

        missing = _webcheck("--source", "mutated.html", "--rules", "missing.evl", cwd=tmp_path)
        assert missing.returncode == 3

        schema = json.loads(resources.files("webcheck").joinpath("report.schema.json").read_text(encoding="utf-8"))
        for args in (
            ["--source", "files/bootstrap/newCheck.html", "--rules", "files/bootstrap/newCheck.evl"],
            ["--source", "mutated.html", "--rules", "widened.evl"],
            ["--source", "mutated.html", "--rulepack", "bootstrap"],
        ):
            proc = _webcheck(*args, "--format", "json", cwd=tmp_path)
            data = json.loads(proc.stdout)
            jsonschema.validate(data, schema)
            assert list(data) == ["source", "violations", "elements_checked", "constraints_evaluated", "errors"]
