"""Rule evaluation against parsed documents.

Runtime values are plain Python objects:

=========== ==========================
``bool``    boolean
``str``     string
``tuple``   string list (class tokens)
``Element`` element
UNDEFINED   missing parent/sibling/attribute
=========== ==========================

UNDEFINED absorbs navigation (``undefined.parent`` is UNDEFINED), makes
boolean methods return ``False`` and coerces to ``False`` wherever a
boolean is required.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

from webcheck.constraint_dsl import (
    And,
    BoolLit,
    ConstraintDecl,
    Expr,
    MethodCall,
    Not,
    Or,
    PropertyAccess,
    RuleFile,
    SelfRef,
    StringLit,
    parse_rules,
)
from webcheck.errors import WebcheckError
from webcheck.html_model import Document, Element, element_path, match_class_pattern, parse_document
from webcheck.sources import FetchPolicy, SourceSpec, resolve


class _Undefined:
    _instance: Optional[_Undefined] = None

    def __new__(cls) -> _Undefined:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "undefined"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()

Value = Union[bool, str, tuple, Element, _Undefined]


class EvaluationError(WebcheckError):
    """A rule expression could not be evaluated (bad type, name or arity)."""


def type_name(value: Value) -> str:
    if value is UNDEFINED:
        return "Undefined"
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, str):
        return "Str"
    if isinstance(value, tuple):
        return "StrList"
    if isinstance(value, Element):
        return "Elem"
    return type(value).__name__


# Property getters: receiver type -> name -> getter.
_PROPERTIES: dict[type, dict[str, Callable[[Any], Value]]] = {
    Element: {
        "class": lambda el: tuple(el.class_tokens),
        "parent": lambda el: _or_undefined(el.parent),
        "previousSibling": lambda el: _or_undefined(el.previous_element_sibling),
        "nextSibling": lambda el: _or_undefined(el.next_element_sibling),
    },
}

# Methods: receiver type -> name -> (arity, implementation).
_METHODS: dict[type, dict[str, tuple[int, Callable[..., Value]]]] = {
    Element: {
        "hasClass": (1, lambda el, p: match_class_pattern(el.class_tokens, p)),
        "is": (1, lambda el, t: el.tag == t.lower()),
        "attribute": (1, lambda el, n: _or_undefined(el.attributes.get(n.lower()))),
        "hasAttribute": (1, lambda el, n: n.lower() in el.attributes),
        "isDefined": (0, lambda el: True),
    },
    tuple: {
        "includes": (1, lambda toks, p: match_class_pattern(list(toks), p)),
        "isDefined": (0, lambda toks: True),
    },
    str: {
        "equals": (1, lambda s, other: s == other),
        "isDefined": (0, lambda s: True),
    },
    bool: {
        "isDefined": (0, lambda b: True),
    },
}

_BOOL_METHODS = frozenset({"hasClass", "is", "hasAttribute", "includes", "equals", "isDefined"})
_KNOWN_PROPERTIES = frozenset(n for table in _PROPERTIES.values() for n in table)
_METHOD_ARITY = {n: spec[0] for table in _METHODS.values() for n, spec in table.items()}


def _or_undefined(v: Any) -> Value:
    return UNDEFINED if v is None else v


def _receiver_key(value: Value) -> type:
    if isinstance(value, bool):
        return bool
    return type(value)


def _as_bool(value: Value, what: str) -> bool:
    if value is UNDEFINED:
        return False
    if isinstance(value, bool):
        return value
    raise EvaluationError(f"{what} must be Bool, got {type_name(value)}")


def eval_expr(expr: Expr, self_el: Element) -> Value:
    """Evaluate ``expr`` with ``self`` bound to ``self_el``."""
    if isinstance(expr, SelfRef):
        return self_el
    if isinstance(expr, StringLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, And):
        if not _as_bool(eval_expr(expr.left, self_el), "operand of 'and'"):
            return False
        return _as_bool(eval_expr(expr.right, self_el), "operand of 'and'")
    if isinstance(expr, Or):
        if _as_bool(eval_expr(expr.left, self_el), "operand of 'or'"):
            return True
        return _as_bool(eval_expr(expr.right, self_el), "operand of 'or'")
    if isinstance(expr, Not):
        return not _as_bool(eval_expr(expr.operand, self_el), "operand of 'not'")
    if isinstance(expr, PropertyAccess):
        return _get_property(eval_expr(expr.receiver, self_el), expr.name)
    if isinstance(expr, MethodCall):
        receiver = eval_expr(expr.receiver, self_el)
        args = [eval_expr(a, self_el) for a in expr.args]
        return _call_method(receiver, expr.name, args)
    raise EvaluationError(f"unsupported expression node {type(expr).__name__}")


def _get_property(receiver: Value, name: str) -> Value:
    if receiver is UNDEFINED:
        if name in _KNOWN_PROPERTIES:
            return UNDEFINED
        if name in _METHOD_ARITY:
            raise EvaluationError(f"'{name}' is a method; call it as {name}(...)")
        raise EvaluationError(f"unknown property '{name}'")
    getter = _PROPERTIES.get(_receiver_key(receiver), {}).get(name)
    if getter is None:
        if name in _METHOD_ARITY:
            raise EvaluationError(f"'{name}' is a method; call it as {name}(...)")
        raise EvaluationError(f"unknown property '{name}' on {type_name(receiver)}")
    return getter(receiver)


def _call_method(receiver: Value, name: str, args: list[Value]) -> Value:
    if name not in _METHOD_ARITY:
        if name in _KNOWN_PROPERTIES:
            raise EvaluationError(f"'{name}' is a property; write it without parentheses")
        raise EvaluationError(f"unknown method '{name}'")
    arity = _METHOD_ARITY[name]
    if len(args) != arity:
        raise EvaluationError(f"method '{name}' takes {arity} argument(s), got {len(args)}")
    for a in args:
        if a is not UNDEFINED and not isinstance(a, str):
            raise EvaluationError(f"method '{name}' expects Str arguments, got {type_name(a)}")

    if receiver is UNDEFINED:
        return False if name in _BOOL_METHODS else UNDEFINED
    spec = _METHODS.get(_receiver_key(receiver), {}).get(name)
    if spec is None:
        raise EvaluationError(f"unknown method '{name}' on {type_name(receiver)}")
    if any(a is UNDEFINED for a in args):
        return False if name in _BOOL_METHODS else UNDEFINED
    return spec[1](receiver, *args)


@dataclass(frozen=True)
class Violation:
    constraint_name: str
    context_tag: str
    message: str
    element_path: str
    line: int
    column: int


@dataclass(frozen=True)
class EvaluationIssue:
    """An expression that failed to evaluate; not a page defect."""

    constraint_name: str
    context_tag: str
    block: str
    element_path: str
    message: str


@dataclass
class Report:
    source_name: str
    violations: list[Violation] = field(default_factory=list)
    errors: list[EvaluationIssue] = field(default_factory=list)
    elements_checked: int = 0
    constraints_evaluated: int = 0
    guards_passed: int = 0
    checks_evaluated: int = 0

    @property
    def messages(self) -> list[str]:
        return [v.message for v in self.violations]


def _fallback_message(name: str) -> str:
    return f"constraint {name} unsatisfied (message expression failed)"


def evaluate(rules: RuleFile, doc: Document) -> Report:
    """Run every constraint of ``rules`` over the matching elements of ``doc``.

    Violations and evaluation issues are ordered by element (document
    order) and then by constraint position in the rule file.
    """
    report = Report(source_name=doc.source_name)
    checked: set[int] = set()
    found: list[tuple[int, int, Violation]] = []
    issues: list[tuple[int, int, EvaluationIssue]] = []
    position = 0

    for ctx in rules.contexts:
        elements = doc.elements_by_tag(ctx.tag)
        for constraint in ctx.constraints:
            for el in elements:
                checked.add(id(el))
                report.constraints_evaluated += 1
                outcome = _run_constraint(constraint, ctx.tag, el, report)
                for item in outcome:
                    bucket = found if isinstance(item, Violation) else issues
                    bucket.append((el._order, position, item))
            position += 1

    found.sort(key=lambda t: (t[0], t[1]))
    issues.sort(key=lambda t: (t[0], t[1]))
    report.violations = [v for _, _, v in found]
    report.errors = [i for _, _, i in issues]
    report.elements_checked = len(checked)
    return report


def _run_constraint(
    constraint: ConstraintDecl, tag: str, el: Element, report: Report
) -> list[Union[Violation, EvaluationIssue]]:
    def issue(block: str, exc: Exception) -> EvaluationIssue:
        return EvaluationIssue(constraint.name, tag, block, element_path(el), str(exc))

    if constraint.guard is not None:
        try:
            applies = _as_bool(eval_expr(constraint.guard, el), "guard")
        except EvaluationError as exc:
            return [issue("guard", exc)]
        if not applies:
            return []
    report.guards_passed += 1

    report.checks_evaluated += 1
    try:
        ok = _as_bool(eval_expr(constraint.check, el), "check")
    except EvaluationError as exc:
        return [issue("check", exc)]
    if ok:
        return []

    out: list[Union[Violation, EvaluationIssue]] = []
    try:
        message = eval_expr(constraint.message, el)
        if not isinstance(message, str):
            raise EvaluationError(f"message must be Str, got {type_name(message)}")
    except EvaluationError as exc:
        out.append(issue("message", exc))
        message = _fallback_message(constraint.name)
    out.insert(
        0,
        Violation(
            constraint.name,
            tag,
            message,
            element_path(el),
            el.source_line or 0,
            el.source_column or 0,
        ),
    )
    return out


# Checker facade


class CheckerStateError(WebcheckError):
    """The checker was used before it was fully configured."""


class MissingSource(CheckerStateError):
    pass


class MissingValidation(CheckerStateError):
    pass


class WebChecker:
    """Four-step facade: set the source, set the rules, check, read errors.

    >>> checker = WebChecker()
    >>> checker.set_source(SourceSpec("inline", '<div class="col"></div>'))
    >>> checker.set_validation('context t_div { constraint C { check : true message : "m" } }')
    >>> checker.check().violations
    []
    >>> checker.errors()
    []
    """

    def __init__(self, policy: Optional[FetchPolicy] = None) -> None:
        self.policy = policy or FetchPolicy()
        self._source: Optional[SourceSpec] = None
        self._rules: Optional[RuleFile] = None
        self._report: Optional[Report] = None

    def set_source(self, source: Union[SourceSpec, str, os.PathLike], fragment: bool = False) -> None:
        """Accept a :class:`SourceSpec`, an http(s) URL, or a file path."""
        if not isinstance(source, SourceSpec):
            source = SourceSpec.from_string(os.fspath(source), fragment=fragment)
        self._source = source
        self._report = None

    def set_validation(self, rules: Union[RuleFile, str, os.PathLike]) -> None:
        """Accept a parsed :class:`RuleFile`, a path to an ``.evl`` file, or rule text."""
        if isinstance(rules, RuleFile):
            self._rules = rules
        else:
            text, name = load_rules_text(rules)
            self._rules = parse_rules(text, name)
        self._report = None

    def _require(self) -> tuple[SourceSpec, RuleFile]:
        if self._rules is None:
            raise MissingValidation("no validation rules set; call set_validation() first")
        if self._source is None:
            raise MissingSource("no HTML source set; call set_source() first")
        return self._source, self._rules

    def check(self) -> Report:
        source, rules = self._require()
        html, name = resolve(source, self.policy)
        doc = parse_document(html, name, fragment=source.fragment)
        self._report = evaluate(rules, doc)
        return self._report

    def errors(self) -> list[str]:
        """Messages of the last check's violations, in report order."""
        self._require()
        if self._report is None:
            raise CheckerStateError("check() has not been run")
        return self._report.messages

    @property
    def report(self) -> Optional[Report]:
        return self._report


def load_rules_text(rules: Union[str, os.PathLike]) -> tuple[str, str]:
    """Return ``(text, source_name)`` for a rules path or literal rule text.

    A string counts as a path if it names an existing file or ends in
    ``.evl``; anything else is taken as rule text.
    """
    if isinstance(rules, os.PathLike) or (
        isinstance(rules, str) and "\n" not in rules and (rules.endswith(".evl") or os.path.isfile(rules))
    ):
        path = os.fspath(rules)
        text, _ = resolve(SourceSpec("file", path), FetchPolicy())
        return text, path
    return str(rules), "<rules>"

