"""webcheck: validate HTML pages against declarative guard/check/message rules."""

__version__ = "0.1.0"

from webcheck.constraint_dsl import RuleFile, RuleSyntaxError, parse_rules
from webcheck.engine import Report, Violation, WebChecker, evaluate
from webcheck.html_model import Document, Element, parse_document
from webcheck.rulepacks import RulePack, get_rulepack
from webcheck.sources import FetchPolicy, SourceSpec, resolve

__all__ = [
    "Document",
    "Element",
    "FetchPolicy",
    "Report",
    "RuleFile",
    "RulePack",
    "RuleSyntaxError",
    "SourceSpec",
    "Violation",
    "WebChecker",
    "evaluate",
    "get_rulepack",
    "parse_document",
    "parse_rules",
    "resolve",
    "__version__",
]
