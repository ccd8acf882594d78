"""Lexer, parser and renderer for constraint rule files (``.evl``).

A rule file is a list of contexts, each naming an element type as
``t_<tag>`` and holding named constraints::

    context t_div {
        constraint DivWithColHasRowParent {
            guard : self.class.includes("col")
            check : self.parent.hasClass("row") and self.parent.is("div")
            message : "..."
        }
    }

``guard`` is optional; ``check`` and ``message`` are required and the
three blocks must appear in that order. An optional trailing
``fix { ... }`` block is kept verbatim and never executed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from webcheck.errors import WebcheckError

KEYWORDS = frozenset(
    {"context", "constraint", "guard", "check", "message", "fix", "and", "or", "not", "self", "true", "false"}
)
PUNCTUATION = frozenset("{}().,:")


class RuleSyntaxError(WebcheckError):
    """A rule file failed to parse."""

    def __init__(self, message: str, line: int, column: int, source_name: str = "<rules>") -> None:
        super().__init__(f"{source_name}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.source_name = source_name


# AST


@dataclass(frozen=True)
class SelfRef:
    pass


@dataclass(frozen=True)
class StringLit:
    value: str


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class PropertyAccess:
    receiver: Expr
    name: str


@dataclass(frozen=True)
class MethodCall:
    receiver: Expr
    name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class And:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    operand: Expr


Expr = Union[SelfRef, StringLit, BoolLit, PropertyAccess, MethodCall, And, Or, Not]


@dataclass(frozen=True)
class ConstraintDecl:
    name: str
    guard: Optional[Expr]
    check: Expr
    message: Expr
    fix_body: Optional[str] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ContextDecl:
    tag: str
    constraints: tuple[ConstraintDecl, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RuleFile:
    contexts: tuple[ContextDecl, ...]
    source_name: str = field(default="<rules>", compare=False)

    @property
    def constraints(self) -> list[ConstraintDecl]:
        return [c for ctx in self.contexts for c in ctx.constraints]


# Lexer


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "keyword", "string", "punct", "eof"
    value: str
    line: int
    column: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of file"
        if self.kind == "string":
            return "string literal"
        return repr(self.value)


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or ("0" <= ch <= "9")


class Lexer:
    """On-demand tokenizer; ``read_raw_block`` supports unparsed fix bodies."""

    def __init__(self, text: str, source_name: str) -> None:
        self.text = text
        self.source_name = source_name
        self.pos = 0
        self.line = 1
        self.column = 1

    def error(self, message: str, line: int, column: int) -> RuleSyntaxError:
        return RuleSyntaxError(message, line, column, self.source_name)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
            self.pos += 1

    def _skip_trivia(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n\f\ufeff":
                self._advance()
            elif text.startswith("//", self.pos):
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
            else:
                break

    def next_token(self) -> Token:
        self._skip_trivia()
        line, col = self.line, self.column
        if self.pos >= len(self.text):
            return Token("eof", "", line, col)
        ch = self.text[self.pos]
        if _is_ident_start(ch):
            start = self.pos
            while self.pos < len(self.text) and _is_ident_char(self.text[self.pos]):
                self._advance()
            word = self.text[start : self.pos]
            return Token("keyword" if word in KEYWORDS else "ident", word, line, col)
        if ch == '"':
            return Token("string", self._read_string(line, col), line, col)
        if ch in PUNCTUATION:
            self._advance()
            return Token("punct", ch, line, col)
        raise self.error(f"unexpected character {ch!r}", line, col)

    def _read_string(self, line: int, col: int) -> str:
        self._advance()  # opening quote
        out: list[str] = []
        while True:
            if self.pos >= len(self.text) or self.text[self.pos] == "\n":
                raise self.error("unterminated string literal", line, col)
            ch = self.text[self.pos]
            if ch == '"':
                self._advance()
                return "".join(out)
            if ch == "\\":
                nxt = self.text[self.pos + 1] if self.pos + 1 < len(self.text) else ""
                if nxt not in ('"', "\\"):
                    raise self.error(f"invalid escape sequence '\\{nxt}'", self.line, self.column)
                out.append(nxt)
                self._advance(2)
                continue
            out.append(ch)
            self._advance()

    def read_raw_block(self, line: int, col: int) -> str:
        """Consume text up to the ``}`` balancing an already-consumed ``{``."""
        depth = 1
        start = self.pos
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == '"':
                s_line, s_col = self.line, self.column
                self._advance()
                while self.pos < len(text) and text[self.pos] not in '"\n':
                    self._advance(2 if text[self.pos] == "\\" and self.pos + 1 < len(text) else 1)
                if self.pos >= len(text) or text[self.pos] == "\n":
                    raise self.error("unterminated string literal", s_line, s_col)
                self._advance()
                continue
            if text.startswith("//", self.pos):
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    body = text[start : self.pos]
                    self._advance()
                    return body
            self._advance()
        raise self.error("unbalanced '{' in fix block", line, col)


# Parser


class _Parser:
    def __init__(self, text: str, source_name: str) -> None:
        self.lexer = Lexer(text, source_name)
        self.source_name = source_name
        self._peeked: Optional[Token] = None

    def peek(self) -> Token:
        if self._peeked is None:
            self._peeked = self.lexer.next_token()
        return self._peeked

    def advance(self) -> Token:
        tok = self.peek()
        self._peeked = None
        return tok

    def error(self, message: str, tok: Token) -> RuleSyntaxError:
        return RuleSyntaxError(message, tok.line, tok.column, self.source_name)

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind in ("keyword", "punct") and tok.value == value

    def expect(self, value: str, after: str = "") -> Token:
        tok = self.peek()
        if tok.kind in ("keyword", "punct") and tok.value == value:
            return self.advance()
        where = f" after {after}" if after else ""
        raise self.error(f"expected '{value}'{where}, found {tok.describe()}", tok)

    def expect_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind == "ident":
            return self.advance()
        if tok.kind == "keyword":
            raise self.error(f"expected {what}, found reserved word {tok.value!r}", tok)
        raise self.error(f"expected {what}, found {tok.describe()}", tok)

    # file structure

    def parse_file(self) -> RuleFile:
        contexts: list[ContextDecl] = []
        while self.peek().kind != "eof":
            contexts.append(self.parse_context())
        if not contexts:
            raise self.error("rule file contains no contexts", self.peek())
        return RuleFile(tuple(contexts), self.source_name)

    def parse_context(self) -> ContextDecl:
        start = self.expect("context")
        name_tok = self.peek()
        if name_tok.kind != "ident" or not name_tok.value.startswith("t_"):
            raise self.error("context name must start with t_", name_tok)
        self.advance()
        tag = name_tok.value[2:].lower()
        if not tag:
            raise self.error("context name 't_' is missing an element tag", name_tok)
        self.expect("{", after=f"context {name_tok.value}")
        constraints: list[ConstraintDecl] = []
        seen: set[str] = set()
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.error(f"expected '}}' closing context {name_tok.value}, found end of file", self.peek())
            decl = self.parse_constraint(seen)
            constraints.append(decl)
        if not constraints:
            raise self.error(f"context {name_tok.value} has no constraints", self.peek())
        self.expect("}")
        return ContextDecl(tag, tuple(constraints), start.line)

    def parse_constraint(self, seen: set[str]) -> ConstraintDecl:
        start = self.expect("constraint")
        name_tok = self.expect_ident("constraint name")
        if name_tok.value in seen:
            raise self.error(f"duplicate constraint name {name_tok.value!r} in context", name_tok)
        seen.add(name_tok.value)
        self.expect("{", after=f"constraint {name_tok.value}")

        guard = None
        if self.at("guard"):
            self.advance()
            self.expect(":", after="'guard'")
            guard = self.parse_expr()
        self.expect("check")
        self.expect(":", after="'check'")
        check = self.parse_expr()
        self.expect("message")
        self.expect(":", after="'message'")
        message = self.parse_expr()

        fix_body = None
        if self.at("fix"):
            self.advance()
            brace = self.expect("{", after="'fix'")
            fix_body = self.lexer.read_raw_block(brace.line, brace.column)
        self.expect("}", after=f"constraint {name_tok.value}")
        return ConstraintDecl(name_tok.value, guard, check, message, fix_body, start.line)

    # expressions

    def parse_expr(self) -> Expr:
        left = self.parse_and()
        while self.at("or"):
            self.advance()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_unary()
        while self.at("and"):
            self.advance()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.at("not"):
            self.advance()
            return Not(self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while self.at("."):
            self.advance()
            name = self.expect_ident("property or method name").value
            if self.at("("):
                self.advance()
                args: list[Expr] = []
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.at(","):
                        self.advance()
                        args.append(self.parse_expr())
                self.expect(")", after=f"arguments of {name}")
                expr = MethodCall(expr, name, tuple(args))
            else:
                expr = PropertyAccess(expr, name)
        return expr

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "string":
            self.advance()
            return StringLit(tok.value)
        if tok.kind == "keyword":
            if tok.value == "self":
                self.advance()
                return SelfRef()
            if tok.value in ("true", "false"):
                self.advance()
                return BoolLit(tok.value == "true")
        if tok.kind == "punct" and tok.value == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise self.error(f"expected expression, found {tok.describe()}", tok)


def parse_rules(text: str, source_name: str = "<rules>") -> RuleFile:
    """Parse rule-file text, raising :class:`RuleSyntaxError` on bad input."""
    return _Parser(text, source_name).parse_file()


def parse_expression(text: str) -> Expr:
    """Parse a standalone expression (used by tests and tooling)."""
    parser = _Parser(text, "<expr>")
    expr = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "eof":
        raise parser.error(f"unexpected {tok.describe()} after expression", tok)
    return expr


# Rendering

_PRECEDENCE = {Or: 1, And: 2, Not: 3}
_POSTFIX = 4


def _prec(e: Expr) -> int:
    return _PRECEDENCE.get(type(e), _POSTFIX)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def expr_to_string(e: Expr) -> str:
    """Render ``e`` with the fewest parentheses that preserve its shape."""
    if isinstance(e, SelfRef):
        return "self"
    if isinstance(e, StringLit):
        return _quote(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, (PropertyAccess, MethodCall)):
        recv = expr_to_string(e.receiver)
        if _prec(e.receiver) < _POSTFIX:
            recv = f"({recv})"
        if isinstance(e, PropertyAccess):
            return f"{recv}.{e.name}"
        return f"{recv}.{e.name}({', '.join(expr_to_string(a) for a in e.args)})"
    if isinstance(e, Not):
        inner = expr_to_string(e.operand)
        if _prec(e.operand) < _PRECEDENCE[Not]:
            inner = f"({inner})"
        return f"not {inner}"
    if isinstance(e, (And, Or)):
        op = "and" if isinstance(e, And) else "or"
        mine = _prec(e)
        left = expr_to_string(e.left)
        if _prec(e.left) < mine:
            left = f"({left})"
        right = expr_to_string(e.right)
        # connectives are left-associative, so an equal-precedence right child needs parens
        if _prec(e.right) <= mine:
            right = f"({right})"
        return f"{left} {op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def render_rules(rules: RuleFile) -> str:
    """Canonical text of a rule file; parses back to an equal :class:`RuleFile`."""
    lines: list[str] = []
    for ctx in rules.contexts:
        lines.append(f"context t_{ctx.tag} {{")
        for c in ctx.constraints:
            lines.append(f"    constraint {c.name} {{")
            if c.guard is not None:
                lines.append(f"        guard : {expr_to_string(c.guard)}")
            lines.append(f"        check : {expr_to_string(c.check)}")
            lines.append(f"        message : {expr_to_string(c.message)}")
            if c.fix_body is not None:
                lines.append(f"        fix {{{c.fix_body}}}")
            lines.append("    }")
        lines.append("}")
    return "\n".join(lines) + "\n"
