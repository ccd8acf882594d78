"""Lenient HTML parsing into an immutable element tree.

The tokenizer is the stdlib :class:`html.parser.HTMLParser`; tree
construction follows a subset of the WHATWG recovery rules (implied end
tags, void elements, implicit ``html``/``head``/``body`` and table
sections). Malformed markup never raises.
"""

from __future__ import annotations

import re
from html.parser import HTMLParser
from types import MappingProxyType
from typing import Iterator, Mapping, Optional, Union

VOID_ELEMENTS = frozenset(
    {
        "area", "base", "basefont", "bgsound", "br", "col", "embed", "frame",
        "hr", "img", "input", "keygen", "link", "meta", "param", "source",
        "track", "wbr",
    }
)

HEAD_ELEMENTS = frozenset(
    {
        "base", "basefont", "bgsound", "link", "meta", "noframes", "noscript",
        "script", "style", "template", "title",
    }
)

HEADINGS = frozenset({"h1", "h2", "h3", "h4", "h5", "h6"})

# Start tags that close an open <p> in button scope.
CLOSES_P = frozenset(
    {
        "address", "article", "aside", "blockquote", "center", "dd", "details",
        "dialog", "dir", "div", "dl", "dt", "fieldset", "figcaption", "figure",
        "footer", "form", "header", "hgroup", "hr", "li", "listing", "main",
        "menu", "nav", "ol", "p", "plaintext", "pre", "search", "section",
        "summary", "table", "ul", "xmp",
    }
    | HEADINGS
)

IMPLIED_END_TAGS = frozenset(
    {"dd", "dt", "li", "optgroup", "option", "p", "rb", "rp", "rt", "rtc"}
)

SCOPE_BOUNDARIES = frozenset(
    {"applet", "caption", "html", "marquee", "object", "table", "td", "th", "template"}
)

SPECIAL_ELEMENTS = frozenset(
    {
        "address", "applet", "area", "article", "aside", "base", "basefont",
        "bgsound", "blockquote", "body", "br", "button", "caption", "center",
        "col", "colgroup", "dd", "details", "dir", "div", "dl", "dt", "embed",
        "fieldset", "figcaption", "figure", "footer", "form", "frame",
        "frameset", "h1", "h2", "h3", "h4", "h5", "h6", "head", "header",
        "hgroup", "hr", "html", "iframe", "img", "input", "keygen", "li",
        "link", "listing", "main", "marquee", "menu", "meta", "nav",
        "noembed", "noframes", "noscript", "object", "ol", "p", "param",
        "plaintext", "pre", "script", "search", "section", "select", "source",
        "style", "summary", "table", "tbody", "td", "template", "textarea",
        "tfoot", "th", "thead", "title", "tr", "track", "ul", "wbr", "xmp",
    }
)

TABLE_SECTIONS = frozenset({"tbody", "thead", "tfoot"})

FRAGMENT_ROOT_TAG = "#fragment"

_ASCII_WS = re.compile(r"[ \t\n\f\r]+")

Node = Union["Element", str]


class Element:
    """One element of a parsed document.

    Elements are created by :func:`parse_document` and are read-only
    afterwards. ``children`` holds both elements and text runs (``str``).
    """

    __slots__ = (
        "tag",
        "attributes",
        "children",
        "source_line",
        "source_column",
        "_parent",
        "_elements",
        "_sibling_index",
        "_order",
    )

    def __init__(
        self,
        tag: str,
        attributes: Mapping[str, str],
        source_line: Optional[int] = None,
        source_column: Optional[int] = None,
    ) -> None:
        self.tag = tag
        self.attributes: Mapping[str, str] = attributes
        self.children: tuple[Node, ...] = ()
        self.source_line = source_line
        self.source_column = source_column
        self._parent: Optional[Element] = None
        self._elements: tuple[Element, ...] = ()
        self._sibling_index = 0
        self._order = 0

    def __repr__(self) -> str:
        classes = ".".join(self.class_tokens)
        return f"<Element {self.tag}{'.' + classes if classes else ''}>"

    @property
    def parent(self) -> Optional[Element]:
        parent = self._parent
        if parent is None or parent.tag == FRAGMENT_ROOT_TAG:
            return None
        return parent

    @property
    def element_children(self) -> tuple[Element, ...]:
        return self._elements

    @property
    def previous_element_sibling(self) -> Optional[Element]:
        if self._parent is None or self._sibling_index == 0:
            return None
        return self._parent._elements[self._sibling_index - 1]

    @property
    def next_element_sibling(self) -> Optional[Element]:
        if self._parent is None:
            return None
        siblings = self._parent._elements
        i = self._sibling_index + 1
        return siblings[i] if i < len(siblings) else None

    @property
    def class_tokens(self) -> list[str]:
        value = self.attributes.get("class")
        if not value:
            return []
        return [t for t in _ASCII_WS.split(value) if t]

    @property
    def text(self) -> str:
        """Concatenated descendant text."""
        parts: list[str] = []
        for child in self.children:
            parts.append(child if isinstance(child, str) else child.text)
        return "".join(parts)

    def iter(self) -> Iterator[Element]:
        """Pre-order walk over this element and its element descendants."""
        stack = [self]
        while stack:
            el = stack.pop()
            yield el
            stack.extend(reversed(el._elements))


class Document:
    """A parsed HTML page or fragment."""

    __slots__ = ("root", "source_name", "is_fragment", "_elements")

    def __init__(self, root: Element, source_name: str, is_fragment: bool) -> None:
        self.root = root
        self.source_name = source_name
        self.is_fragment = is_fragment
        walk = list(root.iter())
        if is_fragment:
            walk = walk[1:]
        for i, el in enumerate(walk):
            el._order = i
        self._elements: tuple[Element, ...] = tuple(walk)

    def __repr__(self) -> str:
        kind = "fragment" if self.is_fragment else "document"
        return f"<Document {kind} {self.source_name!r} ({len(self._elements)} elements)>"

    @property
    def elements(self) -> tuple[Element, ...]:
        """All elements in document order; excludes a fragment's synthetic root."""
        return self._elements

    def elements_by_tag(self, tag: str) -> list[Element]:
        tag = tag.lower()
        return [el for el in self._elements if el.tag == tag]


class _TreeBuilder(HTMLParser):
    def __init__(self, fragment: bool) -> None:
        super().__init__(convert_charrefs=True)
        self.fragment = fragment
        self.head: Optional[Element] = None
        self.body: Optional[Element] = None
        self._children: dict[int, list] = {}
        if fragment:
            self.root = self._new(FRAGMENT_ROOT_TAG, {}, None)
        else:
            self.root = self._new("html", {}, None)
        self.stack: list[Element] = [self.root]

    # construction helpers

    def _new(self, tag: str, attrs: dict, pos: Optional[tuple[int, int]]) -> Element:
        line, col = (pos[0], pos[1] + 1) if pos else (None, None)
        el = Element(tag, attrs, line, col)
        self._children[id(el)] = []
        return el

    def _append(self, parent: Element, node: Node) -> None:
        kids = self._children[id(parent)]
        if isinstance(node, str) and kids and isinstance(kids[-1], str):
            kids[-1] += node
        else:
            kids.append(node)
        if isinstance(node, Element):
            node._parent = parent

    @property
    def current(self) -> Element:
        return self.stack[-1]

    def _in_body(self) -> bool:
        return self.fragment or self.body is not None

    def _ensure_body(self) -> None:
        if self._in_body():
            return
        while self.stack[-1] is not self.root:
            self.stack.pop()
        self.body = self._new("body", {}, None)
        self._append(self.root, self.body)
        self.stack.append(self.body)

    def _ensure_head(self) -> None:
        if self.head is None:
            self.head = self._new("head", {}, None)
            self._append(self.root, self.head)
        if self.head not in self.stack:
            self.stack.append(self.head)

    def _merge_attrs(self, el: Element, attrs: dict) -> None:
        for k, v in attrs.items():
            el.attributes.setdefault(k, v)

    def _open_tags(self) -> list[str]:
        return [el.tag for el in self.stack]

    def _in_scope(self, tags: frozenset | set, extra: frozenset = frozenset()) -> bool:
        boundaries = SCOPE_BOUNDARIES | extra
        for el in reversed(self.stack):
            if el.tag in tags:
                return True
            if el.tag in boundaries or el is self.root:
                return False
        return False

    def _pop_until(self, tags: frozenset | set) -> None:
        while len(self.stack) > 1:
            el = self.stack.pop()
            if el.tag in tags:
                return

    def _pop_implied(self, exclude: str = "") -> None:
        while (
            len(self.stack) > 1
            and self.current.tag in IMPLIED_END_TAGS
            and self.current.tag != exclude
        ):
            self.stack.pop()

    def _close_p(self) -> None:
        if self._in_scope({"p"}, frozenset({"button"})):
            self._pop_implied("p")
            self._pop_until({"p"})

    def _close_list_item(self, names: set[str]) -> None:
        for el in reversed(self.stack):
            if el is self.root:
                return
            if el.tag in names:
                self._pop_implied(el.tag)
                self._pop_until({el.tag})
                return
            if el.tag in SPECIAL_ELEMENTS and el.tag not in ("address", "div", "p"):
                return

    def _insert(self, tag: str, attrs: dict, pos: Optional[tuple[int, int]]) -> Element:
        el = self._new(tag, attrs, pos)
        self._append(self.current, el)
        if tag not in VOID_ELEMENTS:
            self.stack.append(el)
        return el

    def _clear_to_table_context(self, stops: frozenset) -> None:
        while len(self.stack) > 1 and self.current.tag not in stops:
            self.stack.pop()

    # tokenizer callbacks

    def handle_starttag(self, tag: str, attr_list: list) -> None:
        attrs: dict[str, str] = {}
        for name, value in attr_list:
            attrs.setdefault(name, "" if value is None else value)
        pos = self.getpos()

        if tag == "html":
            if not self.fragment:
                self._merge_attrs(self.root, attrs)
            return
        if tag == "head":
            if not self.fragment and not self._in_body():
                self._ensure_head()
                self._merge_attrs(self.head, attrs)
            return
        if tag == "body":
            if self.fragment:
                return
            if self.body is None:
                self._ensure_body()
                self.body.source_line, self.body.source_column = pos[0], pos[1] + 1
            self._merge_attrs(self.body, attrs)
            return

        if not self._in_body():
            if tag in HEAD_ELEMENTS:
                self._ensure_head()
                self._insert(tag, attrs, pos)
                return
            self._ensure_body()

        if tag in CLOSES_P:
            self._close_p()
        if tag in HEADINGS and self.current.tag in HEADINGS:
            self.stack.pop()
        elif tag == "li":
            self._close_list_item({"li"})
        elif tag in ("dd", "dt"):
            self._close_list_item({"dd", "dt"})
        elif tag == "option":
            if self.current.tag == "option":
                self.stack.pop()
        elif tag == "optgroup":
            if self.current.tag == "option":
                self.stack.pop()
            if self.current.tag == "optgroup":
                self.stack.pop()
        elif tag == "a":
            if self._in_scope({"a"}):
                self._pop_until({"a"})
        elif tag in ("td", "th"):
            if self._in_scope({"td", "th"}, frozenset({"table"})):
                self._pop_until({"td", "th"})
            if self.current.tag in TABLE_SECTIONS:
                self._insert("tr", {}, None)
            elif self.current.tag == "table":
                self._insert("tbody", {}, None)
                self._insert("tr", {}, None)
        elif tag == "tr":
            if self._in_scope({"tr", "td", "th"}, frozenset({"table"})):
                self._clear_to_table_context(TABLE_SECTIONS | {"table"})
            if self.current.tag == "table":
                self._insert("tbody", {}, None)
        elif tag in TABLE_SECTIONS:
            if self._in_scope(TABLE_SECTIONS | {"tr", "td", "th"}, frozenset({"table"})):
                self._clear_to_table_context(frozenset({"table"}))
        elif tag == "col":
            if self.current.tag == "table":
                self._insert("colgroup", {}, None)

        self._insert(tag, attrs, pos)

        if tag == "col" and self.current.tag == "colgroup":
            self.stack.pop()

    def handle_startendtag(self, tag: str, attrs: list) -> None:
        # A trailing slash is ignored on HTML elements.
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag: str) -> None:
        if tag in ("html", "body"):
            return
        if tag == "head":
            if self.head is not None and self.current is self.head:
                self.stack.pop()
            return
        if not self._in_body() and tag not in HEAD_ELEMENTS:
            return
        if tag == "p":
            self._close_p()
        elif tag == "li":
            if self._in_scope({"li"}, frozenset({"ol", "ul"})):
                self._pop_implied("li")
                self._pop_until({"li"})
        elif tag in HEADINGS:
            if self._in_scope(HEADINGS):
                self._pop_implied()
                self._pop_until(HEADINGS)
        elif tag in SPECIAL_ELEMENTS:
            if self._in_scope({tag}) or (tag in SCOPE_BOUNDARIES and tag in self._open_tags()):
                self._pop_implied(tag)
                self._pop_until({tag})
        else:
            for el in reversed(self.stack):
                if el is self.root:
                    return
                if el.tag == tag:
                    self._pop_implied(tag)
                    self._pop_until({tag})
                    return
                if el.tag in SPECIAL_ELEMENTS:
                    return

    def handle_data(self, data: str) -> None:
        if not data:
            return
        if not self._in_body():
            if self.current is not self.root and self.current is not self.head:
                # raw text of <title>, <script>, <style> and friends
                self._append(self.current, data)
                return
            if not data.strip(" \t\n\f\r"):
                return
            self._ensure_body()
        self._append(self.current, data)

    # finishing

    def finish(self) -> Element:
        self.close()
        for el in list(self._walk_built()):
            kids = self._children[id(el)]
            el.children = tuple(kids)
            el._elements = tuple(k for k in kids if isinstance(k, Element))
            for i, child in enumerate(el._elements):
                child._sibling_index = i
            el.attributes = MappingProxyType(el.attributes)
        return self.root

    def _walk_built(self) -> Iterator[Element]:
        stack = [self.root]
        while stack:
            el = stack.pop()
            yield el
            stack.extend(k for k in self._children[id(el)] if isinstance(k, Element))


def parse_document(html_text: str, source_name: str = "<inline>", fragment: bool = False) -> Document:
    """Parse ``html_text`` leniently.

    With ``fragment=True`` the text is parsed as body content under an
    invisible synthetic root; ``html``, ``head`` and ``body`` tags are
    then ignored. Otherwise the root is an ``html`` element and ``head``
    and ``body`` are created on demand, so empty input yields a bare
    ``html`` root.
    """
    builder = _TreeBuilder(fragment)
    builder.feed(html_text)
    root = builder.finish()
    return Document(root, source_name, fragment)


def elements_by_tag(doc: Document, tag: str) -> list[Element]:
    return doc.elements_by_tag(tag)


def parent_of(el: Element) -> Optional[Element]:
    return el.parent


def prev_element_sibling(el: Element) -> Optional[Element]:
    return el.previous_element_sibling


def next_element_sibling(el: Element) -> Optional[Element]:
    return el.next_element_sibling


def class_tokens(el: Element) -> list[str]:
    return el.class_tokens


def attribute_value(el: Element, name: str) -> Optional[str]:
    """Attribute lookup by case-insensitive name; bare attributes give ``""``."""
    return el.attributes.get(name.lower())


def has_attribute(el: Element, name: str) -> bool:
    return name.lower() in el.attributes


def glob_match(token: str, pattern: str) -> bool:
    """Anchored match where ``*`` stands for any run of characters."""
    t = p = 0
    star = -1
    mark = 0
    while t < len(token):
        if p < len(pattern) and pattern[p] == "*":
            star = p
            mark = t
            p += 1
        elif p < len(pattern) and pattern[p] == token[t]:
            t += 1
            p += 1
        elif star >= 0:
            # Let the last star absorb one more character and retry.
            p = star + 1
            mark += 1
            t = mark
        else:
            return False
    while p < len(pattern) and pattern[p] == "*":
        p += 1
    return p == len(pattern)


def match_class_pattern(tokens: list[str], pattern: str) -> bool:
    """True if any token matches ``pattern`` as a whole (case-sensitive)."""
    if "*" not in pattern:
        return pattern in tokens
    return any(glob_match(tok, pattern) for tok in tokens)


def element_path(el: Element) -> str:
    """Root-to-element locator such as ``html/body/div[1]/div[0]``.

    The bracketed index is the zero-based position among same-tag
    siblings and is only present when such siblings exist.
    """
    parts: list[str] = []
    node: Optional[Element] = el
    while node is not None and node.tag != FRAGMENT_ROOT_TAG:
        parent = node._parent
        if parent is None:
            parts.append(node.tag)
            break
        same = [s for s in parent._elements if s.tag == node.tag]
        if len(same) > 1:
            parts.append(f"{node.tag}[{same.index(node)}]")
        else:
            parts.append(node.tag)
        node = parent
    return "/".join(reversed(parts))
