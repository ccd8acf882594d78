"""Turn a :class:`SourceSpec` into HTML text.

Files (``-`` for stdin) are decoded as UTF-8 with a leading BOM
stripped. URLs are fetched with a plain HTTP GET; whatever HTML the
server returns is what gets validated, so server-rendered dynamic pages
work but client-side scripts are not run.
"""

from __future__ import annotations

import codecs
import sys
from dataclasses import dataclass
from email.message import Message
from typing import Optional
from urllib.parse import urlsplit

import requests
from urllib3.exceptions import ReadTimeoutError

from webcheck.errors import SourceError

SOURCE_KINDS = ("file", "url", "inline")


class FileNotFound(SourceError):
    pass


class FileUnreadable(SourceError):
    pass


class UrlInvalid(SourceError):
    pass


class HttpStatus(SourceError):
    def __init__(self, url: str, status: int, reason: str = "") -> None:
        super().__init__(f"{url}: HTTP {status}{' ' + reason if reason else ''}")
        self.url = url
        self.status = status


class Timeout(SourceError):
    pass


class BodyTooLarge(SourceError):
    pass


class TooManyRedirects(SourceError):
    pass


class FetchFailed(SourceError):
    """Connection-level failure (DNS, refused connection, TLS)."""


def _default_user_agent() -> str:
    from webcheck import __version__

    return f"webcheck/{__version__}"


@dataclass(frozen=True)
class FetchPolicy:
    timeout_ms: int = 10_000
    max_redirects: int = 5
    max_body_bytes: int = 10 * 1024 * 1024
    user_agent: str = ""

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_redirects < 0:
            raise ValueError("max_redirects must be non-negative")
        if self.max_body_bytes <= 0:
            raise ValueError("max_body_bytes must be positive")
        if not self.user_agent:
            object.__setattr__(self, "user_agent", _default_user_agent())


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    value: str
    fragment: bool = False

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "url":
            parts = urlsplit(self.value)
            if parts.scheme.lower() not in ("http", "https") or not parts.netloc:
                raise UrlInvalid(f"not an absolute http(s) URL: {self.value!r}")

    @classmethod
    def from_string(cls, value: str, fragment: bool = False) -> SourceSpec:
        """URL if it has an http(s) scheme, otherwise a file path (``-`` = stdin)."""
        if value.lower().startswith(("http://", "https://")):
            return cls("url", value, fragment)
        if "://" in value:
            raise UrlInvalid(f"unsupported URL scheme: {value!r}")
        return cls("file", value, fragment)

    @property
    def display_name(self) -> str:
        if self.kind == "inline":
            return "<inline>"
        if self.kind == "file" and self.value == "-":
            return "<stdin>"
        return self.value


def decode_bytes(data: bytes, charset: Optional[str] = None) -> str:
    """Decode with ``charset`` if it is a known codec, else UTF-8; drop a BOM."""
    encoding = "utf-8"
    if charset:
        try:
            encoding = codecs.lookup(charset).name
        except LookupError:
            pass
    if data.startswith(codecs.BOM_UTF8) and encoding.replace("-", "").lower() in ("utf8", "utf_8"):
        data = data[len(codecs.BOM_UTF8):]
    text = data.decode(encoding, errors="replace")
    return text[1:] if text.startswith("\ufeff") else text


def read_file(path: str) -> str:
    if path == "-":
        try:
            data = sys.stdin.buffer.read()
        except (OSError, AttributeError) as exc:
            raise FileUnreadable(f"cannot read standard input: {exc}") from exc
        return decode_bytes(data)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError as exc:
        raise FileNotFound(f"no such file: {path}") from exc
    except IsADirectoryError as exc:
        raise FileUnreadable(f"is a directory: {path}") from exc
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc.strerror or exc}") from exc
    return decode_bytes(data)


def _charset_of(content_type: Optional[str]) -> Optional[str]:
    if not content_type:
        return None
    msg = Message()
    msg["content-type"] = content_type
    return msg.get_content_charset()


def fetch_url(url: str, policy: FetchPolicy) -> str:
    headers = {"User-Agent": policy.user_agent, "Accept": "text/html"}
    timeout = policy.timeout_ms / 1000.0
    with requests.Session() as session:
        session.max_redirects = policy.max_redirects
        try:
            resp = session.get(url, headers=headers, timeout=timeout, stream=True, allow_redirects=True)
        except requests.TooManyRedirects as exc:
            raise TooManyRedirects(f"{url}: more than {policy.max_redirects} redirect(s)") from exc
        except requests.Timeout as exc:
            raise Timeout(f"{url}: no response within {policy.timeout_ms} ms") from exc
        except requests.RequestException as exc:
            raise FetchFailed(f"{url}: {exc}") from exc
        with resp:
            if not 200 <= resp.status_code < 300:
                raise HttpStatus(url, resp.status_code, resp.reason or "")
            declared = resp.headers.get("Content-Length")
            if declared and declared.isdigit() and int(declared) > policy.max_body_bytes:
                raise BodyTooLarge(f"{url}: body of {declared} bytes exceeds {policy.max_body_bytes}")
            chunks: list[bytes] = []
            size = 0
            try:
                for chunk in resp.iter_content(chunk_size=64 * 1024):
                    size += len(chunk)
                    if size > policy.max_body_bytes:
                        raise BodyTooLarge(f"{url}: body exceeds {policy.max_body_bytes} bytes")
                    chunks.append(chunk)
            except requests.Timeout as exc:
                raise Timeout(f"{url}: body not received within {policy.timeout_ms} ms") from exc
            except requests.ConnectionError as exc:
                # mid-body read timeouts surface as ConnectionError(ReadTimeoutError)
                if exc.args and isinstance(exc.args[0], ReadTimeoutError):
                    raise Timeout(f"{url}: body not received within {policy.timeout_ms} ms") from exc
                raise FetchFailed(f"{url}: {exc}") from exc
            except requests.RequestException as exc:
                raise FetchFailed(f"{url}: {exc}") from exc
            return decode_bytes(b"".join(chunks), _charset_of(resp.headers.get("Content-Type")))


def resolve(spec: SourceSpec, policy: Optional[FetchPolicy] = None) -> tuple[str, str]:
    """Return ``(html_text, source_name)`` for ``spec``."""
    if spec.kind == "inline":
        return spec.value, spec.display_name
    if spec.kind == "file":
        return read_file(spec.value), spec.display_name
    return fetch_url(spec.value, policy or FetchPolicy()), spec.display_name
