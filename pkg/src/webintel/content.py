"""Static content features from HTML, JavaScript, CSS, and robots.txt.

JavaScript and CSS scanning is lexical (tokenizer level), not a grammar
parse: the counters must stay robust on malformed or obfuscated pages.
All functions are pure; scan lists are immutable after load.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from html.parser import HTMLParser
from importlib import resources
from pathlib import Path

from .lexical import parse_url
from .suffixes import PublicSuffixList

_CALL_RE = re.compile(
    r"([A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$]*)*)\s*\("
)
# reserved words that precede "(" without being calls
_JS_KEYWORDS = frozenset(
    "if for while switch catch return function do else new typeof void "
    "delete in of instanceof with yield await throw case var let const".split()
)
_ABS_URL_RE = re.compile(r"https?://[^\s\"'<>\\)]+")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class ScanLists:
    """Configured name lists driving the JS/CSS scanners."""

    suspicious: frozenset[str]
    browser: frozenset[str]
    dom: frozenset[str]
    hidden_css: frozenset[str]
    hex_run_threshold: int = 16
    include_event_handlers: bool = False

    @classmethod
    def from_json(cls, path: str | Path) -> "ScanLists":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls._from_mapping(raw)

    @classmethod
    def _from_mapping(cls, raw: dict) -> "ScanLists":
        return cls(
            suspicious=frozenset(raw.get("suspicious", ())),
            browser=frozenset(raw.get("browser", ())),
            dom=frozenset(raw.get("dom", ())),
            hidden_css=frozenset(
                _normalize_decl(d) for d in raw.get("hidden_css", ())
            ),
            hex_run_threshold=int(raw.get("hex_run_threshold", 16)),
            include_event_handlers=bool(raw.get("include_event_handlers", False)),
        )

    @classmethod
    def default(cls) -> "ScanLists":
        return _default_scan_lists()


@lru_cache(maxsize=1)
def _default_scan_lists() -> ScanLists:
    text = resources.files("webintel.data").joinpath("scan_lists.json").read_text("utf-8")
    return ScanLists._from_mapping(json.loads(text))


@dataclass(frozen=True)
class RobotsStats:
    exists: bool
    length: int
    disallow_count: int
    allow_count: int
    user_agent_count: int
    comment_count: int
    sitemap_count: int
    disallows_root: bool


@dataclass(frozen=True)
class JsStats:
    total_length: int
    function_call_count: int
    suspicious_call_count: int
    browser_call_count: int
    dom_call_count: int
    avg_array_length: float
    max_array_length: int


@dataclass(frozen=True)
class CssStats:
    total_length: int
    hidden_element_count: int


@dataclass(frozen=True)
class ContentFeatures:
    js: JsStats
    js_external: JsStats
    css: CssStats
    css_external: CssStats
    content_length: int
    script_tag_count: int
    contains_hex: bool
    hex_length: int
    url_count: int
    unique_url_count: int
    out_of_domain_img_count: int
    robots: RobotsStats


EMPTY_ROBOTS = RobotsStats(False, 0, 0, 0, 0, 0, 0, False)
EMPTY_JS = JsStats(0, 0, 0, 0, 0, 0.0, 0)
EMPTY_CSS = CssStats(0, 0)
EMPTY_CONTENT = ContentFeatures(
    EMPTY_JS, EMPTY_JS, EMPTY_CSS, EMPTY_CSS, 0, 0, False, 0, 0, 0, 0, EMPTY_ROBOTS
)


def parse_robots_txt(body: str | None) -> RobotsStats:
    """Count robots.txt directives.

    Directive names match case-insensitively; a comment is a line whose
    first non-blank character is ``#``; other malformed lines are ignored.
    ``disallows_root`` is set when any Disallow value trims to exactly "/".
    """
    if body is None:
        return EMPTY_ROBOTS
    disallow = allow = user_agent = comment = sitemap = 0
    disallows_root = False
    for raw_line in body.splitlines():
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            comment += 1
            continue
        name, sep, value = line.partition(":")
        if not sep:
            continue
        name = name.strip().lower()
        value = value.strip()
        if name == "user-agent":
            user_agent += 1
        elif name == "disallow":
            disallow += 1
            if value == "/":
                disallows_root = True
        elif name == "allow":
            allow += 1
        elif name == "sitemap":
            sitemap += 1
    return RobotsStats(
        True, len(body), disallow, allow, user_agent, comment, sitemap, disallows_root
    )


def _name_matches(name: str, entries: frozenset[str]) -> bool:
    # entries may be full dotted names, root objects, or bare method names
    if name in entries:
        return True
    head, _, _ = name.partition(".")
    if head != name and head in entries:
        return True
    tail = name.rpartition(".")[2]
    return tail != name and tail in entries


def _call_names(code: str) -> list[str]:
    names = []
    for m in _CALL_RE.finditer(code):
        name = m.group(1)
        if "." not in name and name in _JS_KEYWORDS:
            continue
        if code[: m.start()].rstrip().endswith("function"):
            continue  # declaration header, not a call
        names.append(name)
    return names


def js_array_stats(code: str) -> tuple[float, int]:
    """(average, maximum) element count over every array literal in ``code``.

    Elements are counted at the top nesting level of each literal; string
    literals and comments are skipped so embedded commas do not count.
    Returns (0.0, 0) when no literals exist.
    """
    lengths: list[int] = []
    stack: list[list[int] | None] = []  # [commas, has_content] for "[", None otherwise
    i, n = 0, len(code)
    while i < n:
        c = code[i]
        if c in "'\"`":
            quote = c
            i += 1
            while i < n:
                if code[i] == "\\":
                    i += 2
                    continue
                if code[i] == quote:
                    break
                i += 1
            if stack and stack[-1] is not None:
                stack[-1][1] = 1
        elif c == "/" and i + 1 < n and code[i + 1] == "/":
            i = code.find("\n", i)
            if i < 0:
                break
        elif c == "/" and i + 1 < n and code[i + 1] == "*":
            end = code.find("*/", i + 2)
            i = n if end < 0 else end + 1
        elif c == "[":
            if stack and stack[-1] is not None:
                stack[-1][1] = 1
            stack.append([0, 0])
        elif c in "({":
            if stack and stack[-1] is not None:
                stack[-1][1] = 1
            stack.append(None)
        elif c == "]":
            if stack:
                top = stack.pop()
                if top is not None:
                    lengths.append(top[0] + 1 if top[1] else 0)
        elif c in ")}":
            if stack:
                stack.pop()
        elif c == ",":
            if stack and stack[-1] is not None:
                stack[-1][0] += 1
        elif not c.isspace():
            if stack and stack[-1] is not None:
                stack[-1][1] = 1
        i += 1
    if not lengths:
        return 0.0, 0
    return sum(lengths) / len(lengths), max(lengths)


def js_stats(code: str, lists: ScanLists | None = None) -> JsStats:
    """Lexical call and array-literal statistics for a JavaScript blob.

    A function call is a (possibly dotted) identifier followed by "(";
    category counts are membership tests of the dotted name against the
    configured suspicious, browser-object, and DOM lists.
    """
    lists = lists or ScanLists.default()
    names = _call_names(code)
    avg_len, max_len = js_array_stats(code)
    return JsStats(
        total_length=len(code),
        function_call_count=len(names),
        suspicious_call_count=sum(_name_matches(n, lists.suspicious) for n in names),
        browser_call_count=sum(_name_matches(n, lists.browser) for n in names),
        dom_call_count=sum(_name_matches(n, lists.dom) for n in names),
        avg_array_length=avg_len,
        max_array_length=max_len,
    )


def _normalize_decl(decl: str) -> str:
    return _WS_RE.sub("", decl).lower()


def css_stats(css_text: str, hidden_rules: frozenset[str] | None = None) -> CssStats:
    """Total character count plus the number of element-hiding declarations.

    Declarations are compared against the rule set after whitespace removal
    and lowercasing. Text without any rule braces is treated as a bare
    declaration list (the style-attribute form).
    """
    if hidden_rules is None:
        hidden_rules = ScanLists.default().hidden_css
    blocks = re.findall(r"\{([^{}]*)\}", css_text)
    if not blocks and "{" not in css_text:
        blocks = [css_text]
    hidden = 0
    for block in blocks:
        for decl in block.split(";"):
            if _normalize_decl(decl) in hidden_rules:
                hidden += 1
    return CssStats(len(css_text), hidden)


class _HtmlScan(HTMLParser):
    """Single-pass collector for tags the feature set cares about."""

    def __init__(self):
        super().__init__(convert_charrefs=False)
        self.script_count = 0
        self.script_bodies: list[str] = []
        self.style_bodies: list[str] = []
        self.img_srcs: list[str] = []
        self.event_handlers: list[str] = []
        self._buffer: list[str] | None = None

    def handle_starttag(self, tag, attrs):
        attrs = dict(attrs)
        for key, value in attrs.items():
            if key and key.startswith("on") and value:
                self.event_handlers.append(value)
        if tag == "script":
            self.script_count += 1
            if not attrs.get("src"):
                self._buffer = []
        elif tag == "style":
            self._buffer = []
        elif tag == "img" and attrs.get("src"):
            self.img_srcs.append(attrs["src"])

    def handle_endtag(self, tag):
        if tag == "script" and self._buffer is not None:
            self.script_bodies.append("".join(self._buffer))
            self._buffer = None
        elif tag == "style" and self._buffer is not None:
            self.style_bodies.append("".join(self._buffer))
            self._buffer = None

    def handle_data(self, data):
        if self._buffer is not None:
            self._buffer.append(data)


def _scan_html(html: str) -> _HtmlScan:
    scan = _HtmlScan()
    try:
        scan.feed(html)
        scan.close()
    except Exception:
        pass  # keep whatever was collected from a malformed page
    return scan


def _registered_domain(url: str, table: PublicSuffixList) -> str:
    try:
        return parse_url(url, table).registered_domain
    except Exception:
        return ""


def hex_runs(text: str, threshold: int) -> list[int]:
    """Lengths of every maximal hex-digit run of at least ``threshold`` chars."""
    pattern = re.compile(r"[0-9a-fA-F]{%d,}" % threshold)
    return [len(m.group(0)) for m in pattern.finditer(text)]


def extract_content_features(
    page,
    lists: ScanLists | None = None,
    suffix_list: PublicSuffixList | None = None,
):
    """All cascade-1 and cascade-2 features for one fetched page.

    ``page`` needs final_url, html, external_js, external_css and
    robots_body attributes; missing external files simply contribute
    zeros. Inline event-handler attributes only count toward the JS
    statistics when the scan lists enable them.
    """
    lists = lists or ScanLists.default()
    table = suffix_list or PublicSuffixList.default()
    if page is None:
        return EMPTY_CONTENT

    html = page.html or ""
    scan = _scan_html(html)

    inline_js = "\n".join(scan.script_bodies)
    if lists.include_event_handlers and scan.event_handlers:
        inline_js = "\n".join([inline_js, *scan.event_handlers]) if inline_js else "\n".join(scan.event_handlers)
    external_js = "\n".join(body for _, body in page.external_js)
    inline_css = "\n".join(scan.style_bodies)
    external_css = "\n".join(body for _, body in page.external_css)

    urls = _ABS_URL_RE.findall(html)
    page_domain = _registered_domain(page.final_url, table)
    out_of_domain = 0
    for src in scan.img_srcs:
        if src.startswith("//"):
            src = "http:" + src
        if not src.startswith(("http://", "https://")):
            continue
        dom = _registered_domain(src, table)
        if dom and dom != page_domain:
            out_of_domain += 1

    runs = hex_runs(html, lists.hex_run_threshold)

    return ContentFeatures(
        js=js_stats(inline_js, lists),
        js_external=js_stats(external_js, lists),
        css=css_stats(inline_css, lists.hidden_css),
        css_external=css_stats(external_css, lists.hidden_css),
        content_length=len(html),
        script_tag_count=scan.script_count,
        contains_hex=bool(runs),
        hex_length=sum(runs),
        url_count=len(urls),
        unique_url_count=len(set(urls)),
        out_of_domain_img_count=out_of_domain,
        robots=parse_robots_txt(page.robots_body),
    )
