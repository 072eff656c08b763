"""URL decomposition and lexical feature extraction.

All operations here are pure and total over parseable URLs; the public
suffix table is immutable after load, so everything is safe to call from
concurrent workers.
"""

from __future__ import annotations

import ipaddress
import math
import re
import string
from collections import Counter
from dataclasses import dataclass

from .errors import UnparsableUrl
from .suffixes import PublicSuffixList

_SCHEME_RE = re.compile(r"^([A-Za-z][A-Za-z0-9+.\-]*)://")
_NETLOC_END_RE = re.compile(r"[/?#]")
# dotted quad bounded by non-digit, non-dot characters
_IPV4_RE = re.compile(r"(?<![\d.])(\d{1,3}(?:\.\d{1,3}){3})(?![\d.])")


@dataclass(frozen=True)
class UrlParts:
    """Decomposition of a URL around the registrable-domain boundary."""

    scheme: str
    subdomains: list[str]
    second_level_domain: str
    suffix: str
    hostname: str
    path: str
    query: str
    is_ip_host: bool

    @property
    def registered_domain(self) -> str:
        if not self.suffix:
            return self.second_level_domain
        if not self.second_level_domain:
            return self.suffix
        return f"{self.second_level_domain}.{self.suffix}"


@dataclass(frozen=True)
class LexicalFeatures:
    url_length: int
    underscore_count: int
    semicolon_count: int
    subdomain_count: int
    zero_count: int
    space_count: int
    hyphen_count: int
    at_count: int
    query_count: int
    ampersand_count: int
    equals_count: int
    hostname_length: int
    digits_to_url_ratio: float
    digits_to_hostname_ratio: float
    digits_to_domain_ratio: float
    ip_in_url: bool
    at_in_url: bool
    domain_length: int
    unique_chars: int
    unique_digits: int
    unique_letters: int
    letters_to_chars_ratio: float
    numbers_to_chars_ratio: float
    tld: str
    domain_entropy: float
    tld_count_in_url: int
    url_entropy: float


def _is_ip_literal(host: str) -> bool:
    candidate = host[1:-1] if host.startswith("[") and host.endswith("]") else host
    try:
        ipaddress.ip_address(candidate)
        return True
    except ValueError:
        return False


def parse_url(url: str, suffix_list: PublicSuffixList | None = None) -> UrlParts:
    """Split a URL into scheme, host labels, path and query.

    The scheme is optional; hostnames are lowercased. IP hosts keep the
    literal in ``second_level_domain`` with empty subdomains and suffix.

    Raises:
        UnparsableUrl: when no hostname can be isolated.
    """
    if not url:
        raise UnparsableUrl("empty URL")
    table = suffix_list or PublicSuffixList.default()

    m = _SCHEME_RE.match(url)
    scheme = m.group(1).lower() if m else ""
    rest = url[m.end():] if m else url

    end = _NETLOC_END_RE.search(rest)
    netloc = rest[: end.start()] if end else rest
    tail = rest[len(netloc):]

    host = netloc.rpartition("@")[2]
    if host.startswith("["):
        host = host.split("]", 1)[0] + "]" if "]" in host else host
    else:
        maybe_host, sep, port = host.rpartition(":")
        if sep and port.isdigit():
            host = maybe_host
    host = host.strip().rstrip(".").lower()
    if not host:
        raise UnparsableUrl(f"no hostname in {url!r}")

    frag_split = tail.split("#", 1)[0]
    path, _, query = frag_split.partition("?")

    if _is_ip_literal(host):
        bare = host[1:-1] if host.startswith("[") else host
        return UrlParts(scheme, [], bare, "", bare, path, query, True)

    subdomains, sld, suffix = table.split(host)
    return UrlParts(scheme, subdomains, sld, suffix, host, path, query, False)


def shannon_entropy(s: str) -> float:
    """Shannon entropy of the character distribution of ``s``, in bits."""
    if not s:
        return 0.0
    n = len(s)
    return -sum((c / n) * math.log2(c / n) for c in Counter(s).values())


def count_embedded_tlds(url: str, suffix_list: PublicSuffixList | None = None) -> int:
    """Number of hostname labels that are themselves known TLDs."""
    table = suffix_list or PublicSuffixList.default()
    parts = parse_url(url, table)
    return sum(1 for label in parts.hostname.split(".") if table.is_tld(label))


def contains_ipv4(text: str) -> bool:
    """True when the text contains a dotted-quad IPv4 literal."""
    for m in _IPV4_RE.finditer(text):
        if all(int(octet) <= 255 for octet in m.group(1).split(".")):
            return True
    return False


def extract_lexical(
    url: str, suffix_list: PublicSuffixList | None = None
) -> LexicalFeatures:
    """Compute every lexical feature for one URL.

    Character counts run over the full URL string, case-sensitively.
    Ratios guard against empty denominators by returning 0.
    """
    table = suffix_list or PublicSuffixList.default()
    parts = parse_url(url, table)

    digit_count = sum(c in string.digits for c in url)
    unique = set(url)
    unique_digits = {c for c in unique if c in string.digits}
    unique_letters = {c for c in unique if c.isalpha()}

    sld = parts.second_level_domain
    host_digits = sum(c in string.digits for c in parts.hostname)
    sld_digits = sum(c in string.digits for c in sld)

    return LexicalFeatures(
        url_length=len(url),
        underscore_count=url.count("_"),
        semicolon_count=url.count(";"),
        subdomain_count=len(parts.subdomains),
        zero_count=url.count("0"),
        space_count=url.count(" "),
        hyphen_count=url.count("-"),
        at_count=url.count("@"),
        query_count=url.count("?"),
        ampersand_count=url.count("&"),
        equals_count=url.count("="),
        hostname_length=len(parts.hostname),
        digits_to_url_ratio=digit_count / len(url),
        digits_to_hostname_ratio=(
            host_digits / len(parts.hostname) if parts.hostname else 0.0
        ),
        digits_to_domain_ratio=sld_digits / len(sld) if sld else 0.0,
        ip_in_url=parts.is_ip_host or contains_ipv4(url),
        at_in_url="@" in url,
        domain_length=len(sld),
        unique_chars=len(unique),
        unique_digits=len(unique_digits),
        unique_letters=len(unique_letters),
        letters_to_chars_ratio=len(unique_letters) / len(unique) if unique else 0.0,
        numbers_to_chars_ratio=digit_count / len(unique) if unique else 0.0,
        tld=parts.suffix,
        domain_entropy=shannon_entropy(sld),
        tld_count_in_url=sum(
            1 for label in parts.hostname.split(".") if table.is_tld(label)
        ),
        url_entropy=shannon_entropy(url),
    )
