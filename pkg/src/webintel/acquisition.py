"""Page fetching, threat-intelligence queries, label normalization, cache.

This is the only module that opens network connections. Every provider
client speaks JSON over a small transport interface, so recorded
fixtures can replace live endpoints; fetch, DNS resolution, and sleeping
are all injectable for the same reason. Per-source failures degrade to
annotations on the sample rather than aborting it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import socket
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from importlib import resources
from pathlib import Path
from urllib.parse import urljoin, urlsplit

import requests

from .errors import AuthFailure, ProviderUnavailable, RateLimited, UnknownLabel
from .lexical import parse_url
from .records import (
    FetchedPage,
    HostIntel,
    IntelResponse,
    Label,
    LabeledSample,
    PassiveDnsRecord,
    Provider,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# fetch


@dataclass
class FetchConfig:
    timeout: float = 10.0
    max_redirects: int = 5
    max_assets: int = 10
    max_body_size: int = 1_000_000
    user_agent: str = "webintel/0.1"
    fetch_robots: bool = True

    @classmethod
    def from_file(cls, path: str | Path) -> "FetchConfig":
        data = _load_config(path)
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


def _load_config(path: str | Path) -> dict:
    path = Path(path)
    if path.suffix == ".toml":
        import tomli

        return tomli.loads(path.read_text(encoding="utf-8"))
    return json.loads(path.read_text(encoding="utf-8"))


def _read_capped(response: requests.Response, cap: int) -> tuple[str, bool]:
    """Decode up to ``cap`` characters of the response body."""
    chunks = []
    size = 0
    truncated = False
    for chunk in response.iter_content(chunk_size=65536):
        chunks.append(chunk)
        size += len(chunk)
        if size > cap:
            truncated = True
            break
    body = b"".join(chunks)[:cap]
    encoding = response.encoding or "utf-8"
    try:
        return body.decode(encoding, errors="replace"), truncated
    except LookupError:
        return body.decode("utf-8", errors="replace"), truncated


def _fetch_text(session, url, cfg) -> tuple[str, bool]:
    resp = session.get(
        url,
        timeout=cfg.timeout,
        stream=True,
        headers={"User-Agent": cfg.user_agent},
        allow_redirects=True,
    )
    try:
        if resp.status_code >= 400:
            raise requests.HTTPError(f"status {resp.status_code}", response=resp)
        return _read_capped(resp, cfg.max_body_size)
    finally:
        resp.close()


def fetch_page(url: str, cfg: FetchConfig | None = None, session=None) -> FetchedPage:
    """Fetch a page, its robots.txt, and directly referenced JS/CSS assets.

    Network failures never raise: each failure class (timeout, DNS,
    HTTP status, oversize body) leaves the page empty with an error
    annotation so downstream extraction emits zeros.
    """
    cfg = cfg or FetchConfig()
    own_session = session is None
    session = session or requests.Session()
    session.max_redirects = cfg.max_redirects
    page = FetchedPage(final_url=url, https=url.startswith("https://"), fetched_at=time.time())
    try:
        try:
            resp = session.get(
                url,
                timeout=cfg.timeout,
                stream=True,
                headers={"User-Agent": cfg.user_agent},
                allow_redirects=True,
            )
            try:
                page.final_url = resp.url
                page.https = resp.url.startswith("https://")
                if resp.status_code >= 400:
                    page.errors.append(f"http_error:{resp.status_code}")
                else:
                    page.html, page.truncated = _read_capped(resp, cfg.max_body_size)
                    if page.truncated:
                        page.errors.append("too_large:truncated")
            finally:
                resp.close()
        except requests.Timeout:
            page.errors.append("timeout")
            return page
        except requests.TooManyRedirects:
            page.errors.append("too_many_redirects")
            return page
        except requests.ConnectionError as exc:
            page.errors.append(f"dns_or_connect_failure:{exc.__class__.__name__}")
            return page
        except requests.RequestException as exc:
            page.errors.append(f"fetch_error:{exc.__class__.__name__}")
            return page

        scripts = [s for s in _script_srcs(page.html) if s][: cfg.max_assets]
        styles = _stylesheet_hrefs(page.html)[: cfg.max_assets]
        for src in scripts:
            asset_url = urljoin(page.final_url, src)
            try:
                body, _ = _fetch_text(session, asset_url, cfg)
                page.external_js.append((asset_url, body))
            except requests.RequestException:
                page.errors.append(f"asset_failed:{asset_url}")
        for href in styles:
            asset_url = urljoin(page.final_url, href)
            try:
                body, _ = _fetch_text(session, asset_url, cfg)
                page.external_css.append((asset_url, body))
            except requests.RequestException:
                page.errors.append(f"asset_failed:{asset_url}")

        if cfg.fetch_robots:
            parts = urlsplit(page.final_url)
            robots_url = f"{parts.scheme}://{parts.netloc}/robots.txt"
            try:
                page.robots_body, _ = _fetch_text(session, robots_url, cfg)
            except requests.RequestException:
                page.robots_body = None
        return page
    finally:
        if own_session:
            session.close()


_SCRIPT_SRC_RE = re.compile(
    r"<script[^>]*\bsrc\s*=\s*[\"']([^\"']+)[\"']", re.IGNORECASE
)
_LINK_RE = re.compile(r"<link\b[^>]*>", re.IGNORECASE)
_HREF_RE = re.compile(r"\bhref\s*=\s*[\"']([^\"']+)[\"']", re.IGNORECASE)
_REL_STYLESHEET_RE = re.compile(r"\brel\s*=\s*[\"'][^\"']*stylesheet", re.IGNORECASE)


def _script_srcs(html: str) -> list[str]:
    return _SCRIPT_SRC_RE.findall(html)


def _stylesheet_hrefs(html: str) -> list[str]:
    out = []
    for tag in _LINK_RE.findall(html):
        if _REL_STYLESHEET_RE.search(tag):
            m = _HREF_RE.search(tag)
            if m:
                out.append(m.group(1))
    return out


# ---------------------------------------------------------------------------
# intel providers


@dataclass
class IntelClientConfig:
    base_urls: dict[Provider, str] = field(
        default_factory=lambda: {
            Provider.XFORCE: "https://api.xforce.ibmcloud.com",
            Provider.OTX: "https://otx.alienvault.com",
            Provider.URLHAUS: "https://urlhaus-api.abuse.ch",
            Provider.THREATFOX: "https://threatfox-api.abuse.ch",
        }
    )
    timeout: float = 10.0
    max_attempts: int = 5
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    rate_per_second: float = 4.0
    sleep: object = time.sleep  # injectable for tests

    def api_key(self, provider: Provider) -> str:
        env = {Provider.XFORCE: "XFORCE_KEY", Provider.OTX: "OTX_KEY"}.get(provider)
        return os.environ.get(env, "") if env else ""


class HttpTransport:
    """Live JSON transport shared by every provider client."""

    def __init__(self, cfg: IntelClientConfig, session=None):
        self.cfg = cfg
        self.session = session or requests.Session()

    def request(self, method: str, url: str, headers=None, data=None) -> dict:
        try:
            resp = self.session.request(
                method, url, headers=headers, json=data, timeout=self.cfg.timeout
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(str(exc)) from exc
        if resp.status_code == 429:
            raise RateLimited(float(resp.headers.get("Retry-After", 0) or 0))
        if resp.status_code in (401, 403):
            raise AuthFailure(f"status {resp.status_code}")
        if resp.status_code >= 500:
            raise ProviderUnavailable(f"status {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderUnavailable(f"non-JSON response: {exc}") from exc


class TokenBucket:
    """Simple thread-safe rate limiter (tokens per second)."""

    def __init__(self, rate: float, capacity: float | None = None, clock=time.monotonic, sleep=time.sleep):
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(rate, 1.0)
        self.tokens = self.capacity
        self.updated = clock()
        self.clock = clock
        self.sleep = sleep
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            self.sleep(wait)


def _parse_ts(value) -> float:
    if value in (None, ""):
        return 0.0
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).replace("Z", "+00:00")
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        return 0.0
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _pdns_from_otx(entries) -> list[PassiveDnsRecord]:
    records = []
    for e in entries or []:
        first = _parse_ts(e.get("first"))
        last = _parse_ts(e.get("last"))
        if first > last:
            first, last = last, first
        records.append(
            PassiveDnsRecord(
                hostname=str(e.get("hostname", "")),
                ip=str(e.get("address", "")),
                asn=str(e.get("asn", "")),
                country=str(e.get("flag_title", "") or e.get("country", "")),
                first_seen=first,
                last_seen=last,
            )
        )
    return records


def query_intel(
    provider: Provider,
    indicator: str,
    cfg: IntelClientConfig | None = None,
    transport=None,
    bucket: TokenBucket | None = None,
) -> IntelResponse:
    """Query one provider and normalize its payload into an IntelResponse.

    Retries rate limits and transient failures with exponential backoff
    (base 1s, doubling, at most five attempts).
    """
    cfg = cfg or IntelClientConfig()
    transport = transport or HttpTransport(cfg)
    base = cfg.base_urls[provider]

    def run() -> IntelResponse:
        if provider is Provider.OTX:
            headers = {"X-OTX-API-KEY": cfg.api_key(provider)}
            data = transport.request(
                "GET", f"{base}/api/v1/indicators/domain/{indicator}/passive_dns", headers=headers
            )
            general = transport.request(
                "GET", f"{base}/api/v1/indicators/domain/{indicator}/general", headers=headers
            )
            tags = []
            for pulse in (general.get("pulse_info", {}) or {}).get("pulses", []):
                tags.extend(pulse.get("tags", []))
            return IntelResponse(
                provider=provider,
                raw_labels=tags,
                pdns_records=_pdns_from_otx(data.get("passive_dns")),
            )
        if provider is Provider.XFORCE:
            headers = {"Authorization": f"Bearer {cfg.api_key(provider)}"}
            data = transport.request("GET", f"{base}/url/{indicator}", headers=headers)
            cats = (data.get("result", {}) or {}).get("cats", {}) or {}
            partial = {}
            whois = data.get("whois") or {}
            if whois:
                partial["whois"] = whois
            return IntelResponse(
                provider=provider,
                raw_labels=[c for c, active in cats.items() if active],
                host_intel_partial=partial,
            )
        if provider is Provider.URLHAUS:
            data = transport.request("POST", f"{base}/v1/url/", data={"url": indicator})
            labels = []
            if data.get("threat"):
                labels.append(str(data["threat"]))
            labels.extend(str(t) for t in data.get("tags") or [])
            return IntelResponse(provider=provider, raw_labels=labels)
        if provider is Provider.THREATFOX:
            data = transport.request(
                "POST", f"{base}/api/v1/", data={"query": "search_ioc", "search_term": indicator}
            )
            labels = []
            for entry in data.get("data") or []:
                if isinstance(entry, dict) and entry.get("threat_type"):
                    labels.append(str(entry["threat_type"]))
            return IntelResponse(provider=provider, raw_labels=labels)
        raise ValueError(f"unhandled provider {provider}")

    delay = cfg.backoff_base
    last_error: Exception | None = None
    for attempt in range(cfg.max_attempts):
        if bucket is not None:
            bucket.acquire()
        try:
            return run()
        except RateLimited as exc:
            last_error = exc
            cfg.sleep(max(exc.retry_after, delay))
        except (ProviderUnavailable, AuthFailure) as exc:
            last_error = exc
            cfg.sleep(delay)
        delay *= cfg.backoff_factor
    raise last_error


# ---------------------------------------------------------------------------
# labels


@lru_cache(maxsize=1)
def _default_label_map() -> dict[str, str]:
    text = resources.files("webintel.data").joinpath("label_map.json").read_text("utf-8")
    return json.loads(text)


_LABEL_SEP_RE = re.compile(r"[\s_\-]+")


def _canon(raw: str) -> str:
    return _LABEL_SEP_RE.sub(" ", raw.strip().lower())


def load_label_map(path: str | Path) -> dict[str, str]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def normalize_label(raw: str, mapping: dict[str, str] | None = None) -> Label:
    """Map a raw provider label onto one of the nine classes.

    Matching is case-insensitive and treats underscores, hyphens, and
    runs of whitespace alike. Unknown labels raise instead of guessing.
    """
    table = mapping if mapping is not None else _default_label_map()
    key = _canon(raw)
    for k, v in table.items():
        if _canon(k) == key:
            return Label(v)
    for label in Label:
        if _canon(label.value) == key or _canon(label.name) == key:
            return label
    raise UnknownLabel(raw)


# ---------------------------------------------------------------------------
# sample building and cache


def cache_path(cache_dir: str | Path, url: str) -> Path:
    digest = hashlib.sha256(url.encode("utf-8")).hexdigest()
    return Path(cache_dir) / digest[:2] / f"{digest}.json"


def save_sample(sample: LabeledSample, cache_dir: str | Path) -> Path:
    path = cache_path(cache_dir, sample.url)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(sample.to_dict(), sort_keys=True, separators=(",", ":"))
    tmp = path.with_suffix(".tmp")
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, path)
    return path


def load_sample(path: str | Path) -> LabeledSample:
    return LabeledSample.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def iter_cached_samples(cache_dir: str | Path):
    """Yield cached samples in deterministic (hash) order."""
    for path in sorted(Path(cache_dir).glob("*/*.json")):
        yield load_sample(path)


def _default_resolver(hostname: str) -> list[str]:
    infos = socket.getaddrinfo(hostname, None)
    return sorted({info[4][0] for info in infos})


def _whois_complete(whois: dict) -> bool:
    # complete means registrar, creation date, and registrant country all present
    registrar = whois.get("registrar") or (whois.get("contact") or {}).get("registrar")
    created = whois.get("createdDate") or whois.get("creation_date")
    country = whois.get("registrant_country") or (whois.get("registrant") or {}).get("country")
    return bool(registrar and created and country)


@dataclass
class BuildConfig:
    fetch: FetchConfig = field(default_factory=FetchConfig)
    intel: IntelClientConfig = field(default_factory=IntelClientConfig)
    providers: tuple[Provider, ...] = (
        Provider.XFORCE,
        Provider.OTX,
        Provider.URLHAUS,
        Provider.THREATFOX,
    )
    resolver: object = None  # hostname -> list of IPs; None means live DNS
    transport: object = None  # None means live HTTP
    session: object = None


def build_sample(
    url: str,
    label: Label,
    cfg: BuildConfig | None = None,
    cache_dir: str | Path | None = None,
) -> LabeledSample:
    """Fetch artifacts and intel for one URL; cached results short-circuit.

    Single-source failures become annotations; the sample always exists.
    """
    cfg = cfg or BuildConfig()
    if cache_dir is not None:
        path = cache_path(cache_dir, url)
        if path.exists():
            return load_sample(path)

    parts = parse_url(url)
    page = fetch_page(url, cfg.fetch, session=cfg.session)

    pdns: list[PassiveDnsRecord] = []
    raw_labels: list[str] = []
    annotations = list(page.errors)
    partials: dict = {}
    for provider in cfg.providers:
        try:
            response = query_intel(
                provider, parts.registered_domain or parts.hostname, cfg.intel,
                transport=cfg.transport,
            )
        except Exception as exc:
            annotations.append(f"intel_failed:{provider.value}:{exc.__class__.__name__}")
            continue
        pdns.extend(response.pdns_records)
        raw_labels.extend(response.raw_labels)
        for key, value in response.host_intel_partial.items():
            partials.setdefault(key, value)

    resolver = cfg.resolver or _default_resolver
    try:
        resolved = resolver(parts.hostname)
    except Exception as exc:
        resolved = []
        annotations.append(f"dns_failed:{exc.__class__.__name__}")

    whois = partials.get("whois") or {}
    host_intel = HostIntel(
        resolved_ips=list(dict.fromkeys(resolved)),
        country=str(partials.get("country", "")) or _first_country(pdns),
        whois_complete=_whois_complete(whois),
        https=page.https,
        registrar=str(whois.get("registrar", "") or partials.get("registrar", "")),
        tld=parts.suffix,
    )
    sample = LabeledSample(
        url=url,
        label=label,
        page=page,
        pdns_records=pdns,
        host_intel=host_intel,
        raw_labels=raw_labels,
        annotations=annotations,
    )
    if cache_dir is not None:
        save_sample(sample, cache_dir)
    return sample


def _first_country(records: list[PassiveDnsRecord]) -> str:
    for r in records:
        if r.country:
            return r.country
    return ""
