"""Plain data records shared by the extractors and the acquisition layer.

Nothing in this module performs I/O; acquisition constructs these records
and the feature modules consume them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, asdict


class Label(enum.Enum):
    """The nine website classes."""

    BENIGN = "Benign"
    PHISHING = "Phishing"
    COMMAND_AND_CONTROL = "CommandAndControl"
    SPAM = "Spam"
    MALWARE_HOSTING = "MalwareHosting"
    MALICIOUS_AD_HOSTING = "MaliciousAdHosting"
    HOST_SCANNER = "HostScanner"
    EXPLOIT_KIT = "ExploitKit"
    CREDIT_CARD_SKIMMER = "CreditCardSkimmer"


LABELS = tuple(Label)


class Provider(enum.Enum):
    XFORCE = "XForce"
    OTX = "OTX"
    URLHAUS = "URLHaus"
    THREATFOX = "ThreatFox"


@dataclass(frozen=True)
class PassiveDnsRecord:
    """One historical resolution entry. Timestamps are epoch seconds."""

    hostname: str
    ip: str
    asn: str
    country: str
    first_seen: float
    last_seen: float

    def __post_init__(self):
        if self.first_seen > self.last_seen:
            raise ValueError("first_seen must not exceed last_seen")


@dataclass
class HostIntel:
    resolved_ips: list[str] = field(default_factory=list)
    country: str = ""
    whois_complete: bool = False
    https: bool = False
    registrar: str = ""
    tld: str = ""


@dataclass
class FetchedPage:
    final_url: str
    https: bool
    html: str = ""
    external_js: list[tuple[str, str]] = field(default_factory=list)
    external_css: list[tuple[str, str]] = field(default_factory=list)
    robots_body: str | None = None
    fetched_at: float = 0.0
    truncated: bool = False
    errors: list[str] = field(default_factory=list)


@dataclass
class IntelResponse:
    provider: Provider
    raw_labels: list[str] = field(default_factory=list)
    pdns_records: list[PassiveDnsRecord] = field(default_factory=list)
    host_intel_partial: dict = field(default_factory=dict)


@dataclass
class LabeledSample:
    """Raw artifacts for one URL plus its class label."""

    url: str
    label: Label
    page: FetchedPage | None = None
    pdns_records: list[PassiveDnsRecord] = field(default_factory=list)
    host_intel: HostIntel | None = None
    raw_labels: list[str] = field(default_factory=list)
    annotations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "url": self.url,
            "label": self.label.value,
            "page": asdict(self.page) if self.page is not None else None,
            "pdns_records": [asdict(r) for r in self.pdns_records],
            "host_intel": asdict(self.host_intel) if self.host_intel is not None else None,
            "raw_labels": list(self.raw_labels),
            "annotations": list(self.annotations),
        }
        if out["page"] is not None:
            out["page"]["external_js"] = [list(t) for t in out["page"]["external_js"]]
            out["page"]["external_css"] = [list(t) for t in out["page"]["external_css"]]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LabeledSample":
        page = None
        if data.get("page") is not None:
            p = dict(data["page"])
            p["external_js"] = [tuple(t) for t in p.get("external_js", [])]
            p["external_css"] = [tuple(t) for t in p.get("external_css", [])]
            page = FetchedPage(**p)
        host = HostIntel(**data["host_intel"]) if data.get("host_intel") is not None else None
        pdns = [PassiveDnsRecord(**r) for r in data.get("pdns_records", [])]
        return cls(
            url=data["url"],
            label=Label(data["label"]),
            page=page,
            pdns_records=pdns,
            host_intel=host,
            raw_labels=list(data.get("raw_labels", [])),
            annotations=list(data.get("annotations", [])),
        )
