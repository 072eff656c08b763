"""Host and passive-DNS features from structured intelligence records.

No network I/O happens here: records arrive from the acquisition layer
(or from fixtures) and everything below is a pure computation.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .records import HostIntel, PassiveDnsRecord

logger = logging.getLogger(__name__)

# -1 marks "unknown TLD" so models can tell it apart from a real zero fee
UNKNOWN_PRICE = -1.0


@dataclass(frozen=True)
class TldPrices:
    register_usd: float
    renew_usd: float
    transfer_usd: float
    icann_fee_usd: float


UNKNOWN_PRICES = TldPrices(UNKNOWN_PRICE, UNKNOWN_PRICE, UNKNOWN_PRICE, UNKNOWN_PRICE)


class TldPricingTable:
    """TLD price lookups backed by a CSV table."""

    HEADER = ["tld", "register_usd", "renew_usd", "transfer_usd", "icann_fee_usd"]

    def __init__(self, prices: dict[str, TldPrices]):
        self._prices = {k.lower().lstrip("."): v for k, v in prices.items()}

    @classmethod
    def from_csv(cls, path: str | Path) -> "TldPricingTable":
        with open(path, newline="", encoding="utf-8") as fh:
            return cls._from_reader(csv.reader(fh), str(path))

    @classmethod
    def _from_reader(cls, reader, origin: str) -> "TldPricingTable":
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != cls.HEADER:
            raise ValueError(f"{origin}: expected header {','.join(cls.HEADER)}")
        prices = {}
        for row in reader:
            if not row or not row[0].strip():
                continue
            tld = row[0].strip().lower()
            values = [float(v) for v in row[1:5]]
            if any(v < 0 for v in values):
                raise ValueError(f"{origin}: negative price for tld {tld!r}")
            prices[tld] = TldPrices(*values)
        return cls(prices)

    @classmethod
    def default(cls) -> "TldPricingTable":
        return _default_pricing()

    def __contains__(self, tld: str) -> bool:
        return tld.lower().lstrip(".") in self._prices

    def __len__(self) -> int:
        return len(self._prices)

    def lookup(self, tld: str) -> TldPrices:
        """Prices for ``tld``; the -1 sentinel bundle when unknown."""
        return self._prices.get(tld.lower().lstrip("."), UNKNOWN_PRICES)


@lru_cache(maxsize=1)
def _default_pricing() -> TldPricingTable:
    text = resources.files("webintel.data").joinpath("tld_pricing.csv").read_text("utf-8")
    return TldPricingTable._from_reader(csv.reader(text.splitlines()), "bundled tld_pricing.csv")


@dataclass(frozen=True)
class HostFeatures:
    ip_resolution_count: int
    country: str
    whois_complete: bool
    https: bool
    registrar: str
    register_usd: float
    renew_usd: float
    transfer_usd: float
    icann_fee_usd: float


@dataclass(frozen=True)
class PdnsFeatures:
    history_length: int
    unique_ips: int
    unique_hostnames: int
    country_count: int
    suspicious_asn_count: int
    false_positive_asn_count: int
    asn_switch_count: int


def load_asn_list(path: str | Path) -> frozenset[str]:
    """ASN list from a newline-delimited text file, '#' comments ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(
        line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#")
    )


def extract_host_features(
    intel: HostIntel, pricing: TldPricingTable | None = None
) -> HostFeatures:
    """Host features for one sample; unknown TLDs fall back to -1 prices.

    An empty TLD (IP-literal hosts) takes the same sentinel route.
    """
    pricing = pricing or TldPricingTable.default()
    if intel.tld and intel.tld in pricing:
        prices = pricing.lookup(intel.tld)
    else:
        prices = UNKNOWN_PRICES
        logger.warning("no pricing entry for tld %r, using sentinel", intel.tld)
    unique_ips = list(dict.fromkeys(intel.resolved_ips))
    return HostFeatures(
        ip_resolution_count=len(unique_ips),
        country=intel.country,
        whois_complete=intel.whois_complete,
        https=intel.https,
        registrar=intel.registrar,
        register_usd=prices.register_usd,
        renew_usd=prices.renew_usd,
        transfer_usd=prices.transfer_usd,
        icann_fee_usd=prices.icann_fee_usd,
    )


def sort_pdns_records(records: list[PassiveDnsRecord]) -> list[PassiveDnsRecord]:
    """Chronological order: first_seen, then last_seen, then ASN."""
    return sorted(records, key=lambda r: (r.first_seen, r.last_seen, r.asn))


def asn_switch_count(records: list[PassiveDnsRecord]) -> int:
    """Adjacent-pair ASN changes over an already-sorted history."""
    return sum(
        1 for prev, cur in zip(records, records[1:]) if prev.asn != cur.asn
    )


def pdns_features(
    records: list[PassiveDnsRecord],
    suspicious_asns: frozenset[str] = frozenset(),
    false_positive_asns: frozenset[str] = frozenset(),
) -> PdnsFeatures:
    """Passive-DNS history features; uniqueness is exact string match."""
    ordered = sort_pdns_records(records)
    return PdnsFeatures(
        history_length=len(records),
        unique_ips=len({r.ip for r in records}),
        unique_hostnames=len({r.hostname for r in records}),
        country_count=len({r.country for r in records}),
        suspicious_asn_count=sum(r.asn in suspicious_asns for r in records),
        false_positive_asn_count=sum(r.asn in false_positive_asns for r in records),
        asn_switch_count=asn_switch_count(ordered),
    )
