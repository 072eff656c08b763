"""Canonical feature schema, matrix assembly, CSV persistence, and folds.

The schema is fixed and versioned: 26 base lexical features, 8 robots
features (cascade 1), 25 content features (cascade 2), 7 passive-DNS
features (cascade 3), and 9 host features, 75 columns in total. With the
two URL-embedding families appended as extra columns the full catalogue
spans 77; embedding columns are never part of the base-to-cascade-3
nesting. The "@ in URL" flag is computed by the lexical extractor but is
not a schema column: it is fully determined by the @-count column.

Cascades nest by construction: base < c1 < c2 < c3 < all.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .content import ContentFeatures, EMPTY_CONTENT, ScanLists, extract_content_features
from .errors import InvalidK, SchemaMismatch
from .hostintel import TldPricingTable, extract_host_features, pdns_features
from .lexical import extract_lexical, parse_url
from .records import HostIntel, Label, LabeledSample
from .suffixes import PublicSuffixList

SCHEMA_VERSION = "v1"


class Cascade(enum.IntEnum):
    BASE = 0
    C1 = 1
    C2 = 2
    C3 = 3
    HOST_ALL = 4
    EMBEDDING = 5

    @classmethod
    def from_string(cls, name: str) -> "Cascade":
        mapping = {
            "base": cls.BASE,
            "c1": cls.C1,
            "c2": cls.C2,
            "c3": cls.C3,
            "all": cls.HOST_ALL,
        }
        try:
            return mapping[name.lower()]
        except KeyError:
            raise ValueError(f"unknown cascade {name!r}") from None


class Kind(enum.Enum):
    NUMERIC = "numeric"
    BOOLEAN = "boolean"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    cascade: Cascade
    kind: Kind


_N = Kind.NUMERIC
_B = Kind.BOOLEAN
_C = Kind.CATEGORICAL

_BASE = [
    ("url_length", _N),
    ("underscore_count", _N),
    ("semicolon_count", _N),
    ("subdomain_count", _N),
    ("zero_count", _N),
    ("space_count", _N),
    ("hyphen_count", _N),
    ("at_count", _N),
    ("query_count", _N),
    ("ampersand_count", _N),
    ("equals_count", _N),
    ("hostname_length", _N),
    ("digits_to_url_ratio", _N),
    ("digits_to_hostname_ratio", _N),
    ("digits_to_domain_ratio", _N),
    ("ip_in_url", _B),
    ("domain_length", _N),
    ("unique_chars", _N),
    ("unique_digits", _N),
    ("unique_letters", _N),
    ("letters_to_chars_ratio", _N),
    ("numbers_to_chars_ratio", _N),
    ("tld", _C),
    ("domain_entropy", _N),
    ("tld_count_in_url", _N),
    ("url_entropy", _N),
]

_C1 = [
    ("robots_exists", _B),
    ("robots_length", _N),
    ("robots_disallow_count", _N),
    ("robots_allow_count", _N),
    ("robots_user_agent_count", _N),
    ("robots_comment_count", _N),
    ("robots_sitemap_count", _N),
    ("robots_disallows_root", _B),
]

_C2 = [
    ("js_length", _N),
    ("js_function_count", _N),
    ("js_suspicious_count", _N),
    ("js_browser_count", _N),
    ("js_dom_count", _N),
    ("js_avg_array_length", _N),
    ("js_max_array_length", _N),
    ("ext_js_length", _N),
    ("ext_js_function_count", _N),
    ("ext_js_suspicious_count", _N),
    ("ext_js_browser_count", _N),
    ("ext_js_dom_count", _N),
    ("ext_js_avg_array_length", _N),
    ("ext_js_max_array_length", _N),
    ("css_length", _N),
    ("css_hidden_count", _N),
    ("ext_css_length", _N),
    ("ext_css_hidden_count", _N),
    ("content_length", _N),
    ("script_tag_count", _N),
    ("contains_hex", _B),
    ("hex_length", _N),
    ("url_count", _N),
    ("unique_url_count", _N),
    ("out_of_domain_img_count", _N),
]

_C3 = [
    ("pdns_history_length", _N),
    ("pdns_unique_ips", _N),
    ("pdns_unique_hostnames", _N),
    ("pdns_country_count", _N),
    ("pdns_suspicious_asn_count", _N),
    ("pdns_false_positive_asn_count", _N),
    ("pdns_asn_switch_count", _N),
]

_HOST = [
    ("ip_resolution_count", _N),
    ("host_country", _C),
    ("whois_complete", _B),
    ("https", _B),
    ("registrar", _C),
    ("tld_register_usd", _N),
    ("tld_renew_usd", _N),
    ("tld_transfer_usd", _N),
    ("tld_icann_fee_usd", _N),
]


class FeatureSchema:
    """Ordered, cascade-tagged feature columns."""

    def __init__(self, specs: list[FeatureSpec], version: str = SCHEMA_VERSION):
        names = [s.name for s in specs]
        if len(names) != len(set(names)):
            raise ValueError("feature names must be unique")
        self.specs = tuple(specs)
        self.version = version

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.specs]

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    def subset(self, cascade: Cascade | str) -> "FeatureSchema":
        """Columns belonging to the cascade and everything below it.

        Embedding columns are excluded; they ride along only when added
        explicitly.
        """
        if isinstance(cascade, str):
            cascade = Cascade.from_string(cascade)
        keep = [
            s for s in self.specs
            if s.cascade <= cascade and s.cascade != Cascade.EMBEDDING
        ]
        return FeatureSchema(keep, self.version)

    def categorical_names(self) -> list[str]:
        return [s.name for s in self.specs if s.kind is Kind.CATEGORICAL]

    def with_embeddings(self, names: list[str]) -> "FeatureSchema":
        extra = [FeatureSpec(n, Cascade.EMBEDDING, Kind.NUMERIC) for n in names]
        return FeatureSchema(list(self.specs) + extra, self.version)


def schema() -> FeatureSchema:
    """The canonical 75-column schema."""
    specs = [FeatureSpec(n, Cascade.BASE, k) for n, k in _BASE]
    specs += [FeatureSpec(n, Cascade.C1, k) for n, k in _C1]
    specs += [FeatureSpec(n, Cascade.C2, k) for n, k in _C2]
    specs += [FeatureSpec(n, Cascade.C3, k) for n, k in _C3]
    specs += [FeatureSpec(n, Cascade.HOST_ALL, k) for n, k in _HOST]
    return FeatureSchema(specs)


@dataclass
class AssemblyTables:
    """Immutable lookup tables used while extracting features."""

    suffix_list: PublicSuffixList = field(default_factory=PublicSuffixList.default)
    scan_lists: ScanLists = field(default_factory=ScanLists.default)
    pricing: TldPricingTable = field(default_factory=TldPricingTable.default)
    suspicious_asns: frozenset[str] = frozenset()
    false_positive_asns: frozenset[str] = frozenset()


def feature_row(sample: LabeledSample, tables: AssemblyTables) -> dict:
    """Raw (unencoded) feature values for one sample, keyed by column name."""
    lex = extract_lexical(sample.url, tables.suffix_list)
    content: ContentFeatures = (
        extract_content_features(sample.page, tables.scan_lists, tables.suffix_list)
        if sample.page is not None
        else EMPTY_CONTENT
    )
    pdns = pdns_features(
        sample.pdns_records, tables.suspicious_asns, tables.false_positive_asns
    )
    intel = sample.host_intel
    if intel is None:
        intel = HostIntel(tld=parse_url(sample.url, tables.suffix_list).suffix)
    host = extract_host_features(intel, tables.pricing)
    robots = content.robots

    return {
        "url_length": lex.url_length,
        "underscore_count": lex.underscore_count,
        "semicolon_count": lex.semicolon_count,
        "subdomain_count": lex.subdomain_count,
        "zero_count": lex.zero_count,
        "space_count": lex.space_count,
        "hyphen_count": lex.hyphen_count,
        "at_count": lex.at_count,
        "query_count": lex.query_count,
        "ampersand_count": lex.ampersand_count,
        "equals_count": lex.equals_count,
        "hostname_length": lex.hostname_length,
        "digits_to_url_ratio": lex.digits_to_url_ratio,
        "digits_to_hostname_ratio": lex.digits_to_hostname_ratio,
        "digits_to_domain_ratio": lex.digits_to_domain_ratio,
        "ip_in_url": lex.ip_in_url,
        "domain_length": lex.domain_length,
        "unique_chars": lex.unique_chars,
        "unique_digits": lex.unique_digits,
        "unique_letters": lex.unique_letters,
        "letters_to_chars_ratio": lex.letters_to_chars_ratio,
        "numbers_to_chars_ratio": lex.numbers_to_chars_ratio,
        "tld": lex.tld,
        "domain_entropy": lex.domain_entropy,
        "tld_count_in_url": lex.tld_count_in_url,
        "url_entropy": lex.url_entropy,
        "robots_exists": robots.exists,
        "robots_length": robots.length,
        "robots_disallow_count": robots.disallow_count,
        "robots_allow_count": robots.allow_count,
        "robots_user_agent_count": robots.user_agent_count,
        "robots_comment_count": robots.comment_count,
        "robots_sitemap_count": robots.sitemap_count,
        "robots_disallows_root": robots.disallows_root,
        "js_length": content.js.total_length,
        "js_function_count": content.js.function_call_count,
        "js_suspicious_count": content.js.suspicious_call_count,
        "js_browser_count": content.js.browser_call_count,
        "js_dom_count": content.js.dom_call_count,
        "js_avg_array_length": content.js.avg_array_length,
        "js_max_array_length": content.js.max_array_length,
        "ext_js_length": content.js_external.total_length,
        "ext_js_function_count": content.js_external.function_call_count,
        "ext_js_suspicious_count": content.js_external.suspicious_call_count,
        "ext_js_browser_count": content.js_external.browser_call_count,
        "ext_js_dom_count": content.js_external.dom_call_count,
        "ext_js_avg_array_length": content.js_external.avg_array_length,
        "ext_js_max_array_length": content.js_external.max_array_length,
        "css_length": content.css.total_length,
        "css_hidden_count": content.css.hidden_element_count,
        "ext_css_length": content.css_external.total_length,
        "ext_css_hidden_count": content.css_external.hidden_element_count,
        "content_length": content.content_length,
        "script_tag_count": content.script_tag_count,
        "contains_hex": content.contains_hex,
        "hex_length": content.hex_length,
        "url_count": content.url_count,
        "unique_url_count": content.unique_url_count,
        "out_of_domain_img_count": content.out_of_domain_img_count,
        "pdns_history_length": pdns.history_length,
        "pdns_unique_ips": pdns.unique_ips,
        "pdns_unique_hostnames": pdns.unique_hostnames,
        "pdns_country_count": pdns.country_count,
        "pdns_suspicious_asn_count": pdns.suspicious_asn_count,
        "pdns_false_positive_asn_count": pdns.false_positive_asn_count,
        "pdns_asn_switch_count": pdns.asn_switch_count,
        "ip_resolution_count": host.ip_resolution_count,
        "host_country": host.country,
        "whois_complete": host.whois_complete,
        "https": host.https,
        "registrar": host.registrar,
        "tld_register_usd": host.register_usd,
        "tld_renew_usd": host.renew_usd,
        "tld_transfer_usd": host.transfer_usd,
        "tld_icann_fee_usd": host.icann_fee_usd,
    }


@dataclass
class FeatureMatrix:
    schema: FeatureSchema
    X: np.ndarray
    labels: list[Label]
    encoders: dict[str, dict[str, float]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    row_urls: list[str] = field(default_factory=list)

    @property
    def y(self) -> np.ndarray:
        """Labels as class indices in the fixed nine-class order."""
        order = {label: i for i, label in enumerate(Label)}
        return np.array([order[l] for l in self.labels], dtype=np.int64)

    def columns(self, names: list[str]) -> np.ndarray:
        index = {n: i for i, n in enumerate(self.schema.names)}
        return self.X[:, [index[n] for n in names]]

    def restrict(self, cascade: Cascade | str) -> "FeatureMatrix":
        sub = self.schema.subset(cascade)
        return FeatureMatrix(
            schema=sub,
            X=self.columns(sub.names),
            labels=list(self.labels),
            encoders=dict(self.encoders),
            warnings=list(self.warnings),
            row_urls=list(self.row_urls),
        )


def encode_categorical(values: list[str]) -> dict[str, float]:
    """Frequency encoding: value -> relative frequency in the assembly set."""
    n = len(values)
    table: dict[str, float] = {}
    for v in values:
        table[v] = table.get(v, 0.0) + 1.0
    return {v: c / n for v, c in table.items()}


def assemble(
    samples: list[LabeledSample],
    feature_schema: FeatureSchema | None = None,
    tables: AssemblyTables | None = None,
) -> FeatureMatrix:
    """Run every extractor over the samples and build the numeric matrix.

    Categorical columns are frequency encoded over this sample set;
    encoders are retained so unseen values map to 0 later.
    """
    if not samples:
        raise ValueError("assemble requires at least one sample")
    feature_schema = feature_schema or schema()
    tables = tables or AssemblyTables()

    rows = [feature_row(s, tables) for s in samples]
    warnings: list[str] = []
    for s in samples:
        warnings.extend(f"{s.url}: {a}" for a in s.annotations)

    encoders: dict[str, dict[str, float]] = {}
    for name in feature_schema.categorical_names():
        encoders[name] = encode_categorical([str(r[name]) for r in rows])

    X = np.zeros((len(rows), len(feature_schema)))
    for j, spec in enumerate(feature_schema):
        if spec.kind is Kind.CATEGORICAL:
            enc = encoders[spec.name]
            X[:, j] = [enc.get(str(r[spec.name]), 0.0) for r in rows]
        else:
            X[:, j] = [float(r[spec.name]) for r in rows]
    if not np.all(np.isfinite(X)):
        raise ValueError("assembled matrix contains non-finite values")

    return FeatureMatrix(
        schema=feature_schema,
        X=X,
        labels=[s.label for s in samples],
        encoders=encoders,
        warnings=warnings,
        row_urls=[s.url for s in samples],
    )


def write_csv(matrix: FeatureMatrix, path: str | Path) -> None:
    """Write features plus a trailing label column; 12 significant digits.

    A sidecar ``<path>.meta.json`` records the schema version, encoder
    tables, per-row URLs, and extraction warnings.
    """
    path = Path(path)
    lines = [",".join(matrix.schema.names + ["label"])]
    for i in range(len(matrix.X)):
        values = [format(v, ".12g") for v in matrix.X[i]]
        values.append(matrix.labels[i].value)
        lines.append(",".join(values))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    meta = {
        "schema_version": matrix.schema.version,
        "cascades": {s.name: s.cascade.name for s in matrix.schema},
        "encoders": matrix.encoders,
        "row_urls": matrix.row_urls,
        "warnings": matrix.warnings,
    }
    Path(str(path) + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8"
    )


def read_csv(path: str | Path, expected: FeatureSchema | None = None) -> FeatureMatrix:
    """Read a feature CSV written by ``write_csv``.

    The header must equal a cascade subset of the canonical schema (or
    the supplied expected schema); anything else raises SchemaMismatch.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line]
    if not lines:
        raise SchemaMismatch(["<any>"], [])
    header = lines[0].split(",")
    if header[-1] != "label":
        raise SchemaMismatch(["...", "label"], header)

    feature_names = header[:-1]
    if expected is not None:
        if feature_names != expected.names:
            raise SchemaMismatch(expected.names + ["label"], header)
        found_schema = expected
    else:
        canonical = schema()
        for cascade in ("base", "c1", "c2", "c3", "all"):
            candidate = canonical.subset(cascade)
            if candidate.names == feature_names:
                found_schema = candidate
                break
        else:
            raise SchemaMismatch(canonical.names + ["label"], header)

    n = len(lines) - 1
    X = np.zeros((n, len(feature_names)))
    labels: list[Label] = []
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != len(header):
            raise SchemaMismatch(header, parts)
        X[i] = [float(v) for v in parts[:-1]]
        labels.append(Label(parts[-1]))

    meta_path = Path(str(path) + ".meta.json")
    encoders, row_urls, warnings = {}, [], []
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        encoders = meta.get("encoders", {})
        row_urls = meta.get("row_urls", [])
        warnings = meta.get("warnings", [])
    return FeatureMatrix(found_schema, X, labels, encoders, warnings, row_urls)


@dataclass
class FoldPlan:
    k: int
    assignments: np.ndarray
    stratified: bool
    seed: int
    warnings: list[str] = field(default_factory=list)

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train_indices, validation_indices) for one fold."""
        val = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, val


def stratified_kfold(labels, k: int, seed: int = 42) -> FoldPlan:
    """Deterministic stratified fold assignment.

    Per class, shuffled members are dealt round-robin with a rolling
    offset, so per-class fold counts differ by at most one. Classes with
    fewer than k members land in only that many folds; a warning records
    each such class.
    """
    labels = np.asarray(
        [l.value if isinstance(l, Label) else l for l in labels], dtype=object
    )
    n = len(labels)
    if k < 2:
        raise InvalidK("k must be at least 2")
    if n < k:
        raise InvalidK(f"cannot build {k} non-empty folds from {n} rows")

    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    warnings = []
    offset = 0
    for cls in sorted(set(labels)):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            warnings.append(
                f"class {cls!r} has {len(idx)} members; present in only {len(idx)} of {k} folds"
            )
        perm = rng.permutation(idx)
        for j, row in enumerate(perm):
            assignments[row] = (offset + j) % k
        offset = (offset + len(idx)) % k
    return FoldPlan(k, assignments, stratified=True, seed=seed, warnings=warnings)


def kfold(n: int, k: int, seed: int = 42) -> FoldPlan:
    """Plain shuffled k-fold assignment."""
    if k < 2:
        raise InvalidK("k must be at least 2")
    if n < k:
        raise InvalidK(f"cannot build {k} non-empty folds from {n} rows")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    for j, row in enumerate(rng.permutation(n)):
        assignments[row] = j % k
    return FoldPlan(k, assignments, stratified=False, seed=seed)
