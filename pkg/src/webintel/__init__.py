"""webintel: website threat-feature extraction and classification.

The package splits into pure feature extractors (lexical, content,
hostintel), an acquisition layer that owns all network I/O, the dataset
schema and assembly machinery, embedding reduction utilities, and
from-scratch classifiers with a cross-validation harness.
"""

from .content import (
    ContentFeatures,
    CssStats,
    JsStats,
    RobotsStats,
    ScanLists,
    css_stats,
    extract_content_features,
    js_array_stats,
    js_stats,
    parse_robots_txt,
)
from .dataset import (
    AssemblyTables,
    Cascade,
    FeatureMatrix,
    FeatureSchema,
    FoldPlan,
    assemble,
    kfold,
    read_csv,
    schema,
    stratified_kfold,
    write_csv,
)
from .embeddings import (
    EmbeddingSource,
    EmbeddingTable,
    char_ngram_embedding,
    chi2_select,
    embedding_mean,
    import_embeddings,
    lda_fit,
    lda_transform,
    minmax_scale,
)
from .hostintel import (
    HostFeatures,
    PdnsFeatures,
    TldPricingTable,
    asn_switch_count,
    extract_host_features,
    pdns_features,
    sort_pdns_records,
)
from .lexical import (
    LexicalFeatures,
    UrlParts,
    count_embedded_tlds,
    extract_lexical,
    parse_url,
    shannon_entropy,
)
from .records import (
    FetchedPage,
    HostIntel,
    IntelResponse,
    Label,
    LabeledSample,
    PassiveDnsRecord,
    Provider,
)
from .suffixes import PublicSuffixList

__version__ = "0.1.0"
