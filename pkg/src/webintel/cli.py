"""Batch command-line frontend: fetch -> assemble -> train.

Every run writes a manifest (command, config digest, seed, paths,
timings, warnings) into its output directory, and identical inputs with
identical seeds reproduce identical outputs byte for byte apart from
the manifest timestamps.

Exit codes: 0 success, 1 usage or config error, 2 data error,
3 partial-failure threshold exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import acquisition, dataset
from .content import ScanLists
from .embeddings import char_ngram_embedding, import_embeddings
from .errors import InvalidConfig, UnknownLabel, WebintelError
from .hostintel import TldPricingTable, load_asn_list
from .models import (
    ContributionReport,
    GbtConfig,
    GradientBoostedTrees,
    LogisticRegression,
    RandomForestClassifier,
    ReduceSpec,
    cross_validate,
)
from .records import Provider
from .suffixes import PublicSuffixList

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


def _config_digest(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _write_manifest(out_dir: Path, command: str, options: dict, started: float,
                    inputs: list[str], outputs: list[str], warnings: list[str],
                    seed: int | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config_digest": _config_digest(options),
        "schema_version": dataset.SCHEMA_VERSION,
        "seed": seed,
        "inputs": inputs,
        "outputs": outputs,
        "started_at": started,
        "elapsed_s": round(time.time() - started, 3),
        "warnings": warnings,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2), encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# fetch


def cmd_fetch(args) -> int:
    started = time.time()
    urls_path, labels_path = Path(args.urls), Path(args.labels)
    if not urls_path.exists() or not labels_path.exists():
        print("error: urls/labels file not found", file=sys.stderr)
        return EXIT_USAGE
    urls = [u.strip() for u in urls_path.read_text(encoding="utf-8").splitlines() if u.strip()]
    raw_labels = [l.strip() for l in labels_path.read_text(encoding="utf-8").splitlines() if l.strip()]
    if not urls:
        print("error: empty URL list", file=sys.stderr)
        return EXIT_DATA
    if len(urls) != len(raw_labels):
        print(
            f"error: {len(urls)} URLs vs {len(raw_labels)} labels", file=sys.stderr
        )
        return EXIT_DATA

    label_map = acquisition.load_label_map(args.label_map) if args.label_map else None
    fetch_cfg = (
        acquisition.FetchConfig.from_file(args.fetch_config)
        if args.fetch_config
        else acquisition.FetchConfig()
    )
    providers = _parse_providers(args.providers)
    build_cfg = acquisition.BuildConfig(fetch=fetch_cfg, providers=providers)

    warnings: list[str] = []
    jobs: list[tuple[str, object]] = []
    for url, raw in zip(urls, raw_labels):
        try:
            jobs.append((url, acquisition.normalize_label(raw, label_map)))
        except UnknownLabel:
            warnings.append(f"skipped {url}: unknown label {raw!r}")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)

    cache_dir = Path(args.cache)
    cache_dir.mkdir(parents=True, exist_ok=True)
    successes = 0
    failures = 0

    def fetch_one(job):
        url, label = job
        try:
            sample = acquisition.build_sample(url, label, build_cfg, cache_dir)
            return url, sample.annotations, None
        except Exception as exc:
            return url, [], exc

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        for url, annotations, exc in pool.map(fetch_one, jobs):
            if exc is not None:
                failures += 1
                warnings.append(f"failed {url}: {exc}")
                print(f"failed  {url}: {exc}", file=sys.stderr)
            else:
                successes += 1
                note = f" ({len(annotations)} source warnings)" if annotations else ""
                print(f"fetched {url}{note}")

    print(f"done: {successes} cached, {failures} failed, {len(warnings)} warnings")
    _write_manifest(
        cache_dir, "fetch", vars(args) | {"providers": [p.value for p in providers]},
        started, [str(urls_path), str(labels_path)], [str(cache_dir)], warnings,
    )
    if successes == 0:
        return EXIT_PARTIAL
    return EXIT_OK


def _parse_providers(text: str) -> tuple[Provider, ...]:
    if text.lower() in ("none", ""):
        return ()
    wanted = []
    by_name = {p.value.lower(): p for p in Provider}
    for token in text.split(","):
        token = token.strip().lower()
        if token not in by_name:
            raise InvalidConfig([f"unknown provider {token!r}"])
        wanted.append(by_name[token])
    return tuple(wanted)


# ---------------------------------------------------------------------------
# assemble


def cmd_assemble(args) -> int:
    started = time.time()
    cache_dir = Path(args.cache)
    samples = list(acquisition.iter_cached_samples(cache_dir))
    if not samples:
        print(f"error: no cached samples under {cache_dir}", file=sys.stderr)
        return EXIT_DATA

    tables = dataset.AssemblyTables(
        suffix_list=PublicSuffixList.from_file(args.suffixes) if args.suffixes else PublicSuffixList.default(),
        scan_lists=ScanLists.from_json(args.scan_lists) if args.scan_lists else ScanLists.default(),
        pricing=TldPricingTable.from_csv(args.pricing) if args.pricing else TldPricingTable.default(),
        suspicious_asns=load_asn_list(args.suspicious_asns) if args.suspicious_asns else frozenset(),
        false_positive_asns=load_asn_list(args.fp_asns) if args.fp_asns else frozenset(),
    )
    matrix = dataset.assemble(samples, dataset.schema(), tables)
    matrix = matrix.restrict(args.cascade)
    out_csv = Path(args.out)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    dataset.write_csv(matrix, out_csv)
    print(
        f"wrote {out_csv}: {matrix.X.shape[0]} rows x {matrix.X.shape[1]} features"
        f" (cascade {args.cascade})"
    )
    _write_manifest(
        out_csv.parent, "assemble", vars(args), started,
        [str(cache_dir)], [str(out_csv)], matrix.warnings,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# train


_MODEL_DEFAULTS = {
    "logreg": {"l2": 1.0, "max_iters": 500, "tol": 1e-6},
    "rf": {
        "n_trees": 100, "max_depth": 25, "min_child": 1,
        "max_features": None, "bootstrap": True, "seed": 42,
    },
    "gbt": None,  # GbtConfig carries its own defaults
}


def _build_model_factory(name: str, config_path: str | None, seed: int):
    overrides = acquisition._load_config(config_path) if config_path else {}
    if name == "gbt":
        fields = GbtConfig.__dataclass_fields__
        unknown = [k for k in overrides if k not in fields]
        if unknown:
            raise InvalidConfig([f"unknown gbt option {k!r}" for k in unknown])
        cfg = GbtConfig(**({"seed": seed} | overrides))
        cfg.validate()
        return (lambda: GradientBoostedTrees(cfg)), vars(cfg).copy()
    defaults = dict(_MODEL_DEFAULTS[name])
    unknown = [k for k in overrides if k not in defaults]
    if unknown:
        raise InvalidConfig([f"unknown {name} option {k!r}" for k in unknown])
    params = defaults | overrides
    if name == "logreg":
        return (lambda: LogisticRegression(**params)), params
    if name == "rf":
        params["seed"] = params.get("seed", seed)
        return (lambda: RandomForestClassifier(**params)), params
    raise InvalidConfig([f"unknown model {name!r}"])


def _embedding_block(args, matrix) -> tuple[np.ndarray | None, list[str]]:
    spec = args.embeddings
    if not spec:
        return None, []
    if spec.startswith("char-ngram"):
        _, _, dim_text = spec.partition(":")
        dim = int(dim_text) if dim_text else 64
        if not matrix.row_urls:
            raise WebintelError("feature CSV has no row URL sidecar; cannot embed")
        E = np.stack([char_ngram_embedding(u, dim=dim) for u in matrix.row_urls])
        return E, [f"emb_{i}" for i in range(dim)]
    table = import_embeddings(spec)
    if not matrix.row_urls:
        raise WebintelError("feature CSV has no row URL sidecar; cannot join embeddings")
    missing = [u for u in matrix.row_urls if u not in table.rows]
    if missing:
        raise WebintelError(
            f"{len(missing)} of {len(matrix.row_urls)} rows missing from {spec}"
            f" (first: {missing[0]})"
        )
    E = table.matrix_for(matrix.row_urls)
    return E, [f"emb_{i}" for i in range(table.dim)]


def cmd_train(args) -> int:
    started = time.time()
    csv_path = Path(args.csv)
    if not csv_path.exists():
        print(f"error: {csv_path} not found", file=sys.stderr)
        return EXIT_USAGE

    try:
        factory, model_params = _build_model_factory(args.model, args.model_config, args.seed)
        reduce_spec = ReduceSpec.parse(args.reduce)
    except (InvalidConfig, ValueError) as exc:
        problems = getattr(exc, "problems", [str(exc)])
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_USAGE

    try:
        matrix = dataset.read_csv(csv_path)
    except WebintelError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    try:
        X_emb, emb_names = _embedding_block(args, matrix)
    except WebintelError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    X = matrix.X
    base_names = matrix.schema.names
    if args.emb_mean and X_emb is not None:
        X = np.hstack([X, X_emb.mean(axis=1, keepdims=True)])
        base_names = base_names + ["emb_mean"]

    y = matrix.y
    if args.stratified:
        plan = dataset.stratified_kfold(matrix.labels, args.folds, args.seed)
    else:
        plan = dataset.kfold(len(y), args.folds, args.seed)
    for w in plan.warnings:
        print(f"warning: {w}", file=sys.stderr)

    report = cross_validate(factory, X, y, plan, X_embedding=X_emb, reduce_spec=reduce_spec)
    print(report.format_table())

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.to_json(out_dir / "report.json")
    outputs = [str(out_dir / "report.json")]

    if args.model == "gbt":
        X_final, reducer = _final_design(X, X_emb, y, reduce_spec)
        names = base_names + _reduced_names(reduce_spec, emb_names, reducer)
        final = factory().fit(X_final, y)
        contrib = ContributionReport.from_model(final, names)
        contrib.to_csv(out_dir / "contributions.csv")
        outputs.append(str(out_dir / "contributions.csv"))
        print("\ntop contributions:")
        for name, pct in contrib.top(10):
            print(f"  {name:<32} {pct:7.4f}%")

    _write_manifest(
        out_dir, "train",
        vars(args) | {"model_params": model_params}, started,
        [str(csv_path)], outputs, plan.warnings, seed=args.seed,
    )
    return EXIT_OK


def _final_design(X, X_emb, y, reduce_spec):
    from .models.crossval import _fold_features

    if X_emb is None:
        return X, None
    all_rows = np.arange(len(X))
    combined, reducer = _fold_features(X, X_emb, y, all_rows, reduce_spec)
    return combined, reducer


def _reduced_names(reduce_spec, emb_names, reducer) -> list[str]:
    if not emb_names:
        return []
    if reduce_spec is None or reduce_spec.kind == "none":
        return emb_names
    if reduce_spec.kind == "lda":
        k = reducer.projection.shape[1]
        return [f"emb_lda_{i + 1}" for i in range(k)]
    if reduce_spec.kind == "chi2":
        return [f"emb_chi2_{emb_names[i][4:]}" for i in reducer]
    return emb_names


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="webintel",
        description="Website feature extraction and classification pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="fetch pages and intel for labeled URLs")
    p.add_argument("--urls", required=True, help="file with one URL per line")
    p.add_argument("--labels", required=True, help="file with one raw label per line")
    p.add_argument("--cache", required=True, help="sample cache directory")
    p.add_argument("--fetch-config", default=None, help="JSON/TOML fetch settings")
    p.add_argument("--label-map", default=None, help="JSON raw-label mapping override")
    p.add_argument(
        "--providers", default="xforce,otx,urlhaus,threatfox",
        help="comma list of intel providers, or 'none'",
    )
    p.add_argument("--jobs", type=int, default=4)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("assemble", help="build a feature CSV from the cache")
    p.add_argument("--cache", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--cascade", default="all", choices=["base", "c1", "c2", "c3", "all"])
    p.add_argument("--scan-lists", default=None, help="JSON scan lists")
    p.add_argument("--pricing", default=None, help="TLD pricing CSV")
    p.add_argument("--suffixes", default=None, help="public suffix file")
    p.add_argument("--suspicious-asns", default=None)
    p.add_argument("--fp-asns", default=None)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("train", help="cross-validate a model on a feature CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--model", required=True, choices=["logreg", "rf", "gbt"])
    p.add_argument("--model-config", default=None, help="JSON/TOML hyperparameters")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--stratified", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument(
        "--embeddings", default=None,
        help="embedding CSV path, or char-ngram[:dim] for the hashed fallback",
    )
    p.add_argument("--reduce", default="none", help="none, lda[:k], or chi2:k")
    p.add_argument("--emb-mean", action="store_true",
                   help="append the per-row embedding mean as a feature")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    except WebintelError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
