"""Command-line entry point: ``mcarsvm {extract,train,evaluate,compare,predict}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal invariant violation.

Settings come from built-in defaults, then an optional TOML file given with
``--config``, then command-line flags.  Every output file is written under the
output directory (``--out-dir``, else ``out_dir`` in the config, else the
``MCARSVM_OUTPUT_DIR`` environment variable, else ``./mcarsvm-out``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from ._validation import class_name
from .dataset import (
    DEFAULT_LABEL_COLUMN,
    Dataset,
    DatasetError,
    SplitSpec,
    load_dataset,
    load_features,
    split,
    write_csv,
    write_features_csv,
)
from .evaluation import EvaluationReport
from .extractor import (
    FEATURE_NAMES,
    FixtureLookupClient,
    LiveLookupClient,
    NullLookupClient,
    URLParseError,
    extract,
)
from .mcar import DEFAULT
from .persistence import KINDS, ModelFormatError, kind_of, load_model, save_model
from .pipeline import FittedModel, ModelSettings, cross_validate, evaluate_fitted, fit_timed

OUTPUT_ENV = "MCARSVM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "mcarsvm-out"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("mcarsvm")


class UsageError(Exception):
    """Bad flags or configuration (exit 1)."""


class DataError(Exception):
    """Unusable inputs (exit 2)."""


class InvariantError(Exception):
    """A consistency check inside the pipeline failed (exit 3)."""


# -- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    data: str | None = None
    label_column: str = DEFAULT_LABEL_COLUMN
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)
    part: str = "all"
    kfold: int | None = None
    model: str = "hybrid"
    kinds: tuple[str, ...] = ("svm", "tree", "hybrid")
    fixture: str | None = None
    live: bool = False
    out_dir: str | None = None
    settings: ModelSettings = field(default_factory=ModelSettings)

    @property
    def seed(self) -> int:
        return self.settings.seed

    def split_spec(self) -> SplitSpec:
        return SplitSpec(*self.split, seed=self.seed)

    def output_dir(self) -> Path:
        d = self.out_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT_DIR
        return Path(d)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "settings"}
        d["split"] = list(self.split)
        d["kinds"] = list(self.kinds)
        d.update(asdict(self.settings))
        return d


_RUN_KEYS = tuple(f.name for f in fields(RunConfig) if f.name != "settings")
CONFIG_KEYS = frozenset(_RUN_KEYS) | frozenset(ModelSettings.keys())
PARTS = ("all", "train", "validate", "test")


def read_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"{path}: invalid TOML ({exc})") from None
    unknown = sorted(set(doc) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"{path}: unknown config keys {unknown}; allowed: {sorted(CONFIG_KEYS)}")
    return doc


def build_config(file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults, file values and flags (flags win), then validate."""
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    run = {k: merged[k] for k in _RUN_KEYS if k in merged}
    model = {k: merged[k] for k in ModelSettings.keys() if k in merged}
    try:
        settings = ModelSettings(**model)
        cfg = RunConfig(**run, settings=settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if len(cfg.split) != 3:
        raise UsageError("split needs three fractions: train, validate, test")
    cfg.split = tuple(float(f) for f in cfg.split)
    try:
        cfg.split_spec()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.part not in PARTS:
        raise UsageError(f"part must be one of {PARTS}, got {cfg.part!r}")
    if cfg.kfold is not None and cfg.kfold < 2:
        raise UsageError("kfold must be at least 2")
    for kind in (cfg.model, *cfg.kinds):
        if kind not in KINDS:
            raise UsageError(f"unknown model kind {kind!r}; choose from {sorted(KINDS)}")
    cfg.kinds = tuple(cfg.kinds)


# -- argument parsing ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fractions(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated fractions, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file with run settings")
    p.add_argument("--out-dir", dest="out_dir", help=f"output directory (default ${OUTPUT_ENV})")
    p.add_argument("--seed", type=int, help="seed for every random choice (default 42)")
    p.add_argument("--quiet", action="store_true", help="only print warnings and errors")


def _data_args(p: argparse.ArgumentParser, part: bool = True) -> None:
    p.add_argument("--data", help="labelled feature CSV or ARFF file")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--split", type=_fractions, help="train,validate,test fractions (default 0.7,0.15,0.15)")
    if part:
        p.add_argument("--part", choices=PARTS, help="which split part of --data to use (default all)")


def _model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model settings")
    g.add_argument("--min-support", dest="min_support", type=float)
    g.add_argument("--min-confidence", dest="min_confidence", type=float)
    g.add_argument("--max-length", dest="max_length", type=int, help="longest rule antecedent")
    g.add_argument("--tie-break", dest="tie_break", choices=("random", "lexicographic"))
    g.add_argument("--lam", type=float, help="SVM regularization strength")
    g.add_argument("--epochs", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--batch-size", dest="batch_size", type=int)
    g.add_argument("--max-depth", dest="max_depth", type=int)
    g.add_argument("--min-leaf", dest="min_leaf", type=int)


def _lookup_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fixture", help="JSON file answering lookup features offline")
    p.add_argument("--live", action="store_true", default=None,
                   help="query DNS/WHOIS over the network instead of a fixture")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcarsvm", description="Hybrid rule-mining + SVM phishing classifier.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="turn URLs into a feature CSV")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--url", help="a single URL")
    src.add_argument("--urls", help="file with one URL per line, optionally followed by a tab and an HTML file")
    p.add_argument("--html", help="saved HTML for --url")
    p.add_argument("--output", default="features.csv", help="file name inside the output directory")
    _lookup_args(p)

    p = sub.add_parser("train", help="fit one model and save it")
    _common(p)
    _data_args(p, part=False)
    p.add_argument("--model", choices=sorted(KINDS))
    p.add_argument("--write-splits", action="store_true", help="also write train/validate/test CSVs")
    _model_args(p)

    p = sub.add_parser("evaluate", help="score a saved model on labelled data")
    _common(p)
    p.add_argument("--model-file", required=True)
    _data_args(p)
    p.add_argument("--roc", action="store_true", help="also write the ROC points as CSV")

    p = sub.add_parser("compare", help="compare models on one test set or by k-fold")
    _common(p)
    _data_args(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model-files", nargs="+", help="saved models to evaluate")
    src.add_argument("--kinds", nargs="+", choices=sorted(KINDS), help="model kinds to train and evaluate")
    p.add_argument("--kfold", type=int, help="k-fold cross-validation instead of a single split")
    _model_args(p)

    p = sub.add_parser("predict", help="classify URLs or feature rows with a saved model")
    _common(p)
    p.add_argument("--model-file", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--url")
    src.add_argument("--urls")
    src.add_argument("--data", help="feature CSV (label column optional)")
    p.add_argument("--html", help="saved HTML for --url")
    p.add_argument("--label-column", dest="label_column")
    _lookup_args(p)
    return parser


def config_from_args(args) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    flags = {k: getattr(args, k, None) for k in CONFIG_KEYS}
    return build_config(file_values, flags)


# -- helpers ---------------------------------------------------------------------


def _out_path(cfg: RunConfig, name: str) -> Path:
    out = cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    if Path(name).name != name:
        raise UsageError(f"output name must be a plain file name, got {name!r}")
    return out / name


def _write_text(cfg: RunConfig, name: str, text: str) -> Path:
    path = _out_path(cfg, name)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)
    return path


def _load_data(cfg: RunConfig) -> Dataset:
    if not cfg.data:
        raise UsageError("no dataset given (use --data or 'data' in the config)")
    return load_dataset(cfg.data, label_column=cfg.label_column)


def _select_part(cfg: RunConfig, data: Dataset) -> Dataset:
    if cfg.part == "all":
        return data
    train, val, test = split(data, cfg.split_spec())
    return {"train": train, "validate": val, "test": test}[cfg.part]


def _lookup_client(cfg: RunConfig):
    if cfg.live:
        return LiveLookupClient()
    if cfg.fixture:
        try:
            return FixtureLookupClient.from_file(cfg.fixture)
        except FileNotFoundError:
            raise DataError(f"fixture file not found: {cfg.fixture}") from None
        except (ValueError, json.JSONDecodeError) as exc:
            raise DataError(f"{cfg.fixture}: bad fixture ({exc})") from None
    return NullLookupClient()


def _read_url_lines(path):
    """``(line_no, url, html_path)`` for each non-blank, non-comment line."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"URL file not found: {path}")
    out = []
    for no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        url, _, html = line.partition("\t")
        html_path = None
        if html.strip():
            html_path = Path(html.strip())
            if not html_path.is_absolute():
                html_path = path.parent / html_path
        out.append((no, url.strip(), html_path))
    return out


def _extract_many(items, client):
    """Extract each item; failures are reported on stderr and skipped."""
    ok, failed = [], 0
    for label, url, html_path in items:
        try:
            html = None
            if html_path is not None:
                try:
                    html = Path(html_path).read_text(encoding="utf-8", errors="replace")
                except OSError as exc:
                    raise URLParseError(f"cannot read HTML {html_path}: {exc.strerror}") from None
            ok.append((label, url, extract(url, html=html, lookups=client)))
        except URLParseError as exc:
            failed += 1
            print(f"{label}: {exc}", file=sys.stderr)
    return ok, failed


def _url_items(args):
    if args.url is not None:
        return [("url", args.url, args.html)]
    return [(f"line {no}", url, html) for no, url, html in _read_url_lines(args.urls)]


def _check_schema(model_names, data_names, model_path, data_path) -> None:
    if list(model_names) == list(data_names):
        return
    raise DataError(
        "schema mismatch between model and data\n"
        f"  model {model_path} ({len(model_names)} features): {', '.join(model_names)}\n"
        f"  data  {data_path} ({len(data_names)} features): {', '.join(data_names)}"
    )


def _load_model(path):
    try:
        return load_model(path)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    except (ModelFormatError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: unreadable model ({exc})") from None


def _explanation(est, X, names) -> list[str | None]:
    if not hasattr(est, "explain"):
        return [None] * len(X)
    out = []
    for r in est.explain(X):
        if r is DEFAULT:
            default = est.rule_classifier_.default_class
            out.append(f"<DEFAULT -> {class_name(default)}>")
        else:
            out.append(r.describe(names))
    return out


# -- commands --------------------------------------------------------------------


def cmd_extract(args, cfg: RunConfig) -> int:
    items = _url_items(args)
    client = _lookup_client(cfg)
    ok, failed = _extract_many(items, client)
    path = _out_path(cfg, args.output)
    write_features_csv(FEATURE_NAMES, [r.vector.values for _, _, r in ok], path)
    log.info("wrote %s (%d rows)", path, len(ok))
    if not items:
        print("warning: no URLs in input; wrote header only", file=sys.stderr)
        return EXIT_OK
    if not ok:
        print(f"error: all {failed} URLs failed", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_train(args, cfg: RunConfig) -> int:
    data = _load_data(cfg)
    train, val, test = split(data, cfg.split_spec())
    log.info("split %d rows into train=%d validate=%d test=%d", len(data), len(train), len(val), len(test))
    if args.write_splits:
        for name, part in (("train", train), ("validate", val), ("test", test)):
            path = _out_path(cfg, f"{name}.csv")
            write_csv(part, path)
            log.info("wrote %s", path)
    fm = fit_timed(cfg.model, train, cfg.settings)
    _check_fitted(fm, train)
    model_path = _out_path(cfg, f"model-{cfg.model}.json")
    n_bytes = save_model(fm.estimator, train.feature_names, model_path, cfg.label_column)
    log.info("wrote %s (%d bytes)", model_path, n_bytes)
    report = {
        "model": cfg.model,
        "model_file": model_path.name,
        "model_bytes": n_bytes,
        "train_seconds": round(fm.train_seconds, 3),
        "dataset": cfg.data,
        "dataset_fingerprint": data.fingerprint(),
        "rows": {"train": len(train), "validate": len(val), "test": len(test)},
        # reported only; nothing is tuned on the validation part
        "validate_accuracy": round(float(fm.estimator.score(val.X, val.y)), 6) if len(val) else None,
        "config": cfg.to_dict(),
        **fm.extra,
    }
    _write_text(cfg, f"train-report-{cfg.model}.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _check_fitted(fm: FittedModel, train: Dataset) -> None:
    est = fm.estimator
    if getattr(est, "n_features_in_", None) != len(train.feature_names):
        raise InvariantError("fitted model width differs from the training data")
    if hasattr(est, "feature_subset_") and hasattr(est, "svm_"):
        if tuple(est.feature_subset_) != tuple(est.svm_.feature_subset):
            raise InvariantError("SVM was trained on a different feature subset than selected")


def _write_report(cfg: RunConfig, stem: str, report: EvaluationReport, roc: bool = False) -> None:
    _write_text(cfg, f"{stem}.json", report.to_json(include_roc=False) + "\n")
    text = report.to_text()
    _write_text(cfg, f"{stem}.txt", text)
    print(text, end="")
    if roc:
        for m in report.models:
            path = _out_path(cfg, f"roc-{m.name}.csv")
            m.roc.to_csv(path)
            log.info("wrote %s", path)


def cmd_evaluate(args, cfg: RunConfig) -> int:
    est, names = _load_model(args.model_file)
    data = _load_data(cfg)
    _check_schema(names, data.feature_names, args.model_file, cfg.data)
    test = _select_part(cfg, data)
    kind = kind_of(est)
    fm = FittedModel(kind, est, None)
    report = EvaluationReport([evaluate_fitted(fm, test)], test.fingerprint(), cfg.to_dict())
    _write_report(cfg, f"eval-{kind}", report, roc=args.roc)
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    data = _load_data(cfg)
    if args.model_files:
        reports, seen = [], set()
        test = _select_part(cfg, data)
        for path in args.model_files:
            est, names = _load_model(path)
            _check_schema(names, data.feature_names, path, cfg.data)
            name = Path(path).stem
            if name in seen:
                raise UsageError(f"two model files share the name {name!r}")
            seen.add(name)
            reports.append(evaluate_fitted(FittedModel(name, est, None), test))
        report = EvaluationReport(reports, test.fingerprint(), cfg.to_dict()).sorted()
        _write_report(cfg, "compare", report)
        return EXIT_OK

    if cfg.kfold is not None:
        if cfg.kfold > len(data):
            raise DataError(f"kfold={cfg.kfold} exceeds the {len(data)} rows in {cfg.data}")
        summary = cross_validate(cfg.kinds, data, cfg.kfold, cfg.settings)
        doc = {"dataset_fingerprint": data.fingerprint(), "config": cfg.to_dict(), "kfold": cfg.kfold,
               "models": summary}
        _write_text(cfg, "compare-kfold.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        lines = [f"{'Algorithm':<10}{'Accuracy':>10}{'AUC':>10}{'PseudoR2':>10}"]
        for kind in sorted(summary, key=lambda k: -summary[k]["mean_accuracy"]):
            s = summary[kind]
            lines.append(f"{kind:<10}{s['mean_accuracy']:>10.4f}{s['mean_auc']:>10.4f}{s['mean_pseudo_r2']:>10.4f}")
        text = "\n".join(lines)
        _write_text(cfg, "compare-kfold.txt", text + "\n")
        print(text)
        return EXIT_OK

    train, _, test = split(data, cfg.split_spec())
    reports = []
    for kind in cfg.kinds:
        fm = fit_timed(kind, train, cfg.settings)
        _check_fitted(fm, train)
        reports.append(evaluate_fitted(fm, test))
    report = EvaluationReport(reports, test.fingerprint(), cfg.to_dict()).sorted()
    _write_report(cfg, "compare", report)
    return EXIT_OK


def cmd_predict(args, cfg: RunConfig) -> int:
    est, names = _load_model(args.model_file)
    if args.data is not None:
        data_names, X = load_features(args.data, label_column=cfg.label_column)
        _check_schema(names, data_names, args.model_file, args.data)
        tags = [None] * len(X)
    else:
        if list(names) != list(FEATURE_NAMES):
            raise DataError(
                "model features do not match the URL extractor's columns; "
                "predict on a feature CSV instead\n"
                f"  model: {', '.join(names)}\n  extractor: {', '.join(FEATURE_NAMES)}"
            )
        items = _url_items(args)
        ok, _ = _extract_many(items, _lookup_client(cfg))
        X = [r.vector.values for _, _, r in ok]
        tags = [url for _, url, _ in ok]
        if not ok:
            print("error: no URL could be processed", file=sys.stderr)
            return EXIT_DATA
    if len(X) == 0:
        print("warning: no rows to predict", file=sys.stderr)
        return EXIT_OK
    X = np.asarray(X, dtype=np.int8)
    labels = est.predict(X)
    scores = est.decision_function(X)
    rules = _explanation(est, X, names)
    for label, score, rule, tag in zip(labels, scores, rules, tags):
        line = f"{class_name(int(label))} score={float(score):.2f}"
        if rule is not None:
            line += f" rule={rule}"
        if tag is not None:
            line += f" url={tag}"
        print(line)
    return EXIT_OK


COMMANDS = {
    "extract": cmd_extract,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DatasetError, URLParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvariantError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        log.exception("unexpected failure")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
