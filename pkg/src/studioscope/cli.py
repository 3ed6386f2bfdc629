"""Command-line pipeline: extract, analyze, som, classify, bundle.

Every subcommand is deterministic given its inputs, config and seeds, and
reruns produce byte-identical outputs regardless of ``--threads``.  Exit
codes form a stable contract: 0 success, 1 usage error, 2 data error,
3 numeric failure.  Non-fatal conditions go to stderr as
``WARN <class>: <detail>`` lines.

Options resolve as: command-line flag > config file > built-in default.
The config file is plain ``key = value`` lines (``#`` comments); see the
README for the key list.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from pathlib import Path

from . import bundle as bundle_mod
from . import som as som_mod
from . import stats as stats_mod
from .corpus import FEATURE_NAMES, ingest_feature_table, write_norm_sidecar
from .errors import (
    DataError,
    InsufficientData,
    NumericError,
    SmallSampleWarning,
    StudioscopeError,
    ToolkitWarning,
    UsageError,
)
from .features import ExtractionConfig, extract_corpus
from .forest import ForestConfig, style_report


def _print_warning(message, category, filename, lineno, file=None, line=None):
    name = category.__name__
    if name.endswith("Warning"):
        name = name[:-len("Warning")]
    print(f"WARN {name}: {message}", file=sys.stderr)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read ``key = value`` lines; '#' starts a comment; blanks ignored."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _cfg(cfg: dict[str, str], key: str, flag, default, conv):
    if flag is not None:
        return flag
    if key in cfg:
        try:
            return conv(cfg[key])
        except ValueError as exc:
            raise UsageError(f"config key {key}: {exc}") from exc
    return default


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _load_common(args) -> dict[str, str]:
    return parse_config_file(args.config) if args.config else {}


def _extraction_config(cfg: dict[str, str], seed) -> ExtractionConfig:
    return ExtractionConfig(
        frame_length=_cfg(cfg, "extract.frame_length", None, 4096, int),
        hop_length=_cfg(cfg, "extract.hop_length", None, 2048, int),
        box_grid=_cfg(cfg, "extract.box_grid", None, 16, int),
        bpm_range=(
            _cfg(cfg, "extract.bpm_min", None, 60.0, float),
            _cfg(cfg, "extract.bpm_max", None, 200.0, float),
        ),
        seed=_cfg(cfg, "seed", seed, 0, int),
    )


def _som_config(cfg: dict[str, str], seed) -> som_mod.SomConfig:
    radius = _cfg(cfg, "som.initial_radius", None, None, float)
    return som_mod.SomConfig(
        width=_cfg(cfg, "som.width", None, 30, int),
        height=_cfg(cfg, "som.height", None, 20, int),
        epochs=_cfg(cfg, "som.epochs", None, 20, int),
        initial_learning_rate=_cfg(cfg, "som.initial_learning_rate", None, 0.5, float),
        final_learning_rate=_cfg(cfg, "som.final_learning_rate", None, 0.01, float),
        initial_radius=radius,
        final_radius=_cfg(cfg, "som.final_radius", None, 1.0, float),
        seed=_cfg(cfg, "seed", seed, 0, int),
        init_mode=_cfg(cfg, "som.init_mode", None, "pca_linear", str),
    )


def _forest_config(cfg: dict[str, str], seed, cv_mode) -> ForestConfig:
    max_depth = _cfg(cfg, "forest.max_depth", None, 0, int)
    return ForestConfig(
        n_trees=_cfg(cfg, "forest.n_trees", None, 100, int),
        max_features=_cfg(cfg, "forest.max_features", None, 2, int),
        min_leaf=_cfg(cfg, "forest.min_leaf", None, 1, int),
        max_depth=max_depth if max_depth > 0 else None,
        bootstrap=_cfg(cfg, "forest.bootstrap", None, True, _bool),
        seed=_cfg(cfg, "seed", seed, 0, int),
        cv_folds=_cfg(cfg, "forest.cv_folds", None, 100, int),
        cv_mode=_cfg(cfg, "forest.cv_mode", cv_mode, "kfold", str),
        test_fraction=_cfg(cfg, "forest.test_fraction", None, 0.1, float),
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_extract(args) -> int:
    cfg = _load_common(args)
    config = _extraction_config(cfg, args.seed)
    threads = _cfg(cfg, "threads", args.threads, 1, int)
    n_rows, failures = extract_corpus(args.audio_dir, args.metadata, config,
                                      args.out_csv, threads=threads)
    corpus = ingest_feature_table(args.out_csv, "csv")
    write_norm_sidecar(corpus, Path(str(args.out_csv) + ".norm.json"))
    print(f"extracted {n_rows} track(s), {len(failures)} failure(s) -> {args.out_csv}")
    return 0


def _manova_payload(results) -> list[dict]:
    return [dataclasses.asdict(r) for r in results]


def cmd_analyze(args) -> int:
    cfg = _load_common(args)
    year_coding = _cfg(cfg, "year_coding", args.year_coding, "numeric", str)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = ingest_feature_table(args.corpus_csv)

    z = corpus.feature_matrix
    nations = corpus.nations()
    years = corpus.years()
    try:
        manova = stats_mod.manova_two_way(z, nations, years, year_coding)
        anova = stats_mod.anova_posthoc(z, nations, years, year_coding)
        for r in manova:
            print(f"{r.effect}: Wilks lambda = {r.wilks_lambda:.4f}, "
                  f"F({r.df1}, {r.df2:.0f}) = {r.f_stat:.1f}, "
                  f"p {stats_mod.format_p(r.p_value)}, "
                  f"partial eta^2 = {r.partial_eta_sq:.3f}")
    except InsufficientData as exc:
        warnings.warn(f"inferential tests skipped: {exc}", SmallSampleWarning,
                      stacklevel=2)
        manova, anova = [], []

    _write_json(out_dir / "manova.json", _manova_payload(manova))
    _write_json(out_dir / "anova.json", _manova_payload(anova))

    boxplots = stats_mod.corpus_boxplots(corpus)
    payload = {
        feature: {
            nation: {
                str(year): {
                    "median": s.median, "q1": s.q1, "q3": s.q3,
                    "whisker_low": s.whisker_low, "whisker_high": s.whisker_high,
                    "n": s.n,
                    "outliers": [[tid, value] for tid, value in s.outliers],
                }
                for year, s in sorted(per_nation.items())
            }
            for nation, per_nation in sorted(per_feature.items())
        }
        for feature, per_feature in boxplots.items()
    }
    _write_json(out_dir / "boxplots.json", payload)
    print(f"reports written to {out_dir}")
    return 0


def cmd_som(args) -> int:
    cfg = _load_common(args)
    config = _som_config(cfg, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = ingest_feature_table(args.corpus_csv)

    grid = som_mod.train_som(corpus.feature_matrix, config)
    som_mod.save_grid(grid, out_dir / "som.json")
    placements = som_mod.place_tracks(grid, corpus)
    labels = {r.track_id: (r.nation, r.year) for r in corpus.records}

    variance = som_mod.group_location_variance(placements, labels)
    _write_json(out_dir / "variance.json", {
        nation: {str(year): {"x": v[0], "y": v[1]}
                 for year, v in sorted(per_year.items())}
        for nation, per_year in sorted(variance.items())
    })

    distances = som_mod.group_distances(placements, labels)
    _write_json(out_dir / "distances.json",
                {str(year): dict(sorted(entry.items()))
                 for year, entry in sorted(distances.items())})

    payload = bundle_mod.build_map_bundle(grid, placements, corpus)
    bundle_mod.save_map_bundle(payload, out_dir / "map_bundle.json")
    print(f"map bundle with {len(placements)} tracks written to {out_dir}")
    return 0


def cmd_classify(args) -> int:
    cfg = _load_common(args)
    config = _forest_config(cfg, args.seed, args.cv)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = ingest_feature_table(args.corpus_csv)

    report = style_report(corpus, args.nation, config)
    k = len(report.classes)
    lines = ["style," + ",".join(report.classes)]
    for i in range(k):
        cells = ",".join(f"{report.confusion_percent[i, j]:.1f}" for j in range(k))
        lines.append(f"{report.classes[i]},{cells}")
    (out_dir / f"confusion_{args.nation}.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8")

    metrics = {
        "classes": report.classes,
        "n_folds": report.n_folds,
        "cv_mode": config.cv_mode,
        "accuracy": {"mean": report.accuracy[0], "std": report.accuracy[1]},
        "precision": {"mean": report.precision[0], "std": report.precision[1]},
        "recall": {"mean": report.recall[0], "std": report.recall[1]},
        "f1": {"mean": report.f1[0], "std": report.f1[1]},
        "train_accuracy": {"mean": report.train_accuracy[0],
                           "std": report.train_accuracy[1]},
        "per_class_recall": {c: float(r) for c, r in
                             zip(report.classes, report.per_class_recall)},
        "confusion_counts": report.confusion_counts.tolist(),
    }
    _write_json(out_dir / f"metrics_{args.nation}.json", metrics)
    print(f"{args.nation}: accuracy {report.accuracy[0]:.3f} +- {report.accuracy[1]:.3f} "
          f"over {report.n_folds} folds")
    return 0


def cmd_bundle(args) -> int:
    out_path = Path(args.out_json)
    corpus = ingest_feature_table(args.corpus_csv)
    grid = som_mod.load_grid(args.som_json)
    placements = som_mod.place_tracks(grid, corpus)
    stats_summary = None
    if args.stats_dir:
        stats_summary = {}
        for name in ("manova", "anova", "boxplots"):
            path = Path(args.stats_dir) / f"{name}.json"
            if path.is_file():
                stats_summary[name] = json.loads(path.read_text(encoding="utf-8"))
    payload = bundle_mod.build_map_bundle(grid, placements, corpus, stats_summary)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    bundle_mod.save_map_bundle(payload, out_path)
    print(f"bundle with {len(placements)} tracks written to {out_path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="studioscope",
                     description="Recording-studio feature corpus analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, default=None, help="master random seed")
        p.add_argument("--threads", type=int, default=None,
                       help="intra-stage parallelism; never changes output bytes "
                            "(training stages are sequential by definition and ignore it)")

    p = sub.add_parser("extract", help="extract features from an audio directory")
    p.add_argument("audio_dir")
    p.add_argument("metadata", help="CSV: filename,track_id,title,artist,label,nation,year,style")
    p.add_argument("out_csv")
    common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="MANOVA, post-hoc ANOVA and boxplot reports")
    p.add_argument("corpus_csv")
    p.add_argument("out_dir")
    common(p)
    p.add_argument("--year-coding", choices=("numeric", "categorical"), default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("som", help="train the map and export bundle + trajectory metrics")
    p.add_argument("corpus_csv")
    p.add_argument("out_dir")
    common(p)
    p.set_defaults(func=cmd_som)

    p = sub.add_parser("classify", help="cross-validated style classification")
    p.add_argument("corpus_csv")
    p.add_argument("nation", choices=("G", "U"))
    p.add_argument("out_dir")
    common(p)
    p.add_argument("--cv", choices=("kfold", "repeated"), default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bundle", help="rebuild a map bundle from corpus + trained som")
    p.add_argument("corpus_csv")
    p.add_argument("som_json")
    p.add_argument("out_json")
    common(p)
    p.add_argument("--stats-dir", default=None,
                   help="attach manova/anova/boxplot reports from this directory")
    p.set_defaults(func=cmd_bundle)
    return parser


def main(argv: list[str] | None = None) -> int:
    old_showwarning = warnings.showwarning
    warnings.showwarning = _print_warning
    warnings.simplefilter("always", ToolkitWarning)
    try:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except UsageError as exc:
            print(f"ERROR Usage: {exc}", file=sys.stderr)
            return 1
        try:
            return args.func(args)
        except UsageError as exc:
            print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
        except DataError as exc:
            print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
            return 2
        except NumericError as exc:
            print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
            return 3
        except StudioscopeError as exc:  # pragma: no cover - safety net
            print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
            return 2
    finally:
        warnings.showwarning = old_showwarning


if __name__ == "__main__":
    sys.exit(main())
