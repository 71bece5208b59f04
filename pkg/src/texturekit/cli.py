"""Command-line front end: one subcommand per pipeline stage, handing off files in a run directory.

Run directory layout::

    run/config.echo       RunConfig of the latest stage (JSON)
    run/run_log.jsonl     one record per stage: config, versions, seed, wall time, outputs
    run/features.csv      extract
    run/models/model.json train
    run/metrics.csv       cv, grid, cluster
    run/folds.csv         cv lineage: every (fold, sample, patient, role)
    run/selection/        select: trace.csv, subset.txt
    run/shap/             explain: shap_values.csv, summary.csv
    run/correlation.csv   correlate (+ correlation.invalid.txt)
    run/figures/          report: *.svg
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from ._seed import default_threads
from .augment import AugmentSpec, augment_dataset
from .errors import ConfigError, DataError, TextureKitError
from .evaluate import (cluster_configs, cross_validate, cross_validate_table, grid_search,
                       make_folds, make_grid, rank_summaries, read_metrics_csv, rf_grid, write_metrics_csv)
from .features import FeatureConfig, FeatureTable, build_table
from .learners import ForestModel, RFParams, SVMParams, fit_model, load_model, save_model
from .patchio import PREP_VARIANTS, load_manifest, resize_dataset
from .select import correlation_prefilter, read_subset, sbfs
from .synth import EFFECTS, SyntheticSpec, synth

log = logging.getLogger("texturekit")

FEATURES_CSV = "features.csv"
METRICS_CSV = "metrics.csv"
FOLDS_CSV = "folds.csv"
MODEL_JSON = "models/model.json"
FOLDS_HEADER = ["fold", "sample_id", "parent_id", "patient_id", "role"]


# ---------------------------------------------------------------- configuration

@dataclass
class RunConfig:
    dataset: str | None = None
    out: str = "run"
    prep: str = "none"
    patch_size: int | None = None
    augment: dict = field(default_factory=lambda: AugmentSpec().to_dict())
    model: dict = field(default_factory=lambda: {"learner": "rf", **RFParams().to_dict()})
    grid: dict = field(default_factory=lambda: {"n_trees": [50, 100, 150], "max_depth": [0, 20],
                                                "min_samples_leaf": [2, 4], "min_samples_split": [1, 20, 40],
                                                "preps": ["none"], "sizes": [None]})
    seed: int = 0
    folds: int = 5
    selection: dict = field(default_factory=lambda: {"min_size": 1, "patience": 20, "prefilter": False,
                                                     "prefilter_threshold": 0.98})
    explain: dict = field(default_factory=lambda: {"share": 0.9, "top": 20, "include_augmented": False})
    clusters: int = 3

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        base = cls()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        for k, v in doc.items():
            cur = getattr(base, k)
            if isinstance(cur, dict):
                if not isinstance(v, dict):
                    raise ConfigError(f"config field {k!r} must be an object")
                cur = {**cur, **v}
                setattr(base, k, cur)
            else:
                setattr(base, k, v)
        return base

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def augment_spec(self) -> AugmentSpec:
        try:
            return AugmentSpec.from_dict(self.augment)
        except TypeError as exc:
            raise ConfigError(f"bad augmentation spec: {exc}") from exc

    def model_params(self):
        return params_from_dict(self.model)

    def validate(self) -> None:
        if self.prep not in PREP_VARIANTS:
            raise ConfigError(f"prep must be one of {', '.join(PREP_VARIANTS)}")
        if self.patch_size not in (None, 16, 32):
            raise ConfigError("patch size must be 16 or 32 (or omitted for native)")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.clusters < 1:
            raise ConfigError("clusters must be >= 1")
        self.model_params()
        self.augment_spec()


def params_from_dict(d: dict):
    d = dict(d)
    learner = d.pop("learner", "rf")
    try:
        if learner == "rf":
            return RFParams(**d)
        if learner == "svm":
            return SVMParams(**d)
    except TypeError as exc:
        raise ConfigError(f"bad {learner} parameters: {exc}") from exc
    raise ConfigError(f"learner must be 'rf' or 'svm', got {learner!r}")


def _int_or_float_or_str(v: str):
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def _int_list(v: str) -> list[int]:
    try:
        return [int(x) for x in v.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {v!r}") from exc


def _size_list(v: str) -> list[int | None]:
    out = []
    for x in v.split(","):
        x = x.strip()
        if x in ("native", ""):
            out.append(None)
        else:
            try:
                out.append(int(x))
            except ValueError as exc:
                raise argparse.ArgumentTypeError(f"bad patch size {x!r}") from exc
    return out


# flag dest -> (RunConfig field, key inside a dict field or None)
_OVERRIDES = {
    "dataset": ("dataset", None), "out": ("out", None), "prep": ("prep", None),
    "patch_size": ("patch_size", None), "seed": ("seed", None), "folds": ("folds", None),
    "clusters": ("clusters", None),
    "augment_count": ("augment", "per_sample_count"),
    "learner": ("model", "learner"), "trees": ("model", "n_trees"), "max_depth": ("model", "max_depth"),
    "min_leaf": ("model", "min_samples_leaf"), "min_split": ("model", "min_samples_split"),
    "features_per_split": ("model", "features_per_split"), "class_weight": ("model", "class_weight"),
    "C": ("model", "C"), "gamma": ("model", "gamma"), "kernel": ("model", "kernel"),
    "grid_trees": ("grid", "n_trees"), "grid_depth": ("grid", "max_depth"), "grid_leaf": ("grid", "min_samples_leaf"),
    "grid_split": ("grid", "min_samples_split"), "grid_preps": ("grid", "preps"), "grid_sizes": ("grid", "sizes"),
    "min_size": ("selection", "min_size"), "patience": ("selection", "patience"),
    "prefilter": ("selection", "prefilter"), "prefilter_threshold": ("selection", "prefilter_threshold"),
    "share": ("explain", "share"), "top": ("explain", "top"), "include_augmented": ("explain", "include_augmented"),
}

_RF_ONLY = ("n_trees", "max_depth", "min_samples_leaf", "min_samples_split", "features_per_split",
            "bootstrap", "class_weight", "seed")
_SVM_ONLY = ("kernel", "C", "gamma", "tolerance", "max_iterations")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    for dest, (fname, key) in _OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is None:
            continue
        if key is None:
            setattr(cfg, fname, v)
        else:
            getattr(cfg, fname)[key] = v
    learner = cfg.model.get("learner", "rf")
    drop = _SVM_ONLY if learner == "rf" else _RF_ONLY
    cfg.model = {k: v for k, v in cfg.model.items() if k not in drop}
    if learner == "svm":
        cfg.model = {"learner": "svm", **{k: v for k, v in SVMParams().to_dict().items()}, **cfg.model}
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- run bookkeeping

def _versions() -> dict:
    import numba
    import scipy

    return {"texturekit": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def _record(cfg: RunConfig, command: str, argv: Sequence[str], started: float, outputs: Sequence[Path],
            threads: int) -> None:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.echo").write_text(cfg.to_json() + "\n")
    rec = {"command": command, "argv": list(argv), "config": dataclasses.asdict(cfg), "versions": _versions(),
           "seed": cfg.seed, "threads": threads, "wall_time_s": round(time.time() - started, 3),
           "outputs": [str(p) for p in outputs]}
    with open(out / "run_log.jsonl", "a") as fh:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _threads(args) -> int:
    t = getattr(args, "threads", None)
    if t is None:
        return default_threads()
    if t < 1:
        raise ConfigError("--threads must be >= 1")
    return t


def _need_dataset(cfg: RunConfig):
    if not cfg.dataset:
        raise ConfigError("no dataset given (--dataset or 'dataset' in the config)")
    d = load_manifest(cfg.dataset)
    if len(d) == 0:
        raise DataError(f"{cfg.dataset}: manifest lists no samples")
    return resize_dataset(d, cfg.patch_size) if cfg.patch_size else d


def _features_path(args, cfg: RunConfig) -> Path:
    return Path(args.features) if getattr(args, "features", None) else cfg.out_dir / FEATURES_CSV


def _load_table(args, cfg: RunConfig) -> FeatureTable:
    table = FeatureTable.read_csv(_features_path(args, cfg)).impute()
    if getattr(args, "subset", None):
        table = table.columns(read_subset(args.subset))
    return table


# ---------------------------------------------------------------- stages

def cmd_synth(args, cfg, threads) -> list[Path]:
    spec = SyntheticSpec(n_patients=args.patients, samples_per_patient=args.samples_per_patient,
                         class_effect=args.effect, noise_level=args.noise, seed=cfg.seed, size=args.size)
    manifest = synth(spec, args.data_dir)
    print(manifest)
    return [manifest]


def cmd_extract(args, cfg, threads) -> list[Path]:
    d = _need_dataset(cfg)
    if args.augment:
        d = augment_dataset(d, cfg.augment_spec(), cfg.seed, threads)
    table = build_table(d, cfg.prep, FeatureConfig(), threads, impute=False)
    path = table.write_csv(cfg.out_dir / FEATURES_CSV)
    cfg_path = cfg.out_dir / "feature_config.json"
    cfg_path.write_text(json.dumps(dataclasses.asdict(table.config), sort_keys=True) + "\n")
    return [path, cfg_path]


def cmd_train(args, cfg, threads) -> list[Path]:
    table = _load_table(args, cfg)
    table_y = table.y
    if len(set(int(v) for v in table_y)) < 2:
        raise DataError("training data holds a single class")
    model = fit_model(cfg.model_params(), table.X, table_y, seed=cfg.seed, feature_names=table.feature_names,
                      threads=threads)
    return [save_model(model, cfg.out_dir / MODEL_JSON)]


def _write_folds(summary, path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FOLDS_HEADER)
        for f in summary.folds:
            for sid, pid in zip(f.train_ids, f.train_patients):
                w.writerow([f.fold, sid, sid.split("~", 1)[0], pid, "train"])
            for sid, pid in zip(f.test_ids, f.test_patients):
                w.writerow([f.fold, sid, sid.split("~", 1)[0], pid, "test"])
    return path


def cmd_cv(args, cfg, threads) -> list[Path]:
    params = cfg.model_params()
    if getattr(args, "features", None):
        table = _load_table(args, cfg)
        plan = make_folds(table, cfg.folds, cfg.seed)
        s = cross_validate_table(table, params, plan, seed=cfg.seed, threads=threads)
    else:
        d = _need_dataset(cfg)
        subset = read_subset(args.subset) if args.subset else None
        s = cross_validate(d, cfg.prep, params, feature_subset=subset, k=cfg.folds, seed=cfg.seed,
                           augment=cfg.augment_spec(), threads=threads)
    _report_skipped([s])
    out = cfg.out_dir
    return [write_metrics_csv([s], out / METRICS_CSV), _write_folds(s, out / FOLDS_CSV)]


def _report_skipped(summaries) -> None:
    for s in summaries:
        if s.skipped_auc_folds:
            print(f"warning: {s.config_id}: AUC undefined in fold(s) "
                  f"{', '.join(map(str, s.skipped_auc_folds))} (single-class test portion)", file=sys.stderr)


def cmd_grid(args, cfg, threads) -> list[Path]:
    d = _need_dataset(cfg)
    g = cfg.grid
    try:
        params = rf_grid(g["n_trees"], g["max_depth"], g["min_samples_leaf"], g["min_samples_split"])
    except KeyError as exc:
        raise ConfigError(f"grid is missing {exc.args[0]!r}") from exc
    cells = make_grid(params, tuple(g.get("preps", ["none"])), tuple(g.get("sizes", [None])))
    for c in cells:
        if c.prep not in PREP_VARIANTS or c.patch_size not in (None, 16, 32):
            raise ConfigError(f"bad grid cell prep={c.prep} size={c.patch_size}")
    summaries = grid_search(d, cells, cfg.folds, cfg.seed, cfg.augment_spec(), threads=threads)
    _report_skipped(summaries)
    return [write_metrics_csv(summaries, cfg.out_dir / METRICS_CSV)]


def cmd_select(args, cfg, threads) -> list[Path]:
    table = _load_table(args, cfg)
    sel = cfg.selection
    names = list(table.feature_names)
    if sel.get("prefilter"):
        names = correlation_prefilter(table, float(sel.get("prefilter_threshold", 0.98)))
    plan = make_folds(table, cfg.folds, cfg.seed)
    trace = sbfs(table, cfg.model_params(), plan, min_size=int(sel.get("min_size", 1)),
                 patience=int(sel.get("patience", 20)), seed=cfg.seed, threads=threads, features=names)
    out = cfg.out_dir / "selection"
    print(f"selected {len(trace.final_subset)} of {len(names)} features, "
          f"criterion {trace.final_criterion:.4f} (all: {trace.full_criterion:.4f})")
    return [trace.write_csv(out / "trace.csv"), trace.write_subset(out / "subset.txt")]


def cmd_explain(args, cfg, threads) -> list[Path]:
    from .explain import explain_table, shap_summary, write_summary_csv

    model = load_model(args.model or cfg.out_dir / MODEL_JSON)
    if not isinstance(model, ForestModel):
        raise ConfigError("Shapley attribution is implemented for forest models only")
    table = FeatureTable.read_csv(_features_path(args, cfg)).impute()
    if not cfg.explain.get("include_augmented", False):
        table = table.rows(~table.augmented)
    if len(table) == 0:
        raise DataError("no rows to explain")
    table = table.columns(model.feature_names)
    report = explain_table(model, table.X, table.sample_ids)
    err = report.local_accuracy_error()
    if err > 1e-9:
        log.warning("local accuracy error %.3g exceeds 1e-9", err)
    out = cfg.out_dir / "shap"
    summary = shap_summary(report, float(cfg.explain.get("share", 0.9)))
    return [report.write_csv(out / "shap_values.csv"), write_summary_csv(summary, out / "summary.csv")]


def cmd_correlate(args, cfg, threads) -> list[Path]:
    from .explain import pearson_matrix

    table = FeatureTable.read_csv(_features_path(args, cfg))
    if not args.include_augmented:
        table = table.rows(~table.augmented)
    return list(pearson_matrix(table).write_csv(cfg.out_dir / "correlation.csv"))


def cmd_cluster(args, cfg, threads) -> list[Path]:
    path = Path(args.metrics) if args.metrics else cfg.out_dir / METRICS_CSV
    summaries = read_metrics_csv(path)
    cc = cluster_configs(summaries, cfg.clusters, cfg.seed)
    labels = cc.as_dict()
    ranked = rank_summaries([s.with_cluster(labels[s.config_id]) for s in summaries])
    out = write_metrics_csv(ranked, cfg.out_dir / METRICS_CSV)
    side = cfg.out_dir / "clusters.json"
    side.write_text(json.dumps({"k": cfg.clusters, "inertia": cc.inertia,
                                "members": {str(c): cc.members(c) for c in range(cfg.clusters)}},
                               indent=2, sort_keys=True) + "\n")
    return [out, side]


def cmd_report(args, cfg, threads) -> list[Path]:
    from .explain import correlation_heatmap, metric_scatter, pearson_matrix

    run = cfg.out_dir
    fig = run / "figures"
    stamp = not args.no_timestamp
    made = []
    feats = run / FEATURES_CSV
    if feats.exists():
        table = FeatureTable.read_csv(feats)
        table = table.rows(~table.augmented)
        if len(table) >= 2:
            cm = pearson_matrix(table)
            idx = np.flatnonzero(cm.valid_mask)
            made.append(correlation_heatmap([cm.feature_names[i] for i in idx], cm.r[np.ix_(idx, idx)],
                                            fig / "correlation.svg", timestamp=stamp))
    shap_csv = run / "shap" / "shap_values.csv"
    if shap_csv.exists():
        made.append(_shap_figure(shap_csv, fig / "shap.svg", int(cfg.explain.get("top", 20)), stamp))
    metrics = run / METRICS_CSV
    if metrics.exists():
        ms = read_metrics_csv(metrics)
        made.append(metric_scatter([s.auc[0] for s in ms], [s.accuracy[0] for s in ms], [s.cluster for s in ms],
                                   fig / "metrics.svg", timestamp=stamp))
    if not made:
        raise DataError(f"{run}: nothing to report (no features.csv, shap/shap_values.csv or metrics.csv)")
    return made


def _shap_figure(path: Path, out: Path, top: int, stamp: bool) -> Path:
    from .explain import shap_strips

    phis: dict[str, list[float]] = {}
    vals: dict[str, list[float]] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        if next(r, None) != ["sample_id", "feature", "phi", "feature_value"]:
            raise DataError(f"{path}: not a Shapley export")
        for row in r:
            phis.setdefault(row[1], []).append(float(row[2]))
            vals.setdefault(row[1], []).append(float(row[3]))
    names = sorted(phis, key=lambda n: (-np.mean(np.abs(phis[n])), n))[:top]
    return shap_strips(names, [np.array(phis[n]) for n in names], [np.array(vals[n]) for n in names], out,
                       timestamp=stamp)


# ---------------------------------------------------------------- argument parsing

def _common(p: argparse.ArgumentParser, dataset=False, model=False, augment=False, features=False) -> None:
    p.add_argument("--config", help="RunConfig JSON; flags override its fields")
    p.add_argument("--out", help="run directory (default: run)")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--threads", type=int, help="worker cap (default: $TEXTUREKIT_THREADS or 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    if dataset:
        p.add_argument("--dataset", help="manifest CSV")
        p.add_argument("--prep", choices=PREP_VARIANTS)
        p.add_argument("--patch-size", type=int, choices=(16, 32))
    if augment:
        p.add_argument("--augment-count", type=int, help="augmented copies per sample")
    if features:
        p.add_argument("--features", help="feature table CSV (default: <run>/features.csv)")
        p.add_argument("--subset", help="feature subset file, one name per line")
    if model:
        p.add_argument("--learner", choices=("rf", "svm"))
        p.add_argument("--trees", type=int)
        p.add_argument("--max-depth", type=int, help="0 = unlimited")
        p.add_argument("--min-leaf", type=int)
        p.add_argument("--min-split", type=int, help="1 = no constraint")
        p.add_argument("--features-per-split", type=_int_or_float_or_str, help="sqrt, all, an int or a fraction")
        p.add_argument("--class-weight", choices=("balanced",))
        p.add_argument("--C", type=float, dest="C")
        p.add_argument("--gamma", type=float)
        p.add_argument("--kernel", choices=("linear", "rbf"))
        p.add_argument("--folds", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="texturekit", description="Texture-feature classification pipeline.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic patch dataset")
    _common(p)
    p.add_argument("--data-dir", required=True, help="where patches and manifest.csv go")
    p.add_argument("--patients", type=int, default=40)
    p.add_argument("--samples-per-patient", type=int, default=2)
    p.add_argument("--effect", choices=EFFECTS, default="mixed")
    p.add_argument("--noise", type=float, default=SyntheticSpec().noise_level)
    p.add_argument("--size", type=int, choices=(16, 32), default=16)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="compute the 159-feature table")
    _common(p, dataset=True, augment=True)
    p.add_argument("--augment", action="store_true", help="append augmented copies (ids contain '~')")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit one model on a feature table")
    _common(p, model=True, features=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="patient-grouped cross-validation of one configuration")
    _common(p, dataset=True, model=True, augment=True, features=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("grid", help="cross-validate a random-forest hyperparameter grid")
    _common(p, dataset=True, augment=True)
    p.add_argument("--folds", type=int)
    p.add_argument("--grid-trees", type=_int_list)
    p.add_argument("--grid-depth", type=_int_list)
    p.add_argument("--grid-leaf", type=_int_list)
    p.add_argument("--grid-split", type=_int_list)
    p.add_argument("--grid-preps", type=lambda v: [x.strip() for x in v.split(",") if x.strip()])
    p.add_argument("--grid-sizes", type=_size_list, help="e.g. native,16,32")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("select", help="backward floating feature selection")
    _common(p, model=True, features=True)
    p.add_argument("--min-size", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--prefilter", action="store_true", default=None,
                   help="drop features correlated above the threshold first")
    p.add_argument("--prefilter-threshold", type=float)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("explain", help="exact Shapley values of a forest model")
    _common(p, features=True)
    p.add_argument("--model", help="model JSON (default: <run>/models/model.json)")
    p.add_argument("--share", type=float, help="cumulative mean |phi| share marking the top features")
    p.add_argument("--include-augmented", action="store_true", default=None)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("correlate", help="Pearson correlation matrix of the features")
    _common(p, features=True)
    p.add_argument("--include-augmented", action="store_true")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("cluster", help="k-means over configuration metric vectors")
    _common(p)
    p.add_argument("--metrics", help="metrics CSV (default: <run>/metrics.csv)")
    p.add_argument("--clusters", type=int)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("report", help="SVG figures from the run directory")
    _common(p)
    p.add_argument("--top", type=int, help="features shown in the Shapley figure")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation-time comment")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:          # argparse: usage errors exit 2, --help/--version exit 0
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    try:
        cfg = resolve_config(args)
        threads = _threads(args)
        outputs = args.func(args, cfg, threads)
        _record(cfg, args.command, argv, started, outputs, threads)
    except TextureKitError as exc:
        print(f"texturekit {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"texturekit {args.command}: {exc}", file=sys.stderr)
        return DataError.exit_code
    except Exception as exc:  # noqa: BLE001 - last-resort one-line diagnostic
        print(f"texturekit {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
