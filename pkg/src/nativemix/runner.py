"""End-to-end experiment orchestration from a single config file.

One run = load corpora, split the code-mixed base once, build every
training set for the chosen experiment, then for each
(training set x model x seed) cell fit features on that training set only,
train, and score against the fixed code-mixed test split. Every artifact
lands under a config-hashed run directory together with a manifest, so a
rerun with the same config reproduces the same results.csv byte for byte.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .classifiers import (
    nb_predict, nb_train, rf_predict, rf_train, svm_predict, svm_train,
)
from .corpus import (
    Corpus, DEFAULT_LABEL_ALIASES, Label, load_corpus, save_corpus,
)
from .errors import ConfigError, DegenerateVariance
from .evaluate import (
    CellSummary, RunReport, render_report, summarize_cell, welch_t_test,
    write_predictions,
)
from .features import (
    Weighting, fit_feature_space, tokenize, vectorize,
)
from .mixer import (
    MixPlan, PRNG_NAME, RatioMode, SplitSpec, SweepPlan, build_mix,
    build_native_only, build_sweep, derive_proportional_counts,
    stratified_split,
)

EXPERIMENT_KINDS = ("baseline_only", "native_mix", "batch_sweep", "native_only")
STATISTICAL_KINDS = ("nb", "svm", "rf")
BASELINE_SET = "cm"

_LABEL_KEYS = {"hate": Label.HATE, "non-hate": Label.NON_HATE}


@dataclass
class ModelSpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    corpora: dict[str, dict]          # name -> {path, format, source}
    base: str
    donors: list[str]
    experiment: str
    split: SplitSpec
    split_seed: int
    mix_seed: int
    models: list[ModelSpec]
    seeds: list[int]
    output_dir: Path
    feature_options: dict = field(default_factory=dict)
    equal_mix_counts: dict[str, dict[Label, int]] | None = None
    ratio_mix_counts: dict[str, dict[Label, int]] | None = None
    ratio_mix_caps: dict[str, int] | None = None
    sweep_batch: int = 200
    sweep_steps: int = 7
    sweep_modes: tuple[RatioMode, ...] = (RatioMode.EQUAL, RatioMode.BASE)
    mlm_options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            split_raw = raw.get("split", {})
            spec = SplitSpec(
                train_frac=float(split_raw.get("train", 0.7)),
                val_frac=float(split_raw.get("val", 0.15)),
                test_frac=float(split_raw.get("test", 0.15)),
            )
            mix_raw = raw.get("mix", {})
            models = [
                ModelSpec(
                    name=m["name"],
                    kind=m["kind"],
                    params={k: v for k, v in m.items()
                            if k not in ("name", "kind", "grid")},
                    grid=m.get("grid", {}),
                )
                for m in raw.get("models", [])
            ]
            sweep_raw = raw.get("sweep", {})
            return cls(
                corpora=raw["corpora"],
                base=raw.get("base", "cm"),
                donors=list(raw.get("donors", [])),
                experiment=raw.get("experiment", "baseline_only"),
                split=spec,
                split_seed=int(split_raw.get("seed", 0)),
                mix_seed=int(mix_raw.get("seed", 0)),
                models=models,
                seeds=[int(s) for s in raw.get("seeds", [0])],
                output_dir=Path(raw.get("output_dir", "runs")),
                feature_options=raw.get("features", {}),
                equal_mix_counts=_parse_count_table(mix_raw.get("equal")),
                ratio_mix_counts=_parse_count_table(mix_raw.get("ratio")),
                ratio_mix_caps=mix_raw.get("ratio_caps"),
                sweep_batch=int(sweep_raw.get("batch_size_per_language", 200)),
                sweep_steps=int(sweep_raw.get("num_steps", 7)),
                sweep_modes=tuple(
                    RatioMode(m) for m in sweep_raw.get("ratio_modes",
                                                        ["equal", "base"])
                ),
                mlm_options=raw.get("mlm", {}),
                raw=raw,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid experiment config: {exc}") from exc

    def validate(self) -> None:
        if self.experiment not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind: {self.experiment!r}")
        if not self.corpora:
            raise ConfigError("no corpora configured")
        if self.base not in self.corpora:
            raise ConfigError(f"base corpus {self.base!r} is not configured")
        for donor in self.donors:
            if donor not in self.corpora:
                raise ConfigError(f"donor corpus {donor!r} is not configured")
        if self.experiment != "baseline_only" and not self.donors:
            raise ConfigError(f"{self.experiment} needs at least one donor")
        for name, ref in self.corpora.items():
            path = Path(ref["path"])
            if not path.exists():
                raise ConfigError(f"corpus {name!r}: file not found: {path}")
        if not self.models:
            raise ConfigError("no models configured")
        for model in self.models:
            if model.kind not in STATISTICAL_KINDS + ("mlm",):
                raise ConfigError(f"unknown model kind: {model.kind!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _parse_count_table(table: dict | None) -> dict[str, dict[Label, int]] | None:
    if table is None:
        return None
    parsed = {}
    for donor, counts in table.items():
        parsed[donor] = {
            _LABEL_KEYS[str(k).lower()]: int(v) for k, v in counts.items()
        }
    return parsed


# --- feature + model plumbing ----------------------------------------------

def _tokenize_corpus(corpus: Corpus, options: dict) -> list[list[str]]:
    lowercase = bool(options.get("lowercase", True))
    return [tokenize(s.text, lowercase=lowercase) for s in corpus.samples]


def _fit_space(train_docs, options: dict):
    return fit_feature_space(
        train_docs,
        ngram_orders=tuple(options.get("ngram_orders", (1, 2, 3))),
        min_doc_freq=int(options.get("min_doc_freq", 2)),
    )


def _train_and_predict(
    kind: str,
    params: dict,
    train_corpus: Corpus,
    train_docs,
    test_corpus: Corpus,
    test_docs,
    space,
    seed: int,
) -> list[tuple[str, Label, Label]]:
    y = [s.label for s in train_corpus.samples]
    num_features = space.size

    if kind == "nb":
        X = [vectorize(space, d, Weighting.COUNT) for d in train_docs]
        model = nb_train(X, y, num_features, alpha=float(params.get("alpha", 1.0)))
        predict = lambda v: nb_predict(model, v)[0]
        weighting = Weighting.COUNT
    elif kind == "svm":
        X = [vectorize(space, d, Weighting.L2_NORMALIZED_TF) for d in train_docs]
        model = svm_train(
            X, y, num_features,
            lam=float(params.get("lam", 1e-4)),
            epochs=int(params.get("epochs", 10)),
            seed=seed,
        )
        predict = lambda v: svm_predict(model, v)
        weighting = Weighting.L2_NORMALIZED_TF
    elif kind == "rf":
        X = [vectorize(space, d, Weighting.L2_NORMALIZED_TF) for d in train_docs]
        model = rf_train(
            X, y, num_features,
            num_trees=int(params.get("num_trees", 100)),
            max_features=params.get("max_features"),
            seed=seed,
        )
        predict = lambda v: rf_predict(model, v)
        weighting = Weighting.L2_NORMALIZED_TF
    else:
        raise ValueError(f"not a statistical model kind: {kind!r}")

    per_sample = []
    for sample, doc in zip(test_corpus.samples, test_docs):
        vec = vectorize(space, doc, weighting)
        per_sample.append((sample.id, sample.label, predict(vec)))
    return per_sample


def _select_params(
    model: ModelSpec,
    train_corpus: Corpus,
    train_docs,
    val_corpus: Corpus,
    val_docs,
    space,
    seed: int,
) -> dict:
    """Grid search on the validation split; highest F1 wins, first on ties."""
    if not model.grid:
        return model.params
    from .evaluate import score as _score

    keys = sorted(model.grid)
    best = None
    for combo in itertools.product(*(model.grid[k] for k in keys)):
        params = dict(model.params)
        params.update(dict(zip(keys, combo)))
        per_sample = _train_and_predict(
            model.kind, params, train_corpus, train_docs,
            val_corpus, val_docs, space, seed,
        )
        f1 = _score([g for _, g, _ in per_sample],
                    [p for _, _, p in per_sample]).f1
        if best is None or f1 > best[0]:
            best = (f1, params)
    return best[1]


# --- training set construction ---------------------------------------------

def _build_training_sets(
    config: ExperimentConfig,
    base_train: Corpus,
    donors: dict[str, Corpus],
) -> list[tuple[str, Corpus]]:
    donor_list = [donors[name] for name in config.donors]

    if config.experiment == "baseline_only":
        return [(BASELINE_SET, base_train)]

    if config.experiment == "native_mix":
        sets = [(BASELINE_SET, base_train)]
        sets.append(("mix-equal", _build_equal_mix(config, base_train, donors)))
        sets.append(("mix-ratio", _build_ratio_mix(config, base_train, donors)))
        return sets

    if config.experiment == "batch_sweep":
        sets = []
        for mode in config.sweep_modes:
            plan = SweepPlan(
                base=base_train,
                batch_size_per_language=config.sweep_batch,
                num_steps=config.sweep_steps,
                ratio_mode=mode,
                seed=config.mix_seed,
            )
            for k, step in enumerate(build_sweep(plan, donor_list), start=1):
                sets.append((f"sweep-{mode.value}-{k * config.sweep_batch}", step))
        return sets

    if config.experiment == "native_only":
        sets = []
        for name in config.donors:
            sets.append((
                f"native-{name}",
                build_native_only([donors[name]], config.mix_seed,
                                  name=f"native-{name}"),
            ))
        if len(config.donors) > 1:
            sets.append((
                "native-" + "+".join(config.donors),
                build_native_only(donor_list, config.mix_seed,
                                  name="native-" + "+".join(config.donors)),
            ))
        return sets

    raise ConfigError(f"unknown experiment kind: {config.experiment!r}")


def _equal_counts(donors: dict[str, Corpus], names: list[str]) -> dict[str, dict[Label, int]]:
    # one shared amount per label, set by the scarcest donor stratum
    m = min(
        min(donors[n].counts[Label.HATE], donors[n].counts[Label.NON_HATE])
        for n in names
    )
    return {n: {Label.HATE: m, Label.NON_HATE: m} for n in names}


def _build_equal_mix(config, base_train, donors) -> Corpus:
    counts = config.equal_mix_counts or _equal_counts(donors, config.donors)
    additions = tuple(
        (donors[name], counts[name]) for name in config.donors
    )
    return build_mix(MixPlan(base=base_train, additions=additions,
                             seed=config.mix_seed, name="mix-equal"))


def _build_ratio_mix(config, base_train, donors) -> Corpus:
    if config.ratio_mix_counts:
        counts = config.ratio_mix_counts
    else:
        caps = config.ratio_mix_caps or {
            name: donors[name].counts[Label.NON_HATE] for name in config.donors
        }
        counts = {
            name: derive_proportional_counts(base_train, donors[name],
                                             int(caps[name]))
            for name in config.donors
        }
    additions = tuple(
        (donors[name], counts[name]) for name in config.donors
    )
    return build_mix(MixPlan(base=base_train, additions=additions,
                             seed=config.mix_seed, name="mix-ratio"))


# --- run --------------------------------------------------------------------

@dataclass
class RunResult:
    run_dir: Path
    reports: list[RunReport]
    cells: list[CellSummary]
    training_set_names: list[str] = field(default_factory=list)


def _set_manifest(name: str, corpus: Corpus, config: ExperimentConfig) -> dict:
    return {
        "training_set": name,
        "seed": config.mix_seed,
        "prng": PRNG_NAME,
        "counts": {label.value: count for label, count in corpus.counts.items()},
        "size": len(corpus),
    }


def run(config: ExperimentConfig, run_dir_name: str | None = None) -> RunResult:
    config.validate()

    run_hash = config.config_hash()
    if run_dir_name is None:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        run_dir_name = f"{stamp}-{run_hash[:12]}"
    run_dir = config.output_dir / run_dir_name
    run_dir.mkdir(parents=True, exist_ok=True)

    manifest = {
        "toolkit_version": __version__,
        "config_hash": run_hash,
        "prng": PRNG_NAME,
        "seeds": config.seeds,
        "experiment": config.experiment,
        "config": config.raw,
        "status": "running",
    }
    _write_manifest(run_dir, manifest)

    try:
        result = _run_inner(config, run_dir)
    except Exception as exc:
        manifest["status"] = "failed"
        manifest["error"] = str(exc)
        _write_manifest(run_dir, manifest)
        raise

    manifest["status"] = "complete"
    manifest["training_sets"] = result.training_set_names
    _write_manifest(run_dir, manifest)
    return result


def _write_manifest(run_dir: Path, manifest: dict) -> None:
    (run_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, default=str), encoding="utf-8")


def _corpus_aliases(ref: dict) -> dict[str, Label] | None:
    """Per-corpus label remapping, e.g. {"HOF": "hate", "NOT": "non-hate"}."""
    table = ref.get("labels")
    if not table:
        return None
    aliases = dict(DEFAULT_LABEL_ALIASES)
    for raw, canonical in table.items():
        aliases[str(raw).strip().lower()] = _LABEL_KEYS[str(canonical).lower()]
    return aliases


def _run_inner(config: ExperimentConfig, run_dir: Path) -> RunResult:
    corpora = {
        name: load_corpus(ref["path"], format=ref.get("format", "jsonl"),
                          source=ref.get("source", name), name=name,
                          label_aliases=_corpus_aliases(ref))
        for name, ref in config.corpora.items()
    }
    base = corpora[config.base]
    donors = {name: corpora[name] for name in config.donors}

    train_split, val_split, test_split = stratified_split(
        base, config.split, config.split_seed)
    splits_dir = run_dir / "splits"
    for part in (train_split, val_split, test_split):
        save_corpus(part, splits_dir / f"{part.name}.jsonl")

    training_sets = _build_training_sets(config, train_split, donors)

    sets_dir = run_dir / "training_sets"
    test_ids = test_split.ids
    val_ids = val_split.ids
    for name, corpus in training_sets:
        leaked = (corpus.ids & test_ids) | (corpus.ids & val_ids)
        if leaked:
            raise RuntimeError(
                f"training set {name!r} contains held-out sample ids: "
                f"{sorted(leaked)[:5]}...")
        save_corpus(corpus, sets_dir / f"{name}.jsonl")
        (sets_dir / f"{name}.manifest.json").write_text(
            json.dumps(_set_manifest(name, corpus, config), indent=2),
            encoding="utf-8")

    feature_opts = config.feature_options
    val_docs = _tokenize_corpus(val_split, feature_opts)
    test_docs = _tokenize_corpus(test_split, feature_opts)

    reports: list[RunReport] = []
    for set_name, train_corpus in training_sets:
        train_docs = _tokenize_corpus(train_corpus, feature_opts)
        space = None
        for model in config.models:
            if model.kind == "mlm":
                _emit_mlm_jobs(config, run_dir, set_name, model,
                               sets_dir / f"{set_name}.jsonl",
                               splits_dir / f"{val_split.name}.jsonl",
                               splits_dir / f"{test_split.name}.jsonl")
                continue
            if space is None:
                space = _fit_space(train_docs, feature_opts)
            params = _select_params(model, train_corpus, train_docs,
                                    val_split, val_docs, space,
                                    config.seeds[0])
            for seed in config.seeds:
                cell_dir = run_dir / "cells" / set_name / model.name / f"seed-{seed}"
                try:
                    per_sample = _train_and_predict(
                        model.kind, params, train_corpus, train_docs,
                        test_split, test_docs, space, seed)
                except Exception as exc:
                    raise RuntimeError(
                        f"cell {set_name}/{model.name}/seed-{seed} failed: {exc}"
                    ) from exc
                report = RunReport.from_predictions(
                    model.name, set_name, seed, per_sample)
                reports.append(report)
                write_predictions(cell_dir / "predictions.jsonl", per_sample)
                (cell_dir / "report.json").write_text(json.dumps({
                    "model": model.name,
                    "train_set": set_name,
                    "seed": seed,
                    "params": params,
                    "metrics": report.metrics._asdict(),
                }, indent=2), encoding="utf-8")

    _write_results_csv(run_dir / "results.csv", reports)
    cells = _summarize(reports)
    if cells:
        significance = _significance(cells)
        summary_csv, table_text = render_report(
            cells, significance, baseline_set=BASELINE_SET)
        (run_dir / "summary.csv").write_text(summary_csv, encoding="utf-8")
        (run_dir / "table.txt").write_text(table_text, encoding="utf-8")
    if config.experiment == "batch_sweep" and cells:
        (run_dir / "sweep.csv").write_text(
            _sweep_csv(config, cells), encoding="utf-8")

    return RunResult(run_dir=run_dir, reports=reports, cells=cells,
                     training_set_names=[name for name, _ in training_sets])


def _emit_mlm_jobs(config, run_dir, set_name, model, train_path, val_path,
                   test_path) -> None:
    """Delegated cells: write one job descriptor per seed for the external
    fine-tuning harness; its predictions.jsonl is scored by `evaluate`."""
    defaults = {
        "model_id": "mbert",
        "head": "linear_on_cls",
        "learning_rate": 2e-5,
        "scheduler_decay": 0.9,
        "max_epochs": 25,
        "patience": 4,
        "batch_size": 16,
    }
    defaults.update(config.mlm_options)
    for seed in config.seeds:
        cell_dir = run_dir / "cells" / set_name / model.name / f"seed-{seed}"
        cell_dir.mkdir(parents=True, exist_ok=True)
        job = dict(defaults)
        job.update(model.params)  # pass everything through, e.g. model_path
        job.update({
            "train_path": str(Path(train_path).resolve()),
            "val_path": str(Path(val_path).resolve()),
            "test_path": str(Path(test_path).resolve()),
            "seed": seed,
            "output_dir": str(cell_dir.resolve()),
        })
        (cell_dir / "job.json").write_text(json.dumps(job, indent=2),
                                           encoding="utf-8")


def _write_results_csv(path: Path, reports: list[RunReport]) -> None:
    lines = ["model,train_set,seed,acc,pre,rec,f1"]
    for r in reports:
        m = r.metrics
        lines.append(f"{r.model_name},{r.train_set_name},{r.seed},"
                     f"{m.acc!r},{m.pre!r},{m.rec!r},{m.f1!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _summarize(reports: list[RunReport]) -> list[CellSummary]:
    order = []
    groups: dict[tuple[str, str], list[RunReport]] = {}
    for report in reports:
        key = (report.train_set_name, report.model_name)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(report)
    return [summarize_cell(groups[key]) for key in order]


def _significance(cells: list[CellSummary]) -> dict[tuple[str, str], float]:
    """Welch p-values of each cell's per-seed F1s against the same model's
    baseline-set F1s. Cells without a baseline or with degenerate variance
    are omitted."""
    baseline = {
        c.model_name: [r.metrics.f1 for r in c.reports]
        for c in cells if c.train_set_name == BASELINE_SET
    }
    out = {}
    for cell in cells:
        if cell.train_set_name == BASELINE_SET:
            continue
        base_f1s = baseline.get(cell.model_name)
        f1s = [r.metrics.f1 for r in cell.reports]
        if base_f1s is None or len(base_f1s) < 2 or len(f1s) < 2:
            continue
        try:
            result = welch_t_test(f1s, base_f1s)
        except DegenerateVariance:
            continue
        out[(cell.model_name, cell.train_set_name)] = result.p
    return out


def _sweep_csv(config: ExperimentConfig, cells: list[CellSummary]) -> str:
    """Table with one row per (model, ratio, metric) and one column per
    per-language sample amount, averaged across seeds."""
    sizes = [k * config.sweep_batch for k in range(1, config.sweep_steps + 1)]
    header = "model,ratio,metric," + ",".join(str(s) for s in sizes)
    lines = [header]
    grid = {(c.model_name, c.train_set_name): c for c in cells}
    model_names = [m.name for m in config.models if m.kind != "mlm"]
    for model_name in model_names:
        for mode in config.sweep_modes:
            for metric in ("acc", "f1", "pre", "rec"):
                row = [model_name, mode.value, metric]
                for size in sizes:
                    cell = grid.get((model_name, f"sweep-{mode.value}-{size}"))
                    if cell is None:
                        row.append("")
                    else:
                        row.append(repr(getattr(cell.mean_metrics(), metric)))
                lines.append(",".join(row))
    return "\n".join(lines) + "\n"
