"""Command-line entry points.

``nativemix run`` drives a whole experiment from a config file; the other
subcommands expose the individual pipeline stages. Exit codes: 0 success,
1 validation/config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import yaml

from .classifiers import (
    load_model, nb_predict, nb_train, rf_predict, rf_train, save_model,
    svm_predict, svm_train,
)
from .cm_metrics import burstiness, cmi, corpus_complexity, profile
from .corpus import Label, label_distribution, load_corpus, save_corpus
from .errors import ConfigError, DegenerateVariance, NativemixError
from .evaluate import (
    read_predictions, render_report, score, summarize_cell, welch_t_test,
    write_predictions, RunReport, Metrics,
)
from .features import (
    Weighting, fit_feature_space, load_feature_space, save_feature_space,
    tokenize, vectorize,
)
from .mixer import MixPlan, SplitSpec, build_mix, stratified_split
from .runner import BASELINE_SET, ExperimentConfig, run as run_experiment


def _add_corpus_args(parser, prefix="--input"):
    parser.add_argument(prefix, required=True, help="corpus file")
    parser.add_argument("--format", default="jsonl", choices=["jsonl", "csv"])
    parser.add_argument("--source", default="other")


def _load(args, attr="input"):
    return load_corpus(getattr(args, attr), format=args.format,
                       source=args.source)


def _apply_override(raw: dict, spec: str) -> None:
    key_path, _, value = spec.partition("=")
    if not value:
        raise ConfigError(f"override must look like key.path=value: {spec!r}")
    node = raw
    keys = key_path.split(".")
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = yaml.safe_load(value)


def cmd_run(args) -> int:
    raw = yaml.safe_load(Path(args.config).read_text(encoding="utf-8"))
    for spec in args.set or []:
        _apply_override(raw, spec)
    config = ExperimentConfig.from_dict(raw)
    if args.output_dir:
        config.output_dir = Path(args.output_dir)
    result = run_experiment(config, run_dir_name=args.run_dir_name)
    print(f"run complete: {result.run_dir}")
    print(f"  {len(result.reports)} run reports over "
          f"{len(result.training_set_names)} training sets")
    return 0


def cmd_split(args) -> int:
    corpus = _load(args)
    spec = SplitSpec(args.train, args.val, args.test)
    train, val, test = stratified_split(corpus, spec, args.seed)
    outdir = Path(args.outdir)
    for part in (train, val, test):
        save_corpus(part, outdir / f"{part.name}.jsonl")
        dist = label_distribution(part)
        desc = ", ".join(f"{label.value}: {count} ({frac:.3f})"
                         for label, (count, frac) in dist.items())
        print(f"{part.name}: {desc}")
    return 0


def cmd_mix(args) -> int:
    plan_raw = yaml.safe_load(Path(args.plan).read_text(encoding="utf-8"))
    base_ref = plan_raw["base"]
    base = load_corpus(base_ref["path"], format=base_ref.get("format", "jsonl"),
                       source=base_ref.get("source", "codemixed"))
    additions = []
    for item in plan_raw.get("additions", []):
        ref = item["corpus"]
        donor = load_corpus(ref["path"], format=ref.get("format", "jsonl"),
                            source=ref.get("source", "other"))
        counts = {Label.HATE: int(item["counts"]["hate"]),
                  Label.NON_HATE: int(item["counts"]["non-hate"])}
        additions.append((donor, counts))
    seed = args.seed if args.seed is not None else int(plan_raw.get("seed", 0))
    plan = MixPlan(base=base, additions=tuple(additions), seed=seed,
                   name=plan_raw.get("name", ""))
    mixed = build_mix(plan)
    out = Path(args.out)
    save_corpus(mixed, out)
    manifest = {
        "plan": plan_raw,
        "seed": seed,
        "counts": {label.value: count for label, count in mixed.counts.items()},
        "size": len(mixed),
    }
    out.with_suffix(".manifest.json").write_text(
        json.dumps(manifest, indent=2), encoding="utf-8")
    print(f"wrote {len(mixed)} samples to {out}")
    return 0


def cmd_cmi(args) -> int:
    corpus = _load(args)
    rows = []
    for sample in corpus.samples:
        row = {"id": sample.id, "cmi": "", "burstiness": ""}
        if sample.lang_tags:
            p = profile(sample.lang_tags)
            row["cmi"] = f"{cmi(p):.2f}"
            if p.spans:
                row["burstiness"] = f"{burstiness(p):.4f}"
        rows.append(row)

    # per-sample CSV goes to the given path, or stdout when none is given
    def emit(fh):
        writer = csv.DictWriter(fh, fieldnames=["id", "cmi", "burstiness"])
        writer.writeheader()
        writer.writerows(rows)

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
    else:
        emit(sys.stdout)

    summary = corpus_complexity(corpus)
    payload = {
        "samples": len(corpus),
        "avg_cmi": summary.avg_cmi,
        "avg_burstiness": summary.avg_burstiness,
        "skipped": summary.skipped,
    }
    if args.summary:
        Path(args.summary).write_text(json.dumps(payload, indent=2),
                                      encoding="utf-8")
    print(f"avg CMI {summary.avg_cmi:.2f}, avg burstiness "
          f"{summary.avg_burstiness:.4f} ({summary.skipped} skipped)")
    return 0


def cmd_train(args) -> int:
    corpus = load_corpus(args.train, format=args.format, source=args.source)
    docs = [tokenize(s.text, lowercase=not args.no_lowercase)
            for s in corpus.samples]
    space = fit_feature_space(docs, ngram_orders=tuple(args.ngram_orders),
                              min_doc_freq=args.min_df)
    y = [s.label for s in corpus.samples]

    if args.model_kind == "nb":
        X = [vectorize(space, d, Weighting.COUNT) for d in docs]
        model = nb_train(X, y, space.size, alpha=args.alpha)
    elif args.model_kind == "svm":
        X = [vectorize(space, d, Weighting.L2_NORMALIZED_TF) for d in docs]
        model = svm_train(X, y, space.size, lam=args.lam,
                          epochs=args.epochs, seed=args.seed)
    else:
        X = [vectorize(space, d, Weighting.L2_NORMALIZED_TF) for d in docs]
        model = rf_train(X, y, space.size, num_trees=args.num_trees,
                         seed=args.seed)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    save_model(model, outdir / "model.json")
    save_feature_space(space, outdir / "features.json")
    meta = {"kind": args.model_kind, "lowercase": not args.no_lowercase}
    (outdir / "meta.json").write_text(json.dumps(meta), encoding="utf-8")
    print(f"trained {args.model_kind} on {len(corpus)} samples, "
          f"|V|={space.size} -> {outdir}")
    return 0


def cmd_predict(args) -> int:
    model_dir = Path(args.model)
    meta = json.loads((model_dir / "meta.json").read_text(encoding="utf-8"))
    model = load_model(model_dir / "model.json")
    space = load_feature_space(model_dir / "features.json")
    corpus = _load(args)

    kind = meta["kind"]
    weighting = Weighting.COUNT if kind == "nb" else Weighting.L2_NORMALIZED_TF
    predictors = {"nb": lambda v: nb_predict(model, v)[0],
                  "svm": lambda v: svm_predict(model, v),
                  "rf": lambda v: rf_predict(model, v)}
    predict = predictors[kind]

    per_sample = []
    for sample in corpus.samples:
        doc = tokenize(sample.text, lowercase=meta.get("lowercase", True))
        vec = vectorize(space, doc, weighting)
        per_sample.append((sample.id, sample.label, predict(vec)))
    write_predictions(args.out, per_sample)
    print(f"wrote {len(per_sample)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    per_sample = read_predictions(args.predictions)
    result = score([g for _, g, _ in per_sample], [p for _, _, p in per_sample])
    payload = {
        "n": len(per_sample),
        "confusion": {"tp": result.cm.tp, "fp": result.cm.fp,
                      "fn": result.cm.fn, "tn": result.cm.tn},
        "acc": result.acc, "pre": result.pre,
        "rec": result.rec, "f1": result.f1,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2),
                                  encoding="utf-8")
    print(f"acc {result.acc:.4f}  pre {result.pre:.4f}  "
          f"rec {result.rec:.4f}  f1 {result.f1:.4f}")
    return 0


def cmd_report(args) -> int:
    results_path = Path(args.results) / "results.csv"
    if not results_path.exists():
        raise ConfigError(f"no results.csv under {args.results}")
    rows = list(csv.DictReader(results_path.open(encoding="utf-8")))
    if not rows:
        raise ConfigError("results.csv is empty")

    groups: dict[tuple[str, str], list[RunReport]] = {}
    order = []
    for row in rows:
        key = (row["train_set"], row["model"])
        metrics = Metrics(float(row["acc"]), float(row["pre"]),
                          float(row["rec"]), float(row["f1"]))
        report = RunReport(model_name=row["model"],
                           train_set_name=row["train_set"],
                           seed=int(row["seed"]), metrics=metrics,
                           per_sample=())
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(report)
    cells = [summarize_cell(groups[key]) for key in order]

    baseline = {c.model_name: [r.metrics.f1 for r in c.reports]
                for c in cells if c.train_set_name == args.baseline}
    significance = {}
    for cell in cells:
        base_f1s = baseline.get(cell.model_name)
        if cell.train_set_name == args.baseline or not base_f1s:
            continue
        f1s = [r.metrics.f1 for r in cell.reports]
        if len(f1s) < 2 or len(base_f1s) < 2:
            continue
        try:
            significance[(cell.model_name, cell.train_set_name)] = \
                welch_t_test(f1s, base_f1s).p
        except DegenerateVariance:
            continue

    summary_csv, table_text = render_report(cells, significance,
                                            baseline_set=args.baseline)
    outdir = Path(args.results)
    (outdir / "summary.csv").write_text(summary_csv, encoding="utf-8")
    (outdir / "table.txt").write_text(table_text, encoding="utf-8")
    print(table_text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nativemix",
        description="Native-sample mixing experiments for code-mixed hate detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY.PATH=VALUE",
                   help="override a config scalar, e.g. --set split.seed=19")
    p.add_argument("--output-dir", default=None,
                   help="override the config's output directory")
    p.add_argument("--run-dir-name", default=None,
                   help="fixed run directory name (default: timestamp-hash)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("split", help="stratified train/val/test split")
    _add_corpus_args(p)
    p.add_argument("--train", type=float, default=0.7)
    p.add_argument("--val", type=float, default=0.15)
    p.add_argument("--test", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("mix", help="build a mixed training set from a plan file")
    p.add_argument("--plan", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the plan's seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("cmi", help="code-mixing metrics for a tagged corpus")
    _add_corpus_args(p)
    p.add_argument("--csv", default=None, help="per-sample metrics CSV")
    p.add_argument("--summary", default=None, help="aggregate JSON summary")
    p.set_defaults(func=cmd_cmi)

    p = sub.add_parser("train", help="train one statistical model")
    p.add_argument("--train", required=True, help="training corpus file")
    p.add_argument("--format", default="jsonl", choices=["jsonl", "csv"])
    p.add_argument("--source", default="other")
    p.add_argument("--model-kind", required=True, choices=["nb", "svm", "rf"])
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--ngram-orders", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--num-trees", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("--model", required=True, help="model directory")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, help="predictions.jsonl path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a predictions.jsonl file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", default=None, help="metrics JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="summary table from a run directory")
    p.add_argument("--results", required=True, help="run directory")
    p.add_argument("--baseline", default=BASELINE_SET)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NativemixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surface anything else as runtime
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
