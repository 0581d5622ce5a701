"""Harness entry points: run a fine-tuning job, or export attention
heatmaps from saved checkpoints."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import torch

from .attention import export_attention, render_heatmap, write_attention_jsonl
from .data import read_examples
from .job import JobError, MLMJob
from .train import finetune, load_checkpoint


def cmd_run(args) -> int:
    job = MLMJob.from_file(args.job)
    if args.output_dir:
        job.output_dir = Path(args.output_dir)
    result = finetune(job)
    print(f"best epoch {result.best_epoch} "
          f"(val F1 {result.best_val_f1:.4f}), test F1 {result.test_f1:.4f}"
          + (", stopped early" if result.stopped_early else ""))

    if job.attention_samples > 0:
        model, tokenizer, _ = load_checkpoint(job.output_dir / "checkpoint.pt")
        examples = read_examples(job.test_path)[: job.attention_samples]
        records = export_attention(
            model, tokenizer, [(ex.id, ex.text) for ex in examples],
            max_length=job.max_length)
        write_attention_jsonl(records, job.output_dir / "attention.jsonl")
        html = render_heatmap({job.model_id: records})
        (job.output_dir / "heatmap.html").write_text(html, encoding="utf-8")
        print(f"attention exported for {len(records)} samples")
    return 0


def cmd_attention(args) -> int:
    variants = {}
    tokenizer = None
    max_length = 128
    for spec in args.checkpoint:
        label, _, path = spec.partition("=")
        if not path:
            label, path = Path(spec).parent.name, spec
        model, tokenizer, job = load_checkpoint(path)
        max_length = job.max_length
        examples = read_examples(args.input)
        if args.limit:
            examples = examples[: args.limit]
        variants[label] = export_attention(
            model, tokenizer, [(ex.id, ex.text) for ex in examples],
            max_length=max_length)

    if args.out_jsonl:
        flat = [record for records in variants.values() for record in records]
        write_attention_jsonl(flat, args.out_jsonl)
    (Path(args.out_html)).write_text(render_heatmap(variants),
                                     encoding="utf-8")
    print(f"heatmap written to {args.out_html}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlm-harness",
        description="Fine-tune multilingual encoders on runner-emitted jobs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="fine-tune per a job descriptor")
    p.add_argument("--job", required=True, help="job.json path")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("attention",
                       help="export attention heatmaps from checkpoints")
    p.add_argument("--checkpoint", action="append", required=True,
                   metavar="LABEL=PATH",
                   help="checkpoint.pt path, repeatable for paired rows")
    p.add_argument("--input", required=True, help="samples JSONL")
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--out-html", required=True)
    p.add_argument("--out-jsonl", default=None)
    p.set_defaults(func=cmd_attention)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except JobError as exc:
        print(f"job error: {exc}", file=sys.stderr)
        return 1
    except torch.cuda.OutOfMemoryError as exc:
        print(f"out of memory: {exc}\nlower the job's batch_size and retry",
              file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
