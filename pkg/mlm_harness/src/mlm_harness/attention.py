"""Attention score export: last-layer attention from the classification
position to each content token, head-averaged and renormalized, plus an
HTML heatmap that can juxtapose several trained variants per sample."""

from __future__ import annotations

import html
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import torch


@dataclass
class AttentionRecord:
    sample_id: str
    tokens: list[str]
    scores: list[float]  # one per token, sums to 1


@torch.no_grad()
def export_attention(model, tokenizer, samples, device="cpu",
                     max_length=128) -> list[AttentionRecord]:
    """samples: iterable of (id, text). Special tokens are dropped from the
    output and the remaining scores renormalized."""
    model.eval()
    records = []
    for sample_id, text in samples:
        enc = tokenizer(text, truncation=True, max_length=max_length,
                        return_tensors="pt")
        if enc["input_ids"].shape[1] >= max_length:
            warnings.warn(f"sample {sample_id}: truncated to {max_length} tokens")
        out = model.backbone(
            input_ids=enc["input_ids"].to(device),
            attention_mask=enc["attention_mask"].to(device),
            output_attentions=True,
        )
        # (heads, seq, seq) -> classification row, head-averaged
        last = out.attentions[-1][0]
        cls_row = last.mean(dim=0)[0]

        input_ids = enc["input_ids"][0].tolist()
        special = tokenizer.get_special_tokens_mask(
            input_ids, already_has_special_tokens=True)
        tokens, scores = [], []
        for idx, (token_id, is_special) in enumerate(zip(input_ids, special)):
            if is_special:
                continue
            tokens.append(tokenizer.convert_ids_to_tokens(token_id))
            scores.append(float(cls_row[idx]))
        total = sum(scores)
        if total > 0:
            scores = [s / total for s in scores]
        elif scores:
            scores = [1.0 / len(scores)] * len(scores)
        records.append(AttentionRecord(sample_id=str(sample_id),
                                       tokens=tokens, scores=scores))
    return records


def write_attention_jsonl(records: list[AttentionRecord],
                          path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps({"id": record.sample_id,
                                 "tokens": record.tokens,
                                 "scores": record.scores},
                                ensure_ascii=False) + "\n")


def render_heatmap(records_by_variant: dict[str, list[AttentionRecord]]) -> str:
    """One block per sample; within a block, one aligned row per variant
    with token backgrounds scaled by attention score."""
    variants = list(records_by_variant)
    by_sample: dict[str, dict[str, AttentionRecord]] = {}
    for variant, records in records_by_variant.items():
        for record in records:
            by_sample.setdefault(record.sample_id, {})[variant] = record

    parts = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'>",
        "<style>body{font-family:sans-serif} .tok{padding:2px 3px;margin:1px;"
        "border-radius:3px;display:inline-block} .variant{color:#555;"
        "display:inline-block;width:10em} .sample{margin-bottom:1em}</style>",
        "</head><body><h2>Attention scores</h2>",
    ]
    for sample_id, rows in by_sample.items():
        parts.append(f"<div class='sample'><b>{html.escape(sample_id)}</b><br>")
        for variant in variants:
            record = rows.get(variant)
            if record is None:
                continue
            peak = max(record.scores) if record.scores else 1.0
            spans = []
            for token, score in zip(record.tokens, record.scores):
                intensity = score / peak if peak > 0 else 0.0
                spans.append(
                    f"<span class='tok' style='background:rgba(220,53,53,"
                    f"{intensity:.3f})' title='{score:.4f}'>"
                    f"{html.escape(token)}</span>")
            parts.append(f"<span class='variant'>{html.escape(variant)}</span>"
                         + "".join(spans) + "<br>")
        parts.append("</div>")
    parts.append("</body></html>")
    return "\n".join(parts)
