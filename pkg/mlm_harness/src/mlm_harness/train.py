"""Fine-tuning loop: AdamW with per-epoch exponential decay, early
stopping on validation F1, best-checkpoint test predictions."""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from . import __version__
from .data import INT_TO_LABEL, make_loader, read_examples
from .job import MLMJob
from .models import apply_freezing, build_model, load_backbone, tensor_hashes


def set_seed(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def binary_f1(gold: list[int], pred: list[int]) -> float:
    tp = sum(1 for g, p in zip(gold, pred) if g == 1 and p == 1)
    fp = sum(1 for g, p in zip(gold, pred) if g == 0 and p == 1)
    fn = sum(1 for g, p in zip(gold, pred) if g == 1 and p == 0)
    if tp == 0:
        return 0.0
    pre = tp / (tp + fp)
    rec = tp / (tp + fn)
    return 2 * pre * rec / (pre + rec)


@dataclass
class FinetuneResult:
    best_epoch: int
    best_val_f1: float
    test_f1: float
    train_losses: list[float] = field(default_factory=list)
    val_f1s: list[float] = field(default_factory=list)
    stopped_early: bool = False
    frozen_hashes_unchanged: bool = True


def _run_epoch(model, loader, optimizer, criterion, device) -> float:
    model.train()
    total = 0.0
    count = 0
    for batch in loader:
        optimizer.zero_grad()
        logits = model(batch["input_ids"].to(device),
                       batch["attention_mask"].to(device))
        loss = criterion(logits, batch["labels"].to(device))
        loss.backward()
        optimizer.step()
        total += loss.item() * len(batch["labels"])
        count += len(batch["labels"])
    return total / count


@torch.no_grad()
def _predict(model, loader, device):
    model.eval()
    ids, gold, pred = [], [], []
    for batch in loader:
        logits = model(batch["input_ids"].to(device),
                       batch["attention_mask"].to(device))
        pred.extend(logits.argmax(dim=1).cpu().tolist())
        gold.extend(batch["labels"].tolist())
        ids.extend(batch["ids"])
    return ids, gold, pred


def finetune(job: MLMJob, device: str | None = None) -> FinetuneResult:
    """Train per the job descriptor and write predictions.jsonl,
    checkpoint.pt, and manifest.json into the job's output directory."""
    job.validate()
    device = device or ("cuda" if torch.cuda.is_available() else "cpu")
    set_seed(job.seed)

    tokenizer, backbone = load_backbone(job)
    model = build_model(job, backbone).to(device)
    trainable, frozen = apply_freezing(model)
    hashes_before = tensor_hashes(model, frozen)

    train_loader = make_loader(read_examples(job.train_path), tokenizer,
                               job.batch_size, job.max_length,
                               shuffle=True, seed=job.seed)
    val_loader = make_loader(read_examples(job.val_path), tokenizer,
                             job.batch_size, job.max_length)
    test_loader = make_loader(read_examples(job.test_path), tokenizer,
                              job.batch_size, job.max_length)

    optimizer = torch.optim.AdamW(
        (p for p in model.parameters() if p.requires_grad),
        lr=job.learning_rate)
    scheduler = torch.optim.lr_scheduler.ExponentialLR(
        optimizer, gamma=job.scheduler_decay)
    criterion = nn.CrossEntropyLoss()

    best_state = copy.deepcopy(model.state_dict())
    best_val_f1 = -1.0
    best_epoch = 0
    epochs_without_improvement = 0
    train_losses: list[float] = []
    val_f1s: list[float] = []
    stopped_early = False

    for epoch in range(1, job.max_epochs + 1):
        train_losses.append(
            _run_epoch(model, train_loader, optimizer, criterion, device))
        scheduler.step()
        _, gold, pred = _predict(model, val_loader, device)
        val_f1 = binary_f1(gold, pred)
        val_f1s.append(val_f1)
        if val_f1 > best_val_f1:
            best_val_f1 = val_f1
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if epochs_without_improvement >= job.patience:
                stopped_early = True
                break

    model.load_state_dict(best_state)
    hashes_after = tensor_hashes(model, frozen)
    frozen_ok = hashes_before == hashes_after

    ids, gold, pred = _predict(model, test_loader, device)
    test_f1 = binary_f1(gold, pred)

    out = job.output_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for sample_id, g, p in zip(ids, gold, pred):
            fh.write(json.dumps({"id": sample_id,
                                 "gold": INT_TO_LABEL[g],
                                 "pred": INT_TO_LABEL[p]}) + "\n")

    torch.save({"state_dict": best_state, "job": job.to_dict()},
               out / "checkpoint.pt")

    result = FinetuneResult(
        best_epoch=best_epoch,
        best_val_f1=best_val_f1,
        test_f1=test_f1,
        train_losses=train_losses,
        val_f1s=val_f1s,
        stopped_early=stopped_early,
        frozen_hashes_unchanged=frozen_ok,
    )
    manifest = {
        "harness_version": __version__,
        "torch_version": torch.__version__,
        "device": device,
        "job": job.to_dict(),
        "trainable_parameters": trainable,
        "frozen_parameter_count": len(frozen),
        "frozen_hashes_unchanged": frozen_ok,
        "best_epoch": best_epoch,
        "best_val_f1": best_val_f1,
        "test_f1": test_f1,
        "train_losses": train_losses,
        "val_f1s": val_f1s,
        "stopped_early": stopped_early,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2),
                                       encoding="utf-8")
    if not frozen_ok:
        raise RuntimeError("frozen parameters changed during fine-tuning")
    return result


def load_checkpoint(path, device: str = "cpu"):
    """Rebuild a trained classifier (model, tokenizer, job) from checkpoint.pt."""
    payload = torch.load(path, map_location=device, weights_only=False)
    job = MLMJob.from_dict(payload["job"])
    tokenizer, backbone = load_backbone(job)
    model = build_model(job, backbone)
    model.load_state_dict(payload["state_dict"])
    model.to(device).eval()
    return model, tokenizer, job
