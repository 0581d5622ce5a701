"""JSONL dataset loading and batching.

Consumes the runner's canonical corpus JSONL ({id, text, label, ...});
label strings map to 1 for hate (the positive class) and 0 otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset

LABEL_TO_INT = {
    "hate": 1, "1": 1,
    "non-hate": 0, "non_hate": 0, "nonhate": 0, "0": 0,
}
INT_TO_LABEL = {1: "hate", 0: "non-hate"}


@dataclass
class TextExample:
    id: str
    text: str
    label: int


def read_examples(path: str | Path) -> list[TextExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            raw_label = str(record["label"]).strip().lower()
            if raw_label not in LABEL_TO_INT:
                raise ValueError(f"{path}:{line_no}: unknown label {raw_label!r}")
            examples.append(TextExample(
                id=str(record.get("id", line_no)),
                text=str(record["text"]),
                label=LABEL_TO_INT[raw_label],
            ))
    return examples


class ExampleDataset(Dataset):
    def __init__(self, examples: list[TextExample]):
        self.examples = examples

    def __len__(self):
        return len(self.examples)

    def __getitem__(self, idx):
        return self.examples[idx]


def make_loader(
    examples: list[TextExample],
    tokenizer,
    batch_size: int,
    max_length: int,
    shuffle: bool = False,
    seed: int = 0,
) -> DataLoader:
    def collate(batch):
        enc = tokenizer(
            [ex.text for ex in batch],
            padding=True,
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        )
        enc["labels"] = torch.tensor([ex.label for ex in batch])
        enc["ids"] = [ex.id for ex in batch]
        return enc

    generator = torch.Generator()
    generator.manual_seed(seed)
    return DataLoader(
        ExampleDataset(examples),
        batch_size=batch_size,
        shuffle=shuffle,
        generator=generator if shuffle else None,
        collate_fn=collate,
    )
