"""Job descriptors: one JSON file fully describes a fine-tuning cell."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

MODEL_REGISTRY = {
    "mbert": "bert-base-multilingual-cased",
    "xlm": "xlm-mlm-100-1280",
    "xlm-r": "xlm-roberta-base",
}

HEADS = ("linear_on_cls", "four_transformer_layers")


class JobError(ValueError):
    pass


@dataclass
class MLMJob:
    model_id: str
    head: str
    train_path: Path
    val_path: Path
    test_path: Path
    learning_rate: float = 2e-5
    scheduler_decay: float = 0.9
    max_epochs: int = 25
    patience: int = 4
    batch_size: int = 16
    seed: int = 0
    output_dir: Path = field(default_factory=lambda: Path("."))
    model_path: str | None = None  # local pretrained dir, overrides the hub id
    max_length: int = 128
    attention_samples: int = 32

    def __post_init__(self):
        self.train_path = Path(self.train_path)
        self.val_path = Path(self.val_path)
        self.test_path = Path(self.test_path)
        self.output_dir = Path(self.output_dir)

    def validate(self) -> None:
        if self.model_id not in MODEL_REGISTRY:
            raise JobError(f"unknown model id {self.model_id!r}; "
                           f"known: {sorted(MODEL_REGISTRY)}")
        if self.head not in HEADS:
            raise JobError(f"unknown head {self.head!r}; known: {HEADS}")
        for path in (self.train_path, self.val_path, self.test_path):
            if not path.exists():
                raise JobError(f"dataset file not found: {path}")
        if self.patience >= self.max_epochs:
            raise JobError("patience must be smaller than max_epochs")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise JobError("batch_size and max_epochs must be positive")

    def pretrained_ref(self) -> str:
        return self.model_path or MODEL_REGISTRY[self.model_id]

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "head": self.head,
            "train_path": str(self.train_path),
            "val_path": str(self.val_path),
            "test_path": str(self.test_path),
            "learning_rate": self.learning_rate,
            "scheduler_decay": self.scheduler_decay,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "model_path": self.model_path,
            "max_length": self.max_length,
            "attention_samples": self.attention_samples,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MLMJob":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in raw.items() if k in known})

    @classmethod
    def from_file(cls, path: str | Path) -> "MLMJob":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(raw)
