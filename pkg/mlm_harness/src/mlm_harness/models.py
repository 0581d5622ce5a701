"""Classifier construction on top of pretrained multilingual encoders.

Two head variants:
- linear_on_cls: a linear layer over the first-position embedding.
- four_transformer_layers: four extra transformer layers (8 heads,
  feed-forward 4x the hidden width) before the linear layer.

In both variants every backbone parameter is frozen except the last two
encoder layers; the head (and the extra stack) always trains.
"""

from __future__ import annotations

import hashlib

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer

from .job import MLMJob

NUM_LABELS = 2
TRAINABLE_ENCODER_LAYERS = 2


class SequenceClassifier(nn.Module):
    def __init__(self, backbone: nn.Module, head: str):
        super().__init__()
        hidden = backbone.config.hidden_size
        self.backbone = backbone
        self.head_kind = head
        if head == "four_transformer_layers":
            layer = nn.TransformerEncoderLayer(
                d_model=hidden, nhead=8, dim_feedforward=4 * hidden,
                batch_first=True)
            self.stack = nn.TransformerEncoder(layer, num_layers=4)
        else:
            self.stack = None
        self.classifier = nn.Linear(hidden, NUM_LABELS)

    def forward(self, input_ids, attention_mask, **_):
        out = self.backbone(input_ids=input_ids, attention_mask=attention_mask)
        hidden = out.last_hidden_state
        if self.stack is not None:
            hidden = self.stack(
                hidden, src_key_padding_mask=attention_mask == 0)
        return self.classifier(hidden[:, 0])


def load_backbone(job: MLMJob):
    """Tokenizer plus encoder weights; surfaces download failures as-is."""
    ref = job.pretrained_ref()
    try:
        tokenizer = AutoTokenizer.from_pretrained(ref)
        backbone = AutoModel.from_pretrained(ref, attn_implementation="eager")
    except OSError as exc:
        raise RuntimeError(
            f"could not obtain pretrained weights for {ref!r}; pass "
            f"model_path pointing at a local checkpoint if offline: {exc}"
        ) from exc
    return tokenizer, backbone


def build_model(job: MLMJob, backbone) -> SequenceClassifier:
    return SequenceClassifier(backbone, job.head)


def _encoder_layer_prefixes(backbone) -> list[str]:
    """Parameter-name prefixes of the encoder layers, in depth order.

    Handles the two layouts used by the supported models: BERT/RoBERTa
    style (encoder.layer ModuleList) and XLM style (per-component
    ModuleLists indexed by layer).
    """
    if hasattr(backbone, "encoder") and hasattr(backbone.encoder, "layer"):
        n = len(backbone.encoder.layer)
        return [f"encoder.layer.{i}." for i in range(n)]
    if hasattr(backbone, "attentions"):
        n = len(backbone.attentions)
        return [f"__xlm_layer_{i}" for i in range(n)]
    raise RuntimeError(
        f"cannot locate encoder layers in {type(backbone).__name__}")


def _xlm_layer_index(name: str) -> int | None:
    for component in ("attentions.", "layer_norm1.", "ffns.", "layer_norm2."):
        if name.startswith(component):
            return int(name[len(component):].split(".", 1)[0])
    return None


def apply_freezing(model: SequenceClassifier) -> tuple[list[str], list[str]]:
    """Freeze the backbone except its last two encoder layers.

    Returns (trainable, frozen) parameter names relative to the full model.
    """
    backbone = model.backbone
    prefixes = _encoder_layer_prefixes(backbone)
    wanted = prefixes[-TRAINABLE_ENCODER_LAYERS:]
    xlm_style = wanted and wanted[0].startswith("__xlm_layer_")
    if xlm_style:
        wanted_indices = {int(p.rsplit("_", 1)[1]) for p in wanted}

    for name, param in backbone.named_parameters():
        if xlm_style:
            idx = _xlm_layer_index(name)
            param.requires_grad = idx is not None and idx in wanted_indices
        else:
            param.requires_grad = any(name.startswith(p) for p in wanted)

    trainable, frozen = [], []
    for name, param in model.named_parameters():
        (trainable if param.requires_grad else frozen).append(name)
    return trainable, frozen


def tensor_hashes(model: nn.Module, names: list[str]) -> dict[str, str]:
    params = dict(model.named_parameters())
    out = {}
    for name in names:
        data = params[name].detach().cpu().contiguous().numpy().tobytes()
        out[name] = hashlib.sha256(data).hexdigest()
    return out
