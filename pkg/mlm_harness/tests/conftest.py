import json

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer

VOCAB_WORDS = [f"w{i}" for i in range(30)]
HATE_CUES = ["w27", "w28", "w29"]
NEUTRAL_CUES = ["w24", "w25", "w26"]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized BERT saved to disk, standing in for a
    hub checkpoint so tests never need network access."""
    d = tmp_path_factory.mktemp("tiny-bert")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + VOCAB_WORDS
    (d / "vocab.txt").write_text("\n".join(vocab))
    tokenizer = BertTokenizer(str(d / "vocab.txt"))
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=4,
        num_attention_heads=8,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(0)
    BertModel(config).save_pretrained(d)
    tokenizer.save_pretrained(d)
    return d


def _write_dataset(path, n_hate, n_nonhate, offset=0):
    rng = torch.Generator().manual_seed(1234 + offset)

    def words(n):
        idx = torch.randint(0, 24, (n,), generator=rng).tolist()
        return [VOCAB_WORDS[i] for i in idx]

    with open(path, "w", encoding="utf-8") as fh:
        i = 0
        for label, cues, count in (("hate", HATE_CUES, n_hate),
                                   ("non-hate", NEUTRAL_CUES, n_nonhate)):
            for _ in range(count):
                cue = cues[int(torch.randint(0, len(cues), (1,),
                                             generator=rng))]
                text = " ".join(words(5) + [cue] + words(2))
                fh.write(json.dumps({"id": f"{path.stem}-{i}", "text": text,
                                     "label": label}) + "\n")
                i += 1


@pytest.fixture(scope="session")
def dataset_paths(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    train = d / "train.jsonl"
    val = d / "val.jsonl"
    test = d / "test.jsonl"
    _write_dataset(train, 16, 16)
    _write_dataset(val, 6, 6, offset=1)
    _write_dataset(test, 6, 6, offset=2)
    return {"train": train, "val": val, "test": test}
