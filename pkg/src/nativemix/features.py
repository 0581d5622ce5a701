"""Tokenization and word n-gram feature spaces for the statistical models."""

from __future__ import annotations

import json
import math
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import EmptyTrainingSet

URL_TOKEN = "<url>"
USER_TOKEN = "<user>"

_URL_RE = re.compile(r"^(https?://|www\.)", re.IGNORECASE)
_DEVANAGARI_RE = re.compile(r"[ऀ-ॿ]")


def _strip_punct(token: str) -> str:
    chars = list(token)
    while chars and unicodedata.category(chars[0])[0] == "P":
        chars.pop(0)
    while chars and unicodedata.category(chars[-1])[0] == "P":
        chars.pop()
    return "".join(chars)


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Whitespace tokens with light normalization.

    URLs collapse to ``<url>`` and @-mentions to ``<user>``; other tokens
    are case-folded (when ``lowercase``) and stripped of leading/trailing
    punctuation. Tokens containing Devanagari pass through untouched.
    Empty results are dropped.
    """
    tokens = []
    for raw in text.split():
        if _URL_RE.match(raw):
            tokens.append(URL_TOKEN)
            continue
        if raw.startswith("@") and len(raw) > 1:
            tokens.append(USER_TOKEN)
            continue
        if _DEVANAGARI_RE.search(raw):
            tokens.append(raw)
            continue
        token = _strip_punct(raw)
        if lowercase:
            token = token.lower()
        if token:
            tokens.append(token)
    return tokens


class Weighting(Enum):
    COUNT = "count"
    L2_NORMALIZED_TF = "l2-normalized-tf"


@dataclass(frozen=True)
class SparseVector:
    """Sorted sparse (index, value) pairs; indices strictly increasing, values > 0."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        prev = -1
        for idx, value in self.entries:
            if idx <= prev:
                raise ValueError("sparse indices must be strictly increasing")
            if value <= 0:
                raise ValueError("sparse values must be positive")
            prev = idx

    @classmethod
    def from_counts(cls, counts: dict[int, float]) -> "SparseVector":
        return cls(tuple(sorted(counts.items())))

    def norm(self) -> float:
        return math.sqrt(sum(v * v for _, v in self.entries))

    def __len__(self) -> int:
        return len(self.entries)


ZERO_VECTOR = SparseVector(())

NGRAM_JOINER = "_"


def extract_ngrams(tokens: list[str], orders) -> list[str]:
    grams = []
    for n in sorted(orders):
        for i in range(len(tokens) - n + 1):
            grams.append(NGRAM_JOINER.join(tokens[i:i + n]))
    return grams


@dataclass(frozen=True)
class FeatureSpace:
    """Vocabulary of word n-grams mapped to dense column indices.

    Indices follow first occurrence over the training documents, restricted
    to n-grams appearing in at least ``min_doc_freq`` documents.
    """

    ngram_orders: tuple[int, ...]
    vocabulary: dict[str, int]
    min_doc_freq: int
    doc_count: int

    @property
    def size(self) -> int:
        return len(self.vocabulary)


def fit_feature_space(
    docs: list[list[str]],
    ngram_orders=(1, 2, 3),
    min_doc_freq: int = 2,
) -> FeatureSpace:
    """Build the vocabulary from tokenized training documents."""
    if not any(docs):
        raise EmptyTrainingSet("feature fitting needs at least one non-empty document")
    orders = tuple(sorted(set(ngram_orders)))

    doc_freq: dict[str, int] = {}
    per_doc_grams = []
    for tokens in docs:
        grams = extract_ngrams(tokens, orders)
        per_doc_grams.append(grams)
        for gram in set(grams):
            doc_freq[gram] = doc_freq.get(gram, 0) + 1

    vocabulary: dict[str, int] = {}
    for grams in per_doc_grams:
        for gram in grams:
            if gram not in vocabulary and doc_freq[gram] >= min_doc_freq:
                vocabulary[gram] = len(vocabulary)

    return FeatureSpace(
        ngram_orders=orders,
        vocabulary=vocabulary,
        min_doc_freq=min_doc_freq,
        doc_count=len(docs),
    )


def vectorize(
    space: FeatureSpace,
    tokens: list[str],
    weighting: Weighting = Weighting.COUNT,
) -> SparseVector:
    """Map a tokenized document onto the feature space.

    Out-of-vocabulary n-grams are dropped; a document with no in-vocabulary
    n-grams yields the zero vector.
    """
    counts: dict[int, float] = {}
    for gram in extract_ngrams(tokens, space.ngram_orders):
        idx = space.vocabulary.get(gram)
        if idx is not None:
            counts[idx] = counts.get(idx, 0.0) + 1.0
    if not counts:
        return ZERO_VECTOR

    vec = SparseVector.from_counts(counts)
    if weighting is Weighting.COUNT:
        return vec
    norm = vec.norm()
    return SparseVector(tuple((i, v / norm) for i, v in vec.entries))


FEATURE_SPACE_FORMAT_VERSION = 1


def save_feature_space(space: FeatureSpace, path: str | Path) -> None:
    by_index = sorted(space.vocabulary, key=space.vocabulary.get)
    payload = {
        "version": FEATURE_SPACE_FORMAT_VERSION,
        "ngram_orders": list(space.ngram_orders),
        "min_doc_freq": space.min_doc_freq,
        "doc_count": space.doc_count,
        "vocabulary": by_index,
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_feature_space(path: str | Path) -> FeatureSpace:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != FEATURE_SPACE_FORMAT_VERSION:
        raise ValueError(f"unsupported feature space version: {payload.get('version')}")
    return FeatureSpace(
        ngram_orders=tuple(payload["ngram_orders"]),
        vocabulary={gram: i for i, gram in enumerate(payload["vocabulary"])},
        min_doc_freq=payload["min_doc_freq"],
        doc_count=payload["doc_count"],
    )
