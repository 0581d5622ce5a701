"""Labeled hate corpora: loading, validation, label distributions.

A corpus is an ordered, immutable collection of binary-labeled text samples,
optionally carrying word-level language tags. Input formats are JSONL (one
object per line, fields ``id``, ``text``, ``label``, ``lang_tags``) and CSV
(header ``text,label``, optional ``id`` and ``lang_tags`` columns). Corpora
are re-emitted as canonical JSONL for the downstream mixing and metric steps.
"""

from __future__ import annotations

import csv
import json
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path

from .errors import (
    DuplicateId,
    EmptyLexiconSet,
    MalformedRecord,
    UnknownLabel,
)

# Well-known source names; any other string is accepted as-is.
SOURCE_CODEMIXED = "codemixed"
SOURCE_HINDI = "hindi"
SOURCE_ENGLISH = "english"


class Label(Enum):
    HATE = "hate"
    NON_HATE = "non-hate"


# The three source datasets label their classes differently; every spelling
# seen in the wild maps here. "1" means hate, matching the positive class.
DEFAULT_LABEL_ALIASES = {
    "hate": Label.HATE,
    "1": Label.HATE,
    "non-hate": Label.NON_HATE,
    "non_hate": Label.NON_HATE,
    "nonhate": Label.NON_HATE,
    "0": Label.NON_HATE,
}


def parse_label(value: str, aliases: dict[str, Label] | None = None) -> Label:
    """Parse a raw label string case-insensitively; raise UnknownLabel otherwise."""
    table = DEFAULT_LABEL_ALIASES if aliases is None else aliases
    key = str(value).strip().lower()
    try:
        return table[key]
    except KeyError:
        raise UnknownLabel(value) from None


@dataclass(frozen=True)
class LangTag:
    """A word-level language tag: a lowercase language code, or None for
    language-independent tokens (symbols, numerals, named entities)."""

    code: str | None = None

    def __post_init__(self):
        if self.code is not None:
            if not self.code:
                raise ValueError("language code must be non-empty")
            object.__setattr__(self, "code", self.code.lower())

    @property
    def is_independent(self) -> bool:
        return self.code is None

    @classmethod
    def lang(cls, code: str) -> "LangTag":
        return cls(code)


INDEPENDENT = LangTag(None)

# Serialized form of the independent tag, plus aliases accepted on input
# (conventions from existing word-level LID annotations).
_INDEPENDENT_WIRE = "univ"
_INDEPENDENT_ALIASES = {"univ", "ne", "acro", "undef", "other"}


def parse_lang_tag(raw: str) -> LangTag:
    key = raw.strip().lower()
    if not key:
        raise ValueError("empty language tag")
    if key in _INDEPENDENT_ALIASES:
        return INDEPENDENT
    return LangTag(key)


def lang_tag_to_wire(tag: LangTag) -> str:
    return _INDEPENDENT_WIRE if tag.is_independent else tag.code


@dataclass(frozen=True)
class Sample:
    """One labeled text instance.

    ``lang_tags``, when present, must align 1:1 with the whitespace tokens
    of ``text``.
    """

    id: str
    text: str
    label: Label
    lang_tags: tuple[LangTag, ...] | None = None
    source: str = "other"

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("sample text is empty")
        if self.lang_tags is not None:
            n_tokens = len(self.text.split())
            if len(self.lang_tags) != n_tokens:
                raise ValueError(
                    f"{len(self.lang_tags)} language tags for {n_tokens} tokens"
                )


@dataclass(frozen=True)
class Corpus:
    name: str
    samples: tuple[Sample, ...] = field(default=())

    def __post_init__(self):
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise DuplicateId(s.id)
            seen.add(s.id)

    @cached_property
    def counts(self) -> dict[Label, int]:
        counts = {Label.HATE: 0, Label.NON_HATE: 0}
        for s in self.samples:
            counts[s.label] += 1
        return counts

    @cached_property
    def ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def with_label(self, label: Label) -> list[Sample]:
        return [s for s in self.samples if s.label == label]


def _sample_from_record(
    record: dict,
    line_no: int,
    corpus_name: str,
    source: str,
    aliases: dict[str, Label] | None,
) -> Sample:
    if "text" not in record or record["text"] is None:
        raise MalformedRecord(line_no, "missing text field")
    if "label" not in record or record["label"] is None:
        raise MalformedRecord(line_no, "missing label field")
    text = str(record["text"])
    if not text.strip():
        raise MalformedRecord(line_no, "empty text")
    label = parse_label(record["label"], aliases)

    sample_id = record.get("id")
    if sample_id is None or str(sample_id) == "":
        sample_id = f"{corpus_name}-{line_no}"

    tags = None
    raw_tags = record.get("lang_tags")
    if raw_tags:
        if isinstance(raw_tags, str):
            raw_tags = raw_tags.split()
        try:
            tags = tuple(parse_lang_tag(t) for t in raw_tags)
        except ValueError as exc:
            raise MalformedRecord(line_no, str(exc)) from None

    try:
        return Sample(id=str(sample_id), text=text, label=label,
                      lang_tags=tags, source=source)
    except ValueError as exc:
        raise MalformedRecord(line_no, str(exc)) from None


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    source: str = "other",
    name: str | None = None,
    label_aliases: dict[str, Label] | None = None,
) -> Corpus:
    """Load and validate a corpus from a JSONL or CSV file.

    Records with empty text raise MalformedRecord; unknown label strings
    raise UnknownLabel; repeated ids raise DuplicateId. Missing ids are
    assigned ``<corpus-name>-<line-number>``.
    """
    path = Path(path)
    corpus_name = name if name is not None else path.stem
    fmt = format.lower()
    samples = []

    if fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from None
                if not isinstance(record, dict):
                    raise MalformedRecord(line_no, "record is not an object")
                samples.append(_sample_from_record(
                    record, line_no, corpus_name, source, label_aliases))
    elif fmt == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "text" not in reader.fieldnames \
                    or "label" not in reader.fieldnames:
                raise MalformedRecord(1, "CSV header must include text and label")
            for line_no, row in enumerate(reader, start=2):
                samples.append(_sample_from_record(
                    row, line_no, corpus_name, source, label_aliases))
    else:
        raise ValueError(f"unsupported corpus format: {format!r}")

    return Corpus(name=corpus_name, samples=tuple(samples))


def sample_to_record(sample: Sample) -> dict:
    record = {"id": sample.id, "text": sample.text, "label": sample.label.value}
    if sample.lang_tags is not None:
        record["lang_tags"] = [lang_tag_to_wire(t) for t in sample.lang_tags]
    return record


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the canonical JSONL form consumed by the rest of the pipeline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for sample in corpus.samples:
            fh.write(json.dumps(sample_to_record(sample), ensure_ascii=False))
            fh.write("\n")


def label_distribution(corpus: Corpus) -> dict[Label, tuple[int, float]]:
    """Per-label (count, fraction). Fractions are 0.0 for an empty corpus."""
    total = len(corpus)
    return {
        label: (count, count / total if total else 0.0)
        for label, count in corpus.counts.items()
    }


_DEVANAGARI_RANGE = range(0x0900, 0x0980)


def _has_devanagari(token: str) -> bool:
    return any(ord(ch) in _DEVANAGARI_RANGE for ch in token)


def _is_symbolic(token: str) -> bool:
    # Purely numeric/punctuation/symbol tokens carry no language.
    return all(unicodedata.category(ch)[0] in "NPS" for ch in token)


def _strip_punct(token: str) -> str:
    chars = list(token)
    while chars and unicodedata.category(chars[0])[0] == "P":
        chars.pop(0)
    while chars and unicodedata.category(chars[-1])[0] == "P":
        chars.pop()
    return "".join(chars)


def heuristic_tag(
    text: str,
    lexicons: dict[str, set[str]],
    fallback: str = "en",
) -> list[LangTag]:
    """Best-effort word-level language tags, one per whitespace token.

    This is a convenience substitute for manual annotation, not a language
    identifier: Devanagari script wins outright, then case-folded lexicon
    lookup, then an Independent tag for purely numeric/punctuation tokens,
    then the fallback language.
    """
    if not lexicons:
        raise EmptyLexiconSet("at least one lexicon is required")
    folded = {code.lower(): {w.lower() for w in words}
              for code, words in lexicons.items()}

    tags = []
    for token in text.split():
        if _has_devanagari(token):
            tags.append(LangTag("hi"))
            continue
        word = _strip_punct(token).lower()
        hit = next((code for code, words in folded.items() if word and word in words), None)
        if hit is not None:
            tags.append(LangTag(hit))
        elif _is_symbolic(token):
            tags.append(INDEPENDENT)
        else:
            tags.append(LangTag(fallback))
    return tags
