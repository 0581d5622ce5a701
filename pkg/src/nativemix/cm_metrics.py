"""Code-mixing complexity metrics over word-level language tags.

Two per-sample scores: the code-mixing index (CMI), the percentage of
language-tagged words outside the dominant language, and burstiness, a
dispersion statistic over the lengths of maximal same-language spans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .corpus import Corpus, LangTag
from .errors import EmptyTagSequence, NoSpans, NoTaggedSamples


@dataclass(frozen=True)
class SpanProfile:
    """Language decomposition of one tag sequence.

    ``total_words`` counts every token; ``independent_count`` the
    language-independent ones; ``tag_counts`` the per-language word counts;
    ``spans`` the maximal same-language runs (language-independent tokens
    neither break nor lengthen a span).
    """

    tag_counts: dict[str, int]
    total_words: int
    independent_count: int
    spans: tuple[tuple[str, int], ...]


def profile(tags: list[LangTag] | tuple[LangTag, ...]) -> SpanProfile:
    if not tags:
        raise EmptyTagSequence("cannot profile an empty tag sequence")

    counts: dict[str, int] = {}
    independent = 0
    spans: list[tuple[str, int]] = []
    for tag in tags:
        if tag.is_independent:
            independent += 1
            continue
        counts[tag.code] = counts.get(tag.code, 0) + 1
        if spans and spans[-1][0] == tag.code:
            spans[-1] = (tag.code, spans[-1][1] + 1)
        else:
            spans.append((tag.code, 1))

    return SpanProfile(
        tag_counts=counts,
        total_words=len(tags),
        independent_count=independent,
        spans=tuple(spans),
    )


def cmi(p: SpanProfile) -> float:
    """100 * (1 - dominant/(N - I)), or 0 when every word is independent.

    For two languages the value lies in [0, 50]; with k languages the
    attainable maximum is 100*(1 - 1/k).
    """
    if p.total_words == p.independent_count:
        return 0.0
    dominant = max(p.tag_counts.values())
    return 100.0 * (1.0 - dominant / (p.total_words - p.independent_count))


def burstiness(p: SpanProfile) -> float:
    """(sigma - mean)/(sigma + mean) over span lengths, in [-1, 1).

    Sigma is the population standard deviation, so uniform spans (including
    a single span) score exactly -1.
    """
    if not p.spans:
        raise NoSpans("no language spans (all tokens independent)")
    lengths = [length for _, length in p.spans]
    mean = sum(lengths) / len(lengths)
    var = sum((x - mean) ** 2 for x in lengths) / len(lengths)
    sigma = math.sqrt(var)
    return (sigma - mean) / (sigma + mean)


class ComplexitySummary(NamedTuple):
    avg_cmi: float
    avg_burstiness: float
    skipped: int


def corpus_complexity(corpus: Corpus) -> ComplexitySummary:
    """Unweighted averages of per-sample CMI and burstiness.

    Samples without language tags, or whose tags yield no spans, are
    counted in ``skipped`` and excluded from both averages. Raises
    NoTaggedSamples when nothing remains.
    """
    cmis = []
    bursts = []
    skipped = 0
    for sample in corpus.samples:
        if not sample.lang_tags:
            skipped += 1
            continue
        p = profile(sample.lang_tags)
        if not p.spans:
            skipped += 1
            continue
        cmis.append(cmi(p))
        bursts.append(burstiness(p))

    if not cmis:
        raise NoTaggedSamples(f"corpus {corpus.name!r} has no scoreable samples")
    return ComplexitySummary(
        avg_cmi=sum(cmis) / len(cmis),
        avg_burstiness=sum(bursts) / len(bursts),
        skipped=skipped,
    )
