"""Training-set formulation: stratified splits, native-sample mixes,
incremental batch sweeps, and native-only sets.

Every operation is a pure function of (inputs, seed). Randomness comes from
numpy's PCG64 generator, whose streams are stable across numpy releases, so
a given plan reproduces byte-identically anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .corpus import Corpus, Label, Sample
from .errors import EmptyStratum, InsufficientSamples

PRNG_NAME = "numpy-pcg64"

# Fixed label iteration order; keeps PRNG consumption deterministic.
_LABEL_ORDER = (Label.HATE, Label.NON_HATE)


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float
    val_frac: float
    test_frac: float

    def __post_init__(self):
        for frac in (self.train_frac, self.val_frac, self.test_frac):
            if not 0.0 < frac < 1.0:
                raise ValueError("split fractions must lie in (0, 1)")
        if abs(self.train_frac + self.val_frac + self.test_frac - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")

    @property
    def fracs(self) -> tuple[float, float, float]:
        return (self.train_frac, self.val_frac, self.test_frac)


def _partition_counts(n: int, fracs: tuple[float, ...]) -> list[int]:
    # floor per part, leftovers handed out one each starting from train
    counts = [math.floor(frac * n) for frac in fracs]
    remainder = n - sum(counts)
    for i in range(remainder):
        counts[i % len(counts)] += 1
    return counts


def stratified_split(
    corpus: Corpus, spec: SplitSpec, seed: int
) -> tuple[Corpus, Corpus, Corpus]:
    """Shuffle each label stratum with the seed and cut it by the spec.

    Each part receives floor(frac * label_count) samples per label plus at
    most one leftover; parts are disjoint and jointly exhaustive, and keep
    the original corpus order internally.
    """
    rng = np.random.default_rng(seed)
    part_indices: tuple[list[int], list[int], list[int]] = ([], [], [])

    for label in _LABEL_ORDER:
        pool = [i for i, s in enumerate(corpus.samples) if s.label == label]
        if not pool:
            raise EmptyStratum(label)
        order = rng.permutation(len(pool))
        shuffled = [pool[i] for i in order]
        counts = _partition_counts(len(pool), spec.fracs)
        start = 0
        for part, count in zip(part_indices, counts):
            part.extend(shuffled[start:start + count])
            start += count

    suffixes = ("train", "val", "test")
    return tuple(
        Corpus(
            name=f"{corpus.name}-{suffix}",
            samples=tuple(corpus.samples[i] for i in sorted(indices)),
        )
        for suffix, indices in zip(suffixes, part_indices)
    )


@dataclass(frozen=True)
class MixPlan:
    """Base corpus plus per-donor target label counts, drawn with the seed."""

    base: Corpus
    additions: tuple[tuple[Corpus, dict[Label, int]], ...]
    seed: int
    name: str = ""

    def resolved_name(self) -> str:
        return self.name or f"{self.base.name}-mix"


def _draw_samples(
    corpus: Corpus,
    label: Label,
    count: int,
    rng: np.random.Generator,
    taken: set[int],
) -> list[int]:
    pool = [
        i for i, s in enumerate(corpus.samples)
        if s.label == label and i not in taken
    ]
    if count > len(pool):
        raise InsufficientSamples(corpus.name, label, count, len(pool))
    if count == 0:
        return []
    chosen = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in chosen]


def build_mix(plan: MixPlan) -> Corpus:
    """Materialize a mixed training set: base first, then each addition's
    draws in declared order (donor order preserved within an addition).

    Draws are uniform without replacement; a donor appearing in several
    additions never contributes the same sample twice.
    """
    rng = np.random.default_rng(plan.seed)
    samples = list(plan.base.samples)
    taken_per_donor: dict[str, set[int]] = {}

    for donor, targets in plan.additions:
        taken = taken_per_donor.setdefault(donor.name, set())
        picked: list[int] = []
        for label in _LABEL_ORDER:
            want = targets.get(label, 0)
            drawn = _draw_samples(donor, label, want, rng, taken)
            picked.extend(drawn)
            taken.update(drawn)
        samples.extend(donor.samples[i] for i in sorted(picked))

    return Corpus(name=plan.resolved_name(), samples=tuple(samples))


def derive_proportional_counts(
    base: Corpus, donor: Corpus, nonhate_cap: int
) -> dict[Label, int]:
    """Donor counts mirroring the base hate/non-hate ratio.

    Non-hate is pinned at the cap; hate is the ratio-scaled count, rounded
    and clamped to what the donor can supply.
    """
    base_hate = base.counts[Label.HATE]
    base_nonhate = base.counts[Label.NON_HATE]
    if base_hate == 0 or base_nonhate == 0:
        raise EmptyStratum(Label.HATE if base_hate == 0 else Label.NON_HATE)
    if nonhate_cap > donor.counts[Label.NON_HATE]:
        raise InsufficientSamples(
            donor.name, Label.NON_HATE, nonhate_cap, donor.counts[Label.NON_HATE]
        )
    hate = round(nonhate_cap * base_hate / base_nonhate)
    hate = min(hate, donor.counts[Label.HATE])
    return {Label.HATE: hate, Label.NON_HATE: nonhate_cap}


class RatioMode(Enum):
    EQUAL = "equal"
    BASE = "base"


@dataclass(frozen=True)
class SweepPlan:
    base: Corpus
    batch_size_per_language: int
    num_steps: int
    ratio_mode: RatioMode
    seed: int
    name: str = ""

    def __post_init__(self):
        if self.batch_size_per_language <= 0:
            raise ValueError("batch size must be positive")
        if self.num_steps < 1:
            raise ValueError("a sweep needs at least one step")

    def batch_label_counts(self) -> dict[Label, int]:
        """Per-batch label targets; non-hate absorbs any rounding remainder."""
        size = self.batch_size_per_language
        if self.ratio_mode is RatioMode.EQUAL:
            hate = size // 2
        else:
            base_total = len(self.base)
            hate = round(size * self.base.counts[Label.HATE] / base_total)
        return {Label.HATE: hate, Label.NON_HATE: size - hate}

    def resolved_name(self) -> str:
        return self.name or f"{self.base.name}-sweep-{self.ratio_mode.value}"


def build_sweep(plan: SweepPlan, donors: list[Corpus]) -> list[Corpus]:
    """Incrementally grown training sets: step k holds the base plus the
    first k batches of every donor.

    All of a donor's batches are drawn up front without replacement, so
    batches are pairwise disjoint and step k's samples are a subset of
    step k+1's.
    """
    rng = np.random.default_rng(plan.seed)
    per_batch = plan.batch_label_counts()

    # donor -> list of per-step index blocks (sorted into donor order)
    donor_batches: dict[str, list[list[int]]] = {}
    for donor in donors:
        drawn: dict[Label, list[int]] = {}
        taken: set[int] = set()
        for label in _LABEL_ORDER:
            total = per_batch[label] * plan.num_steps
            drawn[label] = _draw_samples(donor, label, total, rng, taken)
            taken.update(drawn[label])
        batches = []
        for k in range(plan.num_steps):
            block = []
            for label in _LABEL_ORDER:
                n = per_batch[label]
                block.extend(drawn[label][k * n:(k + 1) * n])
            batches.append(sorted(block))
        donor_batches[donor.name] = batches

    steps = []
    for k in range(1, plan.num_steps + 1):
        samples = list(plan.base.samples)
        for donor in donors:
            for batch in donor_batches[donor.name][:k]:
                samples.extend(donor.samples[i] for i in batch)
        steps.append(Corpus(
            name=f"{plan.resolved_name()}-step{k}",
            samples=tuple(samples),
        ))
    return steps


def build_native_only(
    donors: list[Corpus], seed: int, name: str = ""
) -> Corpus:
    """Label-balanced union of native corpora, no code-mixed samples.

    Each donor contributes min(hate, non-hate) samples of both labels,
    drawn uniformly without replacement.
    """
    rng = np.random.default_rng(seed)
    samples: list[Sample] = []
    for donor in donors:
        m = min(donor.counts[Label.HATE], donor.counts[Label.NON_HATE])
        if m == 0:
            short = (Label.HATE if donor.counts[Label.HATE] == 0
                     else Label.NON_HATE)
            raise EmptyStratum(short)
        picked: list[int] = []
        for label in _LABEL_ORDER:
            picked.extend(_draw_samples(donor, label, m, rng, set()))
        samples.extend(donor.samples[i] for i in sorted(picked))

    set_name = name or "+".join(d.name for d in donors)
    return Corpus(name=set_name, samples=tuple(samples))
