"""Exception types shared across the toolkit."""

from __future__ import annotations


class NativemixError(Exception):
    """Base class for all toolkit errors."""


class MalformedRecord(NativemixError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DuplicateId(NativemixError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample id: {sample_id!r}")


class UnknownLabel(NativemixError):
    def __init__(self, value: str):
        self.value = value
        super().__init__(f"unknown label: {value!r}")


class EmptyLexiconSet(NativemixError):
    pass


class EmptyStratum(NativemixError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"no samples with label {label}")


class InsufficientSamples(NativemixError):
    def __init__(self, corpus_name: str, label, wanted: int, available: int):
        self.corpus_name = corpus_name
        self.label = label
        self.wanted = wanted
        self.available = available
        super().__init__(
            f"corpus {corpus_name!r} has {available} samples with label {label}, "
            f"but {wanted} were requested"
        )


class EmptyTagSequence(NativemixError):
    pass


class NoSpans(NativemixError):
    pass


class NoTaggedSamples(NativemixError):
    pass


class EmptyTrainingSet(NativemixError):
    pass


class SingleClassTrainingSet(NativemixError):
    pass


class LengthMismatch(NativemixError):
    def __init__(self, n_gold: int, n_pred: int):
        super().__init__(f"gold has {n_gold} labels, predictions have {n_pred}")


class DegenerateVariance(NativemixError):
    pass


class MixedCell(NativemixError):
    pass


class ConfigError(NativemixError):
    pass
