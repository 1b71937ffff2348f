"""Exception types shared across the pipeline."""

from __future__ import annotations


class WearscreenError(Exception):
    """Base class for all library errors."""


class SchemaMismatchError(WearscreenError):
    """Fatal: a CSV header does not match the expected schema."""


class EmptyInputError(WearscreenError):
    """An operation received no data points."""


class AllMissingError(WearscreenError):
    """A series has no observed value to impute from."""


class EmptyChannelError(WearscreenError):
    """Feature extraction received an empty channel."""


class DimensionMismatchError(WearscreenError):
    """Prediction input width differs from the training feature count."""


class NonFiniteLossError(WearscreenError):
    """Training loss diverged to NaN or infinity."""


class TooFewGroupsError(WearscreenError):
    """Grouped cross-validation needs more distinct groups."""


class FamilyAbsentError(WearscreenError):
    """A report was requested for a model family missing from the sweep."""


class GeneratorSelfCheckError(WearscreenError):
    """Synthetic data failed its planted-signal audit before emission."""
