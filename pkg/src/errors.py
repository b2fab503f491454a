"""
Exception hierarchy for the representation transfer toolkit.
"""
from __future__ import annotations


class RepTransferError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(RepTransferError, ValueError):
    """A numeric argument is outside its documented range."""


class UnknownObservation(RepTransferError, KeyError):
    """An observation id does not decode to any latent state at the given step."""


class EmptyDataset(RepTransferError):
    """A transition dataset (or a whole collection of them) holds no tuples."""


class LikelihoodDegenerate(RepTransferError):
    """Every decoder candidate assigns zero likelihood to some transition."""


class MismatchedTasks(RepTransferError):
    """A dataset refers to a task index outside the configured task range."""


class DimensionMismatch(RepTransferError):
    """Features, worlds or layouts disagree on horizon, actions or step sizes."""


class UnsupportedEmissionMode(RepTransferError):
    """The requested computation needs finite, exactly known emission supports."""


class PlanningSupportEmpty(RepTransferError):
    """A learned model has no observed transitions at some step."""


class SpanCoefficientsMissing(RepTransferError):
    """A suite was built without a record of its linear-span coefficients."""


class InvalidWeights(RepTransferError, ValueError):
    """Mixture weights are not a probability vector, or the sources cannot be mixed."""


class AccessRevoked(RepTransferError):
    """An environment handle was used after its access capability was revoked."""


class ConfigError(RepTransferError):
    """Experiment configuration could not be loaded or failed validation."""
