"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for every error raised by this package."""


class MissingFile(EngineError):
    """A file referenced by a manifest or command does not exist."""


class SchemaError(EngineError):
    """A manifest or record file is malformed or internally inconsistent."""


class AlignmentError(EngineError):
    """Predictions and labels (or translation-linked sets) do not share the
    same example ids."""


class EmptySet(EngineError):
    """An operation that needs at least one example received none."""


class ConfigError(EngineError):
    """Invalid metric parameters or simulator configuration."""


class DirectionError(EngineError):
    """No (or ambiguous) eval sets for a requested transfer direction."""


class LanguageSetMismatch(EngineError):
    """Two rankings do not cover the identical language set."""


class DegenerateRanking(EngineError):
    """A ranking with fewer than two languages cannot be scored."""


class NonFiniteScore(EngineError):
    """A score table contains NaN or infinite values."""


class DimensionMismatch(EngineError):
    """Embedding vectors in one pair set do not share a single dimension."""


class ZeroVector(EngineError):
    """Cosine similarity is undefined for a zero vector."""


class LabelMismatch(AlignmentError):
    """Translation-linked examples carry different labels."""


class RatioOutOfRange(EngineError):
    """A corruption ratio outside [0, 1]."""


class EmptyQualifyingWindow(EngineError):
    """A scalar IGap was requested but no checkpoint's training error falls
    inside the [e_prime, e_prime + epsilon) window."""
