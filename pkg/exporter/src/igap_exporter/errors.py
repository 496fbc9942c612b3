"""Exception hierarchy for export jobs."""


class ExporterError(Exception):
    """Base class for all errors raised by this package."""


class JobError(ExporterError):
    """The job description itself is malformed (a usage problem)."""


class ModelLoadError(ExporterError):
    """The model bundle is missing, unreadable, or inconsistent."""


class DatasetError(ExporterError):
    """An input dataset is missing, malformed, or misaligned."""


class LayerOutOfRange(ExporterError):
    """The requested embedding layer exceeds the model's depth."""
