"""Bridge real classifier checkpoints into checkpoint-pool files.

This package runs a saved text-classifier bundle over labeled datasets
and writes prediction logs, mean-pooled sentence embeddings, and manifest
fragments in the pool formats consumed by the ``igap`` CLI. It computes
no metrics itself; the data flows one way.
"""

from .errors import (
    DatasetError,
    ExporterError,
    JobError,
    LayerOutOfRange,
    ModelLoadError,
)
from .export import ExportResult, finalize, run_export
from .job import DEFAULT_EMBEDDING_LAYER, DatasetSpec, ExportJob, load_job
from .model import (
    ModelConfig,
    TinyTextClassifier,
    load_bundle,
    masked_mean,
    new_model,
    save_bundle,
)

__all__ = [
    "DEFAULT_EMBEDDING_LAYER",
    "DatasetError",
    "DatasetSpec",
    "ExportJob",
    "ExportResult",
    "ExporterError",
    "JobError",
    "LayerOutOfRange",
    "ModelConfig",
    "ModelLoadError",
    "TinyTextClassifier",
    "finalize",
    "load_bundle",
    "load_job",
    "masked_mean",
    "new_model",
    "run_export",
    "save_bundle",
]

__version__ = "0.1.0"
