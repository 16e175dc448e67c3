"""Deterministic text/audio embedding service.

Serves unit-normalised embeddings over HTTP and exports them as EMB1 files
that downstream retrieval tooling can load directly.
"""

from .backends import BUILTIN_BACKENDS, AudioDecodeError, BandProfileBackend, read_wav
from .config import ServiceConfig
from .emb1 import write_emb1
from .export import ExportReport, export_manifest

__all__ = [
    "AudioDecodeError",
    "BUILTIN_BACKENDS",
    "BandProfileBackend",
    "ExportReport",
    "ServiceConfig",
    "export_manifest",
    "read_wav",
    "write_emb1",
]
