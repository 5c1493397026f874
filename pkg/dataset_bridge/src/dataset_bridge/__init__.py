"""Converters from public P300 speller distributions to the neutral session
format (session.json + signal.f32le + events.csv)."""

from .convert import convert, convert_subject
from .specs import SPECS, DatasetSpec, DownloadError, SchemaMismatch

__version__ = "0.1.0"

__all__ = [
    "SPECS",
    "DatasetSpec",
    "DownloadError",
    "SchemaMismatch",
    "convert",
    "convert_subject",
    "__version__",
]
