"""Offline tool exporting pretrained-transformer subtoken embeddings to
the ner-embeddings interchange format."""

from .export import ExportConfig, ExportSummary, export

__version__ = "0.1.0"

__all__ = ["ExportConfig", "ExportSummary", "export"]
