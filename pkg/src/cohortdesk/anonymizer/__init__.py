"""Anonymization codebook: stable pseudo-identifiers and date jitter."""

from .codebook import (
    JOURNAL_HEADER,
    OFFSET_DOMAIN,
    PSEUDO_PREFIX,
    SCRUB_PREFIX,
    Codebook,
    CodebookError,
    CodebookRecord,
    StorageError,
    UnknownSubjectError,
)

__all__ = [
    "Codebook",
    "CodebookError",
    "CodebookRecord",
    "JOURNAL_HEADER",
    "OFFSET_DOMAIN",
    "PSEUDO_PREFIX",
    "SCRUB_PREFIX",
    "StorageError",
    "UnknownSubjectError",
]
