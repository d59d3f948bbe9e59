from __future__ import annotations


class MemoryStoreError(Exception):
    """Base class for memory and prompt construction failures."""


class MemoryOrderError(MemoryStoreError, ValueError):
    """A round was committed with an index not greater than the stored ones."""


class TemplateNotFoundError(MemoryStoreError, FileNotFoundError):
    pass
