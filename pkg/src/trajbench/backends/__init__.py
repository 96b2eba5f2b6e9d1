"""In-process storage backends: three index families plus the sequential
scan oracle, all behind one maintenance/candidate contract."""

from .base import (Backend, BackendConfig, IndexKind, QueryStats,
                   StorageFormat, StoredRow, bulk_load)

__all__ = [
    "Backend",
    "BackendConfig",
    "IndexKind",
    "QueryStats",
    "StorageFormat",
    "StoredRow",
    "bulk_load",
]
