#!/usr/bin/env python3

"""Token embedding providers.

Both branches consume the matrix produced by `embed_document`; the provider
is fixed for a run and never trained.

Precomputed file layout (UTF-8, one JSON object per line)::

    {"format": "c2rnet-embeddings", "version": 1, "dim": 8, "count": 10}
    {"doc_id": "d1", "token_index": 0, "vector": [0.1, ...]}
    ...

The header comes first; `count` is the number of records that follow.
"""

import hashlib
import json
import logging
import os
from abc import ABC, abstractmethod
from collections.abc import Iterable, Mapping
from functools import lru_cache
from pathlib import Path
from typing import Any

import anyio
import numpy as np
import numpy.typing as npt
import torch

from .async_file_utils import async_readlines, async_write_lines
from .common import FORMAT_VERSION
from .errors import DimensionMismatch, EmptyDocument, MalformedRecord, MissingEmbedding
from .treebank import Document

__all__ = [
    "EmbeddingProvider",
    "HashEmbeddingProvider",
    "PrecomputedEmbeddingProvider",
    "hash_embed",
    "load_precomputed",
    "write_precomputed",
    "embed_document",
]

log = logging.getLogger(__name__)

EMBEDDINGS_FORMAT = "c2rnet-embeddings"
_UINT64_MAX = float(2**64 - 1)


def hash_embed(token: str, dim: int, seed: int) -> npt.NDArray[np.float64]:
    """Deterministic pseudo-embedding of `token` with entries in [-1, 1].

    Entry i is a keyed 64-bit BLAKE2b hash of (token, i) mapped uniformly onto
    [-1, 1]; `seed` is the key.
    """
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    return np.array(_hash_entries(token, dim, seed), dtype=np.float64)


@lru_cache(maxsize=65536)
def _hash_entries(token: str, dim: int, seed: int) -> tuple[float, ...]:
    # any int is a valid seed; those in the signed 128-bit range keep their bytes
    key = (seed % 2**128).to_bytes(16, "little")
    values: list[float] = []
    for index in range(dim):
        digest = hashlib.blake2b(
            f"{token}\x1f{index}".encode(), key=key, digest_size=8
        ).digest()
        values.append(int.from_bytes(digest, "little") / _UINT64_MAX * 2.0 - 1.0)
    return tuple(values)


class EmbeddingProvider(ABC):
    """Maps the tokens of a document to fixed vectors of size `dim`."""

    source: str

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"embedding dim must be positive, got {dim}")
        self.dim = dim

    @abstractmethod
    def vector(self, doc_id: str, token_index: int, token: str) -> npt.NDArray[np.float64]:
        """Vector for one token occurrence."""


class HashEmbeddingProvider(EmbeddingProvider):
    source = "hash"

    def __init__(self, dim: int, seed: int = 0):
        super().__init__(dim)
        self.seed = seed

    def vector(self, doc_id: str, token_index: int, token: str) -> npt.NDArray[np.float64]:
        return hash_embed(token, self.dim, self.seed)


class PrecomputedEmbeddingProvider(EmbeddingProvider):
    source = "precomputed-file"

    def __init__(self, dim: int, table: Mapping[tuple[str, int], npt.NDArray[np.float64]]):
        super().__init__(dim)
        self._table = dict(table)

    def __len__(self) -> int:
        return len(self._table)

    def vector(self, doc_id: str, token_index: int, token: str) -> npt.NDArray[np.float64]:
        try:
            return self._table[(doc_id, token_index)]
        except KeyError:
            raise MissingEmbedding(
                f"no precomputed embedding for token {token_index} of document {doc_id!r}"
            ) from None


def _decode(path: str | os.PathLike[str], lineno: int, line: str) -> dict[str, Any]:
    where = f"{path}:{lineno}"
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedRecord(where, "<line>", str(e)) from e
    if not isinstance(record, dict):
        raise MalformedRecord(where, "<line>", "expected an object")
    return record  # type: ignore[reportUnknownVariableType]


def _entry(
    path: str | os.PathLike[str], lineno: int, record: dict[str, Any]
) -> tuple[tuple[str, int], npt.NDArray[np.float64]]:
    where = f"{path}:{lineno}"
    doc_id = record.get("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise MalformedRecord(where, "doc_id", "expected a non-empty string")
    index = record.get("token_index")
    if not isinstance(index, int) or isinstance(index, bool) or index < 0:
        raise MalformedRecord(where, "token_index", "expected a non-negative integer")
    values = record.get("vector")
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values  # type: ignore[reportUnknownVariableType]
    ):
        raise MalformedRecord(where, "vector", "expected a list of numbers")
    return (doc_id, index), np.asarray(values, dtype=np.float64)


def load_precomputed(path: str | os.PathLike[str]) -> PrecomputedEmbeddingProvider:
    """Load a precomputed embedding table (layout in the module docstring)."""
    lines = [
        (lineno, line)
        for lineno, line in enumerate(anyio.run(async_readlines, str(path)), start=1)
        if line.strip()
    ]
    if not lines:
        raise MalformedRecord(str(path), "header", "empty embedding file")
    header = _decode(path, *lines[0])
    if header.get("format") != EMBEDDINGS_FORMAT:
        raise MalformedRecord(str(path), "format", f"expected {EMBEDDINGS_FORMAT!r}")
    if header.get("version") != FORMAT_VERSION:
        raise MalformedRecord(
            str(path), "version", f"unsupported version {header.get('version')!r}"
        )
    dim = header.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise MalformedRecord(str(path), "dim", "expected a positive integer")

    table: dict[tuple[str, int], npt.NDArray[np.float64]] = {}
    for lineno, line in lines[1:]:
        key, vector = _entry(path, lineno, _decode(path, lineno, line))
        if vector.shape != (dim,):
            raise DimensionMismatch(
                f"{path}:{lineno}: vector for {key} has {vector.size} entries, "
                f"header says {dim}"
            )
        if not np.all(np.isfinite(vector)):
            raise MalformedRecord(key[0], "vector", f"non-finite entry at line {lineno}")
        if key in table:
            raise MalformedRecord(key[0], "token_index", f"duplicate entry {key[1]}")
        table[key] = vector
    if header.get("count") != len(table):
        raise MalformedRecord(
            str(path), "count", f"header says {header.get('count')}, found {len(table)}"
        )
    log.info(f"Loaded {len(table)} precomputed embeddings of dim {dim} from {path}")
    return PrecomputedEmbeddingProvider(dim, table)


def write_precomputed(
    path: str | os.PathLike[str],
    rows: Iterable[tuple[str, int, Iterable[float]]],
) -> None:
    """Write (doc_id, token_index, vector) rows in the precomputed layout."""
    records = [
        {"doc_id": doc_id, "token_index": index, "vector": [float(v) for v in vector]}
        for doc_id, index, vector in rows
    ]
    dims = {len(r["vector"]) for r in records}  # type: ignore[reportArgumentType]
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed vector sizes {sorted(dims)}")
    header = {
        "format": EMBEDDINGS_FORMAT,
        "version": FORMAT_VERSION,
        "dim": dims.pop() if dims else 1,
        "count": len(records),
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    anyio.run(
        async_write_lines,
        str(path),
        [json.dumps(header)] + [json.dumps(r) for r in records],
    )


def embed_document(doc: Document, provider: EmbeddingProvider) -> torch.Tensor:
    """Token matrix [n_tokens x dim] shared by both branches."""
    if not doc.tokens:
        raise EmptyDocument(f"document {doc.doc_id!r} has no tokens")
    rows = np.stack(
        [provider.vector(doc.doc_id, i, token) for i, token in enumerate(doc.tokens)]
    )
    return torch.from_numpy(rows).to(torch.get_default_dtype())
