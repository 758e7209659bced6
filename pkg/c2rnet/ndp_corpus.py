#!/usr/bin/env python3

"""Sentence-labeled news discourse profiling corpora."""

from __future__ import annotations

import logging
import os
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import IntEnum
from typing import TYPE_CHECKING

from .errors import DocSetMismatch, MalformedRecord, UnknownLabel, ValidationError

if TYPE_CHECKING:
    from .treebank import Document

__all__ = [
    "ContentType",
    "NDPCorpus",
    "content_types",
    "code",
    "from_code",
    "parse_content_type",
    "load_ndp_corpus",
    "label_distribution",
    "check_disjoint",
]

log = logging.getLogger(__name__)


class ContentType(IntEnum):
    """The eight news content types; values are the stable integer codes."""

    MainEvent = 0
    Consequence = 1
    PreviousEvent = 2
    CurrentContext = 3
    HistoricalEvent = 4
    AnecdotalEvent = 5
    Evaluation = 6
    Expectation = 7


def content_types() -> list[ContentType]:
    return list(ContentType)


def code(content_type: ContentType) -> int:
    return int(content_type)


def from_code(value: int) -> ContentType:
    try:
        return ContentType(value)
    except ValueError:
        raise UnknownLabel(f"no content type has code {value}") from None


def parse_content_type(
    name: str,
    doc_id: str | None = None,
    sentence: int | None = None,
) -> ContentType:
    """Map a canonical label spelling (e.g. "PreviousEvent") to its ContentType."""
    try:
        return ContentType[name]
    except KeyError:
        where = ""
        if doc_id is not None:
            where = f" in document {doc_id!r}"
            if sentence is not None:
                where += f", sentence {sentence}"
        raise UnknownLabel(f"unknown content type {name!r}{where}") from None


@dataclass(frozen=True)
class NDPCorpus:
    documents: tuple[Document, ...]

    def __len__(self) -> int:
        return len(self.documents)

    def sentences(self) -> Iterator[tuple[Document, list[tuple[int, int]], tuple[ContentType, ...]]]:
        """Yield each document with its sentence token spans and gold labels."""
        for doc in self.documents:
            assert doc.ndp_labels is not None
            yield doc, doc.sentence_token_spans(), doc.ndp_labels

    @property
    def n_sentences(self) -> int:
        return sum(doc.n_sentences for doc in self.documents)


def load_ndp_corpus(path: str | os.PathLike[str]) -> NDPCorpus:
    """Load a native-format corpus in which every document carries NDP labels."""
    from .treebank import load_corpus

    docs = load_corpus(path)
    for doc in docs:
        if doc.ndp_labels is None:
            raise MalformedRecord(doc.doc_id, "ndp_labels", "required for NDP corpora")
    log.info(f"NDP corpus {path}: {len(docs)} documents")
    return NDPCorpus(tuple(docs))


def label_distribution(corpus: NDPCorpus) -> dict[ContentType, int]:
    counts = Counter(label for _, _, labels in corpus.sentences() for label in labels)
    return {ct: counts.get(ct, 0) for ct in ContentType}


def check_disjoint(
    splits: Sequence[NDPCorpus | Sequence[Document]],
    names: Sequence[str] | None = None,
) -> None:
    """Raise DocSetMismatch if two splits share a doc_id.

    Splits are NDP corpora or plain document lists; `names` labels them in
    the error message.
    """
    labels = list(names) if names is not None else [f"split {i}" for i in range(len(splits))]
    seen: dict[str, int] = {}
    for index, split in enumerate(splits):
        docs = split.documents if isinstance(split, NDPCorpus) else split
        for doc in docs:
            if doc.doc_id in seen:
                raise DocSetMismatch(
                    f"doc_id {doc.doc_id!r} is in both {labels[seen[doc.doc_id]]} "
                    f"and {labels[index]}"
                )
            seen[doc.doc_id] = index
    if not seen:
        raise ValidationError("no documents in any split")
