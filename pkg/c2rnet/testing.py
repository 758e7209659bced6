#!/usr/bin/env python3

"""Test base classes and fixture generators."""

import contextlib
import io
import json
import logging
import os
import random
import tempfile
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from expecttest import TestCase

from .ndp_corpus import ContentType, NDPCorpus
from .treebank import Document, RSTNode, RSTTree, leaf, node, write_corpus

__all__ = [
    "C2RNetTestCase",
    "CLITestCase",
    "SYNTHETIC_LABELS",
    "sample_tree",
    "random_tree",
    "make_document",
    "synthetic_treebank",
    "separable_ndp_corpus",
]

# (nuclearity, relation) pairs used by the synthetic treebank
SYNTHETIC_LABELS = (
    ("NS", "elaboration"),
    ("NN", "joint"),
    ("SN", "attribution"),
)

_FILLER = ("the", "a", "market", "said", "shares", "of", "company", "year", "rose", "new")


class C2RNetTestCase(TestCase):
    """Base class giving each test a scratch directory."""

    def setUp(self) -> None:
        super().setUp()
        self.temp_dir = tempfile.TemporaryDirectory()
        self.temp_path = Path(self.temp_dir.name)
        # relative corpus paths must not leak in from the caller's environment
        self._saved_data_dir = os.environ.pop("C2RNET_DATA_DIR", None)

    def tearDown(self) -> None:
        if self._saved_data_dir is not None:
            os.environ["C2RNET_DATA_DIR"] = self._saved_data_dir
        self.temp_dir.cleanup()
        super().tearDown()

    def write_docs(
        self,
        name: str,
        docs: Sequence[Document],
        trees: dict[str, RSTTree] | None = None,
    ) -> Path:
        path = self.temp_path / name
        write_corpus(path, docs, trees)
        return path

    def write_records(self, name: str, records: Sequence[dict[str, Any]]) -> Path:
        """Write raw native-format records, bypassing Document checks."""
        path = self.temp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
        return path


class CLITestCase(C2RNetTestCase):
    """Base class for end-to-end tests that drive the command line in-process."""

    def setUp(self) -> None:
        super().setUp()
        # keep ~/.c2rnetrc and ~/.c2rnet/ logs out of the test
        self._saved_env = {
            k: os.environ.get(k) for k in ("HOME", "C2RNET_DEBUG", "C2RNET_DEBUG_LEVEL")
        }
        os.environ["HOME"] = str(self.temp_path)
        os.environ.pop("C2RNET_DEBUG", None)
        os.environ.pop("C2RNET_DEBUG_LEVEL", None)

    def tearDown(self) -> None:
        root = logging.getLogger()
        for handler in list(root.handlers):
            handler.close()
            root.removeHandler(handler)
        for key, value in self._saved_env.items():
            if value is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = value
        super().tearDown()

    def normalize_path(self, text: str) -> str:
        """Replace the scratch directory with a fixed placeholder."""
        return text.replace(str(self.temp_path), "/tmp/test_dir")

    def run_cli(self, *args: str | Path) -> tuple[int, str, str]:
        from .main import run

        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = run([str(a) for a in args])
        return code, stdout.getvalue(), stderr.getvalue()

    def run_cli_assert_success(self, *args: str | Path) -> str:
        code, stdout, stderr = self.run_cli(*args)
        self.assertEqual(code, 0, f"c2rnet {' '.join(map(str, args))} failed:\n{stderr}")
        return stdout

    def run_cli_assert_error(self, *args: str | Path, code: int = 1) -> str:
        """Run a command that must fail; returns its normalized error message."""
        got, _, stderr = self.run_cli(*args)
        self.assertEqual(got, code, stderr)
        errors = [line for line in stderr.splitlines() if line.startswith("error: ")]
        self.assertTrue(errors, f"no error message in:\n{stderr}")
        return self.normalize_path(errors[-1])


def sample_tree() -> RSTTree:
    """(NS elaboration e1 (NN list e2 e3))"""
    return RSTTree(node("NS", "elaboration", leaf(1), node("NN", "list", leaf(2), leaf(3))))


def random_tree(
    n_edus: int,
    rng: random.Random,
    relations: Sequence[str] = ("elaboration", "list", "joint", "contrast"),
) -> RSTTree:
    """Uniformly random split points, nuclearity and relations."""

    def build(i: int, j: int) -> RSTNode:
        if i == j:
            return leaf(i)
        k = rng.randint(i, j - 1)
        return node(
            rng.choice(("NN", "NS", "SN")),
            rng.choice(list(relations)),
            build(i, k),
            build(k + 1, j),
        )

    return RSTTree(build(1, n_edus))


def make_document(
    doc_id: str,
    edus: Sequence[Sequence[str]],
    sentence_boundaries: Sequence[int] | None = None,
    paragraph_starts: Sequence[int] = (0,),
    tree: RSTTree | None = None,
    ndp_labels: Sequence[ContentType] | None = None,
) -> Document:
    """Document from per-EDU token lists; one sentence per EDU by default."""
    tokens = [t for edu in edus for t in edu]
    boundaries: list[int] = []
    total = 0
    for edu in edus:
        total += len(edu)
        boundaries.append(total)
    if sentence_boundaries is None:
        sentence_boundaries = range(1, len(edus) + 1)
    doc = Document(
        doc_id=doc_id,
        tokens=tuple(tokens),
        edu_boundaries=tuple(boundaries),
        sentence_boundaries=tuple(sentence_boundaries),
        paragraph_starts=frozenset(paragraph_starts),
        gold_tree=tree,
        ndp_labels=tuple(ndp_labels) if ndp_labels is not None else None,
    )
    doc.check()
    return doc


def synthetic_treebank(
    n_docs: int,
    seed: int,
    min_edus: int = 5,
    max_edus: int = 10,
) -> list[Document]:
    """Documents whose EDUs announce the tree they belong to.

    Every EDU after the first opens with two marker tokens: the depth of the
    node that splits just before it, and that node's label.  The true split
    of every span is therefore the candidate with the shallowest marker.
    """
    rng = random.Random(seed)
    docs: list[Document] = []
    for d in range(n_docs):
        n = rng.randint(min_edus, max_edus)
        markers: dict[int, tuple[int, int]] = {}

        def build(i: int, j: int, depth: int) -> RSTNode:
            if i == j:
                return leaf(i)
            k = rng.randint(i, j - 1)
            label = rng.randrange(len(SYNTHETIC_LABELS))
            markers[k + 1] = (depth, label)
            nuclearity, relation = SYNTHETIC_LABELS[label]
            return node(nuclearity, relation, build(i, k, depth + 1), build(k + 1, j, depth + 1))

        tree = RSTTree(build(1, n, 0))
        edus: list[list[str]] = []
        for i in range(1, n + 1):
            if i == 1:
                head = ["<start>"]
            else:
                depth, label = markers[i]
                head = [f"<depth{depth}>", f"<label{label}>"]
            edus.append(head + rng.choices(_FILLER, k=rng.randint(1, 3)))
        # two EDUs per sentence where possible; a paragraph every three sentences
        sentence_boundaries = list(range(2, n + 1, 2))
        if not sentence_boundaries or sentence_boundaries[-1] != n:
            sentence_boundaries.append(n)
        starts = [0, *sentence_boundaries[:-1]]
        docs.append(
            make_document(
                f"syn{d:03d}",
                edus,
                sentence_boundaries=sentence_boundaries,
                paragraph_starts=starts[::3],
                tree=tree,
            )
        )
    return docs


def separable_ndp_corpus(
    n_docs: int,
    seed: int,
    min_sentences: int = 3,
    max_sentences: int = 6,
) -> NDPCorpus:
    """Sentence-labeled documents where each sentence starts with a label cue."""
    rng = random.Random(seed)
    labels = list(ContentType)
    docs: list[Document] = []
    for d in range(n_docs):
        n = rng.randint(min_sentences, max_sentences)
        sentence_labels = [rng.choice(labels) for _ in range(n)]
        edus = [
            [f"<cue{int(label)}>", *rng.choices(_FILLER, k=rng.randint(2, 5))]
            for label in sentence_labels
        ]
        docs.append(make_document(f"ndp{d:03d}", edus, ndp_labels=sentence_labels))
    return NDPCorpus(tuple(docs))
