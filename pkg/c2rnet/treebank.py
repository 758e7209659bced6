#!/usr/bin/env python3

"""RST trees and annotated documents.

Trees are stored binary.  Spans are 1-based inclusive EDU ranges, while the
boundary lists of a Document are 0-based and end-exclusive, the same way the
native corpus format stores them.
"""

from __future__ import annotations

import json
import logging
import os
import random
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import TYPE_CHECKING, Any

import anyio
from nltk.tree import Tree  # type: ignore[reportMissingTypeStubs]

from .async_file_utils import async_readlines, async_write_text
from .common import DEFAULT_RELATIONS, NUCLEARITIES, SPAN_LABEL
from .errors import (
    CountMismatch,
    DocSetMismatch,
    InvariantViolation,
    LeafCountMismatch,
    MalformedRecord,
    MissingChild,
    NonAdjacentChildren,
    TreeSyntaxError,
    UnknownRelation,
    ValidationError,
)

if TYPE_CHECKING:
    from .ndp_corpus import ContentType

__all__ = [
    "Span",
    "RSTNode",
    "RSTTree",
    "NaryNode",
    "Document",
    "Convention",
    "LabeledConstituent",
    "Violation",
    "leaf",
    "node",
    "parse_tree_text",
    "serialize_tree",
    "binarize",
    "validate",
    "constituents",
    "collapse_relation",
    "document_from_record",
    "document_to_record",
    "load_corpus",
    "write_corpus",
    "split_dev",
]

log = logging.getLogger(__name__)

Span = tuple[int, int]


@dataclass(frozen=True)
class RSTNode:
    span: Span
    nuclearity: str | None = None
    relation: str | None = None
    children: tuple[RSTNode, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def length(self) -> int:
        """Number of EDUs subsumed by this node."""
        return self.span[1] - self.span[0] + 1

    def iter_nodes(self) -> Iterator[RSTNode]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            current = stack.pop()
            yield current
            stack.extend(reversed(current.children))


@dataclass(frozen=True)
class RSTTree:
    root: RSTNode

    @property
    def n_edus(self) -> int:
        return sum(1 for n in self.root.iter_nodes() if n.is_leaf)

    def nodes(self) -> Iterator[RSTNode]:
        return self.root.iter_nodes()

    def internal_nodes(self) -> Iterator[RSTNode]:
        return (n for n in self.root.iter_nodes() if not n.is_leaf)

    def __str__(self) -> str:
        return serialize_tree(self)


def leaf(index: int) -> RSTNode:
    return RSTNode(span=(index, index))


def node(nuclearity: str, relation: str, left: RSTNode, right: RSTNode) -> RSTNode:
    """Build an internal node whose span covers both children."""
    return RSTNode(
        span=(left.span[0], right.span[1]),
        nuclearity=nuclearity,
        relation=relation,
        children=(left, right),
    )


# ---------------------------------------------------------------------------
# Bracketed text format

_RELATION_RE = re.compile(r"^[a-z][a-z0-9_-]*$")
_NLTK_INDEX_RE = re.compile(r"at index (\d+)")


def _bracket_spans(text: str) -> list[tuple[int, int, int]]:
    """(open, label, close) offsets of every bracket pair, in pre-order.

    Only called on text nltk has already accepted, so the brackets balance.
    """
    spans: list[list[int]] = []
    stack: list[list[int]] = []
    for i, char in enumerate(text):
        if char == "(":
            label = i + 1
            while label < len(text) and text[label].isspace():
                label += 1
            entry = [i, label, -1]
            spans.append(entry)
            stack.append(entry)
        elif char == ")":
            stack.pop()[2] = i
    return [(a, b, c) for a, b, c in spans]


class _TreeReader:
    """Checks an nltk reading of the bracketed format and builds RSTNodes."""

    def __init__(self, text: str, relations: Sequence[str]):
        self.brackets = iter(_bracket_spans(text))
        self.next_leaf = 1
        self.relations = relations

    def read_node(self, tree: Tree) -> RSTNode:
        _, label_pos, close_pos = next(self.brackets)
        head = str(tree.label())
        items: list[Tree | str] = list(tree)
        if head == "leaf":
            if len(items) != 1 or not isinstance(items[0], str) or not items[0].isdigit():
                raise TreeSyntaxError("leaf number expected", label_pos)
            index = int(items[0])
            if index != self.next_leaf:
                raise NonAdjacentChildren(
                    f"leaf {index} at position {label_pos} is out of order, "
                    f"expected leaf {self.next_leaf}"
                )
            self.next_leaf += 1
            return leaf(index)
        if head not in NUCLEARITIES:
            raise TreeSyntaxError(f"unknown nuclearity {head!r}", label_pos)
        if not items or not isinstance(items[0], str):
            raise TreeSyntaxError(f"{head} node needs a relation label", label_pos)
        relation = items[0]
        if not _RELATION_RE.match(relation):
            raise TreeSyntaxError(f"malformed relation label {relation!r}", label_pos)
        if relation == SPAN_LABEL or relation not in self.relations:
            raise UnknownRelation(
                f"unknown relation {relation!r} in node at position {label_pos}"
            )
        children = items[1:]
        if any(isinstance(c, str) for c in children):
            raise TreeSyntaxError(f"stray token in {head} {relation} node", label_pos)
        subtrees = [c for c in children if isinstance(c, Tree)]
        if len(subtrees) < 2:
            # the missing child belongs where the node closes
            for subtree in subtrees:
                self.read_node(subtree)
            raise MissingChild(
                f"{head} {relation} node needs two children, found {len(subtrees)}",
                close_pos,
            )
        left = self.read_node(subtrees[0])
        right = self.read_node(subtrees[1])
        if len(subtrees) > 2:
            third, _, _ = next(self.brackets)
            raise TreeSyntaxError("internal node has more than two children", third)
        return node(head, relation, left, right)


def parse_tree_text(
    text: str,
    n_edus: int,
    relations: Sequence[str] = DEFAULT_RELATIONS,
) -> RSTTree:
    """Parse the bracketed tree format.

    Grammar: ``node := "(" NUC REL node node ")" | "(leaf" INT ")"``.
    Leaves must be numbered 1..n_edus left to right.  The bracketing itself
    is read by nltk; errors carry the character offset they were found at.
    """
    try:
        parsed = Tree.fromstring(text)
    except ValueError as e:
        first_line = str(e).splitlines()[0]
        match = _NLTK_INDEX_RE.search(str(e))
        position = int(match.group(1)) if match else len(text)
        raise TreeSyntaxError(f"malformed bracketing: {first_line}", position) from None
    reader = _TreeReader(text, relations)
    root = reader.read_node(parsed)
    leaves = reader.next_leaf - 1
    if leaves != n_edus:
        raise LeafCountMismatch(f"tree has {leaves} leaves but document has {n_edus} EDUs")
    return RSTTree(root)


def serialize_tree(tree: RSTTree) -> str:
    """Canonical single-space bracketed form."""

    def render(n: RSTNode) -> str:
        if n.is_leaf:
            return f"(leaf {n.span[0]})"
        left, right = n.children
        return f"({n.nuclearity} {n.relation} {render(left)} {render(right)})"

    return render(tree.root)


# ---------------------------------------------------------------------------
# Binarization


@dataclass(frozen=True)
class NaryNode:
    """Source-annotation node with any number of children.

    `roles` holds one "N"/"S" character per child; a leaf carries `edu`.
    """

    roles: str = ""
    relation: str | None = None
    children: tuple[NaryNode, ...] = ()
    edu: int | None = None


def binarize(nary_tree: NaryNode) -> RSTTree:
    """Right-branching binarization.

    A node with children c1..ck becomes (c1, rest) where rest binarizes
    c2..ck under the same relation.  Multinuclear nodes therefore turn into a
    right-leaning chain of NN nodes; a run of trailing satellites is joined
    as NN since it has no nucleus of its own.
    """

    def convert(n: NaryNode) -> RSTNode:
        if n.edu is not None:
            return leaf(n.edu)
        if len(n.children) < 2:
            raise ValidationError(
                f"internal node ({n.roles} {n.relation}) has {len(n.children)} "
                "children, at least 2 required"
            )
        if len(n.roles) != len(n.children) or set(n.roles) - {"N", "S"}:
            raise ValidationError(f"roles {n.roles!r} do not match the children")
        if n.relation is None:
            raise ValidationError("internal node has no relation label")
        if "N" not in n.roles:
            raise ValidationError(f"node ({n.roles} {n.relation}) has no nucleus")
        return chain(list(n.roles), [convert(c) for c in n.children], n.relation)

    def chain(roles: list[str], kids: list[RSTNode], relation: str) -> RSTNode:
        if len(kids) == 1:
            return kids[0]
        rest = chain(roles[1:], kids[1:], relation)
        rest_role = "N" if "N" in roles[1:] else "S"
        pattern = roles[0] + rest_role
        if pattern == "SS":
            pattern = "NN"
        if rest.span[0] != kids[0].span[1] + 1:
            raise NonAdjacentChildren(
                f"children {kids[0].span} and {rest.span} are not adjacent"
            )
        return node(pattern, relation, kids[0], rest)

    return RSTTree(convert(nary_tree))


# ---------------------------------------------------------------------------
# Documents


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[str, ...]
    edu_boundaries: tuple[int, ...]
    sentence_boundaries: tuple[int, ...]
    paragraph_starts: frozenset[int] = field(default_factory=lambda: frozenset({0}))
    gold_tree: RSTTree | None = None
    ndp_labels: tuple[ContentType, ...] | None = None

    @property
    def n_edus(self) -> int:
        return len(self.edu_boundaries)

    @property
    def n_sentences(self) -> int:
        return len(self.sentence_boundaries)

    def edu_token_spans(self) -> list[tuple[int, int]]:
        """(start, end) token offsets of every EDU, end-exclusive."""
        starts = (0, *self.edu_boundaries[:-1])
        return list(zip(starts, self.edu_boundaries))

    def sentence_token_spans(self) -> list[tuple[int, int]]:
        edu_spans = self.edu_token_spans()
        starts = (0, *self.sentence_boundaries[:-1])
        return [
            (edu_spans[s][0], edu_spans[e - 1][1])
            for s, e in zip(starts, self.sentence_boundaries)
        ]

    def sentence_starts(self) -> frozenset[int]:
        return frozenset((0, *self.sentence_boundaries[:-1]))

    def check(self) -> None:
        """Raise InvariantViolation unless every Document invariant holds."""
        where = f"document {self.doc_id!r}"
        if not self.tokens:
            raise InvariantViolation(f"{where}: no tokens")
        if not self.edu_boundaries or any(
            b <= a for a, b in zip((0, *self.edu_boundaries), self.edu_boundaries)
        ):
            raise InvariantViolation(f"{where}: edu_boundaries must be strictly increasing")
        if self.edu_boundaries[-1] != len(self.tokens):
            raise InvariantViolation(
                f"{where}: last EDU boundary {self.edu_boundaries[-1]} "
                f"!= token count {len(self.tokens)}"
            )
        if not self.sentence_boundaries or any(
            b <= a
            for a, b in zip((0, *self.sentence_boundaries), self.sentence_boundaries)
        ):
            raise InvariantViolation(
                f"{where}: sentence_boundaries must be strictly increasing"
            )
        if self.sentence_boundaries[-1] != self.n_edus:
            raise InvariantViolation(
                f"{where}: last sentence boundary {self.sentence_boundaries[-1]} "
                f"!= EDU count {self.n_edus}"
            )
        if 0 not in self.paragraph_starts:
            raise InvariantViolation(f"{where}: paragraph_starts must contain 0")
        stray = self.paragraph_starts - self.sentence_starts()
        if stray:
            raise InvariantViolation(
                f"{where}: paragraph starts {sorted(stray)} are not sentence starts"
            )
        if self.gold_tree is not None:
            violations = validate(self.gold_tree, self)
            if violations:
                raise InvariantViolation(f"{where}: {violations[0].message}")
        if self.ndp_labels is not None and len(self.ndp_labels) != self.n_sentences:
            raise CountMismatch(
                f"{where}: {len(self.ndp_labels)} NDP labels "
                f"for {self.n_sentences} sentences"
            )


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    kind: str
    span: Span | None
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def validate(
    tree: RSTTree,
    doc: Document,
    relations: Sequence[str] | None = None,
) -> list[Violation]:
    """Return every broken tree invariant; an empty list means the tree is valid."""
    violations: list[Violation] = []
    inventory = frozenset(relations) if relations is not None else None
    n_leaves = 0
    for n in tree.nodes():
        first, last = n.span
        if n.is_leaf:
            n_leaves += 1
            if first != last:
                violations.append(
                    Violation("LeafSpan", n.span, f"leaf span {n.span} covers several EDUs")
                )
            continue
        if len(n.children) != 2:
            violations.append(
                Violation("Arity", n.span, f"node {n.span} has {len(n.children)} children")
            )
            continue
        if n.nuclearity not in NUCLEARITIES:
            violations.append(
                Violation("BadNuclearity", n.span, f"node {n.span}: {n.nuclearity!r}")
            )
        if n.relation is None or n.relation == SPAN_LABEL or (
            inventory is not None and n.relation not in inventory
        ):
            violations.append(
                Violation("UnknownRelation", n.span, f"node {n.span}: {n.relation!r}")
            )
        left, right = n.children
        if left.span[1] + 1 != right.span[0]:
            violations.append(
                Violation(
                    "NonAdjacentChildren",
                    n.span,
                    f"children {left.span} and {right.span} of {n.span} are not adjacent",
                )
            )
        elif left.span[0] != first or right.span[1] != last:
            violations.append(
                Violation(
                    "SpanMismatch",
                    n.span,
                    f"children {left.span}+{right.span} do not cover {n.span}",
                )
            )
    if tree.root.span[0] != 1:
        violations.append(
            Violation("SpanMismatch", tree.root.span, "root span must start at EDU 1")
        )
    if n_leaves != doc.n_edus or tree.root.span[1] != doc.n_edus:
        violations.append(
            Violation(
                "LeafCountMismatch",
                tree.root.span,
                f"tree has {n_leaves} leaves but document has {doc.n_edus} EDUs",
            )
        )
    return violations


# ---------------------------------------------------------------------------
# Constituents


class Convention(StrEnum):
    ORIG = "orig"
    RST = "rst"


@dataclass(frozen=True, order=True)
class LabeledConstituent:
    span: Span
    nuclearity_tag: str
    relation_tag: str


def constituents(
    tree: RSTTree,
    convention: Convention,
    include_root: bool = True,
) -> frozenset[LabeledConstituent]:
    """Labeled constituents under the Original- or RST-Parseval convention.

    ORIG: one per internal node, tagged with its child pattern and relation.
    RST: one per non-root node, tagged with its role under the parent; the
    relation goes to satellites and multinuclear children, mononuclear nuclei
    get "span".
    """
    found: set[LabeledConstituent] = set()
    if convention == Convention.ORIG:
        for n in tree.internal_nodes():
            if n is tree.root and not include_root:
                continue
            assert n.nuclearity is not None and n.relation is not None
            found.add(LabeledConstituent(n.span, n.nuclearity, n.relation))
        return frozenset(found)

    for parent in tree.internal_nodes():
        assert parent.nuclearity is not None and parent.relation is not None
        for role, child in zip(parent.nuclearity, parent.children):
            if role == "S" or parent.nuclearity == "NN":
                relation = parent.relation
            else:
                relation = SPAN_LABEL
            found.add(LabeledConstituent(child.span, role, relation))
    return frozenset(found)


# ---------------------------------------------------------------------------
# Relation collapsing

_COLLAPSE_RULES = [
    (re.compile(r"^attribution"), "attribution"),
    (re.compile(r"^(background|circumstance)"), "background"),
    (re.compile(r"^(cause|result|consequence)"), "cause"),
    (re.compile(r"^(comparison|preference|analogy|proportion)"), "comparison"),
    (re.compile(r"^(condition|hypothetical|contingency|otherwise)"), "condition"),
    (re.compile(r"^(contrast|concession|antithesis)"), "contrast"),
    (re.compile(r"^(elaboration|example|definition)"), "elaboration"),
    (re.compile(r"^(purpose|enablement)"), "enablement"),
    (re.compile(r"^(evaluation|interpretation|conclusion|comment)"), "evaluation"),
    (re.compile(r"^(evidence|explanation|reason)"), "explanation"),
    (re.compile(r"^(list|disjunction)"), "joint"),
    (re.compile(r"^(manner|means)"), "manner-means"),
    (
        re.compile(
            r"^(problem-solution|question-answer|statement-response|topic-comment"
            r"|comment-topic|rhetorical-question)"
        ),
        "topic-comment",
    ),
    (re.compile(r"^(summary|restatement)"), "summary"),
    (re.compile(r"^(temporal|sequence|inverted-sequence)"), "temporal"),
    (re.compile(r"^topic-"), "topic-change"),
    (re.compile(r"^same-unit"), "same-unit"),
    (re.compile(r"^textual"), "textual-organization"),
]


def collapse_relation(name: str, relations: Sequence[str] = DEFAULT_RELATIONS) -> str:
    """Map a fine-grained relation name onto the coarse inventory."""
    label = name.strip().lower()
    if label in relations:
        return label
    for pattern, coarse in _COLLAPSE_RULES:
        if pattern.search(label) and coarse in relations:
            return coarse
    raise UnknownRelation(f"cannot map relation {name!r} onto the inventory")


def _collapse_tree(tree: RSTTree, relations: Sequence[str]) -> RSTTree:
    def walk(n: RSTNode) -> RSTNode:
        if n.is_leaf:
            return n
        assert n.nuclearity is not None and n.relation is not None
        left, right = n.children
        return node(
            n.nuclearity,
            collapse_relation(n.relation, relations),
            walk(left),
            walk(right),
        )

    return RSTTree(walk(tree.root))


# ---------------------------------------------------------------------------
# Native corpus format


def _int_list(record: dict[str, Any], doc_id: str, key: str) -> tuple[int, ...]:
    value = record.get(key)
    if not isinstance(value, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value  # type: ignore[reportUnknownVariableType]
    ):
        raise MalformedRecord(doc_id, key, "expected a list of integers")
    return tuple(value)  # type: ignore[reportUnknownArgumentType]


def document_from_record(
    record: dict[str, Any],
    relations: Sequence[str] = DEFAULT_RELATIONS,
    collapse: bool = False,
) -> Document:
    """Build and check a Document from one decoded line of the native format."""
    from .ndp_corpus import parse_content_type

    doc_id = record.get("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise MalformedRecord(str(doc_id), "doc_id", "expected a non-empty string")
    tokens = record.get("tokens")
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):  # type: ignore[reportUnknownVariableType]
        raise MalformedRecord(doc_id, "tokens", "expected a list of strings")
    edu_boundaries = _int_list(record, doc_id, "edu_boundaries")
    sentence_boundaries = _int_list(record, doc_id, "sentence_boundaries")
    paragraph_starts = frozenset(_int_list(record, doc_id, "paragraph_starts"))

    gold_tree = None
    tree_text = record.get("tree")
    if tree_text is not None:
        if not isinstance(tree_text, str):
            raise MalformedRecord(doc_id, "tree", "expected a bracketed tree string")
        try:
            if collapse:
                gold_tree = _collapse_tree(
                    parse_tree_text(tree_text, len(edu_boundaries), _AnyRelation()),
                    relations,
                )
            else:
                gold_tree = parse_tree_text(tree_text, len(edu_boundaries), relations)
        except ValidationError as e:
            raise MalformedRecord(doc_id, "tree", str(e)) from e

    ndp_labels = None
    raw_labels = record.get("ndp_labels")
    if raw_labels is not None:
        if not isinstance(raw_labels, list):
            raise MalformedRecord(doc_id, "ndp_labels", "expected a list of strings")
        ndp_labels = tuple(
            parse_content_type(str(label), doc_id=doc_id, sentence=i)
            for i, label in enumerate(raw_labels)  # type: ignore[reportUnknownArgumentType]
        )

    doc = Document(
        doc_id=doc_id,
        tokens=tuple(tokens),  # type: ignore[reportUnknownArgumentType]
        edu_boundaries=edu_boundaries,
        sentence_boundaries=sentence_boundaries,
        paragraph_starts=paragraph_starts,
        gold_tree=gold_tree,
        ndp_labels=ndp_labels,
    )
    doc.check()
    return doc


class _AnyRelation(Sequence[str]):
    """Inventory accepting every well-formed label, used before collapsing."""

    def __contains__(self, value: object) -> bool:
        return isinstance(value, str) and value != SPAN_LABEL

    def __len__(self) -> int:
        return 0

    def __getitem__(self, index: Any) -> Any:
        raise IndexError(index)

    def __iter__(self) -> Iterator[str]:
        return iter(())


def document_to_record(doc: Document, tree: RSTTree | None = None) -> dict[str, Any]:
    """Inverse of document_from_record; `tree` overrides the stored gold tree."""
    record: dict[str, Any] = {
        "doc_id": doc.doc_id,
        "tokens": list(doc.tokens),
        "edu_boundaries": list(doc.edu_boundaries),
        "sentence_boundaries": list(doc.sentence_boundaries),
        "paragraph_starts": sorted(doc.paragraph_starts),
    }
    out_tree = tree if tree is not None else doc.gold_tree
    if out_tree is not None:
        record["tree"] = serialize_tree(out_tree)
    if doc.ndp_labels is not None:
        record["ndp_labels"] = [label.name for label in doc.ndp_labels]
    return record


def _corpus_files(path: Path) -> list[Path]:
    if not path.exists():
        raise FileNotFoundError(f"Corpus path does not exist: {path}")
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".jsonl")
        if not files:
            raise FileNotFoundError(f"No .jsonl files in corpus directory: {path}")
        return files
    return [path]


async def _load_file(
    path: Path,
    relations: Sequence[str],
    collapse: bool,
) -> list[Document]:
    lines = await async_readlines(str(path))
    docs: list[Document] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedRecord(f"{path.name}:{lineno}", "<line>", str(e)) from e
        if not isinstance(record, dict):
            raise MalformedRecord(f"{path.name}:{lineno}", "<line>", "expected an object")
        docs.append(document_from_record(record, relations, collapse))  # type: ignore[reportUnknownArgumentType]
    log.debug(f"Read {len(docs)} documents from {path}")
    return docs


def resolve_data_path(path: str | os.PathLike[str]) -> Path:
    """Relative corpus paths are taken under $C2RNET_DATA_DIR when it is set."""
    candidate = Path(path)
    data_dir = os.environ.get("C2RNET_DATA_DIR")
    if not candidate.is_absolute() and data_dir and not candidate.exists():
        return Path(data_dir) / candidate
    return candidate


def load_corpus(
    path: str | os.PathLike[str],
    relations: Sequence[str] = DEFAULT_RELATIONS,
    collapse: bool = False,
) -> list[Document]:
    """Load every document under `path` (a .jsonl file or a directory of them).

    Files are read concurrently; the result is sorted by doc_id.
    """
    files = _corpus_files(resolve_data_path(path))
    results: dict[Path, list[Document]] = {}

    async def load_one(p: Path) -> None:
        results[p] = await _load_file(p, relations, collapse)

    async def load_all() -> None:
        async with anyio.create_task_group() as tg:
            for p in files:
                tg.start_soon(load_one, p)

    try:
        anyio.run(load_all)
    except BaseExceptionGroup as group:
        # surface the first failure as a plain exception
        raise _first_leaf(group) from None

    docs = [doc for p in files for doc in results[p]]
    docs.sort(key=lambda d: d.doc_id)
    for a, b in zip(docs, docs[1:]):
        if a.doc_id == b.doc_id:
            raise DocSetMismatch(f"duplicate doc_id {a.doc_id!r} in {path}")
    log.info(f"Loaded {len(docs)} documents from {path}")
    return docs


def _first_leaf(group: BaseExceptionGroup[BaseException]) -> BaseException:
    first = group.exceptions[0]
    while isinstance(first, BaseExceptionGroup):
        first = first.exceptions[0]  # type: ignore[reportUnknownMemberType]
    return first  # type: ignore[reportUnknownVariableType]


def write_corpus(
    path: str | os.PathLike[str],
    docs: Iterable[Document],
    trees: dict[str, RSTTree] | None = None,
) -> None:
    """Write documents in the native format, optionally with predicted trees."""
    lines: list[str] = []
    for doc in docs:
        tree = trees.get(doc.doc_id) if trees is not None else None
        record = document_to_record(doc, tree)
        lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    content = "".join(line + "\n" for line in lines)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    anyio.run(async_write_text, str(path), content)


def split_dev(
    docs: Sequence[Document], n_dev: int, seed: int
) -> tuple[list[Document], list[Document]]:
    """Carve a development set of `n_dev` documents out of `docs`."""
    if not 0 <= n_dev <= len(docs):
        raise ValidationError(f"cannot take {n_dev} dev documents from {len(docs)}")
    ordered = sorted(docs, key=lambda d: d.doc_id)
    picked = set(random.Random(seed).sample(range(len(ordered)), n_dev))
    train = [d for i, d in enumerate(ordered) if i not in picked]
    dev = [d for i, d in enumerate(ordered) if i in picked]
    return train, dev
