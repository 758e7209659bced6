#!/usr/bin/env python3

"""Micro-averaged Parseval scoring.

Each column compares a different projection of the labeled constituents:
S the span, N span and nuclearity tag, R span and relation tag, F all three.
Counts are pooled over every document before the F1 is taken.
"""

import logging
from collections import Counter
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any

from .common import round_half_away
from .errors import DocSetMismatch, LeafCountMismatch, ValidationError
from .treebank import Convention, LabeledConstituent, RSTTree, constituents

__all__ = [
    "COLUMNS",
    "ColumnCounts",
    "ParsevalScore",
    "micro_f1",
    "score",
    "oracle_score",
    "check_aligned",
    "format_scores",
]

log = logging.getLogger(__name__)

COLUMNS = ("S", "N", "R", "F")

_PROJECTIONS: dict[str, Callable[[LabeledConstituent], tuple[Any, ...]]] = {
    "S": lambda c: (c.span,),
    "N": lambda c: (c.span, c.nuclearity_tag),
    "R": lambda c: (c.span, c.relation_tag),
    "F": lambda c: (c.span, c.nuclearity_tag, c.relation_tag),
}


def micro_f1(matched: int, predicted: int, gold: int) -> float:
    """F1 in percent; two empty sets score 100, exactly one empty set scores 0."""
    if matched < 0 or matched > predicted or matched > gold:
        raise ValidationError(
            f"matched count {matched} exceeds predicted {predicted} or gold {gold}"
        )
    if predicted == 0 and gold == 0:
        return 100.0
    if predicted == 0 or gold == 0:
        return 0.0
    return 100.0 * 2 * matched / (predicted + gold)


@dataclass(frozen=True)
class ColumnCounts:
    matched: int
    predicted: int
    gold: int


@dataclass(frozen=True)
class ParsevalScore:
    convention: Convention
    S: float
    N: float
    R: float
    F: float
    counts: dict[str, ColumnCounts]

    def column(self, name: str) -> float:
        return float(getattr(self, name))

    def rounded(self) -> tuple[float, float, float, float]:
        s, n, r, f = (round_half_away(self.column(c)) for c in COLUMNS)
        return (s, n, r, f)

    @property
    def vacuous(self) -> bool:
        """True when neither side had any constituent to score."""
        return all(c.predicted == 0 and c.gold == 0 for c in self.counts.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "convention": self.convention.value,
            **{c: round_half_away(self.column(c)) for c in COLUMNS},
            "counts": {
                c: {"matched": k.matched, "predicted": k.predicted, "gold": k.gold}
                for c, k in self.counts.items()
            },
        }


def check_aligned(
    pred: Mapping[str, RSTTree], gold: Mapping[str, RSTTree]
) -> list[str]:
    """Doc ids shared by both sides, sorted; raise if the sets differ."""
    missing = sorted(set(gold) - set(pred))
    extra = sorted(set(pred) - set(gold))
    if missing or extra:
        parts: list[str] = []
        if missing:
            parts.append(f"missing from predictions: {', '.join(missing)}")
        if extra:
            parts.append(f"not in gold: {', '.join(extra)}")
        raise DocSetMismatch("; ".join(parts))
    doc_ids = sorted(gold)
    for doc_id in doc_ids:
        if pred[doc_id].n_edus != gold[doc_id].n_edus:
            raise LeafCountMismatch(
                f"document {doc_id!r}: prediction has {pred[doc_id].n_edus} leaves, "
                f"gold has {gold[doc_id].n_edus}"
            )
    return doc_ids


def score(
    pred: Mapping[str, RSTTree],
    gold: Mapping[str, RSTTree],
    convention: Convention,
    include_root: bool = True,
) -> ParsevalScore:
    """Pooled S/N/R/F over all documents under one convention."""
    doc_ids = check_aligned(pred, gold)
    tallies: dict[str, list[int]] = {c: [0, 0, 0] for c in COLUMNS}
    for doc_id in doc_ids:
        p = constituents(pred[doc_id], convention, include_root)
        g = constituents(gold[doc_id], convention, include_root)
        for column, project in _PROJECTIONS.items():
            # constituents are a set, but projections of them need not be
            p_keys = Counter(project(c) for c in p)
            g_keys = Counter(project(c) for c in g)
            tally = tallies[column]
            tally[0] += sum((p_keys & g_keys).values())
            tally[1] += len(p)
            tally[2] += len(g)
    counts = {c: ColumnCounts(*t) for c, t in tallies.items()}
    f1 = {c: micro_f1(k.matched, k.predicted, k.gold) for c, k in counts.items()}
    log.debug(f"Scored {len(doc_ids)} documents under {convention.value}: {f1}")
    return ParsevalScore(convention=convention, counts=counts, **f1)


def oracle_score(
    pred: Mapping[str, RSTTree],
    gold: Mapping[str, RSTTree],
    convention: Convention,
    include_root: bool = True,
) -> ParsevalScore:
    """Brute-force reference for `score` using explicit set intersections."""
    if set(pred) != set(gold):
        raise DocSetMismatch(
            f"doc ids differ: {sorted(set(pred) ^ set(gold))}"
        )
    for doc_id in gold:
        if pred[doc_id].n_edus != gold[doc_id].n_edus:
            raise LeafCountMismatch(f"document {doc_id!r}: leaf counts differ")

    pred_items: set[tuple[str, LabeledConstituent]] = set()
    gold_items: set[tuple[str, LabeledConstituent]] = set()
    for doc_id in gold:
        pred_items |= {(doc_id, c) for c in constituents(pred[doc_id], convention, include_root)}
        gold_items |= {(doc_id, c) for c in constituents(gold[doc_id], convention, include_root)}

    def matched_on(*fields: str) -> int:
        def key(item: tuple[str, LabeledConstituent]) -> tuple[Any, ...]:
            doc_id, c = item
            return (doc_id, *(getattr(c, f) for f in fields))

        # within one document and one tree, each projection here is unique
        return len({key(i) for i in pred_items} & {key(i) for i in gold_items})

    p, g = len(pred_items), len(gold_items)
    counts = {
        "S": ColumnCounts(matched_on("span"), p, g),
        "N": ColumnCounts(matched_on("span", "nuclearity_tag"), p, g),
        "R": ColumnCounts(matched_on("span", "relation_tag"), p, g),
        "F": ColumnCounts(matched_on("span", "nuclearity_tag", "relation_tag"), p, g),
    }

    def f1(k: ColumnCounts) -> float:
        if k.predicted + k.gold == 0:
            return 100.0
        if k.predicted == 0 or k.gold == 0:
            return 0.0
        return 200.0 * k.matched / (k.predicted + k.gold)

    return ParsevalScore(
        convention=convention,
        counts=counts,
        S=f1(counts["S"]),
        N=f1(counts["N"]),
        R=f1(counts["R"]),
        F=f1(counts["F"]),
    )


def format_scores(scores: list[ParsevalScore], system: str = "system") -> str:
    """One row per convention, columns S N R F to one decimal place."""
    header = f"{'System':<12} {'Metric':<8} {'S':>6} {'N':>6} {'R':>6} {'F':>6}"
    lines = [header]
    for s in scores:
        label = "Orig" if s.convention == Convention.ORIG else "RST"
        values = " ".join(f"{v:>6.1f}" for v in s.rounded())
        lines.append(f"{system:<12} {label:<8} {values}")
    return "\n".join(lines)
