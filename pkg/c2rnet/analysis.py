#!/usr/bin/env python3

"""Accuracy broken down by span length.

A node's span length is the number of EDUs it covers.  With the default
"gold" basis every gold internal node is checked against the predicted tree:
its nuclearity is correct if the prediction has an internal node with the
same span and child pattern, its relation if it has one with the same span
and relation.  The "pred" basis swaps the roles of the two trees.

Accuracies are percentages, or None when no node falls in the bucket.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any, Literal

from .common import DEFAULT_SPAN_GROUPS, DEFAULT_THRESHOLDS, round_half_away
from .metrics import check_aligned
from .treebank import Convention, RSTTree, constituents

__all__ = [
    "Basis",
    "SpanGroup",
    "GroupAccuracy",
    "SpanGroupReport",
    "ThresholdRow",
    "ThresholdReport",
    "GroupDifference",
    "ThresholdDifference",
    "span_group_accuracy",
    "threshold_table",
    "span_group_proportions",
    "compare_span_groups",
    "compare_thresholds",
    "format_span_groups",
    "format_thresholds",
]

Basis = Literal["gold", "pred"]

# (shortest, longest) span length, longest None for unbounded
SpanGroup = tuple[int, int | None]


def group_label(group: SpanGroup) -> str:
    low, high = group
    if high is None:
        return f">{low - 1}"
    if low == high:
        return str(low)
    return f"{low}-{high}"


def _accuracy(correct: int, count: int) -> float | None:
    return None if count == 0 else 100.0 * correct / count


@dataclass(frozen=True)
class GroupAccuracy:
    label: str
    count: int
    nuclearity_correct: int
    relation_correct: int

    @property
    def nuclearity(self) -> float | None:
        return _accuracy(self.nuclearity_correct, self.count)

    @property
    def relation(self) -> float | None:
        return _accuracy(self.relation_correct, self.count)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "count": self.count,
            "nuclearity": _rounded(self.nuclearity),
            "relation": _rounded(self.relation),
        }


@dataclass(frozen=True)
class SpanGroupReport:
    groups: tuple[GroupAccuracy, ...]
    basis: Basis

    @property
    def total(self) -> int:
        return sum(g.count for g in self.groups)

    def to_dict(self) -> dict[str, Any]:
        return {"basis": self.basis, "groups": [g.to_dict() for g in self.groups]}


@dataclass(frozen=True)
class ThresholdRow:
    threshold: int
    above: GroupAccuracy
    at_or_below: GroupAccuracy


@dataclass(frozen=True)
class ThresholdReport:
    rows: tuple[ThresholdRow, ...]
    basis: Basis

    def to_dict(self) -> dict[str, Any]:
        return {
            "basis": self.basis,
            "rows": [
                {
                    "threshold": r.threshold,
                    "above": r.above.to_dict(),
                    "at_or_below": r.at_or_below.to_dict(),
                }
                for r in self.rows
            ],
        }


def _rounded(value: float | None) -> float | None:
    return None if value is None else round_half_away(value)


def _judgements(
    pred: Mapping[str, RSTTree], gold: Mapping[str, RSTTree], basis: Basis
) -> list[tuple[int, bool, bool]]:
    """(span length, nuclearity correct, relation correct) per reference node."""
    if basis not in ("gold", "pred"):
        raise ValueError(f"unknown basis {basis!r}")
    out: list[tuple[int, bool, bool]] = []
    for doc_id in check_aligned(pred, gold):
        reference, other = gold[doc_id], pred[doc_id]
        if basis == "pred":
            reference, other = other, reference
        found = constituents(other, Convention.ORIG)
        nuc_keys = {(c.span, c.nuclearity_tag) for c in found}
        rel_keys = {(c.span, c.relation_tag) for c in found}
        for c in sorted(constituents(reference, Convention.ORIG)):
            first, last = c.span
            out.append(
                (
                    last - first + 1,
                    (c.span, c.nuclearity_tag) in nuc_keys,
                    (c.span, c.relation_tag) in rel_keys,
                )
            )
    return out


def _bucket(
    label: str, judgements: Sequence[tuple[int, bool, bool]]
) -> GroupAccuracy:
    return GroupAccuracy(
        label=label,
        count=len(judgements),
        nuclearity_correct=sum(nuc for _, nuc, _ in judgements),
        relation_correct=sum(rel for _, _, rel in judgements),
    )


def _in_group(length: int, group: SpanGroup) -> bool:
    low, high = group
    return length >= low and (high is None or length <= high)


def span_group_accuracy(
    pred: Mapping[str, RSTTree],
    gold: Mapping[str, RSTTree],
    groups: Sequence[SpanGroup] = DEFAULT_SPAN_GROUPS,
    basis: Basis = "gold",
) -> SpanGroupReport:
    judgements = _judgements(pred, gold, basis)
    return SpanGroupReport(
        groups=tuple(
            _bucket(group_label(g), [j for j in judgements if _in_group(j[0], g)])
            for g in groups
        ),
        basis=basis,
    )


def threshold_table(
    pred: Mapping[str, RSTTree],
    gold: Mapping[str, RSTTree],
    thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
    basis: Basis = "gold",
) -> ThresholdReport:
    judgements = _judgements(pred, gold, basis)
    rows = [
        ThresholdRow(
            threshold=t,
            above=_bucket(f">{t}", [j for j in judgements if j[0] > t]),
            at_or_below=_bucket(f"<={t}", [j for j in judgements if j[0] <= t]),
        )
        for t in thresholds
    ]
    return ThresholdReport(rows=tuple(rows), basis=basis)


def span_group_proportions(
    gold: Mapping[str, RSTTree],
    groups: Sequence[SpanGroup] = DEFAULT_SPAN_GROUPS,
) -> dict[str, float]:
    """Share (%) of gold internal nodes falling into each span group."""
    lengths = [
        n.length for doc_id in sorted(gold) for n in gold[doc_id].internal_nodes()
    ]
    total = len(lengths)
    return {
        group_label(g): 0.0
        if total == 0
        else 100.0 * sum(_in_group(n, g) for n in lengths) / total
        for g in groups
    }


def _difference(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return b - a


@dataclass(frozen=True)
class GroupDifference:
    label: str
    nuclearity: float | None
    relation: float | None


@dataclass(frozen=True)
class ThresholdDifference:
    threshold: int
    above: GroupDifference
    at_or_below: GroupDifference


def _group_difference(a: GroupAccuracy, b: GroupAccuracy) -> GroupDifference:
    if a.label != b.label:
        raise ValueError(f"cannot compare group {a.label!r} with {b.label!r}")
    return GroupDifference(
        label=a.label,
        nuclearity=_difference(a.nuclearity, b.nuclearity),
        relation=_difference(a.relation, b.relation),
    )


def compare_span_groups(
    baseline: SpanGroupReport, system: SpanGroupReport
) -> list[GroupDifference]:
    """Per-group gap, system minus baseline."""
    if len(baseline.groups) != len(system.groups):
        raise ValueError("reports have different span groups")
    return [_group_difference(a, b) for a, b in zip(baseline.groups, system.groups)]


def compare_thresholds(
    baseline: ThresholdReport, system: ThresholdReport
) -> list[ThresholdDifference]:
    """Per-threshold gap, system minus baseline."""
    if [r.threshold for r in baseline.rows] != [r.threshold for r in system.rows]:
        raise ValueError("reports have different thresholds")
    return [
        ThresholdDifference(
            threshold=a.threshold,
            above=_group_difference(a.above, b.above),
            at_or_below=_group_difference(a.at_or_below, b.at_or_below),
        )
        for a, b in zip(baseline.rows, system.rows)
    ]


def _cell(value: float | None) -> str:
    if value is None:
        return f"{'n/a':>6}"
    return f"{round_half_away(value):>6.1f}"


def format_span_groups(
    report: SpanGroupReport,
    system: str = "system",
    baseline: SpanGroupReport | None = None,
) -> str:
    labels = [g.label for g in report.groups]
    lines = [f"{'':<24}" + "".join(f"{label:>12}" for label in labels)]
    lines.append(f"{'':<24}" + "".join(f"{'Nuc':>6}{'Rel':>6}" for _ in labels))

    def row(name: str, cells: list[tuple[float | None, float | None]]) -> str:
        return f"{name:<24}" + "".join(_cell(n) + _cell(r) for n, r in cells)

    if baseline is not None:
        lines.append(row("baseline", [(g.nuclearity, g.relation) for g in baseline.groups]))
    lines.append(row(system, [(g.nuclearity, g.relation) for g in report.groups]))
    if baseline is not None:
        diffs = compare_span_groups(baseline, report)
        lines.append(row("difference", [(d.nuclearity, d.relation) for d in diffs]))
    lines.append(f"{'gold nodes':<24}" + "".join(f"{g.count:>12}" for g in report.groups))
    return "\n".join(lines)


def format_thresholds(
    report: ThresholdReport,
    system: str = "system",
    baseline: ThresholdReport | None = None,
) -> str:
    """Nuclearity table then relation table, one column per threshold."""
    diffs = compare_thresholds(baseline, report) if baseline is not None else None
    header = f"{'Threshold':<28}" + "".join(f"{r.threshold:>6}" for r in report.rows)
    blocks: list[str] = []
    for title, attr in (("Nuclearity", "nuclearity"), ("Relation", "relation")):
        lines = [title, header]
        systems = [(system, report)] if baseline is None else [
            ("baseline", baseline),
            (system, report),
        ]
        for name, rep in systems:
            lines.append(
                f"{name + ' (>)':<28}"
                + "".join(_cell(getattr(r.above, attr)) for r in rep.rows)
            )
            lines.append(
                f"{name + ' (<=)':<28}"
                + "".join(_cell(getattr(r.at_or_below, attr)) for r in rep.rows)
            )
        if diffs is not None:
            lines.append(
                f"{'difference (>)':<28}"
                + "".join(_cell(getattr(d.above, attr)) for d in diffs)
            )
            lines.append(
                f"{'difference (<=)':<28}"
                + "".join(_cell(getattr(d.at_or_below, attr)) for d in diffs)
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)
