#!/usr/bin/env python3

# Constants
NUCLEARITIES = ("NN", "NS", "SN")
SPAN_LABEL = "span"  # reserved for RST-Parseval nuclei, never stored in a tree
NUM_CONTENT_TYPES = 8
PROB_EPSILON = 1e-12  # clamp for log(0) in the cross-entropy losses
REPORT_DECIMALS = 1
FORMAT_VERSION = 1

# The 18 coarse RST-DT classes, plus "list" which the canonical example tree
# uses as a relation of its own.
DEFAULT_RELATIONS = (
    "attribution",
    "background",
    "cause",
    "comparison",
    "condition",
    "contrast",
    "elaboration",
    "enablement",
    "evaluation",
    "explanation",
    "joint",
    "list",
    "manner-means",
    "same-unit",
    "summary",
    "temporal",
    "textual-organization",
    "topic-change",
    "topic-comment",
)

# Span-length groups and thresholds used by the stratified analysis.
DEFAULT_SPAN_GROUPS: tuple[tuple[int, int | None], ...] = ((2, 2), (3, 5), (6, None))
DEFAULT_THRESHOLDS = (3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15)

__all__ = [
    "NUCLEARITIES",
    "SPAN_LABEL",
    "NUM_CONTENT_TYPES",
    "PROB_EPSILON",
    "REPORT_DECIMALS",
    "FORMAT_VERSION",
    "DEFAULT_RELATIONS",
    "DEFAULT_SPAN_GROUPS",
    "DEFAULT_THRESHOLDS",
    "round_half_away",
]


def round_half_away(value: float, decimals: int = REPORT_DECIMALS) -> float:
    """Round to `decimals` places, halves away from zero (2.25 -> 2.3)."""
    from decimal import ROUND_HALF_UP, Decimal

    quantum = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))
