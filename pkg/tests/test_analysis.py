#!/usr/bin/env python3

import random
import unittest

from c2rnet.analysis import (
    compare_span_groups,
    compare_thresholds,
    format_span_groups,
    format_thresholds,
    span_group_accuracy,
    span_group_proportions,
    threshold_table,
)
from c2rnet.errors import DocSetMismatch
from c2rnet.testing import C2RNetTestCase, sample_tree, random_tree
from c2rnet.treebank import RSTTree, leaf, node


def _fixture() -> tuple[dict[str, RSTTree], dict[str, RSTTree]]:
    """Three documents, ten gold internal nodes, four errors."""
    gold = {
        "a": sample_tree(),
        "b": RSTTree(
            node(
                "NS",
                "elaboration",
                leaf(1),
                node(
                    "NN",
                    "joint",
                    leaf(2),
                    node("SN", "attribution", leaf(3), leaf(4)),
                ),
            )
        ),
        "c": RSTTree(
            node(
                "NS",
                "elaboration",
                leaf(1),
                node(
                    "NN",
                    "joint",
                    leaf(2),
                    node(
                        "NN",
                        "joint",
                        leaf(3),
                        node("NN", "joint", leaf(4), node("NN", "joint", leaf(5), leaf(6))),
                    ),
                ),
            )
        ),
    }
    pred = {
        "a": sample_tree(),
        # root nuclearity flipped, (3, 4) relation wrong
        "b": RSTTree(
            node(
                "SN",
                "elaboration",
                leaf(1),
                node(
                    "NN",
                    "joint",
                    leaf(2),
                    node("SN", "elaboration", leaf(3), leaf(4)),
                ),
            )
        ),
        # (2, 6) replaced by (1, 2)
        "c": RSTTree(
            node(
                "NS",
                "elaboration",
                node("NN", "joint", leaf(1), leaf(2)),
                node(
                    "NN",
                    "joint",
                    leaf(3),
                    node("NN", "joint", leaf(4), node("NN", "joint", leaf(5), leaf(6))),
                ),
            )
        ),
    }
    return pred, gold


class TestSpanGroups(C2RNetTestCase):
    def test_identity(self):
        _, gold = _fixture()
        report = span_group_accuracy(gold, gold)
        for group in report.groups:
            self.assertEqual((group.nuclearity, group.relation), (100.0, 100.0))

    def test_fixture(self):
        pred, gold = _fixture()
        report = span_group_accuracy(pred, gold)
        self.assertEqual([g.label for g in report.groups], ["2", "3-5", ">5"])
        self.assertEqual([g.count for g in report.groups], [3, 6, 1])
        self.assertEqual(report.total, 10)
        self.assertEqual([g.nuclearity_correct for g in report.groups], [3, 4, 1])
        self.assertEqual([g.relation_correct for g in report.groups], [2, 5, 1])
        self.assertAlmostEqual(report.groups[1].nuclearity or 0.0, 400 / 6)

    def test_nuclearity_flip_costs_one_node(self):
        pred, gold = _fixture()
        pred = {**gold, "b": pred["b"]}
        middle = span_group_accuracy(pred, gold).groups[1]
        self.assertEqual(middle.count - middle.nuclearity_correct, 1)
        self.assertAlmostEqual(middle.nuclearity or 0.0, 100.0 - 100.0 / middle.count)

    def test_empty_group_is_undefined(self):
        gold = {"a": sample_tree()}
        report = span_group_accuracy(gold, gold)
        self.assertIsNone(report.groups[2].nuclearity)
        self.assertEqual(report.to_dict()["groups"][2], {
            "label": ">5", "count": 0, "nuclearity": None, "relation": None,
        })

    def test_pred_basis(self):
        pred, gold = _fixture()
        report = span_group_accuracy(pred, gold, basis="pred")
        self.assertEqual(report.basis, "pred")
        # predicted (1, 2) counts against the prediction; gold (2, 6) does not
        self.assertEqual([g.count for g in report.groups], [4, 5, 1])

    def test_misaligned(self):
        pred, gold = _fixture()
        del pred["c"]
        with self.assertRaises(DocSetMismatch):
            span_group_accuracy(pred, gold)

    def test_proportions(self):
        _, gold = _fixture()
        self.assertEqual(
            span_group_proportions(gold), {"2": 30.0, "3-5": 60.0, ">5": 10.0}
        )

    def test_format_with_baseline(self):
        pred, gold = _fixture()
        baseline = span_group_accuracy(gold, gold)
        report = span_group_accuracy(pred, gold)
        diffs = compare_span_groups(baseline, report)
        self.assertAlmostEqual(diffs[0].relation or 0.0, -100 / 3)
        self.assertExpectedInline(
            format_span_groups(report, "c2rnet", baseline),
            """\
                                   2         3-5          >5
                           Nuc   Rel   Nuc   Rel   Nuc   Rel
baseline                 100.0 100.0 100.0 100.0 100.0 100.0
c2rnet                   100.0  66.7  66.7  83.3 100.0 100.0
difference                 0.0 -33.3 -33.3 -16.7   0.0   0.0
gold nodes                         3           6           1""",
        )


class TestThresholds(C2RNetTestCase):
    def test_fixture(self):
        pred, gold = _fixture()
        report = threshold_table(pred, gold, thresholds=(3, 4, 5, 6))
        rows = {r.threshold: r for r in report.rows}
        self.assertEqual((rows[3].above.count, rows[3].at_or_below.count), (4, 6))
        self.assertEqual((rows[3].above.nuclearity, rows[3].above.relation), (50.0, 75.0))
        self.assertEqual(rows[4].at_or_below.nuclearity, 87.5)
        self.assertIsNone(rows[6].above.nuclearity)
        self.assertEqual(rows[6].at_or_below.nuclearity, 80.0)
        self.assertExpectedInline(
            format_thresholds(report, "c2rnet"),
            """\
Nuclearity
Threshold                        3     4     5     6
c2rnet (>)                    50.0  50.0 100.0   n/a
c2rnet (<=)                  100.0  87.5  77.8  80.0

Relation
Threshold                        3     4     5     6
c2rnet (>)                    75.0  50.0 100.0   n/a
c2rnet (<=)                   83.3  87.5  77.8  80.0""",
        )

    def test_weighted_consistency(self):
        rng = random.Random(9)
        gold = {f"d{i}": random_tree(rng.randint(2, 16), rng) for i in range(15)}
        pred = {k: random_tree(v.n_edus, rng) for k, v in gold.items()}
        overall = threshold_table(pred, gold, thresholds=(100,)).rows[0].at_or_below
        for row in threshold_table(pred, gold).rows:
            self.assertEqual(row.above.count + row.at_or_below.count, overall.count)
            for attr in ("nuclearity", "relation"):
                weighted = sum(
                    side.count * (getattr(side, attr) or 0.0) / 100.0
                    for side in (row.above, row.at_or_below)
                )
                self.assertAlmostEqual(
                    weighted, getattr(overall, f"{attr}_correct"), places=9
                )

    def test_compare(self):
        pred, gold = _fixture()
        baseline = threshold_table(gold, gold, thresholds=(3, 6))
        system = threshold_table(pred, gold, thresholds=(3, 6))
        diffs = compare_thresholds(baseline, system)
        self.assertEqual(diffs[0].above.nuclearity, -50.0)
        self.assertIsNone(diffs[1].above.nuclearity)
        with self.assertRaises(ValueError):
            compare_thresholds(baseline, threshold_table(gold, gold, thresholds=(4, 6)))


if __name__ == "__main__":
    unittest.main()
