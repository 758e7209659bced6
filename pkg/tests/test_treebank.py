#!/usr/bin/env python3

import random
import unittest

from c2rnet.errors import (
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
from c2rnet.testing import C2RNetTestCase, sample_tree, make_document, random_tree
from c2rnet.treebank import (
    Convention,
    LabeledConstituent,
    NaryNode,
    RSTNode,
    RSTTree,
    binarize,
    collapse_relation,
    constituents,
    leaf,
    load_corpus,
    node,
    parse_tree_text,
    serialize_tree,
    split_dev,
    validate,
)

SAMPLE_TREE = "(NS elaboration (leaf 1) (NN list (leaf 2) (leaf 3)))"


def _doc(doc_id: str, n_edus: int, tree: RSTTree | None = None):
    return make_document(doc_id, [[f"w{i}"] for i in range(n_edus)], tree=tree)


def _nary_leaf(i: int) -> NaryNode:
    return NaryNode(edu=i)


class TestTreeText(C2RNetTestCase):
    def test_parse_sample(self):
        tree = parse_tree_text(SAMPLE_TREE, 3)
        self.assertEqual(tree, sample_tree())
        self.assertEqual(tree.root.span, (1, 3))
        self.assertEqual([n.span for n in tree.internal_nodes()], [(1, 3), (2, 3)])

    def test_single_leaf(self):
        tree = parse_tree_text("(leaf 1)", 1)
        self.assertEqual(tree.root, leaf(1))
        self.assertEqual(list(tree.internal_nodes()), [])
        self.assertEqual(serialize_tree(tree), "(leaf 1)")

    def test_missing_child(self):
        with self.assertRaises(MissingChild) as cm:
            parse_tree_text("(NS elaboration (leaf 1))", 2)
        self.assertEqual(cm.exception.position, 24)

    def test_syntax_error_reports_position(self):
        with self.assertRaises(TreeSyntaxError) as cm:
            parse_tree_text("(XY elaboration (leaf 1) (leaf 2))", 2)
        self.assertEqual(cm.exception.position, 1)

    def test_bracketing_errors_report_position(self):
        cases = [
            ("(NN list (leaf 1) (leaf 2)", 26),  # unclosed, reported at the end
            ("(leaf 1) (leaf 2)", 9),
            ("(NN list (leaf 1) (leaf 2) (leaf 3))", 27),
            ("elaboration", 0),
        ]
        for text, position in cases:
            with self.assertRaises(TreeSyntaxError, msg=text) as cm:
                parse_tree_text(text, 2)
            self.assertEqual(cm.exception.position, position, text)

    def test_relation_label_required(self):
        with self.assertRaises(TreeSyntaxError) as cm:
            parse_tree_text("(NS (leaf 1) (leaf 2))", 2)
        self.assertEqual(cm.exception.position, 1)
        with self.assertRaises(TreeSyntaxError):
            parse_tree_text("(leaf one)", 1)

    def test_leaf_count_mismatch(self):
        with self.assertRaises(LeafCountMismatch):
            parse_tree_text(SAMPLE_TREE, 4)

    def test_out_of_order_leaves(self):
        with self.assertRaises(NonAdjacentChildren):
            parse_tree_text("(NN list (leaf 2) (leaf 1))", 2)

    def test_unknown_relation(self):
        with self.assertRaises(UnknownRelation):
            parse_tree_text("(NS banana (leaf 1) (leaf 2))", 2)
        with self.assertRaises(UnknownRelation):
            parse_tree_text("(NS span (leaf 1) (leaf 2))", 2)

    def test_serialize_sample(self):
        self.assertEqual(serialize_tree(sample_tree()), SAMPLE_TREE)

    def test_round_trip_random_trees(self):
        rng = random.Random(0)
        for _ in range(200):
            n = rng.randint(1, 10)
            tree = random_tree(n, rng)
            text = serialize_tree(tree)
            self.assertEqual(parse_tree_text(text, n), tree)
            self.assertEqual(serialize_tree(parse_tree_text(text, n)), text)


class TestBinarize(C2RNetTestCase):
    def test_three_child_multinuclear(self):
        tree = binarize(
            NaryNode(
                roles="NNN",
                relation="joint",
                children=(_nary_leaf(1), _nary_leaf(2), _nary_leaf(3)),
            )
        )
        self.assertEqual(
            serialize_tree(tree), "(NN joint (leaf 1) (NN joint (leaf 2) (leaf 3)))"
        )

    def test_binary_is_unchanged(self):
        tree = binarize(
            NaryNode(
                roles="NS",
                relation="elaboration",
                children=(
                    _nary_leaf(1),
                    NaryNode(
                        roles="NN",
                        relation="list",
                        children=(_nary_leaf(2), _nary_leaf(3)),
                    ),
                ),
            )
        )
        self.assertEqual(tree, sample_tree())

    def test_four_child_chain(self):
        tree = binarize(
            NaryNode(
                roles="NNNN",
                relation="list",
                children=tuple(_nary_leaf(i) for i in range(1, 5)),
            )
        )
        self.assertEqual(
            [n.span for n in tree.internal_nodes()], [(1, 4), (2, 4), (3, 4)]
        )
        self.assertEqual({n.relation for n in tree.internal_nodes()}, {"list"})
        self.assertEqual([n.span[0] for n in tree.nodes() if n.is_leaf], [1, 2, 3, 4])

    def test_too_few_children(self):
        with self.assertRaises(ValidationError):
            binarize(NaryNode(roles="N", relation="joint", children=(_nary_leaf(1),)))


class TestValidate(C2RNetTestCase):
    def test_valid(self):
        self.assertEqual(validate(sample_tree(), _doc("d", 3)), [])

    def test_leaf_count_mismatch(self):
        violations = validate(sample_tree(), _doc("d", 4))
        self.assertEqual([v.kind for v in violations], ["LeafCountMismatch"])

    def test_non_adjacent_children(self):
        bad = RSTTree(
            RSTNode(
                span=(1, 3),
                nuclearity="NN",
                relation="list",
                children=(leaf(1), leaf(3)),
            )
        )
        kinds = [v.kind for v in validate(bad, _doc("d", 3))]
        self.assertIn("NonAdjacentChildren", kinds)

    def test_relation_inventory(self):
        violations = validate(sample_tree(), _doc("d", 3), relations=["elaboration"])
        self.assertEqual([v.kind for v in violations], ["UnknownRelation"])


class TestConstituents(C2RNetTestCase):
    def test_sample_orig(self):
        self.assertEqual(
            constituents(sample_tree(), Convention.ORIG),
            {
                LabeledConstituent((1, 3), "NS", "elaboration"),
                LabeledConstituent((2, 3), "NN", "list"),
            },
        )

    def test_sample_rst(self):
        self.assertEqual(
            constituents(sample_tree(), Convention.RST),
            {
                LabeledConstituent((1, 1), "N", "span"),
                LabeledConstituent((2, 3), "S", "elaboration"),
                LabeledConstituent((2, 2), "N", "list"),
                LabeledConstituent((3, 3), "N", "list"),
            },
        )

    def test_root_flag(self):
        self.assertEqual(
            constituents(sample_tree(), Convention.ORIG, include_root=False),
            {LabeledConstituent((2, 3), "NN", "list")},
        )

    def test_single_leaf(self):
        tree = RSTTree(leaf(1))
        self.assertEqual(constituents(tree, Convention.ORIG), frozenset())
        self.assertEqual(constituents(tree, Convention.RST), frozenset())

    def test_counts(self):
        rng = random.Random(1)
        for _ in range(1000):
            n = rng.randint(1, 12)
            tree = random_tree(n, rng)
            self.assertEqual(len(constituents(tree, Convention.ORIG)), n - 1)
            self.assertEqual(len(constituents(tree, Convention.RST)), 2 * n - 2)

    def test_structurally_equal_trees(self):
        a = node("SN", "attribution", leaf(1), leaf(2))
        b = node("SN", "attribution", leaf(1), leaf(2))
        for convention in Convention:
            self.assertEqual(
                constituents(RSTTree(a), convention), constituents(RSTTree(b), convention)
            )


class TestCollapse(C2RNetTestCase):
    def test_fine_grained_names(self):
        self.assertEqual(collapse_relation("elaboration-additional"), "elaboration")
        self.assertEqual(collapse_relation("consequence-s"), "cause")
        self.assertEqual(collapse_relation("Concession"), "contrast")
        self.assertEqual(collapse_relation("topic-shift"), "topic-change")

    def test_inventory_names_map_to_themselves(self):
        self.assertEqual(collapse_relation("list"), "list")
        self.assertEqual(collapse_relation("topic-comment"), "topic-comment")

    def test_unknown(self):
        with self.assertRaises(UnknownRelation):
            collapse_relation("banana")

    def test_load_with_collapse(self):
        path = self.write_records(
            "fine.jsonl",
            [
                {
                    "doc_id": "d1",
                    "tokens": ["a", "b"],
                    "edu_boundaries": [1, 2],
                    "sentence_boundaries": [2],
                    "paragraph_starts": [0],
                    "tree": "(NS elaboration-additional (leaf 1) (leaf 2))",
                }
            ],
        )
        with self.assertRaises(MalformedRecord):
            load_corpus(path)
        (doc,) = load_corpus(path, collapse=True)
        assert doc.gold_tree is not None
        self.assertEqual(serialize_tree(doc.gold_tree), "(NS elaboration (leaf 1) (leaf 2))")


class TestDocument(C2RNetTestCase):
    def test_spans(self):
        doc = make_document(
            "d", [["a", "b"], ["c"], ["d", "e", "f"]], sentence_boundaries=[2, 3]
        )
        self.assertEqual(doc.edu_token_spans(), [(0, 2), (2, 3), (3, 6)])
        self.assertEqual(doc.sentence_token_spans(), [(0, 3), (3, 6)])
        self.assertEqual(doc.sentence_starts(), frozenset({0, 2}))

    def test_paragraph_must_start_a_sentence(self):
        with self.assertRaises(InvariantViolation):
            make_document(
                "d", [["a"], ["b"], ["c"]], sentence_boundaries=[2, 3], paragraph_starts=[0, 1]
            )

    def test_paragraph_starts_contain_zero(self):
        with self.assertRaises(InvariantViolation):
            make_document("d", [["a"], ["b"]], paragraph_starts=[1])


class TestLoadCorpus(C2RNetTestCase):
    def test_sorted_by_doc_id(self):
        docs = [_doc(name, 3, sample_tree()) for name in ("c", "a", "b")]
        path = self.write_docs("corpus/part1.jsonl", docs)
        loaded = load_corpus(path.parent)
        self.assertEqual([d.doc_id for d in loaded], ["a", "b", "c"])
        self.assertEqual(loaded[0].gold_tree, sample_tree())

    def test_directory_of_files(self):
        self.write_docs("corpus/b.jsonl", [_doc("z", 2), _doc("y", 1)])
        self.write_docs("corpus/a.jsonl", [_doc("x", 2)])
        loaded = load_corpus(self.temp_path / "corpus")
        self.assertEqual([d.doc_id for d in loaded], ["x", "y", "z"])

    def test_edu_boundary_mismatch_names_doc(self):
        path = self.write_records(
            "bad.jsonl",
            [
                {
                    "doc_id": "broken",
                    "tokens": ["a", "b", "c"],
                    "edu_boundaries": [1, 2],
                    "sentence_boundaries": [2],
                    "paragraph_starts": [0],
                }
            ],
        )
        with self.assertRaisesRegex(InvariantViolation, "broken"):
            load_corpus(path)

    def test_tree_leaf_count_mismatch(self):
        path = self.write_records(
            "bad.jsonl",
            [
                {
                    "doc_id": "d1",
                    "tokens": ["a", "b"],
                    "edu_boundaries": [1, 2],
                    "sentence_boundaries": [2],
                    "paragraph_starts": [0],
                    "tree": SAMPLE_TREE,
                }
            ],
        )
        with self.assertRaises(MalformedRecord) as cm:
            load_corpus(path)
        self.assertEqual(cm.exception.doc_id, "d1")
        self.assertEqual(cm.exception.field, "tree")

    def test_malformed_field(self):
        path = self.write_records(
            "bad.jsonl",
            [{"doc_id": "d1", "tokens": "abc", "edu_boundaries": [3]}],
        )
        with self.assertRaisesRegex(MalformedRecord, "tokens"):
            load_corpus(path)

    def test_duplicate_doc_ids(self):
        self.write_docs("corpus/a.jsonl", [_doc("x", 2)])
        self.write_docs("corpus/b.jsonl", [_doc("x", 2)])
        with self.assertRaises(DocSetMismatch):
            load_corpus(self.temp_path / "corpus")

    def test_missing_path(self):
        with self.assertRaises(FileNotFoundError):
            load_corpus(self.temp_path / "nowhere")

    def test_write_then_load(self):
        docs = [_doc("a", 3, sample_tree()), _doc("b", 1, RSTTree(leaf(1)))]
        path = self.write_docs("out.jsonl", docs)
        self.assertEqual(load_corpus(path), docs)


class TestSplitDev(C2RNetTestCase):
    def test_disjoint_and_deterministic(self):
        docs = [_doc(f"d{i}", 2) for i in range(10)]
        train, dev = split_dev(docs, 3, seed=5)
        self.assertEqual(len(dev), 3)
        self.assertEqual(len(train), 7)
        self.assertFalse({d.doc_id for d in train} & {d.doc_id for d in dev})
        self.assertEqual(split_dev(docs, 3, seed=5), (train, dev))

    def test_too_many(self):
        with self.assertRaises(ValidationError):
            split_dev([_doc("a", 1)], 2, seed=0)


if __name__ == "__main__":
    unittest.main()
