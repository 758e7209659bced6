#!/usr/bin/env python3

import unittest

from c2rnet.errors import (
    CountMismatch,
    DocSetMismatch,
    MalformedRecord,
    UnknownLabel,
    ValidationError,
)
from c2rnet.ndp_corpus import (
    ContentType,
    NDPCorpus,
    check_disjoint,
    code,
    content_types,
    from_code,
    label_distribution,
    load_ndp_corpus,
    parse_content_type,
)
from c2rnet.testing import C2RNetTestCase, make_document, separable_ndp_corpus


def _record(doc_id: str, labels: list[str]) -> dict[str, object]:
    n = len(labels)
    return {
        "doc_id": doc_id,
        "tokens": [f"t{i}" for i in range(n)],
        "edu_boundaries": list(range(1, n + 1)),
        "sentence_boundaries": list(range(1, n + 1)),
        "paragraph_starts": [0],
        "ndp_labels": labels,
    }


class TestContentType(C2RNetTestCase):
    def test_codes_are_stable(self):
        self.assertEqual(len(content_types()), 8)
        self.assertEqual(code(ContentType.MainEvent), 0)
        self.assertEqual(code(ContentType.Expectation), 7)
        for ct in content_types():
            self.assertEqual(from_code(code(ct)), ct)

    def test_unknown_code(self):
        with self.assertRaises(UnknownLabel):
            from_code(8)

    def test_parse_names(self):
        self.assertEqual(parse_content_type("PreviousEvent"), ContentType.PreviousEvent)
        with self.assertRaisesRegex(UnknownLabel, "doc7"):
            parse_content_type("Gossip", doc_id="doc7", sentence=2)


class TestLoadNDPCorpus(C2RNetTestCase):
    def test_load(self):
        path = self.write_records(
            "ndp.jsonl",
            [
                _record("b", ["MainEvent", "Evaluation"]),
                _record("a", ["Consequence", "MainEvent", "Expectation"]),
            ],
        )
        corpus = load_ndp_corpus(path)
        self.assertEqual([d.doc_id for d in corpus.documents], ["a", "b"])
        self.assertEqual(corpus.n_sentences, 5)
        self.assertEqual(
            label_distribution(corpus),
            {
                ContentType.MainEvent: 2,
                ContentType.Consequence: 1,
                ContentType.PreviousEvent: 0,
                ContentType.CurrentContext: 0,
                ContentType.HistoricalEvent: 0,
                ContentType.AnecdotalEvent: 0,
                ContentType.Evaluation: 1,
                ContentType.Expectation: 1,
            },
        )

    def test_labels_required(self):
        record = _record("a", ["MainEvent"])
        del record["ndp_labels"]
        path = self.write_records("ndp.jsonl", [record])
        with self.assertRaises(MalformedRecord):
            load_ndp_corpus(path)

    def test_unknown_label(self):
        path = self.write_records("ndp.jsonl", [_record("a", ["MainEvent", "Gossip"])])
        with self.assertRaisesRegex(UnknownLabel, "Gossip"):
            load_ndp_corpus(path)

    def test_label_count_must_match_sentences(self):
        record = _record("a", ["MainEvent", "Evaluation"])
        record["ndp_labels"] = ["MainEvent"]
        path = self.write_records("ndp.jsonl", [record])
        with self.assertRaises(CountMismatch):
            load_ndp_corpus(path)


class TestSentences(C2RNetTestCase):
    def test_sentence_spans(self):
        doc = make_document(
            "d",
            [["a", "b"], ["c"], ["d"]],
            sentence_boundaries=[2, 3],
            ndp_labels=[ContentType.MainEvent, ContentType.Evaluation],
        )
        ((got, spans, labels),) = list(NDPCorpus((doc,)).sentences())
        self.assertIs(got, doc)
        self.assertEqual(spans, [(0, 3), (3, 4)])
        self.assertEqual(labels, (ContentType.MainEvent, ContentType.Evaluation))


class TestCheckDisjoint(C2RNetTestCase):
    def test_disjoint(self):
        check_disjoint(
            [separable_ndp_corpus(3, seed=0), NDPCorpus((make_document("other", [["x"]]),))]
        )

    def test_overlap(self):
        corpus = separable_ndp_corpus(3, seed=0)
        with self.assertRaisesRegex(DocSetMismatch, "ndp000"):
            check_disjoint([corpus, corpus])

    def test_named_document_lists(self):
        docs = list(separable_ndp_corpus(2, seed=0).documents)
        extra = make_document("other", [["x"]])
        check_disjoint([docs, [extra]], ["train", "dev"])
        with self.assertRaisesRegex(DocSetMismatch, "^doc_id 'ndp001' is in both train and test$"):
            check_disjoint([docs, [extra], docs[1:]], ["train", "dev", "test"])

    def test_empty(self):
        with self.assertRaises(ValidationError):
            check_disjoint([NDPCorpus(())])


if __name__ == "__main__":
    unittest.main()
