#!/usr/bin/env python3

"""End-to-end runs of the training pipeline on tiny synthetic corpora."""

import json
import unittest

from c2rnet.testing import CLITestCase, separable_ndp_corpus, synthetic_treebank
from c2rnet.treebank import load_corpus, validate

TINY_CONFIG = """\
embedding_dim = 8
h1 = 4
h2 = 4
split_hidden = 8
paragraph_dim = 2
dropout = 0.0
epochs = 2
ndp_epochs = 2
ndp_freeze_epochs = 1
learning_rate = 0.005
fusion_mode = "none"
"""


class TrainTest(CLITestCase):
    def setUp(self):
        super().setUp()
        self.config = self.temp_path / "tiny.toml"
        self.config.write_text(TINY_CONFIG)
        self.train = self.write_docs(
            "train.jsonl", synthetic_treebank(4, seed=0, min_edus=3, max_edus=5)
        )
        self.test = self.write_docs(
            "test.jsonl", synthetic_treebank(3, seed=7, min_edus=3, max_edus=5)
        )

    def _train_parse_score(self, name: str) -> tuple[bytes, bytes]:
        run = self.temp_path / name
        self.run_cli_assert_success(
            "train-rst", "--config", self.config, "--train", self.train, "--out", run
        )
        self.run_cli_assert_success(
            "parse",
            "--config",
            self.config,
            "--input",
            self.test,
            "--checkpoint",
            run / "c2rnet.ckpt",
            "--out",
            run,
        )
        self.run_cli_assert_success(
            "score",
            "--pred",
            run / "predictions.jsonl",
            "--gold",
            self.test,
            "--out",
            run,
        )
        return (run / "predictions.jsonl").read_bytes(), (run / "report.json").read_bytes()

    def test_runs_are_reproducible(self):
        first = self._train_parse_score("run1")
        second = self._train_parse_score("run2")
        self.assertEqual(first, second)

        gold = {d.doc_id: d for d in load_corpus(self.test)}
        for doc in load_corpus(self.temp_path / "run1" / "predictions.jsonl"):
            assert doc.gold_tree is not None
            self.assertEqual(validate(doc.gold_tree, gold[doc.doc_id]), [])

    def test_evaluates_test_corpus(self):
        out = self.temp_path / "run"
        stdout = self.run_cli_assert_success(
            "train-rst",
            "--config",
            self.config,
            "--train",
            self.train,
            "--test",
            self.test,
            "--out",
            out,
        )
        self.assertIn("System       Metric        S      N      R      F", stdout)
        self.assertIn("Nuclearity", stdout)
        report = json.loads((out / "report.json").read_text())
        self.assertEqual(report["runs"], 1)
        epochs = [
            json.loads(line)["epoch"]
            for line in (out / "run_log.jsonl").read_text().splitlines()
        ]
        self.assertEqual(epochs, [1, 2])

    def test_ndp_transfer_and_probe(self):
        ndp_train = self.write_docs(
            "ndp_train.jsonl", separable_ndp_corpus(4, seed=0).documents
        )
        ndp_test = self.write_docs(
            "ndp_test.jsonl", separable_ndp_corpus(2, seed=1).documents
        )
        ndp_out = self.temp_path / "ndp"
        stdout = self.run_cli_assert_success(
            "train-ndp",
            "--config",
            self.config,
            "--ndp-train",
            ndp_train,
            "--ndp-test",
            ndp_test,
            "--out",
            ndp_out,
        )
        self.assertTrue(stdout.startswith("NDP test accuracy"))

        rst_out = self.temp_path / "rst"
        self.run_cli_assert_success(
            "train-rst",
            "--config",
            self.config,
            "--train",
            self.train,
            "--ndp-checkpoint",
            ndp_out / "ndp.ckpt",
            "--fusion-mode",
            "ndp-embedding",
            "--out",
            rst_out,
        )
        stdout = self.run_cli_assert_success(
            "probe",
            "--config",
            self.config,
            "--checkpoint",
            rst_out / "c2rnet.ckpt",
            "--ndp-checkpoint",
            ndp_out / "ndp.ckpt",
            "--ndp-test",
            ndp_test,
            "--out",
            rst_out,
        )
        self.assertRegex(stdout, r"original NDP accuracy +\d+\.\d\nprobed NDP accuracy +\d+\.\d")
        report = json.loads((rst_out / "report.json").read_text())
        self.assertEqual(sum(report["labels"].values()), report["sentences"])

    def test_overlapping_rst_splits(self):
        message = self.run_cli_assert_error(
            "train-rst", "--config", self.config, "--train", self.train, "--test", self.train
        )
        self.assertExpectedInline(
            message,
            """error: doc_id 'syn000' is in both the training corpus and the test corpus""",
        )

    def test_overlapping_ndp_splits(self):
        corpus = self.write_docs("ndp.jsonl", separable_ndp_corpus(3, seed=0).documents)
        message = self.run_cli_assert_error(
            "train-ndp", "--config", self.config, "--ndp-train", corpus, "--ndp-test", corpus
        )
        self.assertExpectedInline(
            message,
            """error: doc_id 'ndp000' is in both the training corpus and the test corpus""",
        )

    def test_malformed_embedding_file(self):
        vectors = self.temp_path / "vectors.jsonl"
        header = {"format": "c2rnet-embeddings", "version": 1, "dim": 8, "count": 1}
        record = {"token_index": 0, "vector": [0.0] * 8}
        vectors.write_text(json.dumps(header) + "\n" + json.dumps(record) + "\n")
        self.config.write_text(TINY_CONFIG + f"embeddings_path = {json.dumps(str(vectors))}\n")
        message = self.run_cli_assert_error(
            "train-rst", "--config", self.config, "--train", self.train
        )
        self.assertExpectedInline(
            message,
            """error: malformed record '/tmp/test_dir/vectors.jsonl:2': field 'doc_id': expected a non-empty string""",
        )

    def test_fusion_without_ndp_checkpoint(self):
        message = self.run_cli_assert_error(
            "train-rst",
            "--config",
            self.config,
            "--train",
            self.train,
            "--fusion-mode",
            "ndp-one-hot",
        )
        self.assertIn("NDP", message)

    def test_seeds(self):
        out = self.temp_path / "seeds"
        stdout = self.run_cli_assert_success(
            "train-rst",
            "--config",
            self.config,
            "--train",
            self.train,
            "--test",
            self.test,
            "--seeds",
            "1,2",
            "--out",
            out,
        )
        self.assertTrue(stdout.startswith("averaged over 2 runs (seeds 1,2)"))
        self.assertTrue((out / "c2rnet-seed1.ckpt").exists())
        self.assertTrue((out / "c2rnet-seed2.ckpt").exists())
        self.assertEqual(json.loads((out / "report.json").read_text())["seeds"], [1, 2])

    def test_bad_seeds(self):
        message = self.run_cli_assert_error(
            "train-rst", "--config", self.config, "--train", self.train, "--seeds", "1,x"
        )
        self.assertIn("comma-separated integers", message)

    def test_seeds_need_test_corpus(self):
        message = self.run_cli_assert_error(
            "train-rst", "--config", self.config, "--train", self.train, "--seeds", "1"
        )
        self.assertExpectedInline(
            message, """error: --seeds needs a test corpus to average over"""
        )


if __name__ == "__main__":
    unittest.main()
