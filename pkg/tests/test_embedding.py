#!/usr/bin/env python3

import json
import unittest

import numpy as np
import torch

from c2rnet.embedding import (
    HashEmbeddingProvider,
    embed_document,
    hash_embed,
    load_precomputed,
    write_precomputed,
)
from c2rnet.errors import DimensionMismatch, MalformedRecord, MissingEmbedding
from c2rnet.testing import C2RNetTestCase, make_document


class TestHashEmbed(C2RNetTestCase):
    def test_deterministic_and_bounded(self):
        a = hash_embed("market", 16, seed=3)
        b = hash_embed("market", 16, seed=3)
        self.assertEqual(a.shape, (16,))
        np.testing.assert_array_equal(a, b)
        self.assertTrue(np.all(a >= -1.0) and np.all(a <= 1.0))

    def test_depends_on_token_and_seed(self):
        base = hash_embed("market", 8, seed=0)
        self.assertFalse(np.array_equal(base, hash_embed("markets", 8, seed=0)))
        self.assertFalse(np.array_equal(base, hash_embed("market", 8, seed=1)))

    def test_prefix_of_larger_dim(self):
        np.testing.assert_array_equal(
            hash_embed("rose", 4, seed=0), hash_embed("rose", 10, seed=0)[:4]
        )

    def test_any_int_seed(self):
        for seed in [2**127, -(2**127) - 1, 10**40]:
            with self.subTest(seed=seed):
                self.assertEqual(hash_embed("x", 4, seed=seed).shape, (4,))
        # seeds in the signed 128-bit range are unaffected by the reduction
        np.testing.assert_array_equal(
            hash_embed("x", 4, seed=-1), hash_embed("x", 4, seed=2**128 - 1)
        )

    def test_bad_dim(self):
        with self.assertRaises(ValueError):
            hash_embed("x", 0, seed=0)


class TestEmbedDocument(C2RNetTestCase):
    def test_hash_provider(self):
        doc = make_document("d", [["the", "market"], ["the"]])
        matrix = embed_document(doc, HashEmbeddingProvider(6, seed=2))
        self.assertEqual(tuple(matrix.shape), (3, 6))
        self.assertEqual(matrix.dtype, torch.get_default_dtype())
        # same token, same vector
        torch.testing.assert_close(matrix[0], matrix[2])


class TestPrecomputed(C2RNetTestCase):
    def test_write_then_load(self):
        path = self.temp_path / "emb.jsonl"
        write_precomputed(
            path,
            [("d", 0, [0.5, -0.25]), ("d", 1, [1.0, 0.0]), ("e", 0, [0.0, 2.0])],
        )
        provider = load_precomputed(path)
        self.assertEqual(provider.dim, 2)
        self.assertEqual(len(provider), 3)
        doc = make_document("d", [["a"], ["b"]])
        torch.testing.assert_close(
            embed_document(doc, provider),
            torch.tensor([[0.5, -0.25], [1.0, 0.0]]),
        )

    def test_missing_token(self):
        path = self.temp_path / "emb.jsonl"
        write_precomputed(path, [("d", 0, [0.5, -0.25])])
        doc = make_document("d", [["a", "b"]])
        with self.assertRaisesRegex(MissingEmbedding, "token 1 of document 'd'"):
            embed_document(doc, load_precomputed(path))

    def test_wrong_vector_size(self):
        path = self.temp_path / "emb.jsonl"
        lines = [
            {"format": "c2rnet-embeddings", "version": 1, "dim": 3, "count": 1},
            {"doc_id": "d", "token_index": 0, "vector": [1.0, 2.0]},
        ]
        path.write_text("".join(json.dumps(x) + "\n" for x in lines))
        with self.assertRaises(DimensionMismatch):
            load_precomputed(path)

    def test_count_mismatch(self):
        path = self.temp_path / "emb.jsonl"
        lines = [
            {"format": "c2rnet-embeddings", "version": 1, "dim": 1, "count": 2},
            {"doc_id": "d", "token_index": 0, "vector": [1.0]},
        ]
        path.write_text("".join(json.dumps(x) + "\n" for x in lines))
        with self.assertRaisesRegex(MalformedRecord, "count"):
            load_precomputed(path)

    def test_not_an_embedding_file(self):
        path = self.temp_path / "emb.jsonl"
        path.write_text(json.dumps({"format": "other"}) + "\n")
        with self.assertRaisesRegex(MalformedRecord, "format"):
            load_precomputed(path)

    def test_bad_json_line(self):
        path = self.temp_path / "emb.jsonl"
        header = {"format": "c2rnet-embeddings", "version": 1, "dim": 1, "count": 1}
        path.write_text(json.dumps(header) + "\n" + '{"doc_id": "d", \n')
        with self.assertRaisesRegex(MalformedRecord, r"emb\.jsonl:2': field '<line>'"):
            load_precomputed(path)

    def test_record_fields_required(self):
        path = self.temp_path / "emb.jsonl"
        header = {"format": "c2rnet-embeddings", "version": 1, "dim": 1, "count": 1}
        for record, field in [
            ({"token_index": 0, "vector": [1.0]}, "doc_id"),
            ({"doc_id": "d", "token_index": "0", "vector": [1.0]}, "token_index"),
            ({"doc_id": "d", "token_index": 0}, "vector"),
            ([1.0], "<line>"),
        ]:
            with self.subTest(field=field):
                path.write_text(json.dumps(header) + "\n" + json.dumps(record) + "\n")
                with self.assertRaisesRegex(MalformedRecord, f"emb\\.jsonl:2': field '{field}'"):
                    load_precomputed(path)

    def test_mixed_sizes(self):
        with self.assertRaises(DimensionMismatch):
            write_precomputed(self.temp_path / "emb.jsonl", [("d", 0, [1.0]), ("d", 1, [1.0, 2.0])])


if __name__ == "__main__":
    unittest.main()
