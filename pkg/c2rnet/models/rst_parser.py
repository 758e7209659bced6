#!/usr/bin/env python3

"""Top-down RST parser.

A first BiLSTM runs over the tokens of each EDU separately and is
average-pooled into local EDU vectors.  These are optionally concatenated with
per-EDU input from the NDP branch and fed to a second BiLSTM over the EDU
sequence.  Decoding starts from the whole document and greedily splits each
span at its most probable boundary, labelling the split with the most
probable (nuclearity, relation) pair.

Span indices here are 1-based and inclusive, like RSTNode spans; rows of the
EDU matrices are 0-based.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum

import torch
import torch.nn.functional as F
from torch import nn
from torch.nn.utils.rnn import pack_sequence, pad_packed_sequence

from ..common import NUCLEARITIES, NUM_CONTENT_TYPES
from ..errors import ConfigurationError, ShapeMismatch, ValidationError
from ..treebank import Document, RSTNode, RSTTree, leaf, node

__all__ = [
    "FusionMode",
    "LabelInventory",
    "RSTParser",
    "SplitDecision",
    "encode_edus",
    "fuse",
    "contextualize",
    "split_distribution",
    "label_distribution",
    "decode",
    "rst_loss",
    "fused_width",
]


class FusionMode(StrEnum):
    NONE = "none"
    EMBEDDING = "ndp-embedding"
    ONE_HOT = "ndp-one-hot"


class LabelInventory:
    """Ordered (nuclearity, relation) pairs the label head predicts.

    Pairs are kept in lexicographic order, so the lowest index wins ties.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]]):
        self.pairs: tuple[tuple[str, str], ...] = tuple(sorted(set(pairs)))
        if not self.pairs:
            raise ConfigurationError("label inventory is empty")
        for nuclearity, _ in self.pairs:
            if nuclearity not in NUCLEARITIES:
                raise ConfigurationError(f"bad nuclearity {nuclearity!r} in inventory")
        self._index = {pair: i for i, pair in enumerate(self.pairs)}

    @classmethod
    def observed(cls, trees: Iterable[RSTTree]) -> "LabelInventory":
        pairs: set[tuple[str, str]] = set()
        for tree in trees:
            for n in tree.internal_nodes():
                assert n.nuclearity is not None and n.relation is not None
                pairs.add((n.nuclearity, n.relation))
        return cls(pairs)

    @classmethod
    def full(cls, relations: Sequence[str]) -> "LabelInventory":
        return cls((nuc, rel) for nuc in NUCLEARITIES for rel in relations)

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, index: int) -> tuple[str, str]:
        return self.pairs[index]

    def index(self, nuclearity: str, relation: str) -> int:
        try:
            return self._index[(nuclearity, relation)]
        except KeyError:
            raise ConfigurationError(
                f"({nuclearity}, {relation}) is not in the label inventory"
            ) from None

    def check_trees(self, trees: Iterable[RSTTree]) -> None:
        for tree in trees:
            for n in tree.internal_nodes():
                assert n.nuclearity is not None and n.relation is not None
                self.index(n.nuclearity, n.relation)


class RSTParser(nn.Module):
    def __init__(
        self,
        dim: int,
        h1: int,
        h2: int,
        n_labels: int,
        fusion_mode: FusionMode = FusionMode.NONE,
        split_hidden: int = 64,
        paragraph_dim: int = 8,
        dropout: float = 0.5,
    ):
        super().__init__()
        self.dim = dim
        self.h1 = h1
        self.h2 = h2
        self.fusion_mode = FusionMode(fusion_mode)
        # created first so every fusion mode starts from the same token encoder
        self.token_lstm = nn.LSTM(dim, h1, bidirectional=True, batch_first=True)
        self.edu_lstm = nn.LSTM(
            fused_width(h1, dim, self.fusion_mode),
            h2,
            bidirectional=True,
            batch_first=True,
        )
        self.paragraph_embedding = nn.Embedding(2, paragraph_dim)
        self.split_scorer = nn.Sequential(
            nn.Linear(3 * 2 * h2 + paragraph_dim, split_hidden),
            nn.Tanh(),
            nn.Dropout(dropout),
            nn.Linear(split_hidden, 1),
        )
        self.label_head = nn.Linear(2 * 2 * h2, n_labels)
        self.dropout = nn.Dropout(dropout)


def fused_width(h1: int, dim: int, mode: FusionMode) -> int:
    extra = {
        FusionMode.NONE: 0,
        FusionMode.EMBEDDING: dim,
        FusionMode.ONE_HOT: NUM_CONTENT_TYPES,
    }
    return 2 * h1 + extra[mode]


@dataclass(frozen=True)
class SplitDecision:
    span: tuple[int, int]
    split_at: int
    nuclearity: str
    relation: str
    split_probs: torch.Tensor
    label_probs: torch.Tensor


def encode_edus(
    token_matrix: torch.Tensor, doc: Document, params: RSTParser
) -> torch.Tensor:
    """Run the token BiLSTM over each EDU on its own and average-pool it.

    Returns [n_edus x 2*h1].
    """
    spans = doc.edu_token_spans()
    if token_matrix.shape[0] != spans[-1][1]:
        raise ShapeMismatch(
            f"document {doc.doc_id!r} has {spans[-1][1]} tokens, "
            f"token matrix has {token_matrix.shape[0]} rows"
        )
    tokens = params.dropout(token_matrix)
    packed = pack_sequence([tokens[s:e] for s, e in spans], enforce_sorted=False)
    output, _ = params.token_lstm(packed)
    padded, lengths = pad_packed_sequence(output, batch_first=True)
    # padding rows are zero, so the sum over time is the sum over real tokens
    return padded.sum(dim=1) / lengths.unsqueeze(1).to(padded.dtype)


def fuse(
    local_rst: torch.Tensor,
    ndp_input: torch.Tensor | None,
    mode: FusionMode,
) -> torch.Tensor:
    """Concatenate NDP-branch input onto the local EDU vectors, row by row.

    In one-hot mode `ndp_input` may be class probabilities; each row is
    replaced by the one-hot vector of its argmax.
    """
    if mode == FusionMode.NONE:
        if ndp_input is not None:
            raise ShapeMismatch("fusion mode 'none' takes no NDP input")
        return local_rst
    if ndp_input is None:
        raise ShapeMismatch(f"fusion mode {mode.value!r} needs NDP input")
    if ndp_input.dim() != 2 or ndp_input.shape[0] != local_rst.shape[0]:
        raise ShapeMismatch(
            f"NDP input {tuple(ndp_input.shape)} does not match "
            f"{local_rst.shape[0]} EDUs"
        )
    if mode == FusionMode.ONE_HOT:
        if ndp_input.shape[1] != NUM_CONTENT_TYPES:
            raise ShapeMismatch(
                f"one-hot fusion needs {NUM_CONTENT_TYPES} columns, "
                f"got {ndp_input.shape[1]}"
            )
        ndp_input = F.one_hot(ndp_input.argmax(dim=-1), NUM_CONTENT_TYPES).to(
            local_rst.dtype
        )
    return torch.cat([local_rst, ndp_input], dim=-1)


def contextualize(fused: torch.Tensor, params: RSTParser) -> torch.Tensor:
    """Second BiLSTM over the EDU sequence: [n x fused_width] -> [n x 2*h2]."""
    expected = params.edu_lstm.input_size
    if fused.dim() != 2 or fused.shape[1] != expected:
        raise ShapeMismatch(f"expected [n x {expected}] input, got {tuple(fused.shape)}")
    output, _ = params.edu_lstm(params.dropout(fused).unsqueeze(0))
    return output.squeeze(0)


def _split_logits(
    span: tuple[int, int],
    global_edus: torch.Tensor,
    para_starts: frozenset[int],
    params: RSTParser,
) -> torch.Tensor:
    i, j = span
    if not 1 <= i < j <= global_edus.shape[0]:
        raise ValidationError(f"span {span} has no split point")
    candidates = torch.arange(i, j)  # split after 1-based EDU k
    left = global_edus[candidates - 1]
    right = global_edus[candidates]
    span_mean = global_edus[i - 1 : j].mean(dim=0).expand(len(candidates), -1)
    # 1-based EDU k+1 is 0-based index k
    boundary = torch.tensor(
        [int(k in para_starts) for k in range(i, j)], dtype=torch.long
    )
    features = torch.cat(
        [left, right, span_mean, params.paragraph_embedding(boundary)], dim=-1
    )
    return params.split_scorer(features).squeeze(-1)


def split_distribution(
    span: tuple[int, int],
    global_edus: torch.Tensor,
    para_starts: frozenset[int],
    params: RSTParser,
) -> torch.Tensor:
    """Probability of splitting span (i, j) after EDU k, for k = i..j-1."""
    return torch.softmax(_split_logits(span, global_edus, para_starts, params), dim=0)


def _label_logits(
    left: tuple[int, int],
    right: tuple[int, int],
    global_edus: torch.Tensor,
    params: RSTParser,
) -> torch.Tensor:
    (i, k), (k1, j) = left, right
    if not (1 <= i <= k and k1 == k + 1 and k1 <= j <= global_edus.shape[0]):
        raise ValidationError(f"spans {left} and {right} are not adjacent and in range")
    features = torch.cat(
        [global_edus[i - 1 : k].mean(dim=0), global_edus[k1 - 1 : j].mean(dim=0)]
    )
    return params.label_head(features)


def label_distribution(
    left: tuple[int, int],
    right: tuple[int, int],
    global_edus: torch.Tensor,
    params: RSTParser,
) -> torch.Tensor:
    """Joint distribution over the label inventory for two adjacent spans."""
    return torch.softmax(_label_logits(left, right, global_edus, params), dim=-1)


def decode(
    doc: Document,
    global_edus: torch.Tensor | None,
    params: RSTParser,
    inventory: LabelInventory,
    decisions: list[SplitDecision] | None = None,
) -> RSTTree:
    """Greedy top-down decoding from contextualized EDU vectors.

    Ties go to the smallest split index and the first inventory pair.  A
    single-EDU document needs no model evaluation, so `global_edus` may be
    None for it.
    """
    n = doc.n_edus
    if n == 1:
        return RSTTree(leaf(1))
    if global_edus is None or global_edus.shape[0] != n:
        raise ShapeMismatch(f"document {doc.doc_id!r} needs {n} contextualized EDUs")

    def build(i: int, j: int) -> RSTNode:
        if i == j:
            return leaf(i)
        split_probs = split_distribution((i, j), global_edus, doc.paragraph_starts, params)
        k = i + int(torch.argmax(split_probs))
        label_probs = label_distribution((i, k), (k + 1, j), global_edus, params)
        nuclearity, relation = inventory[int(torch.argmax(label_probs))]
        if decisions is not None:
            decisions.append(
                SplitDecision((i, j), k, nuclearity, relation, split_probs, label_probs)
            )
        return node(nuclearity, relation, build(i, k), build(k + 1, j))

    with torch.no_grad():
        return RSTTree(build(1, n))


def rst_loss(
    doc: Document,
    gold: RSTTree,
    global_edus: torch.Tensor,
    params: RSTParser,
    inventory: LabelInventory,
) -> torch.Tensor:
    """Teacher-forced loss over the gold internal nodes.

    Each node contributes the cross-entropy of its gold split plus that of its
    gold (nuclearity, relation) pair; the sum is divided by the node count.
    """
    terms: list[torch.Tensor] = []
    for n in gold.internal_nodes():
        assert n.nuclearity is not None and n.relation is not None
        left, right = n.children
        i, j = n.span
        k = left.span[1]
        split_logp = torch.log_softmax(
            _split_logits((i, j), global_edus, doc.paragraph_starts, params), dim=0
        )
        label_logp = torch.log_softmax(
            _label_logits(left.span, right.span, global_edus, params), dim=-1
        )
        gold_label = inventory.index(n.nuclearity, n.relation)
        terms.append(-split_logp[k - i] - label_logp[gold_label])
    if not terms:
        return global_edus.new_zeros(())
    return torch.stack(terms).sum() / len(terms)
