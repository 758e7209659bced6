#!/usr/bin/env python3

"""Content-structure encoder and content-type classifier.

Local attention pools the tokens of one segment with additive (tanh)
scoring; global attention is single-head scaled dot-product attention over
the sequence of local segment embeddings.  The mixed embedding is their sum.
Segments are sentences when training on NDP data and EDUs when feeding the
RST branch; the parameters are the same at both granularities.
"""

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import torch
from sklearn.metrics import f1_score  # type: ignore[reportUnknownVariableType]
from torch import nn

from ..common import NUM_CONTENT_TYPES, PROB_EPSILON
from ..errors import EmptySegment, ShapeMismatch

__all__ = [
    "NDPBranch",
    "SegmentEmbeddings",
    "NDPScore",
    "local_attention",
    "global_attention",
    "mix",
    "ndp_classify",
    "ndp_loss",
    "ndp_accuracy",
    "HEAD_PREFIX",
]

# Parameters under this prefix form the classifier head; the rest is the body.
HEAD_PREFIX = "classifier."


class NDPBranch(nn.Module):
    def __init__(self, dim: int, dropout: float = 0.5):
        super().__init__()
        self.dim = dim
        # local attention: W1, b1 and the scoring vector v
        self.local_proj = nn.Linear(dim, dim)
        self.local_score = nn.Linear(dim, 1, bias=False)
        # global attention
        self.query = nn.Linear(dim, dim, bias=False)
        self.key = nn.Linear(dim, dim, bias=False)
        self.value = nn.Linear(dim, dim, bias=False)
        self.classifier = nn.Linear(dim, NUM_CONTENT_TYPES)
        self.dropout = nn.Dropout(dropout)

    def segment_embeddings(
        self, token_matrix: torch.Tensor, segments: Sequence[tuple[int, int]]
    ) -> "SegmentEmbeddings":
        """Local, global and mixed embeddings for token ranges `segments`."""
        tokens = self.dropout(token_matrix)
        local = torch.stack([local_attention(tokens[s:e], self) for s, e in segments])
        global_ = global_attention(local, self)
        return SegmentEmbeddings(local=local, global_=global_, mixed=mix(local, global_))

    def forward(
        self, token_matrix: torch.Tensor, segments: Sequence[tuple[int, int]]
    ) -> torch.Tensor:
        """Content-type probabilities [n_segments x 8]."""
        mixed = self.segment_embeddings(token_matrix, segments).mixed
        return ndp_classify(self.dropout(mixed), self)

    def body_state(self) -> dict[str, torch.Tensor]:
        return {k: v for k, v in self.state_dict().items() if not k.startswith(HEAD_PREFIX)}

    def head_state(self) -> dict[str, torch.Tensor]:
        return {k: v for k, v in self.state_dict().items() if k.startswith(HEAD_PREFIX)}

    def load_head(self, head: Mapping[str, torch.Tensor]) -> None:
        """Swap in a classifier head trained elsewhere."""
        own = self.head_state()
        if set(head) != set(own):
            raise ShapeMismatch(f"head parameters {sorted(head)} != {sorted(own)}")
        for name, tensor in head.items():
            if tensor.shape != own[name].shape:
                raise ShapeMismatch(
                    f"{name}: head has shape {tuple(tensor.shape)}, "
                    f"body expects {tuple(own[name].shape)}"
                )
        self.load_state_dict({**self.body_state(), **head})


@dataclass(frozen=True)
class SegmentEmbeddings:
    local: torch.Tensor
    global_: torch.Tensor
    mixed: torch.Tensor


def local_attention(
    token_vectors: torch.Tensor,
    params: NDPBranch,
    return_weights: bool = False,
) -> torch.Tensor:
    """Additive attention pooling of one segment's tokens into a vector.

    u_t = tanh(W1 x_t + b1), a = softmax_t(u_t . v), output = sum_t a_t x_t.
    With `return_weights` the attention weights are returned instead.
    """
    if token_vectors.shape[0] == 0:
        raise EmptySegment("cannot attend over a segment with no tokens")
    scores = params.local_score(torch.tanh(params.local_proj(token_vectors))).squeeze(-1)
    weights = torch.softmax(scores, dim=0)
    if return_weights:
        return weights
    return weights @ token_vectors


def global_attention(
    local_segs: torch.Tensor,
    params: NDPBranch,
    return_weights: bool = False,
) -> torch.Tensor:
    """Scaled dot-product self-attention across all segments of a document."""
    if local_segs.dim() != 2 or local_segs.shape[1] != params.dim:
        raise ShapeMismatch(
            f"expected [n x {params.dim}] segment embeddings, got {tuple(local_segs.shape)}"
        )
    q = params.query(local_segs)
    k = params.key(local_segs)
    v = params.value(local_segs)
    weights = torch.softmax(q @ k.T / math.sqrt(params.dim), dim=-1)
    if return_weights:
        return weights
    return weights @ v


def mix(local: torch.Tensor, global_: torch.Tensor) -> torch.Tensor:
    if local.shape != global_.shape:
        raise ShapeMismatch(
            f"cannot mix {tuple(local.shape)} with {tuple(global_.shape)}"
        )
    return local + global_


def ndp_classify(mixed: torch.Tensor, params: NDPBranch) -> torch.Tensor:
    return torch.softmax(params.classifier(mixed), dim=-1)


def ndp_loss(probs: torch.Tensor, gold: torch.Tensor | Sequence[int]) -> torch.Tensor:
    """Mean negative log probability of the gold classes.

    Gold probabilities are clamped at 1e-12 so a zero never yields inf.
    """
    gold_idx = torch.as_tensor(gold, dtype=torch.long)
    if probs.dim() != 2 or probs.shape[0] != gold_idx.shape[0]:
        raise ShapeMismatch(
            f"{tuple(probs.shape)} probabilities for {gold_idx.shape[0]} gold labels"
        )
    picked = probs.gather(1, gold_idx.unsqueeze(1)).squeeze(1)
    return -torch.log(picked.clamp_min(PROB_EPSILON)).mean()


@dataclass(frozen=True)
class NDPScore:
    accuracy: float
    macro_f1: float
    count: int


def ndp_accuracy(
    predicted: Sequence[int] | torch.Tensor, gold: Sequence[int] | torch.Tensor
) -> NDPScore:
    """Sentence accuracy (%) and macro-F1 (%) over the eight content types.

    `predicted` may be class indices or an [n x 8] probability matrix.
    """
    pred = torch.as_tensor(predicted)
    if pred.dim() == 2:
        pred = pred.argmax(dim=-1)
    pred_list = [int(p) for p in pred.tolist()]
    gold_list = [int(g) for g in torch.as_tensor(gold).tolist()]
    if len(pred_list) != len(gold_list):
        raise ShapeMismatch(f"{len(pred_list)} predictions for {len(gold_list)} labels")
    if not gold_list:
        return NDPScore(accuracy=0.0, macro_f1=0.0, count=0)
    correct = sum(p == g for p, g in zip(pred_list, gold_list))
    # averaged over the classes that occur in gold or predictions
    macro = f1_score(
        gold_list,
        pred_list,
        average="macro",
        zero_division=0,
    )
    return NDPScore(
        accuracy=100.0 * correct / len(gold_list),
        macro_f1=100.0 * float(macro),  # type: ignore[reportArgumentType]
        count=len(gold_list),
    )
