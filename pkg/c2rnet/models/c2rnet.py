#!/usr/bin/env python3

"""The full parser: an RST branch optionally fed by an NDP branch.

The NDP branch runs at EDU granularity here.  In embedding mode its mixed EDU
embeddings are concatenated onto the local RST EDU vectors; in one-hot mode
its argmax content types are.
"""

import torch
from torch import nn

from ..errors import ConfigurationError
from ..treebank import Document, RSTTree, leaf
from .ndp_branch import NDPBranch
from .rst_parser import (
    FusionMode,
    LabelInventory,
    RSTParser,
    SplitDecision,
    contextualize,
    decode,
    encode_edus,
    fuse,
    rst_loss,
)

__all__ = ["C2RNet"]


class C2RNet(nn.Module):
    ndp: NDPBranch | None

    def __init__(
        self,
        dim: int,
        h1: int,
        h2: int,
        inventory: LabelInventory,
        fusion_mode: FusionMode = FusionMode.NONE,
        split_hidden: int = 64,
        paragraph_dim: int = 8,
        dropout: float = 0.5,
    ):
        super().__init__()
        self.fusion_mode = FusionMode(fusion_mode)
        self.inventory = inventory
        # RST branch first: the token encoder gets the same initial weights
        # whatever the fusion mode
        self.rst = RSTParser(
            dim,
            h1,
            h2,
            len(inventory),
            fusion_mode=self.fusion_mode,
            split_hidden=split_hidden,
            paragraph_dim=paragraph_dim,
            dropout=dropout,
        )
        if self.fusion_mode == FusionMode.NONE:
            self.ndp = None
        else:
            self.ndp = NDPBranch(dim, dropout)

    def ndp_input(self, token_matrix: torch.Tensor, doc: Document) -> torch.Tensor | None:
        """Per-EDU input from the NDP branch for the configured fusion mode."""
        if self.fusion_mode == FusionMode.NONE:
            return None
        if self.ndp is None:
            raise ConfigurationError(
                f"fusion mode {self.fusion_mode.value!r} has no NDP branch"
            )
        segments = doc.edu_token_spans()
        if self.fusion_mode == FusionMode.EMBEDDING:
            return self.ndp.segment_embeddings(token_matrix, segments).mixed
        return self.ndp(token_matrix, segments)

    def encode(self, token_matrix: torch.Tensor, doc: Document) -> torch.Tensor:
        """Contextualized EDU matrix [n_edus x 2*h2]."""
        local = encode_edus(token_matrix, doc, self.rst)
        fused = fuse(local, self.ndp_input(token_matrix, doc), self.fusion_mode)
        return contextualize(fused, self.rst)

    def loss(
        self, token_matrix: torch.Tensor, doc: Document, gold: RSTTree
    ) -> torch.Tensor:
        if doc.n_edus == 1:
            return token_matrix.new_zeros(())
        global_edus = self.encode(token_matrix, doc)
        return rst_loss(doc, gold, global_edus, self.rst, self.inventory)

    def parse(
        self,
        token_matrix: torch.Tensor,
        doc: Document,
        decisions: list[SplitDecision] | None = None,
    ) -> RSTTree:
        if doc.n_edus == 1:
            return RSTTree(leaf(1))
        with torch.no_grad():
            global_edus = self.encode(token_matrix, doc)
        return decode(doc, global_edus, self.rst, self.inventory, decisions)
