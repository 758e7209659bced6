#!/usr/bin/env python3

"""Versioned checkpoint files.

A checkpoint is a plain dictionary of strings, numbers, lists and tensors
written with `torch.save` and read back with `weights_only=True`, so loading
never unpickles arbitrary objects.
"""

import io
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import torch

from .common import FORMAT_VERSION
from .config import TrainingConfig
from .errors import ConfigurationError, DimensionMismatch, MalformedRecord
from .models.c2rnet import C2RNet
from .models.ndp_branch import NDPBranch
from .models.rst_parser import FusionMode, LabelInventory

__all__ = [
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "build_ndp",
    "build_c2rnet",
]

log = logging.getLogger(__name__)

CheckpointKind = Literal["ndp", "c2rnet"]


@dataclass
class Checkpoint:
    kind: CheckpointKind
    config: dict[str, Any]
    dim: int
    epoch: int = 0
    fusion_mode: str = FusionMode.NONE.value
    inventory: list[tuple[str, str]] = field(default_factory=lambda: [])
    ndp_state: dict[str, torch.Tensor] | None = None
    rst_state: dict[str, torch.Tensor] | None = None
    rng_state: torch.Tensor | None = None
    metrics: dict[str, float] = field(default_factory=lambda: {})
    version: int = FORMAT_VERSION

    @property
    def training_config(self) -> TrainingConfig:
        return TrainingConfig.from_mapping(self.config)

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "kind": self.kind,
            "config": self.config,
            "dim": self.dim,
            "epoch": self.epoch,
            "fusion_mode": self.fusion_mode,
            "inventory": [list(pair) for pair in self.inventory],
            "ndp_state": self.ndp_state,
            "rst_state": self.rst_state,
            "rng_state": self.rng_state,
            "metrics": self.metrics,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], source: str = "<checkpoint>") -> "Checkpoint":
        version = data.get("version")
        if version != FORMAT_VERSION:
            raise MalformedRecord(source, "version", f"unsupported version {version!r}")
        kind = data.get("kind")
        if kind not in ("ndp", "c2rnet"):
            raise MalformedRecord(source, "kind", f"unknown checkpoint kind {kind!r}")
        return cls(
            kind=kind,
            config=dict(data["config"]),
            dim=int(data["dim"]),
            epoch=int(data["epoch"]),
            fusion_mode=str(data["fusion_mode"]),
            inventory=[(str(nuc), str(rel)) for nuc, rel in data["inventory"]],
            ndp_state=data["ndp_state"],
            rst_state=data["rst_state"],
            rng_state=data["rng_state"],
            metrics=dict(data["metrics"]),
            version=version,
        )

    def to_bytes(self) -> bytes:
        buffer = io.BytesIO()
        torch.save(self.to_dict(), buffer)
        return buffer.getvalue()

    @classmethod
    def from_bytes(cls, payload: bytes, source: str = "<bytes>") -> "Checkpoint":
        data = torch.load(io.BytesIO(payload), weights_only=True)
        return cls.from_dict(data, source)


def save_checkpoint(path: str | os.PathLike[str], checkpoint: Checkpoint) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(checkpoint.to_bytes())
    log.info(f"Saved {checkpoint.kind} checkpoint (epoch {checkpoint.epoch}) to {target}")


def load_checkpoint(path: str | os.PathLike[str]) -> Checkpoint:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"Checkpoint does not exist: {source}")
    return Checkpoint.from_bytes(source.read_bytes(), str(source))


def build_ndp(checkpoint: Checkpoint) -> NDPBranch:
    """NDP branch carrying the checkpoint's NDP parameters."""
    if checkpoint.ndp_state is None:
        raise ConfigurationError(f"{checkpoint.kind} checkpoint has no NDP parameters")
    config = checkpoint.training_config
    model = NDPBranch(checkpoint.dim, config.dropout)
    model.load_state_dict(checkpoint.ndp_state)
    return model


def build_c2rnet(checkpoint: Checkpoint, embedding_dim: int | None = None) -> C2RNet:
    """Rebuild a trained parser; `embedding_dim` is checked against the checkpoint."""
    if checkpoint.kind != "c2rnet" or checkpoint.rst_state is None:
        raise ConfigurationError(f"expected a c2rnet checkpoint, got {checkpoint.kind!r}")
    if embedding_dim is not None and embedding_dim != checkpoint.dim:
        raise DimensionMismatch(
            f"checkpoint expects {checkpoint.dim}-dim embeddings, provider gives {embedding_dim}"
        )
    config = checkpoint.training_config
    model = C2RNet(
        checkpoint.dim,
        config.h1,
        config.h2,
        LabelInventory(checkpoint.inventory),
        fusion_mode=FusionMode(checkpoint.fusion_mode),
        split_hidden=config.split_hidden,
        paragraph_dim=config.paragraph_dim,
        dropout=config.dropout,
    )
    model.rst.load_state_dict(checkpoint.rst_state)
    if model.ndp is not None:
        if checkpoint.ndp_state is None:
            raise ConfigurationError(
                f"fusion mode {checkpoint.fusion_mode!r} checkpoint has no NDP parameters"
            )
        model.ndp.load_state_dict(checkpoint.ndp_state)
    return model
