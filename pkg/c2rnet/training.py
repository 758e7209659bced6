#!/usr/bin/env python3

"""Training loops, evaluation and the NDP probing test.

The NDP branch is pretrained on sentence-labeled data with `train_ndp`.  Its
weights seed the NDP branch of the full parser in `train_c2rnet`, where they
stay frozen for the first `ndp_freeze_epochs` epochs and are afterwards
updated by the RST loss alone.  Every document is one step; `batch_size`
steps are accumulated per optimizer update.
"""

import json
import logging
import random
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import anyio
import numpy as np
import torch

from .analysis import (
    GroupAccuracy,
    SpanGroupReport,
    ThresholdReport,
    ThresholdRow,
    format_span_groups,
    format_thresholds,
    span_group_accuracy,
    threshold_table,
)
from .async_file_utils import async_write_text
from .checkpoint import Checkpoint, build_c2rnet, build_ndp
from .common import NUM_CONTENT_TYPES
from .config import TrainingConfig
from .embedding import (
    EmbeddingProvider,
    HashEmbeddingProvider,
    embed_document,
    load_precomputed,
)
from .errors import ConfigurationError, DimensionMismatch, ValidationError
from .metrics import COLUMNS, ColumnCounts, ParsevalScore, format_scores, score
from .models.c2rnet import C2RNet
from .models.ndp_branch import NDPBranch, NDPScore, ndp_accuracy, ndp_loss
from .models.rst_parser import FusionMode, LabelInventory
from .ndp_corpus import NDPCorpus
from .treebank import Convention, Document, RSTTree, resolve_data_path, split_dev

__all__ = [
    "EpochStats",
    "EvaluationReport",
    "RunLog",
    "make_provider",
    "seed_everything",
    "train_ndp",
    "evaluate_ndp",
    "train_c2rnet",
    "predict",
    "evaluate_checkpoint",
    "average_scores",
    "average_reports",
    "train_many",
    "probe_ndp",
]

log = logging.getLogger(__name__)

Decoder = Callable[[Document], RSTTree]


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed % 2**64)


def make_provider(config: TrainingConfig) -> EmbeddingProvider:
    """Precomputed vectors when `embeddings_path` is set, hash embeddings otherwise."""
    if not config.embeddings_path:
        return HashEmbeddingProvider(config.embedding_dim, config.embedding_seed)
    provider = load_precomputed(resolve_data_path(config.embeddings_path))
    if provider.dim != config.embedding_dim:
        raise DimensionMismatch(
            f"{config.embeddings_path} holds {provider.dim}-dim vectors, "
            f"embedding_dim is {config.embedding_dim}"
        )
    return provider


class RunLog:
    """Line-delimited JSON record of each epoch, appended to run_log.jsonl."""

    def __init__(self, out_dir: str | Path | None, name: str = "run_log.jsonl"):
        self.path = Path(out_dir) / name if out_dir is not None else None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, record: Mapping[str, Any]) -> None:
        if self.path is None:
            return
        line = json.dumps(dict(record), sort_keys=True) + "\n"
        anyio.run(async_write_text, str(self.path), line, "a")


def _clone_state(module: torch.nn.Module) -> dict[str, torch.Tensor]:
    return {k: v.detach().clone() for k, v in module.state_dict().items()}


def _optimizer(params: Any, config: TrainingConfig) -> torch.optim.Adam:
    return torch.optim.Adam(params, lr=config.learning_rate, eps=config.adam_epsilon)


# ---------------------------------------------------------------------------
# NDP pretraining


def train_ndp(
    config: TrainingConfig,
    corpus: NDPCorpus,
    provider: EmbeddingProvider,
    run_log: RunLog | None = None,
) -> Checkpoint:
    """Pretrain the NDP branch on sentence-level content-type labels."""
    if len(corpus) == 0:
        raise ValidationError("cannot train the NDP branch on an empty corpus")
    seed_everything(config.seed)
    model = NDPBranch(provider.dim, config.dropout)
    matrices = {doc.doc_id: embed_document(doc, provider) for doc in corpus.documents}
    optimizer = _optimizer(model.parameters(), config)
    order = random.Random(config.seed)
    run_log = run_log or RunLog(None)

    metrics: dict[str, float] = {}
    for epoch in range(1, config.ndp_epochs + 1):
        model.train()
        docs = list(corpus.documents)
        order.shuffle(docs)
        total = 0.0
        predicted: list[int] = []
        gold: list[int] = []
        optimizer.zero_grad(set_to_none=True)
        for step, doc in enumerate(docs, start=1):
            assert doc.ndp_labels is not None
            labels = [int(label) for label in doc.ndp_labels]
            probs = model(matrices[doc.doc_id], doc.sentence_token_spans())
            loss = ndp_loss(probs, labels)
            (loss / config.batch_size).backward()
            if step % config.batch_size == 0 or step == len(docs):
                optimizer.step()
                optimizer.zero_grad(set_to_none=True)
            total += loss.item()
            predicted.extend(probs.detach().argmax(dim=-1).tolist())
            gold.extend(labels)
        result = ndp_accuracy(predicted, gold)
        metrics = {"loss": total / len(docs), "train_accuracy": result.accuracy}
        log.info(
            f"NDP epoch {epoch}/{config.ndp_epochs}: loss {metrics['loss']:.4f}, "
            f"accuracy {result.accuracy:.1f}, macro-F1 {result.macro_f1:.1f}"
        )
        run_log.append(
            {"stage": "ndp", "epoch": epoch, **metrics, "macro_f1": result.macro_f1}
        )

    return Checkpoint(
        kind="ndp",
        config=config.to_mapping(),
        dim=provider.dim,
        epoch=config.ndp_epochs,
        ndp_state=_clone_state(model),
        rng_state=torch.get_rng_state(),
        metrics=metrics,
    )


def evaluate_ndp(
    model: NDPBranch | Checkpoint,
    corpus: NDPCorpus,
    provider: EmbeddingProvider,
) -> NDPScore:
    """Sentence accuracy and macro-F1 of an NDP branch on a labeled corpus."""
    if isinstance(model, Checkpoint):
        model = build_ndp(model)
    if model.dim != provider.dim:
        raise DimensionMismatch(
            f"NDP branch expects {model.dim}-dim embeddings, provider gives {provider.dim}"
        )
    model.eval()
    predicted: list[int] = []
    gold: list[int] = []
    with torch.no_grad():
        for doc, spans, labels in corpus.sentences():
            probs = model(embed_document(doc, provider), spans)
            predicted.extend(probs.argmax(dim=-1).tolist())
            gold.extend(int(label) for label in labels)
    return ndp_accuracy(predicted, gold)


def probe_ndp(
    c2rnet_checkpoint: Checkpoint,
    original_ndp_checkpoint: Checkpoint,
    ndp_test: NDPCorpus,
    provider: EmbeddingProvider,
) -> NDPScore:
    """Classify with the parser's NDP body under the original NDP head.

    Shows how much the content-type knowledge in the NDP branch survives RST
    training.
    """
    if c2rnet_checkpoint.ndp_state is None:
        raise ConfigurationError("checkpoint has no NDP branch to probe")
    model = build_ndp(c2rnet_checkpoint)
    head = build_ndp(original_ndp_checkpoint).head_state()
    model.load_head(head)
    return evaluate_ndp(model, ndp_test, provider)


# ---------------------------------------------------------------------------
# RST training


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    ndp_frozen: bool
    dev_full_f: float | None = None


def _gold_trees(docs: Sequence[Document]) -> list[RSTTree]:
    trees: list[RSTTree] = []
    for doc in docs:
        if doc.gold_tree is None:
            raise ValidationError(f"document {doc.doc_id!r} has no gold tree")
        trees.append(doc.gold_tree)
    return trees


def _check_transfer(
    mode: FusionMode, ndp_checkpoint: Checkpoint | None, dim: int
) -> None:
    if mode == FusionMode.NONE:
        if ndp_checkpoint is not None:
            raise ConfigurationError("fusion mode 'none' does not take an NDP checkpoint")
        return
    if ndp_checkpoint is None or ndp_checkpoint.ndp_state is None:
        raise ConfigurationError(f"fusion mode {mode.value!r} needs an NDP checkpoint")
    if ndp_checkpoint.dim != dim:
        raise DimensionMismatch(
            f"NDP checkpoint was trained on {ndp_checkpoint.dim}-dim embeddings, "
            f"provider gives {dim}"
        )
    if mode == FusionMode.ONE_HOT:
        weight = ndp_checkpoint.ndp_state.get("classifier.weight")
        if weight is None or weight.shape[0] != NUM_CONTENT_TYPES:
            raise ConfigurationError(
                "one-hot fusion needs an NDP classifier over the 8 content types"
            )


def train_c2rnet(
    config: TrainingConfig,
    docs: Sequence[Document],
    provider: EmbeddingProvider,
    ndp_checkpoint: Checkpoint | None = None,
    dev_docs: Sequence[Document] | None = None,
    run_log: RunLog | None = None,
    on_epoch: Callable[[EpochStats, C2RNet], None] | None = None,
) -> Checkpoint:
    """Train the parser with teacher forcing on gold trees.

    Args:
        config: Training configuration; `fusion_mode` selects the variant.
        docs: Training documents, all with gold trees.
        provider: Token embeddings shared by both branches.
        ndp_checkpoint: Pretrained NDP branch, required unless fusion is off.
        dev_docs: Development documents for early stopping.  When omitted and
            `early_stopping_patience` is positive, a tenth of `docs` is set
            aside instead; a single document trains without early stopping.
        run_log: Destination for per-epoch records.
        on_epoch: Called after every epoch with its stats and the live model.

    Returns:
        A c2rnet checkpoint of the final (or best, with early stopping) model.

    """
    if not docs:
        raise ValidationError("cannot train the parser on an empty corpus")
    mode = FusionMode(config.fusion_mode)
    _check_transfer(mode, ndp_checkpoint, provider.dim)

    if dev_docs is None and config.early_stopping_patience > 0:
        if len(docs) < 2:
            log.warning("Too few documents to set a dev split aside; early stopping is off")
        else:
            docs, dev_docs = split_dev(docs, max(1, len(docs) // 10), config.seed)
    trees = _gold_trees(docs)
    if config.full_label_inventory:
        inventory = LabelInventory.full(config.relations)
    else:
        inventory = LabelInventory.observed(trees)
    inventory.check_trees(trees)

    seed_everything(config.seed)
    model = C2RNet(
        provider.dim,
        config.h1,
        config.h2,
        inventory,
        fusion_mode=mode,
        split_hidden=config.split_hidden,
        paragraph_dim=config.paragraph_dim,
        dropout=config.dropout,
    )
    if model.ndp is not None:
        assert ndp_checkpoint is not None and ndp_checkpoint.ndp_state is not None
        model.ndp.load_state_dict(ndp_checkpoint.ndp_state)
        log.info(f"Transferred NDP weights from epoch {ndp_checkpoint.epoch}")

    matrices = {doc.doc_id: embed_document(doc, provider) for doc in docs}
    optimizer = _optimizer(model.parameters(), config)
    order = random.Random(config.seed)
    run_log = run_log or RunLog(None)

    best: tuple[float, int, dict[str, dict[str, torch.Tensor]]] | None = None
    stale = 0
    last_epoch = 0
    loss_value = 0.0
    for epoch in range(1, config.epochs + 1):
        frozen = model.ndp is not None and epoch <= config.ndp_freeze_epochs
        if model.ndp is not None:
            model.ndp.requires_grad_(not frozen)
        model.train()
        shuffled = list(docs)
        order.shuffle(shuffled)
        total = 0.0
        optimizer.zero_grad(set_to_none=True)
        for step, doc in enumerate(shuffled, start=1):
            assert doc.gold_tree is not None
            loss = model.loss(matrices[doc.doc_id], doc, doc.gold_tree)
            if loss.requires_grad:
                (loss / config.batch_size).backward()
            if step % config.batch_size == 0 or step == len(shuffled):
                optimizer.step()
                optimizer.zero_grad(set_to_none=True)
            total += loss.item()
        loss_value = total / len(shuffled)
        last_epoch = epoch

        dev_full_f = None
        if dev_docs:
            dev_pred = predict(model, dev_docs, provider)
            dev_gold = dict(zip((d.doc_id for d in dev_docs), _gold_trees(dev_docs)))
            dev_full_f = score(dev_pred, dev_gold, Convention.ORIG, config.include_root).F

        stats = EpochStats(epoch, loss_value, frozen, dev_full_f)
        log.info(
            f"Epoch {epoch}/{config.epochs}: loss {loss_value:.4f}"
            + (" (NDP frozen)" if frozen else "")
            + (f", dev F {dev_full_f:.1f}" if dev_full_f is not None else "")
        )
        run_log.append(
            {
                "stage": "rst",
                "epoch": epoch,
                "loss": loss_value,
                "ndp_frozen": frozen,
                "dev_full_f": dev_full_f,
            }
        )
        if on_epoch is not None:
            on_epoch(stats, model)

        if dev_full_f is not None and config.early_stopping_patience > 0:
            if best is None or dev_full_f > best[0]:
                best = (dev_full_f, epoch, {"rst": _clone_state(model.rst)})
                if model.ndp is not None:
                    best[2]["ndp"] = _clone_state(model.ndp)
                stale = 0
            else:
                stale += 1
                if stale >= config.early_stopping_patience:
                    log.info(f"Early stopping after epoch {epoch}; best was {best[1]}")
                    break

    rst_state = _clone_state(model.rst)
    ndp_state = _clone_state(model.ndp) if model.ndp is not None else None
    if best is not None:
        _, last_epoch, states = best
        rst_state = states["rst"]
        ndp_state = states.get("ndp")

    return Checkpoint(
        kind="c2rnet",
        config=config.to_mapping(),
        dim=provider.dim,
        epoch=last_epoch,
        fusion_mode=mode.value,
        inventory=list(inventory.pairs),
        ndp_state=ndp_state,
        rst_state=rst_state,
        rng_state=torch.get_rng_state(),
        metrics={"loss": loss_value},
    )


def predict(
    model: C2RNet, docs: Sequence[Document], provider: EmbeddingProvider
) -> dict[str, RSTTree]:
    """Greedy parses of `docs`, keyed by doc_id."""
    was_training = model.training
    model.eval()
    try:
        return {
            doc.doc_id: model.parse(embed_document(doc, provider), doc) for doc in docs
        }
    finally:
        model.train(was_training)


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class EvaluationReport:
    orig: ParsevalScore
    rst: ParsevalScore
    span_groups: SpanGroupReport
    thresholds: ThresholdReport
    runs: int = 1
    predictions: dict[str, RSTTree] = field(default_factory=lambda: {}, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "runs": self.runs,
            "parseval": {"orig": self.orig.to_dict(), "rst": self.rst.to_dict()},
            "vacuous_orig": self.orig.vacuous,
            "span_groups": self.span_groups.to_dict(),
            "thresholds": self.thresholds.to_dict(),
        }

    def format(self, system: str = "system") -> str:
        parts = [format_scores([self.orig, self.rst], system)]
        if self.orig.vacuous:
            parts.append("note: no internal nodes to score; Orig columns are vacuous")
        parts.append(format_span_groups(self.span_groups, system))
        parts.append(format_thresholds(self.thresholds, system))
        return "\n\n".join(parts)


def evaluate_checkpoint(
    checkpoint: Checkpoint | None,
    docs: Sequence[Document],
    provider: EmbeddingProvider | None = None,
    decoder: Decoder | None = None,
    include_root: bool = True,
) -> EvaluationReport:
    """Decode `docs` and score them against their gold trees.

    `decoder` replaces the checkpoint's parser, e.g. with an oracle.
    """
    gold = dict(zip((d.doc_id for d in docs), _gold_trees(docs)))
    if decoder is None:
        if checkpoint is None:
            raise ConfigurationError("evaluation needs a checkpoint or a decoder")
        config = checkpoint.training_config
        if provider is None:
            provider = make_provider(config)
        unknown = sorted(
            {
                n.relation
                for tree in gold.values()
                for n in tree.internal_nodes()
                if n.relation not in config.relations
            }
        )
        if unknown:
            raise ConfigurationError(
                f"gold relations not in the checkpoint inventory: {', '.join(unknown)}"
            )
        model = build_c2rnet(checkpoint, provider.dim)
        pred = predict(model, docs, provider)
    else:
        pred = {doc.doc_id: decoder(doc) for doc in docs}
    return EvaluationReport(
        orig=score(pred, gold, Convention.ORIG, include_root),
        rst=score(pred, gold, Convention.RST, include_root),
        span_groups=span_group_accuracy(pred, gold),
        thresholds=threshold_table(pred, gold),
        predictions=pred,
    )


def average_scores(scores: Sequence[ParsevalScore]) -> ParsevalScore:
    """Column-wise mean of several runs; counts are summed."""
    if not scores:
        raise ValueError("nothing to average")
    conventions = {s.convention for s in scores}
    if len(conventions) != 1:
        raise ValueError("cannot average scores from different conventions")
    means = {c: sum(s.column(c) for s in scores) / len(scores) for c in COLUMNS}
    counts = {
        c: ColumnCounts(
            matched=sum(s.counts[c].matched for s in scores),
            predicted=sum(s.counts[c].predicted for s in scores),
            gold=sum(s.counts[c].gold for s in scores),
        )
        for c in COLUMNS
    }
    return ParsevalScore(convention=conventions.pop(), counts=counts, **means)


def _pool(groups: Sequence[GroupAccuracy]) -> GroupAccuracy:
    return GroupAccuracy(
        label=groups[0].label,
        count=sum(g.count for g in groups),
        nuclearity_correct=sum(g.nuclearity_correct for g in groups),
        relation_correct=sum(g.relation_correct for g in groups),
    )


def average_reports(reports: Sequence[EvaluationReport]) -> EvaluationReport:
    """Average several runs on the same test set.

    Parseval columns are averaged.  Span-analysis tallies are pooled, which
    on the gold basis equals the mean accuracy because every run sees the
    same gold nodes.
    """
    if not reports:
        raise ValueError("nothing to average")
    first = reports[0]
    span_groups = SpanGroupReport(
        groups=tuple(
            _pool([r.span_groups.groups[i] for r in reports])
            for i in range(len(first.span_groups.groups))
        ),
        basis=first.span_groups.basis,
    )
    thresholds = ThresholdReport(
        rows=tuple(
            ThresholdRow(
                threshold=row.threshold,
                above=_pool([r.thresholds.rows[i].above for r in reports]),
                at_or_below=_pool([r.thresholds.rows[i].at_or_below for r in reports]),
            )
            for i, row in enumerate(first.thresholds.rows)
        ),
        basis=first.thresholds.basis,
    )
    return EvaluationReport(
        orig=average_scores([r.orig for r in reports]),
        rst=average_scores([r.rst for r in reports]),
        span_groups=span_groups,
        thresholds=thresholds,
        runs=sum(r.runs for r in reports),
    )


def train_many(
    config: TrainingConfig,
    seeds: Sequence[int],
    docs: Sequence[Document],
    test_docs: Sequence[Document],
    provider: EmbeddingProvider,
    ndp_checkpoint: Checkpoint | None = None,
    dev_docs: Sequence[Document] | None = None,
) -> tuple[list[Checkpoint], EvaluationReport]:
    """Train and evaluate once per seed; return the checkpoints and the average."""
    if not seeds:
        raise ConfigurationError("at least one seed is required")
    checkpoints: list[Checkpoint] = []
    reports: list[EvaluationReport] = []
    for seed in seeds:
        log.info(f"Training run with seed {seed}")
        seeded = config.replace(seed=seed)
        checkpoint = train_c2rnet(seeded, docs, provider, ndp_checkpoint, dev_docs)
        checkpoints.append(checkpoint)
        reports.append(
            evaluate_checkpoint(checkpoint, test_docs, provider, include_root=config.include_root)
        )
    return checkpoints, average_reports(reports)
