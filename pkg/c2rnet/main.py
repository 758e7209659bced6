#!/usr/bin/env python3

import json
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Annotated, Any

import anyio
import click
import typer

from .analysis import (
    Basis,
    format_span_groups,
    format_thresholds,
    span_group_accuracy,
    span_group_proportions,
    threshold_table,
)
from .async_file_utils import async_write_text
from .checkpoint import build_c2rnet, load_checkpoint, save_checkpoint
from .config import TrainingConfig, load_config, write_config
from .errors import ConfigurationError, ValidationError
from .metrics import format_scores, score
from .ndp_corpus import NDPCorpus, check_disjoint, label_distribution, load_ndp_corpus
from .training import (
    RunLog,
    evaluate_checkpoint,
    evaluate_ndp,
    make_provider,
    predict,
    probe_ndp,
    train_c2rnet,
    train_many,
    train_ndp,
)
from .treebank import Convention, Document, RSTTree, leaf, load_corpus, write_corpus

__all__ = ["app", "configure_logging", "run"]

log = logging.getLogger(__name__)

app = typer.Typer(
    name="c2rnet",
    help="Top-down RST discourse parsing with news discourse profiling features.",
    add_completion=False,
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)

ConfigOption = Annotated[
    Path | None,
    typer.Option("--config", help="TOML config file overriding ~/.c2rnetrc."),
]
SeedOption = Annotated[
    int | None, typer.Option("--seed", help="Random seed; overrides the config.")
]
OutOption = Annotated[
    Path | None,
    typer.Option("--out", help="Directory for outputs, logs and report.json."),
]
VerboseOption = Annotated[
    bool, typer.Option("--verbose", "-v", help="Log at DEBUG level.")
]


def configure_logging(
    log_file: str = "c2rnet.log",
    log_dir: str | os.PathLike[str] | None = None,
    level: str | None = None,
) -> None:
    """Configure logging to write to both a file and the console.

    The log level comes from `level`, else from the config files.  It can be
    overridden by setting the C2RNET_DEBUG environment variable.
    Example: C2RNET_DEBUG=1 c2rnet train-rst ...

    Logs go to ~/.c2rnet/ unless `log_dir` is given.  Logs from torch and
    anyio are filtered out unless in debug mode.
    """
    from .config import get_logger_verbosity

    directory = Path(log_dir) if log_dir is not None else Path.home() / ".c2rnet"
    directory.mkdir(parents=True, exist_ok=True)
    log_path = directory / log_file

    log_level_str = level or get_logger_verbosity()
    log_level = logging.getLevelNamesMapping().get(log_level_str.upper(), logging.INFO)

    debug_mode = False
    if os.environ.get("C2RNET_DEBUG"):
        log_level = logging.DEBUG
        debug_mode = True

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # Clear any existing handlers
    for handler in list(root_logger.handlers):
        handler.close()
        root_logger.removeHandler(handler)

    file_handler = logging.FileHandler(log_path, encoding="utf-8")
    file_handler.setLevel(log_level)

    # console output goes to stderr so reports on stdout stay clean
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    file_handler.setFormatter(formatter)
    console_handler.setFormatter(formatter)

    class ModuleFilter(logging.Filter):
        def filter(self, record: logging.LogRecord) -> bool:
            if debug_mode:
                return True
            return not record.name.startswith(("torch", "anyio"))

    module_filter = ModuleFilter()
    file_handler.addFilter(module_filter)
    console_handler.addFilter(module_filter)

    root_logger.addHandler(file_handler)
    root_logger.addHandler(console_handler)

    logging.debug(f"Logging configured. Log file: {log_path}")
    logging.debug(f"Log level set to: {logging.getLevelName(log_level)}")


def _setup(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    verbose: bool,
    **overrides: Any,
) -> TrainingConfig:
    """Resolve the config for one command and start logging."""
    mapping = load_config(config_path)
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    if seed is not None:
        mapping["seed"] = seed
    config = TrainingConfig.from_mapping(mapping)
    configure_logging(log_dir=out, level="DEBUG" if verbose else config.log_level)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_config(out / "config.toml", config)
    return config


def _write_report(out: Path | None, report: dict[str, Any]) -> None:
    if out is None:
        return
    content = json.dumps(report, indent=2, sort_keys=True) + "\n"
    anyio.run(async_write_text, str(out / "report.json"), content)


def _path(value: Path | None, configured: str, what: str) -> Path:
    if value is not None:
        return value
    if not configured:
        raise ConfigurationError(f"no {what} given on the command line or in the config")
    return Path(configured)


def _trees(docs: Sequence[Document], what: str) -> dict[str, RSTTree]:
    trees: dict[str, RSTTree] = {}
    for doc in docs:
        if doc.gold_tree is None:
            raise ValidationError(f"{what} document {doc.doc_id!r} has no tree")
        trees[doc.doc_id] = doc.gold_tree
    return trees


@app.command("train-ndp")
def train_ndp_command(
    ndp_train: Annotated[
        Path | None, typer.Option(help="NDP training corpus (default: ndp_train_path).")
    ] = None,
    ndp_test: Annotated[
        Path | None, typer.Option(help="NDP test corpus to report accuracy on.")
    ] = None,
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Pretrain the NDP branch on sentence-labeled documents."""
    cfg = _setup(config, seed, out, verbose)
    corpus = load_ndp_corpus(_path(ndp_train, cfg.ndp_train_path, "NDP training corpus"))
    test_path = ndp_test or (Path(cfg.ndp_test_path) if cfg.ndp_test_path else None)
    test_corpus = load_ndp_corpus(test_path) if test_path is not None else None
    if test_corpus is not None:
        check_disjoint([corpus, test_corpus], ["the training corpus", "the test corpus"])
    provider = make_provider(cfg)
    checkpoint = train_ndp(cfg, corpus, provider, RunLog(out))
    report: dict[str, Any] = {"train": dict(checkpoint.metrics)}

    if test_corpus is not None:
        result = evaluate_ndp(checkpoint, test_corpus, provider)
        report["test"] = {
            "accuracy": result.accuracy,
            "macro_f1": result.macro_f1,
            "sentences": result.count,
        }
        typer.echo(
            f"NDP test accuracy {result.accuracy:.1f}  macro-F1 {result.macro_f1:.1f}"
            f"  ({result.count} sentences)"
        )
    if out is not None:
        save_checkpoint(out / "ndp.ckpt", checkpoint)
    _write_report(out, report)


def _parse_seeds(value: str | None) -> list[int] | None:
    if value is None:
        return None
    try:
        seeds = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(
            f"expected comma-separated integers, got {value!r}"
        ) from None
    if not seeds:
        raise typer.BadParameter("at least one seed is required")
    return seeds


@app.command("train-rst")
def train_rst_command(
    train: Annotated[
        Path | None, typer.Option(help="RST training corpus (default: train_path).")
    ] = None,
    dev: Annotated[
        Path | None, typer.Option(help="Development corpus for early stopping.")
    ] = None,
    test: Annotated[
        Path | None, typer.Option(help="Test corpus to evaluate after training.")
    ] = None,
    ndp_checkpoint: Annotated[
        Path | None, typer.Option(help="Pretrained NDP checkpoint to transfer.")
    ] = None,
    fusion_mode: Annotated[
        str | None,
        typer.Option(help="none, ndp-embedding or ndp-one-hot; overrides the config."),
    ] = None,
    seeds: Annotated[
        str | None,
        typer.Option(help="Comma-separated seeds; trains once per seed and averages."),
    ] = None,
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Train the RST parser, optionally fed by a pretrained NDP branch."""
    seed_list = _parse_seeds(seeds)
    cfg = _setup(config, seed, out, verbose, fusion_mode=fusion_mode)
    docs = load_corpus(_path(train, cfg.train_path, "training corpus"), cfg.relations)
    dev_path = dev or (Path(cfg.dev_path) if cfg.dev_path else None)
    dev_docs = load_corpus(dev_path, cfg.relations) if dev_path is not None else None
    test_path = test or (Path(cfg.test_path) if cfg.test_path else None)
    test_docs = load_corpus(test_path, cfg.relations) if test_path is not None else None
    splits = {
        "the training corpus": docs,
        "the dev corpus": dev_docs,
        "the test corpus": test_docs,
    }
    present = {name: split for name, split in splits.items() if split is not None}
    check_disjoint(list(present.values()), list(present))
    ndp = load_checkpoint(ndp_checkpoint) if ndp_checkpoint is not None else None
    provider = make_provider(cfg)

    if seed_list is not None:
        if test_docs is None:
            raise ConfigurationError("--seeds needs a test corpus to average over")
        checkpoints, report = train_many(
            cfg, seed_list, docs, test_docs, provider, ndp, dev_docs
        )
        if out is not None:
            for s, checkpoint in zip(seed_list, checkpoints):
                save_checkpoint(out / f"c2rnet-seed{s}.ckpt", checkpoint)
        typer.echo(f"averaged over {report.runs} runs (seeds {seeds})")
        typer.echo(format_scores([report.orig, report.rst]))
        _write_report(out, {"seeds": seed_list, **report.to_dict()})
        return

    checkpoint = train_c2rnet(cfg, docs, provider, ndp, dev_docs, RunLog(out))
    if out is not None:
        save_checkpoint(out / "c2rnet.ckpt", checkpoint)
    if test_docs is not None:
        report = evaluate_checkpoint(
            checkpoint, test_docs, provider, include_root=cfg.include_root
        )
        typer.echo(report.format())
        _write_report(out, report.to_dict())


@app.command("parse")
def parse_command(
    input_path: Annotated[
        Path, typer.Option("--input", help="Documents to parse (native format).")
    ],
    checkpoint: Annotated[
        Path | None,
        typer.Option(help="Trained c2rnet checkpoint; optional for single-EDU input."),
    ] = None,
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Parse documents and print one bracketed tree per document.

    With --out the documents are also written, trees filled in, to
    predictions.jsonl.
    """
    cfg = _setup(config, seed, out, verbose)
    docs = load_corpus(input_path, cfg.relations)
    if checkpoint is not None:
        ckpt = load_checkpoint(checkpoint)
        provider = make_provider(ckpt.training_config)
        trees = predict(build_c2rnet(ckpt, provider.dim), docs, provider)
    else:
        multi = [doc.doc_id for doc in docs if doc.n_edus > 1]
        if multi:
            raise ConfigurationError(
                f"a checkpoint is needed to parse multi-EDU documents: {', '.join(multi)}"
            )
        trees = {doc.doc_id: RSTTree(leaf(1)) for doc in docs}
    for doc in docs:
        typer.echo(f"{doc.doc_id}\t{trees[doc.doc_id]}")
    if out is not None:
        write_corpus(out / "predictions.jsonl", docs, trees)


@app.command("score")
def score_command(
    pred: Annotated[Path, typer.Option(help="Predicted trees (native format).")],
    gold: Annotated[Path, typer.Option(help="Gold trees (native format).")],
    include_root: Annotated[
        bool,
        typer.Option(
            "--include-root/--no-include-root",
            help="Count the root node under Original Parseval.",
        ),
    ] = True,
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Score predictions under Original and RST Parseval."""
    cfg = _setup(config, seed, out, verbose, include_root=include_root)
    pred_trees = _trees(load_corpus(pred, cfg.relations), "predicted")
    gold_trees = _trees(load_corpus(gold, cfg.relations), "gold")
    scores = [
        score(pred_trees, gold_trees, convention, cfg.include_root)
        for convention in (Convention.ORIG, Convention.RST)
    ]
    typer.echo(format_scores(scores))
    _write_report(out, {"parseval": {s.convention.value: s.to_dict() for s in scores}})


@app.command("analyze")
def analyze_command(
    pred: Annotated[Path, typer.Option(help="Predicted trees of the system.")],
    gold: Annotated[Path, typer.Option(help="Gold trees (native format).")],
    baseline: Annotated[
        Path | None,
        typer.Option(help="Predicted trees of a baseline; adds difference rows."),
    ] = None,
    basis: Annotated[
        str, typer.Option(help="gold: accuracy over gold nodes; pred: over predicted.")
    ] = "gold",
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Accuracy by span length: span groups and threshold tables."""
    if basis not in ("gold", "pred"):
        raise typer.BadParameter(f"basis must be 'gold' or 'pred', got {basis!r}")
    chosen: Basis = "gold" if basis == "gold" else "pred"
    cfg = _setup(config, seed, out, verbose)
    gold_trees = _trees(load_corpus(gold, cfg.relations), "gold")
    pred_trees = _trees(load_corpus(pred, cfg.relations), "predicted")
    groups = span_group_accuracy(pred_trees, gold_trees, basis=chosen)
    thresholds = threshold_table(pred_trees, gold_trees, basis=chosen)
    base_groups = base_thresholds = None
    if baseline is not None:
        base_trees = _trees(load_corpus(baseline, cfg.relations), "baseline")
        base_groups = span_group_accuracy(base_trees, gold_trees, basis=chosen)
        base_thresholds = threshold_table(base_trees, gold_trees, basis=chosen)
    proportions = span_group_proportions(gold_trees)

    typer.echo(
        "gold nodes per group: "
        + ", ".join(f"{label} {share:.1f}%" for label, share in proportions.items())
    )
    typer.echo(format_span_groups(groups, baseline=base_groups))
    typer.echo("")
    typer.echo(format_thresholds(thresholds, baseline=base_thresholds))

    report: dict[str, Any] = {
        "proportions": proportions,
        "span_groups": groups.to_dict(),
        "thresholds": thresholds.to_dict(),
    }
    if base_groups is not None and base_thresholds is not None:
        report["baseline"] = {
            "span_groups": base_groups.to_dict(),
            "thresholds": base_thresholds.to_dict(),
        }
    _write_report(out, report)


@app.command("probe")
def probe_command(
    checkpoint: Annotated[Path, typer.Option(help="Trained c2rnet checkpoint.")],
    ndp_checkpoint: Annotated[
        Path, typer.Option(help="Original NDP checkpoint whose head is put back.")
    ],
    ndp_test: Annotated[
        Path | None, typer.Option(help="NDP test corpus (default: ndp_test_path).")
    ] = None,
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """NDP accuracy of the parser's NDP branch under the original classifier."""
    cfg = _setup(config, seed, out, verbose)
    corpus: NDPCorpus = load_ndp_corpus(_path(ndp_test, cfg.ndp_test_path, "NDP test corpus"))
    c2rnet_ckpt = load_checkpoint(checkpoint)
    original = load_checkpoint(ndp_checkpoint)
    provider = make_provider(c2rnet_ckpt.training_config)
    probed = probe_ndp(c2rnet_ckpt, original, corpus, provider)
    reference = evaluate_ndp(original, corpus, provider)
    typer.echo(f"original NDP accuracy {reference.accuracy:.1f}")
    typer.echo(f"probed NDP accuracy   {probed.accuracy:.1f}")
    _write_report(
        out,
        {
            "original": {"accuracy": reference.accuracy, "macro_f1": reference.macro_f1},
            "probed": {"accuracy": probed.accuracy, "macro_f1": probed.macro_f1},
            "sentences": probed.count,
            "labels": {ct.name: n for ct, n in label_distribution(corpus).items()},
        },
    )


@app.command("validate")
def validate_command(
    input_path: Annotated[
        Path, typer.Option("--input", help="Corpus file or directory to check.")
    ],
    collapse: Annotated[
        bool,
        typer.Option(help="Map fine-grained relation names onto the coarse inventory."),
    ] = False,
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Check that a corpus loads and every document satisfies its invariants."""
    cfg = _setup(config, seed, out, verbose)
    docs = load_corpus(input_path, cfg.relations, collapse=collapse)
    with_trees = [doc for doc in docs if doc.gold_tree is not None]
    relations: dict[str, int] = {}
    for doc in with_trees:
        assert doc.gold_tree is not None
        for n in doc.gold_tree.internal_nodes():
            assert n.relation is not None
            relations[n.relation] = relations.get(n.relation, 0) + 1
    edus = sum(doc.n_edus for doc in docs)
    typer.echo(
        f"{len(docs)} documents OK: {edus} EDUs, {len(with_trees)} with trees, "
        f"{sum(doc.ndp_labels is not None for doc in docs)} with NDP labels"
    )
    for name in sorted(relations):
        typer.echo(f"  {name:<24}{relations[name]:>8}")
    _write_report(
        out,
        {
            "documents": len(docs),
            "edus": edus,
            "trees": len(with_trees),
            "relations": dict(sorted(relations.items())),
        },
    )


# Newer typer releases raise their own copies of click's exception classes.
_USAGE_ERRORS: tuple[type[Exception], ...] = (
    click.exceptions.UsageError,
    *(c for c in typer.BadParameter.__mro__ if c.__name__ == "UsageError"),
)
_ABORTS: tuple[type[BaseException], ...] = (click.exceptions.Abort, typer.Abort)


def run(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code.

    0 on success, 1 when the arguments or input files are at fault, 2 for
    anything else.
    """
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = app(args=args, prog_name="c2rnet", standalone_mode=False)
    except _USAGE_ERRORS as e:
        typer.echo(f"error: {e.format_message()}", err=True)  # type: ignore[reportAttributeAccessIssue]
        return 1
    except _ABORTS:
        typer.echo("error: aborted", err=True)
        return 1
    except (ValidationError, FileNotFoundError) as e:
        log.debug("Validation failure", exc_info=True)
        typer.echo(f"error: {e}", err=True)
        return 1
    except Exception as e:
        log.error(f"Command failed: {e}", exc_info=True)
        typer.echo(f"error: {type(e).__name__}: {e}", err=True)
        return 2
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run())
