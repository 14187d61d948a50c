"""Subcommand bodies. Each takes a validated RunContext and persists its artifacts."""

from __future__ import annotations

import datetime
import importlib.metadata
import logging
from pathlib import Path

import numpy as np
from attrs import define, field
from slugify import slugify

from zeroday.autoencoder import (
    Architecture,
    AutoencoderModel,
    SearchSpace,
    build_autoencoder,
    random_search,
    score,
    threshold_for_specificity,
    train,
)
from zeroday.cli.config import (
    Command,
    DatasetConfig,
    DatasetPreset,
    RunConfig,
    parse_auto,
)
from zeroday.dataset import (
    LabeledDataset,
    SplitSpec,
    encode_categoricals,
    generate_synthetic,
    learn_vocabulary,
    load_feature_csv,
    split_benign_indices,
    write_feature_csv,
)
from zeroday.dataset.labeled import array_fingerprint
from zeroday.dataset.nslkdd import (
    NSL_KDD_BENIGN_LABEL,
    NSL_KDD_CLASS_MAP,
    NSL_KDD_COLUMNS,
    NSL_KDD_IGNORED_COLUMNS,
    NSL_KDD_LABEL_COLUMN,
)
from zeroday.dataset.table import FeatureTable
from zeroday.errors import ConfigError, DataError, FingerprintMismatch
from zeroday.eval import (
    BenignRows,
    EvalReport,
    ReportFormat,
    ThresholdSweep,
    compare,
    emit_report,
    evaluate_autoencoder,
    evaluate_ocsvm,
    load_report,
    write_plot_data,
)
from zeroday.ocsvm import OneClassSvmModel, fit
from zeroday.preprocess import PreprocessPipeline, apply_pipeline, fit_pipeline
from zeroday.seeding import SeedPlan
from zeroday.store import load_document, save_document, store_converter

logger = logging.getLogger(__name__)

RUN_METADATA_FILE = "run-metadata.json"
RUN_METADATA_FORMAT = "zeroday.run-metadata"
PIPELINE_FILE = "pipeline.json"
AUTOENCODER_FILE = "autoencoder.json"
HISTORY_FILE = "autoencoder-history.csv"
SEARCH_TRIALS_FILE = "search-trials.csv"
SEARCH_BEST_FILE = "search-best.json"
SEARCH_MODEL_FILE = "autoencoder-search.json"
SEARCH_FORMAT = "zeroday.search"


def package_version() -> str:
    try:
        return importlib.metadata.version("zeroday")
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


@define
class RunContext:
    config: RunConfig
    command: Command
    plan: SeedPlan
    threads: int
    artifacts: list[Path] = field(factory=list)

    @property
    def out(self) -> Path:
        return self.config.out

    @property
    def dataset(self) -> DatasetConfig:
        assert self.config.dataset is not None
        return self.config.dataset

    @property
    def split(self) -> SplitSpec:
        return SplitSpec(self.dataset.train_fraction, self.plan.sub_seed("split"))

    def path(self, *parts: str) -> Path:
        return self.out.joinpath(*parts)

    def wrote(self, path: Path) -> Path:
        self.artifacts.append(path)
        logger.info("Wrote %s", path)
        return path

    def write_metadata(self) -> Path:
        """Record this command's seeds, threads and outputs next to its artifacts."""
        path = self.path(RUN_METADATA_FILE)
        commands = {}
        if path.exists():
            try:
                commands = load_document(path, RUN_METADATA_FORMAT)["commands"]
            except DataError:
                logger.warning("Replacing unreadable %s", path)
        commands[str(self.command)] = {
            "seeds": self.plan.as_dict(),
            "threads": self.threads,
            "config": str(self.config.source) if self.config.source else None,
            "version": package_version(),
            "timestamp": datetime.datetime.now(datetime.UTC).isoformat(timespec="seconds"),
            "artifacts": sorted(_relative(p, self.out) for p in self.artifacts),
        }
        return save_document(path, RUN_METADATA_FORMAT, {"commands": commands})


def _relative(path: Path, base: Path) -> str:
    try:
        return str(path.relative_to(base))
    except ValueError:
        return str(path)


def svm_model_file(nu: float) -> str:
    return f"{slugify(f'ocsvm nu {nu!r}')}.json"


def load_dataset(
    cfg: DatasetConfig, path: Path, train: FeatureTable | None = None
) -> tuple[LabeledDataset, FeatureTable]:
    """Load, one-hot encode and relabel one feature file.

    A test file is loaded against the raw `train` table: same columns, same column
    kinds and the training vocabulary, so both encode to identical features.
    """
    names = None
    label_column = cfg.label_column
    ignore = list(cfg.ignore_columns)
    class_map = dict(cfg.class_map)
    benign_label = cfg.benign_label
    if cfg.preset is DatasetPreset.NSL_KDD:
        if not cfg.header:
            names = NSL_KDD_COLUMNS
            label_column = NSL_KDD_LABEL_COLUMN
            extra = [c for c in ignore if c not in NSL_KDD_IGNORED_COLUMNS]
            ignore = [*NSL_KDD_IGNORED_COLUMNS, *extra]
        class_map = NSL_KDD_CLASS_MAP | class_map
        benign_label = NSL_KDD_BENIGN_LABEL

    table = load_feature_csv(
        path,
        label_column,
        names=names,
        force_categorical=cfg.force_categorical,
        ignore_columns=ignore,
        expected_kinds=train.kinds if train is not None else None,
    )
    vocabulary = learn_vocabulary(train if train is not None else table)
    data = LabeledDataset.from_table(encode_categoricals(table, vocabulary), benign_label)
    if class_map:
        data = data.relabel(class_map)
    logger.info(
        "%s: classes %s",
        path.name,
        ", ".join(f"{c}={len(data.class_index[c])}" for c in data.classes),
    )
    return data, table


def load_pipeline(ctx: RunContext, data: LabeledDataset) -> PreprocessPipeline:
    path = ctx.path(PIPELINE_FILE)
    pipeline = PreprocessPipeline.load(path)
    if tuple(data.feature_names) != pipeline.input_names:
        raise DataError(
            f"{path} was fitted on different columns than {ctx.dataset.train.name} "
            "encodes to; run `zeroday preprocess` again"
        )
    train_idx, _ = split_benign_indices(data, ctx.split)
    if array_fingerprint(data.features[train_idx]) != pipeline.fitted_on:
        raise ConfigError(
            f"{path} was fitted on other benign rows (different data or seed); "
            "run `zeroday preprocess` again"
        )
    return pipeline


def check_provenance(path: Path, provenance: dict, pipeline: PreprocessPipeline):
    expected = pipeline.fingerprint()
    found = provenance.get("pipeline", "")
    if found != expected:
        raise FingerprintMismatch(str(path), expected, found)


def benign_parts(
    ctx: RunContext, data: LabeledDataset, pipeline: PreprocessPipeline
) -> tuple[np.ndarray, np.ndarray]:
    train_idx, val_idx = split_benign_indices(data, ctx.split)
    return (
        apply_pipeline(pipeline, data.features[train_idx], ctx.threads),
        apply_pipeline(pipeline, data.features[val_idx], ctx.threads),
    )


def emit_all(ctx: RunContext, report, stem: str) -> list[Path]:
    paths = []
    for format in ReportFormat:
        path = ctx.path("reports", f"{stem}{format.suffix}")
        paths.append(ctx.wrote(emit_report(report, format, path, ctx.config.locale)))
    return paths


def cmd_preprocess(ctx: RunContext):
    data, table = load_dataset(ctx.dataset, ctx.dataset.train)
    train_idx, _ = split_benign_indices(data, ctx.split)
    pipeline = fit_pipeline(
        data.features[train_idx],
        data.feature_names,
        ctx.config.preprocess.effective_threshold,
    )
    ctx.wrote(pipeline.save(ctx.path(PIPELINE_FILE)))
    print(pipeline.drop.summary())

    files = [("train", data)]
    if ctx.dataset.test is not None:
        files.append(("test", load_dataset(ctx.dataset, ctx.dataset.test, table)[0]))
    for part, labeled in files:
        transformed = labeled.with_features(
            apply_pipeline(pipeline, labeled.features, ctx.threads), pipeline.output_names
        )
        name = f"{slugify(f'{ctx.dataset.id} {part}')}.transformed.csv"
        ctx.wrote(write_feature_csv(transformed.to_table(), ctx.path("data", name)))


def cmd_train_ae(ctx: RunContext):
    data, _ = load_dataset(ctx.dataset, ctx.dataset.train)
    pipeline = load_pipeline(ctx, data)
    train_X, val_X = benign_parts(ctx, data, pipeline)

    cfg = ctx.config.autoencoder
    assert cfg is not None
    try:
        arch = cfg.architecture(len(pipeline.output_names))
    except ValueError as e:
        raise ConfigError(f"autoencoder.hidden: {e}") from e
    model = build_autoencoder(arch, cfg.l2_lambda, ctx.plan.sub_seed("init"), cfg.loss)
    model, history = train(
        model, cfg.train_config(ctx.plan.sub_seed("batch_order")), train_X, val_X
    )
    ctx.wrote(
        model.save(
            ctx.path(AUTOENCODER_FILE),
            pipeline=pipeline.fingerprint(),
            dataset=ctx.dataset.id,
            seed=ctx.config.seed,
        )
    )
    ctx.wrote(history.to_csv(ctx.path(HISTORY_FILE)))


def cmd_train_svm(ctx: RunContext):
    data, _ = load_dataset(ctx.dataset, ctx.dataset.train)
    pipeline = load_pipeline(ctx, data)
    train_X, _ = benign_parts(ctx, data, pipeline)

    cfg = ctx.config.ocsvm
    assert cfg is not None
    smo = cfg.smo_config(ctx.plan.sub_seed("smo_scan"))
    for nu in ThresholdSweep.of(ctx.config.sweep):
        model = fit(train_X, nu, cfg.kernel, smo)
        path = ctx.path(svm_model_file(nu))
        ctx.wrote(
            model.save(
                path,
                pipeline=pipeline.fingerprint(),
                dataset=ctx.dataset.id,
                seed=ctx.config.seed,
            )
        )


def resolve_thresholds(
    values, model: AutoencoderModel, val_X: np.ndarray, loss_kind, threads: int
) -> ThresholdSweep:
    """Turn `auto:<specificity>` entries into concrete thresholds on benign validation."""
    thresholds = []
    benign_scores = None
    for value in values:
        target = parse_auto(value)
        if target is None:
            thresholds.append(float(value))
            continue
        if benign_scores is None:
            benign_scores = score(model, val_X, loss_kind, threads)
        threshold = threshold_for_specificity(benign_scores, target)
        if threshold <= 0:
            raise DataError(
                f"sweep: {value} resolves to threshold {threshold:g}; at least that "
                "share of benign validation rows reconstructs exactly"
            )
        logger.info("Threshold for benign specificity %g: %.6g", target, threshold)
        thresholds.append(threshold)
    try:
        return ThresholdSweep.of(thresholds)
    except ValueError as e:
        raise ConfigError(f"sweep: {e}") from e


def cmd_evaluate(ctx: RunContext):
    data, table = load_dataset(ctx.dataset, ctx.dataset.train)
    pipeline = load_pipeline(ctx, data)
    files = [("train", data, BenignRows.VALIDATION)]
    if ctx.dataset.test is not None:
        test_data = load_dataset(ctx.dataset, ctx.dataset.test, table)[0]
        files.append(("test", test_data, BenignRows.ALL))

    if ctx.config.autoencoder is not None:
        detector = "autoencoder"
        path = ctx.path(AUTOENCODER_FILE)
        model, provenance = AutoencoderModel.load_with_provenance(path)
        check_provenance(path, provenance, pipeline)
        score_loss = ctx.config.autoencoder.score_loss
        _, val_X = benign_parts(ctx, data, pipeline)
        sweep = resolve_thresholds(ctx.config.sweep, model, val_X, score_loss, ctx.threads)

        def run(labeled: LabeledDataset, part: str, benign_rows: BenignRows) -> EvalReport:
            return evaluate_autoencoder(
                model,
                pipeline,
                labeled,
                sweep,
                split=ctx.split,
                benign_rows=benign_rows,
                dataset_id=f"{ctx.dataset.id}-{part}",
                loss_kind=score_loss,
                threads=ctx.threads,
                ignored_columns=table.ignored,
            )

    else:
        detector = "ocsvm"
        cfg = ctx.config.ocsvm
        assert cfg is not None
        models: dict[float, OneClassSvmModel] = {}
        for nu in ThresholdSweep.of(ctx.config.sweep):
            path = ctx.path(svm_model_file(nu))
            models[nu], provenance = OneClassSvmModel.load_with_provenance(path)
            check_provenance(path, provenance, pipeline)
        train_X, _ = benign_parts(ctx, data, pipeline)

        def run(labeled: LabeledDataset, part: str, benign_rows: BenignRows) -> EvalReport:
            return evaluate_ocsvm(
                train_X,
                labeled,
                pipeline,
                list(models),
                cfg.kernel,
                cfg.smo_config(ctx.plan.sub_seed("smo_scan")),
                models=models,
                split=ctx.split,
                benign_rows=benign_rows,
                dataset_id=f"{ctx.dataset.id}-{part}",
                threads=ctx.threads,
                ignored_columns=table.ignored,
            )

    for part, labeled, benign_rows in files:
        report = run(labeled, part, benign_rows)
        emit_all(ctx, report, slugify(f"{ctx.dataset.id} {part} {detector}"))
        for value, accuracy in zip(report.sweep, report.overall_accuracy):
            print(f"{report.dataset_id} {detector} {value:g}: overall accuracy {accuracy:.2%}")


def cmd_search(ctx: RunContext):
    data, _ = load_dataset(ctx.dataset, ctx.dataset.train)
    pipeline = load_pipeline(ctx, data)
    train_X, val_X = benign_parts(ctx, data, pipeline)

    cfg = ctx.config.search
    assert cfg is not None
    width = len(pipeline.output_names)
    try:
        space = SearchSpace(
            [Architecture((width, *hidden, width), cfg.activation) for hidden in cfg.hidden],
            cfg.learning_rates,
            cfg.epoch_counts,
            cfg.l2_lambdas,
            cfg.budget,
            ctx.plan.sub_seed("search"),
            cfg.batch_size,
            cfg.loss,
        )
    except ValueError as e:
        raise ConfigError(f"search: {e}") from e

    result = random_search(space, train_X, val_X, retrain=cfg.retrain)
    ctx.wrote(result.trials_to_csv(ctx.path(SEARCH_TRIALS_FILE)))
    best_loss = min(t.validation_loss for t in result.trials)
    payload = {
        "architecture": store_converter.unstructure(result.architecture),
        "config": store_converter.unstructure(result.config),
        "validation_loss": best_loss,
        "pipeline": pipeline.fingerprint(),
    }
    ctx.wrote(save_document(ctx.path(SEARCH_BEST_FILE), SEARCH_FORMAT, payload))
    if result.model is not None:
        ctx.wrote(
            result.model.save(
                ctx.path(SEARCH_MODEL_FILE),
                pipeline=pipeline.fingerprint(),
                dataset=ctx.dataset.id,
                seed=ctx.config.seed,
            )
        )
    print(
        f"best: {result.architecture} lr={result.config.learning_rate:g} "
        f"epochs={result.config.epochs} l2={result.config.l2_lambda:g} "
        f"validation loss {best_loss:.6g}"
    )


def cmd_compare(ctx: RunContext, report_a: Path, report_b: Path, t: float, v: float):
    reports = []
    for path in (report_a, report_b):
        report = load_report(path)
        if not isinstance(report, EvalReport):
            raise ConfigError(f"{path} is not a json evaluation report")
        reports.append(report)
    a, b = reports
    try:
        comparison = compare(a, b, t, v)
    except ValueError as e:
        raise ConfigError(str(e)) from e

    stem = slugify(f"comparison {a.dataset_id} t {t!r} nu {v!r}")
    emit_all(ctx, comparison, stem)
    ctx.wrote(write_plot_data(comparison, ctx.path("reports", f"{stem}-plot.csv")))
    for pair in comparison.pairs:
        print(
            f"{pair.name}: autoencoder {pair.autoencoder_rate:.2%} "
            f"ocsvm {pair.ocsvm_rate:.2%} ({pair.winner})"
        )


def cmd_synth(ctx: RunContext):
    cfg = ctx.config.synthetic
    assert cfg is not None
    data = generate_synthetic(cfg.spec(ctx.plan.sub_seed("synth")))
    target = cfg.output or ctx.dataset.train
    label = ctx.config.dataset.label_column if ctx.config.dataset else "label"
    ctx.wrote(write_feature_csv(data.to_table(label), target))
