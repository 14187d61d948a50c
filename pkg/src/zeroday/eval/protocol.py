from __future__ import annotations

import datetime
import logging
import typing

import numpy as np

from zeroday.autoencoder import AutoencoderModel, LossKind, score
from zeroday.dataset import LabeledDataset, SplitSpec, split_benign_indices
from zeroday.errors import DataError, ZerodayError
from zeroday.eval.report import (
    SCORE_DEFINITION,
    BenignRows,
    Detector,
    EvalReport,
    ReportMetadata,
    ThresholdSweep,
)
from zeroday.ocsvm import KernelSpec, OneClassSvmModel, SmoConfig, fit
from zeroday.preprocess import PreprocessPipeline, apply_pipeline

logger = logging.getLogger(__name__)


def _now() -> str:
    return datetime.datetime.now(datetime.UTC).isoformat(timespec="seconds")


def _benign_rows(
    data: LabeledDataset, benign_rows: BenignRows, split: SplitSpec
) -> np.ndarray:
    if benign_rows is BenignRows.VALIDATION:
        _, validation = split_benign_indices(data, split)
        rows = data.features[validation]
    else:
        rows = data.benign_rows() if data.has_benign else data.features[:0]
    if len(rows) == 0:
        raise DataError(f"{benign_rows} benign rows are needed to measure specificity")
    return rows


def _assemble(
    detector: Detector,
    data: LabeledDataset,
    sweep: ThresholdSweep,
    benign_flags: list[np.ndarray],
    attack_flags: dict[str, list[np.ndarray]],
    dataset_id: str,
    metadata: ReportMetadata,
) -> EvalReport:
    """Build a report from per-sweep-value boolean "flagged" vectors."""
    n_benign = len(benign_flags[0])
    specificity = [1.0 - np.count_nonzero(f) / n_benign for f in benign_flags]
    recall = {
        label: [np.count_nonzero(f) / len(f) for f in flags]
        for label, flags in attack_flags.items()
    }
    counts = {data.benign_label: n_benign} | {
        label: len(flags[0]) for label, flags in attack_flags.items()
    }
    total = sum(counts.values())
    overall = []
    for k in range(len(sweep)):
        correct = n_benign - np.count_nonzero(benign_flags[k])
        correct += sum(np.count_nonzero(flags[k]) for flags in attack_flags.values())
        overall.append(correct / total)

    return EvalReport(
        detector,
        dataset_id,
        data.benign_label,
        sweep,
        specificity,
        {label: tuple(rates) for label, rates in sorted(recall.items())},
        counts,
        overall,
        metadata,
    )


def evaluate_autoencoder(
    model: AutoencoderModel,
    pipeline: PreprocessPipeline,
    data: LabeledDataset,
    sweep: ThresholdSweep,
    *,
    split: SplitSpec | None = None,
    benign_rows: BenignRows = BenignRows.VALIDATION,
    dataset_id: str = "dataset",
    loss_kind: LossKind | None = None,
    threads: int = 1,
    timestamp: str | None = None,
    ignored_columns: typing.Sequence[str] = (),
) -> EvalReport:
    """Score benign rows for specificity and every attack class in full for recall.

    Each attack class plays the part of a zero-day attack: nothing about it was
    seen when the pipeline and model were fitted, and nothing here refits them.
    """
    split = split or SplitSpec()
    kind = LossKind(loss_kind) if loss_kind is not None else model.loss_kind

    def flags(rows: np.ndarray) -> list[np.ndarray]:
        scores = score(model, apply_pipeline(pipeline, rows, threads), kind, threads)
        return [scores > threshold for threshold in sweep]

    benign_flags = flags(_benign_rows(data, benign_rows, split))
    attack_flags = {}
    for label in data.attack_classes:
        attack_flags[label] = flags(data.rows_of(label))
        logger.info(
            "%s: %s recall %s",
            dataset_id,
            label,
            ", ".join(f"{np.mean(f):.4f}" for f in attack_flags[label]),
        )

    metadata = ReportMetadata(
        pipeline.fingerprint(),
        [model.fingerprint()],
        split.seed,
        timestamp or _now(),
        benign_rows,
        loss_kind=str(kind),
        score_definition=SCORE_DEFINITION,
        ignored_columns=ignored_columns,
    )
    return _assemble(
        Detector.AUTOENCODER, data, sweep, benign_flags, attack_flags, dataset_id, metadata
    )


def evaluate_ocsvm(
    X_benign_train: np.ndarray,
    data: LabeledDataset,
    pipeline: PreprocessPipeline,
    nus: typing.Iterable[float],
    kernel: KernelSpec | None = None,
    cfg: SmoConfig | None = None,
    *,
    models: typing.Mapping[float, OneClassSvmModel] | None = None,
    split: SplitSpec | None = None,
    benign_rows: BenignRows = BenignRows.VALIDATION,
    dataset_id: str = "dataset",
    threads: int = 1,
    timestamp: str | None = None,
    ignored_columns: typing.Sequence[str] = (),
) -> EvalReport:
    """Fit one model per nu on the (already transformed) benign training rows and
    record specificity and per-class recall for each.

    Pre-fitted models keyed by nu are used as-is when given.
    """
    split = split or SplitSpec()
    sweep = ThresholdSweep.of(nus)
    fitted: dict[float, OneClassSvmModel] = {}
    for nu in sweep:
        if models is not None and nu in models:
            fitted[nu] = models[nu]
            continue
        try:
            fitted[nu] = fit(X_benign_train, nu, kernel, cfg)
        except (ZerodayError, ValueError) as e:
            e.add_note(f"while fitting the One-Class SVM with nu={nu}")
            raise

    def flags(rows: np.ndarray) -> list[np.ndarray]:
        transformed = apply_pipeline(pipeline, rows, threads)
        return [fitted[nu].decision_values(transformed, threads) <= 0 for nu in sweep]

    benign_flags = flags(_benign_rows(data, benign_rows, split))
    attack_flags = {label: flags(data.rows_of(label)) for label in data.attack_classes}

    metadata = ReportMetadata(
        pipeline.fingerprint(),
        [fitted[nu].fingerprint() for nu in sweep],
        split.seed,
        timestamp or _now(),
        benign_rows,
        gamma=fitted[sweep.values[0]].kernel.gamma,
        ignored_columns=ignored_columns,
    )
    return _assemble(
        Detector.OCSVM, data, sweep, benign_flags, attack_flags, dataset_id, metadata
    )
