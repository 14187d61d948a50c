from __future__ import annotations

import enum

import numpy as np
from attrs import define, field

OVERALL_ACCURACY_DEFINITION = (
    "instance-weighted: (benign rows passed + attack rows flagged) / all rows evaluated"
)
SCORE_DEFINITION = "per-instance reconstruction error, averaged over features"


class Detector(enum.StrEnum):
    AUTOENCODER = "autoencoder"
    OCSVM = "ocsvm"


class BenignRows(enum.StrEnum):
    """Which benign rows supply specificity.

    `validation` is the held-back 25% of the file the detector was trained on;
    `all` uses every benign row of a file that played no part in training.
    """

    VALIDATION = "validation"
    ALL = "all"


def _to_floats(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@define(frozen=True)
class ThresholdSweep:
    """Strictly increasing, positive sweep values (thresholds or nu)."""

    values: tuple[float, ...] = field(converter=_to_floats)

    @values.validator  # type: ignore
    def check_values(self, _, values: tuple[float, ...]):
        if not values:
            raise ValueError("A sweep needs at least one value")
        if min(values) <= 0:
            raise ValueError("Sweep values must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("Sweep values must be strictly increasing")

    @classmethod
    def of(cls, values) -> ThresholdSweep:
        return cls(sorted(set(float(v) for v in values)))

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def index(self, value: float) -> int:
        matches = np.flatnonzero(np.isclose(self.values, value, rtol=0, atol=1e-12))
        if matches.size == 0:
            raise ValueError(f"{value} is not in the sweep {list(self.values)}")
        return int(matches[0])


@define(frozen=True)
class ReportMetadata:
    pipeline_fingerprint: str
    model_fingerprints: tuple[str, ...] = field(converter=tuple)
    seed: int
    timestamp: str
    benign_rows: BenignRows = field(converter=BenignRows)
    loss_kind: str | None = None
    gamma: float | None = None
    score_definition: str | None = None
    overall_accuracy_definition: str = OVERALL_ACCURACY_DEFINITION
    ignored_columns: tuple[str, ...] = field(default=(), converter=tuple)


def _check_rate(rate: float, what: str):
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"{what} rate {rate} is outside [0, 1]")


@define(frozen=True)
class EvalReport:
    """Per-class detection rates across a sweep, for one detector on one file.

    Benign appears only as specificity (rows not flagged); every attack class is a
    recall (rows flagged), one entry per sweep value.
    """

    detector: Detector = field(converter=Detector)
    dataset_id: str = field()
    benign_label: str = field()
    sweep: ThresholdSweep = field()
    benign_specificity: tuple[float, ...] = field(converter=_to_floats)
    per_class_recall: dict[str, tuple[float, ...]] = field()
    class_counts: dict[str, int] = field()
    overall_accuracy: tuple[float, ...] = field(converter=_to_floats)
    metadata: ReportMetadata = field()

    @metadata.validator  # type: ignore
    def check_report(self, _, metadata: ReportMetadata):
        n = len(self.sweep)
        if self.benign_label in self.per_class_recall:
            raise ValueError("Benign must only appear as specificity")
        rows = {self.benign_label: self.benign_specificity, **self.per_class_recall}
        rows["overall accuracy"] = self.overall_accuracy
        for name, rates in rows.items():
            if len(rates) != n:
                raise ValueError(f"{name} has {len(rates)} rates for {n} sweep values")
            for rate in rates:
                _check_rate(rate, name)
        if set(self.class_counts) != {self.benign_label, *self.per_class_recall}:
            raise ValueError("Instance counts must cover benign and every attack class")

    @property
    def attack_classes(self) -> list[str]:
        return sorted(self.per_class_recall)

    @property
    def classes(self) -> list[str]:
        return [self.benign_label, *self.attack_classes]

    def specificity(self, value: float) -> float:
        return self.benign_specificity[self.sweep.index(value)]

    def recall(self, label: str, value: float) -> float:
        return self.per_class_recall[label][self.sweep.index(value)]

    def rate(self, label: str, value: float) -> float:
        """Detection accuracy as the published tables use it."""
        if label == self.benign_label:
            return self.specificity(value)
        return self.recall(label, value)


class Winner(enum.StrEnum):
    AUTOENCODER = "autoencoder"
    OCSVM = "ocsvm"
    TIE = "tie"


@define(frozen=True)
class ComparedClass:
    name: str
    autoencoder_rate: float
    ocsvm_rate: float
    winner: Winner = field(converter=Winner)


@define(frozen=True)
class ComparisonReport:
    dataset_id: str
    threshold: float
    nu: float
    pairs: tuple[ComparedClass, ...] = field(converter=tuple)

    @property
    def classes(self) -> list[str]:
        return [p.name for p in self.pairs]
