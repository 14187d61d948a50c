from __future__ import annotations

from zeroday.errors import DataError
from zeroday.eval.report import ComparedClass, ComparisonReport, EvalReport, Winner


def compare(a: EvalReport, b: EvalReport, t: float, v: float) -> ComparisonReport:
    """Pair every class's rate in `a` at sweep value `t` with `b` at `v`.

    `a` is reported as the autoencoder side and `b` as the One-Class SVM side.
    Benign is compared through its specificity.
    """
    if a.dataset_id != b.dataset_id:
        raise DataError(
            f"Reports are for different datasets: {a.dataset_id!r} and {b.dataset_id!r}"
        )
    classes_a, classes_b = set(a.classes), set(b.classes)
    if classes_a != classes_b:
        raise DataError(
            "Reports cover different classes: "
            + ", ".join(sorted(classes_a ^ classes_b))
        )
    for report, value in ((a, t), (b, v)):
        report.sweep.index(value)

    pairs = []
    for label in sorted(classes_a):
        rate_a, rate_b = a.rate(label, t), b.rate(label, v)
        if rate_a > rate_b:
            winner = Winner.AUTOENCODER
        elif rate_b > rate_a:
            winner = Winner.OCSVM
        else:
            winner = Winner.TIE
        pairs.append(ComparedClass(label, rate_a, rate_b, winner))
    return ComparisonReport(a.dataset_id, t, v, pairs)
