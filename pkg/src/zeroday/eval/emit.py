from __future__ import annotations

import enum
import io
from decimal import Decimal
from pathlib import Path

import babel
import babel.numbers
import pandas as pd

from zeroday.errors import DataError
from zeroday.eval.report import ComparisonReport, EvalReport
from zeroday.store import load_document, save_document, store_converter, write_atomic

EVAL_REPORT_FORMAT = "zeroday.eval-report"
COMPARISON_FORMAT = "zeroday.comparison"
OVERALL_ROW = "overall accuracy"
DEFAULT_LOCALE = "en"


class ReportFormat(enum.StrEnum):
    CSV = "csv"
    JSON = "json"
    MARKDOWN = "markdown"

    @property
    def suffix(self) -> str:
        return ".md" if self is ReportFormat.MARKDOWN else f".{self}"


type Report = EvalReport | ComparisonReport


def _percent(rate: float) -> str:
    return f"{100.0 * rate:.2f}"


def rate_table(report: Report, include_overall: bool = True) -> pd.DataFrame:
    """Rates as fractions: one row per class, one column per sweep value.

    Comparison reports get one column per detector plus the winner.
    """
    if isinstance(report, ComparisonReport):
        frame = pd.DataFrame(
            {
                "autoencoder": [p.autoencoder_rate for p in report.pairs],
                "ocsvm": [p.ocsvm_rate for p in report.pairs],
                "winner": [str(p.winner) for p in report.pairs],
            },
            index=pd.Index(report.classes, name="class"),
        )
        return frame

    rows = {label: [report.rate(label, v) for v in report.sweep] for label in report.classes}
    if include_overall:
        rows[OVERALL_ROW] = list(report.overall_accuracy)
    frame = pd.DataFrame.from_dict(
        rows, orient="index", columns=[repr(v) for v in report.sweep]
    )
    frame.index.name = "class"
    return frame


def _table_text(frame: pd.DataFrame) -> str:
    formatted = frame.copy()
    for column in formatted.columns:
        if pd.api.types.is_float_dtype(formatted[column]):
            formatted[column] = formatted[column].map(_percent)
    buffer = io.StringIO()
    formatted.to_csv(buffer, lineterminator="\n")
    return buffer.getvalue()


def _markdown(frame: pd.DataFrame, locale: str) -> str:
    text_locale = babel.Locale.parse(locale)

    def cell(value) -> str:
        if isinstance(value, float):
            rounded = Decimal(_percent(value))
            return babel.numbers.format_decimal(rounded, "#,##0.00", locale=text_locale) + "%"
        return str(value)

    def header(column) -> str:
        try:
            return babel.numbers.format_decimal(Decimal(column), locale=text_locale)
        except ArithmeticError:
            return str(column)

    lines = [
        "| " + " | ".join([frame.index.name, *(header(c) for c in frame.columns)]) + " |",
        "|" + "---|" + "---:|" * len(frame.columns),
    ]
    for label, row in frame.iterrows():
        lines.append("| " + " | ".join([str(label), *(cell(v) for v in row)]) + " |")
    return "\n".join(lines) + "\n"


def emit_report(
    report: Report | pd.DataFrame,
    format: ReportFormat | str,
    path: Path | str,
    locale: str = DEFAULT_LOCALE,
) -> Path:
    """Write a report; rates are rounded to two decimals (as percentages) except in
    json, which keeps full precision and the metadata block.

    A rate table read back by `load_report` can be emitted again as csv or markdown.
    """
    format = ReportFormat(format)
    path = Path(path)
    try:
        if format is ReportFormat.JSON:
            if isinstance(report, pd.DataFrame):
                raise ValueError("json reports need the full report, not a rate table")
            kind = EVAL_REPORT_FORMAT if isinstance(report, EvalReport) else COMPARISON_FORMAT
            return save_document(path, kind, {"report": store_converter.unstructure(report)})

        if isinstance(report, pd.DataFrame):
            frame = report
        else:
            frame = rate_table(report, include_overall=format is ReportFormat.CSV)
        if format is ReportFormat.CSV:
            write_atomic(path, _table_text(frame))
        else:
            write_atomic(path, _markdown(frame, locale))
    except OSError as e:
        raise DataError(f"Cannot write report {path}: {e}") from e
    return path


def write_plot_data(comparison: ComparisonReport, path: Path | str) -> Path:
    """Two series per class, for plotting outside this package."""
    frame = rate_table(comparison)[["autoencoder", "ocsvm"]]
    frame = frame.rename(columns={"autoencoder": "ae_rate", "ocsvm": "svm_rate"})
    path = Path(path)
    write_atomic(path, _table_text(frame))
    return path


def _read_rate_table(path: Path) -> pd.DataFrame:
    cells = pd.read_csv(path, index_col=0, dtype=str, keep_default_na=False)
    frame = pd.DataFrame(index=cells.index)
    for column in cells.columns:
        parsed = pd.to_numeric(cells[column], errors="coerce")
        if parsed.notna().all():
            frame[column] = parsed / 100.0
        else:
            frame[column] = cells[column]
    return frame


def load_report(path: Path | str) -> Report | pd.DataFrame:
    """Read a json report back in full, or a csv report as its rate table."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path} does not exist")
    if path.suffix == ".csv":
        return _read_rate_table(path)

    document = load_document(path, (EVAL_REPORT_FORMAT, COMPARISON_FORMAT))
    cls = EvalReport if document["format"] == EVAL_REPORT_FORMAT else ComparisonReport
    return store_converter.structure(document["report"], cls)

