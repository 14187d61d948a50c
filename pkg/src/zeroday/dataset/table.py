from __future__ import annotations

import enum
import logging
import typing
from pathlib import Path

import numpy as np
import pandas as pd
from attrs import define, field

from zeroday.errors import DataError

logger = logging.getLogger(__name__)

NAN_TOKENS = {"nan", "+nan", "-nan"}

type Vocabulary = dict[str, tuple[str, ...]]


class ColumnKind(enum.StrEnum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@define(frozen=True)
class FeatureTable:
    """Raw feature columns of one CSV file, with the label column held separately.

    Numeric columns are float64 and finite; categorical columns hold stripped text
    tokens. Rows that had non-finite numeric cells were dropped at load time and
    counted in `rejected_rows`.
    """

    frame: pd.DataFrame = field(eq=False)
    kinds: dict[str, ColumnKind] = field()
    labels: tuple[str, ...] | None = field(default=None)
    label_name: str | None = field(default=None)
    ignored: tuple[str, ...] = field(default=(), converter=tuple)
    rejected_rows: int = field(default=0)

    @kinds.validator  # type: ignore
    def check_kinds(self, _, kinds: dict[str, ColumnKind]):
        names = list(self.frame.columns)
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"Duplicate column names: {', '.join(dupes)}")
        if list(kinds.keys()) != names:
            raise ValueError("Column kinds must be given for every column, in order")
        for name, kind in kinds.items():
            if kind is ColumnKind.NUMERIC:
                if not np.isfinite(self.frame[name].to_numpy(np.float64)).all():
                    raise ValueError(f"Numeric column {name} holds non-finite values")

    @labels.validator  # type: ignore
    def check_labels(self, _, labels: tuple[str, ...] | None):
        if labels is not None and len(labels) != len(self.frame):
            raise ValueError("Exactly one label is needed per row")

    @property
    def column_names(self) -> list[str]:
        return list(self.frame.columns)

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    @property
    def categorical_columns(self) -> list[str]:
        return [k for k, v in self.kinds.items() if v is ColumnKind.CATEGORICAL]

    @property
    def is_numeric(self) -> bool:
        return not self.categorical_columns

    def matrix(self) -> np.ndarray:
        if not self.is_numeric:
            raise ValueError(
                f"Table still has categorical columns: {self.categorical_columns}"
            )
        return self.frame.to_numpy(dtype=np.float64, copy=True)


def _read_cells(path: Path, has_header: bool) -> pd.DataFrame:
    try:
        cells = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as e:
        raise DataError(f"{path} is empty") from e
    except UnicodeDecodeError as e:
        raise DataError(
            f"{path} is not UTF-8 text: {e.reason} at byte {e.start}"
        ) from e
    except pd.errors.ParserError as e:
        # pandas names the offending line, e.g. "Expected 4 fields in line 7, saw 5"
        raise DataError(f"{path}: ragged row: {e}") from e

    # short rows are padded with NaN (empty cells are "" with keep_default_na off)
    short = cells.isna().any(axis=1).to_numpy()
    if short.any():
        line = int(np.flatnonzero(short)[0]) + 1
        raise DataError(
            f"{path}: ragged row: line {line} has fewer fields than the header"
        )
    if len(cells) < (2 if has_header else 1):
        raise DataError(f"{path} has no data rows")
    return cells


def _unparsed(cells: pd.Series) -> pd.Series:
    parsed = pd.to_numeric(cells, errors="coerce")
    return parsed.isna() & ~cells.str.strip().str.lower().isin(NAN_TOKENS)


def _infer_kind(cells: pd.Series) -> tuple[ColumnKind, pd.Series]:
    if _unparsed(cells).any():
        return ColumnKind.CATEGORICAL, cells.str.strip()
    # float() is correctly rounded, so written reprs read back bit-for-bit
    return ColumnKind.NUMERIC, cells.str.strip().map(float).astype(np.float64)


def _check_columns(
    path: Path, found: list[str], expected: typing.Mapping[str, ColumnKind]
):
    if found == list(expected):
        return
    missing = [n for n in expected if n not in found]
    extra = [n for n in found if n not in expected]
    if not missing and not extra:
        raise DataError(
            f"{path}: columns are in a different order than the training file"
        )
    raise DataError(
        f"{path}: columns differ from the training file "
        f"(missing: {', '.join(missing) or 'none'}; "
        f"unexpected: {', '.join(extra) or 'none'})"
    )


def load_feature_csv(
    path: Path | str,
    label_column: str | None = None,
    *,
    names: list[str] | None = None,
    force_categorical: list[str] | tuple[str, ...] = (),
    ignore_columns: list[str] | tuple[str, ...] = (),
    expected_kinds: typing.Mapping[str, ColumnKind] | None = None,
) -> FeatureTable:
    """Load a comma-separated feature file.

    A column is categorical iff any of its cells fails to parse as a number, or it
    is listed in `force_categorical` (for numeric-looking codes). `names` supplies
    the header for files that lack one; ignored columns are dropped and recorded.

    `expected_kinds` (the training file's `kinds`) pins a test file to the same
    columns: categorical columns stay categorical whatever their tokens look like,
    and a numeric column holding text is a DataError.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path} does not exist")

    cells = _read_cells(path, has_header=names is None)
    if names is None:
        header = [str(h).strip() for h in cells.iloc[0]]
        cells = cells.iloc[1:].reset_index(drop=True)
    else:
        header = list(names)
    if len(header) != cells.shape[1]:
        raise DataError(
            f"{path}: {len(header)} column names for {cells.shape[1]} fields per row"
        )
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"{path}: duplicate column names: {', '.join(dupes)}")
    cells.columns = header

    for name in [label_column, *force_categorical, *ignore_columns]:
        if name is not None and name not in header:
            raise DataError(f"{path}: no column named {name!r}")

    labels = None
    if label_column is not None:
        labels = cells.pop(label_column).str.strip()

    if expected_kinds is not None:
        kept = [n for n in cells.columns if n not in ignore_columns]
        _check_columns(path, kept, expected_kinds)

    kinds: dict[str, ColumnKind] = {}
    columns: dict[str, pd.Series] = {}
    for name in cells.columns:
        if name in ignore_columns:
            continue
        expected = expected_kinds.get(name) if expected_kinds is not None else None
        if name in force_categorical or expected is ColumnKind.CATEGORICAL:
            kinds[name], columns[name] = ColumnKind.CATEGORICAL, cells[name].str.strip()
            continue
        kinds[name], columns[name] = _infer_kind(cells[name])
        if expected is ColumnKind.NUMERIC and kinds[name] is ColumnKind.CATEGORICAL:
            unparsed = cells[name][_unparsed(cells[name])]
            line = int(unparsed.index[0]) + (1 if names is None else 0) + 1
            raise DataError(
                f"{path}: column {name!r} is numeric in the training file but line "
                f"{line} holds {unparsed.iloc[0].strip()!r}"
            )
    frame = pd.DataFrame(columns)

    numeric = [k for k, v in kinds.items() if v is ColumnKind.NUMERIC]
    finite = np.isfinite(frame[numeric].to_numpy(np.float64)).all(axis=1)
    rejected = int((~finite).sum())
    if rejected:
        logger.warning(
            "%s: rejected %d rows with non-finite numeric cells", path.name, rejected
        )
        frame = frame[finite].reset_index(drop=True)
        if labels is not None:
            labels = labels[finite].reset_index(drop=True)

    logger.info(
        "Loaded %s: %d rows, %d columns (%d categorical)",
        path.name,
        len(frame),
        len(kinds),
        len(kinds) - len(numeric),
    )
    return FeatureTable(
        frame,
        kinds,
        labels=tuple(labels) if labels is not None else None,
        label_name=label_column,
        ignored=tuple(ignore_columns),
        rejected_rows=rejected,
    )


def learn_vocabulary(table: FeatureTable) -> Vocabulary:
    return {
        name: tuple(sorted(set(table.frame[name])))
        for name in table.categorical_columns
    }


def encode_categoricals(
    table: FeatureTable, vocabulary: Vocabulary | None = None
) -> FeatureTable:
    """One-hot encode categorical columns in place, tokens ordered lexicographically.

    Pass the training file's vocabulary when encoding a test file so both get the
    same columns; tokens outside the vocabulary become all-zero indicator rows.
    """
    vocabulary = learn_vocabulary(table) if vocabulary is None else vocabulary
    parts: list[pd.DataFrame] = []
    for name in table.column_names:
        if table.kinds[name] is ColumnKind.NUMERIC:
            parts.append(table.frame[[name]])
            continue

        tokens = vocabulary.get(name)
        if tokens is None:
            tokens = tuple(sorted(set(table.frame[name])))
        unseen = set(table.frame[name]) - set(tokens)
        if unseen:
            logger.warning(
                "Column %s: %d unseen tokens encoded as all-zero (%s)",
                name,
                len(unseen),
                ", ".join(sorted(unseen)[:5]),
            )
        indicators = pd.get_dummies(
            pd.Categorical(table.frame[name], categories=list(tokens)),
            prefix=name,
            prefix_sep="_",
            dtype=np.float64,
        )
        indicators.index = table.frame.index
        parts.append(indicators)

    frame = pd.concat(parts, axis=1) if parts else table.frame.copy()
    return FeatureTable(
        frame,
        {name: ColumnKind.NUMERIC for name in frame.columns},
        labels=table.labels,
        label_name=table.label_name,
        ignored=table.ignored,
        rejected_rows=table.rejected_rows,
    )


def write_feature_csv(table: FeatureTable, path: Path | str) -> Path:
    """Canonical writer: shortest round-trip decimal for every numeric cell."""
    path = Path(path)
    out = pd.DataFrame(index=table.frame.index)
    for name in table.column_names:
        if table.kinds[name] is ColumnKind.NUMERIC:
            out[name] = table.frame[name].astype(np.float64).map(float.__repr__)
        else:
            out[name] = table.frame[name]
    if table.labels is not None:
        out[table.label_name or "label"] = list(table.labels)

    path.parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path
