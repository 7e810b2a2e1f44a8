"""CSV to Dataset: listwise deletion, dummy coding, standardization."""

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from utils.errors import ConstantColumnWarning, NonBinaryOutcome, ParseError
from utils.model import Dataset
from utils.projection import dummy_encode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IngestResult:
    dataset: Dataset
    dropped_rows: int
    dropped_columns: Tuple[str, ...]
    treatment_labels: Tuple[str, ...]


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce")
    bad = values.isna()
    if bad.any():
        index = bad.idxmax()
        # header is line 1
        raise ParseError(f"non-numeric value {frame.at[index, column]!r}", row=int(index) + 2, column=column)
    return values.to_numpy(dtype=float)


def _levels(series: pd.Series) -> Tuple[List[str], np.ndarray]:
    labels = sorted(series.astype(str).unique())
    numeric = pd.to_numeric(pd.Series(labels), errors="coerce")
    if numeric.notna().all():
        # numeric codes order by value, so "9" precedes "10"
        labels = [labels[k] for k in np.argsort(numeric.to_numpy(), kind="stable")]
    codes = series.astype(str).map({label: k for k, label in enumerate(labels)}).to_numpy()
    return labels, codes


def _treatment(frame: pd.DataFrame, column: str, categorical: bool) -> Tuple[np.ndarray, Tuple[str, ...]]:
    if categorical:
        labels, codes = _levels(frame[column])
        return codes, tuple(labels)
    x = _numeric(frame, column)
    return x, tuple(str(v) for v in np.unique(x))


def _is_indicator(values: np.ndarray) -> bool:
    return bool(np.all((values == 0.0) | (values == 1.0)))


def load_csv(
    path: Union[str, Path],
    treatment_column: str,
    outcome_column: str,
    categorical_columns: Sequence[str] = (),
) -> IngestResult:
    """Read a CSV and build the Dataset, reporting what was removed.

    A categorical column with L levels becomes L - 1 indicator columns. The
    lowest level is the reference, ordered by value when every label is a
    number and by string otherwise. Other columns are standardized to
    mean 0 and population sd 1; columns already coded 0/1 are kept as
    indicators, so ingesting an export of the result changes nothing.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"cannot read {path}: {str(e)}") from e

    for column in (treatment_column, outcome_column, *categorical_columns):
        if column not in frame.columns:
            raise ParseError(f"column not found in {path.name}", column=column)

    complete = frame.dropna(how="any")
    dropped_rows = len(frame) - len(complete)
    if dropped_rows:
        logger.warning(f"Removed {dropped_rows} row(s) with missing values from {path.name}")
    if complete.empty:
        raise ParseError(f"{path.name} has no complete rows")

    y = _numeric(complete, outcome_column)
    if not _is_indicator(y):
        raise NonBinaryOutcome(f"outcome column '{outcome_column}' must contain only 0 and 1")
    x, labels = _treatment(complete, treatment_column, treatment_column in categorical_columns)

    blocks, names, dropped_columns = [], [], []
    for column in complete.columns:
        if column in (treatment_column, outcome_column):
            continue
        if column in categorical_columns:
            levels, codes = _levels(complete[column])
            if len(levels) < 2:
                dropped_columns.append(column)
                warnings.warn(f"categorical column '{column}' has a single level; dropped", ConstantColumnWarning)
                continue
            blocks.append(dummy_encode(codes, len(levels) - 1).astype(float))
            names.extend(f"{column}[{level}]" for level in levels[1:])
            continue

        values = _numeric(complete, column)
        sd = values.std()
        if sd == 0.0:
            dropped_columns.append(column)
            warnings.warn(f"column '{column}' is constant; dropped", ConstantColumnWarning)
            continue
        if not _is_indicator(values):
            values = (values - values.mean()) / sd
        blocks.append(values.reshape(-1, 1))
        names.append(column)

    if dropped_columns:
        logger.warning(f"Dropped constant column(s): {dropped_columns}")
    z = np.hstack(blocks) if blocks else np.empty((len(complete), 0))
    dataset = Dataset(y=y, x=x, z=z, feature_names=tuple(names))
    logger.info(f"Ingested {path.name}: n={dataset.n}, d={dataset.d}, K={dataset.levels}")
    return IngestResult(
        dataset=dataset,
        dropped_rows=dropped_rows,
        dropped_columns=tuple(dropped_columns),
        treatment_labels=labels,
    )


def ingest_csv(
    path: Union[str, Path],
    treatment_column: str,
    outcome_column: str,
    categorical_columns: Sequence[str] = (),
) -> Dataset:
    return load_csv(path, treatment_column, outcome_column, categorical_columns).dataset


def export_csv(
    dataset: Dataset,
    path: Union[str, Path],
    treatment_column: str = "x",
    outcome_column: str = "y",
    feature_names: Optional[Sequence[str]] = None,
) -> Path:
    """Write a Dataset back out with full float precision."""
    names = list(feature_names or dataset.feature_names or [f"z{j}" for j in range(dataset.d)])
    frame = pd.DataFrame(dataset.z, columns=names)
    frame.insert(0, treatment_column, dataset.x)
    frame.insert(0, outcome_column, dataset.y.astype(int))
    path = Path(path)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path
