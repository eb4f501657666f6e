"""
Column-typed datasets and CSV ingestion.

Continuous columns hold floats; categorical columns hold 0-based codes into a
per-column dictionary built in first-appearance order. Rows with a missing
cell in any declared column are dropped and counted.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.exceptions import ArgumentError, DatasetError, ShapeError
from density.distributions import SupportSignature

logger = logging.getLogger(__name__)

CONTINUOUS = 'continuous'
CATEGORICAL = 'categorical'
COLUMN_KINDS = (CONTINUOUS, CATEGORICAL)


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    categories: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in COLUMN_KINDS:
            raise ArgumentError(f"column {self.name!r} has unknown kind {self.kind!r}")
        object.__setattr__(self, 'categories', tuple(str(c) for c in self.categories))

    @property
    def cardinality(self) -> int:
        return len(self.categories)


class MixedDataset:
    """Rectangular table of continuous and categorical columns"""

    def __init__(self, frame: pd.DataFrame, columns: Sequence[ColumnSpec], dropped_count: int = 0):
        columns = list(columns)
        names = [column.name for column in columns]
        if len(set(names)) != len(names):
            raise ArgumentError(f"duplicate column names in {names}")
        missing = [name for name in names if name not in frame.columns]
        if missing:
            raise ShapeError(f"frame lacks declared columns {missing}")
        frame = frame[names].reset_index(drop=True).copy()
        for column in columns:
            if column.kind == CONTINUOUS:
                frame[column.name] = frame[column.name].astype(float)
            else:
                codes = frame[column.name].astype(np.int64)
                if len(codes) and (codes.min() < 0 or codes.max() >= column.cardinality):
                    raise ShapeError(f"column {column.name!r} has codes outside its dictionary")
                frame[column.name] = codes
        self._frame = frame
        self._columns = {column.name: column for column in columns}
        self.dropped_count = int(dropped_count)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_arrays(cls, continuous: Optional[Dict[str, np.ndarray]] = None,
                    categorical: Optional[Dict[str, Tuple[np.ndarray, Sequence[str]]]] = None) -> 'MixedDataset':
        """Build from {name: values} and {name: (codes, categories)}"""
        data, columns = {}, []
        for name, values in (continuous or {}).items():
            data[name] = np.asarray(values, dtype=float)
            columns.append(ColumnSpec(name, CONTINUOUS))
        for name, (codes, categories) in (categorical or {}).items():
            data[name] = np.asarray(codes, dtype=np.int64)
            columns.append(ColumnSpec(name, CATEGORICAL, tuple(categories)))
        return cls(pd.DataFrame(data), columns)

    # -- introspection --------------------------------------------------------

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame

    @property
    def columns(self) -> List[ColumnSpec]:
        return list(self._columns.values())

    @property
    def names(self) -> List[str]:
        return list(self._columns)

    @property
    def n_rows(self) -> int:
        return int(len(self._frame))

    def __len__(self) -> int:
        return self.n_rows

    def column(self, name: str) -> ColumnSpec:
        try:
            return self._columns[name]
        except KeyError:
            raise ArgumentError(f"unknown column {name!r}; dataset has {self.names}") from None

    def _names_of_kind(self, kind: str, names: Optional[Sequence[str]]) -> List[str]:
        names = self.names if names is None else list(names)
        return [name for name in names if self.column(name).kind == kind]

    def continuous_names(self, names: Optional[Sequence[str]] = None) -> List[str]:
        return self._names_of_kind(CONTINUOUS, names)

    def categorical_names(self, names: Optional[Sequence[str]] = None) -> List[str]:
        return self._names_of_kind(CATEGORICAL, names)

    def continuous_block(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        selected = self.continuous_names(names)
        return self._frame[selected].to_numpy(dtype=float).reshape(self.n_rows, len(selected))

    def categorical_block(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        selected = self.categorical_names(names)
        return self._frame[selected].to_numpy(dtype=np.int64).reshape(self.n_rows, len(selected))

    def cardinalities(self, names: Optional[Sequence[str]] = None) -> Tuple[int, ...]:
        return tuple(self.column(name).cardinality for name in self.categorical_names(names))

    def signature(self, names: Optional[Sequence[str]] = None) -> SupportSignature:
        return SupportSignature(len(self.continuous_names(names)), self.cardinalities(names))

    def variable_indices(self, subset: Sequence[str], within: Sequence[str]) -> List[int]:
        """
        Positions of the subset columns in the variable ordering of `within`
        (continuous columns first, then categorical).
        """
        order = self.continuous_names(within) + self.categorical_names(within)
        unknown = [name for name in subset if name not in order]
        if unknown:
            raise ArgumentError(f"columns {unknown} are not among {order}")
        return [order.index(name) for name in subset]

    def design_matrix(self, names: Sequence[str]) -> Tuple[np.ndarray, List[str]]:
        """
        Regression design without intercept: continuous columns as they are,
        categorical columns as indicators of every category but the first.
        """
        blocks, labels = [], []
        for name in names:
            column = self.column(name)
            values = self._frame[name].to_numpy()
            if column.kind == CONTINUOUS:
                blocks.append(values.astype(float)[:, None])
                labels.append(name)
                continue
            for code, category in enumerate(column.categories[1:], start=1):
                blocks.append((values == code).astype(float)[:, None])
                labels.append(f'{name}={category}')
        if not blocks:
            return np.zeros((self.n_rows, 0)), []
        return np.hstack(blocks), labels

    # -- derived datasets -----------------------------------------------------

    def select(self, names: Sequence[str]) -> 'MixedDataset':
        return MixedDataset(self._frame, [self.column(name) for name in names])

    def subset(self, rows) -> 'MixedDataset':
        """Row subset keeping every category dictionary intact"""
        return MixedDataset(self._frame.iloc[np.asarray(rows)], self.columns)

    def decoded_frame(self) -> pd.DataFrame:
        frame = self._frame.copy()
        for column in self.columns:
            if column.kind == CATEGORICAL:
                frame[column.name] = np.asarray(column.categories, dtype=object)[frame[column.name].to_numpy()]
        return frame

    def schema(self) -> Dict[str, str]:
        return {column.name: column.kind for column in self.columns}

    def to_csv(self, path) -> None:
        self.decoded_frame().to_csv(path, index=False)

    def write_schema(self, path) -> None:
        Path(path).write_text(json.dumps(self.schema(), indent=2))


def schema_path_for(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + '.schema.json')


def ingest_csv(path, schema: Dict[str, str]) -> MixedDataset:
    """
    Read a CSV file into a typed dataset.

    schema maps column names to 'continuous' or 'categorical'; columns not
    named are ignored. Row numbers in errors count data rows from 1.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"file not found: {path}")
    if not schema:
        raise DatasetError("a column schema is required")
    for name, kind in schema.items():
        if kind not in COLUMN_KINDS:
            raise DatasetError(f"column {name!r} declared with unknown kind {kind!r}", column=name)

    try:
        raw = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError as exc:
        raise DatasetError(f"{path} is empty") from exc

    missing = [name for name in schema if name not in raw.columns]
    if missing:
        raise DatasetError(f"{path} has no column(s) {missing}")
    raw = raw[list(schema)]
    if raw.empty:
        raise DatasetError(f"{path} has a header but no data rows")

    incomplete = raw.isna().any(axis=1)
    dropped = int(incomplete.sum())
    if dropped:
        logger.warning(f"Dropped {dropped} row(s) with missing cells from {path.name}")
    raw = raw[~incomplete]

    data, columns = {}, []
    for name, kind in schema.items():
        values = raw[name].str.strip()
        if kind == CONTINUOUS:
            parsed = pd.to_numeric(values, errors='coerce')
            bad = parsed.isna()
            if bad.any():
                position = bad.idxmax()
                raise DatasetError(
                    f"row {position + 1}, column {name!r}: cannot parse {values[position]!r} as a number",
                    row=position + 1, column=name,
                )
            data[name] = parsed.to_numpy(dtype=float)
            columns.append(ColumnSpec(name, CONTINUOUS))
        else:
            categories = pd.unique(values)
            data[name] = pd.Categorical(values, categories=categories).codes.astype(np.int64)
            columns.append(ColumnSpec(name, CATEGORICAL, tuple(categories)))

    dataset = MixedDataset(pd.DataFrame(data), columns, dropped_count=dropped)
    if dataset.n_rows == 0:
        raise DatasetError(f"{path} has no complete rows")
    logger.info(f"Loaded {dataset.n_rows} rows x {len(columns)} columns from {path.name}")
    return dataset


def load_dataset(path, schema: Optional[Dict[str, str]] = None) -> MixedDataset:
    """ingest_csv with the schema taken from the sidecar file when not given"""
    if schema is None:
        sidecar = schema_path_for(path)
        if not sidecar.exists():
            raise DatasetError(f"no schema given and no sidecar {sidecar.name} next to {Path(path).name}")
        schema = json.loads(sidecar.read_text())
    return ingest_csv(path, schema)
