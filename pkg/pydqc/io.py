# SPDX-License-Identifier: BSD-3-Clause

"""CSV and JSON artifacts exchanged between pipeline steps."""

import json
import logging

import numpy as np
import pandas as pd

from pathlib import Path

from .errors import DQCDataError
from .schemas import DataMatrix, PointSet

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _parent(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents = True, exist_ok = True)
    return path


def write_points(path, points: PointSet) -> Path:
    """Write `id`, optional `label`, then `x1..xr` with 17 significant digits."""
    frame = pd.DataFrame(points.coords, columns = [f"x{k + 1}" for k in range(points.r)])
    if points.labels is not None:
        frame.insert(0, "label", points.labels)
    frame.insert(0, "id", points.ids)
    path = _parent(path)
    frame.to_csv(path, index = False, float_format = FLOAT_FORMAT)
    return path


def read_points(path) -> PointSet:
    """
    Read a points CSV written by `write_points()`.

    Raises:
        DQCDataError: If the file is missing, empty or has no coordinate column.
    """
    path = Path(path)
    if not path.is_file():
        raise DQCDataError("MISSING_INPUT", f"({path})")
    try:
        frame = pd.read_csv(
            path, dtype = { "id": str, "label": str }, keep_default_na = False, float_precision = "round_trip"
        )
    except pd.errors.EmptyDataError:
        raise DQCDataError("EMPTY_INPUT", f"({path})")

    columns = [c for c in frame.columns if c not in ("id", "label")]
    if frame.shape[0] == 0 or not columns:
        raise DQCDataError("EMPTY_INPUT", f"({path})")
    try:
        coords = frame[columns].to_numpy(dtype = np.float64)
    except ValueError as exc:
        raise DQCDataError("NON_NUMERIC", f"({path}: {exc})")
    if not np.all(np.isfinite(coords)):
        raise DQCDataError("NON_FINITE", f"({path})")

    return PointSet(
        coords,
        frame["id"].to_numpy() if "id" in frame else None,
        frame["label"].to_numpy() if "label" in frame else None,
    )


def write_matrix(path, m: DataMatrix) -> Path:
    """Write a data matrix with its `id` and optional `label` columns."""
    frame = pd.DataFrame(m.values, columns = list(m.feature_names))
    if m.labels is not None:
        frame.insert(0, "label", m.labels)
    frame.insert(0, "id", m.ids)
    path = _parent(path)
    frame.to_csv(path, index = False, float_format = FLOAT_FORMAT)
    return path


def write_labels(path, ids, labels) -> Path:
    path = _parent(path)
    pd.DataFrame({ "id": ids, "label": labels }).to_csv(path, index = False)
    return path


def read_labels(path) -> pd.Series:
    """Read an `id,label` CSV (any file with both columns) as a Series indexed by id."""
    path = Path(path)
    if not path.is_file():
        raise DQCDataError("MISSING_INPUT", f"({path})")
    frame = pd.read_csv(path, dtype = str, keep_default_na = False)
    for column in ("id", "label"):
        if column not in frame.columns:
            raise DQCDataError("LABEL_COLUMN", f"({path} has no {column} column)")
    return frame.set_index("id")["label"]


def write_json(path, record: dict) -> Path:
    path = _parent(path)
    path.write_text(json.dumps(record, indent = 2) + "\n", encoding = "utf-8")
    return path


def write_jsonl(path, records) -> Path:
    path = _parent(path)
    with path.open("w", encoding = "utf-8") as fp:
        for record in records:
            fp.write(json.dumps(record) + "\n")
    return path


def write_singular_values(path, s: np.ndarray) -> Path:
    path = _parent(path)
    pd.DataFrame({ "index": np.arange(1, len(s) + 1), "singular_value": s }).to_csv(
        path, index = False, float_format = FLOAT_FORMAT
    )
    return path
