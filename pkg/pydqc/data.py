# SPDX-License-Identifier: BSD-3-Clause

"""Dataset ingestion, SVD and reduced point coordinates."""

import csv
import logging

import numpy as np
import pandas as pd

from pathlib import Path
from scipy import linalg

from .errors import DQCDataError, DQCNumericalError
from .schemas import DataMatrix, SvdFactorization, PointSet

logger = logging.getLogger(__name__)

# Rows whose selected-component norm falls below this stay at the origin.
DEGENERATE_NORM = 1e-12

_NON_FINITE_TOKENS = { "nan", "+nan", "-nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity" }


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, DataMatrix) else np.asarray(m, dtype = np.float64)


def _resolve_column(frame: pd.DataFrame, column, role: str):
    if isinstance(column, str) and column in frame.columns:
        return column
    if isinstance(column, str) and column.strip().isdigit():
        column = int(column)
    if isinstance(column, (int, np.integer)) and 0 <= column < frame.shape[1]:
        return frame.columns[column]

    logger.error(f"[pydqc][load_matrix] {role} column {column!r} not found")
    raise DQCDataError("LABEL_COLUMN", f"({role} column {column!r})")


def _check_row_widths(path: Path, delimiter: str, header: bool):
    # every record must have as many fields as the first line
    with open(path, newline = "", encoding = "utf-8") as f:
        rows = (r for r in csv.reader(f, delimiter = delimiter) if r)
        first = next(rows, None)
        if first is None:
            raise DQCDataError("EMPTY_INPUT", f"({path})")

        for i, r in enumerate(rows, start = 0 if header else 1):
            if len(r) != len(first):
                logger.error(f"[pydqc][load_matrix] row {i} has {len(r)} fields, expected {len(first)}")
                raise DQCDataError("RAGGED_ROW", f"(row {i}: {len(r)} fields, expected {len(first)})")


def load_matrix(path, delimiter: str|None = None, header: bool = True,
    label_column: str|int|None = None, id_column: str|int|None = None) -> DataMatrix:
    """
    Load a comma- or tab-delimited numeric table.

    Args:
        path: Location of a UTF-8 text file, one record per row.
        delimiter (str|None): Field delimiter. Defaults to a tab for `.tsv`
            and `.tab` files and a comma otherwise.
        header (bool): If True, the first row holds the column names.
        label_column (str|int|None): Column holding the expert labels, by
            name or 0-based position. It is split out of the values.
        id_column (str|int|None): Column holding record identifiers, split
            out of the values as well.

    Returns:
        DataMatrix: Values parsed as 64-bit floats.

    Raises:
        DQCDataError: If the file is missing, empty, ragged, or holds a
            non-numeric or non-finite cell.
    """
    path = Path(path)
    if not path.is_file():
        logger.error(f"[pydqc][load_matrix] missing input {path}")
        raise DQCDataError("MISSING_INPUT", f"({path})")

    if delimiter is None:
        delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","

    _check_row_widths(path, delimiter, header)

    try:
        frame = pd.read_csv(
            path, sep = delimiter, header = 0 if header else None, dtype = str, index_col = False,
            keep_default_na = False, na_filter = False, encoding = "utf-8"
        )
    except pd.errors.EmptyDataError:
        raise DQCDataError("EMPTY_INPUT", f"({path})")
    except pd.errors.ParserError as exc:
        logger.error(f"[pydqc][load_matrix] {exc}")
        raise DQCDataError("RAGGED_ROW", str(exc).strip())

    if frame.shape[0] == 0:
        raise DQCDataError("EMPTY_INPUT", f"({path})")

    labels = ids = None
    drop = []
    if label_column is not None:
        name = _resolve_column(frame, label_column, "label")
        labels = frame[name].str.strip().to_numpy()
        drop.append(name)
    if id_column is not None:
        name = _resolve_column(frame, id_column, "id")
        ids = frame[name].str.strip().to_numpy()
        drop.append(name)

    frame = frame.drop(columns = drop)
    if frame.shape[1] == 0:
        raise DQCDataError("EMPTY_INPUT", "(no numeric columns)")

    values = np.empty(frame.shape, dtype = np.float64)
    for j, name in enumerate(frame.columns):
        cells = frame[name].str.strip()
        parsed = pd.to_numeric(cells, errors = "coerce")
        bad = parsed.isna().to_numpy()
        if bad.any():
            row = int(np.argmax(bad))
            token = cells.iloc[row]
            code = "NON_FINITE" if token.lower() in _NON_FINITE_TOKENS else "NON_NUMERIC"
            logger.error(f"[pydqc][load_matrix] {code} {token!r} at row {row}, column {name}")
            raise DQCDataError(code, f"({token!r} at row {row}, column {name!r})")
        values[:, j] = parsed.to_numpy(dtype = np.float64)

    if not np.all(np.isfinite(values)):
        row, col = np.argwhere(~np.isfinite(values))[0]
        raise DQCDataError("NON_FINITE", f"(row {row}, column {frame.columns[col]!r})")

    feature_names = tuple(str(c) for c in frame.columns) if header else None
    logger.debug(f"[pydqc][load_matrix] {path} - n={values.shape[0]}, d={values.shape[1]}")
    return DataMatrix(values, feature_names, labels, ids)


def select_rows(m: DataMatrix, rows) -> DataMatrix:
    """Return the records selected by a boolean mask or an index array."""
    rows = np.asarray(rows)
    if rows.dtype == bool:
        rows = np.flatnonzero(rows)
    return DataMatrix(
        m.values[rows], m.feature_names,
        None if m.labels is None else m.labels[rows],
        m.ids[rows]
    )


def select_features(m: DataMatrix, columns) -> DataMatrix:
    """Return the features selected by a boolean mask or an index array."""
    columns = np.asarray(columns)
    if columns.dtype == bool:
        columns = np.flatnonzero(columns)
    names = tuple(m.feature_names[j] for j in columns)
    return DataMatrix(m.values[:, columns], names, m.labels, m.ids)


def drop_clusters(m: DataMatrix, ids, clusters, dropped) -> DataMatrix:
    """
    Remove the records assigned to some clusters, so that the rest of the
    data can be filtered and clustered again on its own.

    Args:
        m (DataMatrix): The data the clusters were computed from.
        ids: Record ids of the cluster assignment.
        clusters: Cluster label of every id in `ids`.
        dropped: Cluster labels whose records are removed.

    Returns:
        DataMatrix: The remaining records, in their original order.

    Raises:
        DQCDataError: If a record of `m` has no cluster label.
    """
    assignment = pd.Series(np.asarray(clusters).astype(str), index = np.asarray(ids).astype(str))
    keys = pd.Index(np.asarray(m.ids).astype(str))
    missing = ~keys.isin(assignment.index)
    if missing.any():
        logger.error(f"[pydqc][drop_clusters] {int(missing.sum())} records have no cluster label")
        raise DQCDataError("ID_MISMATCH", f"(record {keys[missing][0]!r} has no cluster label)")

    remove = assignment.reindex(keys).isin([str(c) for c in dropped]).to_numpy()
    logger.debug(f"[pydqc][drop_clusters] removing {int(remove.sum())} of {m.n} records")
    return select_rows(m, ~remove)


def _fix_signs(u: np.ndarray, v: np.ndarray, k: int):
    # largest-magnitude entry of each left singular vector is positive
    pivots = np.argmax(np.abs(u), axis = 0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u *= signs
    v[:, :k] *= signs[:k]

    if v.shape[1] > k:
        pivots = np.argmax(np.abs(v[:, k:]), axis = 0)
        signs = np.sign(v[pivots, np.arange(k, v.shape[1])])
        signs[signs == 0] = 1.0
        v[:, k:] *= signs


def svd_decompose(m, full: bool = True) -> SvdFactorization:
    """
    Compute M = U·diag(S)·Vᵀ.

    Singular vectors are oriented so that the largest-magnitude entry of each
    column of U is positive, which makes factorizations reproducible.

    Args:
        m (DataMatrix|array): The matrix to decompose.
        full (bool): If False, return the economy factorization where U is
            n×min(n,d).

    Returns:
        SvdFactorization: The oriented factors.

    Raises:
        DQCNumericalError: If LAPACK fails to converge.
    """
    values = _values(m)
    try:
        u, s, vt = linalg.svd(values, full_matrices = full, lapack_driver = "gesdd")
    except linalg.LinAlgError:
        logger.warning("[pydqc][svd] gesdd did not converge, retrying with gesvd")
        try:
            u, s, vt = linalg.svd(values, full_matrices = full, lapack_driver = "gesvd")
        except linalg.LinAlgError as exc:
            logger.error(f"[pydqc][svd] {exc}")
            raise DQCNumericalError("SVD_NO_CONVERGENCE", str(exc))

    v = vt.T.copy()
    _fix_signs(u, v, len(s))

    labels = m.labels if isinstance(m, DataMatrix) else None
    ids = m.ids if isinstance(m, DataMatrix) else np.arange(values.shape[0])
    logger.debug(f"[pydqc][svd] shape={values.shape} - S[:3]={s[:3]}")
    return SvdFactorization(u, s, v, labels, ids)


def _check_rank(f: SvdFactorization, rank: int):
    if not 1 <= rank <= len(f.s):
        raise ValueError(f"rank must lie in [1, {len(f.s)}], got {rank}.")


def low_rank_approx(f: SvdFactorization, rank: int) -> np.ndarray:
    """
    Sum of the `rank` leading terms S_νν·U[:, ν]·V[:, ν]ᵀ.

    The squared Frobenius error of the result equals `frobenius_tail(f, rank)`.
    """
    _check_rank(f, rank)
    return (f.u[:, :rank] * f.s[:rank]) @ f.v[:, :rank].T


def frobenius_tail(f: SvdFactorization, rank: int) -> float:
    """Squared singular values left out of a rank-`rank` approximation."""
    _check_rank(f, rank)
    return float(np.sum(f.s[rank:] ** 2))


def reduce_and_rescale(f: SvdFactorization, components, rescale: bool = True,
    weighted: bool = False) -> PointSet:
    """
    Use selected columns of U as point coordinates.

    Args:
        f (SvdFactorization): The factorization of the data.
        components: Component numbers counted from 1, e.g. (2, 3, 4).
        rescale (bool): If True, rescale every row to unit length. Rows
            whose selected norm is below 1e-12 stay at the origin and are
            flagged in `PointSet.degenerate`.
        weighted (bool): If True, use rows of U·S instead of U.

    Returns:
        PointSet: The reduced coordinates, carrying ids and labels.
    """
    components = [int(c) for c in components]
    if not components:
        raise ValueError("At least one SVD component must be selected.")
    k = len(f.s)
    for c in components:
        if not 1 <= c <= k:
            raise ValueError(f"SVD component numbers must lie in [1, {k}], got {c}.")

    idx = np.asarray(components) - 1
    coords = f.u[:, idx].copy()
    if weighted:
        coords *= f.s[idx]

    degenerate = np.zeros(coords.shape[0], dtype = bool)
    if rescale:
        norms = np.linalg.norm(coords, axis = 1)
        degenerate = norms < DEGENERATE_NORM
        coords[degenerate] = 0.0
        coords[~degenerate] /= norms[~degenerate, np.newaxis]
        if degenerate.any():
            logger.warning(f"[pydqc][reduce] {int(degenerate.sum())} degenerate rows kept at the origin")

    return PointSet(coords, f.ids, f.labels, degenerate)


def save_factorization(f: SvdFactorization, directory) -> dict:
    """Write `U.csv`, `S.csv` and `V.csv` into `directory`."""
    directory = Path(directory)
    directory.mkdir(parents = True, exist_ok = True)
    paths = {}
    for name, array in (("U", f.u), ("S", f.s[:, np.newaxis]), ("V", f.v)):
        paths[name] = directory / f"{name}.csv"
        pd.DataFrame(array).to_csv(paths[name], header = False, index = False, float_format = "%.17g")
    return paths
