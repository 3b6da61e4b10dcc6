# SPDX-License-Identifier: BSD-3-Clause

"""SVD-entropy feature filtering."""

import asyncio
import logging

import numpy as np

from scipy import linalg

from .data import select_features
from .errors import DQCNumericalError
from .schemas import DataMatrix, FeatureScores, FilterStage, FilterResult, RetentionRule

logger = logging.getLogger(__name__)


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, DataMatrix) else np.asarray(m, dtype = np.float64)


def svd_entropy(m) -> float:
    """
    Normalized Shannon entropy of the squared singular value shares.

    E = −(1/log K)·Σ ρ_j log ρ_j with ρ_j = S_jj² / Σ_k S_kk² and
    K = min(n, d). Zero shares contribute nothing, and a matrix with a
    single singular value has entropy 0.

    Raises:
        DQCNumericalError: If the matrix is all zeros.
    """
    values = _values(m)
    if values.size == 0:
        raise ValueError("svd_entropy needs a non-empty matrix.")

    s = linalg.svdvals(values)
    energy = s ** 2
    total = energy.sum()
    if total <= 0:
        logger.error("[pydqc][svd_entropy] all-zero matrix")
        raise DQCNumericalError("UNDEFINED_ENTROPY")

    k = min(values.shape)
    if k == 1:
        return 0.0

    rho = energy / total
    rho = rho[rho > 0]
    return float(np.clip(-np.sum(rho * np.log(rho)) / np.log(k), 0.0, 1.0))


def _without(values: np.ndarray, j: int) -> np.ndarray:
    return np.delete(values, j, axis = 1)


def _check_features(values: np.ndarray):
    if values.shape[1] < 2:
        raise ValueError(f"Feature contributions need at least 2 features, got {values.shape[1]}.")


def _scores(m, entropy_full: float, loo: list, stage: int) -> FeatureScores:
    names = m.feature_names if isinstance(m, DataMatrix) else ()
    return FeatureScores(entropy_full - np.asarray(loo), entropy_full, stage, tuple(names))


def feature_contributions(m, stage: int = 0) -> FeatureScores:
    """
    Leave-one-out contribution of every feature to the SVD-entropy.

    contributions[i] = E(m) − E(m without feature i).

    Raises:
        ValueError: If the matrix has fewer than 2 features.
    """
    values = _values(m)
    _check_features(values)
    full = svd_entropy(values)
    loo = [svd_entropy(_without(values, j)) for j in range(values.shape[1])]
    return _scores(m, full, loo, stage)


async def afeature_contributions(m, stage: int = 0) -> FeatureScores:
    """Same as `feature_contributions()` but runs the leave-one-out SVDs concurrently."""
    values = _values(m)
    _check_features(values)
    full, *loo = await asyncio.gather(
        asyncio.to_thread(svd_entropy, values),
        *(asyncio.to_thread(svd_entropy, _without(values, j)) for j in range(values.shape[1]))
    )
    return _scores(m, full, loo, stage)


def _check_stages(stages: int):
    if stages < 1:
        raise ValueError(f"stages must be at least 1, got {stages}.")


def _apply_stage(current: DataMatrix, origin: np.ndarray, scores: FeatureScores,
    rule: RetentionRule):
    """Return (report, next matrix, next origin, stop reason) for one stage."""
    keep = rule.keep(scores.contributions)

    if keep.all():
        logger.debug(f"[pydqc][filter] stage {scores.stage}: rule retains every feature")
        return None, current, origin, "all-retained"
    if keep.sum() < 2:
        logger.warning(f"[pydqc][filter] stage {scores.stage}: fewer than 2 features would remain")
        return None, current, origin, "too-few-features"

    filtered = select_features(current, np.flatnonzero(keep))
    report = FilterStage(
        stage = scores.stage,
        scores = scores,
        removed = [int(j) for j in origin[~keep]],
        kept = [int(j) for j in origin[keep]],
        removed_names = [current.feature_names[j] for j in np.flatnonzero(~keep)],
        entropy_before = scores.entropy_full,
        entropy_after = svd_entropy(filtered),
    )
    logger.debug(f"[pydqc][filter] stage {scores.stage}: removed {len(report.removed)} features")
    return report, filtered, origin[keep], None


def filter_features(m: DataMatrix, stages: int, rule: RetentionRule|None = None) -> FilterResult:
    """
    Apply `stages` rounds of SVD-entropy filtering.

    Each round scores the remaining features and drops those the retention
    rule rejects. Filtering stops early, with `stop_reason` set, when the
    rule retains every feature or would leave fewer than 2.

    Args:
        m (DataMatrix): The data to filter.
        stages (int): Number of filtering rounds, at least 1.
        rule (RetentionRule|None): Retention rule. Defaults to keeping the
            features with above-mean contribution.

    Returns:
        FilterResult: The surviving features and one report per stage.
    """
    _check_stages(stages)
    rule = rule if rule is not None else RetentionRule()
    current, origin = m, np.arange(m.d)
    result = FilterResult(m)

    for stage in range(1, stages + 1):
        if current.d < 2:
            result.stop_reason = "too-few-features"
            break
        scores = feature_contributions(current, stage)
        report, current, origin, stop = _apply_stage(current, origin, scores, rule)
        if report is None:
            result.stop_reason = stop
            break
        result.stages.append(report)

    result.matrix = current
    return result


async def afilter_features(m: DataMatrix, stages: int, rule: RetentionRule|None = None) -> FilterResult:
    """Same as `filter_features()` but scores each stage with `afeature_contributions()`."""
    _check_stages(stages)
    rule = rule if rule is not None else RetentionRule()
    current, origin = m, np.arange(m.d)
    result = FilterResult(m)

    for stage in range(1, stages + 1):
        if current.d < 2:
            result.stop_reason = "too-few-features"
            break
        scores = await afeature_contributions(current, stage)
        report, current, origin, stop = _apply_stage(current, origin, scores, rule)
        if report is None:
            result.stop_reason = stop
            break
        result.stages.append(report)

    result.matrix = current
    return result
