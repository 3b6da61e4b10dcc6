# SPDX-License-Identifier: BSD-3-Clause

"""Cluster extraction from evolved positions and pair-counting scores."""

import logging

import numpy as np

from scipy.optimize import linear_sum_assignment
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import cdist

from .parzen import _blocks, coords_of
from .schemas import ClusterResult

logger = logging.getLogger(__name__)


def data_diameter(points) -> float:
    """Largest pairwise distance of a point set (0 for fewer than 2 points)."""
    coords = coords_of(points)
    if coords.shape[0] < 2:
        return 0.0
    # the farthest pair lies on the convex hull
    if 2 <= coords.shape[1] <= 3 and coords.shape[0] > 64:
        try:
            coords = coords[ConvexHull(coords).vertices]
        except QhullError:
            pass
    # row blocks keep the distance matrix out of memory
    n = coords.shape[0]
    return max(float(cdist(coords[rows], coords).max()) for rows in _blocks(n, n))


def default_epsilon(points, fraction: float = 0.05) -> float:
    """`fraction` of the data diameter, or `fraction` itself when every point coincides."""
    if not fraction > 0:
        raise ValueError(f"fraction must be positive, got {fraction}.")
    diameter = data_diameter(points)
    return fraction * diameter if diameter > 0 else fraction


def relabel(labels) -> np.ndarray:
    """Map labels to 0..k−1 in order of first appearance."""
    _, first, inverse = np.unique(np.asarray(labels), return_index = True, return_inverse = True)
    rank = np.empty(len(first), dtype = np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


def extract_clusters(points, epsilon: float|None = None, fraction: float = 0.05) -> ClusterResult:
    """
    Single-linkage clusters: connected components of the graph joining every
    pair of points at distance ≤ epsilon.

    Args:
        points (PointSet|array): Post-evolution positions.
        epsilon (float|None): Linkage distance. Defaults to
            `default_epsilon(points, fraction)`.
        fraction (float): Diameter fraction used when `epsilon` is None.

    Returns:
        ClusterResult: Labels numbered by first member index.
    """
    coords = coords_of(points)
    if epsilon is None:
        epsilon = default_epsilon(coords, fraction)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}.")

    n = coords.shape[0]
    pairs = cKDTree(coords).query_pairs(r = epsilon, output_type = "ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape = (n, n))
    _, components = connected_components(graph, directed = False)

    result = ClusterResult(relabel(components), float(epsilon))
    logger.debug(f"[pydqc][extract] epsilon={epsilon:.6g} - {result.n_clusters} clusters")
    return result


def contingency(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"Label arrays must have the same length, got {a.shape} and {b.shape}.")
    _, ia = np.unique(a, return_inverse = True)
    _, ib = np.unique(b, return_inverse = True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype = np.int64) if len(a) else np.zeros((0, 0), dtype = np.int64)
    np.add.at(table, (ia.reshape(-1), ib.reshape(-1)), 1)
    return table


def _pairs(counts: np.ndarray) -> int:
    return int((counts * (counts - 1) // 2).sum())


def jaccard_score(predicted, expert) -> float:
    """
    Pair-counting Jaccard score n11/(n11 + n10 + n01).

    n11 counts the pairs co-clustered in both partitions, n10 the pairs
    co-clustered only by the experts and n01 those co-clustered only in
    `predicted`. Two all-singleton partitions agree on every pair and
    score 1.

    Raises:
        ValueError: If the lengths differ or fewer than 2 points are given.
    """
    table = contingency(predicted, expert)
    n = int(table.sum())
    if n < 2:
        raise ValueError(f"jaccard_score needs at least 2 points, got {n}.")

    n11 = _pairs(table)
    together_predicted = _pairs(table.sum(axis = 1))
    together_expert = _pairs(table.sum(axis = 0))
    union = together_predicted + together_expert - n11
    return 1.0 if union == 0 else n11 / union


def assignment_agreement(a, b) -> float:
    """Fraction of points on which two partitions agree under the best one-to-one label matching."""
    table = contingency(a, b)
    if table.size == 0:
        raise ValueError("assignment_agreement needs at least 1 point.")
    rows, cols = linear_sum_assignment(table, maximize = True)
    return float(table[rows, cols].sum() / table.sum())


def score_clusters(result: ClusterResult, expert) -> ClusterResult:
    """Set `result.jaccard` against the expert labels and return it."""
    result.jaccard = jaccard_score(result.labels, expert)
    logger.debug(f"[pydqc][score] jaccard={result.jaccard:.4f}")
    return result
