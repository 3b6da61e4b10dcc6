# SPDX-License-Identifier: BSD-3-Clause

"""Seeded synthetic point sets."""

import numpy as np

from .schemas import PointSet


def blobs(centers, n_per_blob: int = 30, std: float = 0.05, seed: int = 0) -> PointSet:
    """
    Isotropic Gaussian blobs, `n_per_blob` points around every center.

    Points are grouped blob by blob and labelled with the index of their
    blob.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype = np.float64))
    if n_per_blob < 1:
        raise ValueError(f"n_per_blob must be at least 1, got {n_per_blob}.")
    if not std >= 0:
        raise ValueError(f"std must be non-negative, got {std}.")

    rng = np.random.default_rng(seed)
    coords = np.concatenate([c + std * rng.standard_normal((n_per_blob, centers.shape[1])) for c in centers])
    labels = np.repeat(np.arange(len(centers)), n_per_blob)
    return PointSet(coords, labels = labels)


def circle_centers(k: int, radius: float = 1.0, start: float = 90.0) -> np.ndarray:
    """`k` points evenly spaced on a circle, the first at angle `start` degrees."""
    angles = np.deg2rad(start + 360.0 * np.arange(k) / k)
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


def ring(n: int = 200, radius: float = 1.0, noise: float = 0.05, seed: int = 0) -> PointSet:
    """Points scattered around a 2-d circle, all with label 0."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}.")
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0, 2 * np.pi, n)
    radii = radius + noise * rng.standard_normal(n)
    coords = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return PointSet(coords, labels = np.zeros(n, dtype = np.int64))
