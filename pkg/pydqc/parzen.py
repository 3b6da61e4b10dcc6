# SPDX-License-Identifier: BSD-3-Clause

"""Parzen estimator and the quantum potential it is the ground state of."""

import logging

import numpy as np

from scipy.spatial.distance import cdist

from .schemas import PointSet

logger = logging.getLogger(__name__)

# Upper bound on probes × points evaluated in one block.
BLOCK_SIZE = 1 << 22

# exp() of anything below this underflows to 0 in float64.
_LOG_TINY = np.log(np.finfo(np.float64).tiny)


def coords_of(points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.coords
    points = np.asarray(points, dtype = np.float64)
    return points[:, np.newaxis] if points.ndim == 1 else points


def _probes(x, r: int):
    x = np.asarray(x, dtype = np.float64)
    single = x.ndim <= 1
    probes = x.reshape(1, -1) if single else x
    if probes.shape[1] != r:
        raise ValueError(f"Probe dimension {probes.shape[1]} does not match point dimension {r}.")
    return probes, single


def _check_sigma(sigma: float):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}.")


def _blocks(m: int, n: int):
    size = max(1, BLOCK_SIZE // max(n, 1))
    for start in range(0, m, size):
        yield slice(start, min(start + size, m))


def parzen(x, points, sigma: float):
    """
    Parzen estimator ψ(x) = Σ_i exp(−‖x − x_i‖² / (2σ²)).

    Args:
        x: One r-vector or an m×r batch of probes.
        points (PointSet|array): The data points x_i.
        sigma (float): Gaussian width.

    Returns:
        float|np.ndarray: ψ at each probe.
    """
    _check_sigma(sigma)
    data = coords_of(points)
    probes, single = _probes(x, data.shape[1])

    values = np.empty(probes.shape[0])
    for block in _blocks(probes.shape[0], data.shape[0]):
        d2 = cdist(probes[block], data, "sqeuclidean")
        values[block] = np.exp(-d2 / (2 * sigma**2)).sum(axis = 1)
    return float(values[0]) if single else values


def potential(x, points, sigma: float, with_flags: bool = False):
    """
    Quantum potential V(x) for which ψ is a zero-energy eigenstate of
    −(σ²/2)∇² + V.

    V(x) = −r/2 + Σ_i ‖x − x_i‖² exp(−‖x − x_i‖²/(2σ²)) / (2σ² ψ(x)), where r
    is the point dimension. The Gaussian weights are normalized per probe,
    so far from the data the value tends to the quadratic form about the
    nearest point instead of 0/0.

    Args:
        x: One r-vector or an m×r batch of probes.
        points (PointSet|array): The data points x_i.
        sigma (float): Gaussian width.
        with_flags (bool): If True, also return a boolean array marking the
            probes where ψ itself underflows to 0.

    Returns:
        float|np.ndarray: V at each probe, or `(V, flags)` with `with_flags`.
    """
    _check_sigma(sigma)
    data = coords_of(points)
    probes, single = _probes(x, data.shape[1])
    r = data.shape[1]

    values = np.empty(probes.shape[0])
    flags = np.zeros(probes.shape[0], dtype = bool)
    for block in _blocks(probes.shape[0], data.shape[0]):
        d2 = cdist(probes[block], data, "sqeuclidean")
        exponent = -d2 / (2 * sigma**2)
        peak = exponent.max(axis = 1, keepdims = True)
        weights = np.exp(exponent - peak)
        values[block] = -r / 2 + (weights * d2).sum(axis = 1) / (2 * sigma**2 * weights.sum(axis = 1))
        flags[block] = peak[:, 0] < _LOG_TINY

    if flags.any():
        logger.warning(f"[pydqc][potential] psi underflow at {int(flags.sum())} probes, using nearest-point asymptote")

    if single:
        return (float(values[0]), bool(flags[0])) if with_flags else float(values[0])
    return (values, flags) if with_flags else values


def potential_surface(points, sigma: float, bounds: tuple|None = None, resolution: int = 101):
    """
    Evaluate V on a regular grid over a 2-d point set.

    Args:
        points (PointSet|array): 2-d data points.
        sigma (float): Gaussian width.
        bounds (tuple|None): `(xmin, xmax, ymin, ymax)`. Defaults to the
            bounding box of the points padded by 3σ.
        resolution (int): Grid nodes per axis.

    Returns:
        tuple: `(xs, ys, values)` with `values[j, i] = V(xs[i], ys[j])`.
    """
    data = coords_of(points)
    if data.shape[1] != 2:
        raise ValueError(f"potential_surface needs 2-d points, got dimension {data.shape[1]}.")
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}.")
    if bounds is None:
        lo, hi = data.min(axis = 0) - 3 * sigma, data.max(axis = 0) + 3 * sigma
        bounds = (lo[0], hi[0], lo[1], hi[1])

    xs = np.linspace(bounds[0], bounds[1], resolution)
    ys = np.linspace(bounds[2], bounds[3], resolution)
    gx, gy = np.meshgrid(xs, ys)
    values = potential(np.column_stack([gx.ravel(), gy.ravel()]), data, sigma)
    return xs, ys, values.reshape(gy.shape)
