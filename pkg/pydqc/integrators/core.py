# SPDX-License-Identifier: BSD-3-Clause

import logging

import numpy as np

from functools import partial

from ..parzen import coords_of, potential as parzen_potential, BLOCK_SIZE

logger = logging.getLogger(__name__)

class ElementIntegratorBase:
    """
    Base class for potential matrix element integrators.

    The product of two Gaussian states of width σ centered at x_i and x_j is
    N_ij times a normalized Gaussian of width σ/√2 centered at their midpoint,
    so P_ij = ⟨ψ_i|V|ψ_j⟩ = N_ij · E[V] under that product density.
    Subclasses only estimate the expectation, in `mean_potential()`.

    Attributes:
        sigma (float): Width of the Gaussian states.
        potential (callable): Maps an m×r array of probes to m values of V.
            Defaults to the Parzen potential of `potential_points`.

    Example:
        >>> integrator = ElementIntegrator.create(0.2, points, mode = 'hermite', samples = 8)
        >>> p = integrator.matrix(points, gram)
    """

    def __init__(self, sigma: float, potential_points = None, potential = None):
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma}.")
        if potential is None:
            if potential_points is None:
                raise ValueError("Either potential_points or a potential callable is required.")
            potential = partial(parzen_potential, points = coords_of(potential_points), sigma = sigma)
        self.sigma = sigma
        self.potential = potential

    # -------------

    def mean_potential(self, centers: np.ndarray) -> np.ndarray:
        """Expectation of V under N(center, σ²/2·I) for every row of `centers`."""
        raise NotImplementedError() # pragma: no cover

    def _evaluate(self, probes: np.ndarray) -> np.ndarray:
        return np.asarray(self.potential(probes), dtype = np.float64).reshape(probes.shape[0])

    # -------------

    def matrix(self, points, gram: np.ndarray) -> np.ndarray:
        """
        Potential matrix P with P_ij = N_ij · E[V].

        Only pairs i ≤ j with a non-zero overlap are integrated; the result
        is symmetric by construction.

        Args:
            points (PointSet|array): Centers of the Gaussian states.
            gram (np.ndarray): The Gram matrix of the same states.

        Returns:
            np.ndarray: The n×n potential matrix.
        """
        coords = coords_of(points)
        n = coords.shape[0]
        if gram.shape != (n, n):
            raise ValueError(f"Gram matrix shape {gram.shape} does not match {n} points.")

        rows, cols = np.triu_indices(n)
        overlap = gram[rows, cols]
        live = overlap > 0
        rows, cols, overlap = rows[live], cols[live], overlap[live]

        values = np.empty(len(rows))
        size = max(1, BLOCK_SIZE // (64 * max(n, 1)))
        for start in range(0, len(rows), size):
            block = slice(start, start + size)
            centers = (coords[rows[block]] + coords[cols[block]]) / 2
            values[block] = overlap[block] * self.mean_potential(centers)

        p = np.zeros((n, n))
        p[rows, cols] = values
        p[cols, rows] = values
        logger.debug(f"[pydqc][elements] {type(self).__name__} integrated {len(rows)} pairs")
        return p
