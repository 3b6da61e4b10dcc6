# SPDX-License-Identifier: BSD-3-Clause

import numpy as np

from .core import ElementIntegratorBase

class ElementIntegrator_Sampled(ElementIntegratorBase):
    """
    Monte Carlo average of V over `samples` draws from the product Gaussian.

    The offsets are drawn once from a generator seeded with `seed` and shared
    by every pair, so the matrix is deterministic and symmetric.
    """

    def __init__(self, sigma: float, potential_points = None, potential = None, samples: int = 64, seed: int = 0):
        super(ElementIntegrator_Sampled, self).__init__(sigma, potential_points, potential)
        if samples < 1:
            raise ValueError(f"samples must be at least 1, got {samples}.")
        self.samples = samples
        self.seed = seed
        self._offsets = None

    def offsets(self, r: int) -> np.ndarray:
        if self._offsets is None or self._offsets.shape[1] != r:
            rng = np.random.default_rng(self.seed)
            self._offsets = rng.standard_normal((self.samples, r)) * self.sigma / np.sqrt(2)
        return self._offsets

    def mean_potential(self, centers: np.ndarray) -> np.ndarray:
        offsets = self.offsets(centers.shape[1])
        probes = (centers[:, np.newaxis, :] + offsets[np.newaxis]).reshape(-1, centers.shape[1])
        return self._evaluate(probes).reshape(centers.shape[0], self.samples).mean(axis = 1)
