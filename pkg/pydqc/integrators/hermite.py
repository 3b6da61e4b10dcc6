# SPDX-License-Identifier: BSD-3-Clause

import itertools

import numpy as np

from numpy.polynomial.hermite import hermgauss

from .core import ElementIntegratorBase

# Largest tensor rule accepted, in total nodes.
MAX_NODES = 4096

class ElementIntegrator_Hermite(ElementIntegratorBase):
    """
    Tensor Gauss-Hermite rule over the product Gaussian, `samples` nodes per
    dimension. Exact for polynomial potentials up to degree 2·samples − 1.
    """

    def __init__(self, sigma: float, potential_points = None, potential = None, samples: int = 16, seed: int = 0):
        super(ElementIntegrator_Hermite, self).__init__(sigma, potential_points, potential)
        if samples < 1:
            raise ValueError(f"samples must be at least 1, got {samples}.")
        self.samples = samples
        self._rule = None

    def rule(self, r: int):
        if self.samples ** r > MAX_NODES:
            raise ValueError(
                f"Hermite rule with {self.samples} nodes in {r} dimensions exceeds {MAX_NODES} nodes. "
                "Lower `samples` or use the `sampled` mode."
            )
        if self._rule is None or self._rule[0].shape[1] != r:
            t, w = hermgauss(self.samples)
            # E[f(Y)], Y ~ N(c, σ²/2) becomes Σ w f(c + σ t) / √π per axis
            nodes = np.array(list(itertools.product(t, repeat = r))) * self.sigma
            weights = np.prod(np.array(list(itertools.product(w, repeat = r))), axis = 1) / np.pi ** (r / 2)
            self._rule = (nodes, weights)
        return self._rule

    def mean_potential(self, centers: np.ndarray) -> np.ndarray:
        nodes, weights = self.rule(centers.shape[1])
        probes = (centers[:, np.newaxis, :] + nodes[np.newaxis]).reshape(-1, centers.shape[1])
        return self._evaluate(probes).reshape(centers.shape[0], len(weights)) @ weights
