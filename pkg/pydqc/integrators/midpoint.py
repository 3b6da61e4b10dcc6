# SPDX-License-Identifier: BSD-3-Clause

import numpy as np

from .core import ElementIntegratorBase

class ElementIntegrator_Midpoint(ElementIntegratorBase):
    """Evaluates V once at the center of the product Gaussian."""

    def mean_potential(self, centers: np.ndarray) -> np.ndarray:
        return self._evaluate(centers)
