# SPDX-License-Identifier: BSD-3-Clause

from .integrators.core import ElementIntegratorBase

# List of supported potential matrix element integrators

SUPPORTED_ELEMENT_MODES = [ 'midpoint', 'sampled', 'hermite' ]

# ---------------------------

class ElementIntegrator:
    """Factory class to create potential matrix element integrators.

    Examples:
        >>> # Midpoint rule on the Parzen potential of the data
        >>> integrator = ElementIntegrator.create(0.2, points)

        >>> # Monte Carlo refinement, 256 seeded draws per pair
        >>> integrator = ElementIntegrator.create(0.2, points, mode = 'sampled', samples = 256, seed = 7)

        >>> # Gauss-Hermite rule on an external potential
        >>> integrator = ElementIntegrator.create(
        ...     1.0, potential = lambda x: 0.5 * (x ** 2).sum(axis = 1), mode = 'hermite', samples = 12
        ... )
    """

    @staticmethod
    def create(sigma: float, potential_points = None, *args, mode: str = 'default', **kwargs) -> ElementIntegratorBase:
        """Create and return an integrator for the given mode.

        Args:
            sigma (float): Width of the Gaussian states.
            potential_points (PointSet|array|None): Points whose Parzen
                potential is integrated. Not needed with `potential`.
            *args: Positional arguments to pass to the integrator constructor.
            mode (str, optional): Defaults to 'default' (midpoint).
                Supported values: 'default', 'midpoint', 'sampled', 'hermite'
            **kwargs: Keyword arguments to pass to the integrator constructor
                (`potential`, and `samples` and `seed` for refined modes).

        Returns:
            ElementIntegratorBase: The integrator instance.

        Raises:
            ValueError: If `mode` is not supported.
        """

        if mode == 'default':
            mode = 'midpoint'

        if mode == 'midpoint':
            from .integrators.midpoint import ElementIntegrator_Midpoint
            kwargs.pop('samples', None)
            kwargs.pop('seed', None)
            return ElementIntegrator_Midpoint(sigma, potential_points, *args, **kwargs)
        elif mode == 'sampled':
            from .integrators.sampled import ElementIntegrator_Sampled
            return ElementIntegrator_Sampled(sigma, potential_points, *args, **kwargs)
        elif mode == 'hermite':
            from .integrators.hermite import ElementIntegrator_Hermite
            return ElementIntegrator_Hermite(sigma, potential_points, *args, **kwargs)

        raise ValueError(f"Incorrect element mode {mode!r}. Use `default` or one of these: {','.join(SUPPORTED_ELEMENT_MODES)}.")
