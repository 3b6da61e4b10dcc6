# SPDX-License-Identifier: BSD-3-Clause

"""Truncated Hilbert space of Gaussian states and its matrices."""

import logging

import numpy as np

from scipy import linalg
from scipy.spatial.distance import cdist

from .elements import ElementIntegrator
from .errors import DQCNumericalError
from .parzen import coords_of, parzen, potential, potential_surface
from .schemas import ModelParams, PointSet, QuantumModel

logger = logging.getLogger(__name__)

# Overlaps below this are stored as exact zeros.
GRAM_FLOOR = 1e-40

__all__ = [
    "parzen", "potential", "potential_surface", "overlap_matrix", "gram_matrix", "kinetic_matrix",
    "position_matrices", "hamiltonian_matrix", "orthonormal_basis", "build_model",
]


def _check_sigma(sigma: float):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}.")


def overlap_matrix(a, b, sigma: float) -> np.ndarray:
    """Overlaps ⟨ψ_a|ψ_b⟩ = exp(−‖x_a − x_b‖²/(4σ²)) between two sets of states."""
    _check_sigma(sigma)
    overlaps = np.exp(-cdist(coords_of(a), coords_of(b), "sqeuclidean") / (4 * sigma**2))
    overlaps[overlaps < GRAM_FLOOR] = 0.0
    return overlaps


def gram_matrix(points, sigma: float) -> np.ndarray:
    """
    Gram matrix N_ij = ⟨ψ_i|ψ_j⟩ of the normalized Gaussian states.

    Symmetric positive semi-definite with unit diagonal; entries below 1e-40
    are clamped to 0.
    """
    return overlap_matrix(points, points, sigma)


def kinetic_matrix(points, sigma: float, mass: float, gram: np.ndarray|None = None) -> np.ndarray:
    """
    Kinetic matrix ⟨ψ_i| −∇²/(2m) |ψ_j⟩ of the Gaussian states.

    K_ij = N_ij/(2m) · (r/(2σ²) − ‖x_i − x_j‖²/(4σ⁴)), so K_ii = r/(4mσ²).
    """
    _check_sigma(sigma)
    if not mass > 0:
        raise ValueError(f"mass must be positive, got {mass}.")
    coords = coords_of(points)
    gram = gram_matrix(coords, sigma) if gram is None else gram
    d2 = cdist(coords, coords, "sqeuclidean")
    r = coords.shape[1]
    return gram / (2 * mass) * (r / (2 * sigma**2) - d2 / (4 * sigma**4))


def position_matrices(points, sigma: float, gram: np.ndarray|None = None) -> np.ndarray:
    """Position operators (X_k)_ij = N_ij·(x_ik + x_jk)/2, stacked as an r×n×n array."""
    coords = coords_of(points)
    gram = gram_matrix(coords, sigma) if gram is None else gram
    midpoints = (coords[:, np.newaxis, :] + coords[np.newaxis, :, :]) / 2
    return np.moveaxis(midpoints, 2, 0) * gram


def hamiltonian_matrix(points, params: ModelParams, gram: np.ndarray|None = None,
    potential_points = None, potential = None) -> np.ndarray:
    """
    Hamiltonian H = −∇²/(2m) + V between the Gaussian states.

    Args:
        points (PointSet|array): Centers of the states.
        params (ModelParams): Width, mass and element integration mode.
        gram (np.ndarray|None): Precomputed Gram matrix of `points`.
        potential_points (PointSet|array|None): Points whose Parzen potential
            is used. Defaults to `points`.
        potential (callable|None): External potential replacing the Parzen
            one; maps m×r probes to m values.

    Returns:
        np.ndarray: The real symmetric n×n Hamiltonian.

    Raises:
        ValueError: If `gram` does not match the number of points.
    """
    coords = coords_of(points)
    n = coords.shape[0]
    if gram is None:
        gram = gram_matrix(coords, params.sigma)
    elif gram.shape != (n, n):
        raise ValueError(f"Gram matrix shape {gram.shape} does not match {n} points.")

    integrator = ElementIntegrator.create(
        params.sigma, coords if potential_points is None else potential_points,
        mode = params.elements, potential = potential, samples = params.samples, seed = params.seed
    )
    h = kinetic_matrix(coords, params.sigma, params.mass, gram) + integrator.matrix(coords, gram)
    return (h + h.T) / 2


def orthonormal_basis(gram: np.ndarray, cutoff: float = 1e-6) -> np.ndarray:
    """
    Transform T into an orthonormal basis of the span of the states.

    Eigenpairs of N with λ > cutoff·λ_max are kept, largest first, and
    T[:, a] = v_a/√λ_a, so Tᵀ·N·T is the identity. Each eigenvector is
    oriented so its largest-magnitude entry is positive.

    Raises:
        DQCNumericalError: If no eigenvalue passes the cutoff.
    """
    gram = np.asarray(gram, dtype = np.float64)
    lam, vec = linalg.eigh((gram + gram.T) / 2)
    order = np.argsort(-lam, kind = "stable")
    lam, vec = lam[order], vec[:, order]

    keep = lam > cutoff * lam[0] if lam[0] > 0 else np.zeros(len(lam), dtype = bool)
    if not keep.any():
        logger.error(f"[pydqc][basis] no eigenvalue above cutoff {cutoff}")
        raise DQCNumericalError("DEGENERATE_BASIS", f"(cutoff {cutoff}, largest eigenvalue {lam[0]:.3g})")

    lam, vec = lam[keep], vec[:, keep]
    pivots = np.argmax(np.abs(vec), axis = 0)
    vec = vec * np.sign(vec[pivots, np.arange(vec.shape[1])])
    logger.debug(f"[pydqc][basis] kept q={len(lam)} of {len(order)} states")
    return vec / np.sqrt(lam)


def build_model(points, params: ModelParams, potential_points = None, potential = None) -> QuantumModel:
    """
    Build the full quantum model of a point set.

    Args:
        points (PointSet|array): Centers of the Gaussian states.
        params (ModelParams): Model parameters.
        potential_points (PointSet|array|None): Points defining the Parzen
            potential, when it differs from the state centers.
        potential (callable|None): External potential replacing the Parzen one.

    Returns:
        QuantumModel: Read-only Gram, Hamiltonian, position and basis arrays.
    """
    if not isinstance(points, PointSet):
        points = PointSet(points)
    if potential_points is not None and not isinstance(potential_points, PointSet):
        potential_points = PointSet(potential_points)

    gram = gram_matrix(points, params.sigma)
    basis = orthonormal_basis(gram, params.basis_cutoff)
    hamiltonian = hamiltonian_matrix(
        points, params, gram, potential_points if potential_points is not None else points, potential
    )
    model = QuantumModel(
        points, params, gram, hamiltonian, position_matrices(points, params.sigma, gram), basis, potential_points
    )
    logger.debug(f"[pydqc][model] n={points.n}, r={points.r}, q={model.q}, sigma={params.sigma}, mass={params.mass}")
    return model
