# SPDX-License-Identifier: BSD-3-Clause

"""Time evolution of the Gaussian states and iterated DQC."""

import logging

import numpy as np

from dataclasses import replace
from scipy import linalg

from .cluster import data_diameter
from .errors import DQCNumericalError
from .model import build_model, overlap_matrix
from .parzen import coords_of
from .schemas import (
    DQCStage, EvolutionParams, EvolutionRun, ModelParams, PointSet, QuantumModel, RepresentativeSet
)

logger = logging.getLogger(__name__)

# Largest per-step change of a state norm before evolution is aborted.
NORM_DRIFT_TOLERANCE = 1e-6


def to_basis(basis: np.ndarray, operator: np.ndarray) -> np.ndarray:
    """Express a matrix between states in the orthonormal basis, Tᵀ·A·T, symmetrized."""
    a = basis.T @ operator @ basis
    return (a + a.T) / 2


def unitary(h_orth: np.ndarray, dt: float) -> np.ndarray:
    """U = W·diag(e^{−iλ·dt})·Wᵀ for a real symmetric H = W·diag(λ)·Wᵀ."""
    lam, w = linalg.eigh(h_orth)
    return (w * np.exp(-1j * lam * dt)) @ w.T


def build_propagator(model: QuantumModel, dt: float) -> np.ndarray:
    """
    Time evolution operator e^{−iH·dt} in the orthonormal basis of the model.

    Raises:
        ValueError: If the Hamiltonian holds non-finite entries.
    """
    if not np.all(np.isfinite(model.hamiltonian)):
        raise ValueError("The Hamiltonian holds non-finite entries.")
    return unitary(to_basis(model.basis, model.hamiltonian), dt)


class _Readout:
    """Norms, centroids and energies of states given in the orthonormal basis."""

    def __init__(self, model: QuantumModel):
        self.h = to_basis(model.basis, model.hamiltonian)
        self.x = np.stack([to_basis(model.basis, xk) for xk in model.position_ops])

    def __call__(self, c: np.ndarray):
        norms = np.sum(np.abs(c) ** 2, axis = 0)
        safe = np.where(norms > 0, norms, 1.0)
        positions = np.stack([np.real(np.sum(np.conj(c) * (xk @ c), axis = 0)) / safe for xk in self.x], axis = 1)
        energies = np.real(np.sum(np.conj(c) * (self.h @ c), axis = 0)) / safe
        return norms, positions, energies


def evolve(model: QuantumModel, params: EvolutionParams, initial: np.ndarray|None = None,
    stage: int = 1) -> EvolutionRun:
    """
    Evolve every Gaussian state of the model and track its centroid.

    Args:
        model (QuantumModel): The model to evolve in.
        params (EvolutionParams): Timestep and number of steps. `stages` is
            not read here, see `iterate_dqc()`.
        initial (np.ndarray|None): q×n initial coefficients in the
            orthonormal basis. Defaults to Tᵀ·N, the model's own states.
        stage (int): Stage number used in log and error messages.

    Returns:
        EvolutionRun: Propagator, final coefficients, and the centroids,
        norms and energies at every recorded step.

    Raises:
        DQCNumericalError: If a state norm changes by more than 1e-6 in one step.
    """
    u = build_propagator(model, params.dt)
    readout = _Readout(model)
    c = (model.basis.T @ model.gram if initial is None else initial).astype(np.complex128)

    norms, positions, energies = readout(c)
    trajectory, norm_log, energy_log = [positions], [norms], [energies]
    threshold = params.early_stop_tolerance * data_diameter(positions) if params.early_stop else 0.0
    stopped = False

    for step in range(1, params.steps + 1):
        c = u @ c
        norms, positions, energies = readout(c)

        drift = float(np.max(np.abs(norms - norm_log[-1])))
        if drift > NORM_DRIFT_TOLERANCE:
            logger.error(f"[pydqc][evolve] norm drift {drift:.3g} at step {step} of stage {stage}")
            raise DQCNumericalError("NORM_DRIFT", f"(drift {drift:.3g} at step {step} of stage {stage})")

        displacement = float(np.mean(np.linalg.norm(positions - trajectory[-1], axis = 1)))
        trajectory.append(positions)
        norm_log.append(norms)
        energy_log.append(energies)

        if params.early_stop and displacement < threshold:
            logger.debug(f"[pydqc][evolve] stage {stage} settled after {step} steps")
            stopped = True
            break

    logger.debug(f"[pydqc][evolve] stage {stage}: q={model.q}, n={c.shape[1]}, {len(trajectory) - 1} steps")
    return EvolutionRun(u, c, np.stack(trajectory), np.stack(norm_log), np.stack(energy_log), stopped)


def select_representatives(points, sigma: float, threshold: float = 1e-3) -> RepresentativeSet:
    """
    Greedy set of essentially linearly independent states, scanned in input order.

    A state is accepted when the squared norm of its residual after
    projection onto the states accepted so far exceeds `threshold`. The
    residuals are maintained by an incremental pivoted Cholesky
    factorization of the Gram matrix.

    Args:
        points (PointSet|array): Centers of the states.
        sigma (float): Gaussian width.
        threshold (float): Residual threshold in (0, 1).

    Returns:
        RepresentativeSet: Accepted indices, and the coefficients and
        squared residual of every state projected on them.
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}.")
    coords = coords_of(points)
    n = coords.shape[0]

    residual = np.ones(n)
    factor = np.zeros((n, min(n, 64)))
    accepted = []
    for i in range(n):
        if residual[i] <= threshold:
            continue
        k = len(accepted)
        if k == factor.shape[1]:
            factor = np.hstack([factor, np.zeros((n, min(n, 2 * k) - k))])
        column = overlap_matrix(coords, coords[i:i + 1], sigma)[:, 0]
        factor[:, k] = (column - factor[:, :k] @ factor[i, :k]) / np.sqrt(residual[i])
        residual = np.maximum(residual - factor[:, k] ** 2, 0.0)
        accepted.append(i)

    indices = np.asarray(accepted, dtype = np.int64)
    reps = coords[indices]
    cross = overlap_matrix(reps, coords, sigma)
    try:
        projection = linalg.cho_solve(linalg.cho_factor(overlap_matrix(reps, reps, sigma)), cross)
    except linalg.LinAlgError:
        projection = linalg.lstsq(overlap_matrix(reps, reps, sigma), cross)[0]
    residuals = np.clip(1.0 - np.sum(cross * projection, axis = 0), 0.0, 1.0)
    residuals[indices] = 0.0

    logger.debug(f"[pydqc][representatives] {len(indices)} of {n} states at threshold {threshold}")
    return RepresentativeSet(indices, threshold, projection, residuals)


def evolve_with_projection(points, reps: RepresentativeSet, model: QuantumModel, params: EvolutionParams,
    tolerance: float|None = None, stage: int = 1) -> EvolutionRun:
    """
    Evolve every point with a model built on the representative states only.

    Each state is expressed in the model's orthonormal basis through its
    overlaps with the representatives, then evolved by the model's
    propagator. States whose projection residual exceeds `tolerance`
    (default: the selection threshold) are evolved anyway and reported in
    `EvolutionRun.flagged`.
    """
    coords = coords_of(points)
    if model.points.n != reps.size:
        raise ValueError(f"The model holds {model.points.n} states but {reps.size} representatives were selected.")
    tolerance = reps.overlap_threshold if tolerance is None else tolerance

    flagged = reps.residuals > tolerance
    if flagged.any():
        logger.warning(f"[pydqc][evolve] {int(flagged.sum())} states exceed projection tolerance {tolerance}")

    initial = model.basis.T @ overlap_matrix(model.points, coords, model.params.sigma)
    run = evolve(model, params, initial, stage)
    run.flagged = flagged
    return run


def _spread(coords: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.sum((coords - coords.mean(axis = 0)) ** 2, axis = 1))))


def iter_dqc_stages(points: PointSet, model_params: ModelParams, evo_params: EvolutionParams,
    rescale_sigma: bool = False, representative_threshold: float = 0.0, potential = None):
    """
    Generator form of `iterate_dqc()` yielding every stage's model and run.

    Yields:
        DQCStage: Stage number, model, evolution run and final point set.
    """
    if not isinstance(points, PointSet):
        points = PointSet(points)
    current = points
    spread0 = _spread(points.coords)

    for stage in range(1, evo_params.stages + 1):
        params = model_params
        if rescale_sigma and stage > 1:
            spread = _spread(current.coords)
            if spread0 > 0 and spread > 0:
                params = replace(model_params, sigma = model_params.sigma * spread / spread0)

        if representative_threshold > 0:
            reps = select_representatives(current, params.sigma, representative_threshold)
            model = build_model(current.subset(reps.indices), params, potential_points = current, potential = potential)
            run = evolve_with_projection(current, reps, model, evo_params, stage = stage)
        else:
            model = build_model(current, params, potential = potential)
            run = evolve(model, evo_params, stage = stage)

        current = current.with_coords(run.final_positions)
        yield DQCStage(stage, model, run, current)


def iterate_dqc(points: PointSet, model_params: ModelParams, evo_params: EvolutionParams,
    rescale_sigma: bool = False, representative_threshold: float = 0.0, potential = None) -> list:
    """
    Stop-and-restart DQC.

    Each stage builds a fresh model on the final centroids of the previous
    stage and evolves it.

    Args:
        points (PointSet): The starting points.
        model_params (ModelParams): Model parameters; σ is reused by every
            stage unless `rescale_sigma` is set.
        evo_params (EvolutionParams): Timestep, steps per stage and number
            of stages.
        rescale_sigma (bool): Scale σ with the RMS spread of the points
            relative to the first stage.
        representative_threshold (float): If positive, evolve through a
            representative subset selected at this threshold.
        potential (callable|None): External potential replacing the Parzen one.

    Returns:
        list: The final PointSet of every stage, ids and labels carried through.
    """
    return [
        s.points for s in iter_dqc_stages(
            points, model_params, evo_params, rescale_sigma, representative_threshold, potential
        )
    ]


def frame_records(stage: DQCStage):
    """One JSON-ready record per recorded step of a stage."""
    run = stage.run
    for step in range(run.trajectory.shape[0]):
        yield {
            "stage": stage.stage,
            "step": step,
            "positions": run.trajectory[step].tolist(),
            "norms": run.norms[step].tolist(),
        }
