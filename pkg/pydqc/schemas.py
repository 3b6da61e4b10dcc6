from __future__ import annotations

# SPDX-License-Identifier: BSD-3-Clause

"""Data schemas consumed and returned by DQC operations."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DQCDataError


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write = False)
    return array


@dataclass
class DataMatrix:
    """
    Record-by-feature numeric table.

    Labels hold the expert classification of each record. They travel with
    the data for scoring and are never read by the clustering operations.
    """

    values: np.ndarray

    feature_names: tuple|None = None

    labels: np.ndarray|None = None

    ids: np.ndarray|None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype = np.float64)
        if self.values.ndim != 2 or self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ValueError(f"DataMatrix needs a non-empty 2-d table, got shape {self.values.shape}.")
        if not np.all(np.isfinite(self.values)):
            row, col = np.argwhere(~np.isfinite(self.values))[0]
            raise DQCDataError("NON_FINITE", f"(row {row}, column {col})")

        n, d = self.values.shape
        if self.feature_names is None:
            self.feature_names = tuple(f"f{j}" for j in range(d))
        self.feature_names = tuple(str(name) for name in self.feature_names)
        if len(self.feature_names) != d:
            raise ValueError(f"Expected {d} feature names, got {len(self.feature_names)}.")

        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if self.labels.shape != (n,):
                raise ValueError(f"Expected {n} labels, got {self.labels.shape[0]}.")

        self.ids = np.arange(n) if self.ids is None else np.asarray(self.ids)
        if self.ids.shape != (n,):
            raise ValueError(f"Expected {n} record ids, got {self.ids.shape[0]}.")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass
class SvdFactorization:
    """
    Factors of M = U·diag(S)·Vᵀ.

    U is n×n (or n×min(n,d) for an economy factorization), S holds the
    min(n,d) singular values in non-increasing order and V is d×d.
    """

    u: np.ndarray

    s: np.ndarray

    v: np.ndarray

    labels: np.ndarray|None = None

    ids: np.ndarray|None = None

    def reconstruct(self) -> np.ndarray:
        k = len(self.s)
        return (self.u[:, :k] * self.s) @ self.v[:, :k].T


@dataclass
class PointSet:
    """Data points x_i, one row per record, with identities carried through."""

    coords: np.ndarray

    ids: np.ndarray|None = None

    labels: np.ndarray|None = None

    degenerate: np.ndarray|None = None

    def __post_init__(self):
        self.coords = np.ascontiguousarray(self.coords, dtype = np.float64)
        if self.coords.ndim == 1:
            self.coords = self.coords[:, np.newaxis]
        if self.coords.ndim != 2 or self.coords.shape[0] < 1:
            raise ValueError(f"PointSet needs an n×r coordinate array, got shape {self.coords.shape}.")
        n = self.coords.shape[0]
        self.ids = np.arange(n) if self.ids is None else np.asarray(self.ids)
        if self.degenerate is None:
            self.degenerate = np.zeros(n, dtype = bool)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def r(self) -> int:
        return self.coords.shape[1]

    def with_coords(self, coords: np.ndarray) -> PointSet:
        """Return a point set at new positions, keeping ids, labels and flags."""
        return PointSet(coords, self.ids, self.labels, self.degenerate)

    def subset(self, indices) -> PointSet:
        indices = np.asarray(indices)
        return PointSet(
            self.coords[indices],
            self.ids[indices],
            None if self.labels is None else self.labels[indices],
            self.degenerate[indices]
        )


@dataclass
class FeatureScores:
    """Leave-one-out SVD-entropy contribution of every feature."""

    contributions: np.ndarray

    entropy_full: float

    stage: int = 0

    feature_names: tuple = ()


@dataclass
class RetentionRule:
    """
    Keep the features whose contribution is at least
    mean(contributions) + multiplier · std(contributions).
    """

    multiplier: float = 0.0

    tolerance: float = 1e-12

    def keep(self, contributions: np.ndarray) -> np.ndarray:
        threshold = contributions.mean() + self.multiplier * contributions.std()
        scale = max(1.0, float(np.abs(contributions).max()))
        return contributions >= threshold - self.tolerance * scale


@dataclass
class FilterStage:
    """Report of one stage of SVD-entropy feature filtering."""

    stage: int

    scores: FeatureScores

    removed: list

    kept: list

    removed_names: list

    entropy_before: float

    entropy_after: float

    def to_record(self) -> dict:
        return {
            "stage": self.stage,
            "removed": self.removed,
            "removed_names": self.removed_names,
            "kept": self.kept,
            "entropy_before": self.entropy_before,
            "entropy_after": self.entropy_after,
        }


@dataclass
class FilterResult:
    """Filtered data matrix with the per-stage removal reports."""

    matrix: DataMatrix

    stages: list = field(default_factory = list)

    stop_reason: str|None = None

    @property
    def removed(self) -> list:
        return [index for stage in self.stages for index in stage.removed]


@dataclass
class ModelParams:
    """
    Parameters of the quantum model.

    `sigma` is the Parzen width, `mass` the evolution mass (None selects the
    natural mass 1/σ²) and `basis_cutoff` the relative eigenvalue threshold
    of the truncated basis. `elements` names the potential matrix element
    integrator, `samples` its sample or node count and `seed` its random
    seed.
    """

    sigma: float

    mass: float|None = None

    basis_cutoff: float = 1e-6

    elements: str = "midpoint"

    samples: int = 64

    seed: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}.")
        if self.mass is None:
            self.mass = 1.0 / self.sigma**2
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}.")
        if not 0 < self.basis_cutoff < 1:
            raise ValueError(f"basis_cutoff must lie in (0, 1), got {self.basis_cutoff}.")
        if self.samples < 1:
            raise ValueError(f"samples must be at least 1, got {self.samples}.")


@dataclass
class QuantumModel:
    """
    Gaussian states of a point set with their Gram, Hamiltonian and position
    matrices, and the transform T into the orthonormal truncated basis.
    """

    points: PointSet

    params: ModelParams

    gram: np.ndarray

    hamiltonian: np.ndarray

    position_ops: np.ndarray

    basis: np.ndarray

    potential_points: PointSet|None = None

    def __post_init__(self):
        for array in (self.gram, self.hamiltonian, self.position_ops, self.basis):
            _readonly(array)

    @property
    def q(self) -> int:
        return self.basis.shape[1]

    def to_dict(self) -> dict:
        n, r = self.points.n, self.points.r
        return {
            "shape": {"n": n, "r": r, "q": self.q},
            "sigma": self.params.sigma,
            "mass": self.params.mass,
            "basis_cutoff": self.params.basis_cutoff,
            "elements": self.params.elements,
            "points": self.points.coords.tolist(),
            "gram": self.gram.tolist(),
            "hamiltonian": self.hamiltonian.tolist(),
            "position_ops": self.position_ops.tolist(),
            "basis": self.basis.tolist(),
        }


@dataclass
class EvolutionParams:
    """
    Time discretization of DQC: `steps` timesteps of length `dt` per stage,
    `stages` stop-and-restart iterations.
    """

    dt: float = 0.1

    steps: int = 40

    stages: int = 1

    early_stop: bool = False

    early_stop_tolerance: float = 1e-4

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}.")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps}.")
        if self.stages < 1:
            raise ValueError(f"stages must be at least 1, got {self.stages}.")


@dataclass
class EvolutionRun:
    """
    Result of evolving every state of a model.

    `trajectory` holds one n×r snapshot of the centroids per recorded step
    (initial positions included), `norms` and `energies` the matching
    per-state norms and ⟨H⟩.
    """

    propagator: np.ndarray

    coefficients: np.ndarray

    trajectory: np.ndarray

    norms: np.ndarray

    energies: np.ndarray

    stopped_early: bool = False

    flagged: np.ndarray|None = None

    @property
    def final_positions(self) -> np.ndarray:
        return self.trajectory[-1]


@dataclass
class RepresentativeSet:
    """
    Greedy maximal set of essentially linearly independent states.

    `projection[:, i]` expresses state i in the selected states and
    `residuals[i]` is the squared norm of what that combination misses.
    """

    indices: np.ndarray

    overlap_threshold: float

    projection: np.ndarray

    residuals: np.ndarray

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass
class DQCStage:
    """One evolve-then-freeze cycle of iterated DQC."""

    stage: int

    model: QuantumModel

    run: EvolutionRun

    points: PointSet


@dataclass
class ClusterResult:
    """Cluster labels of a point set, with the optional score against experts."""

    labels: np.ndarray

    epsilon: float

    jaccard: float|None = None

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def to_record(self) -> dict:
        return {
            "jaccard": self.jaccard,
            "n_clusters": self.n_clusters,
            "epsilon": self.epsilon,
        }
