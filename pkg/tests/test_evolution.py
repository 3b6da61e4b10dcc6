import pytest

import numpy as np

from .fixtures import *
from .oracles import grid_centroids

from pydqc.cluster import assignment_agreement, extract_clusters
from pydqc.errors import DQCNumericalError
from pydqc.evolution import (
    unitary, build_propagator, evolve, iterate_dqc, iter_dqc_stages, select_representatives,
    evolve_with_projection, frame_records
)
from pydqc.model import build_model, gram_matrix, position_matrices, orthonormal_basis, potential
from pydqc.schemas import EvolutionParams, ModelParams, PointSet, QuantumModel
from pydqc.synthetic import blobs, circle_centers

# ===========================
# Testing build_propagator
# ===========================

def test_unitary_of_zero():
    np.testing.assert_allclose(unitary(np.zeros((3, 3)), 0.1), np.eye(3), atol = 1e-15)

def test_unitary_of_diagonal():
    energies = np.array([0.5, -1.0, 2.0])
    np.testing.assert_allclose(unitary(np.diag(energies), 0.3), np.diag(np.exp(-0.3j * energies)), atol = 1e-14)

def test_unitary_semigroup(rng):
    a = rng.standard_normal((6, 6))
    h = (a + a.T) / 2
    u = unitary(h, 0.1)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(6), atol = 1e-10)
    np.testing.assert_allclose(u @ u, unitary(h, 0.2), atol = 1e-9)
    np.testing.assert_allclose(np.linalg.matrix_power(u, 25), unitary(h, 2.5), atol = 1e-8)

def test_propagator_of_model(rng):
    model = build_model(rng.uniform(0, 1, (8, 2)), ModelParams(0.3))
    u = build_propagator(model, 0.1)
    assert u.shape == (model.q, model.q)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(model.q), atol = 1e-10)

def test_propagator_non_finite():
    points = PointSet([[0.0], [1.0]])
    gram = gram_matrix(points, 0.5)
    model = QuantumModel(
        points, ModelParams(0.5), gram, np.array([[np.nan, 0.0], [0.0, 1.0]]),
        position_matrices(points, 0.5, gram), orthonormal_basis(gram)
    )
    with pytest.raises(ValueError):
        build_propagator(model, 0.1)

# ===========================
# Testing evolve
# ===========================

def test_evolve_conserves_norm_and_energy(rng):
    model = build_model(rng.uniform(0, 1, (8, 2)), ModelParams(0.3))
    run = evolve(model, EvolutionParams(dt = 0.1, steps = 200))
    assert run.trajectory.shape == (201, 8, 2)
    assert np.max(np.abs(run.norms - run.norms[0])) < 1e-8
    assert np.max(np.abs(run.energies - run.energies[0])) < 1e-8

def test_evolve_permutation_equivariant(rng):
    points = rng.uniform(0, 1, (9, 2))
    order = rng.permutation(9)
    params, evo = ModelParams(0.3), EvolutionParams(dt = 0.1, steps = 20)
    run = evolve(build_model(points, params), evo)
    shuffled = evolve(build_model(points[order], params), evo)
    np.testing.assert_allclose(shuffled.trajectory, run.trajectory[:, order], atol = 1e-9)

def test_evolve_initial_positions():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]])
    run = evolve(build_model(points, ModelParams(0.5)), EvolutionParams(steps = 1))
    np.testing.assert_allclose(run.trajectory[0], points, atol = 1e-10)

def test_single_point_stationary():
    run = evolve(build_model([[0.3, -0.2]], ModelParams(0.4)), EvolutionParams(dt = 0.1, steps = 100))
    np.testing.assert_allclose(run.trajectory[:, 0, :], np.tile([0.3, -0.2], (101, 1)), atol = 1e-6)

def test_ehrenfest_quadratic_well():
    points = np.arange(-6.0, 6.001, 0.5)[:, np.newaxis]
    params = ModelParams(1.0, 1.0, basis_cutoff = 1e-8, elements = "hermite", samples = 8)
    model = build_model(points, params, potential = lambda x: 0.5 * np.sum(x**2, axis = 1))
    run = evolve(model, EvolutionParams(dt = 0.05, steps = 126))

    t = 0.05 * np.arange(127)
    # Newton's law in V = x²/2 with unit mass
    newton = 0.5 * np.cos(t)
    index = int(np.flatnonzero(points[:, 0] == 0.5)[0])
    assert np.max(np.abs(run.trajectory[:, index, 0] - newton)) <= 0.02 * 0.5

def test_two_points_match_grid_solver():
    points = np.array([[-0.3], [0.3]])
    sigma, mass = 1.0, 1.0
    params = ModelParams(sigma, mass, elements = "hermite", samples = 16)
    run = evolve(build_model(points, params), EvolutionParams(dt = 0.05, steps = 31))

    reference = grid_centroids(0.3, lambda x: potential(x, points, sigma), sigma, mass, 0.05, 31)
    assert np.max(np.abs(run.trajectory[:, 1, 0] - reference)) < 0.05 * 0.6
    # attraction toward each other during the first steps
    assert run.trajectory[5, 1, 0] < 0.3 and run.trajectory[5, 0, 0] > -0.3

def test_evolve_norm_drift(monkeypatch):
    monkeypatch.setattr("pydqc.evolution.unitary", lambda h, dt: 1.01 * np.eye(len(h)))
    with pytest.raises(DQCNumericalError) as exc:
        evolve(build_model([[0.0], [0.5]], ModelParams(0.5)), EvolutionParams(steps = 5), stage = 2)
    assert exc.value.code == "NORM_DRIFT"
    assert "step 1 of stage 2" in str(exc.value)

def test_evolve_early_stop():
    model = build_model([[0.0, 0.0], [5.0, 5.0]], ModelParams(0.3))
    run = evolve(model, EvolutionParams(steps = 50, early_stop = True))
    assert run.stopped_early
    assert run.trajectory.shape[0] == 2

def test_evolution_params_validation():
    for kwargs in ({ "dt": 0.0 }, { "steps": 0 }, { "stages": 0 }):
        with pytest.raises(ValueError):
            EvolutionParams(**kwargs)

def test_frame_records():
    stage = next(iter_dqc_stages(PointSet([[0.0], [0.4]]), ModelParams(0.3), EvolutionParams(steps = 3)))
    records = list(frame_records(stage))
    assert [r["step"] for r in records] == [0, 1, 2, 3]
    assert records[0]["stage"] == 1
    assert np.shape(records[2]["positions"]) == (2, 1)
    assert len(records[3]["norms"]) == 2

# ===========================
# Testing iterate_dqc
# ===========================

def test_iterate_single_stage_is_evolve(circle_blobs):
    model_params, evo_params = ModelParams(0.2), EvolutionParams(steps = 8)
    stages = iterate_dqc(circle_blobs, model_params, evo_params)
    run = evolve(build_model(circle_blobs, model_params), evo_params)
    assert len(stages) == 1
    np.testing.assert_array_equal(stages[0].coords, run.final_positions)
    np.testing.assert_array_equal(stages[0].labels, circle_blobs.labels)

def test_iterate_contracts_blobs(three_blobs):
    stages = iterate_dqc(three_blobs, ModelParams(0.2), EvolutionParams(dt = 0.1, steps = 16, stages = 2))
    assert len(stages) == 2
    final = stages[-1]

    for blob in range(3):
        before = three_blobs.coords[three_blobs.labels == blob]
        after = final.coords[final.labels == blob]
        spread = lambda c: np.max(np.linalg.norm(c[:, None] - c[None], axis = -1))
        assert spread(after) * 5 <= spread(before)

    centers = lambda p: np.array([p.coords[p.labels == b].mean(axis = 0) for b in range(3)])
    separation = lambda c: np.linalg.norm(c[:, None] - c[None], axis = -1)[np.triu_indices(3, 1)]
    ratio = separation(centers(final)) / separation(centers(three_blobs))
    assert np.all(np.abs(ratio - 1) < 0.2)

def test_iterate_rescale_sigma(three_blobs):
    stages = list(iter_dqc_stages(
        three_blobs, ModelParams(0.2), EvolutionParams(steps = 16, stages = 2), rescale_sigma = True
    ))
    rms = lambda c: np.sqrt(np.mean(np.sum((c - c.mean(axis = 0)) ** 2, axis = 1)))
    assert stages[0].model.params.sigma == 0.2
    expected = 0.2 * rms(stages[0].points.coords) / rms(three_blobs.coords)
    assert stages[1].model.params.sigma == pytest.approx(expected, rel = 1e-12)
    assert stages[1].model.params.mass == pytest.approx(25.0)

# ===========================
# Testing select_representatives
# ===========================

def test_representatives_of_duplicates():
    unique = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    reps = select_representatives(np.vstack([unique, unique]), 0.3, 1e-3)
    np.testing.assert_array_equal(reps.indices, [0, 1, 2])
    np.testing.assert_allclose(reps.residuals, 0.0, atol = 1e-10)

def test_representatives_far_apart():
    points = 4.0 * np.arange(10)[:, np.newaxis]
    assert select_representatives(points, 0.3, 1e-3).size == 10

def test_representatives_residuals(rng):
    points = rng.uniform(0, 1, (60, 2))
    reps = select_representatives(points, 0.3, 1e-3)
    assert reps.size < 60
    assert np.all(reps.residuals <= 1e-3 + 1e-9)
    assert reps.projection.shape == (reps.size, 60)

@pytest.mark.parametrize("threshold", [0.0, 1.0])
def test_representatives_bad_threshold(threshold):
    with pytest.raises(ValueError):
        select_representatives([[0.0]], 0.3, threshold)

# ===========================
# Testing evolve_with_projection
# ===========================

def test_projection_with_every_point():
    points = PointSet(0.75 * np.arange(6)[:, np.newaxis])
    reps = select_representatives(points, 0.5, 1e-3)
    assert reps.size == 6
    model = build_model(points, ModelParams(0.5))
    params = EvolutionParams(steps = 20)
    np.testing.assert_allclose(
        evolve_with_projection(points, reps, model, params).trajectory, evolve(model, params).trajectory, atol = 1e-12
    )

def test_projection_coincident_point():
    points = PointSet([[0.0, 0.0], [0.4, 0.1], [1.0, 0.8], [0.0, 0.0]])
    reps = select_representatives(points, 0.3, 1e-3)
    np.testing.assert_array_equal(reps.indices, [0, 1, 2])
    model = build_model(points.subset(reps.indices), ModelParams(0.3), potential_points = points)
    run = evolve_with_projection(points, reps, model, EvolutionParams(steps = 20))
    assert run.trajectory.shape == (21, 4, 2)
    np.testing.assert_allclose(run.trajectory[:, 3], run.trajectory[:, 0], atol = 1e-10)
    assert not run.flagged.any()

def test_projection_flags_residuals(caplog):
    points = PointSet([[0.0], [0.01]])
    reps = select_representatives(points, 0.3, 1e-3)
    model = build_model(points.subset(reps.indices), ModelParams(0.3), potential_points = points)
    run = evolve_with_projection(points, reps, model, EvolutionParams(steps = 2), tolerance = 1e-9)
    assert list(run.flagged) == [False, True]
    assert "projection tolerance" in caplog.text

def test_projection_agrees_with_full_evolution():
    points = blobs(circle_centers(4), 125, 0.05, seed = 3)
    model_params, evo_params = ModelParams(0.2), EvolutionParams(dt = 0.1, steps = 16)

    full = iterate_dqc(points, model_params, evo_params)[-1]
    reps = select_representatives(points, 0.2, 1e-3)
    subset = iterate_dqc(points, model_params, evo_params, representative_threshold = 1e-3)[-1]

    assert reps.size < 500
    agreement = assignment_agreement(
        extract_clusters(full, 0.1).labels, extract_clusters(subset, 0.1).labels
    )
    assert agreement >= 0.99
