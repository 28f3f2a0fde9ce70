"""Grid construction, dataset generation, and the experiment protocol."""

import numpy as np
import pytest

from qteach.circuits import build, dissipative_qp, reuploading
from qteach.errors import ConfigurationError, StructuralError
from qteach.teacher_student import (
    LabeledGrid,
    derive_seed,
    generate_dataset,
    make_grid,
    run_experiment,
)
from qteach.training import TrainConfig, binarize


class TestMakeGrid:
    def test_two_by_two_corners(self):
        grid = make_grid(2)
        expected = np.array([
            [-np.pi, -np.pi], [-np.pi, np.pi], [np.pi, -np.pi], [np.pi, np.pi],
        ])
        np.testing.assert_allclose(grid, expected)

    def test_three_by_three_contains_origin(self):
        grid = make_grid(3, -1.0, 1.0)
        assert grid.shape == (9, 2)
        assert any(np.array_equal(p, [0.0, 0.0]) for p in grid)

    def test_point_count(self):
        assert make_grid(21).shape == (441, 2)

    def test_resolution_too_small(self):
        with pytest.raises(ConfigurationError):
            make_grid(1)


class TestGenerateDataset:
    def test_explicit_zero_parameters(self):
        grid = make_grid(3)
        dataset = generate_dataset(dissipative_qp(), grid, seed=0, params=np.zeros(12))
        center = np.flatnonzero((grid == 0).all(axis=1))[0]
        assert dataset.y_continuous[center] == pytest.approx(1.0, abs=1e-12)

    def test_same_seed_identical(self):
        grid = make_grid(4)
        a = generate_dataset(reuploading(2), grid, seed=7)
        b = generate_dataset(reuploading(2), grid, seed=7)
        np.testing.assert_array_equal(a.y_continuous, b.y_continuous)
        np.testing.assert_array_equal(a.teacher_params, b.teacher_params)

    def test_labels_in_range_and_signs_consistent(self):
        grid = make_grid(5)
        dataset = generate_dataset(reuploading(3), grid, seed=1)
        assert np.all(np.abs(dataset.y_continuous) <= 1.0)
        np.testing.assert_array_equal(dataset.y_binary, binarize(dataset.y_continuous))

    def test_labeled_grid_validates_lengths(self):
        with pytest.raises(StructuralError):
            LabeledGrid(np.zeros((3, 2)), np.zeros(2), np.zeros(2))

    def test_labeled_grid_validates_sign_consistency(self):
        with pytest.raises(StructuralError):
            LabeledGrid(np.zeros((2, 2)), np.array([0.5, -0.5]), np.array([1.0, 1.0]))


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)

    def test_role_separation(self):
        assert derive_seed(1, 0, 0) != derive_seed(1, 0, 1)

    def test_64_bit_range(self):
        assert 0 <= derive_seed(123, 4, 5) < 2**64


@pytest.fixture(scope="module")
def small_result():
    cfg = TrainConfig(epochs=12, seed=3)
    grid = make_grid(5)
    return run_experiment(
        dissipative_qp(), [dissipative_qp(), reuploading(2)],
        n_seeds=2, cfg=cfg, grid=grid, map_resolution=9,
    )


class TestRunExperiment:
    def test_shapes(self, small_result):
        assert small_result.n_seeds == 2
        assert len(small_result.datasets) == 2
        assert len(small_result.teacher_maps) == 2
        for student in small_result.students:
            assert len(student.runs) == 2
            assert len(student.binary_runs) == 2
            assert student.rel_entropies.shape == (2,)
            assert student.accuracies.shape == (2,)

    def test_average_curve_is_pointwise_mean(self, small_result):
        student = small_result.students[0]
        stacked = np.stack([run.loss_curve for run in student.runs])
        np.testing.assert_allclose(student.mean_loss_curve, stacked.mean(axis=0), atol=1e-15)

    def test_deterministic_given_config(self, small_result):
        cfg = TrainConfig(epochs=12, seed=3)
        again = run_experiment(
            dissipative_qp(), [dissipative_qp(), reuploading(2)],
            n_seeds=2, cfg=cfg, grid=make_grid(5), map_resolution=9,
        )
        for s_a, s_b in zip(small_result.students, again.students):
            np.testing.assert_array_equal(s_a.rel_entropies, s_b.rel_entropies)
            np.testing.assert_array_equal(s_a.accuracies, s_b.accuracies)
            for run_a, run_b in zip(s_a.runs, s_b.runs):
                np.testing.assert_array_equal(run_a.loss_curve, run_b.loss_curve)

    def test_summary_schema(self, small_result):
        summary = small_result.summary()
        assert summary["teacher"] == "dissipative_qp"
        assert [s["architecture"] for s in summary["students"]] == ["dissipative_qp", "reuploading:2"]
        for entry in summary["students"]:
            assert len(entry["rel_entropies"]) == 2
            assert entry["mean_final_loss"] >= 0

    def test_single_seed_average_equals_run(self):
        cfg = TrainConfig(epochs=6, seed=5)
        result = run_experiment(
            dissipative_qp(), [reuploading(2)], n_seeds=1, cfg=cfg,
            grid=make_grid(4), map_resolution=7,
        )
        student = result.students[0]
        assert student.mean_final_loss == student.runs[0].final_loss
        assert student.mean_rel_entropy == student.rel_entropies[0]

    def test_n_seeds_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            run_experiment(dissipative_qp(), [reuploading(2)], 0, TrainConfig(), make_grid(3))

    def test_without_binary_runs_accuracy_uses_continuous_run(self):
        cfg = TrainConfig(epochs=6, seed=5)
        result = run_experiment(
            dissipative_qp(), [reuploading(2)], n_seeds=1, cfg=cfg,
            grid=make_grid(4), map_resolution=7, include_binary=False,
        )
        student = result.students[0]
        assert student.binary_runs is None
        assert 0.0 <= student.mean_accuracy <= 1.0
