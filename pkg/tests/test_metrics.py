"""Prediction maps, the relative-entropy comparison, and accuracy."""

import numpy as np
import pytest

from qteach.circuits import ArchitectureId, Family, build, dissipative_qp
from qteach.errors import ConfigurationError, StructuralError
from qteach.metrics import (
    PredictionMap,
    accuracy,
    kl_divergence,
    normalize_to_distribution,
    prediction_map,
    read_prediction_map,
    relative_entropy,
    write_prediction_map,
)
from qteach.teacher_student import generate_dataset, make_grid


def random_map(rng, resolution=8):
    values = rng.uniform(-1.0, 1.0, (resolution, resolution))
    return PredictionMap(resolution, -np.pi, np.pi, values)


class TestPredictionMap:
    def test_zero_weights_value_at_origin(self):
        circuit = build(dissipative_qp())
        pmap = prediction_map(circuit, np.zeros(12), resolution=5)
        # odd resolution puts (0, 0) at the center cell
        assert pmap.values[2, 2] == pytest.approx(1.0, abs=1e-12)

    def test_recomputing_from_stored_params_is_identical(self):
        grid = make_grid(5)
        dataset = generate_dataset(dissipative_qp(), grid, seed=8)
        circuit = build(dissipative_qp())
        a = prediction_map(circuit, dataset.teacher_params, 17)
        b = prediction_map(circuit, dataset.teacher_params, 17)
        np.testing.assert_array_equal(a.values, b.values)

    def test_deep_teacher_has_high_frequency_structure(self):
        """The 4-layer teacher's slice along x1 at x2 = 0 oscillates
        through at least 4 sign changes (richer frequency content than
        one encoding supports)."""
        circuit = build(ArchitectureId(Family.DEEP_TEACHER4))
        rng = np.random.default_rng(11)
        w = rng.uniform(0, 2 * np.pi, circuit.n_params)
        pmap = prediction_map(circuit, w, 51)
        center = pmap.resolution // 2
        slice_x1 = pmap.values[:, center]
        signs = np.sign(slice_x1)
        changes = int(np.sum(signs[1:] != signs[:-1]))
        assert changes >= 4

    def test_values_must_be_bounded(self):
        with pytest.raises(StructuralError):
            PredictionMap(2, -1.0, 1.0, np.array([[0.0, 2.0], [0.0, 0.0]]))

    def test_resolution_must_be_at_least_two(self):
        with pytest.raises(ConfigurationError):
            prediction_map(build(dissipative_qp()), np.zeros(12), resolution=1)


class TestNormalizeToDistribution:
    def test_constant_zero_map_is_uniform(self):
        pmap = PredictionMap(2, 0.0, 1.0, np.zeros((2, 2)))
        np.testing.assert_allclose(normalize_to_distribution(pmap), [0.25] * 4)

    def test_constant_minus_one_map_is_uniform(self):
        pmap = PredictionMap(2, 0.0, 1.0, -np.ones((2, 2)))
        np.testing.assert_allclose(normalize_to_distribution(pmap), [0.25] * 4)

    def test_strictly_positive_and_normalized(self, rng):
        for _ in range(20):
            p = normalize_to_distribution(random_map(rng))
            assert p.min() > 0
            assert abs(p.sum() - 1.0) < 1e-12


class TestRelativeEntropy:
    def test_self_entropy_is_zero(self, rng):
        pmap = random_map(rng)
        assert relative_entropy(pmap, pmap) == pytest.approx(0.0, abs=1e-12)

    def test_constant_maps_of_different_levels_agree(self):
        a = PredictionMap(3, 0.0, 1.0, np.full((3, 3), 0.5))
        b = PredictionMap(3, 0.0, 1.0, np.full((3, 3), -0.5))
        assert relative_entropy(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_distribution_value(self):
        # S([0.5, 0.5] || [0.25, 0.75]) = 0.5 ln 2 + 0.5 ln(2/3)
        expected = 0.5 * np.log(2.0) + 0.5 * np.log(2.0 / 3.0)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.14384103622589045, abs=1e-15)

    def test_gibbs_inequality_on_random_maps(self, rng):
        for _ in range(200):
            assert relative_entropy(random_map(rng), random_map(rng)) >= 0.0

    def test_asymmetric_direction_pinned(self, rng):
        teacher = random_map(rng)
        student = random_map(rng)
        forward_value = relative_entropy(teacher, student)
        backward_value = relative_entropy(student, teacher)
        assert forward_value != pytest.approx(backward_value, abs=1e-12)
        p = normalize_to_distribution(teacher)
        q = normalize_to_distribution(student)
        assert forward_value == pytest.approx(float(np.sum(p * np.log(p / q))), abs=1e-12)

    def test_grid_mismatch_rejected(self, rng):
        a = random_map(rng, resolution=8)
        b = random_map(rng, resolution=9)
        with pytest.raises(StructuralError):
            relative_entropy(a, b)


class TestAccuracy:
    def test_exact_match(self):
        assert accuracy([0.5, -0.5], [1.0, -1.0]) == 1.0

    def test_all_flipped(self):
        assert accuracy([-0.5, 0.5], [1.0, -1.0]) == 0.0

    def test_two_of_three(self):
        assert accuracy([0.3, -0.2, 0.9], [1.0, 1.0, 1.0]) == pytest.approx(2 / 3)

    def test_scale_invariance(self, rng):
        preds = rng.uniform(-1, 1, 50)
        labels = np.where(rng.uniform(size=50) < 0.5, -1.0, 1.0)
        assert accuracy(preds, labels) == accuracy(preds * 0.037, labels)

    def test_length_mismatch_rejected(self):
        with pytest.raises(StructuralError):
            accuracy([1.0], [1.0, -1.0])


class TestMapCsv:
    def test_round_trip(self, tmp_path, rng):
        pmap = random_map(rng, resolution=6)
        path = tmp_path / "map.csv"
        write_prediction_map(pmap, path)
        loaded = read_prediction_map(path)
        assert loaded.resolution == pmap.resolution
        assert loaded.lo == pmap.lo and loaded.hi == pmap.hi
        np.testing.assert_array_equal(loaded.values, pmap.values)

    def test_rejects_foreign_csv(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(StructuralError):
            read_prediction_map(path)
