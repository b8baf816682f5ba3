import math

import numpy as np
import pytest

from kracl.core.errors import InvariantViolation, LossError
from kracl.engine import Tensor, grad_check, grad_check_parameters
from kracl.models.objective import LossConfig
from kracl.services.objective import (
    ObjectiveService,
    bce_loss,
    contrastive_loss,
    cross_entropy_loss,
    make_batch,
    total_loss,
)

EPS = 1e-12


def single_label_batch(golds, labels=None):
    """One distinct query per row; ``labels`` optionally widens each target set."""
    queries = np.stack([np.arange(len(golds)), np.zeros(len(golds), dtype=np.int64)], axis=1)
    labels = labels or [[g] for g in golds]
    known = {(i, 0): np.array(sorted(targets)) for i, targets in enumerate(labels)}
    return make_batch(queries, np.array(golds), known)


def reference_contrastive(z, entities, golds, tau):
    z = z / np.linalg.norm(z, axis=1, keepdims=True)
    h = entities / np.linalg.norm(entities, axis=1, keepdims=True)
    total = 0.0
    for o in sorted(set(golds)):
        members = [i for i, g in enumerate(golds) if g == o]
        others = [k for k, g in enumerate(golds) if g != o]
        denominator = sum(math.exp(float(z[k] @ h[o]) / tau) for k in others)
        term = 0.0
        for i in members:
            term += math.log(math.exp(float(z[i] @ h[o]) / tau) / denominator + EPS)
        total -= term / len(members)
    return total


class TestMakeBatch:
    def test_groups_rows_by_gold(self):
        batch = single_label_batch([3, 1, 3, 0])
        assert sorted(batch.positive_grouping) == [0, 1, 3]
        np.testing.assert_array_equal(batch.positive_grouping[3], [0, 2])

    def test_gold_must_be_a_target(self):
        with pytest.raises(InvariantViolation):
            make_batch(np.array([[0, 0]]), np.array([2]), {(0, 0): np.array([1])})

    def test_unknown_query_has_empty_targets(self):
        with pytest.raises(InvariantViolation):
            make_batch(np.array([[0, 0]]), np.array([2]), {})


class TestContrastive:
    @pytest.mark.parametrize("tau", [0.05, 0.1, 1.0, 7.0])
    def test_equal_similarities(self, tau):
        batch = single_label_batch([0, 1, 2, 3])
        loss = contrastive_loss(Tensor(np.ones((4, 5))), Tensor(np.ones((4, 5))), batch, LossConfig(temperature=tau))
        assert loss.item() == pytest.approx(4 * math.log(3), abs=1e-9)

    def test_matches_double_loop(self, rng):
        golds = [0, 1, 0, 2, 3, 1]
        z, entities = rng.normal(size=(6, 8)), rng.normal(size=(5, 8))
        cfg = LossConfig(temperature=0.5)
        loss = contrastive_loss(Tensor(z), Tensor(entities), single_label_batch(golds), cfg)
        assert loss.item() == pytest.approx(reference_contrastive(z, entities, golds, 0.5), rel=1e-9)

    def test_inputs_are_not_normalized_in_place(self, rng):
        z, entities = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
        z_copy, entities_copy = z.copy(), entities.copy()
        contrastive_loss(Tensor(z), Tensor(entities), single_label_batch([0, 1, 2]), LossConfig())
        np.testing.assert_array_equal(z, z_copy)
        np.testing.assert_array_equal(entities, entities_copy)

    def test_row_permutation_invariance(self, rng):
        golds = np.array([4, 1, 4, 2, 0, 1, 3])
        z, entities = rng.normal(size=(7, 6)), rng.normal(size=(5, 6))
        perm = rng.permutation(7)
        cfg = LossConfig(temperature=0.2)
        first = contrastive_loss(Tensor(z), Tensor(entities), single_label_batch(golds.tolist()), cfg).item()
        second = contrastive_loss(Tensor(z[perm]), Tensor(entities), single_label_batch(golds[perm].tolist()), cfg).item()
        assert first == pytest.approx(second, abs=1e-9)

    def test_single_gold_object(self, rng):
        batch = single_label_batch([2, 2, 2])
        with pytest.raises(LossError):
            contrastive_loss(Tensor(rng.normal(size=(3, 4))), Tensor(rng.normal(size=(3, 4))), batch, LossConfig())

    def test_gold_similarity_sweep_is_decreasing(self):
        entities = Tensor(np.eye(3))
        batch = single_label_batch([0, 1, 2])
        values = []
        for t in np.linspace(0.0, 4.0, 13):
            z = np.array([[t, 1.0, 1.0], [0.1, 1.0, 0.0], [0.0, 0.2, 1.0]])
            values.append(contrastive_loss(Tensor(z), entities, batch, LossConfig(temperature=0.5)).item())
        assert all(later < earlier for earlier, later in zip(values, values[1:]))

    def test_gradients(self, rng):
        batch = single_label_batch([0, 1, 0, 2])
        z = Tensor(rng.normal(size=(4, 5)), requires_grad=True)
        entities = Tensor(rng.normal(size=(3, 5)), requires_grad=True)
        cfg = LossConfig(temperature=0.3)
        assert grad_check_parameters(lambda: contrastive_loss(z, entities, batch, cfg), [z, entities]) <= 1e-4

    def test_large_similarities_stay_finite(self):
        batch = single_label_batch([0, 1])
        loss = contrastive_loss(Tensor(np.eye(2)), Tensor(np.eye(2)), batch, LossConfig(temperature=1e-3))
        assert np.isfinite(loss.item())
        assert loss.item() == pytest.approx(-2000.0, rel=1e-9)


class TestCrossEntropy:
    def test_uniform_scores(self):
        loss = cross_entropy_loss(Tensor(np.zeros((1, 4))), single_label_batch([2]), LossConfig())
        assert loss.item() == pytest.approx(math.log(4), abs=1e-9)

    @pytest.mark.parametrize("entities", [2, 17, 135])
    def test_uniform_scores_any_vocabulary(self, entities):
        loss = cross_entropy_loss(Tensor(np.full((3, entities), 0.4)), single_label_batch([0, 1, 1]), LossConfig())
        assert loss.item() == pytest.approx(math.log(entities), abs=1e-9)

    def test_saturation(self):
        scores = np.zeros((1, 4))
        scores[0, 1] = 30.0
        assert cross_entropy_loss(Tensor(scores), single_label_batch([1]), LossConfig()).item() <= 1e-9

    def test_matches_scalar_oracle(self, rng):
        scores = rng.normal(size=(3, 6))
        labels = [[1, 4], [0, 2], [5, 3]]
        loss = cross_entropy_loss(Tensor(scores), single_label_batch([1, 2, 5], labels), LossConfig()).item()
        expected = 0.0
        for row, targets in enumerate(labels):
            probs = np.exp(scores[row]) / np.exp(scores[row]).sum()
            expected -= sum(0.5 * math.log(probs[o] + EPS) for o in targets)
        assert loss == pytest.approx(expected / 3, abs=1e-9)

    def test_non_negative(self, rng):
        batch = single_label_batch([0, 3, 3], [[0], [3, 1], [3]])
        for _ in range(20):
            assert cross_entropy_loss(Tensor(rng.normal(size=(3, 5)) * 10), batch, LossConfig()).item() >= 0.0

    def test_label_smoothing_spreads_targets(self):
        scores = np.zeros((1, 4))
        scores[0, 1] = 30.0
        smoothed = cross_entropy_loss(Tensor(scores), single_label_batch([1]), LossConfig(label_smoothing=0.1))
        assert smoothed.item() > 1.0

    def test_gradients(self, rng):
        batch = single_label_batch([0, 3], [[0, 2], [3]])
        assert grad_check(lambda s: cross_entropy_loss(s, batch, LossConfig()), rng.normal(size=(2, 4))) <= 1e-4


class TestBinaryCrossEntropy:
    def test_zero_scores(self):
        batch = single_label_batch([0])
        # a single label among many: every entry costs ln 2 whatever its label
        loss = bce_loss(Tensor(np.zeros((1, 6))), batch, LossConfig(bce_mode=True))
        assert loss.item() == pytest.approx(math.log(2), abs=1e-9)

    def test_saturation(self):
        scores = np.full((1, 5), -30.0)
        scores[0, 2] = 30.0
        assert bce_loss(Tensor(scores), single_label_batch([2]), LossConfig(bce_mode=True)).item() <= 1e-9

    def test_matches_scalar_oracle(self, rng):
        scores = rng.normal(size=(2, 5)) * 3
        labels = [[0, 3], [4]]
        loss = bce_loss(Tensor(scores), single_label_batch([3, 4], labels), LossConfig(bce_mode=True)).item()
        expected = 0.0
        for row in range(2):
            for o in range(5):
                p = 1.0 / (1.0 + math.exp(-scores[row, o]))
                y = 1.0 if o in labels[row] else 0.0
                expected -= y * math.log(p) + (1 - y) * math.log(1 - p)
        assert loss == pytest.approx(expected / 10, abs=1e-9)

    def test_label_smoothing_matches_cross_entropy_mixing(self, rng):
        scores = rng.normal(size=(1, 5))
        smoothing = 0.01
        cfg = LossConfig(bce_mode=True, label_smoothing=smoothing)
        loss = bce_loss(Tensor(scores), single_label_batch([2]), cfg).item()
        expected = 0.0
        for o in range(5):
            # smoothed targets stay inside [0, 1]
            y = (1 - smoothing) * (o == 2) + smoothing / 5
            p = 1.0 / (1.0 + math.exp(-scores[0, o]))
            expected -= y * math.log(p) + (1 - y) * math.log(1 - p)
        assert loss == pytest.approx(expected / 5, abs=1e-9)

    def test_gradients(self, rng):
        batch = single_label_batch([1, 2], [[1], [0, 2]])
        cfg = LossConfig(bce_mode=True)
        assert grad_check(lambda s: bce_loss(s, batch, cfg), rng.normal(size=(2, 3))) <= 1e-4


class TestTotalLoss:
    def test_sum_of_both_terms(self):
        assert total_loss(1.0, 0.5, LossConfig()) == 1.5

    def test_ablations(self):
        assert total_loss(1.0, 0.5, LossConfig(use_ce=False)) == 1.0
        assert total_loss(1.0, 0.5, LossConfig(use_cl=False)) == 0.5

    def test_bce_mode(self):
        cfg = LossConfig(bce_mode=True)
        assert total_loss(None, None, cfg, bce=0.25) == 0.25
        with pytest.raises(LossError):
            total_loss(1.0, 0.5, cfg)

    def test_both_flags_off_is_rejected(self):
        with pytest.raises(ValueError):
            LossConfig(use_cl=False, use_ce=False)

    def test_tensor_sum_is_exact(self, rng):
        z, entities = Tensor(rng.normal(size=(4, 3))), Tensor(rng.normal(size=(4, 3)))
        batch = single_label_batch([0, 1, 2, 3])
        cfg = LossConfig()
        cl = contrastive_loss(z, entities, batch, cfg)
        ce = cross_entropy_loss(Tensor(rng.normal(size=(4, 4))), batch, cfg)
        assert total_loss(cl, ce, cfg).item() == cl.item() + ce.item()


class TestObjectiveService:
    def test_reports_each_part(self, rng):
        service = ObjectiveService(LossConfig())
        z, entities = Tensor(rng.normal(size=(3, 4))), Tensor(rng.normal(size=(5, 4)))
        loss, parts = service(z, Tensor(rng.normal(size=(3, 5))), entities, single_label_batch([0, 4, 2]))
        assert set(parts) == {"cl", "ce"}
        assert loss.item() == pytest.approx(parts["cl"] + parts["ce"])

    def test_single_gold_batch_skips_contrastive(self, rng):
        z, entities = Tensor(rng.normal(size=(2, 4))), Tensor(rng.normal(size=(5, 4)))
        scores = Tensor(rng.normal(size=(2, 5)))
        batch = single_label_batch([1, 1])
        loss, parts = ObjectiveService(LossConfig())(z, scores, entities, batch)
        assert set(parts) == {"ce"}
        assert loss.item() == parts["ce"]

        loss, parts = ObjectiveService(LossConfig(use_ce=False))(z, scores, entities, batch)
        assert loss is None
        assert parts == {}

    def test_bce_mode(self, rng):
        scores = Tensor(rng.normal(size=(2, 5)))
        loss, parts = ObjectiveService(LossConfig(bce_mode=True))(None, scores, None, single_label_batch([1, 3]))
        assert set(parts) == {"bce"}
        assert loss.item() == parts["bce"]
