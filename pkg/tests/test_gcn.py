"""Encoder and trainer: normalization oracle, gradient check, persistence."""

import numpy as np
import pytest

from flowgap.features import N_FEATURES, SplitExample
from flowgap.gcn import (
    TrainConfig,
    TrainingDiverged,
    encode_example,
    flatten_params,
    forward,
    init_model,
    load_model,
    loss_and_gradients,
    normalize_adjacency,
    predict_proba,
    save_model,
    set_flat_params,
    train,
)


def random_split(rng, k_before=4, k_after=5) -> SplitExample:
    def side(k):
        adj = (rng.random((k, k)) < 0.4).astype(float)
        np.fill_diagonal(adj, 0.0)
        feats = rng.normal(size=(k, N_FEATURES))
        return adj, feats

    adj_b, feat_b = side(k_before)
    adj_a, feat_a = side(k_after)
    return SplitExample(
        candidate_edge=(0, 1),
        before_ids=tuple(range(k_before)),
        after_ids=tuple(range(k_after)),
        adj_before=adj_b,
        adj_after=adj_a,
        feat_before=feat_b,
        feat_after=feat_a,
    )


class TestNormalization:
    def test_two_node_chain(self):
        s = normalize_adjacency(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(s, np.full((2, 2), 0.5))

    def test_isolated_node_keeps_self_loop(self):
        assert np.allclose(normalize_adjacency(np.zeros((1, 1))), np.ones((1, 1)))

    def test_three_node_path_oracle(self):
        # degrees with self-loops: 2, 3, 2
        a = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
        s = normalize_adjacency(a)
        assert np.isclose(s[0, 0], 1 / 2)
        assert np.isclose(s[0, 1], 1 / np.sqrt(6))
        assert np.isclose(s[1, 1], 1 / 3)
        assert s[0, 2] == 0.0

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            normalize_adjacency(np.zeros((2, 3)))


class TestModelBasics:
    def test_init_is_seeded(self):
        cfg = TrainConfig(hidden=8, seed=5)
        a, b = init_model(cfg), init_model(cfg)
        assert all(np.array_equal(x, y) for x, y in zip(a.params(), b.params()))
        c = init_model(TrainConfig(hidden=8, seed=6))
        assert not np.array_equal(a.w1, c.w1)

    def test_forward_shape_and_probability_range(self):
        rng = np.random.default_rng(0)
        ex = random_split(rng)
        model = init_model(TrainConfig(hidden=8, out_dim=8, seed=1))
        logits = forward(model, encode_example(ex))
        assert logits.shape == (8,)
        proba = predict_proba(model, ex)
        assert np.all((proba > 0) & (proba < 1))

    def test_directed_input_is_symmetrized(self):
        rng = np.random.default_rng(1)
        ex = random_split(rng)
        sym = SplitExample(
            candidate_edge=ex.candidate_edge,
            before_ids=ex.before_ids,
            after_ids=ex.after_ids,
            adj_before=np.maximum(ex.adj_before, ex.adj_before.T),
            adj_after=np.maximum(ex.adj_after, ex.adj_after.T),
            feat_before=ex.feat_before,
            feat_after=ex.feat_after,
        )
        model = init_model(TrainConfig(hidden=8, seed=2))
        assert np.allclose(
            forward(model, encode_example(ex)), forward(model, encode_example(sym))
        )


class TestGradients:
    @pytest.mark.parametrize("seed,out_dim", [(0, 1), (1, 3), (2, 8)])
    def test_analytic_matches_finite_differences(self, seed, out_dim):
        rng = np.random.default_rng(seed)
        cfg = TrainConfig(hidden=6, out_dim=out_dim, l2=1e-4, seed=seed)
        model = init_model(cfg)
        batch = [encode_example(random_split(rng)) for _ in range(2)]
        targets = (rng.random((2, out_dim)) < 0.5).astype(float)

        _, grads = loss_and_gradients(model, batch, targets)
        analytic = flatten_params(grads)
        flat = flatten_params(model.params())
        h = 1e-5
        numeric = np.empty_like(flat)
        for j in range(flat.size):
            for sign, slot in ((1.0, 0), (-1.0, 1)):
                probe = flat.copy()
                probe[j] += sign * h
                set_flat_params(model, probe)
                val = loss_and_gradients(model, batch, targets)[0]
                numeric[j] = val if slot == 0 else (numeric[j] - val) / (2 * h)
        set_flat_params(model, flat)

        rel = np.abs(analytic - numeric) / np.maximum(
            1.0, np.abs(analytic) + np.abs(numeric)
        )
        assert rel.max() < 1e-4

    def test_target_shape_enforced(self):
        rng = np.random.default_rng(3)
        model = init_model(TrainConfig(hidden=4, out_dim=2))
        batch = [encode_example(random_split(rng))]
        with pytest.raises(ValueError):
            loss_and_gradients(model, batch, np.zeros((1, 3)))


class TestTraining:
    def _toy_problem(self):
        # positive examples carry a strong constant feature in the first column
        rng = np.random.default_rng(4)
        examples, targets = [], []
        for i in range(12):
            ex = random_split(rng)
            y = float(i % 2)
            ex.feat_before[:, 0] = 3.0 * y
            ex.feat_after[:, 0] = 3.0 * y
            examples.append(ex)
            targets.append([y])
        return examples, np.array(targets)

    def test_loss_decreases_and_separates(self):
        examples, targets = self._toy_problem()
        cfg = TrainConfig(hidden=8, epochs=150, seed=0)
        model, log = train(examples, targets, cfg)
        assert len(log.losses) == 150
        assert log.final_loss < log.losses[0] / 3
        proba = np.array([predict_proba(model, ex)[0] for ex in examples])
        assert np.all(proba[1::2] > 0.5) and np.all(proba[0::2] < 0.5)

    def test_training_is_deterministic(self):
        examples, targets = self._toy_problem()
        cfg = TrainConfig(hidden=8, epochs=30, seed=9)
        m1, log1 = train(examples, targets, cfg)
        m2, log2 = train(examples, targets, cfg)
        assert log1.losses == log2.losses
        assert all(np.array_equal(a, b) for a, b in zip(m1.params(), m2.params()))

    def test_divergence_detected(self):
        examples, targets = self._toy_problem()
        cfg = TrainConfig(hidden=8, epochs=50, seed=0, loss_ceiling=1e-9)
        with pytest.raises(TrainingDiverged):
            train(examples, targets, cfg)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            train([], np.zeros((0, 1)), TrainConfig())


class TestPersistence:
    def test_roundtrip_preserves_predictions(self, tmp_path):
        examples, targets = (lambda e, t: (e, t))(*TestTraining()._toy_problem())
        model, _ = train(examples, targets, TrainConfig(hidden=8, epochs=20, seed=2))
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        for ex in examples[:3]:
            assert np.allclose(predict_proba(model, ex), predict_proba(loaded, ex))

    def test_save_is_byte_stable(self, tmp_path):
        model = init_model(TrainConfig(hidden=4, seed=1))
        save_model(model, tmp_path / "a.json")
        save_model(model, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_rejects_wrong_format(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "something-else", "version": 1}')
        with pytest.raises(ValueError):
            load_model(path)

    def test_rejects_tampered_shape(self, tmp_path):
        import json

        model = init_model(TrainConfig(hidden=4, seed=1))
        path = tmp_path / "model.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        payload["weights"]["w2"]["shape"] = [3, 5]
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError):
            load_model(path)
