import math

import numpy as np
import pytest

from nlglrt.classifier import (
    LabeledSampleSet,
    MlpModel,
    TrainConfig,
    build_labeled_set,
    choose_threshold,
    classify_and_edit,
    init_mlp,
    make_labels,
    mlp_forward,
    mlp_gradient,
    mlp_loss,
    mlp_train,
    model_from_json,
    model_to_json,
    sample_distances,
    stack_columns,
    stack_sample,
    unstack_sample,
)
from nlglrt.errors import DimensionMismatch, EmptyInput, InvalidConfig, ShapeMismatch

from tests.conftest import crandn


def random_model(rng, sizes):
    weights = [rng.standard_normal((a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    biases = [rng.standard_normal(b) for b in sizes[1:]]
    return MlpModel(weights, biases, np.zeros(sizes[0]), np.ones(sizes[0]))


def loop_forward(model, x):
    """Scalar-loop forward pass used as an oracle."""
    h = [(v - m) / s for v, m, s in zip(x, model.input_mean, model.input_std)]
    for li, (w, b) in enumerate(zip(model.weights, model.biases)):
        pre = [b[j] + sum(h[i] * w[i][j] for i in range(len(h))) for j in range(len(b))]
        if li < len(model.weights) - 1:
            h = [math.tanh(v) for v in pre]
        else:
            top = max(pre)
            e = [math.exp(v - top) for v in pre]
            return [v / sum(e) for v in e]


def numeric_gradient(model, x, y, h=1e-5):
    out = []
    for p in model.params():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            keep = p[idx]
            p[idx] = keep + h
            up = mlp_loss(model, x, y)
            p[idx] = keep - h
            down = mlp_loss(model, x, y)
            p[idx] = keep
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


def constant_model(m, bias):
    """Ignores its input; ``bias`` decides the output class everywhere."""
    return MlpModel(
        weights=[np.zeros((2 * m, 2))],
        biases=[np.asarray(bias, dtype=np.float64)],
        input_mean=np.zeros(2 * m),
        input_std=np.ones(2 * m),
    )


class TestStacking:
    def test_example(self):
        assert np.array_equal(stack_sample([1 + 2j, 3 - 4j]), [1, 3, 2, -4])

    def test_round_trip(self, rng):
        z = crandn(rng, 4)
        assert np.array_equal(unstack_sample(stack_sample(z)), z)

    def test_columns(self, rng):
        z = crandn(rng, 3, 7)
        rows = stack_columns(z)
        assert rows.shape == (7, 6)
        for t in range(7):
            assert np.array_equal(rows[t], stack_sample(z[:, t]))


class TestDistances:
    def test_three_four_five(self):
        d = sample_distances([[3 + 0j], [0j]], [[0j], [4j]])
        assert d[0] == 5.0

    def test_matches_loop(self, rng):
        a, b = crandn(rng, 4, 30), crandn(rng, 4, 30)
        want = [math.sqrt(sum(abs(a[i, t] - b[i, t]) ** 2 for i in range(4))) for t in range(30)]
        assert np.allclose(sample_distances(a, b), want, rtol=1e-14)

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            sample_distances(crandn(rng, 4, 3), crandn(rng, 4, 4))


class TestThreshold:
    def test_quartile_rank(self):
        assert choose_threshold(np.arange(1, 101), 0.25) == 75

    def test_median_rank(self):
        assert choose_threshold(np.arange(1, 101), 0.5) == 50

    def test_all_equal(self):
        assert choose_threshold(np.full(17, 2.5), 0.3) == 2.5

    def test_tiny_fraction_gives_max(self):
        assert choose_threshold([4.0, 1.0, 9.0, 2.0], 1e-12) == 9.0

    def test_empty(self):
        with pytest.raises(EmptyInput):
            choose_threshold([], 0.5)

    @pytest.mark.parametrize("f", [0.0, 1.0, -0.1])
    def test_fraction_range(self, f):
        with pytest.raises(ValueError):
            choose_threshold([1.0, 2.0], f)


class TestLabels:
    def test_boundary_is_linear(self):
        labels = make_labels([1.0, 2.0, 3.0], 2.0)
        assert np.array_equal(labels, [[1, 0], [1, 0], [0, 1]])

    def test_one_hot(self, rng):
        labels = make_labels(rng.uniform(0, 1, 50), 0.5)
        assert np.all(labels.sum(axis=1) == 1)

    def test_build_set_flags_about_fraction(self, rng):
        z = crandn(rng, 4, 400) * 20
        data = build_labeled_set(z, z / (1 + 0.01 * np.abs(z)), flagged_fraction=0.25)
        assert len(data) == 400 and data.samples.shape == (400, 8)
        assert data.labels[:, 1].sum() == 100

    def test_set_length_check(self):
        with pytest.raises(ShapeMismatch):
            LabeledSampleSet(np.zeros((3, 2)), np.zeros((2, 2)), np.zeros(3), 0.0)


class TestForward:
    def test_zero_network_is_uniform(self):
        model = init_mlp(8, 3, 10, np.random.default_rng(0))
        for w in model.weights:
            w[:] = 0
        assert np.array_equal(mlp_forward(model, np.ones(8)), [0.5, 0.5])

    def test_outputs_sum_to_one(self, rng):
        model = random_model(rng, [8, 10, 10, 10, 2])
        out = mlp_forward(model, rng.standard_normal((25, 8)) * 5)
        assert np.allclose(out.sum(axis=1), 1.0, atol=1e-15)
        assert np.all(out >= 0)

    def test_matches_scalar_loop(self, rng):
        model = random_model(rng, [4, 3, 2])
        model.input_mean = rng.standard_normal(4)
        model.input_std = rng.uniform(0.5, 2, 4)
        x = rng.standard_normal(4)
        assert np.allclose(mlp_forward(model, x), loop_forward(model, x), rtol=1e-13)

    def test_input_width_checked(self, rng):
        with pytest.raises(ShapeMismatch):
            mlp_forward(random_model(rng, [4, 3, 2]), np.zeros(5))

    def test_init_limits(self):
        model = init_mlp(8, 3, 10, np.random.default_rng(1))
        assert model.layer_sizes == [8, 10, 10, 10, 2]
        assert np.abs(model.weights[0]).max() <= 1 / math.sqrt(8)
        assert all(np.all(b == 0) for b in model.biases)


class TestGradient:
    def test_matches_finite_differences(self, rng):
        model = random_model(rng, [4, 3, 3, 2])
        x = rng.standard_normal((6, 4))
        y = make_labels(rng.uniform(size=6), 0.5)
        gw, gb = mlp_gradient(model, x, y)
        for got, want in zip(gw + gb, numeric_gradient(model, x, y)):
            assert np.max(np.abs(got - want)) <= 1e-4 * max(1e-8, np.max(np.abs(want)))

    def test_duplicated_batch(self, rng):
        model = random_model(rng, [4, 3, 2])
        x = rng.standard_normal((1, 4))
        y = np.array([[0.0, 1.0]])
        single = mlp_gradient(model, x, y)
        double = mlp_gradient(model, np.vstack([x, x]), np.vstack([y, y]))
        for a, b in zip(single[0] + single[1], double[0] + double[1]):
            assert np.allclose(a, b, rtol=1e-12, atol=1e-16)

    def test_zero_residual(self):
        model = constant_model(2, [0.0, 0.0])
        gw, gb = mlp_gradient(model, np.ones((3, 4)), np.full((3, 2), 0.5))
        assert all(np.all(g == 0) for g in gw + gb)


def separable_set(n=256, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 8))
    d = np.abs(x[:, 0])
    labels = make_labels(d, 0.8)
    return LabeledSampleSet(x, labels, d, 0.8), x


class TestTraining:
    def test_learns_separable_set(self):
        data, x = separable_set()
        cfg = TrainConfig(batch_size=32, learning_rate=0.01, max_epochs=300, patience=300)
        model = mlp_train(data, cfg).model
        pred = mlp_forward(model, x)[:, 1] > 0.5
        assert np.mean(pred == data.labels[:, 1].astype(bool)) >= 0.97

    def test_patience_with_frozen_weights(self):
        data, _ = separable_set(64)
        result = mlp_train(data, TrainConfig(learning_rate=0.0, patience=1, max_epochs=50))
        assert result.epochs == 2 and result.early_stopped
        assert result.losses[0] == result.losses[1]

    def test_deterministic(self):
        data, _ = separable_set(128)
        cfg = TrainConfig(max_epochs=5, patience=5)
        a = mlp_train(data, cfg)
        b = mlp_train(data, cfg)
        assert a.losses == b.losses
        assert model_to_json(a.model) == model_to_json(b.model)

    def test_best_loss_non_increasing_and_restored(self):
        data, _ = separable_set(128)
        result = mlp_train(data, TrainConfig(learning_rate=0.05, max_epochs=40, patience=40))
        assert all(b <= a for a, b in zip(result.best_losses, result.best_losses[1:]))
        assert math.isclose(mlp_loss(result.model, data.samples, data.labels), min(result.losses))

    def test_needs_a_full_batch(self):
        data, _ = separable_set(10)
        with pytest.raises(ShapeMismatch):
            mlp_train(data, TrainConfig(batch_size=64))

    def test_config_validation(self):
        with pytest.raises(InvalidConfig, match="patience <= max_epochs"):
            TrainConfig(patience=10, max_epochs=5)
        with pytest.raises(InvalidConfig, match="optimizer"):
            TrainConfig(optimizer="rmsprop")


class TestEdit:
    def test_never_flags(self, rng):
        z = crandn(rng, 4, 50)
        out = classify_and_edit(z, constant_model(4, [1.0, 0.0]))
        assert np.array_equal(out.edited, z) and out.flagged_count == 0

    def test_always_flags(self, rng):
        out = classify_and_edit(crandn(rng, 4, 50), constant_model(4, [0.0, 1.0]))
        assert out.edited.shape == (4, 0) and out.flagged_count == 50

    def test_flags_selected_columns(self, rng):
        z = crandn(rng, 4, 40) * 0.1
        z[0, [10, 20]] = 50.0
        # hidden units tanh(x0 - 10) and tanh(-x0 - 10) sum to -2 unless |x0| is large,
        # the output logits are -/+ 5 * (sum + 1)
        w1 = np.zeros((8, 2))
        w1[0] = [1.0, -1.0]
        w2 = np.array([[-1.0, 1.0], [-1.0, 1.0]]) * 5
        model = MlpModel(
            weights=[w1, w2],
            biases=[np.array([-10.0, -10.0]), np.array([-5.0, 5.0])],
            input_mean=np.zeros(8),
            input_std=np.ones(8),
        )
        out = classify_and_edit(z, model)
        assert out.flagged_count == 2
        assert np.array_equal(out.kept_indices, [t for t in range(40) if t not in (10, 20)])
        assert np.array_equal(out.edited, z[:, out.kept_indices])

    def test_antenna_count_checked(self, rng):
        with pytest.raises(ShapeMismatch):
            classify_and_edit(crandn(rng, 3, 5), constant_model(4, [1.0, 0.0]))


class TestSerialization:
    def test_round_trip(self, rng):
        model = random_model(rng, [8, 10, 10, 10, 2])
        model.distance_threshold = 1.25
        cfg = TrainConfig(seed=3)
        back, back_cfg = model_from_json(model_to_json(model, cfg))
        assert back_cfg == cfg and back.distance_threshold == 1.25
        for a, b in zip(model.params(), back.params()):
            assert np.array_equal(a, b)
        assert model_to_json(back, back_cfg) == model_to_json(model, cfg)

    def test_bad_schema(self):
        with pytest.raises(InvalidConfig):
            model_from_json('{"schema": "other"}')
