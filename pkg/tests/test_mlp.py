"""Network forward/backward, training, and checkpointing.

Oracle first: central finite differences of the loss, computed through
nothing but the forward pass, certify the hand-derived backpropagation.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairsteer import (
    DimensionMismatch,
    EmptyDataset,
    InvalidShape,
    LabelDimensionMismatch,
    MlpModel,
    TrainConfig,
    accuracy,
    fine_tune,
    finetune_config,
    forward,
    init_model,
    load_checkpoint,
    predict,
    save_checkpoint,
    train,
)
from fairsteer.mlp import LOGIT_CLAMP, loss_and_gradients, model_to_checkpoint

# -- gradient oracle -----------------------------------------------------------


def finite_difference_gradients(model, x, y, weights=None, step=1e-5):
    """Central-difference dL/dparam, touching only the forward/loss path."""

    def loss_at(m):
        return loss_and_gradients(m, x, y, weights)[0]

    grad_w, grad_b = [], []
    for layer in range(len(model.weights)):
        gw = np.zeros_like(model.weights[layer])
        for index in np.ndindex(*gw.shape):
            plus = model.copy()
            plus.weights[layer][index] += step
            minus = model.copy()
            minus.weights[layer][index] -= step
            gw[index] = (loss_at(plus) - loss_at(minus)) / (2 * step)
        grad_w.append(gw)
        gb = np.zeros_like(model.biases[layer])
        for index in np.ndindex(*gb.shape):
            plus = model.copy()
            plus.biases[layer][index] += step
            minus = model.copy()
            minus.biases[layer][index] -= step
            gb[index] = (loss_at(plus) - loss_at(minus)) / (2 * step)
        grad_b.append(gb)
    return grad_w, grad_b


def max_relative_error(analytic, numeric):
    worst = 0.0
    for a, f in zip(analytic, numeric):
        denom = np.maximum(np.abs(a) + np.abs(f), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - f) / denom)))
    return worst


def random_problem(seed, layers=(4, 5, 3), n=8):
    rng = np.random.default_rng(seed)
    model = init_model(layers, seed=seed)
    x = rng.normal(size=(n, layers[0]))
    y = rng.integers(0, layers[-1], size=n)
    return model, x, y


def test_gradients_match_finite_differences():
    model, x, y = random_problem(seed=1)
    _, gw, gb = loss_and_gradients(model, x, y)
    fw, fb = finite_difference_gradients(model, x, y)
    assert max_relative_error(gw + gb, fw + fb) < 1e-4


def test_gradients_match_finite_differences_weighted():
    model, x, y = random_problem(seed=2)
    weights = np.random.default_rng(2).uniform(0.2, 3.0, size=len(y))
    _, gw, gb = loss_and_gradients(model, x, y, weights)
    fw, fb = finite_difference_gradients(model, x, y, weights)
    assert max_relative_error(gw + gb, fw + fb) < 1e-4


def test_gradient_zero_for_clamped_logits():
    model, x, y = random_problem(seed=3, layers=(3, 2))
    model.weights[0] *= 1e6  # push logits far past the clamp
    assert np.all(np.abs(x @ model.weights[0] + model.biases[0]) > LOGIT_CLAMP)
    _, gw, gb = loss_and_gradients(model, x, y)
    assert all(np.all(g == 0.0) for g in gw + gb)


# -- initialization ------------------------------------------------------------


def test_he_initialization_statistics():
    model = init_model((1000, 800), seed=0)
    observed = model.weights[0].std()
    expected = np.sqrt(2.0 / 1000)
    assert abs(observed - expected) / expected < 0.2
    assert np.all(model.biases[0] == 0.0)


def test_init_is_deterministic():
    a = init_model((6, 4, 3), seed=9)
    b = init_model((6, 4, 3), seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))


def test_init_rejects_bad_shapes():
    with pytest.raises(InvalidShape):
        init_model((5,))
    with pytest.raises(InvalidShape):
        init_model((5, 0, 2))


# -- forward / predict ---------------------------------------------------------


def test_forward_single_and_batch():
    model = init_model((3, 4, 2), seed=0)
    single = forward(model, np.ones(3))
    batch = forward(model, np.ones((5, 3)))
    assert single.shape == (2,)
    assert batch.shape == (5, 2)
    assert np.allclose(batch, single)  # identical rows
    assert abs(single.sum() - 1.0) < 1e-12


def test_forward_rejects_wrong_width():
    model = init_model((3, 2), seed=0)
    with pytest.raises(DimensionMismatch):
        forward(model, np.ones(4))


def test_forward_survives_extreme_logits():
    model = init_model((2, 2), seed=0)
    model.weights[0][:] = 1e9
    probs = forward(model, np.asarray([1.0, 1.0]))
    assert np.all(np.isfinite(probs))
    assert abs(probs.sum() - 1.0) < 1e-12


def test_predict_tie_breaks_to_lowest_index():
    model = init_model((2, 3), seed=0)
    model.weights[0][:] = 0.0  # all logits equal
    assert predict(model, np.asarray([1.0, 1.0])) == 0


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=10_000),
    st.integers(min_value=1, max_value=6),
)
def test_property_forward_is_a_distribution(seed, rows):
    model, x, _ = random_problem(seed=seed, layers=(5, 4, 4), n=rows)
    probs = forward(model, x)
    assert np.all(probs >= 0.0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


# -- training ------------------------------------------------------------------


def separable_problem(n=60, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 2))
    y = (x[:, 0] + x[:, 1] > 0).astype(np.int64)
    return x, y


def test_train_decreases_loss():
    x, y = separable_problem()
    model = init_model((2, 8, 2), seed=0)
    _, history = train(model, x, y, TrainConfig(epochs=15, seed=0))
    assert len(history) == 15
    assert history[-1] < history[0]


def test_train_does_not_mutate_input_model():
    x, y = separable_problem()
    model = init_model((2, 8, 2), seed=0)
    before = [w.copy() for w in model.weights]
    train(model, x, y, TrainConfig(epochs=3, seed=0))
    assert all(np.array_equal(a, b) for a, b in zip(model.weights, before))


def test_train_is_deterministic():
    x, y = separable_problem()
    run = lambda: train(
        init_model((2, 8, 2), seed=1), x, y, TrainConfig(epochs=5, seed=7)
    )
    (a, ha), (b, hb) = run(), run()
    assert ha == hb
    assert all(np.array_equal(wa, wb) for wa, wb in zip(a.weights, b.weights))


def test_train_solves_linearly_separable_toy():
    x, y = separable_problem(n=80, seed=4)
    model = init_model((2, 16, 2), seed=0)
    trained, _ = train(model, x, y, TrainConfig(epochs=200, seed=0))
    assert accuracy(trained, x, y) == 1.0


def test_train_zero_epochs_is_identity():
    x, y = separable_problem()
    model = init_model((2, 4, 2), seed=0)
    result, history = train(model, x, y, TrainConfig(epochs=0))
    assert history == []
    assert all(np.array_equal(a, b) for a, b in zip(result.weights, model.weights))


def test_train_without_shuffle_differs_from_shuffled():
    x, y = separable_problem()
    base = init_model((2, 4, 2), seed=0)
    shuffled, _ = train(base, x, y, TrainConfig(epochs=3, seed=0, shuffle=True))
    ordered, _ = train(base, x, y, TrainConfig(epochs=3, seed=0, shuffle=False))
    assert any(
        not np.array_equal(a, b) for a, b in zip(shuffled.weights, ordered.weights)
    )


def test_class_weighting_changes_training():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 3))
    y = np.asarray([0] * 45 + [1] * 5)
    base = init_model((3, 6, 2), seed=0)
    plain, _ = train(base, x, y, TrainConfig(epochs=5, seed=0))
    weighted, _ = train(
        base, x, y, TrainConfig(epochs=5, seed=0, class_weighting=True)
    )
    assert any(
        not np.array_equal(a, b) for a, b in zip(plain.weights, weighted.weights)
    )


def test_train_validates_inputs():
    model = init_model((2, 2), seed=0)
    with pytest.raises(EmptyDataset):
        train(model, np.empty((0, 2)), np.empty(0, dtype=int), TrainConfig())
    with pytest.raises(DimensionMismatch):
        train(model, np.ones((4, 3)), np.zeros(4, dtype=int), TrainConfig())
    with pytest.raises(LabelDimensionMismatch):
        train(model, np.ones((4, 2)), np.zeros(3, dtype=int), TrainConfig())


# -- fine-tuning ---------------------------------------------------------------


def test_fine_tune_warm_starts_from_current_weights():
    x, y = separable_problem()
    model, _ = train(init_model((2, 8, 2), seed=0), x, y, TrainConfig(epochs=10))
    same = fine_tune(model, x, y, TrainConfig(epochs=0))
    assert all(np.array_equal(a, b) for a, b in zip(same.weights, model.weights))
    moved = fine_tune(model, x, y, TrainConfig(epochs=2))
    assert any(not np.array_equal(a, b) for a, b in zip(moved.weights, model.weights))


def test_fine_tune_learns_flipped_labels():
    x, y = separable_problem(n=80, seed=4)
    model, _ = train(init_model((2, 16, 2), seed=0), x, y, TrainConfig(epochs=100))
    flipped = 1 - y
    assert accuracy(model, x, flipped) < 0.1
    tuned = fine_tune(model, x, flipped, TrainConfig(epochs=100, seed=1))
    assert accuracy(tuned, x, flipped) >= 0.9


def test_finetune_config_shortens_schedule():
    base = TrainConfig(epochs=30, seed=5, learning_rate=2e-3)
    tuned = finetune_config(base)
    assert tuned.epochs == 10
    assert tuned.seed == 5
    assert tuned.learning_rate == 2e-3
    assert finetune_config(base, epochs=4).epochs == 4


# -- checkpoints ---------------------------------------------------------------


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    x, y = separable_problem()
    model, _ = train(init_model((2, 8, 2), seed=3), x, y, TrainConfig(epochs=5))
    path = tmp_path / "model.json"
    save_checkpoint(model, str(path), TrainConfig(epochs=5, seed=11))
    loaded, config = load_checkpoint(str(path))
    assert loaded.layer_sizes == model.layer_sizes
    assert loaded.seed == model.seed
    assert config.seed == 11
    assert all(np.array_equal(a, b) for a, b in zip(loaded.weights, model.weights))
    assert all(np.array_equal(a, b) for a, b in zip(loaded.biases, model.biases))
    # byte-for-byte equality of probabilities follows
    probs_a = forward(model, x)
    probs_b = forward(loaded, x)
    assert probs_a.tobytes() == probs_b.tobytes()


def test_checkpoint_document_shape():
    model = init_model((3, 2), seed=0)
    doc = model_to_checkpoint(model)
    assert doc["version"] == 1
    assert doc["layer_sizes"] == [3, 2]
    assert isinstance(doc["weights"][0], str)


def test_accuracy_known_case():
    model = init_model((2, 2), seed=0)
    model.weights[0] = np.asarray([[5.0, -5.0], [-5.0, 5.0]])
    model.biases[0] = np.zeros(2)
    x = np.asarray([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    assert accuracy(model, x, np.asarray([0, 1, 0, 0])) == 0.75
