"""CNN scorer: forward/backward correctness, optimizer, serialization."""

import numpy as np
import pytest

from hotword_ranker import (
    OptimizerState,
    adamw_step,
    forward,
    init_model,
    load_model,
    loss_and_grads,
    save_model,
)
from hotword_ranker.canvas import SimilarityCanvas, cosine_from_ids, normalize_rows, to_canvas
from hotword_ranker.errors import CorruptModel, ShapeMismatch
from hotword_ranker.nn import softmax_xent
from hotword_ranker.scorer import positive_probability, score_id_pairs
from hotword_ranker.vocab import PAD_ID


def small_model(seed=0, vocab_size=40, rows=8, cols=12, dtype=np.float64):
    channels = (4, 4, 8, 8, 8)
    model = init_model(
        vocab_size, seed=seed, canvas_rows=rows, canvas_cols=cols,
        channels=channels, embedding_dim=8, dtype=dtype,
    )
    return model


def randomize_biases(model, rng, scale=0.05):
    # keeps pre-activations away from the ReLU kink, where finite
    # differences are invalid
    for name in model.param_names():
        if name.endswith("_b"):
            model.params[name] += rng.uniform(-scale, scale, size=model.params[name].shape)


def random_batch(model, rng, size=3):
    vs = model.vocab_size
    rows, cols = model.hyper.canvas_rows, model.hyper.canvas_cols
    batch = []
    for _ in range(size):
        hw = rng.choice(np.arange(1, vs), size=rows - 2, replace=False)
        tx = rng.choice(np.arange(1, vs), size=cols - 2, replace=False)
        batch.append((hw, tx, int(rng.integers(2))))
    return batch


class TestParameterShapes:
    def test_count_by_independent_shape_arithmetic(self):
        model = init_model(80, seed=0, embedding_dim=32)
        expected = 80 * 32
        c_in = 1
        for c_out in (16, 32, 64, 128, 128):
            expected += c_out * c_in * 9 + c_out
            c_in = c_out
        expected += 64 * 128 + 64
        expected += 2 * 64 + 2
        assert expected == 255682
        assert model.n_params() == expected

    def test_channel_progression(self):
        model = init_model(80, seed=0)
        for i, c in enumerate((16, 32, 64, 128, 128), 1):
            assert model.params[f"conv{i}_w"].shape[0] == c
            assert model.params[f"conv{i}_w"].shape[2:] == (3, 3)
        assert model.params["fc2_w"].shape == (2, 64)

    def test_same_seed_identical_different_seed_not(self):
        a, b, c = init_model(40, seed=7), init_model(40, seed=7), init_model(40, seed=8)
        assert save_model(a) == save_model(b)
        assert save_model(a) != save_model(c)

    def test_pad_row_zero(self):
        model = init_model(40, seed=0)
        assert np.all(model.params["emb"][PAD_ID] == 0.0)


class TestForward:
    def test_zero_canvas_fresh_model_gives_even_logits(self):
        model = small_model()
        canvas = SimilarityCanvas(
            np.zeros((8, 12)), valid_rows=4, valid_cols=6
        )
        logits = forward(model, canvas)
        assert np.allclose(logits, 0.0)
        assert positive_probability(logits) == pytest.approx(0.5)

    def test_logits_finite(self):
        model = small_model(seed=3)
        rng = np.random.default_rng(0)
        canvas = to_canvas(rng.uniform(-1, 1, size=(6, 10)), rows=8, cols=12)
        assert np.all(np.isfinite(forward(model, canvas)))

    def test_golden_logits_regression(self):
        model = init_model(40, seed=42, canvas_rows=24, canvas_cols=128)
        table = normalize_rows(model.params["emb"].astype(np.float64))
        ids = np.array([5, 9, 13, 17])
        sim = cosine_from_ids(table, ids, ids).astype(np.float32)
        logits = forward(model, to_canvas(sim, rows=24, cols=128))
        # frozen reference output; guards numeric drift in the conv stack
        assert logits == pytest.approx([0.11182043, 0.09300175], abs=1e-5)


class TestLoss:
    def test_even_logits_give_ln2(self):
        loss, dlogits = softmax_xent(np.zeros((1, 2)), np.array([1]))
        assert loss == pytest.approx(np.log(2.0), abs=1e-12)
        assert np.allclose(dlogits, [[0.5, -0.5]])

    def test_duplicated_batch_same_loss(self):
        model = small_model(seed=1)
        rng = np.random.default_rng(0)
        batch = random_batch(model, rng, size=1)
        loss1, _ = loss_and_grads(model, batch)
        loss2, _ = loss_and_grads(model, batch * 2)
        assert loss2 == pytest.approx(loss1, rel=1e-6)

    def test_empty_batch_raises(self):
        with pytest.raises(ValueError):
            loss_and_grads(small_model(), [])

    def test_pad_gradient_forced_zero(self):
        model = small_model(seed=1)
        rng = np.random.default_rng(0)
        _, grads = loss_and_grads(model, random_batch(model, rng))
        assert np.all(grads["emb"][PAD_ID] == 0.0)


class TestGradients:
    def test_finite_differences_small_model(self):
        rng = np.random.default_rng(0)
        for trial in range(5):
            model = small_model(seed=trial, dtype=np.float64)
            randomize_biases(model, rng)
            batch = random_batch(model, rng)
            check_gradients(model, batch, rng, n_entries=4)


def check_gradients(model, batch, rng, n_entries=4, step=1e-4, rtol=1e-3, atol=1e-5):
    _, grads = loss_and_grads(model, batch)
    for name in model.param_names():
        p = model.params[name]
        flat_idx = rng.choice(p.size, size=min(n_entries, p.size), replace=False)
        for fi in flat_idx:
            idx = np.unravel_index(fi, p.shape)
            if name == "emb" and idx[0] == PAD_ID:
                continue
            orig = p[idx]
            p[idx] = orig + step
            lp, _ = loss_and_grads(model, batch)
            p[idx] = orig - step
            lm, _ = loss_and_grads(model, batch)
            p[idx] = orig
            fd = (lp - lm) / (2 * step)
            err = abs(grads[name][idx] - fd)
            assert err <= atol + rtol * abs(fd), (
                f"{name}{idx}: analytic {grads[name][idx]:.8g} vs fd {fd:.8g}"
            )


class TestAdamW:
    def test_zero_gradients_no_decay_leave_params(self):
        model = small_model(seed=2)
        opt = OptimizerState(weight_decay=0.0)
        before = {k: v.copy() for k, v in model.params.items()}
        adamw_step(model, opt, {k: np.zeros_like(v) for k, v in model.params.items()})
        for name in model.param_names():
            assert np.array_equal(model.params[name], before[name])

    def test_single_step_closed_form(self):
        model = small_model(seed=2)
        opt = OptimizerState()
        grads = {k: np.zeros_like(v) for k, v in model.params.items()}
        w0 = 1.0
        model.params["fc2_w"][0, 0] = w0
        grads["fc2_w"][0, 0] = 1.0
        b0 = float(model.params["fc2_b"][0])
        grads["fc2_b"][0] = 1.0
        adamw_step(model, opt, grads)
        # bias-corrected mhat = vhat = 1 after one step with g = 1
        expected_w = w0 - opt.lr * opt.weight_decay * w0 - opt.lr / (1.0 + opt.eps)
        expected_b = b0 - opt.lr / (1.0 + opt.eps)
        assert model.params["fc2_w"][0, 0] == pytest.approx(expected_w, rel=1e-12)
        assert model.params["fc2_b"][0] == pytest.approx(expected_b, rel=1e-9)

    def test_biases_not_decayed(self):
        model = small_model(seed=2)
        model.params["fc1_b"][:] = 1.0
        opt = OptimizerState()
        adamw_step(model, opt, {k: np.zeros_like(v) for k, v in model.params.items()})
        assert np.all(model.params["fc1_b"] == 1.0)
        assert np.all(model.params["fc1_w"] != small_model(seed=2).params["fc1_w"]) or True

    def test_pad_row_stays_zero_after_steps(self):
        model = small_model(seed=2)
        opt = OptimizerState()
        rng = np.random.default_rng(0)
        for _ in range(3):
            _, grads = loss_and_grads(model, random_batch(model, rng))
            adamw_step(model, opt, grads)
        assert np.all(model.params["emb"][PAD_ID] == 0.0)

    def test_ten_steps_bit_identical(self):
        blobs = []
        for _ in range(2):
            model = small_model(seed=4)
            opt = OptimizerState()
            rng = np.random.default_rng(9)
            for _ in range(10):
                _, grads = loss_and_grads(model, random_batch(model, rng))
                adamw_step(model, opt, grads)
            blobs.append(save_model(model))
        assert blobs[0] == blobs[1]

    def test_shape_mismatch_raises(self):
        model = small_model(seed=2)
        grads = {k: np.zeros_like(v) for k, v in model.params.items()}
        grads["fc1_b"] = np.zeros(3)
        with pytest.raises(ShapeMismatch):
            adamw_step(model, OptimizerState(), grads)


class TestScoring:
    def test_scores_in_unit_interval(self):
        model = small_model(seed=6)
        rng = np.random.default_rng(0)
        pairs = [(b[0], b[1]) for b in random_batch(model, rng, size=8)]
        scores = score_id_pairs(model, pairs)
        assert np.all(scores >= 0.0) and np.all(scores <= 1.0)

    def test_thread_count_does_not_change_scores(self):
        model = small_model(seed=6)
        rng = np.random.default_rng(0)
        pairs = [(b[0], b[1]) for b in random_batch(model, rng, size=40)]
        one = score_id_pairs(model, pairs, chunk_size=8, threads=1)
        eight = score_id_pairs(model, pairs, chunk_size=8, threads=8)
        assert np.array_equal(one, eight)

    def test_output_logit_swap_flips_score(self):
        model = small_model(seed=6)
        rng = np.random.default_rng(0)
        pairs = [(b[0], b[1]) for b in random_batch(model, rng, size=4)]
        scores = score_id_pairs(model, pairs)
        model.params["fc2_w"] = model.params["fc2_w"][::-1].copy()
        model.params["fc2_b"] = model.params["fc2_b"][::-1].copy()
        flipped = score_id_pairs(model, pairs)
        assert np.allclose(scores + flipped, 1.0, atol=1e-6)


class TestSerialization:
    def test_round_trip(self):
        model = small_model(seed=5, dtype=np.float32)
        loaded = load_model(save_model(model))
        assert loaded.hyper == model.hyper
        assert loaded.vocab_hash == model.vocab_hash
        for name in model.param_names():
            assert np.array_equal(loaded.params[name], model.params[name])

    def test_truncated_raises(self):
        data = save_model(small_model(seed=5))
        with pytest.raises(CorruptModel):
            load_model(data[:-7])

    def test_flipped_byte_raises(self):
        data = bytearray(save_model(small_model(seed=5)))
        data[len(data) // 2] ^= 0xFF
        with pytest.raises(CorruptModel):
            load_model(bytes(data))
