import math

import numpy as np
import pytest

from walkre.config import TrainConfig, preset
from walkre.dataset import EntityMention, GoldRelation, Sentence, build_vocab
from walkre.gradcheck import check_gradients
from walkre.model import WalkModel, l2_penalty
from walkre.evaluation import gold_decisions, micro_prf
from walkre.numerics import AdamState, DivergenceError, Tensor, adam_step, backward
from walkre.params import ModelParams
from walkre.synthetic import generate_synthetic, load_generator_config
from walkre.training import load_checkpoint, save_checkpoint, train

ACE = ["ART", "GEN-AFF", "ORG-AFF", "PART-WHOLE", "PER-SOC", "PHYS"]


def small_config(**changes):
    base = dict(n_w=6, n_e=6, n_t=3, n_p=3, n_s=5, walk_length=2, max_epochs=3, patience=3, batch_size=2,
                input_dropout=0.0, output_dropout=0.0)
    base.update(changes)
    return TrainConfig(**base)


@pytest.fixture(scope="module")
def corpus():
    gen = load_generator_config("two_hop")
    return generate_synthetic(gen, 8, seed=5), generate_synthetic(gen, 4, seed=6)


def test_uniform_predictions_cost_ln13(example_sentence):
    vocab = build_vocab([example_sentence], relation_types=ACE)
    model = WalkModel(small_config(), vocab)
    model.params["cls.w_r"].data[...] = 0.0
    loss = model.data_loss(model.prepare([example_sentence])).item()
    assert vocab.n_labels == 13
    assert loss == pytest.approx(math.log(13), abs=1e-12)


def test_confident_gold_costs_nothing():
    s = Sentence(["a", "b"], [EntityMention("A", 0, 1, "X"), EntityMention("B", 1, 2, "X")])
    model = WalkModel(small_config(), build_vocab([s]))
    model.params["cls.w_r"].data[...] = 0.0
    model.params["cls.b_r"].data[0] = 800.0
    assert model.data_loss(model.prepare([s])).item() == 0.0


def test_batch_loss_matches_hand_sum(corpus):
    train_c, _ = corpus
    model = WalkModel(small_config(), build_vocab(train_c))
    prepared = model.prepare(train_c[:2])
    total, count = 0.0, 0
    for p, probs in zip(prepared, model.predict_probs(prepared)):
        for row, gold in zip(probs, p.labels):
            total -= math.log(row[gold])
            count += 1
    assert model.data_loss(prepared).item() == pytest.approx(total / count, rel=1e-12)


def test_l2_penalty_cases():
    params = ModelParams()
    a = params.add("a", np.array([[1.0, -2.0]]), bias=False)
    params.add("b", np.array([3.0]), bias=False)
    params.add("bias", np.array([100.0]), bias=True)
    assert l2_penalty(params, 0.5).item() == pytest.approx(0.5 * (1 + 4 + 9))
    a.data[...] = 0.0
    params["b"].data[...] = 0.0
    assert l2_penalty(params, 0.5).item() == 0.0


def test_parameters_need_a_bias_flag():
    with pytest.raises(TypeError):
        ModelParams().add("w", np.zeros(2))


def test_l2_gradient_is_twice_coefficient_times_param():
    params = ModelParams()
    rng = np.random.default_rng(0)
    w = params.add("w", rng.normal(size=(3, 2)), bias=False)
    b = params.add("b", rng.normal(size=2), bias=True)
    backward(l2_penalty(params, 0.3))
    np.testing.assert_allclose(w.grad, 0.6 * w.data, rtol=1e-14)
    assert b.grad is None or not b.grad.any()
    assert check_gradients(params, lambda: l2_penalty(params, 0.3), names=["w"]).max_error < 1e-8


def test_training_is_deterministic(corpus, tmp_path):
    train_c, dev_c = corpus
    cfg = small_config(input_dropout=0.2, output_dropout=0.3)
    a = train(train_c, dev_c, cfg)
    b = train(train_c, dev_c, cfg)
    assert a.losses == b.losses
    save_checkpoint(a.model, tmp_path / "a.ckpt")
    save_checkpoint(b.model, tmp_path / "b.ckpt")
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()


def test_zero_learning_rate_keeps_parameters(corpus):
    train_c, dev_c = corpus
    cfg = small_config(lr=0.0)
    before = WalkModel(cfg, build_vocab(train_c)).params.snapshot()
    result = train(train_c, dev_c, cfg, vocab=build_vocab(train_c))
    for k, v in result.model.params.snapshot().items():
        np.testing.assert_array_equal(v, before[k])


def test_one_epoch_average_is_the_epoch_parameters(corpus):
    train_c, dev_c = corpus
    cfg = small_config(max_epochs=1)
    seen = {}
    model = WalkModel(cfg, build_vocab(train_c))
    result = train(train_c, dev_c, cfg, model=model, on_epoch=lambda r: seen.update(model.params.snapshot()))
    for k, v in result.model.params.snapshot().items():
        np.testing.assert_array_equal(v, seen[k])


def test_overfit_loss_strictly_decreases():
    s = Sentence(
        "anna met boris in paris".split(),
        [EntityMention("A", 0, 1, "PER"), EntityMention("B", 2, 3, "PER"), EntityMention("C", 4, 5, "GPE")],
        [GoldRelation("A", "B", "PER-SOC"), GoldRelation("B", "C", "PHYS")],
    )
    cfg = small_config(lr=1e-3, walk_length=4)
    model = WalkModel(cfg, build_vocab([s]))
    batch = model.prepare([s])
    trainable = [t for _, t in model.params.trainable()]
    state = AdamState(lr=cfg.lr)
    losses = []
    for _ in range(6):
        model.params.zero_grad()
        loss = model.loss(batch)
        losses.append(loss.item())
        backward(loss)
        adam_step(trainable, [t.grad for t in trainable], state)
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_early_stopping_returns_best_dev_score(corpus):
    train_c, dev_c = corpus
    cfg = small_config(max_epochs=8, patience=2, lr=0.01)
    result = train(train_c, dev_c, cfg)
    best = max(r.f1 for r in result.log)
    assert result.best_f1 == best
    assert result.log[result.best_epoch - 1].f1 == best
    assert len(result.log) <= result.best_epoch + cfg.patience
    assert micro_prf(gold_decisions(dev_c), set(result.model.predict(dev_c)))[2] == best


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_is_reported(corpus):
    train_c, dev_c = corpus
    model = WalkModel(small_config(), build_vocab(train_c))
    model.params["cls.w_r"].data[0, 0] = np.inf
    with pytest.raises(DivergenceError):
        train(train_c, dev_c, small_config(), model=model)


def test_checkpoint_round_trip(corpus, tmp_path):
    train_c, dev_c = corpus
    result = train(train_c, dev_c, small_config(max_epochs=2))
    path = tmp_path / "m.ckpt"
    save_checkpoint(result.model, path)
    loaded = load_checkpoint(path)
    assert loaded.config == result.model.config
    assert loaded.vocab.words == result.model.vocab.words
    a = result.model.predict_probs(result.model.prepare(dev_c))
    b = loaded.predict_probs(loaded.prepare(dev_c))
    for x, y in zip(a, b):
        assert (x is None and y is None) or np.array_equal(x, y)
    assert loaded.predict(dev_c) == result.model.predict(dev_c)


def test_corrupt_checkpoints_rejected(corpus, tmp_path):
    train_c, _ = corpus
    model = WalkModel(small_config(), build_vocab(train_c))
    path = tmp_path / "m.ckpt"
    save_checkpoint(model, path)
    raw = path.read_bytes()
    (tmp_path / "short").write_bytes(raw[:-8])
    (tmp_path / "magic").write_bytes(b"nope\n" + raw)
    (tmp_path / "long").write_bytes(raw + b"\0")
    for name in ("short", "magic", "long"):
        with pytest.raises(ValueError):
            load_checkpoint(tmp_path / name)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(input_dropout=1.0)
    with pytest.raises(ValueError):
        TrainConfig(walk_length=3)
    with pytest.raises(ValueError):
        TrainConfig.from_dict({"learning_rate": 0.1})


def test_full_size_dimensions():
    vocab = build_vocab([Sentence(["a"])], relation_types=ACE)
    model = WalkModel(preset("l4", n_w=10), vocab)
    d = model.dims
    assert (d.n_e, d.n_t, d.n_p, d.n_d, d.n_m, d.n_s, d.n_b, d.n_r) == (100, 20, 25, 170, 460, 100, 100, 13)


def test_no_pairs_gives_zero_loss():
    s = Sentence(["a"], [EntityMention("A", 0, 1, "X")])
    model = WalkModel(small_config(), build_vocab([s]))
    assert model.data_loss(model.prepare([s])).item() == 0.0
    assert isinstance(model.data_loss(model.prepare([s])), Tensor)
