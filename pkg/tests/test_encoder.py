import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkre.dataset import EntityMention
from walkre.encoder import (
    LstmParams,
    averaging_matrix,
    blstm_encode,
    blstm_encode_batch,
    entity_average,
    entity_averages,
    init_lstm,
)
from walkre.gradcheck import check_gradients
from walkre.numerics import Tensor, mul, sum as tsum
from walkre.params import ModelParams


def make_lstm(n_in=3, hidden=2, seed=0, scale=None):
    params = ModelParams()
    lstm = init_lstm(params, n_in, hidden, np.random.default_rng(seed))
    if scale:
        rng = np.random.default_rng(seed + 100)
        for _, p in params.items():
            p.data[...] = rng.normal(scale=scale, size=p.shape)
    return params, lstm


def sig(x):
    return 1.0 / (1.0 + np.exp(-x))


def scalar_direction(xs, cell):
    """Plain loops over time, gates and units."""
    w_ih, w_hh, b = cell.w_ih.data, cell.w_hh.data, cell.b.data
    n_h = w_hh.shape[0]
    h = [0.0] * n_h
    c = [0.0] * n_h
    out = []
    for x in xs:
        z = []
        for g in range(4 * n_h):
            acc = b[g]
            for a in range(len(x)):
                acc += x[a] * w_ih[a, g]
            for a in range(n_h):
                acc += h[a] * w_hh[a, g]
            z.append(acc)
        new_h, new_c = [], []
        for u in range(n_h):
            i = sig(z[u])
            f = sig(z[n_h + u])
            o = sig(z[2 * n_h + u])
            gg = np.tanh(z[3 * n_h + u])
            cu = f * c[u] + i * gg
            new_c.append(cu)
            new_h.append(o * np.tanh(cu))
        h, c = new_h, new_c
        out.append(list(h))
    return np.array(out)


def scalar_blstm(x, lstm: LstmParams):
    fw = scalar_direction(list(x), lstm.forward)
    bw = scalar_direction(list(x[::-1]), lstm.backward)[::-1]
    return np.concatenate([fw, bw], axis=1)


def test_init_forget_bias():
    _, lstm = make_lstm(hidden=3)
    for cell in (lstm.forward, lstm.backward):
        np.testing.assert_array_equal(cell.b.data, [0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0])
    assert lstm.output_size == 6


def test_zero_weights_give_zero_states():
    params, lstm = make_lstm()
    for _, p in params.items():
        p.data[...] = 0.0
    out = blstm_encode(Tensor(np.random.default_rng(0).normal(size=(5, 3))), lstm)
    np.testing.assert_array_equal(out.data, np.zeros((5, 4)))


def test_single_token_directions_agree_with_shared_weights():
    params, lstm = make_lstm(scale=0.5)
    lstm.backward.w_ih.data[...] = lstm.forward.w_ih.data
    lstm.backward.w_hh.data[...] = lstm.forward.w_hh.data
    lstm.backward.b.data[...] = lstm.forward.b.data
    out = blstm_encode(Tensor(np.array([[0.3, -0.2, 0.9]])), lstm).data
    np.testing.assert_array_equal(out[0, :2], out[0, 2:])


def test_empty_sequence_rejected():
    _, lstm = make_lstm()
    with pytest.raises(ValueError):
        blstm_encode(Tensor(np.zeros((0, 3))), lstm)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_matches_scalar_oracle(steps, seed):
    _, lstm = make_lstm(scale=0.7, seed=seed % 1000)
    x = np.random.default_rng(seed).normal(size=(steps, 3))
    np.testing.assert_allclose(blstm_encode(Tensor(x), lstm).data, scalar_blstm(x, lstm), rtol=0, atol=1e-12)


def test_padded_batch_equals_individual_runs():
    _, lstm = make_lstm(scale=0.6)
    rng = np.random.default_rng(3)
    lengths = [4, 1, 6]
    batch = np.zeros((3, 6, 3))
    seqs = [rng.normal(size=(n, 3)) for n in lengths]
    for b, s in enumerate(seqs):
        batch[b, : len(s)] = s
    out = blstm_encode_batch(Tensor(batch), lengths, lstm).data
    for b, s in enumerate(seqs):
        np.testing.assert_allclose(out[b, : len(s)], blstm_encode(Tensor(s), lstm).data, atol=1e-14)


def test_encoder_output_ignores_pair_choice():
    # encoding happens once per sentence, before any pair is chosen
    _, lstm = make_lstm(scale=0.6)
    x = Tensor(np.random.default_rng(4).normal(size=(5, 3)))
    first = blstm_encode(x, lstm).data
    entity_average(EntityMention("A", 1, 3, "X"), blstm_encode(x, lstm))
    np.testing.assert_array_equal(blstm_encode(x, lstm).data, first)


def test_entity_average():
    enc = Tensor(np.arange(12.0).reshape(4, 3))
    np.testing.assert_allclose(entity_average(EntityMention("A", 1, 3, "X"), enc).data, [4.5, 5.5, 6.5])
    np.testing.assert_array_equal(entity_average(EntityMention("A", 2, 3, "X"), enc).data, [6, 7, 8])
    ents = [EntityMention("A", 0, 4, "X"), EntityMention("B", 3, 4, "X")]
    np.testing.assert_allclose(entity_averages(ents, enc).data, [[4.5, 5.5, 6.5], [9, 10, 11]])
    np.testing.assert_allclose(averaging_matrix(ents, 4).sum(axis=1), 1.0)


def test_blstm_gradients():
    params, lstm = make_lstm(n_in=3, hidden=2, scale=0.5)
    x = Tensor(np.random.default_rng(5).normal(size=(4, 3)), requires_grad=True)
    weights = Tensor(np.random.default_rng(6).normal(size=(4, 4)))
    params.add("input", x.data, bias=False)
    x = params["input"]

    def loss():
        return tsum(mul(blstm_encode(x, lstm), weights))

    report = check_gradients(params, loss)
    assert report.checked == sum(p.size for _, p in params.items())
    assert report.max_error < 1e-6
