"""LSTM sequence classifier with hand-written backpropagation through time.

Parameters live in a flat dict so the optimiser, the gradient check and
the artifact writer can all walk the same keys:

    proj_W (d_in, P), proj_b (P)   optional input projection (no activation)
    W (P + H, 4H), b (4H)          gates, column blocks ordered [i, f, o, g]
    V (H, 2), c (2)                head on the final hidden state

Batches hold zero-padded sequences of unequal length; past a sequence's
end its state is carried through unchanged, so the head always reads the
state after the last real step.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import TrainConfig
from ..errors import DimensionMismatch, DivergenceDetected, EmptySequence, SingleClass
from .rmsprop import init_state, rmsprop_step

N_CLASSES = 2
PARAM_ORDER = ("proj_W", "proj_b", "W", "b", "V", "c")


@dataclass
class LSTMModel:
    params: dict
    input_dim: int
    hidden_size: int = 32
    projected: bool = False
    seed: int = 0
    loss_history: list = field(default_factory=list)

    @property
    def cell_input(self) -> int:
        return self.params["W"].shape[0] - self.hidden_size


def init_lstm(input_dim: int, hidden_size: int = 32, proj_dim: int | None = None,
              seed: int = 0, rng: np.random.Generator | None = None) -> LSTMModel:
    rng = rng if rng is not None else np.random.default_rng(seed)
    H = hidden_size
    bound = 1.0 / np.sqrt(H)
    params = {}
    cell_in = input_dim
    if proj_dim is not None:
        params["proj_W"] = rng.uniform(-bound, bound, (input_dim, proj_dim))
        params["proj_b"] = np.zeros(proj_dim)
        cell_in = proj_dim
    params["W"] = rng.uniform(-bound, bound, (cell_in + H, 4 * H))
    b = np.zeros(4 * H)
    b[H:2 * H] = 1.0
    params["b"] = b
    params["V"] = rng.uniform(-bound, bound, (H, N_CLASSES))
    params["c"] = np.zeros(N_CLASSES)
    return LSTMModel(params, input_dim, H, proj_dim is not None, seed)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def pad_batch(seqs):
    seqs = [np.asarray(s, dtype=np.float64) for s in seqs]
    if any(len(s) == 0 for s in seqs):
        raise EmptySequence("cannot run the LSTM on an empty sequence")
    lengths = np.array([len(s) for s in seqs])
    X = np.zeros((len(seqs), lengths.max(), seqs[0].shape[1]))
    for n, s in enumerate(seqs):
        X[n, :len(s)] = s
    return X, lengths


def _forward(params, H, X, lengths, keep_cache=False):
    B, T, _ = X.shape
    U = X @ params["proj_W"] + params["proj_b"] if "proj_W" in params else X
    P = U.shape[2]
    Wx, Wh = params["W"][:P], params["W"][P:]
    Zx = U @ Wx + params["b"]
    mask = (np.arange(T)[None, :] < lengths[:, None]).astype(np.float64)
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    cache = []
    for t in range(T):
        z = Zx[:, t] + h @ Wh
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        o = _sigmoid(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        m = mask[:, t:t + 1]
        if keep_cache:
            cache.append((h, c, i, f, o, g, tc, m))
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
    logits = h @ params["V"] + params["c"]
    return logits, h, (U, cache)


def _backward(params, H, X, y, probs, h_last, saved):
    """Gradients of the mean cross-entropy over the batch."""
    U, cache = saved
    B = len(y)
    P = U.shape[2]
    Wh = params["W"][P:]
    dlogits = probs.copy()
    dlogits[np.arange(B), y] -= 1.0
    dlogits /= B
    grads = {"V": h_last.T @ dlogits, "c": dlogits.sum(axis=0)}
    dh = dlogits @ params["V"].T
    dc = np.zeros_like(dh)
    dZx = np.zeros(U.shape[:2] + (4 * H,))
    dWh = np.zeros_like(Wh)
    for t in range(len(cache) - 1, -1, -1):
        h_prev, c_prev, i, f, o, g, tc, m = cache[t]
        dh_new = m * dh
        dc_new = m * dc + dh_new * o * (1.0 - tc * tc)
        dz = np.concatenate([
            dc_new * g * i * (1.0 - i),
            dc_new * c_prev * f * (1.0 - f),
            dh_new * tc * o * (1.0 - o),
            dc_new * i * (1.0 - g * g),
        ], axis=1)
        dZx[:, t] = dz
        dWh += h_prev.T @ dz
        dh = dz @ Wh.T + (1.0 - m) * dh
        dc = dc_new * f + (1.0 - m) * dc
    flatU = U.reshape(-1, P)
    flatdZ = dZx.reshape(-1, 4 * H)
    grads["W"] = np.vstack([flatU.T @ flatdZ, dWh])
    grads["b"] = flatdZ.sum(axis=0)
    if "proj_W" in params:
        dU = flatdZ @ params["W"][:P].T
        grads["proj_W"] = X.reshape(-1, X.shape[2]).T @ dU
        grads["proj_b"] = dU.sum(axis=0)
    return grads


def _check_input(m: LSTMModel, X):
    if X.shape[2] != m.input_dim:
        raise DimensionMismatch(f"model expects {m.input_dim}-dim steps, got {X.shape[2]}")


def predict_proba(m: LSTMModel, seqs) -> np.ndarray:
    """Class probabilities ``(n, 2)``; column 1 is the depressed class."""
    X, lengths = pad_batch(seqs)
    _check_input(m, X)
    logits, _, _ = _forward(m.params, m.hidden_size, X, lengths)
    return softmax(logits)


def lstm_forward(m: LSTMModel, seq) -> np.ndarray:
    return predict_proba(m, [seq])[0]


def loss_and_grads(params, H, seqs, y):
    X, lengths = pad_batch(seqs)
    y = np.asarray(y, dtype=int)
    logits, h_last, saved = _forward(params, H, X, lengths, keep_cache=True)
    probs = softmax(logits)
    loss = -np.mean(np.log(np.maximum(probs[np.arange(len(y)), y], 1e-300)))
    return loss, _backward(params, H, X, y, probs, h_last, saved)


def loss_only(params, H, seqs, y) -> float:
    X, lengths = pad_batch(seqs)
    y = np.asarray(y, dtype=int)
    logits, _, _ = _forward(params, H, X, lengths)
    probs = softmax(logits)
    return float(-np.mean(np.log(np.maximum(probs[np.arange(len(y)), y], 1e-300))))


def lstm_train(cfg: TrainConfig, seqs, y, project: bool = False) -> LSTMModel:
    """Mini-batch RMSProp on cross-entropy for ``cfg.epochs`` epochs.

    Initialisation and per-epoch shuffling draw from independent streams
    seeded by ``cfg.seed``; the final-epoch model is returned.
    """
    y = np.asarray(y, dtype=int)
    if len(np.unique(y)) < 2:
        raise SingleClass("LSTM training data contains a single class")
    seqs = [np.asarray(s, dtype=np.float64) for s in seqs]
    init_ss, shuffle_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    model = init_lstm(seqs[0].shape[1], cfg.hidden_size,
                      cfg.proj_dim if project else None, cfg.seed,
                      rng=np.random.default_rng(init_ss))
    shuffle_rng = np.random.default_rng(shuffle_ss)
    state = init_state(model.params)
    n = len(seqs)
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            with np.errstate(all="ignore"):  # finiteness is checked below
                loss, grads = loss_and_grads(model.params, model.hidden_size,
                                             [seqs[i] for i in idx], y[idx])
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise DivergenceDetected(f"non-finite loss/gradient at epoch {epoch}")
            rmsprop_step(model.params, grads, state, cfg.learning_rate, cfg.decay, cfg.epsilon)
            total += loss * len(idx)
        model.loss_history.append(total / n)
    return model
