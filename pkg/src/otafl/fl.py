"""Federated SGD with a small dense network and pluggable uplink aggregation.

A round broadcasts the global weights, lets every device compute one
mini-batch gradient on its shard, aggregates those gradients through the
chosen uplink and applies ``w <- w - lr * g_hat``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .aggregation import LinkConfig, aggregate, true_square_error
from .channel import place_ues

__all__ = [
    "Mlp",
    "make_blobs",
    "load_dataset",
    "shard_dataset",
    "local_gradient",
    "evaluate",
    "true_square_error",
    "FLState",
    "RoundMetrics",
    "init_state",
    "run_round",
]


@dataclass(frozen=True)
class Mlp:
    """One tanh hidden layer followed by a softmax output.

    Weights are a flat vector laid out as ``W1 (d_in x hidden), b1, W2
    (hidden x classes), b2``.
    """

    d_in: int
    hidden: int
    classes: int = 2

    @property
    def num_params(self):
        return self.d_in * self.hidden + self.hidden + self.hidden * self.classes + self.classes

    def unpack(self, w):
        d, h, c = self.d_in, self.hidden, self.classes
        i = 0
        w1 = w[i:i + d * h].reshape(d, h)
        i += d * h
        b1 = w[i:i + h]
        i += h
        w2 = w[i:i + h * c].reshape(h, c)
        i += h * c
        return w1, b1, w2, w[i:i + c]

    def init(self, rng):
        w = np.zeros(self.num_params)
        w1, _, w2, _ = self.unpack(w)
        w1[:] = rng.standard_normal(w1.shape) / np.sqrt(self.d_in)
        w2[:] = rng.standard_normal(w2.shape) / np.sqrt(self.hidden)
        return w

    def logits(self, w, x):
        w1, b1, w2, b2 = self.unpack(w)
        return np.tanh(x @ w1 + b1) @ w2 + b2

    def loss(self, w, x, y):
        z = self.logits(w, x)
        z = z - z.max(axis=1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        return float(-logp[np.arange(len(y)), y].mean())

    def gradient(self, w, x, y):
        """Gradient of the mean cross-entropy over the batch ``(x, y)``."""
        w1, b1, w2, b2 = self.unpack(w)
        a = np.tanh(x @ w1 + b1)
        z = a @ w2 + b2
        z = z - z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(len(y)), y] -= 1.0
        dz = p / len(y)
        da = (dz @ w2.T) * (1.0 - a**2)
        return np.concatenate([(x.T @ da).ravel(), da.sum(axis=0), (a.T @ dz).ravel(), dz.sum(axis=0)])


def make_blobs(n, d, rng, separation=1.0, classes=2):
    """Gaussian blobs with unit-variance noise around random class centres.

    Centres are drawn at distance ``separation`` from the origin in random
    directions.
    """
    centres = rng.standard_normal((classes, d))
    centres *= separation / np.linalg.norm(centres, axis=1, keepdims=True)
    y = rng.integers(0, classes, size=n)
    x = centres[y] + rng.standard_normal((n, d))
    return x, y


def load_dataset(path, delimiter=","):
    """Read a delimited text file whose last column is an integer label."""
    data = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    if data.shape[0] == 0 or data.shape[1] < 2:
        raise ValueError(f"{path}: need at least one feature column and a label column")
    return data[:, :-1], data[:, -1].astype(int)


def shard_dataset(x, y, num_shards, rng, label_skew=False):
    """Split into ``num_shards`` equal shards (remainder dropped).

    Shards are i.i.d. by default; ``label_skew=True`` sorts by label before
    splitting so each shard sees few classes.
    """
    if num_shards < 1:
        raise ValueError(f"need at least one shard, got {num_shards}")
    size = len(y) // num_shards
    if size == 0:
        raise ValueError(f"{len(y)} samples cannot fill {num_shards} shards")
    idx = rng.permutation(len(y))
    if label_skew:
        idx = idx[np.argsort(y[idx], kind="stable")]
    return [(x[idx[i * size:(i + 1) * size]], y[idx[i * size:(i + 1) * size]]) for i in range(num_shards)]


def batch_indices(shard_size, batch_size, rng):
    if shard_size == 0:
        raise ValueError("shard is empty")
    if not 1 <= batch_size <= shard_size:
        raise ValueError(f"batch size {batch_size} outside [1, {shard_size}]")
    return rng.choice(shard_size, size=batch_size, replace=False)


def local_gradient(model, w, shard, batch_size, rng):
    """Mini-batch gradient of the local loss at the current global weights."""
    x, y = shard
    idx = batch_indices(len(y), batch_size, rng)
    return model.gradient(w, x[idx], y[idx])


def evaluate(model, w, x, y):
    """Fraction of samples whose argmax prediction matches the label."""
    if len(y) == 0:
        raise ValueError("test set is empty")
    return float(np.mean(np.argmax(model.logits(w, x), axis=1) == y))


@dataclass
class FLState:
    model: Mlp
    weights: np.ndarray
    shards: list
    test_set: tuple
    positions: np.ndarray
    link: LinkConfig = field(default_factory=LinkConfig)
    lr: float = 1.0
    batch_size: int = 32
    seed: int = 0
    round: int = 0


@dataclass
class RoundMetrics:
    round: int
    scheme: str
    clip: bool
    papr_mean_db: float
    papr_max_db: float
    papr_unclipped_mean_db: float
    mse_analytic: float
    tse: float
    accuracy: float
    loss: float
    icf_iters_mean: float
    icf_converged_frac: float
    oob_final_dbm: float
    peak_excess_db: float
    alpha_mean: float
    power_mean_mw: float
    power_max_mw: float


def init_state(model, x, y, x_test, y_test, num_devices, seed, link=None, radius=100.0,
               lr=1.0, batch_size=32, label_skew=False):
    """Shard the data, place the devices and draw initial weights, all from ``seed``."""
    shards = shard_dataset(x, y, num_devices, seeding.stream(seed, seeding.DATA), label_skew)
    positions = place_ues(num_devices, radius, seeding.stream(seed, seeding.PLACEMENT))
    w = model.init(seeding.stream(seed, seeding.INIT))
    return FLState(model, w, shards, (x_test, y_test), positions, link or LinkConfig(),
                   lr, batch_size, seed)


def local_gradients(state):
    """Every device's mini-batch gradient for the current round, shape (K, N)."""
    t = state.round
    return np.array([
        local_gradient(state.model, state.weights, shard, state.batch_size,
                       seeding.stream(state.seed, t, i, seeding.BATCH))
        for i, shard in enumerate(state.shards)
    ])


def run_round(state, scheme, clip):
    """Run one communication round in place and return its metrics."""
    grads = local_gradients(state)
    agg = aggregate(grads, scheme, clip, state.link, state.positions, state.seed, state.round)
    state.weights = state.weights - state.lr * agg.recovered
    x_test, y_test = state.test_set
    powers = agg.powers_mw if agg.powers_mw.size else np.zeros(1)
    metrics = RoundMetrics(
        round=state.round,
        scheme=scheme,
        clip=bool(clip),
        papr_mean_db=agg.papr_mean_db,
        papr_max_db=agg.papr_max_db,
        papr_unclipped_mean_db=agg.papr_unclipped_mean_db,
        mse_analytic=agg.mse_analytic,
        tse=agg.tse,
        accuracy=evaluate(state.model, state.weights, x_test, y_test),
        loss=state.model.loss(state.weights, x_test, y_test),
        icf_iters_mean=agg.icf_iters_mean,
        icf_converged_frac=agg.icf_converged_frac,
        oob_final_dbm=agg.oob_final_dbm,
        peak_excess_db=agg.peak_excess_db,
        alpha_mean=agg.alpha_mean,
        power_mean_mw=float(powers.mean()),
        power_max_mw=float(powers.max()),
    )
    state.round += 1
    return metrics
