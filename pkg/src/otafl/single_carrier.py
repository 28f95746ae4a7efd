"""Single-carrier analog gradient aggregation.

Each device sends its normalized gradient one entry per time slot,
amplitude-scaled by ``sqrt(p_k)`` and hard-limited to the amplifier's peak
amplitude.  The receiver sees the channel-weighted sum plus real Gaussian
noise, rescales by ``sqrt(alpha) / K`` and undoes the normalization.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import clip_amplitude, papr

__all__ = [
    "GAMMA_FLOOR",
    "NormalizationStats",
    "compute_norm_stats",
    "normalize",
    "denormalize",
    "transmit_clipped",
    "superpose_receive",
    "recover",
    "analytic_mse_sc",
    "papr_gradient",
]

GAMMA_FLOOR = 1e-8


@dataclass(frozen=True)
class NormalizationStats:
    """Shared mean and scale applied by every device in a round."""

    mu: float
    gamma: float


def compute_norm_stats(raw_gradients, gamma_floor=GAMMA_FLOOR):
    """Average the per-device means and standard deviations.

    ``raw_gradients`` has shape (K, N).
    """
    g = np.asarray(raw_gradients, dtype=float)
    if g.ndim == 1:
        g = g[None, :]
    if g.ndim != 2 or g.shape[0] == 0 or g.shape[1] == 0:
        raise ValueError("raw gradients must form a non-empty K x N array of equal-length vectors")
    mu_k = g.mean(axis=1)
    # clamp tiny negative round-off before the square root
    gamma_k = np.sqrt(np.maximum((g**2).mean(axis=1) - mu_k**2, 0.0))
    return NormalizationStats(mu=float(mu_k.mean()), gamma=max(float(gamma_k.mean()), gamma_floor))


def normalize(raw, stats):
    return (np.asarray(raw, dtype=float) - stats.mu) / stats.gamma


def denormalize(g, stats):
    return np.asarray(g, dtype=float) * stats.gamma + stats.mu


def transmit_clipped(g, p_in, a_max=np.inf):
    """Scale a normalized gradient by ``sqrt(p_in)`` and clip at ``a_max``.

    ``a_max = np.inf`` turns clipping off.  Accepts a (K, N) stack with a
    length-K power vector.
    """
    g = np.asarray(g, dtype=float)
    p_in = np.asarray(p_in, dtype=float)
    if np.any(p_in < 0):
        raise ValueError("transmit power must be nonnegative")
    amp = np.sqrt(p_in)
    if g.ndim == 2 and amp.ndim == 1:
        amp = amp[:, None]
    return clip_amplitude(amp * g, a_max)


def superpose_receive(signals, gains, noise_var, rng):
    """``y = sum_k h_k x_k + n`` with real noise of variance ``noise_var``."""
    x = np.atleast_2d(np.asarray(signals, dtype=float))
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (x.shape[0],):
        raise ValueError(f"{gains.size} gains for {x.shape[0]} transmitted signals")
    y = gains @ x
    if noise_var > 0:
        y = y + np.sqrt(noise_var) * rng.standard_normal(y.shape)
    return y


def recover(y, alpha, num_devices, stats):
    """Rescale the superposed signal and de-normalize: ``gamma sqrt(alpha) y / K + mu``."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return stats.gamma * np.sqrt(alpha) * np.asarray(y) / num_devices + stats.mu


def analytic_mse_sc(sol, gains, noise_var, stats, n, num_devices):
    """Expected total squared error of the recovered vector (all ``n`` entries)."""
    gains = np.asarray(gains, dtype=float)
    mis = np.sum((gains * np.sqrt(sol.alpha * sol.powers) - 1.0) ** 2)
    return stats.gamma**2 * n / num_devices**2 * (mis + sol.alpha * noise_var)


def papr_gradient(g):
    """PAPR of a gradient vector sent sample-by-sample (linear ratio)."""
    return papr(np.asarray(g, dtype=float))
