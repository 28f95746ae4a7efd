"""Multi-carrier (OFDM) analog gradient aggregation with clipping and filtering.

Gradient entry ``n = l*M + m`` rides on subcarrier ``m`` of OFDM symbol
``l``.  Each device pre-compensates its channel phase, so subcarrier ``m``
carries ``g[n] * sqrt(p_{k,m}) * exp(-j phi_{k,m})``.  Peak limiting works on
the ``l_os``-times oversampled waveform; after iterative clipping and
filtering the in-band bins of the final spectrum are what reaches the
channel.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import (
    OOB_FLOOR_DBM,
    circ_conv,
    clip_amplitude,
    dft_paper,
    idft_paper,
    oob_power_dbm,
    oversample_pad,
    papr,
    papr_db_or_nan,
    rect_filter,
)

__all__ = [
    "IcfConfig",
    "IcfReport",
    "num_symbols",
    "to_symbols",
    "from_symbols",
    "precoders",
    "modulate_symbol",
    "icf",
    "transmit_through_channel",
    "demodulate_recover",
    "analytic_mse_subcarrier",
    "papr_ofdm",
]


@dataclass(frozen=True)
class IcfConfig:
    a_max: float = np.inf
    oob_threshold_dbm: float = -10.0
    max_iters: int = 16
    l_os: int = 4

    def __post_init__(self):
        if self.a_max < 0:
            raise ValueError(f"a_max must be nonnegative, got {self.a_max}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.l_os < 1:
            raise ValueError(f"l_os must be >= 1, got {self.l_os}")


@dataclass(frozen=True)
class IcfReport:
    """Outcome of :func:`icf`.

    Fields are scalars for a single symbol and arrays (one entry per row)
    when a stack of symbols is processed.  ``initial_oob_dbm`` and
    ``final_oob_dbm`` are measured on the clipped signal of the first and
    last iteration.  ``spectrum`` is the final filtered spectrum (exact zeros
    out of band); the returned signal is its synthesis.
    """

    iterations_used: object
    initial_oob_dbm: object
    final_oob_dbm: object
    converged: object
    papr_before_db: object
    papr_after_db: object
    residual_peak_excess_db: object
    spectrum: np.ndarray


def num_symbols(n, m):
    return -(-n // m)


def to_symbols(values, m):
    """Zero-pad the last axis to a multiple of ``m`` and split it into symbols.

    Shape ``(..., N)`` becomes ``(..., L, m)`` with ``L = ceil(N / m)``.
    """
    values = np.asarray(values)
    n = values.shape[-1]
    size = num_symbols(n, m) * m
    padded = np.zeros(values.shape[:-1] + (size,), dtype=values.dtype)
    padded[..., :n] = values
    return padded.reshape(values.shape[:-1] + (size // m, m))


def from_symbols(symbols, n):
    symbols = np.asarray(symbols)
    return symbols.reshape(symbols.shape[:-2] + (-1,))[..., :n]


def precoders(powers, freq_response):
    """``sqrt(p) * exp(-j phase(H))``: power scaling with channel phase removed."""
    return np.sqrt(powers) * np.exp(-1j * np.angle(freq_response))


def modulate_symbol(g, b, l_os=1):
    """Oversampled time signal of one (or a stack of) OFDM symbol(s)."""
    return idft_paper(oversample_pad(np.asarray(g) * np.asarray(b), l_os))


def icf(signal, cfg):
    """Iterative clipping and filtering of oversampled OFDM symbols.

    Each pass clips, moves to the frequency domain, measures out-of-band
    power of the clipped spectrum, zeroes the out-of-band bins and returns
    to the time domain.  A symbol stops once its out-of-band power is at or
    below ``cfg.oob_threshold_dbm`` or after ``cfg.max_iters`` passes.  The
    returned signal is always the filtered one, so its spectrum has no
    out-of-band energy; peak regrowth above ``a_max`` is reported, not
    removed.

    Parameters
    ----------
    signal : array_like, shape (..., l_os * M)
    cfg : IcfConfig

    Returns
    -------
    out : ndarray
        Same shape as ``signal``.
    report : IcfReport
    """
    x0 = np.asarray(signal, dtype=complex)
    single = x0.ndim == 1
    x = np.atleast_2d(x0).reshape(-1, x0.shape[-1]).copy()
    length = x.shape[-1]
    if length % cfg.l_os:
        raise ValueError(f"signal length {length} is not a multiple of l_os={cfg.l_os}")
    m = length // cfg.l_os
    rows = x.shape[0]

    iters = np.zeros(rows, dtype=int)
    first = np.full(rows, OOB_FLOOR_DBM)
    last = np.full(rows, OOB_FLOOR_DBM)
    converged = np.zeros(rows, dtype=bool)
    final = np.zeros_like(x)
    active = np.arange(rows)
    for j in range(1, cfg.max_iters + 1):
        spec = dft_paper(clip_amplitude(x[active], cfg.a_max))
        oob = np.atleast_1d(oob_power_dbm(spec, m))
        if j == 1:
            first[active] = oob
        last[active] = oob
        iters[active] = j
        final[active] = rect_filter(spec, m)
        x[active] = idft_paper(final[active])
        done = oob <= cfg.oob_threshold_dbm
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break

    before = papr_db_or_nan(np.atleast_2d(x0).reshape(-1, length))
    after = papr_db_or_nan(x)
    peak = np.max(np.abs(x) ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = 10.0 * np.log10(peak / cfg.a_max**2)
    excess = np.where(peak > cfg.a_max**2, excess, 0.0)

    out = x.reshape(x0.shape)
    if single:
        report = IcfReport(int(iters[0]), float(first[0]), float(last[0]), bool(converged[0]),
                           float(before[0]), float(after[0]), float(excess[0]), final[0])
    else:
        shape = x0.shape[:-1]
        report = IcfReport(iters.reshape(shape), first.reshape(shape), last.reshape(shape),
                           converged.reshape(shape), before.reshape(shape), after.reshape(shape),
                           excess.reshape(shape), final.reshape(x0.shape))
    return out, report


def transmit_through_channel(signals, channels, noise_var, rng):
    """Superpose per-device circular convolutions and add ``CN(0, noise_var * M)`` noise.

    ``signals`` has shape (K, ..., M) at Nyquist rate; ``noise_var`` is the
    per-subcarrier variance.
    """
    s = np.asarray(signals, dtype=complex)
    if s.shape[0] != len(channels):
        raise ValueError(f"{len(channels)} channels for {s.shape[0]} transmitted signals")
    m = s.shape[-1]
    y = np.zeros(s.shape[1:], dtype=complex)
    for sk, ch in zip(s, channels):
        y += circ_conv(sk, ch.taps)
    if noise_var > 0:
        scale = np.sqrt(noise_var * m / 2)
        y += scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y


def demodulate_recover(y, alphas, num_devices, stats, real=True):
    """DFT the received symbol(s) and recover per-subcarrier gradient values.

    ``gamma * sqrt(alpha_m) * Y[m] / K + mu``; the real part is kept unless
    ``real=False``.
    """
    spec = dft_paper(y)
    out = stats.gamma * np.sqrt(np.asarray(alphas, dtype=float)) * spec / num_devices + stats.mu
    return out.real if real else out


def analytic_mse_subcarrier(sol, gains, noise_var, stats, num_devices):
    """Expected squared error of one gradient entry carried on one subcarrier."""
    gains = np.abs(np.asarray(gains))
    mis = np.sum((gains * np.sqrt(sol.alpha * sol.powers) - 1.0) ** 2)
    return stats.gamma**2 / num_devices**2 * (mis + sol.alpha * noise_var)


def papr_ofdm(signal):
    return papr(signal)
