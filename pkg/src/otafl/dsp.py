"""Transforms, oversampling, clipping and filtering for OFDM symbols.

Conventions
-----------
The synthesis transform carries no prefactor and the analysis transform
carries ``1/M``::

    s[i] = sum_m G[m] exp(+j 2 pi m i / M)          (idft_paper)
    Y[m] = 1/M sum_i y[i] exp(-j 2 pi m i / M)      (dft_paper)

so a frequency bin holds the amplitude of its subcarrier directly and
time-domain noise of variance ``sigma^2 M`` maps to per-bin variance
``sigma^2``.  Amplitudes are in sqrt(mW): ``|x|^2`` is a power in mW.

All functions act on the last axis, so stacks of symbols can be passed as
2-D arrays.
"""

import numpy as np

__all__ = [
    "OOB_FLOOR_DBM",
    "idft_paper",
    "dft_paper",
    "idft_direct",
    "dft_direct",
    "oversample_pad",
    "clip_amplitude",
    "rect_filter",
    "oob_power_dbm",
    "papr",
    "papr_db",
    "papr_db_or_nan",
    "circ_conv",
]

OOB_FLOOR_DBM = -200.0


def _as_complex(x, what):
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError(f"{what} must be a non-empty sequence")
    return x


def idft_paper(spectrum):
    """Synthesize a time signal from subcarrier amplitudes (no 1/M factor)."""
    spectrum = _as_complex(spectrum, "spectrum")
    return np.fft.ifft(spectrum, axis=-1) * spectrum.shape[-1]


def dft_paper(signal):
    """Analyze a time signal into subcarrier amplitudes (with 1/M factor)."""
    signal = _as_complex(signal, "signal")
    return np.fft.fft(signal, axis=-1) / signal.shape[-1]


def idft_direct(spectrum):
    """O(M^2) reference evaluation of :func:`idft_paper`."""
    spectrum = _as_complex(spectrum, "spectrum")
    m = spectrum.shape[-1]
    k = np.arange(m)
    kernel = np.exp(2j * np.pi * np.outer(k, k) / m)
    return spectrum @ kernel.T


def dft_direct(signal):
    """O(M^2) reference evaluation of :func:`dft_paper`."""
    signal = _as_complex(signal, "signal")
    m = signal.shape[-1]
    k = np.arange(m)
    kernel = np.exp(-2j * np.pi * np.outer(k, k) / m)
    return signal @ kernel.T / m


def oversample_pad(spectrum, l_os):
    """Zero-pad ``M`` in-band bins to ``l_os * M`` bins.

    The synthesized signal then takes ``l_os`` samples per Nyquist
    interval and coincides with the Nyquist-rate signal at every
    ``l_os``-th sample.
    """
    if int(l_os) != l_os or l_os < 1:
        raise ValueError(f"oversampling factor must be a positive integer, got {l_os}")
    spectrum = _as_complex(spectrum, "spectrum")
    m = spectrum.shape[-1]
    out = np.zeros(spectrum.shape[:-1] + (int(l_os) * m,), dtype=complex)
    out[..., :m] = spectrum
    return out


def clip_amplitude(signal, a_max):
    """Hard-limit sample magnitudes to ``a_max`` while keeping the phase.

    ``a_max = np.inf`` disables clipping; ``a_max = 0`` returns zeros.
    Real input stays real.
    """
    if a_max < 0:
        raise ValueError(f"clip level must be nonnegative, got {a_max}")
    x = np.asarray(signal)
    if np.isinf(a_max):
        return x.copy()
    mag = np.abs(x)
    over = mag > a_max
    out = x.copy() if np.iscomplexobj(x) else x.astype(float, copy=True)
    # scale only the offending samples so in-range values pass bit-exactly
    clipped = x[over] * (a_max / mag[over])
    # rounding can land one ulp above a_max; pull back so clipping is idempotent
    high = np.abs(clipped) > a_max
    while np.any(high):
        clipped[high] *= np.nextafter(1.0, 0.0)
        high = np.abs(clipped) > a_max
    out[over] = clipped
    return out


def rect_filter(spectrum, in_band):
    """Keep bins ``[0, in_band)`` and zero the rest."""
    spectrum = _as_complex(spectrum, "spectrum")
    _check_band(in_band, spectrum.shape[-1])
    out = spectrum.copy()
    out[..., in_band:] = 0.0
    return out


def oob_power_dbm(spectrum, in_band, floor_dbm=OOB_FLOOR_DBM):
    """Total power in bins ``[in_band, end)`` in dBm.

    Returns ``floor_dbm`` when there is no out-of-band energy; results
    below the floor are clamped to it.  Works row-wise on 2-D input.
    """
    spectrum = _as_complex(spectrum, "spectrum")
    _check_band(in_band, spectrum.shape[-1])
    p = np.sum(np.abs(spectrum[..., in_band:]) ** 2, axis=-1)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(p)
    db = np.maximum(db, floor_dbm)
    return float(db) if db.ndim == 0 else db


def _check_band(in_band, length):
    if in_band < 1 or in_band > length:
        raise ValueError(f"in-band width {in_band} outside [1, {length}]")


def papr(signal):
    """Peak-to-average power ratio (linear) along the last axis."""
    x = np.asarray(signal)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("signal must be a non-empty sequence")
    power = np.abs(x) ** 2
    mean = power.mean(axis=-1)
    if np.any(mean == 0):
        raise ValueError("PAPR undefined for an all-zero signal")
    ratio = power.max(axis=-1) / mean
    return float(ratio) if ratio.ndim == 0 else ratio


def papr_db(signal):
    return 10.0 * np.log10(papr(signal))


def papr_db_or_nan(signal):
    """Row-wise PAPR in dB, NaN for all-zero rows instead of raising."""
    power = np.abs(np.asarray(signal)) ** 2
    mean = power.mean(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 10.0 * np.log10(power.max(axis=-1) / mean)
    return np.where(mean > 0, out, np.nan)


def circ_conv(signal, taps):
    """Circular convolution ``out[i] = sum_c taps[c] * signal[(i - c) mod M]``."""
    signal = _as_complex(signal, "signal")
    taps = _as_complex(taps, "taps")
    m = signal.shape[-1]
    if taps.shape[-1] > m:
        raise ValueError(f"{taps.shape[-1]} taps exceed signal length {m}")
    out = np.zeros(np.broadcast_shapes(signal.shape[:-1], taps.shape[:-1]) + (m,), dtype=complex)
    for c in range(taps.shape[-1]):
        out += taps[..., c, None] * np.roll(signal, c, axis=-1)
    return out
