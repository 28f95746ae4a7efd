"""Device placement and uplink channel draws.

Large-scale gain is free-space path loss; small-scale fading is Rayleigh
with unit mean power.  Single-carrier links use one real gain per device;
OFDM links use a short tapped delay line whose frequency response is
``H = fft(taps, M)``, which makes

    dft_paper(circ_conv(s, taps)) == H * dft_paper(s)

hold exactly.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .dsp import dft_paper

__all__ = [
    "SPEED_OF_LIGHT",
    "D_MIN",
    "ChannelRealization",
    "place_ues",
    "path_gain",
    "draw_flat_channel",
    "draw_multipath",
]

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0
D_MIN = 1.0
DEFAULT_CARRIER_HZ = 2.6e9


@dataclass(frozen=True)
class ChannelRealization:
    """One device's channel for one round (block fading).

    ``flat_gain`` is the amplitude gain seen by single-carrier transmission;
    ``taps`` and ``freq_response`` describe the multipath link.
    """

    flat_gain: float
    taps: np.ndarray
    freq_response: np.ndarray


def place_ues(count, radius, rng):
    """Area-uniform positions on a disk centred at the base station.

    Returns an array of shape (count, 2) in meters.
    """
    if count < 1:
        raise ValueError(f"need at least one device, got {count}")
    if not radius > 0:
        raise ValueError(f"disk radius must be positive, got {radius}")
    r = radius * np.sqrt(rng.uniform(size=count))
    theta = rng.uniform(0.0, 2 * np.pi, size=count)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def path_gain(distance, carrier_hz=DEFAULT_CARRIER_HZ, d_min=D_MIN):
    """Free-space amplitude gain ``c / (4 pi d f)``; distances below ``d_min`` are clamped."""
    if not carrier_hz > 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_hz}")
    d = np.asarray(distance, dtype=float)
    if np.any(d < d_min):
        log.debug("clamping %d distance(s) below %.3g m", int(np.sum(d < d_min)), d_min)
        d = np.maximum(d, d_min)
    g = SPEED_OF_LIGHT / (4 * np.pi * d * carrier_hz)
    return float(g) if g.ndim == 0 else g


def _distance(position):
    return float(np.hypot(*np.asarray(position, dtype=float)[:2]))


def _cn(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)


def draw_flat_channel(position, carrier_hz, rng):
    """Positive amplitude gain: path gain times a unit-power Rayleigh magnitude."""
    return path_gain(_distance(position), carrier_hz) * float(np.abs(_cn(rng, None)))


def draw_multipath(position, carrier_hz, num_taps, num_subcarriers, rng, decay=1.0):
    """Multipath realization with an exponential power-delay profile.

    Tap ``c`` has mean power ``exp(-c / decay)``, normalized so the profile
    sums to one, then scaled by the squared path gain.  ``flat_gain`` is set
    to the wideband RMS amplitude ``||taps||``.
    """
    if num_taps < 1 or num_taps > num_subcarriers:
        raise ValueError(f"tap count {num_taps} must lie in [1, {num_subcarriers}]")
    profile = np.exp(-np.arange(num_taps) / decay)
    profile /= profile.sum()
    taps = path_gain(_distance(position), carrier_hz) * np.sqrt(profile) * _cn(rng, num_taps)
    padded = np.zeros(num_subcarriers, dtype=complex)
    padded[:num_taps] = taps
    freq = num_subcarriers * dft_paper(padded)
    return ChannelRealization(flat_gain=float(np.linalg.norm(taps)), taps=taps, freq_response=freq)
