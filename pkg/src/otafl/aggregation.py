"""One round of gradient aggregation over an ideal, single-carrier or OFDM uplink.

All quantities here are linear: powers in mW, amplitudes in sqrt(mW),
noise variances in mW.  Random draws come from :func:`otafl.seeding.stream`
keyed by (seed, round, device), so the clipped and unclipped variants of a
round see identical gradients, channels and noise.
"""

from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .channel import DEFAULT_CARRIER_HZ, draw_flat_channel, draw_multipath
from .dsp import OOB_FLOOR_DBM, idft_paper, papr_db_or_nan
from .ofdm import (
    IcfConfig,
    analytic_mse_subcarrier,
    demodulate_recover,
    from_symbols,
    icf,
    modulate_symbol,
    precoders,
    to_symbols,
    transmit_through_channel,
)
from .power import solve_power_alloc, subcarrier_alloc
from .single_carrier import (
    analytic_mse_sc,
    compute_norm_stats,
    normalize,
    recover,
    superpose_receive,
    transmit_clipped,
)

__all__ = ["SCHEMES", "LinkConfig", "AggregationResult", "aggregate", "true_square_error"]

SCHEMES = ("ideal", "sc", "ofdm")


@dataclass(frozen=True)
class LinkConfig:
    """Physical-layer parameters in linear units.

    ``noise_var_sc`` is the per-sample variance of the single-carrier link;
    ``noise_var_ofdm`` the per-subcarrier variance (time-domain samples then
    carry ``noise_var_ofdm * num_subcarriers``).
    """

    p_avg_mw: float = 10 ** 2.3
    p_inst_mw: float = 10 ** 2.6
    noise_var_sc: float = 1e-11 * 60e3
    noise_var_ofdm: float = 1e-11 * 60e3
    num_subcarriers: int = 32
    l_os: int = 4
    oob_threshold_dbm: float = -10.0
    icf_max_iters: int = 16
    num_taps: int = 4
    tap_decay: float = 1.0
    carrier_hz: float = DEFAULT_CARRIER_HZ

    @property
    def a_max(self):
        return float(np.sqrt(self.p_inst_mw))


@dataclass
class AggregationResult:
    """Recovered average gradient plus per-round link statistics.

    PAPR values are in dB, averaged or maximized over devices (and OFDM
    symbols).  ``mse_analytic`` is per gradient entry so it compares
    directly with the true squared error.
    """

    recovered: np.ndarray
    exact: np.ndarray
    tse: float
    mse_analytic: float
    papr_unclipped_mean_db: float
    papr_mean_db: float
    papr_max_db: float
    icf_iters_mean: float = 0.0
    icf_converged_frac: float = 1.0
    oob_final_dbm: float = OOB_FLOOR_DBM
    peak_excess_db: float = 0.0
    powers_mw: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alpha_mean: float = 0.0


def true_square_error(recovered, exact):
    """Mean squared per-entry deviation between two gradient vectors."""
    recovered = np.asarray(recovered)
    exact = np.asarray(exact)
    if recovered.shape != exact.shape:
        raise ValueError(f"shape mismatch: {recovered.shape} vs {exact.shape}")
    return float(np.mean(np.abs(recovered - exact) ** 2))


def _papr_summary(papr_db):
    # all-zero transmissions have no PAPR; an all-zero round reports 0 dB
    papr_db = np.asarray(papr_db, dtype=float)
    papr_db = papr_db[np.isfinite(papr_db)]
    if papr_db.size == 0:
        return 0.0, 0.0
    return float(papr_db.mean()), float(papr_db.max())


def aggregate(raw_gradients, scheme, clip, link, positions, seed, round_index):
    """Aggregate the devices' raw gradients through the selected uplink.

    Parameters
    ----------
    raw_gradients : ndarray, shape (K, N)
    scheme : {"ideal", "sc", "ofdm"}
    clip : bool
        Enforce the peak amplitude ``sqrt(link.p_inst_mw)``.
    link : LinkConfig
    positions : ndarray, shape (K, 2)
    seed, round_index : int
        Key the channel and noise streams.
    """
    raw = np.asarray(raw_gradients, dtype=float)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if raw.ndim != 2 or raw.shape[0] != len(positions):
        raise ValueError("need one gradient row per device position")
    exact = raw.mean(axis=0)
    if scheme == "ideal":
        stats = compute_norm_stats(raw)
        mean_db, max_db = _papr_summary(papr_db_or_nan(normalize(raw, stats)))
        return AggregationResult(exact.copy(), exact, 0.0, 0.0, mean_db, mean_db, max_db)
    if scheme == "sc":
        return _aggregate_sc(raw, exact, clip, link, positions, seed, round_index)
    return _aggregate_ofdm(raw, exact, clip, link, positions, seed, round_index)


def _aggregate_sc(raw, exact, clip, link, positions, seed, t):
    k, n = raw.shape
    stats = compute_norm_stats(raw)
    g = normalize(raw, stats)
    gains = np.array([
        draw_flat_channel(pos, link.carrier_hz, seeding.stream(seed, t, i, seeding.CHANNEL))
        for i, pos in enumerate(positions)
    ])
    sol = solve_power_alloc(gains, link.p_avg_mw, link.noise_var_sc)
    x = transmit_clipped(g, sol.powers, link.a_max if clip else np.inf)

    y = superpose_receive(x, gains, link.noise_var_sc, seeding.stream(seed, t, seeding.NOISE))
    rec = recover(y, sol.alpha, k, stats)

    unclipped, _ = _papr_summary(papr_db_or_nan(g))
    mean_db, max_db = _papr_summary(papr_db_or_nan(x))
    peak = np.max(x**2)
    return AggregationResult(
        recovered=rec,
        exact=exact,
        tse=true_square_error(rec, exact),
        mse_analytic=analytic_mse_sc(sol, gains, link.noise_var_sc, stats, n, k) / n,
        papr_unclipped_mean_db=unclipped,
        papr_mean_db=mean_db,
        papr_max_db=max_db,
        peak_excess_db=max(0.0, 10 * np.log10(peak / link.p_inst_mw)) if peak > 0 else 0.0,
        powers_mw=sol.powers,
        alpha_mean=sol.alpha,
    )


def _aggregate_ofdm(raw, exact, clip, link, positions, seed, t):
    k, n = raw.shape
    m = link.num_subcarriers
    stats = compute_norm_stats(raw)
    g = to_symbols(normalize(raw, stats), m)  # (K, L, M)

    channels = [
        draw_multipath(pos, link.carrier_hz, link.num_taps, m,
                       seeding.stream(seed, t, i, seeding.CHANNEL), decay=link.tap_decay)
        for i, pos in enumerate(positions)
    ]
    freq = np.array([ch.freq_response for ch in channels])  # (K, M)
    sols = subcarrier_alloc(np.abs(freq), link.p_avg_mw, link.noise_var_ofdm)
    powers = np.column_stack([s.powers for s in sols])  # (K, M)
    alphas = np.array([s.alpha for s in sols])
    b = precoders(powers, freq)[:, None, :]

    spectra = g * b  # (K, L, M) in-band bins
    s_os = modulate_symbol(g, b, link.l_os)
    unclipped = papr_db_or_nan(s_os)
    if clip:
        cfg = IcfConfig(link.a_max, link.oob_threshold_dbm, link.icf_max_iters, link.l_os)
        x_os, rep = icf(s_os, cfg)
        spectra = rep.spectrum[..., :m]
        sent = papr_db_or_nan(x_os)
        live = np.isfinite(unclipped)
        icf_stats = dict(
            icf_iters_mean=float(rep.iterations_used[live].mean()) if live.any() else 0.0,
            icf_converged_frac=float(rep.converged[live].mean()) if live.any() else 1.0,
            oob_final_dbm=float(rep.final_oob_dbm[live].mean()) if live.any() else OOB_FLOOR_DBM,
            peak_excess_db=float(rep.residual_peak_excess_db.max()),
        )
    else:
        sent = unclipped
        icf_stats = {}

    s = idft_paper(spectra)  # Nyquist-rate symbols
    y = transmit_through_channel(s, channels, link.noise_var_ofdm, seeding.stream(seed, t, seeding.NOISE))
    rec = from_symbols(demodulate_recover(y, alphas, k, stats), n)

    per_sub = np.array([
        analytic_mse_subcarrier(sol, freq[:, i], link.noise_var_ofdm, stats, k)
        for i, sol in enumerate(sols)
    ])
    mse = float(per_sub[np.arange(n) % m].mean())

    unclipped_mean, _ = _papr_summary(unclipped)
    mean_db, max_db = _papr_summary(sent)
    return AggregationResult(
        recovered=rec,
        exact=exact,
        tse=true_square_error(rec, exact),
        mse_analytic=mse,
        papr_unclipped_mean_db=unclipped_mean,
        papr_mean_db=mean_db,
        papr_max_db=max_db,
        powers_mw=powers.sum(axis=1),
        alpha_mean=float(alphas.mean()),
        **icf_stats,
    )
