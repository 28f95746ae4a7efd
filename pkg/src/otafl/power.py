"""MSE-optimal transmit power and receiver denoising factor.

The aggregation error of analog over-the-air summation is, up to a
constant factor,

    f(alpha, p) = sum_k (h_k sqrt(alpha p_k) - 1)^2 + alpha sigma^2,

minimized subject to ``0 <= p_k <= p_max``.  The optimum has a threshold
structure: sorting gains in descending order, the first ``k* - 1`` devices
invert their channel (``h_k^2 alpha p_k = 1``) and the rest transmit at
full power.  Every threshold is tried and the best consistent one kept.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["PowerSolution", "mse_objective", "solve_power_alloc", "subcarrier_alloc"]


@dataclass(frozen=True)
class PowerSolution:
    """Result of :func:`solve_power_alloc`.

    ``powers`` follow the caller's device order; ``k_star`` is 1-based in
    the descending-gain order, so devices ranked below it invert.
    """

    alpha: float
    powers: np.ndarray
    k_star: int
    objective: float
    order: np.ndarray

    @property
    def inverting(self):
        """Boolean mask (caller order) of channel-inverting devices."""
        mask = np.zeros(len(self.powers), dtype=bool)
        mask[self.order[: self.k_star - 1]] = True
        return mask


def _check_gains(gains):
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 1 or gains.size == 0:
        raise ValueError("channel gains must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(gains)) or np.any(gains <= 0):
        raise ValueError("channel gains must be positive and finite")
    return gains


def mse_objective(alpha, powers, gains, noise_var):
    """Misalignment plus noise term ``sum_k (h_k sqrt(alpha p_k) - 1)^2 + alpha sigma^2``."""
    powers = np.asarray(powers, dtype=float)
    gains = np.asarray(gains, dtype=float)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if powers.shape != gains.shape:
        raise ValueError("powers and gains must have the same length")
    if np.any(powers < 0):
        raise ValueError("transmit powers must be nonnegative")
    if noise_var < 0:
        raise ValueError("noise variance must be nonnegative")
    return float(np.sum((gains * np.sqrt(alpha * powers) - 1.0) ** 2) + alpha * noise_var)


def solve_power_alloc(gains, p_max, noise_var):
    """Optimal denoising factor and powers under a per-device power cap.

    Parameters
    ----------
    gains : array_like, shape (K,)
        Positive amplitude gains.
    p_max : float
        Average power budget per device (mW).
    noise_var : float
        Receiver noise variance (mW).

    Returns
    -------
    PowerSolution
        Ties between thresholds go to the smaller ``k_star``.
    """
    gains = _check_gains(gains)
    if not p_max > 0:
        raise ValueError(f"power budget must be positive, got {p_max}")
    if noise_var < 0:
        raise ValueError(f"noise variance must be nonnegative, got {noise_var}")

    order = np.argsort(-gains, kind="stable")
    h = gains[order]
    k = h.size

    # suffix sums over the full-power set {k*, ..., K}
    s1 = np.cumsum(h[::-1])[::-1]
    s2 = np.cumsum((h**2)[::-1])[::-1]
    alphas = (s1 / (s2 + noise_var / p_max)) ** 2 / p_max

    best = None
    for j in range(k):
        alpha = alphas[j]
        # devices ranked before j must be able to invert within budget
        if j > 0 and 1.0 / (alpha * h[j - 1] ** 2) > p_max * (1 + 1e-12):
            continue
        p_sorted = np.full(k, p_max)
        p_sorted[:j] = np.minimum(1.0 / (alpha * h[:j] ** 2), p_max)
        obj = mse_objective(alpha, p_sorted, h, noise_var)
        if best is None or obj < best[0]:
            best = (obj, j, alpha, p_sorted)

    obj, j, alpha, p_sorted = best
    powers = np.empty(k)
    powers[order] = p_sorted
    return PowerSolution(alpha=float(alpha), powers=powers, k_star=j + 1, objective=obj, order=order)


def subcarrier_alloc(per_subcarrier_gains, p_max, noise_var):
    """Per-subcarrier solutions with the budget split evenly over ``M`` subcarriers.

    ``per_subcarrier_gains`` has shape (K, M).  Returns a list of ``M``
    :class:`PowerSolution`, each computed with budget ``p_max / M``.
    """
    g = np.asarray(per_subcarrier_gains, dtype=float)
    if g.ndim != 2 or g.shape[1] == 0:
        raise ValueError("per-subcarrier gains must be a K x M matrix with M >= 1")
    m = g.shape[1]
    return [solve_power_alloc(g[:, i], p_max / m, noise_var) for i in range(m)]
