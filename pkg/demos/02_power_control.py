# %% [markdown]
# # Threshold power control for analog aggregation
#
# Strong devices invert their channel so they arrive with unit gain at the
# receiver; weak devices transmit at full power.  The threshold that splits
# them is found by checking every candidate.

# %%
import numpy as np

from otafl.power import solve_power_alloc

gains = np.array([3e-3, 1e-3, 6e-4, 2e-4])
p_max = 100.0

for noise in (1e-9, 1e-7, 1e-5, 1e-3):
    sol = solve_power_alloc(gains, p_max, noise)
    arrivals = gains * np.sqrt(sol.alpha * sol.powers)
    print(f"noise {noise:.0e}: k*={sol.k_star} alpha={sol.alpha:.3e} objective={sol.objective:.3e}")
    print("   powers (mW):", np.round(sol.powers, 3), " received gain:", np.round(arrivals, 3))

# %% [markdown]
# With more noise the receiver scale shrinks, so more devices hit their
# power limit and arrive below unit gain.
