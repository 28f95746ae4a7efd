# %% [markdown]
# # Federated training over noisy, peak-limited uplinks
#
# Eight devices train a small network on synthetic blobs.  Each round their
# gradients are summed over the air.  We compare an ideal link, a
# single-carrier link and an OFDM link, with and without the peak limit.

# %%
from otafl.experiment import resolve_config, run_experiment

for scheme, clip in [("ideal", False), ("sc", False), ("sc", True), ("ofdm", False), ("ofdm", True)]:
    cfg = resolve_config("desk", None, dict(scheme=scheme, clip=clip, rounds=60, seed=0))
    recs = run_experiment(cfg)
    last = recs[-1]
    tse = sum(r["tse"] for r in recs) / len(recs)
    print(f"{scheme:5s} clip={'on ' if clip else 'off'} accuracy {last['accuracy']:.3f}  "
          f"mean TSE {tse:.2e}  PAPR {last['papr_mean_db']:.1f} dB")

# %% [markdown]
# The same experiment runs from the shell:
#
#     python -m otafl --preset desk --scheme ofdm --clip on --rounds 60 --out metrics.csv
