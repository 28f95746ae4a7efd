"""Simulation of over-the-air federated learning under amplifier peak-power limits.

Submodules
----------
dsp             transforms, clipping, filtering, PAPR
power           MSE-optimal power control and denoising factor
channel         device placement, path loss, Rayleigh and multipath fading
single_carrier  single-carrier analog aggregation
ofdm            OFDM aggregation with iterative clipping and filtering
aggregation     one round of aggregation over a chosen uplink
fl              federated SGD with a small dense network
experiment      seeded experiments, metrics files, command line
"""

__version__ = "0.1.0"
