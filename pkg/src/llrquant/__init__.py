"""Link-level BICM simulation with quantized log-likelihood ratios.

The package covers the full receive chain around an LLR quantizer with
equiprobable output: Rayleigh MIMO channels, Gray-labeled constellations,
max-log demodulation, quantizer design (empirical and closed-form for the
real BPSK channel), rate/outage evaluation of the equivalent discrete
channel, an on-the-fly parameter estimator, and LDPC-coded bit error rate
experiments.
"""

from . import (analytic_siso, channel, demod, estimator, harness, infotheory,
               ldpc, link, modem, quant, rng)

__all__ = [
    "analytic_siso",
    "channel",
    "demod",
    "estimator",
    "harness",
    "infotheory",
    "ldpc",
    "link",
    "modem",
    "quant",
    "rng",
]

__version__ = "0.1.0"
