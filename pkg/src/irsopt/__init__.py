"""Alternating optimization with gradient-descent phase updates for
IRS-assisted transceiver design: secrecy-rate and weighted-sum-rate
applications, cross-method baselines, channel simulation, and a benchmark
command line."""

__version__ = "0.1.0"

from . import ao, baselines, bench, numerics, secrecy, sim, wsr

__all__ = ["ao", "baselines", "bench", "numerics", "secrecy", "sim", "wsr", "__version__"]
