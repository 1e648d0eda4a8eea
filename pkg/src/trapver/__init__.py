"""Trap-based verification of a nonadaptive measurement-driven sampler.

Simulation of the blind delegated protocol (graph carvings, encrypted
rounds, trap verdicts), exact output-distribution oracles, closed-form
soundness/completeness calculators, and fault-tolerance arithmetic, tied
together by a reproducible CLI.
"""

__version__ = "0.1.0"

from . import bounds, ftcalc, graphs, protocol, simulator

__all__ = [
    "__version__",
    "bounds",
    "ftcalc",
    "graphs",
    "protocol",
    "simulator",
]
