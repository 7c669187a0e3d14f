"""Multimode continuous-variable entanglement from concurrent chi(2) interactions.

Submodules: ``gaussian`` (covariance dynamics), ``catalog`` (modes, pumps,
tensor elements, realizability), ``qpm`` (poling-period design), ``fock``
(truncated number-basis oracle), ``cli``.
"""

__version__ = "0.1.0"
