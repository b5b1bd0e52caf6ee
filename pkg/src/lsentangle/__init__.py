"""Desk-scale computations on the large-scale structure of entanglement.

Schmidt-spectrum algebra (:mod:`.spectra`), factor-type classification of
constant infinite tensor products (:mod:`.factor_types`), embezzlement
probes (:mod:`.embezzlement`), pure-state LOCC (:mod:`.locc`), entangled-pair
lattice models (:mod:`.lattice`) and one-dimensional entropy diagnostics
(:mod:`.chains`).
"""

from .errors import CapExceededError, InvalidInputError, LSEntangleError, UnsupportedInputError
from .factor_types import FactorType, Kind, RatioGroup, classify_itpfi, compose, ratio_group, rationality_test
from .spectra import (
    Spectrum,
    entropy,
    majorizes,
    make_spectrum,
    powers,
    sorted_fidelity,
    tensor,
    tensor_power,
    uniform,
)

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "FactorType",
    "InvalidInputError",
    "Kind",
    "LSEntangleError",
    "RatioGroup",
    "Spectrum",
    "UnsupportedInputError",
    "classify_itpfi",
    "compose",
    "entropy",
    "majorizes",
    "make_spectrum",
    "powers",
    "ratio_group",
    "rationality_test",
    "sorted_fidelity",
    "tensor",
    "tensor_power",
    "uniform",
]
