"""Spectral analysis of direct sums of EMZ multi-interval operators.

Exact set algebra for spectra, Shin-Zettl quasi-derivatives, a small
catalog of solvable operators, the spectral index of a direct sum, its
ordered spectral representation and eigenfunction expansions.
"""

from .errors import EMZError
from .realset import RealSet, SpectralMeasureClass, WeightedPPMeasure
from .catalog import OperatorSpec, OrderedRepData
from .vectorop import EMZSystem, spectral_index, build_superposition_graph
from .ordered_rep import build_ordered_representation, detect_distortion, pointwise_multiplicity
from .systemio import load_system, system_from_dict

__version__ = "0.1.0"

__all__ = [
    "EMZError", "RealSet", "SpectralMeasureClass", "WeightedPPMeasure", "OperatorSpec",
    "OrderedRepData", "EMZSystem", "spectral_index", "build_superposition_graph",
    "build_ordered_representation", "detect_distortion", "pointwise_multiplicity",
    "load_system", "system_from_dict",
]
