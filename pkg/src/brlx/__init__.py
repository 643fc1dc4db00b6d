"""Dyadic spectral toolkit for relaxed compressible flow on the torus."""

from .grid import TorusGrid
from .fields import (
    Field,
    VectorField,
    TimeSeriesField,
    save_field,
    load_field,
    save_field_csv,
    load_field_csv,
)
from .cutoffs import CutoffPair, build_cutoffs
from .blocks import (
    DyadicDecomposition,
    dyadic_block,
    low_freq_cutoff,
    decompose,
    reconstruction_defect,
    bernstein_ratios,
    check_almost_orthogonality,
)
from .errors import ContractError, ConfigurationError, SolverAbort

__version__ = "0.1.0"

__all__ = [
    "TorusGrid",
    "Field",
    "VectorField",
    "TimeSeriesField",
    "save_field",
    "load_field",
    "save_field_csv",
    "load_field_csv",
    "CutoffPair",
    "build_cutoffs",
    "DyadicDecomposition",
    "dyadic_block",
    "low_freq_cutoff",
    "decompose",
    "reconstruction_defect",
    "bernstein_ratios",
    "check_almost_orthogonality",
    "ContractError",
    "ConfigurationError",
    "SolverAbort",
    "__version__",
]
