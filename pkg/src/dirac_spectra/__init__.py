"""Forward and inverse-side spectral tools for 1D Dirac operators with
periodic and antiperiodic boundary conditions."""
from .core import (
    ANTIPERIODIC,
    DEFAULT_TOLERANCES,
    PERIODIC,
    BoundaryKind,
    Monodromy,
    PotentialGrid,
    SpectrumTable,
    Tolerances,
    free_solution,
    load_potential,
    load_spectrum,
    save_potential,
    save_spectrum,
)

__version__ = "0.1.0"
