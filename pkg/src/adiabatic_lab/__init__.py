"""Numerical laboratory for adiabatic evolution and geometric phases."""

from adiabatic_lab.errors import (
    AdiabaticLabError,
    CyclicityError,
    DegenerateSpectrumError,
    FrameMismatchError,
    GridError,
    NotHermitianError,
    NumericalError,
    SingularPathError,
    StepControlError,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticLabError",
    "CyclicityError",
    "DegenerateSpectrumError",
    "FrameMismatchError",
    "GridError",
    "NotHermitianError",
    "NumericalError",
    "SingularPathError",
    "StepControlError",
    "__version__",
]
