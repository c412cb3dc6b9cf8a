"""thzlink: directional THz/mmWave link modelling.

Planar-array radiation patterns, pointing-error statistics under
orientation jitter, alpha-mu small-scale fading, closed-form end-to-end
channel distributions with Monte-Carlo cross-validation, and a small CLI.
"""
from .errors import (
    BeamwidthError,
    DomainError,
    NumericsError,
    ScenarioError,
    UnsupportedDomainError,
)

__version__ = "0.1.0"

__all__ = [
    "BeamwidthError",
    "DomainError",
    "NumericsError",
    "ScenarioError",
    "UnsupportedDomainError",
    "__version__",
]
