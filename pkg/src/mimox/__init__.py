"""Degrees-of-freedom toolkit for the two-user MIMO X channel.

Exact-rational DoF regions, interference-alignment beamforming constructions,
cognitive message-sharing schemes and a finite-SNR slope simulator.
"""

__version__ = "0.1.0"

from .errors import (
    DefectiveMatrixError,
    DegenerateChannelError,
    InfeasibleError,
    MimoxError,
    PreconditionError,
)
from .numerics import AntennaConfig, ChannelSet
from .region import DofPolytope, DofTuple, RegionVertex

__all__ = [
    "AntennaConfig",
    "ChannelSet",
    "DefectiveMatrixError",
    "DegenerateChannelError",
    "DofPolytope",
    "DofTuple",
    "InfeasibleError",
    "MimoxError",
    "PreconditionError",
    "RegionVertex",
    "__version__",
]
