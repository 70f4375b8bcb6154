"""Anonymous e-voting on a permissioned blockchain, with the protocol's
quantum resources (QRNG, BB84 key distribution, threshold-shared database
keys) provided as faithful classical simulations behind stable interfaces."""

from .config import ElectionConfig
from .entropy import (
    ConstantSource,
    Id256,
    SeededTestSource,
    SimulatedBeamsplitter,
    health_check,
)

__version__ = "0.1.0"

__all__ = [
    "ElectionConfig",
    "Id256",
    "ConstantSource",
    "SeededTestSource",
    "SimulatedBeamsplitter",
    "health_check",
    "__version__",
]
