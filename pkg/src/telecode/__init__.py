"""telecode: teleportation-threshold simulator for the planar surface code.

Maps weak Bell-measurement outcomes onto a random two-layer vertex model,
contracts it with a truncated boundary MPS, and estimates coherent
information, decoder outputs, and finite-size-scaling thresholds.
"""

__version__ = "0.1.0"

from .channel import Couplings, ProtocolParams, beta_from_t, couplings_from
from .lattice import PlanarCodeLattice, build_planar_code, dual_lattice
from .sampler import AncestralSampler, OutcomeConfig, sample_nishimori

__all__ = [
    "Couplings",
    "ProtocolParams",
    "PlanarCodeLattice",
    "AncestralSampler",
    "OutcomeConfig",
    "beta_from_t",
    "couplings_from",
    "build_planar_code",
    "dual_lattice",
    "sample_nishimori",
    "__version__",
]
