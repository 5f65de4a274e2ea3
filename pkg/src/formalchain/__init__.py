"""formalchain: formal chains of combinatorial manifolds.

Universal manifold pairings on complex superpositions, layered Lorentzian
growth with mirror doubling, Regge-type actions, and a Metropolis sampler
over formal chains, in dimensions 0 through 2 plus an opaque mock stage.
"""

from .action import ActionParams, total_action
from .chains import FormalChain, SamplerConfig, detect_termination, run, step
from .growth import Cobordism, GrowthConfig, grow_layer, mirror_double, wick_rotate
from .pairing import (
    Bounded1Ket,
    BoundedSurfaceKet,
    BoundarySpec,
    MockEquivalence,
    cauchy_schwarz_check,
    l2_handle_series,
    lightlike_search,
    pair,
)
from .superpose import Superposition
from .topo import Triangulation, classify_surface, euler_characteristic, homology_ranks

__version__ = "0.1.0"

__all__ = [
    "ActionParams",
    "total_action",
    "FormalChain",
    "SamplerConfig",
    "detect_termination",
    "run",
    "step",
    "Cobordism",
    "GrowthConfig",
    "grow_layer",
    "mirror_double",
    "wick_rotate",
    "Bounded1Ket",
    "BoundedSurfaceKet",
    "BoundarySpec",
    "MockEquivalence",
    "cauchy_schwarz_check",
    "l2_handle_series",
    "lightlike_search",
    "pair",
    "Superposition",
    "Triangulation",
    "classify_surface",
    "euler_characteristic",
    "homology_ranks",
    "__version__",
]
