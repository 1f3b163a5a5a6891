"""asdkit: construct and verify ascending subgraph decompositions.

A decomposition of a graph with binom(m,2) < e <= binom(m+1,2) edges is
ascending when its part sizes follow the staircase 1, 2, ..., and every
part embeds into its successor.  The engine builds one constructively
(interval separation for star forests, matching machinery for bounded
degree, peeling plus substars in general, exhaustive search at tiny
scale) and every output carries embedding certificates checked by an
independent verifier.
"""

from .config import EngineConfig
from .decomp import Decomposition, EmbeddingWitness, expected_sizes
from .engine import asd, asd_star_forest, fallback_search, peel
from .errors import AsdError
from .graphs import EdgePart, Graph, GeneratorSpec, census, generate, \
    is_r_divisible, parse_graph, format_graph
from .separator import PairSystem, SeparationInstance, SeparationResult, \
    separate
from .verifier import VerifyReport, embeds, verify_decomposition

__all__ = [
    "AsdError", "Decomposition", "EdgePart", "EmbeddingWitness",
    "EngineConfig", "GeneratorSpec", "Graph", "PairSystem",
    "SeparationInstance", "SeparationResult", "VerifyReport", "asd",
    "asd_star_forest", "census", "embeds", "expected_sizes",
    "fallback_search", "format_graph", "generate", "is_r_divisible",
    "parse_graph", "peel", "separate", "verify_decomposition",
]

__version__ = "0.1.0"
