"""Engine configuration.

All tunable constants of the decomposition pipeline live here, with two
profiles.  The "paper" profile pins the literal constants of the source
construction (reachable only for astronomically large inputs); the "desk"
profile keeps every structural contract (disjointness, isomorphism,
divisibility) while scaling thresholds down so the pipeline is exercisable
on graphs that fit in memory.  Quantitative remainder bounds are recorded
as metrics under the desk profile, never enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class EngineConfig:
    profile: str = "desk"
    # Degree-vs-size constants of the bounded-degree pipeline.
    c: float = 3.0
    eps: float = 0.1
    delta: float = 0.05
    # Default component divisibility requested from the isomorphic
    # decomposition when called directly (the strong pipeline always uses 40).
    r: int = 2
    # Block side of the bicliques extracted from dense leftovers, and the
    # star-size cap of the star-forest stage.
    t: int = 4
    s: int = 8
    # Interval separation: the algorithmic path requires the i-th target to
    # be at least min(sep_linear * i, sep_flat * (m + 1)).
    sep_linear: int = 1600
    sep_flat: int = 20
    # Largest m the exact separation search will attempt.
    sep_fallback_m: int = 64
    # Largest m the exhaustive decomposition search will attempt.
    fallback_m: int = 8
    # Core sizes below this use the single-edge decomposition branch.
    core_threshold: int = 6
    retry_budget: int = 64
    seed: int = 0
    # Coefficient of the n^2/sqrt(t) density shortcut in the biclique-forest
    # stage: below coeff * n^2 / sqrt(t) edges everything goes to the
    # remainder.  0 disables the shortcut (desk default).
    dense_coeff: float = 0.0
    # Lower edge-density bound required by the strong decomposition.
    min_density: float = 0.2
    # Divisor giving the max-degree acceptance bound for stripped matchings
    # (bound is base_count / strip_degree_div).
    strip_degree_div: int = 50

    @staticmethod
    def desk(**overrides) -> "EngineConfig":
        return replace(EngineConfig(), **overrides)

    @staticmethod
    def paper(**overrides) -> "EngineConfig":
        c = 10 ** 6
        eps = 1e-15
        cfg = EngineConfig(
            profile="paper",
            c=float(c),
            eps=eps,
            delta=1e-13,
            r=2,
            t=math.ceil(eps ** -12 * c ** 6) ** 2,
            s=math.ceil(5 * c / eps),
            dense_coeff=4.0,
        )
        return replace(cfg, **overrides)


DESK = EngineConfig.desk()
