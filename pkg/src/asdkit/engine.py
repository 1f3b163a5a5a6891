"""Top-level ascending-decomposition pipeline.

Dispatch for a graph with binom(m,2) < e <= binom(m+1,2) edges: tiny
instances go to an exhaustive search; graphs that are unions of stars go
to the interval separator; otherwise high-degree vertices are peeled off
as stars until the core has max degree O(sqrt(e)), the core is
decomposed (matching route or strong route), each core part is topped up
to its target size with a substar carved from the fattest residual
peeled star, and the leftover star edges fill the head positions via the
separator.  Every result is verified before being returned.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from random import Random
from typing import Optional, Sequence

from .ascending import asd_bounded_degree
from .config import DESK, EngineConfig
from .decomp import (Decomposition, EmbeddingWitness, expected_sizes,
                     make_decomposition, size_profile, witness_between)
from .errors import (AsdError, InfeasibleError, PreconditionError, StageError,
                     UnsupportedInstanceError, ValidationError)
from .graphs import (Edge, EdgePart, Graph, canonical_edges,
                     classify_component, norm_edge, part)
from .separator import SeparationInstance, separate
from .verifier import ascending_witness, embeds, verify_decomposition


# ---------------------------------------------------------------------------
# Peeling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeeledStar:
    centre: int
    edges: frozenset[Edge]

    @property
    def size(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class PeelResult:
    core: Graph
    stars: tuple[PeeledStar, ...]  # in removal order; sizes non-increasing


def peel(g: Graph, c: float) -> PeelResult:
    """Repeatedly remove a maximum-degree vertex while its degree exceeds
    c * sqrt(remaining edges), recording the removed star."""
    adj = [set(nb) for nb in g.adjacency()]
    e = g.size
    stars: list[PeeledStar] = []
    while e > 0:
        v = max(range(g.n), key=lambda x: (len(adj[x]), -x))
        d = len(adj[v])
        if d <= c * math.sqrt(e):
            break
        stars.append(PeeledStar(
            v, frozenset(norm_edge(v, w) for w in adj[v])))
        for w in list(adj[v]):
            adj[w].discard(v)
        adj[v].clear()
        e -= d
    if len(stars) >= 2:
        assert all(a.size >= b.size for a, b in zip(stars, stars[1:]))
    core_edges = frozenset(norm_edge(u, w)
                           for u in range(g.n) for w in adj[u] if u < w)
    return PeelResult(Graph(g.n, core_edges), tuple(stars))


# ---------------------------------------------------------------------------
# Substar allocation
# ---------------------------------------------------------------------------

def allocate_substars(peeled: PeelResult, core_parts: Sequence[frozenset[Edge]],
                      targets: Sequence[int], cfg: EngineConfig = DESK
                      ) -> tuple[list[frozenset[Edge]], list[PeeledStar]]:
    """Give core part j (holding position r+1+j) a substar of the fattest
    residual peeled star, avoiding the part's vertices, so the union
    reaches its target size.  Returns the substars and the residual
    stars."""
    if len(core_parts) != len(targets):
        raise ValidationError("one target per core part")
    avail: list[tuple[int, set[int]]] = [
        (s.centre, {x for e in s.edges for x in e if x != s.centre})
        for s in peeled.stars
    ]
    r_plus = len(core_parts)
    subs: list[Optional[frozenset[Edge]]] = [None] * r_plus
    slack = None
    for j in range(r_plus - 1, -1, -1):
        need = targets[j] - len(core_parts[j])
        if need < 0:
            raise StageError("allocate",
                             f"core part exceeds its target at position {j}")
        if need == 0:
            subs[j] = frozenset()
            continue
        if not avail:
            raise InfeasibleError(f"no peeled stars left at position {j}")
        ti = max(range(len(avail)), key=lambda x: (len(avail[x][1]), -x))
        centre, leaves = avail[ti]
        part_verts = {x for e in core_parts[j] for x in e}
        usable = sorted(x for x in leaves if x not in part_verts)
        if cfg.profile == "paper":
            r_head = len(targets) and targets[0] - 1
            if len(usable) < need + 20 * (r_head + 1):
                raise InfeasibleError(
                    f"residual star too small at position {j}: "
                    f"{len(usable)} < need {need} + 20(r+1)")
        if len(usable) < need:
            raise InfeasibleError(
                f"residual star too small at position {j}: "
                f"{len(usable)} < {need}")
        chosen = usable[:need]
        leaves.difference_update(chosen)
        subs[j] = frozenset(norm_edge(centre, x) for x in chosen)
    residual = [PeeledStar(c, frozenset(norm_edge(c, x) for x in ls))
                for c, ls in avail if ls]
    return [s for s in subs if s is not None], residual


# ---------------------------------------------------------------------------
# Star decompositions
# ---------------------------------------------------------------------------

def _star_components(g: Graph) -> Optional[list[PeeledStar]]:
    stars = []
    for verts, ce in g.components():
        tag = classify_component(verts, ce)
        if tag[0] != "star":
            return None
        deg = Counter()
        for u, v in ce:
            deg[u] += 1
            deg[v] += 1
        centre = max(deg, key=lambda v: (deg[v], -v))
        stars.append(PeeledStar(centre, ce))
    return stars


def _carve(star: PeeledStar, sizes: Sequence[int]) -> list[frozenset[Edge]]:
    leaves = sorted(x for e in star.edges for x in e if x != star.centre)
    out = []
    at = 0
    for s in sizes:
        out.append(frozenset(norm_edge(star.centre, x)
                             for x in leaves[at:at + s]))
        at += s
    assert at <= len(leaves) + (0 if sizes else 0)
    return out


def star_witness(small: frozenset[Edge], big: frozenset[Edge]
                 ) -> EmbeddingWitness:
    def centre_of(es):
        deg = Counter()
        for u, v in es:
            deg[u] += 1
            deg[v] += 1
        return max(deg, key=lambda v: (deg[v], -v))

    cs, cb = centre_of(small), centre_of(big)
    ls = sorted(x for e in small for x in e if x != cs)
    lb = sorted(x for e in big for x in e if x != cb)
    vmap = {cs: cb}
    vmap.update(dict(zip(ls, lb)))
    return witness_between(small, big, vmap)


def partition_multiset(values: Sequence[int], bins: Sequence[int]
                       ) -> Optional[list[list[int]]]:
    """Partition the multiset `values` into groups summing to the `bins`
    entries; values are assigned largest-first with symmetric pruning."""
    vals = sorted(values, reverse=True)
    if sum(vals) != sum(bins):
        return None
    rem = list(bins)
    groups: list[list[int]] = [[] for _ in bins]
    failed: set = set()

    def rec(idx: int) -> bool:
        if idx == len(vals):
            return all(x == 0 for x in rem)
        key = (idx, tuple(sorted(rem)))
        if key in failed:
            return False
        v = vals[idx]
        tried: set[int] = set()
        for j in range(len(rem)):
            if rem[j] < v or rem[j] in tried:
                continue
            tried.add(rem[j])
            rem[j] -= v
            groups[j].append(v)
            if rec(idx + 1):
                return True
            rem[j] += v
            groups[j].pop()
        failed.add(key)
        return False

    return groups if rec(0) else None


def asd_star_forest(g: Graph, stars: Optional[Sequence[PeeledStar]] = None,
                    cfg: EngineConfig = DESK) -> Decomposition:
    """Ascending decomposition of an edge-disjoint union of stars into
    stars of sizes 1..m, via interval separation."""
    if stars is None:
        stars = _star_components(g)
        if stars is None:
            raise PreconditionError("graph is not a disjoint union of stars")
    sizes = [s.size for s in stars]
    e = sum(sizes)
    m, t = size_profile(e)
    if t != m:
        raise PreconditionError(f"edge count {e} is not triangular")
    res = separate(SeparationInstance(m, tuple(sizes)), cfg)
    parts_by_pos: dict[int, frozenset[Edge]] = {}
    for star, assigned in zip(stars, res.parts):
        for piece, sz in zip(_carve(star, sorted(assigned)), sorted(assigned)):
            parts_by_pos[sz] = piece
    parts = [parts_by_pos[i] for i in range(1, m + 1)]
    witnesses = [star_witness(parts[i], parts[i + 1])
                 for i in range(m - 1)]
    return make_decomposition(g, parts, witnesses)


def _star_decomposition_general(g: Graph, stars: Sequence[PeeledStar],
                                targets: Sequence[int], cfg: EngineConfig
                                ) -> list[frozenset[Edge]]:
    """Partition stars into substars realizing the target multiset; used
    when the targets are not exactly 1..m."""
    sizes = [s.size for s in stars]
    if list(targets) == list(range(1, len(targets) + 1)):
        res = separate(SeparationInstance(len(targets), tuple(sizes)), cfg)
        groups = [sorted(p) for p in res.parts]
    else:
        got = partition_multiset(targets, sizes)
        if got is None:
            raise InfeasibleError("star sizes cannot realize the targets")
        groups = [sorted(grp) for grp in got]
    by_size: dict[int, list[frozenset[Edge]]] = defaultdict(list)
    for star, grp in zip(stars, groups):
        for piece, sz in zip(_carve(star, grp), grp):
            by_size[sz].append(piece)
    out = []
    for want in targets:
        if not by_size[want]:
            raise AssertionError("carved substars misaligned with targets")
        out.append(by_size[want].pop())
    return out


# ---------------------------------------------------------------------------
# Exhaustive fallback
# ---------------------------------------------------------------------------

_canon_cache: dict[frozenset, tuple] = {}
_embed_cache: dict[tuple, bool] = {}


def _graph_canon(edges: frozenset[Edge]) -> tuple:
    got = _canon_cache.get(edges)
    if got is None:
        comps = Graph(max((v for e in edges for v in e), default=-1) + 1,
                      edges).components()
        got = tuple(sorted(canonical_edges(v, ce) for v, ce in comps))
        _canon_cache[edges] = got
    return got


def _embeds_cached(small: frozenset[Edge], big: frozenset[Edge]) -> bool:
    key = (_graph_canon(small), _graph_canon(big))
    got = _embed_cache.get(key)
    if got is None:
        n = max((v for e in (small | big) for v in e), default=-1) + 1
        res = embeds(Graph(n, small), Graph(n, big))
        got = res is not None and not isinstance(res, str)
        _embed_cache[key] = got
    return got


def fallback_search(g: Graph, cfg: EngineConfig = DESK) -> Decomposition:
    """Exhaustive backtracking over ordered edge partitions, largest part
    first, pruning candidates that do not embed into their successor.

    A beam pass with star-biased candidate order runs first; on failure
    the full search runs with memoized failure states (exhaustive for
    m <= 6; beyond that a node budget applies)."""
    e = g.size
    m, t = size_profile(e)
    sizes_desc = list(expected_sizes(e))[::-1]
    deg = g.degrees()

    def candidate_edges(rem: frozenset[Edge]) -> list[Edge]:
        local = Counter()
        for u, v in rem:
            local[u] += 1
            local[v] += 1
        return sorted(rem, key=lambda e: (-(local[e[0]] + local[e[1]]),
                                          -(deg[e[0]] + deg[e[1]]), e))

    def search(beam: Optional[int], budget: Optional[int]
               ) -> Optional[list[frozenset[Edge]]]:
        failed: set = set()
        nodes = [0]

        def rec(rem: frozenset[Edge], prev: Optional[frozenset[Edge]],
                idx: int) -> Optional[list[frozenset[Edge]]]:
            if idx == len(sizes_desc):
                return [] if not rem else None
            if budget is not None:
                nodes[0] += 1
                if nodes[0] > budget:
                    raise UnsupportedInstanceError("fallback budget exhausted")
            key = None
            if beam is None:
                key = (_graph_canon(rem),
                       _graph_canon(prev) if prev is not None else None, idx)
                if key in failed:
                    return None
            want = sizes_desc[idx]
            pool = candidate_edges(rem)
            seen_states: set = set()
            count = 0
            for combo in itertools.combinations(pool, want):
                cand = frozenset(combo)
                if prev is not None and not _embeds_cached(cand, prev):
                    continue
                rest = rem - cand
                if beam is None:
                    state = (_graph_canon(cand), _graph_canon(rest))
                    if state in seen_states:
                        continue
                    seen_states.add(state)
                got = rec(rest, cand, idx + 1)
                if got is not None:
                    return [cand] + got
                count += 1
                if beam is not None and count >= beam:
                    break
            if key is not None:
                failed.add(key)
            return None

        return rec(g.edges, None, 0)

    found = None
    for beam in (8, 64):
        found = search(beam, None)
        if found:
            break
    if not found:
        budget = None if m <= 6 else 200_000
        found = search(None, budget)
    if not found:
        raise InfeasibleError(
            f"no ascending decomposition found for e={e} (m={m})")
    parts = found[::-1]
    witnesses = []
    for i in range(len(parts) - 1):
        w = ascending_witness(parts[i], parts[i + 1], g.n)
        if w is None:
            raise AssertionError("searched chain lost its witness")
        witnesses.append(w)
    return make_decomposition(g, parts, witnesses)


# ---------------------------------------------------------------------------
# Top-level dispatch
# ---------------------------------------------------------------------------

def asd(g: Graph, cfg: EngineConfig = DESK) -> Decomposition:
    """Ascending subgraph decomposition of any graph, verified before
    return.  Stages that fail at desk scale fall back to the exhaustive
    search when the instance is small enough; otherwise the stage error
    surfaces."""
    if g.size == 0:
        return make_decomposition(g, [], [])
    m, t = size_profile(g.size)
    errors: list[str] = []

    if m <= cfg.fallback_m:
        return _verified(g, fallback_search(g, cfg))

    stars = _star_components(g)
    if stars is not None:
        try:
            return _verified(g, _star_path(g, stars, cfg))
        except AsdError as ex:
            errors.append(f"star path: {ex}")

    scale = 1.0
    for _ in range(3):
        try:
            return _verified(g, _peel_path(g, cfg, cfg.c * scale))
        except AsdError as ex:
            errors.append(f"peel c*{scale}: {ex}")
            scale /= 2
    raise StageError("asd", "; ".join(errors))


def _verified(g: Graph, d: Decomposition) -> Decomposition:
    report = verify_decomposition(g, d)
    if not report.ok:
        raise StageError("verify",
                         f"output failed verification: {report.failures[:3]}")
    return d


def _star_path(g: Graph, stars: list[PeeledStar], cfg: EngineConfig
               ) -> Decomposition:
    m, t = size_profile(g.size)
    targets = list(expected_sizes(g.size))
    if t == m:
        return asd_star_forest(g, stars, cfg)
    parts = _star_decomposition_general(g, stars, targets, cfg)
    witnesses = [star_witness(parts[i], parts[i + 1])
                 for i in range(len(parts) - 1)]
    return make_decomposition(g, parts, witnesses)


def _peel_path(g: Graph, cfg: EngineConfig, peel_c: float) -> Decomposition:
    m, t = size_profile(g.size)
    peeled = peel(g, peel_c)
    if not peeled.stars:
        core_decomp = _decompose_core(peeled.core, cfg)
        if len(core_decomp.parts) != m:
            raise StageError("core", "core alone does not fill every position")
        return core_decomp
    if peeled.core.size == 0:
        return _star_path(g, [PeeledStar(s.centre, s.edges)
                              for s in reversed(peeled.stars)], cfg)
    try:
        core_decomp = _decompose_core(peeled.core, cfg, allow_recurse=True)
        if _core_alignment_ok(g.size, core_decomp):
            return _assemble_peel(g, peeled, core_decomp, cfg)
        raise StageError("seam", "core size plateau misses the global one")
    except AsdError:
        # Retry with the single-edge core decomposition, whose flat sizes
        # absorb any plateau position.
        if peeled.core.size >= m:
            raise
        single = _single_edge_decomp(peeled.core)
        return _assemble_peel(g, peeled, single, cfg)


def _core_alignment_ok(e_total: int, core_decomp: Decomposition) -> bool:
    """The substars topping up the core parts must never shrink along the
    chain, which pins the core's size plateau to the global one."""
    m, t = size_profile(e_total)
    count = len(core_decomp.parts)
    r = m - count
    e_core = sum(len(p) for p in core_decomp.parts)
    m_core, t_core = size_profile(e_core)
    if all(len(p) == 1 for p in core_decomp.parts):
        return True
    if t == m:
        return True
    if t <= r:
        return t_core == m_core  # core must ascend strictly everywhere
    return r + t_core == t


def _single_edge_decomp(core: Graph) -> Decomposition:
    parts = [frozenset({e}) for e in sorted(core.edges)]
    witnesses = []
    for i in range(len(parts) - 1):
        (a, b), (c, d) = next(iter(parts[i])), next(iter(parts[i + 1]))
        witnesses.append(witness_between(parts[i], parts[i + 1],
                                         {a: c, b: d}))
    return make_decomposition(core, parts, witnesses)


def _assemble_peel(g: Graph, peeled: PeelResult, core_decomp: Decomposition,
                   cfg: EngineConfig) -> Decomposition:
    m, t = size_profile(g.size)
    targets = list(expected_sizes(g.size))
    core_parts = list(core_decomp.parts)
    r = m - len(core_parts)
    if r <= 0:
        raise StageError("core", f"core produced {len(core_parts)} parts "
                                 f"for m={m}; nothing left for the stars")
    if t == r:
        raise StageError("seam", "size plateau lands exactly on the seam")
    tail_targets = targets[r:]
    subs, residual = allocate_substars(peeled, core_parts, tail_targets, cfg)
    tail_parts = [cp | sb for cp, sb in zip(core_parts, subs)]

    head_targets = targets[:r]
    head_parts = _star_decomposition_general(
        Graph(g.n, frozenset(e for s in residual for e in s.edges)),
        residual, head_targets, cfg)

    witnesses: list[EmbeddingWitness] = []
    for i in range(r - 1):
        witnesses.append(star_witness(head_parts[i], head_parts[i + 1]))
    if subs[0]:
        seam_map = _star_into(head_parts[r - 1], subs[0])
        witnesses.append(witness_between(head_parts[r - 1], tail_parts[0],
                                         seam_map))
    else:
        w = ascending_witness(head_parts[r - 1], tail_parts[0], g.n)
        if w is None:
            raise StageError("seam", "head star does not embed at the seam")
        witnesses.append(w)
    for i in range(len(tail_parts) - 1):
        vmap = dict(core_decomp.witnesses[i].mapping)
        if subs[i]:
            vmap.update(_star_into(subs[i], subs[i + 1]))
        witnesses.append(witness_between(tail_parts[i], tail_parts[i + 1],
                                         vmap))
    return make_decomposition(g, head_parts + tail_parts, witnesses)


def _star_into(small: frozenset[Edge], big: frozenset[Edge]) -> dict[int, int]:
    if not small:
        return {}

    def centre_leaves(es):
        deg = Counter()
        for u, v in es:
            deg[u] += 1
            deg[v] += 1
        c = max(deg, key=lambda v: (deg[v], -v))
        return c, sorted(x for e in es for x in e if x != c)

    cs, ls = centre_leaves(small)
    cb, lb = centre_leaves(big)
    if len(ls) > len(lb):
        raise StageError("seam", "substar sizes out of order")
    vmap = {cs: cb}
    vmap.update(dict(zip(ls, lb)))
    return vmap


def _decompose_core(core: Graph, cfg: EngineConfig,
                    allow_recurse: bool = False) -> Decomposition:
    t_core, _ = size_profile(core.size)
    if t_core >= cfg.core_threshold:
        try:
            return asd_bounded_degree(core, cfg)
        except AsdError:
            # The core shed at least one star, so a nested dispatch on the
            # strictly smaller graph terminates and may find a star or
            # matching route the degree bound ruled out here.
            if allow_recurse:
                return asd(core, cfg)
            raise
    return _single_edge_decomp(core)
