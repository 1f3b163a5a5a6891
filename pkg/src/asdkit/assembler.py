"""Stacked almost-decompositions of bounded-degree graphs.

Three layers, each refining the previous one:

 * approx_star_forest: edges at small-degree vertices become isomorphic
   star forests (plus, when the low-degree leftover is fat, an equal
   matching glued onto each forest); edges among large-degree vertices
   are set aside.
 * approx_isomorphic: the set-aside dense part is ground into biclique
   forests and grafted onto the star forests, giving isomorphic
   r-divisible parts with bounded components.
 * approx_isomorphic_stronger: matchings are pulled out first and
   recombined so every part carries a certified isolated matching, and
   an ascending sequence of stars is carved from the remainder, each
   star vertex-disjoint from its partner part.

Randomized steps take an explicit seed and retry budget; an accepted
sample is always the lowest-numbered valid attempt.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from random import Random
from typing import Optional, Sequence

from .coloring import balance_matchings, vizing_color, MatchingFamily
from .config import DESK, EngineConfig
from .errors import (PreconditionError, RandomizedFailureError, StageError,
                     ValidationError)
from .graphs import (ComponentCensus, Edge, EdgePart, Graph, census,
                     classify_component, norm_edge, part)
from .ktt import ktt_decompose_equal
from .matching import max_bipartite_matching
from .star_forest import StarForestPart, split_divisible, star_forest_decompose, \
    combine_star_forest


@dataclass(frozen=True)
class IsolatedPart:
    """An edge part with a certified isolated matching inside it."""

    part: EdgePart
    isolated: frozenset[Edge]

    def __post_init__(self):
        touched: set[int] = set()
        for u, v in self.part.edges - self.isolated:
            touched.update((u, v))
        seen: set[int] = set()
        for u, v in self.isolated:
            if u in touched or v in touched or u in seen or v in seen:
                raise ValidationError("certificate edges are not isolated")
            seen.update((u, v))


@dataclass(frozen=True)
class IsoFamily:
    parts: tuple[EdgePart, ...]
    shape: ComponentCensus
    divisibility: int


@dataclass(frozen=True)
class StrongFamily:
    parent: Graph
    parts: tuple[EdgePart, ...]
    isolated: tuple[frozenset[Edge], ...]
    stars: tuple[EdgePart, ...]  # sizes non-decreasing; star i disjoint from part i
    remainder: EdgePart

    def star_sizes(self) -> tuple[int, ...]:
        return tuple(s.size for s in self.stars)


# ---------------------------------------------------------------------------
# Matching + divisible forest combiner
# ---------------------------------------------------------------------------

def feasibility_floor(h: Graph) -> float:
    """Matching-size floor sqrt(ln(5)/2 * sum over component groups of
    |V(component)|^2) under which the random split is not guaranteed."""
    total = 0
    for verts, _ in h.components():
        total += len(verts) ** 2
    return math.sqrt(math.log(5) / 2 * total / 5)


def combine_matching_forest(m_part: EdgePart, h: Graph, *,
                            rng: Optional[Random] = None,
                            retry_budget: int = 64,
                            enforce_feasibility: bool = True
                            ) -> list[IsolatedPart]:
    """Split a matching of size 5L plus a 5-divisible forest into five
    parts, each one fifth of the forest plus an L-edge isolated matching.

    The forest's component groups are permuted at random until every
    fifth avoids more than 2L matching edges, then matching edges are
    assigned to fifths by a perfect matching on the avoidance graph.
    """
    host = m_part.parent
    if not h.edges <= host.edges:
        raise ValidationError("forest edges must live in the matching's host")
    if h.edges & m_part.edges:
        raise ValidationError("matching and forest must be edge-disjoint")
    if m_part.size % 5:
        raise PreconditionError("matching size must be divisible by 5")
    if not h.edges:
        raise PreconditionError("forest must be nonempty")
    seen: set[int] = set()
    for u, v in m_part.edges:
        if u in seen or v in seen:
            raise ValidationError("m_part is not a matching")
        seen.update((u, v))

    ell = m_part.size // 5
    groups = _component_groups_of_five(h)
    if enforce_feasibility and ell <= feasibility_floor(h):
        raise PreconditionError(
            f"matching fifth {ell} is not above the feasibility floor "
            f"{feasibility_floor(h):.3f}")

    rng = rng or Random(0)
    m_edges = sorted(m_part.edges)
    for attempt in range(1, retry_budget + 1):
        fifths: list[set[Edge]] = [set() for _ in range(5)]
        for comps in groups:
            order = list(range(5))
            rng.shuffle(order)
            for slot, comp in zip(order, comps):
                fifths[slot] |= comp
        verts = [{x for e in f for x in e} for f in fifths]
        if ell == 0:
            return [IsolatedPart(part(host, f), frozenset()) for f in fifths]
        avoid = [[i for i in range(5) if not ({e[0], e[1]} & verts[i])]
                 for e in m_edges]
        counts = [sum(1 for a in avoid if i in a) for i in range(5)]
        if all(c > 2 * ell for c in counts):
            adj = {ei: [(i, c) for i in avoid[ei] for c in range(ell)]
                   for ei in range(len(m_edges))}
            assign = max_bipartite_matching(adj)
            if len(assign) == len(m_edges):
                out = []
                got: list[list[Edge]] = [[] for _ in range(5)]
                for ei, (i, _) in assign.items():
                    got[i].append(m_edges[ei])
                for i in range(5):
                    iso = frozenset(got[i])
                    assert len(iso) == ell
                    out.append(IsolatedPart(part(host, fifths[i] | iso), iso))
                return out
    raise RandomizedFailureError(
        "no fifth split left every part clear of enough matching edges",
        retry_budget)


def _component_groups_of_five(h: Graph) -> list[list[frozenset[Edge]]]:
    classes: dict[tuple, list[frozenset[Edge]]] = defaultdict(list)
    for verts, ce in h.components():
        classes[classify_component(verts, ce)].append(ce)
    groups = []
    for tag in sorted(classes, key=repr):
        comps = sorted(classes[tag], key=lambda c: sorted(c))
        if len(comps) % 5:
            raise PreconditionError(
                f"component class {tag} count {len(comps)} not divisible by 5")
        for i in range(0, len(comps), 5):
            groups.append(comps[i:i + 5])
    return groups


# ---------------------------------------------------------------------------
# Star-forest layer
# ---------------------------------------------------------------------------

def _default_m(g: Graph, k: int, cfg: EngineConfig) -> int:
    return max(math.isqrt(max(g.size - 1, 0)) + 1, k,
               math.ceil(g.max_degree() / cfg.c), 1)


def _check_entry(g: Graph, k: int, eps: float, m: int, cfg: EngineConfig) -> None:
    if g.max_degree() > cfg.c * m:
        raise PreconditionError(f"max degree {g.max_degree()} > c*m = {cfg.c * m}")
    if g.size > m * m:
        raise PreconditionError(f"e(g) = {g.size} > m^2 = {m * m}")
    if not (eps * m <= k <= m):
        raise PreconditionError(f"k={k} outside [eps*m, m] = [{eps * m}, {m}]")


def approx_star_forest(g: Graph, k: int, eps: float,
                       cfg: EngineConfig = DESK, *,
                       m: Optional[int] = None,
                       rng: Optional[Random] = None
                       ) -> tuple[list[EdgePart], EdgePart, EdgePart]:
    """Decompose g into k isomorphic star-forest-plus-matching parts, a
    sparse leftover r1, and the subgraph r2 induced on large-degree
    vertices."""
    if k < 1:
        raise PreconditionError("k must be positive")
    m = m if m is not None else _default_m(g, k, cfg)
    _check_entry(g, k, eps, m, cfg)
    rng = rng or Random(cfg.seed)

    k5 = math.ceil(k / 5)
    deg = g.degrees()
    large = {v for v in range(g.n) if deg[v] >= k5}
    cross = {e for e in g.edges if (e[0] in large) != (e[1] in large)}
    inside_small = {e for e in g.edges
                    if e[0] not in large and e[1] not in large}
    inside_large = {e for e in g.edges if e[0] in large and e[1] in large}

    bip = Graph(g.n, frozenset(cross))
    small_side = set(range(g.n)) - large
    forests, r0 = star_forest_decompose(bip, (small_side, large), k5)

    r1_edges: set[Edge] = set()
    kept = _drop_star_residues(forests, 5, r1_edges)
    low = r0.edges | inside_small

    parts_pool: list[frozenset[Edge]]
    if len(low) <= eps * eps * m * m or k5 == 0:
        parts_pool = _split_forests_five(g, kept)
        r1_edges |= low
    else:
        classes = [set(mp.edges) for mp in
                   vizing_color(Graph(g.n, frozenset(low))).matchings]
        while len(classes) < k5:
            classes.append(set())
        balanced = balance_matchings(
            MatchingFamily(g, tuple(part(g, c) for c in classes)))
        sizes = balanced.sizes()
        z = min(sizes)
        z -= z % 5
        mats = []
        for mp in balanced.matchings:
            es = sorted(mp.edges)
            mats.append(frozenset(es[:z]))
            r1_edges.update(es[z:])
        if z == 0:
            parts_pool = _split_forests_five(g, kept)
        elif all(not f for f in kept):
            parts_pool = []
            for mat in mats:
                es = sorted(mat)
                step = z // 5
                parts_pool.extend(frozenset(es[j * step:(j + 1) * step])
                                  for j in range(5))
        else:
            parts_pool = []
            for mat, forest in zip(mats, kept):
                pieces = combine_matching_forest(
                    part(g, mat), Graph(g.n, forest), rng=rng,
                    retry_budget=cfg.retry_budget, enforce_feasibility=False)
                parts_pool.extend(p.part.edges for p in pieces)

    out = [part(g, p) for p in parts_pool[:k]]
    for extra in parts_pool[k:]:
        r1_edges |= extra
    while len(out) < k:
        out.append(part(g, frozenset()))
    return out, part(g, r1_edges), part(g, inside_large)


def _drop_star_residues(forests: list[StarForestPart], r: int,
                        spill: set[Edge]) -> list[frozenset[Edge]]:
    """Drop stars (by centre, identically across forests) until every
    star-size class count in each forest is divisible by r."""
    if not forests:
        return []
    sizes_by_centre = {c: len(ls) for c, ls in forests[0].centers.items()}
    by_size: dict[int, list[int]] = defaultdict(list)
    for centre, sz in sizes_by_centre.items():
        by_size[sz].append(centre)
    drop: set[int] = set()
    for sz, centres in by_size.items():
        centres.sort()
        excess = len(centres) % r
        drop.update(centres[len(centres) - excess:])
    kept = []
    for f in forests:
        keep_edges = set()
        for centre, leaves in f.centers.items():
            es = {norm_edge(centre, x) for x in leaves}
            if centre in drop:
                spill |= es
            else:
                keep_edges |= es
        kept.append(frozenset(keep_edges))
    return kept


def _split_forests_five(g: Graph, kept: list[frozenset[Edge]]
                        ) -> list[frozenset[Edge]]:
    pool = []
    for forest in kept:
        if not forest:
            pool.extend(frozenset() for _ in range(5))
        else:
            pool.extend(split_divisible(g, forest, 5))
    return pool


# ---------------------------------------------------------------------------
# Isomorphic layer
# ---------------------------------------------------------------------------

def approx_isomorphic(g: Graph, k: int, eps: float, r: int,
                      cfg: EngineConfig = DESK, *,
                      m: Optional[int] = None,
                      rng: Optional[Random] = None
                      ) -> tuple[IsoFamily, EdgePart]:
    """Decompose g into k isomorphic r-divisible parts with bounded
    components plus a remainder."""
    m = m if m is not None else _default_m(g, k, cfg)
    _check_entry(g, k, eps, m, cfg)
    rng = rng or Random(cfg.seed)

    forests, r1, r2 = approx_star_forest(g, k, eps * eps, cfg, m=m, rng=rng)
    spill: set[Edge] = set(r1.edges)

    threshold = cfg.t ** 0.75 * math.sqrt(m)
    r2_verts = {x for e in r2.edges for x in e}
    if len(r2_verts) <= threshold or not r2.edges:
        parts = _make_divisible(g, [f.edges for f in forests], r, spill)
        spill |= r2.edges
        host_parts = tuple(part(g, p) for p in parts)
    else:
        t_side = max(math.isqrt(cfg.t), 1)
        kd = ktt_decompose_equal(r2.graph(), t_side, k, cfg.dense_coeff)
        spill |= kd.remainder.edges
        block_counts = {len(f.blocks) for f in kd.forests}
        assert len(block_counts) == 1
        keep_blocks = min(block_counts) - min(block_counts) % r
        kf_edges = []
        kf_verts = []
        for f in kd.forests:
            chosen = f.blocks[:keep_blocks]
            edges = frozenset(e for b in chosen
                              for e in _block_edge_set(b))
            for b in f.blocks[keep_blocks:]:
                spill |= _block_edge_set(b)
            kf_edges.append(edges)
            kf_verts.append({x for e in edges for x in e})
        grafted = _graft_stars(g, forests, kf_verts, r, spill)
        host_parts = tuple(part(g, sf | kf)
                           for sf, kf in zip(grafted, kf_edges))

    shape = census(host_parts[0].graph()) if host_parts else census(g)
    fam = IsoFamily(host_parts, shape, r)
    used = set()
    for p in fam.parts:
        used |= p.edges
    remainder = part(g, g.edges - used)
    return fam, remainder


def _block_edge_set(block) -> frozenset[Edge]:
    left, right = block
    return frozenset(norm_edge(a, b) for a in left for b in right)


def _make_divisible(g: Graph, parts: list[frozenset[Edge]], r: int,
                    spill: set[Edge]) -> list[frozenset[Edge]]:
    """Drop whole components per isomorphism class, identically across
    parts, until every class count is divisible by r."""
    if not parts or r <= 1:
        return parts
    out = []
    plans: Optional[dict[tuple, int]] = None
    for p in parts:
        classes: dict[tuple, list[frozenset[Edge]]] = defaultdict(list)
        for verts, ce in Graph(g.n, p).components():
            classes[classify_component(verts, ce)].append(ce)
        if plans is None:
            plans = {tag: len(cs) % r for tag, cs in classes.items()}
        keep: set[Edge] = set()
        for tag, comps in classes.items():
            comps.sort(key=lambda c: sorted(c))
            cut = len(comps) - plans.get(tag, len(comps) % r)
            for c in comps[:cut]:
                keep |= c
            for c in comps[cut:]:
                spill |= c
        out.append(frozenset(keep))
    return out


def _graft_stars(g: Graph, forests: Sequence[EdgePart],
                 kf_verts: list[set[int]], r: int,
                 spill: set[Edge]) -> list[frozenset[Edge]]:
    """Remove stars, identically many per size across parts, so that what
    remains avoids each part's biclique vertices and keeps the star-size
    class counts divisible by r."""
    per_part: list[dict[int, list[tuple[frozenset[int], frozenset[Edge]]]]] = []
    size_counts: Counter = Counter()
    for fp in forests:
        by_size: dict[int, list] = defaultdict(list)
        for verts, ce in Graph(g.n, fp.edges).components():
            by_size[len(ce)].append((verts, ce))
        for sz in by_size:
            by_size[sz].sort(key=lambda vc: sorted(vc[1]))
        per_part.append(by_size)
    if forests:
        size_counts = Counter({sz: len(cs) for sz, cs in per_part[0].items()})

    keep_per_size: dict[int, int] = {}
    for sz, c_x in size_counts.items():
        worst = 0
        for i, by_size in enumerate(per_part):
            hit = sum(1 for verts, _ in by_size.get(sz, ())
                      if verts & kf_verts[i])
            worst = max(worst, hit)
        avail = c_x - worst
        keep_per_size[sz] = max(avail - avail % r, 0) if avail > 0 else 0

    out = []
    for i, by_size in enumerate(per_part):
        keep: set[Edge] = set()
        for sz, comps in by_size.items():
            hit = [vc for vc in comps if vc[0] & kf_verts[i]]
            clear = [vc for vc in comps if not (vc[0] & kf_verts[i])]
            chosen = clear[:keep_per_size[sz]]
            for _, ce in chosen:
                keep |= ce
            for _, ce in hit + clear[keep_per_size[sz]:]:
                spill |= ce
        out.append(frozenset(keep))
    return out


# ---------------------------------------------------------------------------
# Strong layer
# ---------------------------------------------------------------------------

def approx_isomorphic_stronger(g: Graph, k: int, eps: float,
                               cfg: EngineConfig = DESK, *,
                               m: Optional[int] = None,
                               rng: Optional[Random] = None) -> StrongFamily:
    """Decompose g into k isomorphic 2-divisible parts carrying certified
    isolated matchings, an ascending sequence of stars (each
    vertex-disjoint from its partner part), and a low-degree remainder."""
    m = m if m is not None else _default_m(g, k, cfg)
    _check_entry(g, k, eps, m, cfg)
    if g.size < cfg.min_density * m * m:
        raise PreconditionError(
            f"e(g) = {g.size} below the density floor {cfg.min_density} * m^2")
    rng = rng or Random(cfg.seed)

    k20 = math.ceil(k / 20)
    classes = [set(mp.edges) for mp in vizing_color(g).matchings]
    while len(classes) < k20:
        classes.append(set())
    balanced = balance_matchings(
        MatchingFamily(g, tuple(part(g, c) for c in classes)))
    order = sorted(range(len(balanced.matchings)),
                   key=lambda i: (-balanced.matchings[i].size, i))
    chosen = [balanced.matchings[i] for i in order[:k20]]
    z = min(mp.size for mp in chosen)
    z -= z % 40
    if z == 0:
        raise PreconditionError(
            "matching classes too small to extract 40-divisible matchings")
    strip: list[frozenset[Edge]] = []
    for mp in chosen:
        es = sorted(mp.edges)
        strip.append(frozenset(es[:z]))

    rest = g.edges - frozenset(e for s in strip for e in s)
    iso_fam, r1 = approx_isomorphic(Graph(g.n, rest), k20, eps ** 4, 40,
                                    cfg, m=m, rng=rng)

    pool: list[IsolatedPart] = []
    for mat, hp in zip(strip, iso_fam.parts):
        if not hp.edges:
            es = sorted(mat)
            step = z // 5
            for j in range(5):
                chunk = frozenset(es[j * step:(j + 1) * step])
                pool.append(IsolatedPart(part(g, chunk), chunk))
        else:
            pool.extend(combine_matching_forest(
                part(g, mat), Graph(g.n, hp.edges), rng=rng,
                retry_budget=cfg.retry_budget, enforce_feasibility=False))

    stars, r2_edges = _ascending_even_stars(Graph(g.n, r1.edges))
    if len(stars) > len(pool):
        for extra in stars[len(pool):]:
            r2_edges |= extra[1]
        stars = stars[:len(pool)]

    pairs: list[tuple[frozenset[Edge], frozenset[Edge], frozenset[Edge]]] = []
    for i, ip in enumerate(pool):
        if i < len(stars):
            centre, star_edges = stars[i]
            hp, sp = combine_star_forest(
                ip.part.graph(), part(g, star_edges))
            for hq, sq in zip(hp, sp):
                iso_cert = _isolated_edges_of(g, hq.edges)
                pairs.append((hq.edges, iso_cert, sq.edges))
        else:
            for quarter in split_divisible(g, ip.part.edges, 4):
                pairs.append((quarter, _isolated_edges_of(g, quarter),
                              frozenset()))

    drop_needed = len(pairs) - k
    if drop_needed < 0:
        raise StageError("stronger", f"only {len(pairs)} parts for k={k}")
    empties = [i for i, pr in enumerate(pairs) if not pr[2]]
    if len(empties) < drop_needed:
        raise StageError(
            "stronger",
            f"cannot drop {drop_needed} empty-star pairs, only {len(empties)}")
    dropped = set(empties[:drop_needed])
    spill = set(r2_edges)
    kept_pairs = []
    for i, pr in enumerate(pairs):
        if i in dropped:
            spill |= pr[0]
        else:
            kept_pairs.append(pr)
    kept_pairs.sort(key=lambda pr: (len(pr[2]), sorted(pr[0])))

    parts_t = tuple(part(g, pr[0]) for pr in kept_pairs)
    iso_t = tuple(frozenset(pr[1]) for pr in kept_pairs)
    stars_t = tuple(part(g, pr[2]) for pr in kept_pairs)
    fam = StrongFamily(g, parts_t, iso_t, stars_t, part(g, spill))
    _validate_strong(fam)
    return fam


def _isolated_edges_of(g: Graph, edges: frozenset[Edge]) -> frozenset[Edge]:
    deg = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return frozenset(e for e in edges if deg[e[0]] == 1 and deg[e[1]] == 1)


def _ascending_even_stars(rem: Graph
                          ) -> tuple[list[tuple[int, frozenset[Edge]]], set[Edge]]:
    """Greedy maximal sequence of edge-disjoint stars of sizes 2, 4, 6, ...
    carved from the remainder; returns (centre, edges) pairs and what is
    left."""
    edges = set(rem.edges)
    out = []
    i = 1
    while True:
        deg = Counter()
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        if not deg:
            break
        centre = max(deg, key=lambda v: (deg[v], -v))
        if deg[centre] < 2 * i:
            break
        incident = sorted(e for e in edges if centre in e)[:2 * i]
        out.append((centre, frozenset(incident)))
        edges -= set(incident)
        i += 1
    return out, edges


def _validate_strong(fam: StrongFamily) -> None:
    sizes = fam.star_sizes()
    if any(b - a not in (0, 1) for a, b in zip(sizes, sizes[1:])):
        raise StageError("stronger", f"star sizes not ascending: {sizes}")
    for ip, sp in zip(fam.parts, fam.stars):
        if ip.vertices() & sp.vertices():
            raise StageError("stronger", "part and its star share a vertex")
    for ip, iso in zip(fam.parts, fam.isolated):
        IsolatedPart(ip, iso)
