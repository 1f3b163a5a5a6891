"""Ascending chains from isomorphic part families.

The slicing scheme: each of the first `rows` parts is split once into a
prefix and the complementary suffix, at cut points that advance by one
edge per row; the prefixes are emitted in increasing order, then the
suffixes in decreasing row order, so sizes rise by one almost everywhere
and stay flat exactly where the +/- cut polarity swaps.  Tail rows
contribute a fixed suffix plus their (ascending) stars.  Because all
parts carry the same edge order up to isomorphism, every consecutive
pair gets an explicit vertex-map witness.

Stripping then removes a random isolated matching from each chain part
so sizes match the required ascending size sequence exactly, retrying
the sample until the union of removed edges has small maximum degree.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from random import Random
from typing import Optional, Sequence

from .assembler import StrongFamily, approx_isomorphic_stronger
from .coloring import matching_asd
from .config import DESK, EngineConfig
from .decomp import (Decomposition, EmbeddingWitness, make_decomposition,
                     size_profile, witness_between)
from .errors import (PreconditionError, RandomizedFailureError, StageError,
                     ValidationError)
from .graphs import (Edge, EdgePart, Graph, canonical_labeling,
                     classify_component, norm_edge, part)
from .verifier import ascending_witness, verify_decomposition


@dataclass(frozen=True)
class PartOrder:
    """One part's edges in slicing order, with alignment certificates."""

    edges: tuple[Edge, ...]          # length 2 * half
    iso_prefix: int                  # edges[:iso_prefix] is an isolated matching
    half_map: dict[int, int]         # prefix vertices -> suffix vertices


@dataclass(frozen=True)
class SlicePlan:
    m: int
    base: int        # chain occupies positions base+1 .. m
    rows: int        # parts split into prefix/suffix pairs
    tail_rows: int   # parts emitted whole (minus a stub) with their stars
    pad: int         # first prefix has pad + base + 2 edges
    half: int        # each part has 2 * half edges
    swap_at: int     # row where prefix slicing switches polarity
    tail_tie: int    # tail row pinned to its successor's star size
    orders: tuple[PartOrder, ...]
    cross_maps: tuple[dict[int, int], ...]  # part i -> part i+1 vertex maps


@dataclass(frozen=True)
class AscendingChain:
    parent: Graph
    start: int  # index of the first part (chain part j has index start+j)
    parts: tuple[frozenset[Edge], ...]
    witnesses: tuple[EmbeddingWitness, ...]


@dataclass(frozen=True)
class StripPlan:
    targets: tuple[int, ...]
    seed: int
    max_degree_bound: int
    retry_budget: int = 64


# ---------------------------------------------------------------------------
# Edge ordering and alignment
# ---------------------------------------------------------------------------

def _ordered_components(g: Graph, edges: frozenset[Edge]):
    """Components grouped by class, isolated edges first, each component's
    edges sorted by canonical label; returns a list of
    (class_key, canon_vertex_map, ordered_edges)."""
    groups: dict[tuple, list[tuple[dict[int, int], list[Edge]]]] = defaultdict(list)
    for verts, ce in Graph(g.n, edges).components():
        code, lab = canonical_labeling(verts, ce)
        ordered = sorted(ce, key=lambda e: tuple(sorted((lab[e[0]], lab[e[1]]))))
        groups[code].append((lab, ordered))
    def class_rank(code):
        return (0 if len(code) == 1 else 1, code)
    out = []
    for code in sorted(groups, key=class_rank):
        comps = sorted(groups[code], key=lambda c: c[1])
        for lab, ordered in comps:
            out.append((code, lab, ordered))
    return out


def order_part(g: Graph, edges: frozenset[Edge]) -> PartOrder:
    """Slicing order for a 2-divisible part: the components split into two
    isomorphic halves, first-half edges first (isolated edges leading),
    second half mirrored so edge j pairs with edge half+j."""
    comps = _ordered_components(g, edges)
    by_code: dict[tuple, list] = defaultdict(list)
    for code, lab, ordered in comps:
        by_code[code].append((lab, ordered))
    first: list[tuple[dict, list[Edge]]] = []
    second: list[tuple[dict, list[Edge]]] = []
    for code in sorted(by_code, key=lambda c: (0 if len(c) == 1 else 1, c)):
        cs = by_code[code]
        if len(cs) % 2:
            raise PreconditionError("part is not 2-divisible")
        half_n = len(cs) // 2
        first.extend(cs[:half_n])
        second.extend(cs[half_n:])
    prefix: list[Edge] = []
    suffix: list[Edge] = []
    half_map: dict[int, int] = {}
    for (lab_a, es_a), (lab_b, es_b) in zip(first, second):
        inv_b = {c: v for v, c in lab_b.items()}
        for v, c in lab_a.items():
            half_map[v] = inv_b[c]
        prefix.extend(es_a)
        suffix.extend(norm_edge(half_map[u], half_map[v]) for u, v in es_a)
    iso_prefix = 0
    for lab_a, es_a in first:
        if len(es_a) == 1:
            iso_prefix += 1
        else:
            break
    return PartOrder(tuple(prefix + suffix), iso_prefix, half_map)


def align_parts(a: PartOrder, b: PartOrder) -> dict[int, int]:
    """Vertex map sending a.edges[j] onto b.edges[j] for every j, built
    from the canonical labels of the aligned components."""
    n = len(a.edges)
    vmap: dict[int, int] = {}
    # Both orders were produced component-aligned with canonical edge
    # order, so matching canonical labels within aligned components gives
    # the map; recover component boundaries by walking the edge lists.
    used = {}
    comps_a = _split_runs(a.edges[: n // 2])
    comps_b = _split_runs(b.edges[: n // 2])
    if [len(c) for c in comps_a] != [len(c) for c in comps_b]:
        raise StageError("slice", "parts are not aligned")
    for ca, cb in zip(comps_a, comps_b):
        _, lab_a = canonical_labeling({v for e in ca for v in e}, ca)
        _, lab_b = canonical_labeling({v for e in cb for v in e}, cb)
        inv_b = {c: v for v, c in lab_b.items()}
        for v, c in lab_a.items():
            vmap[v] = inv_b[c]
    for v, w in a.half_map.items():
        vmap[w] = b.half_map[vmap[v]]
    return vmap


def _split_runs(edges: Sequence[Edge]) -> list[list[Edge]]:
    """Split an ordered edge list back into its connected components."""
    out: list[list[Edge]] = []
    cur: list[Edge] = []
    cur_verts: set[int] = set()
    for e in edges:
        if cur and not (cur_verts & set(e)):
            out.append(cur)
            cur, cur_verts = [], set()
        cur.append(e)
        cur_verts.update(e)
    if cur:
        out.append(cur)
    return _merge_runs(out)


def _merge_runs(runs: list[list[Edge]]) -> list[list[Edge]]:
    # Components whose canonical edge order interleaves never split, but
    # two runs of one component can appear when its edges alternate; merge
    # runs sharing vertices.
    out: list[list[Edge]] = []
    for run in runs:
        verts = {v for e in run for v in e}
        merged = False
        for prev in out:
            if {v for e in prev for v in e} & verts:
                prev.extend(run)
                merged = True
                break
        if not merged:
            out.append(list(run))
    return out


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------

def plan_slice(m: int, base: int, family: StrongFamily,
               t_request: Optional[int] = None,
               cfg: EngineConfig = DESK) -> SlicePlan:
    """Derive the slicing parameters for a family covering positions
    base+1..m and precompute the edge orders and alignment maps."""
    count = len(family.parts)
    rows = m - base - count
    tail = 2 * count - (m - base)
    if rows < 2 or tail < 1:
        raise PreconditionError(
            f"family of {count} parts cannot slice into m-base={m - base}: "
            f"rows={rows}, tail={tail}")
    sizes = {p.size for p in family.parts}
    if len(sizes) != 1:
        raise StageError("slice", f"parts have mixed sizes {sizes}")
    two_h = sizes.pop()
    if two_h % 2:
        raise StageError("slice", "parts must have an even edge count")
    half = two_h // 2
    pad = half - rows - base
    if pad < 0:
        raise PreconditionError(f"parts too small: pad={pad} negative")
    if cfg.profile == "paper":
        lo, hi = base * base / (3 * m), 2 * base * base / (3 * m)
        if not (lo <= pad <= hi):
            raise PreconditionError(
                f"pad={pad} outside [{lo}, {hi}] under the paper profile")

    swap_at, tail_tie = _pick_plateaus(t_request, base, rows, tail)
    # Stars must be empty through the first tail row: the chain reuses the
    # split rows whole and crosses into the tail by an exact isomorphism.
    for i in range(rows + 1):
        if family.stars[i].size:
            raise StageError("slice", f"row {i} has a nonempty star")
    if tail_tie < tail:
        s1 = family.stars[rows + tail_tie - 1].size
        s2 = family.stars[rows + tail_tie].size
        if s1 != s2:
            raise StageError(
                "slice", f"tail row {tail_tie} star sizes {s1} != {s2}; "
                "pin the family first")

    orders = tuple(order_part(family.parent, p.edges) for p in family.parts)
    cross = tuple(align_parts(orders[i], orders[i + 1])
                  for i in range(count - 1))
    plan = SlicePlan(m, base, rows, tail, pad, half, swap_at, tail_tie,
                     orders, cross)
    need = pad + base + 2
    if half < need:
        raise PreconditionError(f"half={half} < pad+base+2={need}")
    return plan


def _pick_plateaus(t_request: Optional[int], base: int, rows: int,
                   tail: int) -> tuple[int, int]:
    if t_request is None:
        return 1, tail
    d = t_request - base
    if not (1 <= d <= 2 * rows + tail):
        raise PreconditionError(
            f"requested plateau {t_request} outside [base+1, m]")
    if d <= rows - 1:
        return d, tail
    if d == rows or d == 2 * rows:
        return 1, tail
    if d < 2 * rows:
        return 2 * rows - d, tail
    return 1, d - 2 * rows


def pin_star_plateau(family: StrongFamily, rows: int, tail_tie: int
                     ) -> tuple[StrongFamily, int]:
    """Move one edge from each star after the tie row into the remainder
    so the tie row's star size matches its successor's; returns the
    adjusted family and the number of stars skipped for being empty."""
    idx = rows + tail_tie - 1
    if idx + 1 >= len(family.stars):
        return family, 0
    if family.stars[idx].size == family.stars[idx + 1].size:
        return family, 0
    stars = list(family.stars)
    spill: set[Edge] = set(family.remainder.edges)
    skipped = 0
    for j in range(idx + 1, len(stars)):
        if stars[j].size == 0:
            skipped += 1
            continue
        drop = max(stars[j].edges)
        spill.add(drop)
        stars[j] = part(family.parent, stars[j].edges - {drop})
    out = StrongFamily(family.parent, family.parts, family.isolated,
                       tuple(stars), part(family.parent, spill))
    sizes = out.star_sizes()
    if any(b - a not in (0, 1) for a, b in zip(sizes, sizes[1:])):
        raise StageError("slice", f"pinning broke star sizes: {sizes}")
    return out, skipped


# ---------------------------------------------------------------------------
# Slicing
# ---------------------------------------------------------------------------

def _restrict(vmap: dict[int, int], edges: frozenset[Edge]) -> dict[int, int]:
    verts = {v for e in edges for v in e}
    return {v: vmap[v] for v in verts}


def _star_map(small: frozenset[Edge], big: frozenset[Edge]) -> dict[int, int]:
    if not small:
        return {}
    def centre_leaves(es):
        deg = Counter()
        for u, v in es:
            deg[u] += 1
            deg[v] += 1
        if len(es) == 1:
            e = next(iter(es))
            return e[0], [e[1]]
        c = max(deg, key=lambda v: (deg[v], -v))
        return c, sorted(x for e in es for x in e if x != c)
    cs, ls = centre_leaves(small)
    cb, lb = centre_leaves(big)
    out = {cs: cb}
    for a, b in zip(ls, lb):
        out[a] = b
    return out


def triangle_slice(family: StrongFamily, plan: SlicePlan
                   ) -> tuple[AscendingChain, EdgePart]:
    """Slice the family into the ascending chain F_{base+1}..F_m plus the
    spill part (family remainder and the tail rows' leading stubs)."""
    g = family.parent
    rows, tail, pad, base, half = (plan.rows, plan.tail_rows, plan.pad,
                                   plan.base, plan.half)
    if len(family.parts) != rows + tail:
        raise StageError("slice", "plan and family disagree on part count")

    orders = plan.orders
    cut0 = pad + base  # prefix length of row 1's minus-slice
    prefixes_plus = []
    prefixes_minus = []
    suffixes_plus = []
    suffixes_minus = []
    for i in range(1, rows + 1):
        es = orders[i - 1].edges
        cut = cut0 + i
        prefixes_plus.append(frozenset(es[:cut + 1]))
        prefixes_minus.append(frozenset(es[:cut]))
        suffixes_plus.append(frozenset(es[cut + 1:]))
        suffixes_minus.append(frozenset(es[cut:]))
    tails = []
    stub = pad + base + 2
    spill: set[Edge] = set(family.remainder.edges)
    for j in range(tail):
        es = orders[rows + j].edges
        spill.update(es[:stub])
        tails.append(frozenset(es[stub:]) | family.stars[rows + j].edges)

    sw = plan.swap_at
    chain_parts: list[frozenset[Edge]] = []
    for i in range(1, rows + 1):
        chain_parts.append(prefixes_plus[i - 1] if i <= sw
                           else prefixes_minus[i - 1])
    for i in range(rows, 0, -1):
        chain_parts.append(suffixes_minus[i - 1] if i > sw
                           else suffixes_plus[i - 1])
    chain_parts.extend(tails)

    witnesses: list[EmbeddingWitness] = []
    # Ascending prefixes: row i maps into row i+1 by the alignment map.
    for i in range(1, rows):
        small = chain_parts[i - 1]
        big = chain_parts[i]
        witnesses.append(witness_between(
            small, big, _restrict(plan.cross_maps[i - 1], small)))
    # Crossing from the last prefix to the last suffix inside row `rows`.
    small = chain_parts[rows - 1]
    witnesses.append(witness_between(
        small, chain_parts[rows], _restrict(orders[rows - 1].half_map, small)))
    # Descending suffixes: row i+1 maps into row i by the inverse map.
    for pos in range(rows, 2 * rows - 1):
        i = 2 * rows - pos  # suffix at `pos` belongs to row i, next to i-1
        small = chain_parts[pos]
        inv = {w: v for v, w in plan.cross_maps[i - 2].items()}
        witnesses.append(witness_between(
            small, chain_parts[pos + 1], _restrict(inv, small)))
    # Last suffix (row 1) into the first tail row.
    small = chain_parts[2 * rows - 1]
    first_to_tail = align_parts(orders[0], orders[rows])
    witnesses.append(witness_between(small, chain_parts[2 * rows],
                                     _restrict(first_to_tail, small)))
    # Tail rows: suffix alignment plus star into star.
    for j in range(tail - 1):
        small = chain_parts[2 * rows + j]
        pi = rows + j
        h_small = frozenset(orders[pi].edges[stub:])
        vmap = _restrict(plan.cross_maps[pi], h_small)
        vmap.update(_star_map(family.stars[pi].edges,
                              family.stars[pi + 1].edges))
        witnesses.append(witness_between(small, chain_parts[2 * rows + j + 1],
                                         vmap))

    chain = AscendingChain(g, base + 1, tuple(chain_parts), tuple(witnesses))
    _check_plateaus(chain, plan, family)
    return chain, part(g, spill)


def plateau_offsets(chain: AscendingChain) -> set[int]:
    sizes = [len(p) for p in chain.parts]
    return {i + 1 for i in range(len(sizes) - 1) if sizes[i] == sizes[i + 1]}


def _check_plateaus(chain: AscendingChain, plan: SlicePlan,
                    family: StrongFamily) -> None:
    rows, tail = plan.rows, plan.tail_rows
    want = {plan.swap_at, rows, 2 * rows - plan.swap_at, 2 * rows}
    star_sizes = [family.stars[rows + j].size for j in range(tail)]
    for j in range(tail - 1):
        if star_sizes[j] == star_sizes[j + 1]:
            want.add(2 * rows + j + 1)
    got = plateau_offsets(chain)
    if got != {w for w in want if w <= len(chain.parts) - 1}:
        raise StageError("slice", f"plateaus {sorted(got)} != {sorted(want)}")


# ---------------------------------------------------------------------------
# Stripping
# ---------------------------------------------------------------------------

def isolated_edges(edges: frozenset[Edge]) -> list[Edge]:
    deg = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return sorted(e for e in edges if deg[e[0]] == 1 and deg[e[1]] == 1)


def strip_matchings(chain: AscendingChain, plan: StripPlan
                    ) -> tuple[AscendingChain, EdgePart]:
    """Remove a random isolated matching of the excess size from every
    chain part, retrying whole samples until the union of removals has
    max degree within the bound; the stripped chain is re-certified."""
    if len(plan.targets) != len(chain.parts):
        raise ValidationError("one target per chain part")
    excesses = []
    pools = []
    for p, want in zip(chain.parts, plan.targets):
        x = len(p) - want
        pool = isolated_edges(p)
        if x < 0 or x > len(pool):
            raise StageError(
                "strip", f"part of size {len(p)} cannot reach {want} "
                f"with {len(pool)} isolated edges")
        excesses.append(x)
        pools.append(pool)

    rng = Random(plan.seed)
    for attempt in range(1, plan.retry_budget + 1):
        removed = [frozenset(rng.sample(pool, x)) if x else frozenset()
                   for pool, x in zip(pools, excesses)]
        deg = Counter()
        for rm in removed:
            for u, v in rm:
                deg[u] += 1
                deg[v] += 1
        if not deg or max(deg.values()) <= plan.max_degree_bound:
            break
    else:
        raise RandomizedFailureError(
            f"no sample met the degree bound {plan.max_degree_bound}",
            plan.retry_budget)

    new_parts = tuple(p - rm for p, rm in zip(chain.parts, removed))
    witnesses = []
    for i in range(len(new_parts) - 1):
        if not excesses[i] and not excesses[i + 1]:
            witnesses.append(chain.witnesses[i])
            continue
        w = ascending_witness(new_parts[i], new_parts[i + 1], chain.parent.n)
        if w is None:
            raise StageError("strip", f"pair {i} lost its ascent")
        witnesses.append(w)
    f_edges = frozenset(e for rm in removed for e in rm)
    return (AscendingChain(chain.parent, chain.start, new_parts,
                           tuple(witnesses)),
            part(chain.parent, f_edges))


# ---------------------------------------------------------------------------
# Bounded-degree ascending decomposition
# ---------------------------------------------------------------------------

def asd_bounded_degree(g: Graph, cfg: EngineConfig = DESK,
                       rng: Optional[Random] = None) -> Decomposition:
    """Ascending decomposition for graphs whose max degree is at most c*m.

    Uses the matching route directly when the degree bound allows it;
    otherwise runs the full pipeline: strong decomposition, star-plateau
    pinning, slicing, stripping, and a matching decomposition of the
    stripped edges plus the remainder for the head positions.
    """
    e = g.size
    if e == 0:
        raise PreconditionError("graph has no edges")
    m, t = size_profile(e)
    if g.max_degree() > cfg.c * m:
        raise PreconditionError(
            f"max degree {g.max_degree()} > c*m = {cfg.c * m}")
    if g.max_degree() <= m // 2 - 1:
        return matching_asd(g)

    rng = rng or Random(cfg.seed)
    base = int(cfg.delta * m)
    if base < 4:
        raise StageError("plan", f"base={base} too small; the matching route "
                                 f"was unavailable and the strong route needs "
                                 f"a real head block")
    tail = max(int(cfg.eps * m), 1)
    if (m - base - tail) % 2:
        tail += 1
    rows = (m - base - tail) // 2
    if rows < 2:
        raise StageError("plan", f"rows={rows} < 2 at m={m}")

    family = approx_isomorphic_stronger(g, rows + tail, cfg.eps ** 2, cfg,
                                        m=m, rng=rng)
    t_request = t if t >= base + 1 else None
    swap_at, tail_tie = _pick_plateaus(t_request, base, rows, tail)
    family, _ = pin_star_plateau(family, rows, tail_tie)
    plan = plan_slice(m, base, family, t_request, cfg)
    chain, spill = triangle_slice(family, plan)

    targets = tuple(i if i <= t else i - 1
                    for i in range(base + 1, m + 1))
    bound = max(1, base // cfg.strip_degree_div)
    stripped, f_part = strip_matchings(
        chain, StripPlan(targets, cfg.seed, bound, cfg.retry_budget))

    head_edges = f_part.edges | spill.edges
    head_graph = Graph(g.n, head_edges)
    mh, th = size_profile(len(head_edges))
    if mh != base:
        raise StageError("strip", f"head block has profile m={mh}, want {base}")
    head = matching_asd(head_graph)

    seam = ascending_witness(head.parts[-1], stripped.parts[0], g.n)
    if seam is None:
        raise StageError("seam", "head matching does not embed in the chain")
    parts = list(head.parts) + list(stripped.parts)
    witnesses = list(head.witnesses) + [seam] + list(stripped.witnesses)
    result = make_decomposition(g, parts, witnesses)
    report = verify_decomposition(g, result)
    if not report.ok:
        raise StageError("verify", f"self-check failed: {report.failures[:3]}")
    return result
