"""Independent validation of decompositions.

verify_decomposition checks exact edge-disjoint cover, the size formula,
and every consecutive ascending pair -- via witness validation when
witnesses are present, otherwise by an embedding search.  embeds() decides
subgraph containment with a structured fast path for component-shaped
graphs and a bounded backtracking fallback; instances beyond both report
UNDECIDED rather than guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .decomp import (Decomposition, EmbeddingWitness, expected_sizes,
                     validate_witness, witness_between)
from .graphs import (Edge, Graph, classify_component, norm_edge)
from .matching import max_bipartite_matching

BACKTRACK_CAP = 24

UNDECIDED = "undecided"


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    failures: tuple[tuple[str, int, str], ...]  # (check, index, detail)
    undecided: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "failures": [list(f) for f in self.failures],
            "undecided": list(self.undecided),
        }


# ---------------------------------------------------------------------------
# Embedding search
# ---------------------------------------------------------------------------

def _components(edges: frozenset[Edge]):
    g = Graph(max((v for e in edges for v in e), default=-1) + 1, edges)
    return g.components()


def _star_centre(verts, edges) -> int:
    if len(edges) == 1:
        return min(min(e) for e in edges)
    from collections import Counter
    deg = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return max(deg, key=lambda v: (deg[v], -v))


def _embed_star_into_star(sv, se, tv, te) -> dict[int, int]:
    sc = _star_centre(sv, se)
    tc = _star_centre(tv, te)
    s_leaves = sorted(sv - {sc})
    t_leaves = sorted(tv - {tc})
    vmap = {sc: tc}
    for a, b in zip(s_leaves, t_leaves):
        vmap[a] = b
    return vmap


def _backtrack_embed(small_edges: frozenset[Edge], big_edges: frozenset[Edge]
                     ) -> Optional[dict[int, int]]:
    """Plain backtracking subgraph-isomorphism: map the small graph's
    non-isolated vertices injectively so edges land on edges."""
    s_verts = sorted({v for e in small_edges for v in e})
    b_verts = sorted({v for e in big_edges for v in e})
    if len(small_edges) > len(big_edges) or len(s_verts) > len(b_verts):
        return None
    s_adj = {v: set() for v in s_verts}
    for u, v in small_edges:
        s_adj[u].add(v)
        s_adj[v].add(u)
    b_adj = {v: set() for v in b_verts}
    for u, v in big_edges:
        b_adj[u].add(v)
        b_adj[v].add(u)
    # Order: vertices with most already-placed neighbours first, then degree.
    order: list[int] = []
    placed = set()
    pool = set(s_verts)
    while pool:
        v = max(pool, key=lambda x: (len(s_adj[x] & placed), len(s_adj[x]), -x))
        order.append(v)
        placed.add(v)
        pool.remove(v)
    vmap: dict[int, int] = {}
    used: set[int] = set()

    def rec(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        anchored = [w for w in s_adj[v] if w in vmap]
        if anchored:
            cands = set(b_adj[vmap[anchored[0]]])
            for w in anchored[1:]:
                cands &= b_adj[vmap[w]]
            cands -= used
        else:
            cands = set(b_verts) - used
        for c in sorted(cands):
            if len(b_adj[c]) < len(s_adj[v]):
                continue
            vmap[v] = c
            used.add(c)
            if rec(i + 1):
                return True
            del vmap[v]
            used.remove(c)
        return False

    return dict(vmap) if rec(0) else None


def _component_embeddable(sv, se, tv, te) -> Optional[dict[int, int]]:
    s_tag = classify_component(sv, se)
    t_tag = classify_component(tv, te)
    if s_tag[0] == "star" and t_tag[0] == "star":
        if s_tag[1] <= t_tag[1]:
            return _embed_star_into_star(sv, se, tv, te)
        return None
    if s_tag == t_tag and s_tag[0] != "opaque":
        return _backtrack_embed(se, te)
    if len(sv) <= BACKTRACK_CAP and len(tv) <= BACKTRACK_CAP:
        return _backtrack_embed(se, te)
    return None


def _structured_embed(small_edges: frozenset[Edge], big_edges: frozenset[Edge]
                      ) -> Optional[dict[int, int]]:
    """One-to-one component assignment via bipartite matching.

    Sound but not complete: two small components can in principle pack
    into one big component, which this path will not find.
    """
    s_comps = _components(small_edges)
    t_comps = _components(big_edges)
    if len(s_comps) > len(t_comps):
        return None
    adj = {}
    maps = {}
    for i, (sv, se) in enumerate(s_comps):
        opts = []
        for j, (tv, te) in enumerate(t_comps):
            if len(se) > len(te) or len(sv) > len(tv):
                continue
            m = _component_embeddable(sv, se, tv, te)
            if m is not None:
                opts.append(j)
                maps[(i, j)] = m
        if not opts:
            return None
        adj[i] = opts
    assign = max_bipartite_matching(adj)
    if len(assign) != len(s_comps):
        return None
    vmap: dict[int, int] = {}
    for i, j in assign.items():
        vmap.update(maps[(i, j)])
    return vmap


def _all_stars(edges: frozenset[Edge]) -> Optional[list[int]]:
    sizes = []
    for verts, ce in _components(edges):
        tag = classify_component(verts, ce)
        if tag[0] != "star":
            return None
        sizes.append(tag[1])
    return sorted(sizes, reverse=True)


EmbedsResult = Union[EmbeddingWitness, None, str]


def embeds(h1: Graph, h2: Graph) -> EmbedsResult:
    """Witness that h1 embeds into h2, None if it provably does not, or
    UNDECIDED when the instance exceeds the search cap."""
    e1, e2 = h1.edges, h2.edges
    if len(e1) > len(e2):
        return None
    if not e1:
        return _finish(e1, e2, {})
    s1, s2 = _all_stars(e1), _all_stars(e2)
    if s1 is not None and s2 is not None:
        # Star forests: each target star hosts at most one source star, so
        # the sorted size comparison is exact.
        if any(a > b for a, b in zip(s1, s2)):
            return None
    vmap = _structured_embed(e1, e2)
    if vmap is not None:
        return _finish(e1, e2, vmap)
    if s1 is not None and s2 is not None:
        return None
    nv = len({v for e in (e1 | e2) for v in e})
    if nv <= BACKTRACK_CAP or len({v for e in e1 for v in e}) <= BACKTRACK_CAP:
        vmap = _backtrack_embed(e1, e2)
        if vmap is None:
            return None
        return _finish(e1, e2, vmap)
    return UNDECIDED


def _finish(e1, e2, vmap) -> Union[EmbeddingWitness, str]:
    # Witnesses certify ascending pairs, so they only exist when the sizes
    # differ by at most one; otherwise report the raw embedding as found.
    if len(e2) - len(e1) > 1:
        return UNDECIDED
    return witness_between(e1, e2, vmap)


def ascending_witness(e1: frozenset[Edge], e2: frozenset[Edge],
                      parent_n: int) -> Optional[EmbeddingWitness]:
    """Search for a full-image witness between two parts of a host graph."""
    res = embeds(Graph(parent_n, e1), Graph(parent_n, e2))
    return res if isinstance(res, EmbeddingWitness) else None


# ---------------------------------------------------------------------------
# Decomposition verification
# ---------------------------------------------------------------------------

def verify_decomposition(g: Graph, d: Decomposition) -> VerifyReport:
    failures: list[tuple[str, int, str]] = []
    undecided: list[int] = []

    seen: dict[Edge, int] = {}
    for i, p in enumerate(d.parts):
        for e in p:
            if e in seen:
                failures.append(("disjoint", i, f"edge {e} also in part {seen[e]}"))
            seen[e] = i
            if e not in g.edges:
                failures.append(("cover", i, f"edge {e} not in the host graph"))
    missing = g.edges - set(seen)
    if missing:
        failures.append(("cover", -1, f"{len(missing)} host edges uncovered"))

    want = expected_sizes(g.size)
    if d.sizes != want:
        failures.append(("sizes", -1, f"got {d.sizes}, want {want}"))

    for i in range(len(d.parts) - 1):
        small, big = d.parts[i], d.parts[i + 1]
        w = d.witnesses[i] if i < len(d.witnesses) else None
        if w is not None:
            reason = validate_witness(small, big, w)
            if reason is not None:
                failures.append(("ascending", i, reason))
            continue
        res = embeds(Graph(g.n, small), Graph(g.n, big))
        if res is UNDECIDED:
            undecided.append(i)
        elif res is None:
            failures.append(("ascending", i, "no embedding exists"))

    ok = not failures and not undecided
    return VerifyReport(ok, tuple(failures), tuple(undecided))
