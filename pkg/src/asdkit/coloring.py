"""Matching-level primitives: edge colorings, balancing, matching ASDs.

vizing_color partitions any simple graph into at most Delta+1 matchings by
fan recoloring; konig_color partitions a bipartite graph into exactly
Delta matchings by alternating-path swaps.  balance_matchings equalizes a
family of edge-disjoint matchings to sizes within one of each other.
matching_asd combines these into an ascending decomposition into matchings
for graphs of small maximum degree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .decomp import (Decomposition, EmbeddingWitness, make_decomposition,
                     size_profile, witness_between)
from .errors import PreconditionError, ValidationError
from .graphs import Edge, EdgePart, Graph, norm_edge, part

NO_COLOR = -1


@dataclass(frozen=True)
class MatchingFamily:
    parent: Graph
    matchings: tuple[EdgePart, ...]

    def __post_init__(self):
        seen: set[Edge] = set()
        for mp in self.matchings:
            verts: set[int] = set()
            for u, v in mp.edges:
                if u in verts or v in verts:
                    raise ValidationError("part is not a matching")
                verts.update((u, v))
                if (u, v) in seen:
                    raise ValidationError("matchings share an edge")
                seen.add((u, v))

    def sizes(self) -> tuple[int, ...]:
        return tuple(mp.size for mp in self.matchings)


def _family(parent: Graph, classes: list[set[Edge]]) -> MatchingFamily:
    return MatchingFamily(parent, tuple(part(parent, c) for c in classes))


# ---------------------------------------------------------------------------
# Vizing coloring via fan recoloring
# ---------------------------------------------------------------------------

class _Coloring:
    def __init__(self, g: Graph, colors: int):
        self.g = g
        self.colors = colors
        self.by_vertex: list[dict[int, int]] = [dict() for _ in range(g.n)]
        # by_vertex[v][c] = neighbour joined to v by the c-colored edge

    def color_of(self, u: int, v: int) -> int:
        for c, w in self.by_vertex[u].items():
            if w == v:
                return c
        return NO_COLOR

    def set_color(self, u: int, v: int, c: int) -> None:
        old = self.color_of(u, v)
        if old != NO_COLOR:
            del self.by_vertex[u][old]
            del self.by_vertex[v][old]
        if c != NO_COLOR:
            self.by_vertex[u][c] = v
            self.by_vertex[v][c] = u

    def free_at(self, v: int) -> int:
        for c in range(self.colors):
            if c not in self.by_vertex[v]:
                return c
        raise AssertionError("no free color; bound violated")

    def is_free(self, v: int, c: int) -> bool:
        return c not in self.by_vertex[v]


def vizing_color(g: Graph) -> MatchingFamily:
    """Partition E(g) into at most Delta+1 matchings."""
    delta = g.max_degree()
    if delta == 0:
        return MatchingFamily(g, ())
    col = _Coloring(g, delta + 1)
    for u, v in sorted(g.edges):
        _color_one(col, u, v)
    classes: list[set[Edge]] = [set() for _ in range(delta + 1)]
    for u, v in g.edges:
        c = col.color_of(u, v)
        assert c != NO_COLOR
        classes[c].add((u, v))
    return _family(g, [c for c in classes if c])


def _color_one(col: _Coloring, u: int, v: int) -> None:
    # Maximal fan at u starting from v: each next edge's color is free at
    # the previous fan vertex.
    fan = [v]
    in_fan = {v}
    while True:
        tail = fan[-1]
        nxt = None
        for c in sorted(col.by_vertex[u]):
            w = col.by_vertex[u][c]
            if w not in in_fan and col.is_free(tail, c):
                nxt = w
                break
        if nxt is None:
            break
        fan.append(nxt)
        in_fan.add(nxt)

    c = col.free_at(u)
    d = col.free_at(fan[-1])
    if c != d:
        _invert_path(col, u, c, d)
    # After inverting the c/d path from u, color d is free at u.  Find the
    # longest fan prefix that is still a fan and ends at a vertex with d
    # free, rotate it, and finish with d.
    w_idx = None
    for i, w in enumerate(fan):
        if i > 0:
            cw = col.color_of(u, w)
            if cw == NO_COLOR or not col.is_free(fan[i - 1], cw):
                break
        if col.is_free(w, d):
            w_idx = i
    assert w_idx is not None, "fan rotation target must exist"
    for i in range(w_idx):
        ci = col.color_of(u, fan[i + 1])
        col.set_color(u, fan[i + 1], NO_COLOR)
        col.set_color(u, fan[i], ci)
    col.set_color(u, fan[w_idx], d)


def _invert_path(col: _Coloring, start: int, c: int, d: int) -> None:
    # Walk the maximal path from `start` alternating colors d, c and swap
    # the two colors along it.
    path = []
    at = start
    want = d
    prev = None
    while want in col.by_vertex[at]:
        nxt = col.by_vertex[at][want]
        if nxt == prev:
            break
        path.append((at, nxt, want))
        prev, at = at, nxt
        want = c if want == d else d
    for a, b, color in path:
        col.set_color(a, b, NO_COLOR)
    for a, b, color in path:
        col.set_color(a, b, d if color == c else c)


# ---------------------------------------------------------------------------
# Konig coloring for bipartite graphs
# ---------------------------------------------------------------------------

def konig_color(g: Graph, bipartition: tuple[set[int], set[int]]
                ) -> MatchingFamily:
    """Partition a bipartite graph into exactly Delta matchings."""
    left, right = (set(bipartition[0]), set(bipartition[1]))
    for u, v in g.edges:
        if (u in left) == (v in left) or (u in right) == (v in right):
            raise ValidationError(f"edge ({u}, {v}) not across the bipartition")
    delta = g.max_degree()
    if delta == 0:
        return MatchingFamily(g, ())
    col = _Coloring(g, delta)
    for u, v in sorted(g.edges):
        a = _first_free(col, u)
        b = _first_free(col, v)
        if a == b:
            col.set_color(u, v, a)
            continue
        # b is used at u.  The a/b alternating path from v cannot reach u
        # (parity across the bipartition), so swapping it frees a at v.
        _swap_ab_path(col, v, a, b)
        col.set_color(u, v, a)
    classes: list[set[Edge]] = [set() for _ in range(delta)]
    for u, v in g.edges:
        classes[col.color_of(u, v)].add((u, v))
    return _family(g, classes)


def _first_free(col: _Coloring, v: int) -> int:
    return col.free_at(v)


def _swap_ab_path(col: _Coloring, start: int, a: int, b: int) -> None:
    path = []
    at = start
    want = a
    prev = None
    while want in col.by_vertex[at]:
        nxt = col.by_vertex[at][want]
        if nxt == prev:
            break
        path.append((at, nxt, want))
        prev, at = at, nxt
        want = b if want == a else a
    for x, y, _ in path:
        col.set_color(x, y, NO_COLOR)
    for x, y, color in path:
        col.set_color(x, y, b if color == a else a)


# ---------------------------------------------------------------------------
# Balancing
# ---------------------------------------------------------------------------

def balance_matchings(fam: MatchingFamily) -> MatchingFamily:
    """Rearrange edge-disjoint matchings into almost equal sizes.

    While two matchings differ in size by 2 or more, some component of
    their union is an odd path whose end edges lie on the bigger one;
    swapping along it shrinks the gap.  The union of edges never changes.
    """
    classes = [set(mp.edges) for mp in fam.matchings]
    while True:
        sizes = [len(c) for c in classes]
        lo = min(range(len(classes)), key=lambda i: (sizes[i], i))
        hi = min(range(len(classes)), key=lambda i: (-sizes[i], i))
        if sizes[hi] - sizes[lo] <= 1:
            break
        path = _odd_path(classes[lo], classes[hi])
        for e in path:
            if e in classes[hi]:
                classes[hi].remove(e)
                classes[lo].add(e)
            else:
                classes[lo].remove(e)
                classes[hi].add(e)
    return _family(fam.parent, classes)


def _odd_path(small: set[Edge], big: set[Edge]) -> list[Edge]:
    """First component of small+big that is an odd path with its end edges
    on `big`, scanned in vertex order."""
    adj: dict[int, list[tuple[int, Edge]]] = {}
    for e in small | big:
        u, v = e
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    seen: set[int] = set()
    for v0 in sorted(adj):
        if v0 in seen or len(adj[v0]) != 1:
            continue
        # Walk the path from this endpoint.
        path_edges: list[Edge] = []
        at, prev_e = v0, None
        while True:
            seen.add(at)
            step = [(w, e) for w, e in adj[at] if e != prev_e]
            if not step:
                break
            w, e = step[0]
            path_edges.append(e)
            prev_e = e
            at = w
        if (len(path_edges) % 2 == 1 and path_edges[0] in big
                and path_edges[-1] in big):
            return path_edges
    raise AssertionError("no balancing path found; sizes cannot differ by 2")


# ---------------------------------------------------------------------------
# Ascending decomposition into matchings
# ---------------------------------------------------------------------------

def matching_witness(small: frozenset[Edge], big: frozenset[Edge]
                     ) -> EmbeddingWitness:
    """Witness between two matchings with |small| <= |big| <= |small|+1."""
    vmap: dict[int, int] = {}
    bigs = sorted(big)
    for e, f in zip(sorted(small), bigs):
        vmap[e[0]], vmap[e[1]] = f
    return witness_between(small, big, vmap)


def matching_asd(g: Graph) -> Decomposition:
    """Ascending decomposition into matchings for Delta(g) <= floor(m/2)-1.

    With e = e(g) and binom(m,2) < e <= binom(m+1,2), emits m matchings
    whose sizes follow the ascending size formula: a size-t matching is
    pulled out first, the rest is colored and balanced into equal
    matchings, and each of those is split into a short prefix and its
    complementary suffix.
    """
    e = g.size
    if e == 0:
        raise PreconditionError("graph has no edges")
    m, t = size_profile(e)
    if m == 1:
        return make_decomposition(g, [g.edges], [])
    bound = m // 2 - 1
    if g.max_degree() > bound:
        raise PreconditionError(
            f"max degree {g.max_degree()} exceeds floor(m/2)-1 = {bound}")

    fam = vizing_color(g)
    largest = max(fam.matchings, key=lambda mp: (mp.size, ))
    assert largest.size >= t, "a size-t matching class must exist"
    m_star = frozenset(sorted(largest.edges)[:t])
    rest = [set(mp.edges) - m_star for mp in fam.matchings]

    want = m // 2  # class count for both parities
    assert len(rest) <= want, "Vizing class count exceeds floor(m/2)"
    while len(rest) < want:
        rest.append(set())
    balanced = balance_matchings(_family(g, rest))
    sizes = balanced.sizes()
    per = m - 1 if m % 2 == 0 else m
    assert all(s == per for s in sizes), f"balanced sizes {sizes} != {per}"

    slots: dict[int, frozenset[Edge]] = {}
    mats = [sorted(mp.edges) for mp in balanced.matchings]
    if m % 2 == 0:
        slots[m - 1] = frozenset(mats[-1])
        for i in range(1, m // 2):
            slots[i] = frozenset(mats[i - 1][:i])
            slots[m - i - 1] = frozenset(mats[i - 1][i:])
    else:
        for i in range(1, (m - 1) // 2 + 1):
            slots[i] = frozenset(mats[i - 1][:i])
            slots[m - i] = frozenset(mats[i - 1][i:])

    parts = [slots[i] for i in range(1, t)] + [m_star] + \
            [slots[i] for i in range(t, m)]
    witnesses = [matching_witness(parts[i], parts[i + 1])
                 for i in range(len(parts) - 1)]
    return make_decomposition(g, parts, witnesses)
