"""Star-forest extraction from bipartite graphs and the star/forest combiner."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

from .errors import PreconditionError, ValidationError
from .graphs import (Edge, EdgePart, Graph, classify_component,
                     is_r_divisible, norm_edge, part)
from .coloring import konig_color


@dataclass(frozen=True)
class StarForestPart:
    """An edge part whose components are stars, with explicit centres."""

    part: EdgePart
    centers: dict[int, frozenset[int]]  # centre -> leaves

    def __post_init__(self):
        want = set()
        for c, leaves in self.centers.items():
            for leaf in leaves:
                want.add(norm_edge(c, leaf))
        if want != set(self.part.edges):
            raise ValidationError("centres do not describe the part")

    def star_sizes(self) -> tuple[int, ...]:
        return tuple(sorted(len(v) for v in self.centers.values()))


def star_forest_decompose(h: Graph, bipartition: tuple[set[int], set[int]],
                          d: int) -> tuple[list[StarForestPart], EdgePart]:
    """Split a bipartite graph into d isomorphic star forests plus a
    low-degree remainder.

    Requires every vertex of the X side to have degree < d.  Each forest
    holds, for every y in Y with deg(y) >= d, one star centred at y of
    size floor(deg(y)/d); the remainder takes deg(y) mod d edges per y
    (the highest-indexed neighbours) and has max degree < d.
    """
    X, Y = set(bipartition[0]), set(bipartition[1])
    if d < 1:
        raise PreconditionError("d must be positive")
    adj: dict[int, list[int]] = defaultdict(list)
    for u, v in h.edges:
        if (u in X) == (v in X) or (u in Y) == (v in Y):
            raise ValidationError(f"edge ({u}, {v}) not across the bipartition")
        y, x = (u, v) if u in Y else (v, u)
        adj[y].append(x)
    for y in adj:
        adj[y].sort()
    deg_x = defaultdict(int)
    for u, v in h.edges:
        x = u if u in X else v
        deg_x[x] += 1
    for x, dx in deg_x.items():
        if dx >= d:
            raise PreconditionError(f"X-vertex {x} has degree {dx} >= d={d}")

    remainder: set[Edge] = set()
    groups: dict[int, list[list[int]]] = {}
    for y in sorted(adj):
        nbrs = adj[y]
        keep = len(nbrs) - (len(nbrs) % d)
        for x in nbrs[keep:]:
            remainder.add(norm_edge(y, x))
        if keep:
            groups[y] = [nbrs[i:i + d] for i in range(0, keep, d)]

    # Expanded bipartite graph: one node per (y, group); degrees are
    # exactly d on those nodes and < d on X, so it colors into d
    # matchings, each using one edge per group.
    node_of: dict[tuple[int, int], int] = {}
    labels: list[tuple[int, int]] = []
    x_ids = sorted(deg_x)
    x_of = {x: i for i, x in enumerate(x_ids)}
    for y in sorted(groups):
        for gi in range(len(groups[y])):
            node_of[(y, gi)] = len(x_ids) + len(labels)
            labels.append((y, gi))
    exp_edges = []
    for (y, gi), node in node_of.items():
        for x in groups[y][gi]:
            exp_edges.append((x_of[x], node))
    expanded = Graph.of(len(x_ids) + len(labels), exp_edges)
    fam = konig_color(expanded, (set(range(len(x_ids))),
                                 set(range(len(x_ids), expanded.n))))
    classes = list(fam.matchings)
    while len(classes) < d:
        classes.append(part(expanded, []))

    forests: list[StarForestPart] = []
    for mp in classes[:d]:
        centers: dict[int, set[int]] = {y: set() for y in groups}
        for a, b in mp.edges:
            xi, node = (a, b) if b >= len(x_ids) else (b, a)
            y, _ = labels[node - len(x_ids)]
            centers[y].add(x_ids[xi])
        edges = {norm_edge(y, x) for y, xs in centers.items() for x in xs}
        forests.append(StarForestPart(
            part(h, edges),
            {y: frozenset(xs) for y, xs in centers.items() if xs}))
    for forest in forests:
        for y in groups:
            assert len(forest.centers.get(y, ())) == len(groups[y])
    return forests, part(h, remainder)


# ---------------------------------------------------------------------------
# Star + divisible-forest combiner
# ---------------------------------------------------------------------------

def split_divisible(g: Graph, edges: frozenset[Edge], r: int
                    ) -> list[frozenset[Edge]]:
    """Split an r-divisible edge set into r isomorphic vertex-disjoint
    groups of whole components (components grouped by isomorphism class,
    each class dealt round in sorted order)."""
    sub = Graph(g.n, edges)
    classes: dict[tuple, list[frozenset[Edge]]] = defaultdict(list)
    for verts, ce in sub.components():
        classes[classify_component(verts, ce)].append(ce)
    out: list[set[Edge]] = [set() for _ in range(r)]
    for tag in sorted(classes, key=repr):
        comps = sorted(classes[tag], key=lambda c: sorted(c))
        if len(comps) % r:
            raise PreconditionError(f"component class {tag} count not divisible by {r}")
        per = len(comps) // r
        for i in range(r):
            for c in comps[i * per:(i + 1) * per]:
                out[i] |= c
    return [frozenset(c) for c in out]


def combine_star_forest(h: Graph, s: EdgePart
                        ) -> tuple[list[EdgePart], list[EdgePart]]:
    """Split a 4-divisible graph plus an even star into four pairs of
    vertex-disjoint pieces.

    Returns ([h1..h4], [s1..s4]) partitioning E(h) and E(s): each h_i is
    one quarter of h, each s_i is a substar, e(s1) = e(s)/2, and h_i is
    vertex-disjoint from s_i.  The quarter containing the star's centre
    (if any) is placed last; the star's half avoiding the quarter it
    meets least goes first.
    """
    host = s.parent
    if not h.edges <= host.edges:
        raise ValidationError("forest edges must live in the star's host")
    if h.edges & s.edges:
        raise ValidationError("star must be edge-disjoint from the forest")
    if s.size % 2:
        raise PreconditionError("star size must be even")
    if not is_r_divisible(h, 4):
        raise PreconditionError("forest is not 4-divisible")

    quarters = split_divisible(h, h.edges, 4)
    centre = None
    leaves: list[int] = []
    if s.size:
        degc = Counter()
        for u, v in s.edges:
            degc[u] += 1
            degc[v] += 1
        centre = max(degc, key=lambda v: (degc[v], -v))
        leaves = sorted(x for e in s.edges for x in e if x != centre)
        if len(set(leaves)) != s.size:
            raise ValidationError("part is not a star")

    def verts(es):
        return {x for e in es for x in e}

    if centre is not None:
        for i, q in enumerate(quarters):
            if centre in verts(q):
                quarters[i], quarters[3] = quarters[3], quarters[i]
                break
    head = sorted(quarters[:3], key=lambda q: (len(set(leaves) & verts(q)),
                                               sorted(q)))
    quarters = head + [quarters[3]]

    half = s.size // 2
    q1_verts = verts(quarters[0])
    free_leaves = [x for x in leaves if x not in q1_verts]
    if len(free_leaves) < half:
        raise AssertionError("star half must fit outside the smallest quarter")
    s1_leaves = set(free_leaves[:half])
    q3_verts = verts(quarters[2])
    s2_leaves = {x for x in leaves if x not in s1_leaves and x in q3_verts}
    s3_leaves = {x for x in leaves if x not in s1_leaves and x not in s2_leaves}
    star_sets = [s1_leaves, s2_leaves, s3_leaves, set()]
    s_parts = [part(host, {norm_edge(centre, x) for x in ls} if ls else set())
               for ls in star_sets]
    h_parts = [part(host, q) for q in quarters]
    for hp, sp in zip(h_parts, s_parts):
        if verts(hp.edges) & verts(sp.edges):
            raise AssertionError("quarter and substar must be vertex-disjoint")
    return h_parts, s_parts
