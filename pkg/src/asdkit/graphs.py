"""Graph representation, component census, generators, and edge-list I/O.

Vertices are dense integer indices 0..n-1 and edges are ordered pairs
(u, v) with u < v.  Everything is immutable after construction; operations
are pure functions, so values can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from random import Random
from typing import Iterable, Optional

from .errors import ParseError, ValidationError

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ValidationError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph: vertex count plus a set of edges."""

    n: int
    edges: frozenset[Edge]

    @staticmethod
    def of(n: int, pairs: Iterable[Edge]) -> "Graph":
        if n < 0:
            raise ValidationError("vertex count must be non-negative")
        edges = set()
        for u, v in pairs:
            e = norm_edge(u, v)
            if not (0 <= e[0] and e[1] < n):
                raise ValidationError(f"edge {e} out of range for n={n}")
            edges.add(e)
        return Graph(n, frozenset(edges))

    @property
    def size(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def components(self) -> list[tuple[frozenset[int], frozenset[Edge]]]:
        """Connected components spanned by at least one edge.

        Isolated vertices are not reported; every edge belongs to exactly
        one component.
        """
        adj = defaultdict(set)
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen: set[int] = set()
        out = []
        for start in sorted(adj):
            if start in seen:
                continue
            stack = [start]
            verts = {start}
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in verts:
                        verts.add(y)
                        stack.append(y)
            seen |= verts
            comp_edges = frozenset(
                (u, v) for u, v in self.edges if u in verts
            )
            out.append((frozenset(verts), comp_edges))
        return out

    def subgraph(self, edges: Iterable[Edge]) -> "Graph":
        es = frozenset(edges)
        if not es <= self.edges:
            raise ValidationError("subgraph edges must come from the host")
        return Graph(self.n, es)


@dataclass(frozen=True)
class EdgePart:
    """A subset of a host graph's edges, kept attached to its host."""

    parent: Graph
    edges: frozenset[Edge]

    def __post_init__(self):
        if not self.edges <= self.parent.edges:
            raise ValidationError("part edges must be a subset of the parent")

    @property
    def size(self) -> int:
        return len(self.edges)

    def graph(self) -> Graph:
        return Graph(self.parent.n, self.edges)

    def vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)


def part(parent: Graph, edges: Iterable[Edge]) -> EdgePart:
    return EdgePart(parent, frozenset(edges))


# ---------------------------------------------------------------------------
# Canonical labelling of small components
# ---------------------------------------------------------------------------

def _refine(n: int, adj: list[set[int]], colors: list[int]) -> list[int]:
    """Iterated degree refinement until the colour partition is stable."""
    while True:
        sig = [
            (colors[v], tuple(sorted(colors[w] for w in adj[v])))
            for v in range(n)
        ]
        order = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [order[s] for s in sig]
        if new == colors:
            return colors
        colors = new


def _canon_search(n: int, adj: list[set[int]], colors: list[int]
                  ) -> tuple[tuple[Edge, ...], list[int]]:
    """Smallest edge-list over all labellings consistent with refinement,
    together with a labelling achieving it."""
    best: list = [None, None]

    def code_for(perm: list[int]) -> tuple[Edge, ...]:
        return tuple(sorted(norm_edge(perm[u], perm[v])
                            for u in range(n) for v in adj[u] if u < v))

    def rec(colors: list[int]) -> None:
        cells = defaultdict(list)
        for v, c in enumerate(colors):
            cells[c].append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = c
                break
        if target is None:
            code = code_for(colors)
            if best[0] is None or code < best[0]:
                best[0], best[1] = code, list(colors)
            return
        # Swapping twins is an automorphism, so one representative per
        # twin class suffices (keeps stars and cliques linear).
        reps: list[int] = []
        for v in cells[target]:
            if not any(adj[v] - {w} == adj[w] - {v} for w in reps):
                reps.append(v)
        for v in reps:
            nxt = list(colors)
            nxt[v] = -1
            order = {c: i for i, c in enumerate(sorted(set(nxt)))}
            nxt = [order[c] for c in nxt]
            rec(_refine(n, adj, nxt))

    rec(colors)
    assert best[0] is not None
    return best[0], best[1]


def canonical_labeling(vertices: Iterable[int], edges: Iterable[Edge]
                       ) -> tuple[tuple[Edge, ...], dict[int, int]]:
    """Canonical edge list of the graph induced on `vertices`, plus a map
    from the original vertices onto the canonical labels 0..v-1.

    Two inputs yield the same edge tuple exactly when they are
    isomorphic, so composing one map with the inverse of another gives an
    explicit isomorphism.  Intended for small components; cost grows
    quickly past ~16 vertices unless the refinement discretises.
    """
    verts = sorted(set(vertices))
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        adj[idx[u]].add(idx[v])
        adj[idx[v]].add(idx[u])
    colors = _refine(n, adj, [0] * n)
    code, labels = _canon_search(n, adj, colors)
    return code, {v: labels[idx[v]] for v in verts}


def canonical_edges(vertices: Iterable[int], edges: Iterable[Edge]) -> tuple[Edge, ...]:
    return canonical_labeling(vertices, edges)[0]


# ---------------------------------------------------------------------------
# Component census
# ---------------------------------------------------------------------------

CANON_CAP = 16

Tag = tuple


def classify_component(verts: frozenset[int], edges: frozenset[Edge]) -> Tag:
    """Shape tag of one connected component.

    Recognized shapes, in priority order: star(k) (includes single edges
    and 2-edge paths), biclique(t) for the complete bipartite graph on
    t+t vertices with t >= 2 (this covers the 4-cycle), path(k) for
    k >= 3, cycle(k) for k >= 5, and otherwise a canonical code for
    components of at most 16 vertices.  Larger unrecognized components
    get an opaque tag that is necessary but not sufficient for
    isomorphism; divisibility checks over them fall back to pairwise
    isomorphism tests.
    """
    k = len(edges)
    nv = len(verts)
    deg = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    degs = sorted(deg.values())
    if nv == k + 1 and degs[-1] == k:
        return ("star", k)
    if nv % 2 == 0:
        t = nv // 2
        if t >= 2 and k == t * t and degs[0] == t and degs[-1] == t:
            if _is_biclique(verts, edges, t):
                return ("biclique", t)
    if nv == k + 1 and degs[-1] == 2:
        return ("path", k)
    if nv == k and degs[0] == 2 and degs[-1] == 2:
        return ("cycle", k)
    if nv <= CANON_CAP:
        return ("code", canonical_edges(verts, edges))
    return ("opaque", nv, k, tuple(degs))


def _is_biclique(verts: frozenset[int], edges: frozenset[Edge], t: int) -> bool:
    start = min(verts)
    adj = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    side_a = {start} | (verts - adj[start] - {start})
    side_b = verts - side_a
    if len(side_a) != t or len(side_b) != t:
        return False
    need = {norm_edge(a, b) for a in side_a for b in side_b}
    return need == set(edges)


def tag_size(tag: Tag) -> int:
    kind = tag[0]
    if kind == "star":
        return tag[1]
    if kind == "biclique":
        return tag[1] * tag[1]
    if kind in ("path", "cycle"):
        return tag[1]
    if kind == "code":
        return len(tag[1])
    return tag[2]  # opaque: (kind, nv, k, degs)


@dataclass(frozen=True)
class ComponentCensus:
    """Multiset of component shape tags."""

    entries: tuple[tuple[Tag, int], ...]  # (tag, count), sorted

    @property
    def total_edges(self) -> int:
        return sum(tag_size(tag) * cnt for tag, cnt in self.entries)

    def counts(self) -> Counter:
        return Counter(dict(self.entries))

    def has_opaque(self) -> bool:
        return any(tag[0] == "opaque" for tag, _ in self.entries)


def census(g: Graph) -> ComponentCensus:
    c = Counter()
    for verts, edges in g.components():
        c[classify_component(verts, edges)] += 1
    return ComponentCensus(tuple(sorted(c.items())))


def censuses_equal(a: ComponentCensus, b: ComponentCensus) -> bool:
    """Census equality; reliable as an isomorphism test only when neither
    census contains opaque entries."""
    return a.entries == b.entries


def is_r_divisible(g: Graph, r: int) -> bool:
    """True iff every isomorphism class of components appears a multiple of
    r times."""
    if r <= 0:
        raise ValidationError("r must be positive")
    groups = Counter()
    opaque = []
    for verts, edges in g.components():
        tag = classify_component(verts, edges)
        if tag[0] == "opaque":
            opaque.append((verts, edges, tag))
        else:
            groups[tag] += 1
    if any(cnt % r for cnt in groups.values()):
        return False
    # Oversized unrecognized components: group by pairwise isomorphism.
    pool = list(opaque)
    while pool:
        v0, e0, t0 = pool.pop()
        cls = 1
        rest = []
        for v1, e1, t1 in pool:
            if t1 == t0 and canonical_edges(v1, e1) == canonical_edges(v0, e0):
                cls += 1
            else:
                rest.append((v1, e1, t1))
        pool = rest
        if cls % r:
            return False
    return True


# ---------------------------------------------------------------------------
# Deterministic generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: tuple = ()
    seed: int = 0


def _pair_unrank(n: int, idx: int) -> Edge:
    # Index into the lexicographic list of pairs (u, v), u < v.
    u = 0
    row = n - 1
    while idx >= row:
        idx -= row
        u += 1
        row -= 1
    return (u, u + 1 + idx)


def gnm(n: int, m: int, seed: int = 0) -> Graph:
    total = n * (n - 1) // 2
    if m > total:
        raise ValidationError(f"gnm wants {m} edges but K_{n} has only {total}")
    rng = Random(seed)
    picks = rng.sample(range(total), m)
    return Graph(n, frozenset(_pair_unrank(n, i) for i in picks))


def star_forest(sizes: Iterable[int]) -> Graph:
    edges = []
    v = 0
    for k in sizes:
        if k < 1:
            raise ValidationError("star sizes must be positive")
        centre = v
        for i in range(k):
            edges.append((centre, v + 1 + i))
        v += k + 1
    return Graph(v, frozenset(edges))


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValidationError("cycle needs at least 3 vertices")
    return Graph(n, frozenset(norm_edge(i, (i + 1) % n) for i in range(n)))


def matching(k: int) -> Graph:
    return Graph(2 * k, frozenset((2 * i, 2 * i + 1) for i in range(k)))


def complete(n: int) -> Graph:
    return Graph(n, frozenset(itertools.combinations(range(n), 2)))


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, frozenset((i, a + j) for i in range(a) for j in range(b)))


_FAMILIES = {
    "random-gnm": lambda p, s: gnm(p[0], p[1], s),
    "star-forest": lambda p, s: star_forest(p),
    "cycle": lambda p, s: cycle(p[0]),
    "matching": lambda p, s: matching(p[0]),
    "complete": lambda p, s: complete(p[0]),
    "complete-bipartite": lambda p, s: complete_bipartite(p[0], p[1]),
}


def generate(spec: GeneratorSpec) -> Graph:
    """Deterministic function of (family, params, seed)."""
    if spec.family not in _FAMILIES:
        raise ValidationError(f"unknown family {spec.family!r}")
    return _FAMILIES[spec.family](tuple(spec.params), spec.seed)


# ---------------------------------------------------------------------------
# Edge-list text format
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    """Parse the edge-list format.

    First line: vertex count n.  Each later non-empty line: "u v" with
    0 <= u < v < n.  '#' starts a comment.
    """
    n = None
    edges: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ParseError(f"expected vertex count, got {line!r}", lineno)
            if n < 0:
                raise ParseError("vertex count must be non-negative", lineno)
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"non-integer endpoint in {line!r}", lineno)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < v < n):
            raise ParseError(f"edge ({u}, {v}) violates 0 <= u < v < n", lineno)
        if (u, v) in edges:
            raise ParseError(f"duplicate edge ({u}, {v})", lineno)
        edges.add((u, v))
    if n is None:
        raise ParseError("empty input", 1)
    return Graph(n, frozenset(edges))


def format_graph(g: Graph) -> str:
    lines = [str(g.n)]
    lines.extend(f"{u} {v}" for u, v in sorted(g.edges))
    return "\n".join(lines) + "\n"
