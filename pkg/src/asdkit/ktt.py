"""Almost-decomposing dense graphs into isomorphic biclique forests.

The route: scatter the edges over the lines of a projective plane (each
edge lands on the unique line through its endpoints, so line subgraphs
are small), greedily pull complete bipartite K_{t,t} blocks out of each
line subgraph, group the blocks into vertex-disjoint forests by greedy
hypergraph coloring, and equalize the forest sizes, spilling the excess
into a remainder.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import PreconditionError, ValidationError
from .graphs import Edge, EdgePart, Graph, norm_edge, part


# ---------------------------------------------------------------------------
# Projective planes over prime fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectivePlane:
    order: int
    points: tuple[tuple[int, int, int], ...]
    lines: tuple[frozenset[int], ...]  # sets of point indices

    @property
    def q(self) -> int:
        return self.order ** 2 + self.order + 1


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for d in range(2, int(math.isqrt(p)) + 1):
        if p % d == 0:
            return False
    return True


def projective_plane(p: int) -> ProjectivePlane:
    """The plane of prime order p: points are the 1-dimensional subspaces
    of the 3-dimensional vector space mod p (normalized so the first
    nonzero coordinate is 1), lines are the 2-dimensional subspaces, and
    a point lies on a line when their representatives are orthogonal."""
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    reps: list[tuple[int, int, int]] = [(0, 0, 1)]
    reps.extend((0, 1, a) for a in range(p))
    reps.extend((1, a, b) for a in range(p) for b in range(p))
    idx = {r: i for i, r in enumerate(reps)}
    lines = []
    for coeff in reps:
        members = frozenset(
            idx[r] for r in reps
            if (coeff[0] * r[0] + coeff[1] * r[1] + coeff[2] * r[2]) % p == 0
        )
        lines.append(members)
    return ProjectivePlane(p, tuple(reps), tuple(lines))


def bertrand_prime(lower: int) -> int:
    p = max(2, lower)
    while not is_prime(p):
        p += 1
    return p


def plane_partition(g: Graph) -> list[EdgePart]:
    """Assign every edge to the unique plane line through its endpoints.

    Uses the smallest prime p >= ceil(sqrt(n)) and the identity injection
    of vertices into points; each returned part spans at most p+1
    vertices.  Graphs with fewer than 4 vertices come back whole.
    """
    if g.n < 4:
        return [part(g, g.edges)]
    p = bertrand_prime(math.isqrt(g.n - 1) + 1)
    plane = projective_plane(p)
    line_through: dict[tuple[int, int], int] = {}
    point_lines: list[set[int]] = [set() for _ in range(plane.q)]
    for li, members in enumerate(plane.lines):
        for pt in members:
            point_lines[pt].add(li)
    buckets: list[set[Edge]] = [set() for _ in range(plane.q)]
    for u, v in g.edges:
        common = point_lines[u] & point_lines[v]
        assert len(common) == 1, "two points lie on exactly one line"
        buckets[min(common)].add((u, v))
    return [part(g, b) for b in buckets]


# ---------------------------------------------------------------------------
# Greedy biclique extraction
# ---------------------------------------------------------------------------

Block = tuple[tuple[int, ...], tuple[int, ...]]  # (left t-set, right t-set)


def block_edges(block: Block) -> frozenset[Edge]:
    left, right = block
    return frozenset(norm_edge(a, b) for a in left for b in right)


def find_ktt(edges: frozenset[Edge], t: int) -> Optional[Block]:
    """First K_{t,t} subgraph in fixed vertex order, or None.

    Scans t-subsets of vertices sorted ascending as the left side and
    takes the t smallest common neighbours outside the left set.
    """
    if t < 1:
        raise ValidationError("t must be positive")
    if len(edges) < t * t:
        return None
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    if t == 1:
        e = min(edges)
        return ((e[0],), (e[1],))
    cands = sorted(v for v, nb in adj.items() if len(nb) >= t)
    for left in itertools.combinations(cands, t):
        common = set(adj[left[0]])
        for v in left[1:]:
            common &= adj[v]
        common -= set(left)
        if len(common) >= t:
            return (left, tuple(sorted(common)[:t]))
    return None


def greedy_ktt_extract(h: Graph, t: int) -> tuple[list[Block], EdgePart]:
    """Remove K_{t,t} edge sets until none is left; returns the blocks and
    the biclique-free leftover."""
    edges = h.edges
    blocks: list[Block] = []
    while True:
        blk = find_ktt(edges, t)
        if blk is None:
            break
        blocks.append(blk)
        edges = edges - block_edges(blk)
    return blocks, part(h, edges)


# ---------------------------------------------------------------------------
# Hypergraph matchings (greedy surrogate) and part division
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverHypergraph:
    n: int
    blocks: tuple[Block, ...]

    def __post_init__(self):
        for left, right in self.blocks:
            if set(left) & set(right):
                raise ValidationError("block sides must be disjoint")


def hypergraph_match_decompose(cover: CoverHypergraph, target: int
                               ) -> list[list[int]]:
    """Partition hyperedges into vertex-disjoint classes, greedily
    assigning each hyperedge the lowest-indexed conflict-free class.

    The achieved class count is len(result); `target` only pre-allocates.
    """
    classes: list[list[int]] = [[] for _ in range(max(target, 0))]
    used: list[set[int]] = [set() for _ in range(max(target, 0))]
    for bi, (left, right) in enumerate(cover.blocks):
        verts = set(left) | set(right)
        placed = False
        for ci in range(len(classes)):
            if not (used[ci] & verts):
                classes[ci].append(bi)
                used[ci] |= verts
                placed = True
                break
        if not placed:
            classes.append([bi])
            used.append(set(verts))
    while classes and not classes[-1]:
        classes.pop()
    return classes


def divide_parts(l: int, k: int, sizes: Sequence[int]) -> tuple[int, list[int]]:
    """Choose a common size s and counts sigma_i with sigma_i * s <= s_i
    and sum sigma_i = k, wasting at most (l/k) * sum(s_i) + k units."""
    if l < 1 or k < 1 or len(sizes) != l or any(s < 1 for s in sizes):
        raise PreconditionError("need positive l, k and l positive sizes")
    total = sum(sizes)
    if total < k + l:
        raise PreconditionError(f"sum of sizes {total} < k+l = {k + l}")
    s = total // (k + l)
    sigma = [si // s for si in sizes]
    excess = sum(sigma) - k
    assert excess >= 0, "floor(total/(k+l)) guarantees enough multiples"
    for i in range(l - 1, -1, -1):
        if excess == 0:
            break
        take = min(excess, sigma[i])
        sigma[i] -= take
        excess -= take
    assert sum(sigma) == k
    leftover = total - s * k
    assert leftover <= (l / k) * total + k
    return s, sigma


# ---------------------------------------------------------------------------
# Equal biclique-forest decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KttForestPart:
    part: EdgePart
    blocks: tuple[Block, ...]

    def __post_init__(self):
        seen: set[int] = set()
        want: set[Edge] = set()
        for left, right in self.blocks:
            verts = set(left) | set(right)
            if verts & seen:
                raise ValidationError("blocks must be vertex-disjoint")
            seen |= verts
            want |= block_edges((left, right))
        if want != set(self.part.edges):
            raise ValidationError("blocks do not span the part")


@dataclass(frozen=True)
class KttDecomposition:
    forests: tuple[KttForestPart, ...]
    remainder: EdgePart
    regime_ok: bool
    achieved_forests: int


def ktt_decompose_equal(g: Graph, t: int, k: int,
                        dense_coeff: float = 0.0) -> KttDecomposition:
    """Decompose g into k isomorphic K_{t,t}-forests plus a remainder.

    When e(g) < dense_coeff * n^2 / sqrt(t) the whole graph goes straight
    to the remainder.  Forests each carry the same number of
    vertex-disjoint blocks; whatever cannot be equalized lands in the
    remainder.  regime_ok records whether n/sqrt(t) <= k <= n^2/t^(5/2).
    """
    if k < 1:
        raise PreconditionError("k must be positive")
    n = g.n
    regime_ok = bool(n / math.sqrt(t) <= k <= n * n / t ** 2.5)
    empty = KttDecomposition(
        tuple(KttForestPart(part(g, frozenset()), ()) for _ in range(k)),
        part(g, g.edges), regime_ok, 0)
    if dense_coeff and g.size < dense_coeff * n * n / math.sqrt(t):
        return empty

    blocks: list[Block] = []
    for line_part in plane_partition(g):
        got, _ = greedy_ktt_extract(line_part.graph(), t)
        blocks.extend(got)
    # The per-line pass only sees blocks whose vertices share a line, which
    # at desk scale misses most of them; sweep the uncovered rest directly.
    covered = {e for b in blocks for e in block_edges(b)}
    extra, _ = greedy_ktt_extract(Graph(g.n, g.edges - covered), t)
    blocks.extend(extra)
    if not blocks:
        return empty
    cover = CoverHypergraph(g.n, tuple(blocks))
    classes = hypergraph_match_decompose(cover, 0)
    sizes = [len(c) for c in classes]
    l = len(classes)
    if sum(sizes) < k + l:
        return KttDecomposition(empty.forests, empty.remainder, regime_ok, l)
    s, sigma = divide_parts(l, k, sizes)

    forests: list[KttForestPart] = []
    used_edges: set[Edge] = set()
    for ci, cnt in enumerate(sigma):
        for j in range(cnt):
            chosen = [blocks[bi] for bi in classes[ci][j * s:(j + 1) * s]]
            edges = frozenset(e for b in chosen for e in block_edges(b))
            used_edges |= edges
            forests.append(KttForestPart(part(g, edges), tuple(chosen)))
    assert len(forests) == k
    remainder = part(g, g.edges - used_edges)
    return KttDecomposition(tuple(forests), remainder, regime_ok, l)
