"""Decomposition values: ordered edge parts plus embedding certificates.

A decomposition of G is an ordered list of pairwise edge-disjoint parts
covering E(G).  Between consecutive parts it carries a witness: an
injective vertex map that sends every edge of the smaller part to an edge
of the larger one and whose image covers all of the larger part except at
most one named edge.  Witness validation is linear, so verification never
needs to search.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError
from .graphs import Edge, Graph, norm_edge

ISO = "iso"
EXT = "ext"


@dataclass(frozen=True)
class EmbeddingWitness:
    kind: str  # ISO or EXT
    mapping: tuple[tuple[int, int], ...]  # (vertex in small, vertex in big)
    extra_edge: Optional[Edge] = None  # the edge of the big part not covered

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "map": [list(p) for p in self.mapping],
            "extra_edge": list(self.extra_edge) if self.extra_edge else None,
        }

    @staticmethod
    def from_dict(d: dict) -> "EmbeddingWitness":
        extra = d.get("extra_edge")
        return EmbeddingWitness(
            kind=d["kind"],
            mapping=tuple((int(a), int(b)) for a, b in d["map"]),
            extra_edge=norm_edge(*extra) if extra else None,
        )


def witness_between(small: frozenset[Edge], big: frozenset[Edge],
                    vmap: dict[int, int]) -> EmbeddingWitness:
    """Build a witness from an explicit vertex map, deriving its kind.

    Raises if the map is not a valid full-image embedding.
    """
    image = set()
    seen_targets = set()
    for v in {x for e in small for x in e}:
        if v not in vmap:
            raise ValidationError(f"witness map misses vertex {v}")
        if vmap[v] in seen_targets:
            raise ValidationError("witness map is not injective")
        seen_targets.add(vmap[v])
    for u, v in small:
        e = norm_edge(vmap[u], vmap[v])
        if e not in big:
            raise ValidationError(f"witness sends {(u, v)} to non-edge {e}")
        image.add(e)
    if len(image) != len(small):
        raise ValidationError("witness map collapses two edges")
    missing = big - image
    if not missing:
        if len(small) != len(big):
            raise ValidationError("sizes differ but image covers everything")
        return EmbeddingWitness(ISO, tuple(sorted(vmap.items())))
    if len(missing) == 1:
        return EmbeddingWitness(EXT, tuple(sorted(vmap.items())),
                                extra_edge=next(iter(missing)))
    raise ValidationError(f"witness image misses {len(missing)} edges")


def validate_witness(small: frozenset[Edge], big: frozenset[Edge],
                     w: EmbeddingWitness) -> Optional[str]:
    """None if the witness certifies the ascending pair, else a reason."""
    vmap = dict(w.mapping)
    if len(set(vmap.values())) != len(vmap):
        return "map not injective"
    image = set()
    for u, v in small:
        if u not in vmap or v not in vmap:
            return f"map misses an endpoint of {(u, v)}"
        e = norm_edge(vmap[u], vmap[v])
        if e not in big:
            return f"edge {(u, v)} maps to non-edge {e}"
        image.add(e)
    if len(image) != len(small):
        return "two edges map to the same edge"
    missing = big - image
    if w.kind == ISO:
        return None if not missing else f"iso witness misses {sorted(missing)}"
    if w.kind == EXT:
        if w.extra_edge is None:
            return "ext witness without extra edge"
        if missing != {w.extra_edge}:
            return f"ext witness image misses {sorted(missing)}, not {w.extra_edge}"
        return None
    return f"unknown witness kind {w.kind!r}"


@dataclass(frozen=True)
class Decomposition:
    graph: Graph
    parts: tuple[frozenset[Edge], ...]
    witnesses: tuple[Optional[EmbeddingWitness], ...]  # len(parts) - 1

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.parts)

    def as_dict(self) -> dict:
        m, t = size_profile(self.graph.size)
        return {
            "m": m,
            "t": t,
            "parts": [sorted([list(e) for e in p]) for p in self.parts],
            "witnesses": [w.as_dict() if w else None for w in self.witnesses],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1, sort_keys=True)

    @staticmethod
    def from_dict(d: dict, graph: Graph) -> "Decomposition":
        parts = tuple(
            frozenset(norm_edge(int(u), int(v)) for u, v in p)
            for p in d["parts"]
        )
        raw_ws = d.get("witnesses") or [None] * (len(parts) - 1)
        witnesses = tuple(
            EmbeddingWitness.from_dict(w) if w else None for w in raw_ws
        )
        return Decomposition(graph, parts, witnesses)

    @staticmethod
    def from_json(text: str, graph: Graph) -> "Decomposition":
        return Decomposition.from_dict(json.loads(text), graph)


def make_decomposition(graph: Graph, parts: Sequence[frozenset[Edge]],
                       witnesses: Sequence[Optional[EmbeddingWitness]]) -> Decomposition:
    if len(witnesses) != max(len(parts) - 1, 0):
        raise ValidationError("need one witness per consecutive pair")
    return Decomposition(graph, tuple(parts), tuple(witnesses))


def size_profile(e: int) -> tuple[int, int]:
    """The (m, t) pair of an edge count: binom(m,2) < e <= binom(m+1,2)
    and t = e - binom(m,2)."""
    if e < 0:
        raise ValidationError("edge count must be non-negative")
    if e == 0:
        return 0, 0
    m = 1
    while m * (m + 1) // 2 < e:
        m += 1
    return m, e - m * (m - 1) // 2


def expected_sizes(e: int) -> tuple[int, ...]:
    """Part sizes of a decomposition of e edges: i for i <= t, else i-1."""
    m, t = size_profile(e)
    return tuple(i if i <= t else i - 1 for i in range(1, m + 1))
