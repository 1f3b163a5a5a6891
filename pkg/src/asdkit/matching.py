"""Hopcroft-Karp maximum matching on bipartite graphs."""

from __future__ import annotations

from collections import deque
from typing import Hashable

INF = float("inf")


def max_bipartite_matching(adj: dict[Hashable, list[Hashable]]) -> dict[Hashable, Hashable]:
    """Maximum matching of the bipartite graph given as left -> rights.

    Returns a left -> right assignment.  Iteration order of `adj` fixes
    the result, so pass something with deterministic ordering.
    """
    lefts = list(adj)
    pair_l: dict = {}
    pair_r: dict = {}
    dist: dict = {}

    def bfs() -> bool:
        q = deque()
        for u in lefts:
            if u not in pair_l:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = pair_r.get(v)
                if w is None:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u) -> bool:
        for v in adj[u]:
            w = pair_r.get(v)
            if w is None or (dist[w] == dist[u] + 1 and dfs(w)):
                pair_l[u] = v
                pair_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in lefts:
            if u not in pair_l:
                dfs(u)
    return pair_l
