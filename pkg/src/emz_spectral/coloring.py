"""Minimum proper coloring of small graphs.

Nodes are indices ``0..n-1``; ``adj[i]`` is the neighbour set of ``i``.
Colorings are returned in restricted-growth form (node 0 gets color 0, a
new color is always the smallest unused one), so among optimal colorings
the one returned is the lexicographically smallest in node order.
"""

from __future__ import annotations

from dataclasses import dataclass

EXACT_LIMIT = 12


@dataclass
class Coloring:
    colors: list[int]
    k: int
    certificate: str
    lower_bound: int
    unique: bool | None = None

    @property
    def gap(self) -> int:
        return self.k - self.lower_bound


def max_clique(adj: list[set[int]]) -> list[int]:
    """Bron-Kerbosch with pivoting; fine for the graph sizes used here."""
    best: list[int] = []

    def expand(r, p, x):
        nonlocal best
        if not p and not x:
            if len(r) > len(best):
                best = sorted(r)
            return
        if len(r) + len(p) <= len(best):
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in sorted(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(range(len(adj))), set())
    return best


def _k_colorings(adj, k, limit):
    """Restricted-growth k-colorings in lexicographic order, up to ``limit``."""
    n = len(adj)
    colors = [-1] * n
    found: list[list[int]] = []

    def rec(i, used):
        if len(found) >= limit:
            return
        if i == n:
            found.append(colors.copy())
            return
        banned = {colors[j] for j in adj[i] if j < i}
        for c in range(min(used + 1, k)):
            if c not in banned:
                colors[i] = c
                rec(i + 1, max(used, c + 1))
                if len(found) >= limit:
                    return
        colors[i] = -1

    rec(0, 0)
    return found


def dsatur(adj: list[set[int]]) -> list[int]:
    n = len(adj)
    colors = [-1] * n
    sat: list[set[int]] = [set() for _ in range(n)]
    for _ in range(n):
        v = max((u for u in range(n) if colors[u] < 0),
                key=lambda u: (len(sat[u]), len(adj[u]), -u))
        c = 0
        while c in sat[v]:
            c += 1
        colors[v] = c
        for u in adj[v]:
            sat[u].add(c)
    return _relabel(colors)


def _relabel(colors):
    seen: dict[int, int] = {}
    return [seen.setdefault(c, len(seen)) for c in colors]


def minimum_coloring(adj: list[set[int]], exact_limit: int = EXACT_LIMIT,
                     uniqueness_limit: int = 9) -> Coloring:
    n = len(adj)
    if n == 0:
        return Coloring([], 0, "exact", 0, True)
    clique = len(max_clique(adj))
    if n > exact_limit:
        colors = dsatur(adj)
        k = max(colors) + 1
        cert = "exact" if k == clique else "greedy+clique-bound"
        return Coloring(colors, k, cert, clique)
    for k in range(clique, n + 1):
        limit = 2 if n <= uniqueness_limit else 1
        sols = _k_colorings(adj, k, limit)
        if sols:
            unique = (len(sols) == 1) if n <= uniqueness_limit else None
            return Coloring(sols[0], k, "exact", clique, unique)
    raise AssertionError("unreachable: n colors always suffice")


def is_proper(adj, colors) -> bool:
    return all(colors[i] != colors[j] for i in range(len(adj)) for j in adj[i])
