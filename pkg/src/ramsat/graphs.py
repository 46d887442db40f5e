"""Graphs, hypergraphs, forbidden patterns, colorings and canonical forms.

Vertices are always ``0..n-1``. Edges (and hyperedges) are stored as sorted
tuples; the r-subsets of a complete host are ranked in lexicographic order,
which is also the order colorings store their colors in.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

Edge = tuple[int, ...]

CANONICAL_LIMIT = 16


@dataclass(frozen=True)
class SimpleGraph:
    vertex_count: int
    edges: frozenset
    kind: str | None = field(default=None, compare=False)
    params: tuple = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        norm = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge {e} out of range for {self.vertex_count} vertices")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @property
    def arity(self) -> int:
        return 2

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def adjacency_masks(self) -> list[int]:
        adj = [0] * self.vertex_count
        for u, v in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def relabel(self, perm: Sequence[int]) -> "SimpleGraph":
        return SimpleGraph(self.vertex_count, frozenset((perm[u], perm[v]) for u, v in self.edges))

    def complement(self) -> "SimpleGraph":
        all_pairs = itertools.combinations(range(self.vertex_count), 2)
        return SimpleGraph(self.vertex_count, frozenset(p for p in all_pairs if p not in self.edges))

    @property
    def label(self) -> str:
        return pattern_label(self)


@dataclass(frozen=True)
class UniformHypergraph:
    vertex_count: int
    arity: int
    hyperedges: frozenset
    kind: str | None = field(default=None, compare=False)
    params: tuple = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.arity < 2:
            raise ValueError("hypergraph arity must be at least 2")
        norm = set()
        for e in self.hyperedges:
            t = tuple(sorted(e))
            if len(t) != self.arity or len(set(t)) != self.arity:
                raise ValueError(f"hyperedge {e} does not have {self.arity} distinct vertices")
            if t[0] < 0 or t[-1] >= self.vertex_count:
                raise ValueError(f"hyperedge {e} out of range")
            norm.add(t)
        object.__setattr__(self, "hyperedges", frozenset(norm))

    @property
    def edges(self) -> frozenset:
        return self.hyperedges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.hyperedges)

    @property
    def label(self) -> str:
        return pattern_label(self)


TargetPattern = Union[SimpleGraph, UniformHypergraph]


def make_pattern(kind: str, *params: int) -> TargetPattern:
    """Build one of the named forbidden patterns on its minimal vertex set.

    ``complete(t)``, ``complete_minus_edge(t)``, ``cycle(m)``, ``star(s)``
    (the star ``K_{1,s}`` with center 0), ``book(s)`` (spine ``{0,1}``) and
    ``k4_minus_hyper`` (three of the four triples of ``{0,1,2,3}``).
    """
    def need(count: int) -> None:
        if len(params) != count:
            raise ValueError(f"{kind} takes {count} parameter(s), got {len(params)}")

    if kind == "complete":
        need(1)
        (t,) = params
        if t < 2:
            raise ValueError("complete graph needs t >= 2")
        edges = itertools.combinations(range(t), 2)
        return SimpleGraph(t, frozenset(edges), kind, params)
    if kind == "complete_minus_edge":
        need(1)
        (t,) = params
        if t < 3:
            raise ValueError("K_t - e needs t >= 3")
        edges = set(itertools.combinations(range(t), 2)) - {(t - 2, t - 1)}
        return SimpleGraph(t, frozenset(edges), kind, params)
    if kind == "cycle":
        need(1)
        (m,) = params
        if m < 3:
            raise ValueError("cycle length must be at least 3")
        edges = {(i, (i + 1) % m) for i in range(m)}
        return SimpleGraph(m, frozenset(edges), kind, params)
    if kind == "star":
        need(1)
        (s,) = params
        if s < 1:
            raise ValueError("star needs s >= 1 leaves")
        return SimpleGraph(s + 1, frozenset((0, i) for i in range(1, s + 1)), kind, params)
    if kind == "book":
        need(1)
        (s,) = params
        if s < 1:
            raise ValueError("book needs s >= 1 pages")
        edges = {(0, 1)} | {(0, i) for i in range(2, s + 2)} | {(1, i) for i in range(2, s + 2)}
        return SimpleGraph(s + 2, frozenset(edges), kind, params)
    if kind == "k4_minus_hyper":
        need(0)
        triples = list(itertools.combinations(range(4), 3))[:3]
        return UniformHypergraph(4, 3, frozenset(triples), kind, ())
    raise ValueError(f"unknown pattern kind {kind!r}")


_LABELS = {
    "complete": "K_{}",
    "complete_minus_edge": "K_{}-e",
    "cycle": "C_{}",
    "star": "K_{{1,{}}}",
    "book": "B_{}",
}

_FAMILY_RANK = {"complete": 0, "complete_minus_edge": 1, "cycle": 2, "star": 3, "book": 4, "k4_minus_hyper": 5}


def pattern_label(pattern: TargetPattern) -> str:
    if pattern.kind == "k4_minus_hyper":
        return "K_4^-"
    if pattern.kind in _LABELS:
        return _LABELS[pattern.kind].format(*pattern.params)
    edges = ",".join("".join(map(str, e)) for e in pattern.sorted_edges())
    return f"H[{pattern.vertex_count}:{edges}]"


def pattern_sort_key(pattern: TargetPattern) -> tuple:
    """Order used when printing R(G_1,...,G_k): cliques first, then by family and size."""
    return (_FAMILY_RANK.get(pattern.kind, 9), pattern.vertex_count, len(pattern.edges), pattern_label(pattern))


def _has_isolated_vertices(pattern: TargetPattern) -> bool:
    used = set(itertools.chain.from_iterable(pattern.edges))
    return len(used) < pattern.vertex_count


@lru_cache(maxsize=None)
def _local_templates(pattern: TargetPattern) -> tuple[tuple[Edge, ...], ...]:
    """Distinct edge sets of the pattern laid onto vertices ``0..v-1``.

    Each entry is one labelled copy inside ``K_v``; together they represent
    ``v! / |Aut(P)|`` copies. Known families use closed forms, anything else
    falls back to deduplicating all vertex permutations.
    """
    v = pattern.vertex_count
    kind = pattern.kind
    local: set[tuple[Edge, ...]] = set()
    if kind == "complete":
        local.add(tuple(itertools.combinations(range(v), 2)))
    elif kind == "complete_minus_edge":
        full = list(itertools.combinations(range(v), 2))
        for missing in full:
            local.add(tuple(e for e in full if e != missing))
    elif kind == "cycle":
        for rest in itertools.permutations(range(1, v)):
            if rest[0] > rest[-1]:
                continue
            order = (0,) + rest
            local.add(tuple(sorted(tuple(sorted((order[i], order[(i + 1) % v]))) for i in range(v))))
    elif kind == "star":
        for c in range(v):
            local.add(tuple(sorted(tuple(sorted((c, x))) for x in range(v) if x != c)))
    elif kind == "book":
        for a, b in itertools.combinations(range(v), 2):
            pages = [x for x in range(v) if x not in (a, b)]
            edges = {(a, b)} | {tuple(sorted((a, x))) for x in pages} | {tuple(sorted((b, x))) for x in pages}
            local.add(tuple(sorted(edges)))
    elif kind == "k4_minus_hyper":
        triples = list(itertools.combinations(range(4), 3))
        for omit in triples:
            local.add(tuple(t for t in triples if t != omit))
    else:
        if v > 9:
            raise ValueError("generic patterns are limited to 9 vertices")
        base = pattern.sorted_edges()
        for perm in itertools.permutations(range(v)):
            local.add(tuple(sorted(tuple(sorted(perm[x] for x in e)) for e in base)))
    return tuple(sorted(local))


def edge_list(n: int, arity: int = 2) -> list[Edge]:
    return list(itertools.combinations(range(n), arity))


@lru_cache(maxsize=32)
def _rank_table(n: int, arity: int) -> np.ndarray:
    table = np.full((n,) * arity, -1, dtype=np.int64)
    for i, e in enumerate(itertools.combinations(range(n), arity)):
        table[e] = i
    return table


@lru_cache(maxsize=64)
def copy_index_array(pattern: TargetPattern, n: int) -> np.ndarray:
    """Copies of ``pattern`` in the complete host on ``n`` vertices as edge ranks.

    Row ``i`` lists the (sorted) ranks of the edges of copy ``i``; rows are in
    lexicographic order, which matches ordering copies by sorted edge lists.
    """
    v = pattern.vertex_count
    if n < v:
        raise ValueError(f"host on {n} vertices is smaller than the pattern ({v} vertices)")
    rank = _rank_table(n, pattern.arity)
    subsets = np.array(list(itertools.combinations(range(n), v)), dtype=np.int64).reshape(-1, v)
    blocks = []
    for template in _local_templates(pattern):
        cols = [rank[tuple(subsets[:, x] for x in e)] for e in template]
        blocks.append(np.stack(cols, axis=1))
    rows = np.concatenate(blocks, axis=0)
    rows.sort(axis=1)
    if _has_isolated_vertices(pattern):
        rows = np.unique(rows, axis=0)
    order = np.lexsort(rows.T[::-1])
    out = np.ascontiguousarray(rows[order])
    out.setflags(write=False)
    return out


def enumerate_copies(pattern: TargetPattern, n: int) -> list[tuple[Edge, ...]]:
    """Every copy of ``pattern`` inside the complete (hyper)graph on ``n`` vertices, once each."""
    edges = edge_list(n, pattern.arity)
    return [tuple(edges[i] for i in row) for row in copy_index_array(pattern, n).tolist()]


@dataclass(frozen=True)
class EdgeColoring:
    """A k-coloring of all r-subsets of ``0..n-1``; ``colors`` follows lexicographic edge order."""

    vertex_count: int
    color_count: int
    colors: tuple[int, ...]
    arity: int = 2

    def __post_init__(self) -> None:
        if self.color_count < 1:
            raise ValueError("a coloring needs at least one color")
        expected = math.comb(self.vertex_count, self.arity)
        if len(self.colors) != expected:
            raise ValueError(f"expected {expected} edge colors, got {len(self.colors)}")
        if any(not 0 <= c < self.color_count for c in self.colors):
            raise ValueError("edge color out of range")

    @classmethod
    def from_function(cls, n: int, k: int, fn, arity: int = 2) -> "EdgeColoring":
        return cls(n, k, tuple(fn(e) for e in itertools.combinations(range(n), arity)), arity)

    @classmethod
    def monochromatic(cls, n: int, k: int = 1, color: int = 0, arity: int = 2) -> "EdgeColoring":
        return cls(n, k, (color,) * math.comb(n, arity), arity)

    def edges(self) -> list[Edge]:
        return edge_list(self.vertex_count, self.arity)

    def color_of(self, edge: Iterable[int]) -> int:
        e = tuple(sorted(edge))
        return self.colors[int(_rank_table(self.vertex_count, self.arity)[e])]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.colors, dtype=np.int8)

    def color_class(self, color: int) -> SimpleGraph:
        if self.arity != 2:
            raise ValueError("color classes are simple graphs only for arity 2")
        return SimpleGraph(self.vertex_count, frozenset(e for e, c in zip(self.edges(), self.colors) if c == color))

    def with_color(self, edge: Iterable[int], color: int) -> "EdgeColoring":
        e = tuple(sorted(edge))
        i = int(_rank_table(self.vertex_count, self.arity)[e])
        colors = list(self.colors)
        colors[i] = color
        return EdgeColoring(self.vertex_count, max(self.color_count, color + 1), tuple(colors), self.arity)

    def restrict(self, m: int) -> "EdgeColoring":
        """The induced coloring on the first ``m`` vertices."""
        keep = [c for e, c in zip(self.edges(), self.colors) if e[-1] < m]
        return EdgeColoring(m, self.color_count, tuple(keep), self.arity)

    @classmethod
    def from_graph(cls, graph: SimpleGraph) -> "EdgeColoring":
        """Two-coloring with the graph's edges in color 0 and non-edges in color 1."""
        return cls.from_function(graph.vertex_count, 2, lambda e: 0 if e in graph.edges else 1)


def contains_monochromatic(coloring: EdgeColoring, pattern: TargetPattern, color: int) -> tuple[Edge, ...] | None:
    """Lexicographically smallest copy of ``pattern`` entirely in ``color``, or None."""
    if pattern.arity != coloring.arity:
        raise ValueError(f"pattern arity {pattern.arity} does not match coloring arity {coloring.arity}")
    if not 0 <= color < coloring.color_count:
        raise ValueError(f"color {color} out of range for a {coloring.color_count}-coloring")
    if coloring.vertex_count < pattern.vertex_count:
        return None
    copies = copy_index_array(pattern, coloring.vertex_count)
    hits = np.flatnonzero((coloring.as_array()[copies] == color).all(axis=1))
    if hits.size == 0:
        return None
    edges = coloring.edges()
    return tuple(edges[i] for i in copies[hits[0]].tolist())


# -- canonical forms ---------------------------------------------------------


def _refine(adj: list[int], cells: list[list[int]]) -> list[list[int]]:
    """Equitable refinement: split cells by neighbour counts into every cell."""
    while True:
        masks = [sum(1 << v for v in cell) for cell in cells]
        out: list[list[int]] = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                out.append(cell)
                continue
            groups: dict[tuple, list[int]] = {}
            for v in cell:
                sig = tuple((adj[v] & m).bit_count() for m in masks)
                groups.setdefault(sig, []).append(v)
            if len(groups) > 1:
                changed = True
                out.extend(groups[s] for s in sorted(groups))
            else:
                out.append(cell)
        cells = out
        if not changed:
            return cells


def _code_bits(adj: list[int], order: list[int]) -> tuple[int, ...]:
    # upper triangle, column by column: (0,1),(0,2),(1,2),(0,3),...
    bits = []
    for j in range(1, len(order)):
        vj = adj[order[j]]
        for i in range(j):
            bits.append((vj >> order[i]) & 1)
    return tuple(bits)


def _canonical_bits(adj: list[int], cells: list[list[int]]) -> tuple[int, ...]:
    best: tuple[int, ...] | None = None
    stack = [cells]
    while stack:
        part = _refine(adj, stack.pop())
        if all(len(c) == 1 for c in part):
            bits = _code_bits(adj, [c[0] for c in part])
            if best is None or bits < best:
                best = bits
            continue
        target = min((i for i, c in enumerate(part) if len(c) > 1), key=lambda i: (len(part[i]), i))
        cell = part[target]
        # twins inside the target cell give isomorphic branches
        seen_twins: list[int] = []
        for v in cell:
            if any((adj[v] & ~(1 << u)) == (adj[u] & ~(1 << v)) for u in seen_twins):
                continue
            seen_twins.append(v)
            rest = [u for u in cell if u != v]
            stack.append(part[:target] + [[v], rest] + part[target + 1 :])
    return best if best is not None else ()


def canonical_form(graph: SimpleGraph, limit: int = CANONICAL_LIMIT, partition: Sequence[Sequence[int]] | None = None) -> bytes:
    """Isomorphism-invariant code: equal codes iff the graphs are isomorphic.

    The code is the smallest adjacency bit string (upper triangle, column by
    column) over the vertex orders reachable by individualising vertices and
    refining the degree partition. An optional ordered ``partition`` restricts
    relabelings to those preserving its cells (vertex-colored graphs).
    """
    n = graph.vertex_count
    if n > limit:
        raise ValueError(f"canonical_form is limited to {limit} vertices, got {n}")
    adj = graph.adjacency_masks()
    cells = [list(c) for c in partition] if partition is not None else [list(range(n))]
    if sorted(v for c in cells for v in c) != list(range(n)):
        raise ValueError("partition must cover every vertex exactly once")
    cells = [c for c in cells if c]
    bits = _canonical_bits(adj, cells) if n else ()
    header = n.to_bytes(2, "big") + bytes(len(c) for c in (partition or []))
    return header + bytes(np.packbits(np.array(bits, dtype=np.uint8)).tolist()) if bits else header


def canonical_coloring_form(coloring: EdgeColoring, limit: int = CANONICAL_LIMIT) -> bytes:
    """Canonical code of an edge coloring of a complete graph, up to vertex relabeling.

    Two colors reduce to the color-0 graph. More colors use a layered graph:
    one copy of the vertex set per color, layers joined vertex-wise, and an
    edge of color c drawn inside layer c; layers stay fixed as cells.
    """
    if coloring.arity != 2:
        raise ValueError("canonical forms are only defined for graph colorings")
    n, k = coloring.vertex_count, coloring.color_count
    if n > limit:
        raise ValueError(f"canonical_form is limited to {limit} vertices, got {n}")
    if k <= 2:
        return canonical_form(coloring.color_class(0), limit)
    edges = set()
    for (u, v), c in zip(coloring.edges(), coloring.colors):
        edges.add((c * n + u, c * n + v))
    for c in range(k - 1):
        for v in range(n):
            edges.add((c * n + v, (c + 1) * n + v))
    layered = SimpleGraph(n * k, frozenset(edges))
    cells = [list(range(c * n, (c + 1) * n)) for c in range(k)]
    return canonical_form(layered, limit * k, cells)


# -- coloring matrix text format ---------------------------------------------


def parse_coloring_matrix(text: str) -> EdgeColoring:
    """Parse the square 'x'-diagonal digit matrix used for witness colorings."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    n = len(lines)
    if n == 0:
        raise ValueError("empty coloring matrix")
    for i, line in enumerate(lines):
        if len(line) != n:
            raise ValueError(f"row {i} has {len(line)} characters, expected {n} (matrix must be square)")
        if line[i] != "x":
            raise ValueError(f"row {i}: diagonal entry is {line[i]!r}, expected 'x'")
        for j, ch in enumerate(line):
            if j != i and ch not in "0123456789":
                raise ValueError(f"invalid character {ch!r} at ({i},{j})")
    colors = []
    for i, j in itertools.combinations(range(n), 2):
        if lines[i][j] != lines[j][i]:
            raise ValueError(f"asymmetric entries at ({i},{j}): {lines[i][j]!r} vs {lines[j][i]!r}")
        colors.append(int(lines[i][j]))
    k = max(colors) + 1 if colors else 1
    return EdgeColoring(n, k, tuple(colors))


def emit_coloring_matrix(coloring: EdgeColoring) -> str:
    if coloring.arity != 2:
        raise ValueError("only graph colorings have a matrix form")
    if coloring.color_count > 10:
        raise ValueError("the matrix format holds at most 10 colors")
    n = coloring.vertex_count
    rows = [["x"] * n for _ in range(n)]
    for (u, v), c in zip(coloring.edges(), coloring.colors):
        rows[u][v] = rows[v][u] = str(c)
    return "\n".join("".join(r) for r in rows)
