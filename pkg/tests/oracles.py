"""Brute-force reference computations that share no code with the package.

Everything here works from vertex permutations, raw edge lists or networkx,
so agreement with the package is evidence rather than a tautology.
"""

from __future__ import annotations

import itertools
import math
from array import array

import networkx as nx
import numpy as np


def labelled_copies(edges: list[tuple[int, ...]], v: int, n: int) -> set[frozenset]:
    """Distinct edge sets of all injective images of a v-vertex pattern in K_n."""
    out = set()
    for image in itertools.permutations(range(n), v):
        out.add(frozenset(tuple(sorted(image[x] for x in e)) for e in edges))
    return out


def copy_masks(edges, v: int, n: int, arity: int = 2) -> np.ndarray:
    """Copies as boolean masks over the lexicographic list of r-subsets."""
    index = {e: i for i, e in enumerate(itertools.combinations(range(n), arity))}
    copies = labelled_copies(edges, v, n)
    masks = np.zeros((len(copies), len(index)), dtype=bool)
    for row, copy in enumerate(sorted(copies, key=sorted)):
        for e in copy:
            masks[row, index[e]] = True
    return masks


def avoiding_colorings(patterns, n: int) -> set[tuple[int, ...]]:
    """Every k-coloring of K_n (as color tuples) with no pattern i in color i."""
    k = len(patterns)
    arity = patterns[0][2] if len(patterns[0]) > 2 else 2
    E = math.comb(n, arity)
    total = k**E
    digits = np.zeros((total, E), dtype=np.int8)
    idx = np.arange(total, dtype=np.int64)
    for j in range(E - 1, -1, -1):
        digits[:, j] = idx % k
        idx //= k
    ok = np.ones(total, dtype=bool)
    for color, pat in enumerate(patterns):
        edges, v = pat[0], pat[1]
        if v > n:
            continue
        masks = copy_masks(edges, v, n, arity)
        is_c = digits == color
        for m in masks:
            ok &= ~is_c[:, m].all(axis=1)
    return {tuple(int(x) for x in row) for row in digits[ok]}


def has_cycle(g: nx.Graph, m: int) -> bool:
    nodes = sorted(g)
    for subset in itertools.combinations(nodes, m):
        first = subset[0]
        for rest in itertools.permutations(subset[1:]):
            if rest[0] > rest[-1]:
                continue
            cyc = (first,) + rest
            if all(g.has_edge(cyc[i], cyc[(i + 1) % m]) for i in range(m)):
                return True
    return False


def cycle_star_census(m: int, s: int, n: int) -> list[nx.Graph]:
    """Isomorphism classes of C_m-free graphs on n vertices whose complement has no K_{1,s}.

    Grows C_m-free graphs one vertex at a time (the property is hereditary)
    and keeps one graph per isomorphism class using networkx's VF2 matcher.
    """
    layer = [nx.empty_graph(1)]
    for size in range(2, n + 1):
        nxt: dict[str, list[nx.Graph]] = {}
        for g in layer:
            for r in range(size):
                for nbrs in itertools.combinations(range(size - 1), r):
                    h = g.copy()
                    h.add_node(size - 1)
                    h.add_edges_from((size - 1, x) for x in nbrs)
                    if size >= m and has_cycle(h, m):
                        continue
                    key = nx.weisfeiler_lehman_graph_hash(h, iterations=3) + str(sorted(d for _, d in h.degree()))
                    bucket = nxt.setdefault(key, [])
                    if not any(nx.is_isomorphic(h, other) for other in bucket):
                        bucket.append(h)
        layer = [g for bucket in nxt.values() for g in bucket]
    min_degree = (n - 1) - (s - 1)
    return [g for g in layer if min(dict(g.degree()).values(), default=0) >= min_degree]


def monochromatic_subset_exists(color_of, n: int, edges, v: int, color: int) -> bool:
    """Plain loop over vertex subsets and bijections, no numpy, no shared helpers."""
    for subset in itertools.combinations(range(n), v):
        for perm in itertools.permutations(subset):
            if all(color_of(tuple(sorted(perm[x] for x in e))) == color for e in edges):
                return True
    return False


def avoiding_colorings_backtrack(patterns, n: int, codes: bool = False):
    """Same contract as avoiding_colorings, by edge-by-edge backtracking.

    Colors the lexicographic edge list left to right and rejects a color as
    soon as it completes a monochromatic copy, so the cost tracks the number
    of partial colorings rather than k^E. With ``codes`` the result is a
    sorted int64 array of coloring_code values, which is far smaller than a
    set of tuples when there are millions of colorings.
    """
    edges = list(itertools.combinations(range(n), 2))
    index = {e: i for i, e in enumerate(edges)}
    k = len(patterns)
    closing = [[[] for _ in edges] for _ in range(k)]
    for color, (pat_edges, v) in enumerate(patterns):
        if v > n:
            continue
        for copy in labelled_copies(pat_edges, v, n):
            ids = sorted(index[e] for e in copy)
            closing[color][ids[-1]].append(ids[:-1])
    out = set()
    packed = array("q")
    colors = [0] * len(edges)
    E = len(edges)
    weights = [k**i for i in range(E)]

    def extend(i: int, code: int) -> None:
        if i == E:
            if codes:
                packed.append(code)
            else:
                out.add(tuple(colors))
            return
        for c in range(k):
            if any(all(colors[j] == c for j in rest) for rest in closing[c][i]):
                continue
            colors[i] = c
            extend(i + 1, code + c * weights[i])

    extend(0, 0)
    if codes:
        return np.sort(np.frombuffer(packed, dtype=np.int64))
    return out


def coloring_code(colors, k: int) -> int:
    """Base-k integer with edge i as digit i."""
    code = 0
    for c in reversed(colors):
        code = code * k + c
    return code
