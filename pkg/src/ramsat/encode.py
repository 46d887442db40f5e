"""Compile Ramsey-avoidance problems to CNF and map models back to colorings.

Variable ``e*k + c + 1`` says that edge ``e`` (lexicographic rank of the
r-subset) has color ``c``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graphs import EdgeColoring, TargetPattern, copy_index_array, edge_list
from .groups import FiniteGroup

TAG_AT_LEAST_ONE = "at_least_one"
TAG_AT_MOST_ONE = "at_most_one"
TAG_CAYLEY = "cayley"
TAG_SYMMETRY = "symmetry"
TAG_DEGREE = "degree"


def forbid_tag(pattern: TargetPattern, color: int) -> str:
    return f"forbid({pattern.label},{color})"


@dataclass(frozen=True)
class VariableMap:
    n: int
    k: int
    arity: int = 2
    edges: tuple = field(init=False, repr=False, compare=False)
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        edges = tuple(edge_list(self.n, self.arity))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "index", {e: i for i, e in enumerate(edges)})

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def variable_count(self) -> int:
        return len(self.edges) * self.k

    def var(self, edge_index: int, color: int) -> int:
        return edge_index * self.k + color + 1

    def var_of(self, edge: Iterable[int], color: int) -> int:
        return self.var(self.index[tuple(sorted(edge))], color)

    def lookup(self, var: int) -> tuple[tuple[int, ...], int]:
        if not 1 <= var <= self.variable_count:
            raise KeyError(f"variable {var} is not an edge-color variable")
        e, c = divmod(var - 1, self.k)
        return self.edges[e], c

    def color_variables(self, color: int) -> list[int]:
        return [self.var(e, color) for e in range(self.edge_count)]

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "k": self.k, "arity": self.arity, "numbering": "e*k+c+1"}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "VariableMap":
        data = json.loads(text)
        return cls(data["n"], data["k"], data.get("arity", 2))


class CnfFormula:
    """Clause database split into tagged groups; clauses are deduplicated per group."""

    def __init__(self, variable_count: int = 0):
        self.variable_count = variable_count
        self.groups: dict[str, list[tuple[int, ...]]] = {}
        self._seen: dict[str, set] = {}

    def new_var(self) -> int:
        self.variable_count += 1
        return self.variable_count

    def add(self, tag: str, clause: Iterable[int]) -> bool:
        """Add one clause under ``tag``; returns False if the group already had it."""
        lits = tuple(dict.fromkeys(int(x) for x in clause))
        for lit in lits:
            if lit == 0 or abs(lit) > self.variable_count:
                raise ValueError(f"literal {lit} outside 1..{self.variable_count}")
        if len(set(map(abs, lits))) != len(lits):
            raise ValueError(f"tautological clause {lits}")
        key = tuple(sorted(lits))
        seen = self._seen.setdefault(tag, set())
        if key in seen:
            return False
        seen.add(key)
        self.groups.setdefault(tag, []).append(lits)
        return True

    def extend(self, tag: str, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add(tag, c)

    def _extend_trusted(self, tag: str, clauses: list[tuple[int, ...]]) -> None:
        # caller guarantees valid, tautology-free, pairwise distinct clauses
        seen = self._seen.setdefault(tag, set())
        group = self.groups.setdefault(tag, [])
        for c in clauses:
            key = tuple(sorted(c))
            if key not in seen:
                seen.add(key)
                group.append(c)

    @property
    def clauses(self) -> list[tuple[int, ...]]:
        return [c for group in self.groups.values() for c in group]

    @property
    def clause_count(self) -> int:
        return sum(len(g) for g in self.groups.values())

    def has_tag(self, tag: str) -> bool:
        return bool(self.groups.get(tag))

    def group_sizes(self) -> dict[str, int]:
        return {t: len(g) for t, g in self.groups.items()}

    def copy(self) -> "CnfFormula":
        out = CnfFormula(self.variable_count)
        out.groups = {t: list(g) for t, g in self.groups.items()}
        out._seen = {t: set(s) for t, s in self._seen.items()}
        return out


@dataclass(frozen=True)
class BlockStructureSpec:
    group: FiniteGroup
    blocks: int = 1
    structured_colors: tuple[int, ...] = (0,)
    extension: int = 0

    def __post_init__(self) -> None:
        if self.blocks < 1:
            raise ValueError("block count must be at least 1")
        if self.extension < 0:
            raise ValueError("extension vertex count must be non-negative")
        if not self.structured_colors:
            raise ValueError("at least one structured color is required")
        object.__setattr__(self, "structured_colors", tuple(sorted(set(self.structured_colors))))

    @property
    def vertex_count(self) -> int:
        return self.blocks * self.group.order + self.extension


@dataclass(frozen=True)
class EncodingSpec:
    n: int
    patterns: tuple
    block: BlockStructureSpec | None = None
    symmetry_breaking: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "patterns", tuple(self.patterns))
        if not self.patterns:
            raise ValueError("need at least one color")
        arities = {p.arity for p in self.patterns}
        if len(arities) != 1:
            raise ValueError(f"all patterns must share one arity, got {sorted(arities)}")
        for p in self.patterns:
            if not p.edges:
                raise ValueError("patterns must have at least one edge")
            if p.vertex_count > self.n:
                raise ValueError(f"pattern {p.label} has more than n={self.n} vertices")
        if self.block is not None:
            if self.block.vertex_count != self.n:
                raise ValueError(f"block structure covers {self.block.vertex_count} vertices, but n={self.n}")
            if self.symmetry_breaking:
                raise ValueError("vertex symmetry breaking cannot be combined with block structure")

    @property
    def k(self) -> int:
        return len(self.patterns)

    @property
    def arity(self) -> int:
        return self.patterns[0].arity


def encode_ramsey(spec: EncodingSpec) -> tuple[CnfFormula, VariableMap]:
    """Clauses asserting a k-coloring of ``K_n`` with no copy of pattern i in color i."""
    varmap = VariableMap(spec.n, spec.k, spec.arity)
    formula = CnfFormula(varmap.variable_count)
    k = spec.k
    E = varmap.edge_count
    formula._extend_trusted(TAG_AT_LEAST_ONE, [tuple(e * k + c + 1 for c in range(k)) for e in range(E)])
    pairs = list(itertools.combinations(range(k), 2))
    formula._extend_trusted(TAG_AT_MOST_ONE, [(-(e * k + a + 1), -(e * k + b + 1)) for e in range(E) for a, b in pairs])
    for color, pattern in enumerate(spec.patterns):
        lits = -(copy_index_array(pattern, spec.n) * k + color + 1)
        formula._extend_trusted(forbid_tag(pattern, color), [tuple(r) for r in lits.tolist()])
    if spec.block is not None:
        add_block_cayley(formula, varmap, spec.block)
    if spec.symmetry_breaking:
        add_symmetry_breaking(formula, varmap)
    return formula, varmap


def expected_clause_count(n: int, patterns: Sequence[TargetPattern]) -> int:
    """``E + E*C(k,2) + sum_i |copies(G_i, n)|`` with ``E = C(n, r)``."""
    k = len(patterns)
    E = math.comb(n, patterns[0].arity)
    return E + E * math.comb(k, 2) + sum(len(copy_index_array(p, n)) for p in patterns)


def add_block_cayley(formula: CnfFormula, varmap: VariableMap, spec: BlockStructureSpec) -> CnfFormula:
    """Force each structured color to be block Cayley on the first ``b*|G|`` vertices.

    Vertex ``h + b*|G|`` is group element ``h`` in block ``b``. For blocks
    ``b1 <= b2`` and ``g != 0`` all edges ``{h + b1*|G|, g*h + b2*|G|}`` get the
    same color status, via pairwise implications.
    """
    if varmap.arity != 2:
        raise ValueError("block Cayley structure is only defined for graphs")
    if spec.vertex_count != varmap.n:
        raise ValueError(f"block structure covers {spec.vertex_count} vertices, but n={varmap.n}")
    for c in spec.structured_colors:
        if not 0 <= c < varmap.k:
            raise ValueError(f"structured color {c} out of range")
    group = spec.group
    order = group.order
    table = group.table
    clauses = []
    for color in spec.structured_colors:
        for b1, b2 in itertools.combinations_with_replacement(range(spec.blocks), 2):
            for g in range(1, order):
                orbit = []
                for h in range(order):
                    u, v = h + b1 * order, int(table[g, h]) + b2 * order
                    assert u != v, "g != identity cannot fix an element"
                    orbit.append(varmap.var_of((u, v), color))
                for x1 in orbit:
                    for x2 in orbit:
                        if x1 != x2:
                            clauses.append((-x1, x2))
    formula._extend_trusted(TAG_CAYLEY, clauses)
    return formula


def induced_variable_permutation(varmap: VariableMap, perm: Sequence[int]) -> list[int]:
    """``image[v]`` is the variable of the edge ``perm(e)`` with the same color as ``v``."""
    image = [0] * (varmap.variable_count + 1)
    for e, edge in enumerate(varmap.edges):
        e2 = varmap.index[tuple(sorted(perm[x] for x in edge))]
        for c in range(varmap.k):
            image[varmap.var(e, c)] = varmap.var(e2, c)
    return image


def adjacent_transpositions(n: int) -> list[list[int]]:
    out = []
    for i in range(n - 1):
        p = list(range(n))
        p[i], p[i + 1] = p[i + 1], p[i]
        out.append(p)
    return out


def all_transpositions(n: int) -> list[list[int]]:
    out = []
    for i, j in itertools.combinations(range(n), 2):
        p = list(range(n))
        p[i], p[j] = j, i
        out.append(p)
    return out


def add_symmetry_breaking(
    formula: CnfFormula, varmap: VariableMap, generators: Sequence[Sequence[int]] | None = None
) -> CnfFormula:
    """Lex-leader clauses: the assignment is lex <= its image under each vertex permutation.

    Variables are compared in id order (false < true), skipping positions a
    permutation fixes. Chain variable ``q_i`` holds when the prefix up to
    position i is equal; three clauses per position.
    """
    if formula.has_tag(TAG_CAYLEY):
        raise ValueError("vertex symmetry breaking cannot be combined with block Cayley clauses")
    n = varmap.n
    if generators is None:
        generators = adjacent_transpositions(n)
    for perm in generators:
        if sorted(perm) != list(range(n)):
            raise ValueError(f"{list(perm)} is not a permutation of 0..{n - 1}")
    for perm in generators:
        image = induced_variable_permutation(varmap, perm)
        moved = [v for v in range(1, varmap.variable_count + 1) if image[v] != v]
        prev = None  # chain variable; None means the empty prefix, which is always equal
        for pos, x in enumerate(moved):
            y = image[x]
            guard = () if prev is None else (-prev,)
            formula.add(TAG_SYMMETRY, guard + (-x, y))
            if pos == len(moved) - 1:
                break
            eq = formula.new_var()
            formula.add(TAG_SYMMETRY, guard + (-x, eq))
            formula.add(TAG_SYMMETRY, guard + (y, eq))
            prev = eq
    return formula


def at_most_k(formula: CnfFormula, tag: str, lits: Sequence[int], k: int) -> None:
    """Sequential-counter encoding of ``sum(lits) <= k``."""
    m = len(lits)
    if k >= m:
        return
    if k == 0:
        for x in lits:
            formula.add(tag, (-x,))
        return
    s = [[formula.new_var() for _ in range(k)] for _ in range(m - 1)]
    formula.add(tag, (-lits[0], s[0][0]))
    for j in range(1, k):
        formula.add(tag, (-s[0][j],))
    for i in range(1, m - 1):
        x = lits[i]
        formula.add(tag, (-x, s[i][0]))
        formula.add(tag, (-s[i - 1][0], s[i][0]))
        for j in range(1, k):
            formula.add(tag, (-x, -s[i - 1][j - 1], s[i][j]))
            formula.add(tag, (-s[i - 1][j], s[i][j]))
        formula.add(tag, (-x, -s[i - 1][k - 1]))
    formula.add(tag, (-lits[m - 1], -s[m - 2][k - 1]))


def add_min_degree(formula: CnfFormula, varmap: VariableMap, color: int, min_degree: int) -> CnfFormula:
    """Every vertex has at least ``min_degree`` incident edges of ``color``."""
    if varmap.arity != 2:
        raise ValueError("degree clauses are only defined for graphs")
    for v in range(varmap.n):
        incident = [varmap.var_of((v, u), color) for u in range(varmap.n) if u != v]
        # at least d true  <=>  at most (m - d) false
        at_most_k(formula, TAG_DEGREE, [-x for x in incident], len(incident) - min_degree)
    return formula


def emit_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.variable_count} {formula.clause_count}"]
    for tag, group in formula.groups.items():
        lines.append(f"c group {tag}")
        lines.extend(" ".join(map(str, c)) + " 0" for c in group)
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """Read DIMACS CNF; ``c group <tag>`` comments restore clause groups."""
    formula: CnfFormula | None = None
    tag = "clauses"
    pending: list[int] = []
    declared = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            if line.startswith("c group "):
                tag = line[len("c group ") :].strip()
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line {line!r}")
            formula = CnfFormula(int(parts[2]))
            declared = int(parts[3])
            continue
        if formula is None:
            raise ValueError("clause before the 'p cnf' header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                formula.groups.setdefault(tag, []).append(tuple(pending))
                formula._seen.setdefault(tag, set()).add(tuple(sorted(pending)))
                pending = []
            else:
                pending.append(lit)
    if formula is None:
        raise ValueError("missing 'p cnf' header")
    if pending:
        raise ValueError("last clause is not terminated by 0")
    if declared is not None and formula.clause_count != declared:
        raise ValueError(f"header declares {declared} clauses, found {formula.clause_count}")
    return formula


def decode_model(model: Sequence[int], varmap: VariableMap) -> EdgeColoring:
    """Coloring from a model given as signed literals (index ``v-1`` holds ``+-v``)."""
    if len(model) < varmap.variable_count:
        raise ValueError("model does not assign every edge-color variable")
    k = varmap.k
    truth = np.asarray(model[: varmap.variable_count]) > 0
    per_edge = truth.reshape(varmap.edge_count, k)
    counts = per_edge.sum(axis=1)
    bad = np.flatnonzero(counts != 1)
    if bad.size:
        e = int(bad[0])
        raise ValueError(f"edge {varmap.edges[e]} has {int(counts[e])} true color variables, expected exactly one")
    colors = tuple(int(c) for c in per_edge.argmax(axis=1))
    return EdgeColoring(varmap.n, k, colors, varmap.arity)
