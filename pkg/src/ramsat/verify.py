"""Independent checks of witness colorings and of block Cayley structure."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graphs import EdgeColoring, TargetPattern, contains_monochromatic, copy_index_array, pattern_label, pattern_sort_key
from .groups import FiniteGroup

COPIES = "copies"
SUBSET_SCAN = "subset_scan"


@dataclass(frozen=True)
class ColorResult:
    color: int
    pattern: str
    witness: tuple | None
    examined: int

    @property
    def clean(self) -> bool:
        return self.witness is None


@dataclass(frozen=True)
class VerificationReport:
    vertex_count: int
    arity: int
    patterns: tuple
    results: tuple[ColorResult, ...]
    strategy: str = COPIES

    @property
    def clean(self) -> bool:
        return all(r.clean for r in self.results)

    @property
    def verdict(self) -> str:
        return "clean" if self.clean else "violation"

    def bound_statement(self) -> str | None:
        return implied_lower_bound(self, self.vertex_count) if self.clean else None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "n": self.vertex_count,
            "strategy": self.strategy,
            "colors": [
                {
                    "color": r.color,
                    "pattern": r.pattern,
                    "status": "clean" if r.clean else "violation",
                    "witness": [list(e) for e in r.witness] if r.witness else None,
                    "examined": r.examined,
                }
                for r in self.results
            ],
            "bound": self.bound_statement(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict} (n={self.vertex_count}, {self.strategy})"]
        for r in self.results:
            if r.clean:
                lines.append(f"  color {r.color} ({r.pattern}): clean, {r.examined} copies examined")
            else:
                edges = " ".join("-".join(map(str, e)) for e in r.witness)
                lines.append(f"  color {r.color} ({r.pattern}): monochromatic copy {edges}")
        if self.clean:
            lines.append(self.bound_statement())
        return "\n".join(lines)


def _check_targets(coloring: EdgeColoring, targets: Sequence[TargetPattern]) -> None:
    if len(targets) != coloring.color_count:
        raise ValueError(f"{len(targets)} targets given for a {coloring.color_count}-coloring")
    for p in targets:
        if p.arity != coloring.arity:
            raise ValueError(f"pattern {p.label} has arity {p.arity}, coloring has arity {coloring.arity}")


def verify_coloring(coloring: EdgeColoring, targets: Sequence[TargetPattern], strategy: str = COPIES) -> VerificationReport:
    """Scan every copy of target i in color i; ``subset_scan`` uses a separate code path."""
    _check_targets(coloring, targets)
    if strategy == COPIES:
        results = []
        for color, pattern in enumerate(targets):
            n = coloring.vertex_count
            examined = len(copy_index_array(pattern, n)) if n >= pattern.vertex_count else 0
            witness = contains_monochromatic(coloring, pattern, color)
            results.append(ColorResult(color, pattern.label, witness, examined))
    elif strategy == SUBSET_SCAN:
        results = [_subset_scan(coloring, p, c) for c, p in enumerate(targets)]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return VerificationReport(coloring.vertex_count, coloring.arity, tuple(targets), tuple(results), strategy)


def _placements(pattern: TargetPattern) -> list[tuple[tuple[int, ...], ...]]:
    """All distinct ways to lay the pattern's edges on local vertices 0..v-1, by brute force."""
    v = pattern.vertex_count
    if v > 8:
        raise ValueError("subset scan is limited to patterns on at most 8 vertices")
    base = [tuple(e) for e in pattern.edges]
    found = set()
    for perm in itertools.permutations(range(v)):
        found.add(frozenset(tuple(sorted(perm[x] for x in e)) for e in base))
    return [tuple(sorted(f)) for f in sorted(found, key=lambda f: sorted(f))]


def _subset_scan(coloring: EdgeColoring, pattern: TargetPattern, color: int) -> ColorResult:
    n, r, v = coloring.vertex_count, coloring.arity, pattern.vertex_count
    if n < v:
        return ColorResult(color, pattern.label, None, 0)
    dense = np.full((n,) * r, -1, dtype=np.int8)
    for e, c in zip(itertools.combinations(range(n), r), coloring.colors):
        for p in itertools.permutations(e):
            dense[p] = c
    subsets = np.array(list(itertools.combinations(range(n), v)), dtype=np.int64)
    placements = _placements(pattern)
    found = []
    for placement in placements:
        ok = np.ones(len(subsets), dtype=bool)
        for e in placement:
            ok &= dense[tuple(subsets[:, x] for x in e)] == color
        for i in np.flatnonzero(ok).tolist():
            sub = subsets[i].tolist()
            found.append(tuple(sorted(tuple(sorted(sub[x] for x in e)) for e in placement)))
    witness = min(found) if found else None
    return ColorResult(color, pattern.label, witness, len(subsets) * len(placements))


# -- structure ---------------------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    ok: bool
    connection_sets: dict = field(default_factory=dict)
    violation: dict | None = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "connection_sets": {f"{c}:{b1}:{b2}": s for (c, b1, b2), s in sorted(self.connection_sets.items())},
            "violation": self.violation,
        }


def verify_block_cayley(
    coloring: EdgeColoring, group: FiniteGroup, blocks: int, structured_colors: Sequence[int]
) -> StructureReport:
    """Check that each structured color is block Cayley over ``group``.

    For blocks ``b1 <= b2`` the connection set ``S`` holds the ``g != 0`` with
    edge ``{b1*|G|, g + b2*|G|}`` in the color (read off at ``h = 0``); every
    translate ``{h + b1*|G|, g*h + b2*|G|}`` must agree with it.
    """
    order = group.order
    n = coloring.vertex_count
    if coloring.arity != 2:
        raise ValueError("block Cayley structure is only defined for graph colorings")
    if n != blocks * order:
        raise ValueError(f"coloring has {n} vertices, expected {blocks}*{order}")
    colmat = np.full((n, n), -1, dtype=np.int64)
    for (u, v), c in zip(coloring.edges(), coloring.colors):
        colmat[u, v] = colmat[v, u] = c
    sets = {}
    for color in structured_colors:
        if not 0 <= color < coloring.color_count:
            raise ValueError(f"color {color} out of range")
        for b1, b2 in itertools.combinations_with_replacement(range(blocks), 2):
            s = []
            for g in range(1, order):
                rep = (b1 * order, group.op(g, 0) + b2 * order)
                member = colmat[rep] == color
                if member:
                    s.append(g)
                for h in range(1, order):
                    edge = (h + b1 * order, group.op(g, h) + b2 * order)
                    if (colmat[edge] == color) != member:
                        violation = {
                            "color": color,
                            "blocks": [b1, b2],
                            "element": g,
                            "representative": sorted(rep),
                            "edge": sorted(edge),
                        }
                        return StructureReport(False, sets, violation)
            sets[(color, b1, b2)] = s
    return StructureReport(True, sets, None)


def implied_lower_bound(report: VerificationReport, n: int) -> str:
    """``R(G_1,...,G_k) ≥ n+1`` for a clean coloring of ``K_n``."""
    if not report.clean:
        raise ValueError("a lower bound needs a clean verification report")
    labels = [pattern_label(p) for p in sorted(report.patterns, key=pattern_sort_key)]
    suffix = f";{report.arity}" if report.arity != 2 else ""
    return f"R({','.join(labels)}{suffix}) ≥ {n + 1}"
