"""Critical colorings up to isomorphism, by blocking-clause enumeration plus canonical filtering."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .encode import EncodingSpec, add_min_degree, add_symmetry_breaking, all_transpositions, decode_model, encode_ramsey
from .graphs import CANONICAL_LIMIT, EdgeColoring, TargetPattern, canonical_coloring_form, emit_coloring_matrix
from .solve import SolveBudget, enumerate_models
from .verify import verify_coloring

log = logging.getLogger(__name__)

# (cycle, star size) rows known to time out at published scale
OPEN_ROWS = {("C_4", s) for s in (17, 18, 19, 20, 23, 24, 25, 26, 27)}


@dataclass
class CriticalCensus:
    targets: tuple
    n: int
    classes: dict = field(default_factory=dict)  # canonical code -> representative coloring
    complete: bool = False
    models_seen: int = 0

    @property
    def count(self) -> int:
        return len(self.classes)

    def codes(self) -> list[bytes]:
        return sorted(self.classes)

    def representatives(self) -> list[EdgeColoring]:
        return [self.classes[c] for c in self.codes()]

    def index(self) -> dict:
        return {
            "targets": [p.label for p in self.targets],
            "n": self.n,
            "count": self.count,
            "complete": self.complete,
            "models_seen": self.models_seen,
            "classes": [{"code": code.hex(), "file": class_filename(code)} for code in self.codes()],
        }

    def write(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        for code in self.codes():
            (directory / class_filename(code)).write_text(emit_coloring_matrix(self.classes[code]) + "\n", encoding="utf-8")
        (directory / "index.json").write_text(json.dumps(self.index(), indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def class_filename(code: bytes) -> str:
    return hashlib.sha256(code).hexdigest()[:16] + ".matrix"


def star_avoidance_as_degree_bound(s: int, n: int) -> int:
    """Color-0 minimum degree equivalent to 'no K_{1,s} in color 1' on ``K_n``."""
    if s < 1:
        raise ValueError("star needs s >= 1")
    return max(0, (n - 1) - (s - 1))


def enumerate_critical(
    targets: Sequence[TargetPattern],
    n: int,
    budget: SolveBudget = SolveBudget(),
    degree_clauses: bool = True,
    symmetry_breaking: bool = True,
    limit: int = CANONICAL_LIMIT,
) -> CriticalCensus:
    """All colorings of ``K_n`` avoiding target i in color i, one per isomorphism class.

    Models are enumerated with blocking clauses over the color-0 variables
    (two colors) or all but the last color's variables, decoded, and bucketed
    by canonical form. Lex-leader clauses over all vertex transpositions keep
    at least one model per class while cutting most relabelings.
    """
    targets = tuple(targets)
    if n > limit:
        raise ValueError(f"n={n} exceeds the canonical form limit {limit}")
    if any(p.arity != 2 for p in targets):
        raise ValueError("censuses are only supported for graph targets")
    if any(p.vertex_count > n for p in targets):
        raise ValueError("every target must fit inside K_n")
    census = CriticalCensus(targets, n)
    if len(targets) == 2 and targets[0].kind == "cycle" and targets[1].kind == "star":
        if (targets[0].label, targets[1].params[0]) in OPEN_ROWS:
            log.warning("published computations for this row timed out; the census may be incomplete")
    formula, varmap = encode_ramsey(EncodingSpec(n, targets))
    k = len(targets)
    if degree_clauses and k == 2 and targets[1].kind == "star":
        add_min_degree(formula, varmap, 0, star_avoidance_as_degree_bound(targets[1].params[0], n))
    if symmetry_breaking and n > 1:
        add_symmetry_breaking(formula, varmap, all_transpositions(n))
    projection = [v for c in range(max(1, k - 1)) for v in varmap.color_variables(c)]
    stream = enumerate_models(formula, varmap, budget, projection)
    for model in stream:
        coloring = decode_model(model, varmap)
        code = canonical_coloring_form(coloring, limit)
        if code not in census.classes:
            census.classes[code] = coloring
    census.models_seen = stream.count
    census.complete = stream.exhausted
    for rep in census.classes.values():
        if not verify_coloring(rep, targets).clean:
            raise AssertionError("census representative fails verification")
    if not census.complete:
        log.warning("census for %s on %d vertices is incomplete (budget exhausted)", [p.label for p in targets], n)
    return census
