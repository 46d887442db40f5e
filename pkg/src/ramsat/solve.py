"""Deciding CNF formulas: a built-in CDCL solver and an external DIMACS solver driver."""

from __future__ import annotations

import heapq
import os
import random
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .encode import CnfFormula, VariableMap, emit_dimacs

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

SOLVER_ENV = "RAMSAT_SOLVER"


class ModelCheckError(RuntimeError):
    """A solver reported a model that falsifies a clause."""


class SolverError(RuntimeError):
    """The external solver could not be run or its output made no sense."""


@dataclass(frozen=True)
class SolveBudget:
    max_conflicts: int | None = None
    max_seconds: float | None = 600.0
    seed: int = 0
    unbounded: bool = False

    def __post_init__(self) -> None:
        if self.max_conflicts is None and self.max_seconds is None and not self.unbounded:
            raise ValueError("a budget needs a finite limit unless unbounded=True")

    @classmethod
    def unlimited(cls, seed: int = 0) -> "SolveBudget":
        return cls(None, None, seed, unbounded=True)


@dataclass
class SolverOutcome:
    status: str
    model: tuple[int, ...] | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.model is not None) != (self.status == SAT):
            raise ValueError("a model is present exactly when the status is SAT")

    def value(self, var: int) -> bool:
        assert self.model is not None
        return self.model[var - 1] > 0


def check_model(clauses: Iterable[Sequence[int]], model: Sequence[int]) -> None:
    """Raise ModelCheckError unless every clause has a true literal under ``model``."""
    truth = [False] + [lit > 0 for lit in model]
    nv = len(model)
    for clause in clauses:
        for lit in clause:
            v = abs(lit)
            if v <= nv and truth[v] == (lit > 0):
                break
        else:
            raise ModelCheckError(f"model falsifies clause {list(clause)}")


def _luby(i: int) -> int:
    if i < 1:
        raise ValueError("the Luby sequence is indexed from 1")
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class Solver:
    """Conflict-driven clause learning over literals coded as ``2*v`` / ``2*v+1``.

    Clauses are Python lists whose first two entries are the watched
    literals; ``watches[l]`` holds the clauses watching ``l``. Clauses may be
    added between calls to :meth:`solve`.
    """

    RESTART_UNIT = 64
    VAR_DECAY = 0.95

    def __init__(self, num_vars: int = 0, seed: int = 0):
        self.num_vars = 0
        self.lval: list[int] = [0, 0]
        self.level: list[int] = [0]
        self.reason: list = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [0]
        self.seen = bytearray(1)
        self.watches: list[list] = [[], []]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.blocks: list[list[int]] = []  # model-blocking clauses, see block_decisions
        self.lbd: dict[int, int] = {}
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.ok = True
        self.rng = random.Random(seed)
        self.stats = {"decisions": 0, "conflicts": 0, "propagations": 0, "restarts": 0, "learned": 0}
        self.max_learnts = 2000.0
        self.ensure_vars(num_vars)

    # -- setup -----------------------------------------------------------

    def ensure_vars(self, n: int) -> None:
        while self.num_vars < n:
            self.num_vars += 1
            v = self.num_vars
            self.lval += [0, 0]
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(self.rng.random() * 1e-5)
            self.phase.append(0)
            self.seen.append(0)
            self.watches += [[], []]
            heapq.heappush(self.heap, (-self.activity[v], v))

    @staticmethod
    def _code(lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a clause at decision level 0; returns False once the formula is known UNSAT."""
        if not self.ok:
            return False
        self._backtrack(0)
        codes = []
        for lit in lits:
            if lit == 0:
                raise ValueError("0 is not a literal")
            self.ensure_vars(abs(lit))
            codes.append(self._code(lit))
        lval = self.lval
        clause = []
        for c in dict.fromkeys(codes):
            if c ^ 1 in codes or lval[c] == 1:
                return True  # tautology or already satisfied
            if lval[c] == 0:
                clause.append(c)
        if not clause:
            self.ok = False
            return False
        if len(clause) == 1:
            self._assign(clause[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        self.clauses.append(clause)
        self.watches[clause[0]].append(clause)
        self.watches[clause[1]].append(clause)
        return True

    def block_decisions(self) -> bool:
        """After SAT, forbid the current decision prefix and stay just below it.

        The clause is asserting at the previous level, so :meth:`solve` with
        ``resume=True`` continues the search there instead of starting over.
        Returns False when no decisions remain (the search space is exhausted).
        """
        decisions = [self.trail[i] for i in self.trail_lim]
        if not decisions:
            self.ok = False
            return False
        clause = [d ^ 1 for d in reversed(decisions)]
        self._backtrack(len(decisions) - 1)
        # earlier blocks of longer prefixes are subsumed by this one; they sit on top of the stack
        lits = set(clause)
        blocks = self.blocks
        while blocks and lits.issubset(blocks[-1]):
            old = blocks.pop()
            for w in (self.watches[old[0]], self.watches[old[1]]):
                for i in range(len(w) - 1, -1, -1):
                    if w[i] is old:
                        del w[i]
                        break
        if len(clause) == 1:
            self._assign(clause[0], None)
        else:
            blocks.append(clause)
            self.watches[clause[0]].append(clause)
            self.watches[clause[1]].append(clause)
            self._assign(clause[0], clause)
        return True

    # -- core ------------------------------------------------------------

    def _assign(self, lit: int, reason) -> None:
        v = lit >> 1
        self.lval[lit] = 1
        self.lval[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        lval = self.lval
        watches = self.watches
        trail = self.trail
        level = self.level
        reason = self.reason
        lvl = len(self.trail_lim)
        props = 0
        while self.qhead < len(trail):
            false_lit = trail[self.qhead] ^ 1
            self.qhead += 1
            props += 1
            ws = watches[false_lit]
            i = j = 0
            end = len(ws)
            while i < end:
                c = ws[i]
                i += 1
                first = c[0]
                if first == false_lit:
                    first = c[1]
                    c[0] = first
                    c[1] = false_lit
                if lval[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if lval[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if lval[first] == -1:
                        while i < end:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        self.stats["propagations"] += props
                        return c
                    v = first >> 1
                    lval[first] = 1
                    lval[first ^ 1] = -1
                    level[v] = lvl
                    reason[v] = c
                    trail.append(first)
            del ws[j:]
        self.stats["propagations"] += props
        return None

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[u], u) for u in range(1, self.num_vars + 1) if self.lval[2 * u] == 0]
            heapq.heapify(self.heap)
        elif self.lval[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _analyze(self, confl) -> tuple[list[int], int, int]:
        seen = self.seen
        level = self.level
        reason = self.reason
        trail = self.trail
        cur = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        c = confl
        while True:
            for q in c if p == -1 else c[1:]:
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            c = reason[v]
            seen[v] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause (local minimisation)
        keep = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or any(not seen[x >> 1] and level[x >> 1] > 0 for x in r[1:]):
                keep.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = 0
        learnt = keep
        if len(learnt) == 1:
            bt = 0
        else:
            best = max(range(1, len(learnt)), key=lambda i: level[learnt[i] >> 1])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            bt = level[learnt[1] >> 1]
        lbd = len({level[q >> 1] for q in learnt})
        return learnt, bt, lbd

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        lval = self.lval
        phase = self.phase
        heap = self.heap
        act = self.activity
        reason = self.reason
        trail = self.trail
        start = self.trail_lim[lvl]
        for i in range(len(trail) - 1, start - 1, -1):
            lit = trail[i]
            v = lit >> 1
            lval[lit] = 0
            lval[lit ^ 1] = 0
            reason[v] = None
            phase[v] = lit & 1
            heapq.heappush(heap, (-act[v], v))
        del trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(trail)

    def _pick(self) -> int:
        heap = self.heap
        lval = self.lval
        act = self.activity
        while heap:
            a, v = heapq.heappop(heap)
            if lval[2 * v] == 0 and -a == act[v]:
                return v
        for v in range(1, self.num_vars + 1):
            if lval[2 * v] == 0:
                return v
        return 0

    def _reduce_db(self) -> None:
        reason = self.reason
        lbd = self.lbd

        def locked(c) -> bool:
            return reason[c[0] >> 1] is c

        cands = sorted(self.learnts, key=lambda c: (lbd.get(id(c), 99), len(c)))
        half = len(cands) // 2
        keep = cands[:half] + [c for c in cands[half:] if lbd.get(id(c), 99) <= 2 or locked(c)]
        drop = {id(c) for c in cands} - {id(c) for c in keep}
        for i in drop:
            lbd.pop(i, None)
        self.learnts = keep
        for w in self.watches:
            w.clear()
        for c in self.clauses:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)
        for c in self.blocks:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)
        for c in keep:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    def solve(self, max_conflicts: int | None = None, deadline: float | None = None, resume: bool = False) -> bool | None:
        """True (SAT), False (UNSAT) or None when the conflict/time budget runs out.

        ``resume`` keeps the current trail (used after :meth:`block_decisions`).
        """
        if not self.ok:
            return False
        if not resume:
            self._backtrack(0)
            if self._propagate() is not None:
                self.ok = False
                return False
        stats = self.stats
        start_conflicts = stats["conflicts"]
        restart_idx = 1
        restart_limit = _luby(restart_idx) * self.RESTART_UNIT
        since_restart = 0
        self.max_learnts = max(self.max_learnts, len(self.clauses) / 3)
        while True:
            confl = self._propagate()
            if confl is not None:
                stats["conflicts"] += 1
                since_restart += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, bt, lbd = self._analyze(confl)
                self._backtrack(bt)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = lbd
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._assign(learnt[0], learnt)
                    stats["learned"] += 1
                self.var_inc /= self.VAR_DECAY
                if max_conflicts is not None and stats["conflicts"] - start_conflicts >= max_conflicts:
                    self._backtrack(0)
                    return None
                if deadline is not None and stats["conflicts"] % 64 == 0 and time.monotonic() > deadline:
                    self._backtrack(0)
                    return None
                continue
            if since_restart >= restart_limit:
                stats["restarts"] += 1
                since_restart = 0
                restart_idx += 1
                restart_limit = _luby(restart_idx) * self.RESTART_UNIT
                self._backtrack(0)
                continue
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
                self.max_learnts *= 1.1
            v = self._pick()
            if v == 0:
                return True
            stats["decisions"] += 1
            self.trail_lim.append(len(self.trail))
            self._assign(2 * v + self.phase[v], None)

    def model(self) -> tuple[int, ...]:
        return tuple(v if self.lval[2 * v] == 1 else -v for v in range(1, self.num_vars + 1))


def _builtin_solver(formula: CnfFormula, seed: int) -> Solver:
    solver = Solver(formula.variable_count, seed=seed)
    for clause in formula.clauses:
        if not solver.add_clause(clause):
            break
    return solver


def _deadline(budget: SolveBudget, started: float) -> float | None:
    return None if budget.max_seconds is None else started + budget.max_seconds


def solve_builtin(formula: CnfFormula, budget: SolveBudget = SolveBudget()) -> SolverOutcome:
    started = time.monotonic()
    solver = _builtin_solver(formula, budget.seed)
    result = solver.solve(budget.max_conflicts, _deadline(budget, started))
    stats = dict(solver.stats, wall_time=time.monotonic() - started, solver="builtin")
    if result is None:
        return SolverOutcome(UNKNOWN, None, stats)
    if not result:
        return SolverOutcome(UNSAT, None, stats)
    model = solver.model()[: formula.variable_count]
    check_model(formula.clauses, model)
    return SolverOutcome(SAT, model, stats)


# -- external solvers ----------------------------------------------------------


def parse_dimacs_result(text: str, num_vars: int | None = None) -> SolverOutcome:
    """Parse SAT-competition output (``s`` status line, ``v`` literal lines)."""
    status = None
    lits: list[int] = []
    terminated = False
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("s "):
            word = line[2:].strip()
            if word == "SATISFIABLE":
                status = SAT
            elif word == "UNSATISFIABLE":
                status = UNSAT
            elif word in ("UNKNOWN", "INDETERMINATE"):
                status = UNKNOWN
            else:
                raise SolverError(f"unrecognised status line {line!r}")
        elif line.startswith("v ") or line == "v":
            for tok in line[1:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise SolverError(f"bad literal {tok!r} in value line") from None
                if lit == 0:
                    terminated = True
                else:
                    lits.append(lit)
    if status is None:
        raise SolverError("solver output has no 's' status line")
    if status != SAT:
        return SolverOutcome(status)
    if lits and not terminated:
        raise SolverError("value lines are not terminated by 0")
    top = max((abs(x) for x in lits), default=0)
    n = num_vars if num_vars is not None else top
    values = {}
    for lit in lits:
        if abs(lit) <= n:
            values[abs(lit)] = lit
    missing = [v for v in range(1, n + 1) if v not in values]
    if missing:
        raise SolverError(f"model leaves variable {missing[0]} unassigned")
    return SolverOutcome(SAT, tuple(values[v] for v in range(1, n + 1)))


def default_solver_command() -> str | None:
    return os.environ.get(SOLVER_ENV) or None


def solve_external(formula: CnfFormula, command: str | None = None, budget: SolveBudget = SolveBudget()) -> SolverOutcome:
    """Run an external DIMACS solver; ``{cnf}`` in the command is replaced by the file path."""
    command = command or default_solver_command()
    if not command:
        raise SolverError(f"no external solver command given (set {SOLVER_ENV})")
    if "{cnf}" not in command:
        raise SolverError("solver command must contain the {cnf} placeholder")
    started = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="ramsat-") as tmp:
        path = os.path.join(tmp, "formula.cnf")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(emit_dimacs(formula))
        argv = [a.replace("{cnf}", path) for a in shlex.split(command)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=budget.max_seconds)
        except FileNotFoundError:
            raise SolverError(f"solver binary {argv[0]!r} not found") from None
        except subprocess.TimeoutExpired:
            stats = {"wall_time": time.monotonic() - started, "solver": command}
            return SolverOutcome(UNKNOWN, None, stats)
    stats = {"wall_time": time.monotonic() - started, "solver": command, "exit_code": proc.returncode}
    if proc.returncode not in (0, 10, 20):
        raise SolverError(f"solver exited with code {proc.returncode}: {proc.stderr.strip()[:200]}")
    outcome = parse_dimacs_result(proc.stdout, formula.variable_count)
    expected = {10: SAT, 20: UNSAT}.get(proc.returncode)
    if expected is not None and outcome.status != expected:
        raise SolverError(f"exit code {proc.returncode} contradicts status {outcome.status}")
    if outcome.status == SAT:
        check_model(formula.clauses, outcome.model)
    outcome.stats = stats
    return outcome


def competition_output(outcome: SolverOutcome) -> str:
    """Format an outcome the way SAT-competition solvers print it."""
    word = {SAT: "SATISFIABLE", UNSAT: "UNSATISFIABLE", UNKNOWN: "UNKNOWN"}[outcome.status]
    lines = [f"s {word}"]
    if outcome.model is not None:
        lits = list(outcome.model)
        for i in range(0, len(lits), 20):
            lines.append("v " + " ".join(map(str, lits[i : i + 20])))
        lines.append("v 0")
    return "\n".join(lines) + "\n"


# -- model enumeration ---------------------------------------------------------


class ModelStream:
    """Models pairwise distinct on ``projection``; iterate once.

    After iteration ``exhausted`` tells whether the blocked formula became
    UNSAT (the list is complete) or the budget ran out first.
    """

    def __init__(self, formula: CnfFormula, projection: Sequence[int], budget: SolveBudget):
        if not projection:
            raise ValueError("projection must be non-empty")
        self.formula = formula
        self.projection = sorted(set(projection))
        self.budget = budget
        self.exhausted = False
        self.count = 0
        self.stats: dict = {}

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        started = time.monotonic()
        deadline = _deadline(self.budget, started)
        solver = _builtin_solver(self.formula, self.budget.seed)
        clauses = self.formula.clauses
        nv = self.formula.variable_count
        full_projection = self.projection == list(range(1, nv + 1))
        resumable = False
        used = 0
        while True:
            remaining = None if self.budget.max_conflicts is None else self.budget.max_conflicts - used
            if remaining is not None and remaining <= 0:
                break
            before = solver.stats["conflicts"]
            result = solver.solve(remaining, deadline, resume=resumable)
            used += solver.stats["conflicts"] - before
            if result is None:
                break
            if result is False:
                self.exhausted = True
                break
            full = solver.model()
            model = full[:nv]
            check_model(clauses, model)
            self.count += 1
            yield model
            if full_projection:
                # propagation fixes every other variable, so negating the decisions excludes this model only
                resumable = solver.block_decisions()
            else:
                solver.add_clause([-full[v - 1] for v in self.projection])
        self.stats = dict(solver.stats, wall_time=time.monotonic() - started, models=self.count)


def enumerate_models(
    formula: CnfFormula,
    varmap: VariableMap | None = None,
    budget: SolveBudget = SolveBudget(),
    projection: Sequence[int] | None = None,
) -> ModelStream:
    """Blocking-clause enumeration; the projection defaults to all edge-color variables."""
    if projection is None:
        projection = range(1, (varmap.variable_count if varmap else formula.variable_count) + 1)
    return ModelStream(formula, list(projection), budget)
