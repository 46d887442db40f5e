"""Command-line workbench: encode, solve, search, verify, enumerate and grid runs."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import census as census_mod
from .encode import BlockStructureSpec, EncodingSpec, add_min_degree, decode_model, emit_dimacs, encode_ramsey, parse_dimacs
from .graphs import TargetPattern, emit_coloring_matrix, make_pattern, parse_coloring_matrix, pattern_label, pattern_sort_key
from .groups import FiniteGroup, cyclic, dihedral, direct_product, from_cayley_table, symmetric
from .solve import SAT, UNKNOWN, UNSAT, SolveBudget, SolverError, competition_output, solve_builtin, solve_external
from .verify import SUBSET_SCAN, verify_block_cayley, verify_coloring

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INCOMPLETE = 3
EXIT_FAILURE = 4

FIXTURE_DIR = Path(__file__).parent / "fixtures"

log = logging.getLogger("ramsat")


# -- mini-languages ------------------------------------------------------------

_PATTERN_RE = [
    (re.compile(r"K(\d+)-e"), "complete_minus_edge"),
    (re.compile(r"K1s:(\d+)"), "star"),
    (re.compile(r"K(\d+)"), "complete"),
    (re.compile(r"C(\d+)"), "cycle"),
    (re.compile(r"B(\d+)"), "book"),
]


def parse_pattern(text: str) -> TargetPattern:
    """``K<t>``, ``K<t>-e``, ``C<m>``, ``K1s:<s>``, ``B<s>`` or ``K4m3``."""
    text = text.strip()
    if text == "K4m3":
        return make_pattern("k4_minus_hyper")
    for regex, kind in _PATTERN_RE:
        m = regex.fullmatch(text)
        if m:
            return make_pattern(kind, int(m.group(1)))
    raise ValueError(f"unknown pattern {text!r} (expected K<t>, K<t>-e, C<m>, K1s:<s>, B<s> or K4m3)")


def parse_patterns(text: str | Sequence[str]) -> list[TargetPattern]:
    items = text.split(",") if isinstance(text, str) else list(text)
    # "K1s:3" never contains a comma, so a plain split is safe
    return [parse_pattern(t) for t in items if t.strip()]


def resolve_fixture(name: str | Path) -> Path:
    path = Path(name)
    candidates = [path, path.with_name(path.name + ".table"), path.with_name(path.name + ".matrix")]
    candidates += [FIXTURE_DIR / c.name for c in candidates]
    for c in candidates:
        if c.is_file():
            return c
    raise FileNotFoundError(f"no such file or fixture: {name}")


def parse_group(text: str) -> FiniteGroup:
    """``Z<n>``, ``D<m>``, ``S<m>``, products like ``Z8xS3``, or a Cayley-table file / fixture name."""
    parts = text.split("x")
    simple = re.compile(r"([ZDS])(\d+)")
    if all(simple.fullmatch(p) for p in parts):
        groups = []
        for p in parts:
            kind, num = p[0], int(p[1:])
            groups.append({"Z": cyclic, "D": dihedral, "S": symmetric}[kind](num))
        out = groups[0]
        for g in groups[1:]:
            out = direct_product(out, g)
        return out
    path = resolve_fixture(text)
    return from_cayley_table(path.read_text(encoding="utf-8"))


# -- run configuration ---------------------------------------------------------


@dataclass
class RunConfig:
    n: int | None = None
    colors: list = field(default_factory=list)
    group: str | None = None
    blocks: int = 1
    extension: int = 0
    structured_colors: list | None = None
    symmetry: bool = False
    degree: bool = False
    solver: str = "builtin"
    solver_cmd: str | None = None
    max_conflicts: int | None = None
    timeout: float | None = 600.0
    seed: int = 0

    def budget(self) -> SolveBudget:
        if self.max_conflicts is None and self.timeout is None:
            return SolveBudget.unlimited(self.seed)
        return SolveBudget(self.max_conflicts, self.timeout, self.seed)

    def patterns(self) -> list[TargetPattern]:
        return parse_patterns(self.colors)

    def encoding_spec(self) -> EncodingSpec:
        patterns = self.patterns()
        if self.n is None:
            raise ValueError("n is required")
        block = None
        if self.group:
            structured = self.structured_colors if self.structured_colors is not None else list(range(len(patterns)))
            block = BlockStructureSpec(parse_group(self.group), self.blocks, tuple(structured), self.extension)
        return EncodingSpec(self.n, tuple(patterns), block, self.symmetry)


CONFIG_KEYS = {"n", "arity", "colors", "group", "blocks", "extension", "structured_colors", "symmetry", "degree", "solver", "solver_cmd", "max_conflicts", "timeout", "seed"}


def load_config(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if isinstance(data.get("colors"), str):
        data["colors"] = data["colors"].split(",")
    return data


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        data = load_config(args.config)
        arity = data.pop("arity", None)
        cfg = replace(cfg, **data)
        if arity is not None and any(p.arity != arity for p in cfg.patterns()):
            raise ValueError(f"config arity {arity} does not match its patterns")
    overrides = {}
    for key in ("n", "group", "blocks", "extension", "solver_cmd", "max_conflicts", "timeout", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "colors", None):
        overrides["colors"] = args.colors.split(",")
    if getattr(args, "structured", None):
        overrides["structured_colors"] = [int(x) for x in args.structured.split(",")]
    if getattr(args, "symmetry", False):
        overrides["symmetry"] = True
    if getattr(args, "degree", False):
        overrides["degree"] = True
    if getattr(args, "solver_cmd", None):
        overrides["solver"] = "external"
    if getattr(args, "no_timeout", False):
        overrides["timeout"] = None
    return replace(cfg, **overrides)


def _build_formula(cfg: RunConfig):
    spec = cfg.encoding_spec()
    formula, varmap = encode_ramsey(spec)
    if cfg.degree:
        patterns = spec.patterns
        if len(patterns) == 2 and patterns[1].kind == "star":
            bound = census_mod.star_avoidance_as_degree_bound(patterns[1].params[0], spec.n)
            add_min_degree(formula, varmap, 0, bound)
    return spec, formula, varmap


def _solve(cfg: RunConfig, formula):
    if cfg.solver == "external":
        return solve_external(formula, cfg.solver_cmd, cfg.budget())
    return solve_builtin(formula, cfg.budget())


def _ramsey_name(patterns: Sequence[TargetPattern]) -> str:
    labels = [pattern_label(p) for p in sorted(patterns, key=pattern_sort_key)]
    arity = patterns[0].arity
    return f"R({','.join(labels)}{f';{arity}' if arity != 2 else ''})"


# -- subcommands ---------------------------------------------------------------


def cmd_encode(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    _, formula, varmap = _build_formula(cfg)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(emit_dimacs(formula), encoding="utf-8")
    Path(str(out) + ".varmap.json").write_text(varmap.to_json() + "\n", encoding="utf-8")
    print(f"wrote {out}: {formula.variable_count} variables, {formula.clause_count} clauses")
    return EXIT_OK


def run_search(cfg: RunConfig, out_dir: Path) -> tuple[int, dict]:
    """Encode, solve, decode, verify; returns (exit code, result document)."""
    spec, formula, varmap = _build_formula(cfg)
    outcome = _solve(cfg, formula)
    name = _ramsey_name(spec.patterns)
    result = {
        "instance": {"n": spec.n, "colors": cfg.colors, "group": cfg.group, "blocks": cfg.blocks if cfg.group else None,
                     "extension": cfg.extension if cfg.group else None, "symmetry": cfg.symmetry},
        "variables": formula.variable_count,
        "clauses": formula.clause_count,
        "status": outcome.status,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    code = EXIT_OK
    if outcome.status == SAT:
        coloring = decode_model(outcome.model, varmap)
        report = verify_coloring(coloring, spec.patterns)
        result["verification"] = report.to_dict()
        if not report.clean:
            result["statement"] = "solver model failed independent verification"
            code = EXIT_FAILURE
        else:
            result["statement"] = report.bound_statement()
            if spec.block is not None:
                base = coloring.restrict(spec.block.blocks * spec.block.group.order)
                structure = verify_block_cayley(base, spec.block.group, spec.block.blocks, spec.block.structured_colors)
                result["structure"] = structure.to_dict()
            if coloring.arity == 2:
                (out_dir / "witness.matrix").write_text(emit_coloring_matrix(coloring) + "\n", encoding="utf-8")
    elif outcome.status == UNSAT:
        if spec.block is None:
            result["statement"] = f"{name} ≤ {spec.n}"
        else:
            result["statement"] = f"no structured coloring exists on {spec.n} vertices (this is not an upper bound on {name})"
    else:
        result["statement"] = "unknown: budget exhausted"
        code = EXIT_INCOMPLETE
    (out_dir / "result.json").write_text(json.dumps(result, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    with open(out_dir / "run.log", "a", encoding="utf-8") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {name} n={spec.n} status={outcome.status} stats={json.dumps(outcome.stats, sort_keys=True, default=str)}\n")
    return code, result


def cmd_search(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    code, result = run_search(cfg, Path(args.out))
    print(f"status: {result['status']}")
    print(result["statement"])
    return code


def cmd_verify(args: argparse.Namespace) -> int:
    coloring = parse_coloring_matrix(resolve_fixture(args.matrix).read_text(encoding="utf-8"))
    targets = parse_patterns(args.colors)
    strategies = ["copies", SUBSET_SCAN] if args.strategy == "both" else [args.strategy]
    reports = [verify_coloring(coloring, targets, s) for s in strategies]
    if len({r.clean for r in reports}) > 1:
        print("verification strategies disagree", file=sys.stderr)
        return EXIT_FAILURE
    report = reports[0]
    doc = report.to_dict()
    if args.group:
        group = parse_group(args.group)
        structured = [int(x) for x in args.structured.split(",")] if args.structured else list(range(coloring.color_count))
        base = coloring.restrict(args.blocks * group.order)
        doc["structure"] = verify_block_cayley(base, group, args.blocks, structured).to_dict()
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(report.to_text())
        if len(reports) > 1:
            print(f"strategies agree: {', '.join(strategies)}")
        if "structure" in doc:
            print(f"block structure: {'confirmed' if doc['structure']['ok'] else 'violated'}")
    return EXIT_OK if report.clean else EXIT_VIOLATION


def cmd_enumerate(args: argparse.Namespace) -> int:
    targets = parse_patterns(args.colors)
    budget = SolveBudget(args.max_conflicts, args.timeout, args.seed) if (args.max_conflicts or args.timeout) else SolveBudget.unlimited(args.seed)
    result = census_mod.enumerate_critical(targets, args.n, budget, degree_clauses=not args.no_degree)
    out = Path(args.out)
    result.write(out)
    print(f"{result.count} classes ({'complete' if result.complete else 'INCOMPLETE'}), {result.models_seen} models; index at {out / 'index.json'}")
    return EXIT_OK if result.complete else EXIT_INCOMPLETE


def cmd_solve(args: argparse.Namespace) -> int:
    formula = parse_dimacs(Path(args.cnf).read_text(encoding="utf-8"))
    budget = SolveBudget(args.max_conflicts, args.timeout, args.seed) if (args.max_conflicts or args.timeout) else SolveBudget.unlimited(args.seed)
    if args.solver_cmd:
        outcome = solve_external(formula, args.solver_cmd, budget)
    else:
        outcome = solve_builtin(formula, budget)
    sys.stdout.write(competition_output(outcome))
    if args.competition:
        return {SAT: 10, UNSAT: 20}.get(outcome.status, 0)
    return EXIT_INCOMPLETE if outcome.status == UNKNOWN else EXIT_OK


def _grid_task(item: tuple[str, RunConfig, str]) -> tuple[str, int, dict]:
    key, cfg, out = item
    code, result = run_search(cfg, Path(out))
    return key, code, result


def cmd_grid(args: argparse.Namespace) -> int:
    base = config_from_args(args)
    items = []
    out = Path(args.out)
    if args.n_range:
        lo, hi = (int(x) for x in args.n_range.split(":"))
        for n in range(lo, hi + 1):
            key = f"n={n:04d}"
            items.append((key, replace(base, n=n), str(out / key)))
    elif args.groups:
        for g in args.groups.split(","):
            key = f"group={g}"
            items.append((key, replace(base, group=g), str(out / re.sub(r"[^A-Za-z0-9_.=-]", "_", key))))
    else:
        raise ValueError("grid needs --n-range or --groups")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_grid_task, items))
    else:
        results = [_grid_task(i) for i in items]
    results.sort(key=lambda r: r[0])
    lines = ["instance\tstatus\tstatement"]
    lines += [f"{key}\t{res['status']}\t{res['statement']}" for key, _, res in results]
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    codes = [c for _, c, _ in results]
    return max(codes) if codes else EXIT_OK


# -- parser --------------------------------------------------------------------


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with instance keys (flags override it)")
    p.add_argument("--n", type=int, help="number of vertices")
    p.add_argument("--colors", help="comma-separated patterns, one per color, e.g. K4-e,K4-e,K4")
    p.add_argument("--group", help="Z<n>, D<m>, S<m>, products like Z8xS3, or a Cayley-table file")
    p.add_argument("--blocks", type=int, help="number of blocks for the block Cayley structure")
    p.add_argument("--extend", dest="extension", type=int, help="extension vertices after the blocks")
    p.add_argument("--structured", help="comma-separated structured colors (default: all)")
    p.add_argument("--symmetry", action="store_true", help="add lex-leader symmetry breaking")
    p.add_argument("--degree", action="store_true", help="add color-0 minimum degree clauses for a star target")


def _add_budget_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver-cmd", help="external solver command containing {cnf}")
    p.add_argument("--max-conflicts", type=int)
    p.add_argument("--timeout", type=float, help="wall-clock limit in seconds")
    p.add_argument("--no-timeout", action="store_true", help="run without a time limit")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ramsat", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="write the DIMACS formula and a variable-map sidecar")
    _add_instance_args(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("search", help="solve, decode and verify; write the witness or bound")
    _add_instance_args(p)
    _add_budget_args(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="verify a coloring matrix against targets")
    p.add_argument("matrix")
    p.add_argument("--colors", required=True)
    p.add_argument("--strategy", choices=["copies", SUBSET_SCAN, "both"], default="copies")
    p.add_argument("--group")
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--structured")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enumerate", help="census of critical colorings up to isomorphism")
    p.add_argument("--colors", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default="census")
    p.add_argument("--no-degree", action="store_true", help="skip the degree clauses for star targets")
    p.add_argument("--max-conflicts", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("solve", help="solve a DIMACS file and print competition-format output")
    p.add_argument("cnf")
    p.add_argument("--solver-cmd")
    p.add_argument("--max-conflicts", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--competition", action="store_true", help="exit 10 on SAT and 20 on UNSAT")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("grid", help="run search over a range of n or a list of groups")
    _add_instance_args(p)
    _add_budget_args(p)
    p.add_argument("--n-range", help="inclusive range lo:hi")
    p.add_argument("--groups", help="comma-separated group specs")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="grid")
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
