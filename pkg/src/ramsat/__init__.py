"""SAT-based search for structured Ramsey colorings."""

from .encode import BlockStructureSpec, CnfFormula, EncodingSpec, VariableMap, decode_model, encode_ramsey
from .graphs import EdgeColoring, SimpleGraph, UniformHypergraph, make_pattern, parse_coloring_matrix
from .groups import FiniteGroup, cyclic, dihedral, direct_product, symmetric
from .solve import SolveBudget, SolverOutcome, solve_builtin, solve_external
from .verify import verify_block_cayley, verify_coloring

__version__ = "0.1.0"
