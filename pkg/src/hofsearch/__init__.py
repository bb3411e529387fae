"""hofsearch: find, prove-by-construction, and verify interleaved solutions
to Hofstadter-like linear nested recurrences."""

from .constraints import (
    CondEq,
    Cong,
    ConstraintSystem,
    Eq,
    Ge,
    Le,
    build_constraints,
    check_assignment,
)
from .eventual import EventualSolution, ResidueForm
from .evaluator import (
    AssumptionSet,
    Dead,
    bfile_lines,
    generate,
    generate_symbolic,
    verify_family,
)
from .icbuilder import (
    IcFailure,
    SymbolicIC,
    build_ic,
    concretize,
    default_instantiation,
    instantiate,
)
from .polynomials import IntPolynomial
from .prs import (
    GrowthResult,
    PRRef,
    PRSystem,
    WeightedDigraph,
    build_graph,
    compute_growth,
    empirical_growth_oracle,
)
from .recurrence import (
    NestedExpr,
    Recurrence,
    RecurrenceSyntaxError,
    format_recurrence,
    is_basic,
    max_inner_shift,
    parse,
)
from .search import (
    SearchOptions,
    SearchResult,
    SolutionFamily,
    canonicalize_mod_shift,
    family_key,
    render_report,
    report_json,
    search,
    shift_eventual,
)
from .solver import ProvablyUnsat, UnsatWithinBound, Witness, solve_system
from .symbols import LinExpr, Symbol, b_symbol, v_symbol
from .unpacker import (
    Behavior,
    BehaviorVector,
    CongruenceAssignment,
    StructureReport,
    UnpackedExpr,
    all_behavior_vectors,
    check_structure,
    enumerate_congruence_cases,
    extract_prs,
    unpack,
)

__version__ = "0.1.0"
