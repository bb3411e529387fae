"""Sequence generation, concrete and symbolic, with death detection.

Terms are generated left to right from an initial condition; evaluating the
right-hand side reads only strictly earlier terms.  An index that is
nonpositive contributes the recurrence's default value.  An index equal to
the term being defined (or beyond it) means the term is undetermined: the
sequence *dies*, and death is returned as a value so that search workflows
can treat it as data.

The symbolic layer generates terms whose entries are exact linear
combinations of free symbols.  When an evaluation index is symbolic and its
sign is not decided by the current assumption set, the index is assumed
nonpositive and the assumption is recorded; this is the only branch the
evaluator itself ever takes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from . import solver
from .eventual import EventualSolution
from .recurrence import NestedExpr, Recurrence
from .symbols import LinExpr, Symbol

SELF_REFERENCE = "self-reference"
FORWARD_REFERENCE = "forward-reference"
UNDETERMINED_SYMBOL = "undetermined-symbol"


@dataclass(frozen=True)
class Dead:
    """Generation failed while computing the term at ``index``."""

    index: int
    reason: str


class InconsistentAssumption(ValueError):
    pass


class AssumptionSet:
    """Mutually consistent linear relations over symbols.

    Each relation is (expr, rel) meaning ``expr rel 0`` with rel in
    {">=", "=="}.  Insertion of a relation that makes the set infeasible
    over the integers raises :class:`InconsistentAssumption`.
    """

    def __init__(self, relations: Sequence[tuple[LinExpr, str]] = ()):
        self.relations: list[tuple[LinExpr, str]] = list(relations)

    def copy(self) -> "AssumptionSet":
        return AssumptionSet(self.relations)

    def add(self, expr: LinExpr, rel: str = ">=") -> None:
        candidate = self.relations + [(expr, rel)]
        if not solver.relations_feasible_int(candidate):
            raise InconsistentAssumption(f"assumption {expr} {rel} 0 is inconsistent")
        self.relations.append((expr, rel))

    def entails_nonpositive(self, expr: LinExpr) -> bool:
        return solver.relations_entail_nonpositive(self.relations, expr)

    def entails_positive(self, expr: LinExpr) -> bool:
        return solver.relations_entail_positive(self.relations, expr)

    def __len__(self) -> int:
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def __str__(self) -> str:
        return "; ".join(
            f"{e} {'>= 0' if rel == '>=' else '== 0'}" for e, rel in self.relations
        )


def generate(
    rec: Recurrence, ic: Sequence[int], count: int
) -> list[int] | Dead:
    """Terms 1..count, where terms 1..len(ic) are the initial condition."""
    if count < len(ic):
        raise ValueError("count must be at least the initial condition length")
    table: list[int] = list(ic)

    def eval_expr(expr: NestedExpr, n: int) -> int | Dead:
        total = expr.poly(n)
        for coeff, arg in expr.calls:
            idx = eval_expr(arg, n)
            if isinstance(idx, Dead):
                return idx
            if idx <= 0:
                value = rec.default_value
            elif idx >= n:
                reason = SELF_REFERENCE if idx == n else FORWARD_REFERENCE
                return Dead(n, reason)
            else:
                value = table[idx - 1]
            total += coeff * value
        return total

    for n in range(len(ic) + 1, count + 1):
        term = eval_expr(rec.rhs, n)
        if isinstance(term, Dead):
            return term
        table.append(term)
    return table[:count]


# ---------------------------------------------------------------------------
# Symbolic generation


@dataclass
class CallEvent:
    """One call resolution while computing a term symbolically."""

    term_index: int
    index_value: LinExpr
    tainted: bool  # index computed through a value read at a steep position
    resolution: str  # "default" | "assumed-default" | "table"
    read_position: int | None = None


class SymbolicDeath(Exception):
    def __init__(self, dead: Dead):
        self.dead = dead


class SymbolicSession:
    """Single-owner symbolic generation with assumption recording.

    ``steep_positions`` marks 1-based absolute positions whose values belong
    to steep subsequences; call indices computed through such values are
    traced so the caller can check that those computations all collapsed to
    the default value.
    """

    def __init__(
        self,
        rec: Recurrence,
        ic: Sequence[LinExpr | int],
        assumptions: AssumptionSet | None = None,
        steep_positions: Callable[[int], bool] | None = None,
    ):
        self.rec = rec
        self.table: list[LinExpr] = [
            e if isinstance(e, LinExpr) else LinExpr.of(e) for e in ic
        ]
        self.assumptions = assumptions if assumptions is not None else AssumptionSet()
        self.steep_positions = steep_positions
        self.events: list[CallEvent] = []
        self.violations: list[CallEvent] = []

    @property
    def next_index(self) -> int:
        return len(self.table) + 1

    def step(self) -> LinExpr | Dead:
        n = self.next_index
        try:
            value, _ = self._eval(self.rec.rhs, n)
        except SymbolicDeath as death:
            return death.dead
        self.table.append(value)
        return value

    def generate(self, count: int) -> list[LinExpr] | Dead:
        while len(self.table) < count:
            out = self.step()
            if isinstance(out, Dead):
                return out
        return self.table[:count]

    def _eval(self, expr: NestedExpr, n: int) -> tuple[LinExpr, bool]:
        total = LinExpr.of(expr.poly(n))
        tainted = False
        for coeff, arg in expr.calls:
            idx, idx_tainted = self._eval(arg, n)
            value, value_tainted = self._resolve(idx, idx_tainted, n)
            total = total + value.scale(coeff)
            tainted = tainted or value_tainted
        return total, tainted

    def _resolve(self, idx: LinExpr, idx_tainted: bool, n: int) -> tuple[LinExpr, bool]:
        if idx.is_concrete:
            j = idx.as_int()
            if j <= 0:
                self._record(n, idx, idx_tainted, "default")
                return LinExpr.of(self.rec.default_value), False
            if j >= n:
                reason = SELF_REFERENCE if j == n else FORWARD_REFERENCE
                raise SymbolicDeath(Dead(n, reason))
            self._record(n, idx, idx_tainted, "table", read_position=j)
            value = self.table[j - 1]
            tainted = bool(self.steep_positions and self.steep_positions(j))
            return value, tainted
        # symbolic index: decide, or assume, its sign
        if self.assumptions.entails_nonpositive(idx):
            self._record(n, idx, idx_tainted, "default")
            return LinExpr.of(self.rec.default_value), False
        if self.assumptions.entails_positive(idx):
            # a positive symbolic index hits the known prefix at a
            # symbol-dependent position; the referenced term is undetermined
            raise SymbolicDeath(Dead(n, UNDETERMINED_SYMBOL))
        self.assumptions.add(-idx, ">=")  # record: idx <= 0
        self._record(n, idx, idx_tainted, "assumed-default")
        return LinExpr.of(self.rec.default_value), False

    def _record(self, n, idx, idx_tainted, resolution, read_position=None):
        event = CallEvent(n, idx, idx_tainted, resolution, read_position)
        self.events.append(event)
        if idx_tainted and resolution == "table":
            self.violations.append(event)


def generate_symbolic(
    rec: Recurrence,
    ic: Sequence[LinExpr | int],
    count: int,
    assumptions: AssumptionSet | None = None,
) -> tuple[list[LinExpr], AssumptionSet] | Dead:
    """Symbolic analogue of :func:`generate`.

    Returns the term table and the (possibly grown) assumption set, or a
    :class:`Dead` outcome.  With fully concrete inputs this agrees with
    :func:`generate` and leaves the assumptions untouched.
    """
    if count < len(ic):
        raise ValueError("count must be at least the initial condition length")
    session = SymbolicSession(rec, ic, assumptions)
    out = session.generate(count)
    if isinstance(out, Dead):
        return out
    return out, session.assumptions


# ---------------------------------------------------------------------------
# Verification against an eventual solution


def verify_family(
    rec: Recurrence,
    ic: Sequence[int],
    eventual: EventualSolution,
    n_terms: int,
    start: int | None = None,
) -> tuple[bool, int | None]:
    """Check every generated term beyond the ic against its eventual form.

    Recurrently-described residues are checked through the recurrence
    identity itself (reading referenced terms from the generated table)
    rather than through a closed form.  ``start`` moves the first checked
    index later than ``len(ic) + 1`` for solutions whose eventual regime
    begins a few terms after the initial condition (the description is an
    *eventual* one).  Returns (ok, first mismatch index); death counts as a
    mismatch at the death index.
    """
    terms = generate(rec, ic, n_terms)
    if isinstance(terms, Dead):
        return False, terms.index
    first = max(len(ic) + 1, start if start is not None else 0)
    for index in range(first, n_terms + 1):
        expected = eventual.expected_value(index, terms)
        if expected is None or terms[index - 1] != expected:
            return False, index
    return True, None


def bfile_lines(terms: Sequence[int], start: int = 1) -> list[str]:
    """OEIS b-file rendering: one "index value" pair per line, 1-indexed."""
    return [f"{i + start} {v}" for i, v in enumerate(terms)]
