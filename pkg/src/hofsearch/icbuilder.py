"""Construction of generic initial conditions for a solved case.

Given an eventual solution (the witness-concretized per-residue forms), the
builder looks for the shortest initial condition, as generic as possible:
entries at steep positions stay symbolic, entries pinned by the constraint
system's sequence-value unknowns are solved for, and everything else is
filled from the eventual solution.  The candidate list is grown one entry at
a time; each attempt generates a window of terms symbolically, assuming
symbolic evaluation indices nonpositive and recording those assumptions,
then checks that every computation routed through a steep entry collapsed
to the default value and that non-steep window terms equal their eventual
values.  The assumptions recorded by the successful attempt become the
constraints of the returned symbolic initial condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import solver
from .constraints import Cong, ConstraintSystem, Eq, Ge, Le, constraint_symbols
from .eventual import EventualSolution, ResidueForm
from .evaluator import AssumptionSet, Dead, InconsistentAssumption, SymbolicSession
from .recurrence import Recurrence, max_inner_shift
from .symbols import LinExpr, Symbol, b_symbol, v_symbol
from .unpacker import Behavior, BehaviorVector, UnpackedExpr, witness_reach


class ConcretizeError(ValueError):
    """A residual symbol survived witness substitution."""


def _position_symbol(pos: int) -> Symbol:
    return v_symbol(LinExpr.of(pos))


def concretize(
    unpacked: Sequence[UnpackedExpr],
    asg: Mapping[Symbol, int],
    m: int,
    default_value: int = 0,
    behavior: BehaviorVector | None = None,
) -> EventualSolution:
    """Substitute a witness into the unpacked identities.

    B symbols take their witness values.  Sequence-value symbols are *not*
    replaced by witness values: they become references to fixed absolute
    positions, so the eventual solution stays valid for every member of the
    family (the witness pins them only up to the constraints, and the
    initial condition carries the actual values).  Constant and standard
    linear residues reduce to their B form directly, which the constraint
    system guarantees equals the unpacked expression.
    """
    forms = []
    for u in unpacked:
        kind = behavior[u.residue] if behavior is not None else None
        if kind is Behavior.CONST:
            b = b_symbol(u.residue)
            forms.append(ResidueForm.const(asg[b]))
            continue
        if kind is Behavior.STD_LINEAR:
            b = b_symbol(u.residue)
            forms.append(ResidueForm.linear(m, asg[b]))
            continue
        coeffs: list[int] = []
        term_refs: dict[int, int] = {}
        for power in range(u.poly.degree + 1):
            c = u.poly.coeff(power)
            total = c.const
            for s, q in c.terms:
                if s.kind == "V":
                    if power != 0:
                        raise ConcretizeError(f"value symbol {s} on k^{power}")
                    try:
                        pos = s.index.evaluate_int(asg)
                    except KeyError as exc:
                        raise ConcretizeError(f"cannot place {s}: {exc}") from exc
                    if q.denominator != 1:
                        raise ConcretizeError(f"fractional weight on {s}")
                    if pos <= 0:
                        total += q * default_value
                    else:
                        term_refs[pos] = term_refs.get(pos, 0) + int(q)
                elif s in asg:
                    total += q * asg[s]
                else:
                    raise ConcretizeError(f"residual symbol {s} in {c}")
            if total.denominator != 1:
                raise ConcretizeError(f"non-integer coefficient {total}")
            coeffs.append(int(total))
        refs = []
        for coeff, target, lag in u.refs:
            try:
                lag_value = lag.evaluate(asg)
            except KeyError as exc:
                raise ConcretizeError(f"cannot resolve lag {lag}: {exc}") from exc
            if lag_value.denominator != 1:
                raise ConcretizeError(f"non-integer lag {lag} = {lag_value}")
            refs.append((coeff, target, int(lag_value)))
        from .polynomials import IntPolynomial

        poly = IntPolynomial.make(coeffs, var="k")
        clean_term_refs = tuple(
            (q, pos) for pos, q in sorted(term_refs.items()) if q != 0
        )
        if not refs and not clean_term_refs and poly.degree <= 0:
            forms.append(ResidueForm.const(poly.coefficient(0)))
        elif not refs and not clean_term_refs and poly.degree == 1:
            forms.append(ResidueForm.linear(poly.coefficient(1), poly.coefficient(0)))
        else:
            forms.append(ResidueForm.recurrent(refs, poly, clean_term_refs))
    return EventualSolution(m=m, forms=tuple(forms), default_value=default_value)


@dataclass(frozen=True)
class SymbolicIC:
    """A symbolic initial condition with constraints on its free symbols.

    Entries are linear expressions in position symbols V(j); ``constraints``
    are (expr, rel) pairs meaning ``expr rel 0`` with rel in {">=", "=="}.
    """

    entries: tuple[LinExpr, ...]
    constraints: tuple[tuple[LinExpr, str], ...]

    @property
    def length(self) -> int:
        return len(self.entries)

    def free_symbols(self) -> tuple[Symbol, ...]:
        pool: set[Symbol] = set()
        for e in self.entries:
            pool.update(e.symbols())
        for expr, _ in self.constraints:
            pool.update(expr.symbols())
        return tuple(sorted(pool, key=lambda s: s.sort_key()))

    def to_json(self) -> dict:
        return {
            "entries": [
                e.as_int() if e.is_concrete else str(e) for e in self.entries
            ],
            "constraints": [
                f"{expr} {'>=' if rel == '>=' else '=='} 0"
                for expr, rel in self.constraints
            ],
        }


@dataclass(frozen=True)
class IcFailure:
    reason: str
    max_length: int


class ConstraintViolation(ValueError):
    pass


def instantiate(sic: SymbolicIC, values: Mapping[Symbol, int]) -> list[int]:
    """Concrete entries under a symbol assignment satisfying the constraints."""
    for expr, rel in sic.constraints:
        v = expr.evaluate(values)
        if rel == ">=" and v < 0:
            raise ConstraintViolation(f"constraint {expr} >= 0 violated (= {v})")
        if rel == "==" and v != 0:
            raise ConstraintViolation(f"constraint {expr} == 0 violated (= {v})")
    return [e.evaluate_int(values) for e in sic.entries]


def default_instantiation(sic: SymbolicIC, bound: int = 64) -> dict[Symbol, int]:
    """Deterministic small-magnitude satisfying values for the free symbols."""
    free = sic.free_symbols()
    if not free:
        return {}
    rows, variables = solver.linexpr_system_rows(list(sic.constraints))
    candidates: list[dict[int, int]] = (
        solver.search_box(rows, [], len(variables), bound, limit=200)
        if variables
        else [{}]
    )
    if variables and not candidates:
        raise ConstraintViolation("no satisfying instantiation within bound")
    for sol in candidates or [{}]:
        values = {variables[i]: v for i, v in sol.items()} if variables else {}
        for s in free:
            values.setdefault(s, 1)
        try:
            instantiate(sic, values)
        except (ConstraintViolation, ValueError):
            continue
        return values
    raise ConstraintViolation("no integral instantiation found")


# ---------------------------------------------------------------------------
# The build procedure


def _positional(expr: LinExpr, asg: Mapping[Symbol, int], default_value: int) -> LinExpr:
    """Rewrite an expression over B/V symbols as one over position symbols.

    B symbols take their witness values; sequence-value symbols are kept
    generic and renamed to the absolute position they refer to under the
    witness (the witness's own values for them are deliberately ignored,
    since the point of the construction is the generic solution).
    """
    out = LinExpr.of(expr.const)
    for s, c in expr.terms:
        if s.kind == "V":
            pos = s.index.evaluate_int(asg)
            if pos <= 0:
                out = out + c * default_value
            else:
                out = out + LinExpr.sym(_position_symbol(pos), c)
        elif s in asg:
            out = out + c * asg[s]
        else:
            raise ConcretizeError(f"unexpected free symbol {s}")
    return out


def _solve_positions(
    system: ConstraintSystem,
    guards: Sequence,
    asg: Mapping[Symbol, int],
    default_value: int,
) -> tuple[dict[Symbol, LinExpr], list[tuple[LinExpr, str]]]:
    """Solve the sequence-value equalities for as many positions as possible.

    Returns the solved substitution (fully back-substituted, possibly in
    terms of still-free position symbols) and the residual inequality
    relations on free position symbols.
    """
    equalities: list[LinExpr] = []
    inequalities: list[LinExpr] = []
    for c in list(system.unconditional) + list(guards):
        if isinstance(c, Eq):
            equalities.append(_positional(c.lhs - c.rhs, asg, default_value))
        elif isinstance(c, Ge):
            inequalities.append(_positional(c.lhs - c.rhs, asg, default_value))
        elif isinstance(c, Le):
            inequalities.append(_positional(c.rhs - c.lhs, asg, default_value))
        elif isinstance(c, Cong):
            continue  # classes were already satisfied by the witness
    solution: dict[Symbol, LinExpr] = {}
    for eq in equalities:
        reduced = eq.substitute(solution)
        if reduced.is_concrete:
            if reduced.const != 0:
                raise ConcretizeError(f"inconsistent value equation {eq}")
            continue
        pivot = max(reduced.symbols(), key=lambda s: s.index.const)
        coeff = reduced.coeff(pivot)
        rest = reduced - LinExpr.sym(pivot, coeff)
        value = rest.scale(-1 / coeff)
        solution = {
            s: e.substitute({pivot: value}) for s, e in solution.items()
        }
        solution[pivot] = value
    relations = []
    for ineq in inequalities:
        reduced = ineq.substitute(solution)
        if reduced.is_concrete:
            if reduced.const < 0:
                raise ConcretizeError(f"witness violates {ineq} >= 0")
            continue
        relations.append((reduced, ">="))
    return solution, relations


def build_ic(
    rec: Recurrence,
    m: int,
    behavior: BehaviorVector,
    eventual: EventualSolution,
    system: ConstraintSystem,
    asg: Mapping[Symbol, int],
    guards: Sequence = (),
    max_length: int | None = None,
    unpacked: Sequence[UnpackedExpr] = (),
) -> SymbolicIC | IcFailure:
    """Shortest generic initial condition reproducing the eventual solution.

    The search has no termination proof, so the length is capped (default
    ``8*m + c0 + gamma``); hitting the cap reports failure rather than
    discarding the family.
    """
    gamma = max_inner_shift(rec)
    default_value = rec.default_value

    # How far back the eventual identities read, under this witness.  Basic
    # recurrences rarely read past max(m, gamma), but deeper nesting can, and
    # the attempt window must cover the reach for the agreement checks to be
    # conclusive.
    reach = witness_reach(tuple(unpacked), asg)

    constrained_positions: set[int] = set()
    for c in list(system.constraints) + list(guards):
        for s in constraint_symbols(c):
            if s.kind == "V":
                pos = s.index.evaluate_int(asg)
                if pos >= 1:
                    constrained_positions.add(pos)
    c0 = max(constrained_positions, default=0)
    cap = max_length if max_length is not None else 8 * m + c0 + gamma

    solution, base_relations = _solve_positions(system, guards, asg, default_value)

    entries: list[LinExpr] = []
    for pos in range(1, c0 + 1):
        sym = _position_symbol(pos)
        entries.append(solution.get(sym, LinExpr.sym(sym)))

    def steep_position(pos: int) -> bool:
        return behavior[pos % m] is Behavior.STEEP

    window = max(m, gamma, reach)
    while True:
        if len(entries) > cap:
            return IcFailure(
                reason="no generic initial condition within the length cap",
                max_length=cap,
            )
        try:
            assumptions = AssumptionSet(list(base_relations))
            session = SymbolicSession(
                rec, entries, assumptions, steep_positions=steep_position
            )
            failed = False
            for _ in range(window):
                out = session.step()
                if isinstance(out, Dead):
                    failed = True
                    break
            if not failed and session.violations:
                failed = True
            if not failed:
                for pos in range(len(entries) + 1, len(entries) + window + 1):
                    if steep_position(pos):
                        continue
                    expected = eventual.concrete_value(pos, {})
                    if expected is None or session.table[pos - 1] != LinExpr.of(expected):
                        failed = True
                        break
            if not failed:
                return SymbolicIC(
                    entries=tuple(entries),
                    constraints=tuple(session.assumptions),
                )
        except InconsistentAssumption:
            pass  # treat like a death: the attempt fails and we extend
        position = len(entries) + 1
        if steep_position(position):
            entries.append(LinExpr.sym(_position_symbol(position)))
        else:
            value = eventual.concrete_value(position, {})
            if value is None:
                return IcFailure(
                    reason=f"no closed form for non-steep position {position}",
                    max_length=cap,
                )
            entries.append(LinExpr.of(value))
