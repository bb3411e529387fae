"""Constraint systems over the symbolic unknowns of a solution case.

A case's constraints are linear equalities and inequalities, congruences
modulo the period, and conditional equalities whose guards are themselves
linear.  Strict inequalities are loosened at build time (``x > y`` becomes
``x >= y + 1``), so the stored system is an integer program apart from the
congruences and conditionals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .symbols import LinExpr, Symbol


@dataclass(frozen=True)
class Eq:
    lhs: LinExpr
    rhs: LinExpr
    provenance: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.lhs} == {self.rhs}"


@dataclass(frozen=True)
class Ge:
    """lhs >= rhs."""

    lhs: LinExpr
    rhs: LinExpr
    provenance: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.lhs} >= {self.rhs}"


@dataclass(frozen=True)
class Le:
    """lhs <= rhs; occurs only as a conditional guard."""

    lhs: LinExpr
    rhs: LinExpr
    provenance: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.lhs} <= {self.rhs}"


@dataclass(frozen=True)
class Cong:
    """expr is congruent to ``residue`` modulo ``modulus``."""

    expr: LinExpr
    residue: int
    modulus: int
    provenance: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{self.expr} == {self.residue} (mod {self.modulus})"


@dataclass(frozen=True)
class CondEq:
    """guard implies consequence; the guard is an equality or a <=."""

    guard: Union[Eq, Le]
    consequence: Eq
    provenance: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"if {self.guard} then {self.consequence}"


Constraint = Union[Eq, Ge, Cong, CondEq]


@dataclass(frozen=True)
class ConstraintSystem:
    constraints: tuple[Constraint, ...]
    variables: tuple[Symbol, ...]

    @staticmethod
    def make(constraints: Iterable[Constraint]) -> "ConstraintSystem":
        cs = tuple(constraints)
        pool: set[Symbol] = set()
        for c in cs:
            pool.update(constraint_symbols(c))
        variables = tuple(sorted(pool, key=lambda s: s.sort_key()))
        return ConstraintSystem(cs, variables)

    @property
    def conditionals(self) -> tuple[CondEq, ...]:
        return tuple(c for c in self.constraints if isinstance(c, CondEq))

    @property
    def unconditional(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if not isinstance(c, CondEq))

    def to_json(self) -> dict:
        return {
            "variables": [str(v) for v in self.variables],
            "constraints": [
                {"form": str(c), "provenance": c.provenance} for c in self.constraints
            ],
        }


def constraint_symbols(c: Constraint) -> set[Symbol]:
    if isinstance(c, (Eq, Ge, Le)):
        return set(c.lhs.symbols()) | set(c.rhs.symbols())
    if isinstance(c, Cong):
        return set(c.expr.symbols())
    return constraint_symbols(c.guard) | constraint_symbols(c.consequence)


class UnknownSymbolError(KeyError):
    pass


def _eval(expr: LinExpr, asg: Mapping[Symbol, int]):
    try:
        return expr.evaluate(asg)
    except KeyError as exc:
        raise UnknownSymbolError(str(exc)) from exc


def constraint_holds(c: Constraint, asg: Mapping[Symbol, int]) -> bool:
    if isinstance(c, Eq):
        return _eval(c.lhs, asg) == _eval(c.rhs, asg)
    if isinstance(c, Ge):
        return _eval(c.lhs, asg) >= _eval(c.rhs, asg)
    if isinstance(c, Le):
        return _eval(c.lhs, asg) <= _eval(c.rhs, asg)
    if isinstance(c, Cong):
        v = _eval(c.expr, asg)
        if v.denominator != 1:
            return False
        return (int(v) - c.residue) % c.modulus == 0
    if isinstance(c, CondEq):
        return constraint_holds(c.consequence, asg) if constraint_holds(c.guard, asg) else True
    raise TypeError(f"unknown constraint {c!r}")


def check_assignment(system: ConstraintSystem, asg: Mapping[Symbol, int]) -> bool:
    """Exact check of every constraint; unknown symbols raise."""
    return all(constraint_holds(c, asg) for c in system.constraints)


def build_constraints(unpacked, behavior, cong, report, default_value: int = 0) -> ConstraintSystem:
    """Assemble the satisfiability conditions of a structure-checked case.

    In order: positivity and value equations for constant residues,
    constant-term equations for standard linear residues, steepness
    inequalities for the cycle classes the structure check left pending
    (strict made loose: the cycle's constants must exceed the period times
    its lags by at least one), the chosen congruences, validity of every
    steep reference (it must point strictly earlier in absolute index), and
    finally the conditional constraints tying coincident or nonpositive
    sequence-value unknowns together.
    """
    from .symbols import b_symbol
    from .unpacker import Behavior

    m = len(behavior)
    out: list[Constraint] = []
    for u in unpacked:
        if behavior[u.residue] is Behavior.CONST:
            b = LinExpr.sym(b_symbol(u.residue))
            out.append(Ge(b, LinExpr.of(1), provenance="positivity"))
            out.append(Eq(b, u.poly.constant_part, provenance="constant-value"))
    for u in unpacked:
        if behavior[u.residue] is Behavior.STD_LINEAR:
            b = LinExpr.sym(b_symbol(u.residue))
            out.append(Eq(b, u.poly.constant_part, provenance="linear-constant-term"))
    for cycle in report.pending_cycles:
        c_sum = LinExpr()
        e_sum = LinExpr()
        for r in cycle:
            u = unpacked[r]
            if len(u.refs) != 1 or u.refs[0][0] != 1:
                raise RuntimeError(
                    f"cycle member {r} is not a unit-weight single reference"
                )
            c_sum = c_sum + u.poly.constant_part
            e_sum = e_sum + u.refs[0][2]
        out.append(
            Ge(c_sum, e_sum.scale(m) + LinExpr.of(1), provenance="steepness")
        )
    for sym, cls in cong.entries:
        out.append(Cong(LinExpr.sym(sym), cls, m, provenance="congruence"))
    for u in unpacked:
        for earlier in u.validity:
            if earlier.is_concrete:
                continue  # statically earlier (future reads were rejected)
            out.append(Ge(earlier, LinExpr.of(1), provenance="reference-validity"))
    # Conditionals apply to the sequence-value unknowns that occur in the
    # constraints above; value unknowns appearing only in steep expressions
    # stay free (the initial condition decides them later).
    seen: set[Symbol] = set()
    for c in out:
        seen.update(constraint_symbols(c))
    value_syms = sorted(
        (s for s in seen if s.kind == "V"), key=lambda s: s.sort_key()
    )
    for i in range(len(value_syms)):
        for j in range(i + 1, len(value_syms)):
            ci, cj = value_syms[i].index, value_syms[j].index
            out.append(
                CondEq(
                    Eq(ci, cj),
                    Eq(LinExpr.sym(value_syms[i]), LinExpr.sym(value_syms[j])),
                    provenance="value-coincidence",
                )
            )
    for v in value_syms:
        out.append(
            CondEq(
                Le(v.index, LinExpr.of(0)),
                Eq(LinExpr.sym(v), LinExpr.of(default_value)),
                provenance="nonpositive-default",
            )
        )
    return ConstraintSystem.make(out)
