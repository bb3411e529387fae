from __future__ import annotations

import random

from hypothesis import given, strategies as st

from hofsearch import (
    CondEq,
    Cong,
    ConstraintSystem,
    Eq,
    Ge,
    Le,
    ProvablyUnsat,
    UnsatWithinBound,
    Witness,
    check_assignment,
    solve_system,
)
from hofsearch.solver import (
    lattice_feasible,
    propagate,
    rational_feasible,
    search_box,
    _small_first,
)
from hofsearch.symbols import LinExpr, b_symbol


X, Y, Z = b_symbol(0), b_symbol(1), b_symbol(2)


def lx(sym):
    return LinExpr.sym(sym)


class TestLattice:
    def test_parity_infeasible(self):
        # x = 2K + 1 and x = 2y has no integer solution
        rows = [({0: 1, 1: -2}, 1), ({0: 1, 2: -2}, 0)]
        assert not lattice_feasible(rows, 3)

    def test_feasible_system(self):
        rows = [({0: 1, 1: 1}, 3)]
        assert lattice_feasible(rows, 2)

    def test_zero_rows(self):
        assert not lattice_feasible([({}, 5)], 1)
        assert lattice_feasible([({}, 0)], 1)


class TestRational:
    def test_contradictory_bounds(self):
        rows = [(">=", {0: 1}, 3), (">=", {0: -1}, -2)]  # x >= 3 and x <= 2
        assert not rational_feasible(rows, 1)

    def test_rationally_feasible_integrally_not(self):
        rows = [(">=", {0: 2}, 1), (">=", {0: -2}, -1)]  # 1/2 <= x <= 1/2
        assert rational_feasible(rows, 1)

    def test_equality_elimination(self):
        rows = [("==", {0: 1, 1: 1}, 2), (">=", {0: 1, 1: 1}, 3)]
        assert not rational_feasible(rows, 2)


class TestSearchBox:
    def test_small_first_order(self):
        assert list(_small_first(-3, 3)) == [0, 1, -1, 2, -2, 3, -3]
        assert list(_small_first(2, 5)) == [2, 3, 4, 5]
        assert list(_small_first(-5, -2)) == [-2, -3, -4, -5]

    def test_finds_smallest_witness(self):
        rows = [(">=", {0: 2}, 7)]  # 2x >= 7 -> x >= 4
        sols = search_box(rows, [], 1, 64, limit=1)
        assert sols == [{0: 4}]

    def test_congruence_filtering(self):
        rows = [(">=", {0: 1}, 1)]
        congs = [({0: 1}, 3, 5)]
        sols = search_box(rows, congs, 1, 64, limit=2)
        assert sols == [{0: 3}, {0: 8}]

    def test_propagation_soundness(self):
        rows = [("==", {0: 1, 1: 1}, 1), ("==", {0: 1, 1: -1}, 0)]
        lo = {0: -12, 1: -12}
        hi = {0: 12, 1: 12}
        assert propagate(rows, [], lo, hi)  # rationally x = y = 1/2
        assert not search_box(rows, [], 2, 12, limit=1)


class TestSolveSystem:
    def test_trivial_unsat(self):
        system = ConstraintSystem.make(
            [Ge(lx(X), LinExpr.of(1)), Eq(lx(X), LinExpr.of(0))]
        )
        assert isinstance(solve_system(system), ProvablyUnsat)

    def test_parity_unsat_via_congruence(self):
        system = ConstraintSystem.make(
            [Cong(lx(X), 1, 2), Eq(lx(X), lx(Y).scale(2))]
        )
        assert isinstance(solve_system(system), ProvablyUnsat)

    def test_simple_witness(self):
        system = ConstraintSystem.make([Ge(lx(X), LinExpr.of(1))])
        out = solve_system(system)
        assert isinstance(out, Witness)
        assert out.assignment[X] == 1
        assert check_assignment(system, out.assignment)

    def test_conditional_eq_guard_branching(self):
        # if x == y then z == 5; force x == y via equalities
        system = ConstraintSystem.make(
            [
                Eq(lx(X), LinExpr.of(2)),
                Eq(lx(Y), LinExpr.of(2)),
                CondEq(Eq(lx(X), lx(Y)), Eq(lx(Z), LinExpr.of(5))),
            ]
        )
        out = solve_system(system)
        assert isinstance(out, Witness)
        assert out.assignment[Z] == 5

    def test_conditional_le_guard_branching(self):
        system = ConstraintSystem.make(
            [
                Eq(lx(X), LinExpr.of(-1)),
                CondEq(Le(lx(X), LinExpr.of(0)), Eq(lx(Y), LinExpr.of(7))),
            ]
        )
        out = solve_system(system)
        assert out.assignment[Y] == 7

    def test_multiple_witnesses(self):
        system = ConstraintSystem.make(
            [Ge(lx(X), LinExpr.of(0)), Ge(LinExpr.of(2), lx(X))]
        )
        out = solve_system(system, witnesses=3)
        assert [w.assignment[X] for w in out] == [0, 1, 2]

    def test_determinism(self):
        system = ConstraintSystem.make(
            [
                Ge(lx(X) + lx(Y), LinExpr.of(3)),
                Cong(lx(X), 1, 3),
                CondEq(Le(lx(Y), LinExpr.of(0)), Eq(lx(X), LinExpr.of(10))),
            ]
        )
        first = solve_system(system)
        second = solve_system(system)
        assert first == second


@given(
    guard_kind=st.sampled_from(["eq", "le"]),
    c=st.integers(-8, 8),
    d=st.integers(-8, 8),
    x=st.integers(-20, 20),
)
def test_conditional_branches_partition_the_integers(guard_kind, c, d, x):
    """Exactly one branch's added guard holds at any integer point."""
    from hofsearch.constraints import constraint_holds
    from hofsearch.solver import _branches

    sx = LinExpr.sym(X)
    lhs = sx + c
    rhs = LinExpr.of(d)
    guard = Eq(lhs, rhs) if guard_kind == "eq" else Le(lhs, rhs)
    cond = CondEq(guard, Eq(sx, sx))
    values = {X: x}
    holding = sum(
        constraint_holds(branch[0], values) for branch in _branches(cond)
    )
    assert holding == 1


def _random_system(rng: random.Random) -> ConstraintSystem:
    symbols = [X, Y, Z][: rng.randint(1, 3)]
    constraints = []
    for _ in range(rng.randint(1, 4)):
        kind = rng.choice(["eq", "ge", "cong", "cond"])
        coeffs = {s: rng.randint(-3, 3) for s in symbols}
        expr = LinExpr.build(rng.randint(-6, 6), coeffs)
        if kind == "eq":
            constraints.append(Eq(expr, LinExpr.of(rng.randint(-6, 6))))
        elif kind == "ge":
            constraints.append(Ge(expr, LinExpr.of(rng.randint(-6, 6))))
        elif kind == "cong":
            modulus = rng.randint(2, 5)
            constraints.append(Cong(expr, rng.randint(0, modulus - 1), modulus))
        else:
            other = LinExpr.build(
                rng.randint(-4, 4), {s: rng.randint(-2, 2) for s in symbols}
            )
            guard = (
                Eq(expr, LinExpr.of(rng.randint(-4, 4)))
                if rng.random() < 0.5
                else Le(expr, LinExpr.of(rng.randint(-4, 4)))
            )
            constraints.append(CondEq(guard, Eq(other, LinExpr.of(rng.randint(-4, 4)))))
    return ConstraintSystem.make(constraints)


def _brute_force_sat(system: ConstraintSystem, bound: int) -> bool:
    from hofsearch.constraints import constraint_holds

    symbols = system.variables
    if not symbols:
        return all(constraint_holds(c, {}) for c in system.constraints)

    def rec(i, values):
        if i == len(symbols):
            return all(constraint_holds(c, values) for c in system.constraints)
        for v in range(-bound, bound + 1):
            values[symbols[i]] = v
            if rec(i + 1, values):
                return True
        values.pop(symbols[i], None)
        return False

    return rec(0, {})


def test_solver_agrees_with_brute_force_enumeration():
    rng = random.Random(20260810)
    bound = 12
    for _ in range(60):
        system = _random_system(rng)
        out = solve_system(system, bound=bound)
        expected = _brute_force_sat(system, bound)
        if isinstance(out, Witness):
            assert expected
            assert check_assignment(system, out.assignment)
        elif isinstance(out, ProvablyUnsat):
            assert not expected
        else:
            assert isinstance(out, UnsatWithinBound)
            assert not expected
