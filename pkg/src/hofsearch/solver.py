"""Exact bounded integer solving for the case constraint systems.

The solver proceeds in layers, all of them exact (no floating point):

1. conditional constraints are expanded into a tree of branch cases
   (three branches for an equality guard, two for a <= guard);
2. each leaf is refuted outright when possible -- either the equality
   subsystem (with congruences rewritten via auxiliary multiplier variables)
   has no solution over the integer lattice, or the rational relaxation is
   infeasible by Fourier-Motzkin elimination.  Both refutations are valid
   over the unbounded domain, so such leaves are *provably* unsatisfiable;
3. otherwise a depth-first search over the bound box, driven by interval
   constraint propagation, either produces a witness or exhausts the box.

``ProvablyUnsat`` is reported only when every leaf was refuted in step 2;
if some leaf was merely exhausted the honest answer is ``UnsatWithinBound``.

Variables are branched in a fixed canonical order (B symbols, then value
symbols, then auxiliaries) and values are tried smallest-magnitude first,
which keeps witnesses small and runs deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Mapping, Sequence

from .constraints import CondEq, Cong, ConstraintSystem, Eq, Ge, Le
from .symbols import LinExpr, Symbol

# A linear row: coefficient map over variable indices, plus an integer bound.
#   ("==", coeffs, c)  means  sum coeffs[v]*x_v == c
#   (">=", coeffs, c)  means  sum coeffs[v]*x_v >= c
IntRow = tuple[str, dict[int, int], int]
# Congruence row: (coeffs, target, modulus)
CongRow = tuple[dict[int, int], int, int]

_FM_ROW_LIMIT = 4000


# ---------------------------------------------------------------------------
# Row construction


def _expr_pair_to_row(lhs: LinExpr, rhs: LinExpr, var_index: Mapping[Symbol, int]):
    """lhs - rhs as (integer coeffs, integer constant) after denominator scaling."""
    diff = lhs - rhs
    denoms = [diff.const.denominator] + [c.denominator for _, c in diff.terms]
    scale = 1
    for d in denoms:
        scale = scale * d // gcd(scale, d)
    coeffs: dict[int, int] = {}
    for s, c in diff.terms:
        coeffs[var_index[s]] = int(c * scale)
    return coeffs, int(diff.const * scale)


def rows_from_constraints(
    constraints: Sequence, var_index: Mapping[Symbol, int]
) -> tuple[list[IntRow], list[CongRow]]:
    rows: list[IntRow] = []
    congs: list[CongRow] = []
    for c in constraints:
        if isinstance(c, Eq):
            coeffs, const = _expr_pair_to_row(c.lhs, c.rhs, var_index)
            rows.append(("==", coeffs, -const))
        elif isinstance(c, Ge):
            coeffs, const = _expr_pair_to_row(c.lhs, c.rhs, var_index)
            rows.append((">=", coeffs, -const))
        elif isinstance(c, Le):
            coeffs, const = _expr_pair_to_row(c.rhs, c.lhs, var_index)
            rows.append((">=", coeffs, -const))
        elif isinstance(c, Cong):
            if not c.expr.is_integral_coeffs:
                raise ValueError(f"congruence on non-integral expression {c.expr}")
            coeffs = {var_index[s]: int(co) for s, co in c.expr.terms}
            congs.append((coeffs, (c.residue - int(c.expr.const)) % c.modulus, c.modulus))
        else:
            raise TypeError(f"cannot convert constraint {c!r}")
    return rows, congs


# ---------------------------------------------------------------------------
# Lattice (integer) solvability of the equality subsystem


def lattice_feasible(eq_rows: list[tuple[dict[int, int], int]], nvars: int) -> bool:
    """Whether the integer system A x = b has any integer solution.

    Diagonalizes [A | b] with integer row operations and column operations
    on A, then checks divisibility on the diagonal and zero rows of b.
    """
    if not eq_rows:
        return True
    A = [[coeffs.get(j, 0) for j in range(nvars)] for coeffs, _ in eq_rows]
    b = [rhs for _, rhs in eq_rows]
    m, n = len(A), nvars
    t = 0
    while t < min(m, n):
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (
                    piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])
                ):
                    piv = (i, j)
        if piv is None:
            break
        pi, pj = piv
        A[t], A[pi] = A[pi], A[t]
        b[t], b[pi] = b[pi], b[t]
        if pj != t:
            for row in A:
                row[t], row[pj] = row[pj], row[t]
        settled = False
        while not settled:
            settled = True
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    if q:
                        A[i] = [a - q * p for a, p in zip(A[i], A[t])]
                        b[i] -= q * b[t]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        b[t], b[i] = b[i], b[t]
                        settled = False
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    if q:
                        for row in A:
                            row[j] -= q * row[t]
                    if A[t][j]:
                        for row in A:
                            row[t], row[j] = row[j], row[t]
                        settled = False
        t += 1
    for i in range(t, m):
        if b[i] != 0:
            return False
    for i in range(t):
        if b[i] % A[i][i] != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Rational feasibility (Gaussian elimination + Fourier-Motzkin)


def rational_feasible(rows: list[IntRow], nvars: int) -> bool:
    """Feasibility of the system over the rationals (unbounded domain).

    Returns False only on an exact proof of infeasibility; bails out to True
    when elimination grows past an internal limit.
    """
    eqs: list[tuple[dict[int, Fraction], Fraction]] = []
    ges: list[tuple[dict[int, Fraction], Fraction]] = []
    for rel, coeffs, rhs in rows:
        frac = ({v: Fraction(c) for v, c in coeffs.items() if c}, Fraction(rhs))
        (eqs if rel == "==" else ges).append(frac)

    # Eliminate equalities by substitution.
    while eqs:
        coeffs, rhs = eqs.pop(0)
        if not coeffs:
            if rhs != 0:
                return False
            continue
        pivot = min(coeffs)
        pc = coeffs[pivot]
        # x_pivot = (rhs - rest) / pc
        rest = {v: c for v, c in coeffs.items() if v != pivot}

        def subst(row):
            rcoeffs, rrhs = row
            if pivot not in rcoeffs:
                return row
            f = rcoeffs[pivot] / pc
            out = {v: c for v, c in rcoeffs.items() if v != pivot}
            for v, c in rest.items():
                out[v] = out.get(v, Fraction(0)) - f * c
                if out[v] == 0:
                    del out[v]
            return out, rrhs - f * rhs

        eqs = [subst(r) for r in eqs]
        ges = [subst(r) for r in ges]

    # Fourier-Motzkin on the inequalities.
    work = []
    for coeffs, rhs in ges:
        if not coeffs:
            if rhs > 0:
                return False
            continue
        work.append((dict(coeffs), rhs))
    while work:
        counts: dict[int, tuple[int, int]] = {}
        for coeffs, _ in work:
            for v, c in coeffs.items():
                p, q = counts.get(v, (0, 0))
                counts[v] = (p + (c > 0), q + (c < 0))
        if not counts:
            break
        var = min(counts, key=lambda v: (counts[v][0] * counts[v][1], v))
        pos = [r for r in work if r[0].get(var, 0) > 0]
        neg = [r for r in work if r[0].get(var, 0) < 0]
        rest_rows = [r for r in work if not r[0].get(var, 0)]
        new_rows = rest_rows
        for pcoeffs, prhs in pos:
            for ncoeffs, nrhs in neg:
                a, bco = pcoeffs[var], -ncoeffs[var]
                combined: dict[int, Fraction] = {}
                for v, c in pcoeffs.items():
                    combined[v] = combined.get(v, Fraction(0)) + bco * c
                for v, c in ncoeffs.items():
                    combined[v] = combined.get(v, Fraction(0)) + a * c
                combined = {v: c for v, c in combined.items() if c != 0 and v != var}
                crhs = bco * prhs + a * nrhs
                if not combined:
                    if crhs > 0:
                        return False
                    continue
                new_rows.append((combined, crhs))
        seen = set()
        deduped = []
        for coeffs, rhs in new_rows:
            key = (tuple(sorted(coeffs.items())), rhs)
            if key not in seen:
                seen.add(key)
                deduped.append((coeffs, rhs))
        work = deduped
        if len(work) > _FM_ROW_LIMIT:
            return True  # give up on the proof; caller treats as feasible
    for coeffs, rhs in work:
        if not coeffs and rhs > 0:
            return False
    return True


def provably_unsat_rows(rows: list[IntRow], congs: list[CongRow], nvars: int) -> bool:
    """Unbounded-domain refutation: lattice or rational infeasibility."""
    # Congruences become equalities with one auxiliary multiplier each.
    eqs = [(coeffs, rhs) for rel, coeffs, rhs in rows if rel == "=="]
    aug = list(eqs)
    extra = nvars
    for coeffs, target, modulus in congs:
        row = dict(coeffs)
        row[extra] = -modulus
        aug.append((row, target))
        extra += 1
    if not lattice_feasible(aug, extra):
        return True
    aug_rows = list(rows)
    for i, (coeffs, target, modulus) in enumerate(congs):
        row = dict(coeffs)
        row[nvars + i] = -modulus
        aug_rows.append(("==", row, target))
    return not rational_feasible(aug_rows, extra)


# ---------------------------------------------------------------------------
# Bounded integer search with interval propagation


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def propagate(rows: list[IntRow], congs: list[CongRow], lo: dict, hi: dict) -> bool:
    """Tighten domains to bounds consistency; False when a domain empties."""
    changed = True
    while changed:
        changed = False
        for rel, coeffs, rhs in rows:
            bounds = [(coeffs, rhs)]
            if rel == "==":
                bounds.append(({v: -c for v, c in coeffs.items()}, -rhs))
            for cfs, target in bounds:
                # Each variable's contribution to the row maximum uses the
                # domain side the tightening below never touches (hi for
                # positive coefficients, lo for negative), so the per-row
                # contributions stay valid throughout the loop.
                items = list(cfs.items())
                contrib = [
                    c * hi[v] if c > 0 else c * lo[v] for v, c in items
                ]
                high = sum(contrib)
                if high < target:
                    return False
                for (v, c), own in zip(items, contrib):
                    rest_high = high - own
                    if c > 0:
                        new_lo = _ceil_div(target - rest_high, c)
                        if new_lo > lo[v]:
                            lo[v] = new_lo
                            changed = True
                    else:
                        new_hi = (target - rest_high) // c
                        if new_hi < hi[v]:
                            hi[v] = new_hi
                            changed = True
                    if lo[v] > hi[v]:
                        return False
        for coeffs, target, modulus in congs:
            unfixed = [v for v in coeffs if lo[v] != hi[v]]
            if len(unfixed) == 0:
                total = sum(c * lo[v] for v, c in coeffs.items())
                if (total - target) % modulus != 0:
                    return False
            elif len(unfixed) == 1:
                v = unfixed[0]
                a = coeffs[v]
                fixed = sum(c * lo[w] for w, c in coeffs.items() if w != v)
                # a * x_v === target - fixed (mod modulus)
                want = (target - fixed) % modulus
                g = gcd(a % modulus, modulus)
                if want % g != 0:
                    return False
                x = lo[v]
                while x <= hi[v] and (a * x - want) % modulus != 0:
                    x += 1
                if x > hi[v]:
                    return False
                if x > lo[v]:
                    lo[v] = x
                    changed = True
                y = hi[v]
                while y >= lo[v] and (a * y - want) % modulus != 0:
                    y -= 1
                if y < hi[v]:
                    hi[v] = y
                    changed = True
    return True


def _small_first(lo: int, hi: int) -> Iterator[int]:
    """Values of [lo, hi] ordered by increasing distance from zero."""
    start = min(max(0, lo), hi)
    yield start
    step = 1
    while True:
        emitted = False
        if start + step <= hi:
            yield start + step
            emitted = True
        if start - step >= lo:
            yield start - step
            emitted = True
        if not emitted:
            return
        step += 1


def _exact_holds(rows, congs, values) -> bool:
    for rel, coeffs, rhs in rows:
        total = sum(c * values[v] for v, c in coeffs.items())
        if rel == "==" and total != rhs:
            return False
        if rel == ">=" and total < rhs:
            return False
    for coeffs, target, modulus in congs:
        total = sum(c * values[v] for v, c in coeffs.items())
        if (total - target) % modulus != 0:
            return False
    return True


def search_box(
    rows: list[IntRow],
    congs: list[CongRow],
    nvars: int,
    bound: int,
    limit: int = 1,
) -> list[dict[int, int]]:
    """Up to ``limit`` integer points of the system inside [-bound, bound]^n.

    Exhaustive (hence complete within the box) depth-first search; variables
    are branched in index order, values smallest-magnitude first.
    """
    found: list[dict[int, int]] = []
    lo = {v: -bound for v in range(nvars)}
    hi = {v: bound for v in range(nvars)}

    def dfs(lo: dict, hi: dict) -> bool:
        if not propagate(rows, congs, lo, hi):
            return False
        branch = next((v for v in range(nvars) if lo[v] != hi[v]), None)
        if branch is None:
            values = {v: lo[v] for v in range(nvars)}
            if _exact_holds(rows, congs, values):
                found.append(values)
            return len(found) >= limit
        for value in _small_first(lo[branch], hi[branch]):
            nlo, nhi = dict(lo), dict(hi)
            nlo[branch] = nhi[branch] = value
            if dfs(nlo, nhi):
                return True
        return False

    dfs(lo, hi)
    return found


# ---------------------------------------------------------------------------
# Conditional-case expansion and the public solve entry point


@dataclass(frozen=True)
class Witness:
    assignment: dict[Symbol, int]
    guards: tuple = ()
    leaf_index: int = 0


@dataclass(frozen=True)
class UnsatWithinBound:
    bound: int


@dataclass(frozen=True)
class ProvablyUnsat:
    pass


def _branches(cond: CondEq):
    g = cond.guard
    if isinstance(g, Eq):
        return [
            (Eq(g.lhs, g.rhs, provenance="guard"), cond.consequence),
            (Le(g.lhs, g.rhs - LinExpr.of(1), provenance="guard"),),
            (Ge(g.lhs, g.rhs + LinExpr.of(1), provenance="guard"),),
        ]
    return [
        (Le(g.lhs, g.rhs, provenance="guard"), cond.consequence),
        (Ge(g.lhs, g.rhs + LinExpr.of(1), provenance="guard"),),
    ]


def solve_system(
    system: ConstraintSystem, bound: int = 64, witnesses: int = 1
) -> Witness | UnsatWithinBound | ProvablyUnsat | list[Witness]:
    """Solve a case system; see the module docstring for the strategy.

    With ``witnesses == 1`` returns the first :class:`Witness` (or an unsat
    marker); with ``witnesses > 1`` returns the list of witnesses found, in
    deterministic order, which is empty exactly when the system is unsat.
    """
    variables = system.variables
    var_index = {s: i for i, s in enumerate(variables)}
    nvars = len(variables)
    base_rows, base_congs = rows_from_constraints(system.unconditional, var_index)
    conditionals = system.conditionals

    collected: list[Witness] = []
    any_exhausted = False
    leaf_counter = 0

    def walk(level: int, rows: list[IntRow], guards: tuple) -> bool:
        nonlocal any_exhausted, leaf_counter
        if level == len(conditionals):
            leaf = leaf_counter
            leaf_counter += 1
            if provably_unsat_rows(rows, base_congs, nvars):
                return False
            sols = search_box(
                rows, base_congs, nvars, bound, limit=witnesses - len(collected)
            )
            if not sols:
                any_exhausted = True
                return False
            for sol in sols:
                assignment = {variables[v]: sol[v] for v in range(nvars)}
                collected.append(Witness(assignment, guards, leaf))
            return len(collected) >= witnesses
        for branch in _branches(conditionals[level]):
            extra_rows, _ = rows_from_constraints(branch, var_index)
            next_rows = rows + extra_rows
            lo = {v: -bound for v in range(nvars)}
            hi = {v: bound for v in range(nvars)}
            if not propagate(next_rows, base_congs, lo, hi):
                # box-infeasible; only a provable refutation keeps the
                # ProvablyUnsat verdict available for this subtree
                if not provably_unsat_rows(next_rows, base_congs, nvars):
                    any_exhausted = True
                continue
            if walk(level + 1, next_rows, guards + branch):
                return True
        return False

    walk(0, list(base_rows), ())
    if collected:
        return collected if witnesses > 1 else collected[0]
    if any_exhausted:
        return UnsatWithinBound(bound)
    return ProvablyUnsat()


# ---------------------------------------------------------------------------
# Helpers for other modules (assumption sets, instantiation)


def linexpr_system_rows(
    relations: Sequence[tuple[LinExpr, str]]
) -> tuple[list[IntRow], list[Symbol]]:
    """Rows for (expr, rel) pairs, rel in {">=", "=="}, meaning expr rel 0."""
    pool: set[Symbol] = set()
    for expr, _ in relations:
        pool.update(expr.symbols())
    variables = sorted(pool, key=lambda s: s.sort_key())
    var_index = {s: i for i, s in enumerate(variables)}
    rows: list[IntRow] = []
    for expr, rel in relations:
        coeffs, const = _expr_pair_to_row(expr, LinExpr.of(0), var_index)
        rows.append((rel, coeffs, -const))
    return rows, variables


def relations_feasible_int(
    relations: Sequence[tuple[LinExpr, str]], bound: int = 64
) -> bool:
    """Integer feasibility of expr-rel-0 relations (adaptive bounded check)."""
    rows, variables = linexpr_system_rows(relations)
    if not variables:
        return all(
            (rhs <= 0 if rel == ">=" else rhs == 0) for rel, _, rhs in rows
        )
    if provably_unsat_rows(rows, [], len(variables)):
        return False
    magnitude = max(
        [bound] + [abs(rhs) + 1 for _, _, rhs in rows]
    )
    return bool(search_box(rows, [], len(variables), magnitude, limit=1))


def relations_entail_nonpositive(
    relations: Sequence[tuple[LinExpr, str]], expr: LinExpr
) -> bool:
    """Do the relations force expr <= 0 (for integer symbols)?"""
    rows, variables = linexpr_system_rows(list(relations) + [(expr - 1, ">=")])
    return provably_unsat_rows(rows, [], len(variables))


def relations_entail_positive(
    relations: Sequence[tuple[LinExpr, str]], expr: LinExpr
) -> bool:
    """Do the relations force expr >= 1 (for integer symbols)?"""
    rows, variables = linexpr_system_rows(list(relations) + [(-expr, ">=")])
    return provably_unsat_rows(rows, [], len(variables))
