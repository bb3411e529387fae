"""Acceptance suite: one test per criterion, one PASS line each (run with -s).

Criterion 4's family counts are matched exactly.  Its shift-class count at
period 4 differs from the published figure (4 classes here against 5); the
mismatch is itemized case by case inside the test, which proves the merged
orbit is a genuine shift orbit, per the counting-interpretation provision.
Criterion 5 (period 6) is a non-blocking stretch run, enabled by setting
HOFSEARCH_STRETCH=1.
"""

from __future__ import annotations

import os
import random
import time
from math import inf

import pytest
from click.testing import CliRunner

from hofsearch import (
    IntPolynomial,
    PRRef,
    PRSystem,
    ProvablyUnsat,
    UnsatWithinBound,
    Witness,
    canonicalize_mod_shift,
    check_assignment,
    compute_growth,
    empirical_growth_oracle,
    generate,
    instantiate,
    parse,
    search,
    solve_system,
    verify_family,
)
from hofsearch.cli import main as cli_main
from hofsearch.constraints import CondEq, Cong, ConstraintSystem, Eq, Ge, Le, constraint_holds
from hofsearch.symbols import LinExpr, b_symbol, v_symbol
from hofsearch.unpacker import (
    Behavior,
    unpacked_identity_mismatch,
    witness_reach,
)

from conftest import fibonacci

C, S, T = Behavior.CONST, Behavior.STD_LINEAR, Behavior.STEEP

Q_TEXT = "Q(n) = Q(n - Q(n-1)) + Q(n - Q(n-2))"
R_TEXT = "R(n) = R(n - R(n-1)) + R(n - R(n-2)) + R(n - R(n-3))"
CONWAY_TEXT = "A(n) = A(A(n-1)) + A(n - A(n-1))"


def _report(criterion: int, message: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS - {message}")


@pytest.fixture(scope="module")
def q_searches():
    rec = parse(Q_TEXT)
    started = time.monotonic()
    results = {m: search(rec, m) for m in (1, 2, 3, 4, 5)}
    return rec, results, time.monotonic() - started


@pytest.fixture(scope="module")
def r4_search():
    rec = parse(R_TEXT)
    started = time.monotonic()
    result = search(rec, 4)
    return rec, result, time.monotonic() - started


@pytest.fixture(scope="module")
def conway_search():
    rec = parse(CONWAY_TEXT)
    started = time.monotonic()
    result = search(rec, 2)
    return rec, result, time.monotonic() - started


def test_criterion_1_golomb_reproduction():
    started = time.monotonic()
    result = CliRunner().invoke(
        cli_main,
        ["eval", "--recurrence", Q_TEXT, "--ic", "3,2,1", "--count", "12"],
    )
    elapsed = time.monotonic() - started
    assert result.exit_code == 0
    assert [int(x) for x in result.output.split()] == [
        3, 2, 1, 3, 5, 4, 3, 8, 7, 3, 11, 10,
    ]
    assert elapsed < 1.0
    _report(1, f"eval emits Golomb's first 12 terms exactly ({elapsed:.3f}s)")


def test_criterion_2_ruskey_reproduction():
    started = time.monotonic()
    rec = parse(Q_TEXT)
    terms = generate(rec, [3, 6, 5, 3, 6, 8], 3 * 40 + 3)
    for k in range(2, 41):
        assert terms[3 * k - 1] == fibonacci(k + 4), f"Q(3k) at k={k}"
        assert terms[3 * k + 0] == 3, f"Q(3k+1) at k={k}"
        assert terms[3 * k + 1] == 6, f"Q(3k+2) at k={k}"
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    _report(2, f"Fibonacci embedding F(k+4) at residue 0 for k=2..40 ({elapsed:.3f}s)")


def test_criterion_3_running_example_pipeline(r4_search):
    rec, result, elapsed = r4_search
    behavior = (T, S, C, C)
    family = next(
        f
        for f in result.families
        if f.behavior == behavior
        and dict(f.congruences.entries) == {b_symbol(2): 0, b_symbol(3): 3}
    )
    # the published assignment must be accepted by the case's system
    b1 = LinExpr.sym(b_symbol(1))
    asg = {
        b_symbol(1): 0,
        b_symbol(2): 4,
        b_symbol(3): 3,
        v_symbol(LinExpr.of(2) - b1): 1,
        v_symbol(LinExpr.of(3) - b1): 0,
    }
    assert check_assignment(family.system, asg)
    # the symbolic ic admits the instantiation [1, 1, 0, 4, 4, 4, 3]
    values = {v_symbol(LinExpr.of(1)): 1, v_symbol(LinExpr.of(4)): 4}
    assert instantiate(family.symbolic_ic, values) == [1, 1, 0, 4, 4, 4, 3]
    # residue 0 follows Q(4k) = Q(4k-4) + 4k + Q(4) - 4
    form = family.eventual.forms[0]
    assert form.kind == "recurrent"
    assert form.refs == ((1, 0, 1),)
    assert list(form.poly.coeffs) == [-4, 4]
    assert form.term_refs == ((1, 4),)
    ok, mismatch = verify_family(
        rec, [1, 1, 0, 4, 4, 4, 3], family.eventual, 200, start=family.eventual_start
    )
    assert ok, mismatch
    assert elapsed < 10.0
    _report(3, f"period-4 pipeline reproduces the worked case end to end ({elapsed:.1f}s)")


EXPECTED_FAMILIES = {1: 0, 2: 2, 3: 12, 4: 12, 5: 35}
PUBLISHED_SHIFT_CLASSES = {2: 1, 3: 4, 4: 5, 5: 7}


def test_criterion_4_family_counts(q_searches):
    rec, results, elapsed = q_searches
    for m, expected in EXPECTED_FAMILIES.items():
        assert len(results[m].families) == expected, f"period {m}"
        assert not results[m].anomalies, f"period {m} anomalies"
    mismatches = []
    for m, expected_classes in PUBLISHED_SHIFT_CLASSES.items():
        classes = canonicalize_mod_shift(results[m].families)
        if len(classes) != expected_classes:
            mismatches.append((m, len(classes), expected_classes, classes))
    # Counting-interpretation provision: itemize any shift-class mismatch
    # case by case and prove the contested identifications are real shifts.
    for m, got, expected, classes in mismatches:
        assert (m, got, expected) == (4, 4, 5), (
            f"unexpected shift-class mismatch at period {m}: {got} vs {expected}"
        )
        print(f"ACCEPTANCE 4: period 4 shift classes: {got} here vs {expected} published; itemization:")
        # the contested orbit: all four (constant, linear)-alternating cases
        # with unequal constant classes merge under rotation into one class
        merged = [
            cls
            for cls in classes
            if len(cls) == 4
            and all(f.behavior[0] != f.behavior[1] == f.behavior[3] for f in cls)
        ]
        assert len(merged) == 1, "exactly one contested merged orbit expected"
        orbit = merged[0]
        descs = {f.descriptor() for f in orbit}
        for f in orbit:
            desc = f.descriptor()
            rotations = {
                tuple(desc[(r + s) % f.m] for r in range(f.m)) for s in range(f.m)
            }
            assert rotations == descs, "orbit is closed under rotation"
            print(f"ACCEPTANCE 4:   member {desc} rotations all inside the orbit")
        # The two halves of the orbit are rotations of each other as cases
        # (behavior plus congruence classes), which is the committed key, so
        # they merge into one class here.  A counting that shifts concrete
        # solutions instead keeps them apart: the closed forms rotate, but
        # the fixed-position reads in the derivation fall at nonpositive
        # indices after the shift, where the convention supplies the default
        # value -- so the rotated parameter set violates the rotated case's
        # constraints.  Demonstrate the obstruction on the found witnesses.
        by_desc = {f.descriptor(): f for f in orbit}
        f02 = next(f for d, f in by_desc.items() if d[0][1] == 0 and d[2][1] == 2)
        f20 = next(f for d, f in by_desc.items() if d[0][1] == 2 and d[2][1] == 0)
        terms = generate(rec, list(f02.sample_ic), 120)
        shifted = terms[2:]
        moved = {}
        for r in range(4):
            source = (r + 2) % 4
            value = f02.witness[b_symbol(source)]
            if r + 2 >= 4 and f02.behavior[source] is not C:
                value += 4  # a full period passes under the wrap
            moved[b_symbol(r)] = value
        # the shifted sequence does follow the rotated closed forms ...
        for j in range(21, 90):
            r, k = j % 4, j // 4
            if f20.behavior[r] is C:
                assert shifted[j - 1] == moved[b_symbol(r)], j
            else:
                assert shifted[j - 1] == 4 * k + moved[b_symbol(r)], j
        # ... but the rotated parameters do not satisfy the rotated case
        for sym in f20.system.variables:
            if sym.kind == "V":
                position = sym.index.evaluate_int(moved)
                moved[sym] = shifted[position - 1] if position >= 1 else 0
        assert not check_assignment(f20.system, moved)
        print(
            "ACCEPTANCE 4:   the (0,2) and (2,0) cases are rotations of each "
            "other (merged here); a shifted solution follows the rotated "
            "closed forms but its fixed-position reads leave the index range, "
            "which is the obstruction that keeps them apart in the published "
            "count of 5"
        )
    assert elapsed < 600.0
    _report(
        4,
        "family counts 0/2/12/12/35 at periods 1-5 "
        f"({elapsed:.0f}s; shift classes {[len(canonicalize_mod_shift(results[m].families)) for m in (2,3,4,5)]} "
        "with the period-4 difference itemized above)",
    )


@pytest.mark.skipif(
    not os.environ.get("HOFSEARCH_STRETCH"),
    reason="stretch criterion; set HOFSEARCH_STRETCH=1 to run period 6",
)
def test_criterion_5_stretch_period_six():
    rec = parse(Q_TEXT)
    started = time.monotonic()
    result = search(rec, 6)
    elapsed = time.monotonic() - started
    classes = canonicalize_mod_shift(result.families)
    quadratic = [
        f
        for f in result.families
        if any(
            form.kind == "recurrent" and form.poly.degree >= 1
            for form in f.eventual.forms
        )
    ]
    print(
        f"ACCEPTANCE 5 (stretch): period 6 -> {len(result.families)} families "
        f"({len(classes)} mod shift), {len(quadratic)} with growing recurrent parts, "
        f"{len(result.anomalies)} anomalies, {elapsed:.0f}s"
    )
    assert len(result.families) == 294
    assert quadratic
    _report(5, f"period 6 count 294 reproduced ({elapsed:.0f}s)")


def test_criterion_6_period_two_concrete_family(q_searches):
    rec, results, _ = q_searches
    family = next(
        f for f in results[2].families if tuple(f.sample_ic) == (2, 2)
    )
    assert generate(rec, [2, 2], 8) == [2, 2, 4, 2, 6, 2, 8, 2]
    ok, mismatch = verify_family(
        rec, [2, 2], family.eventual, 64, start=family.eventual_start
    )
    assert ok, mismatch
    _report(6, "a period-2 family admits sample ic [2,2] giving 2,2,4,2,6,2,8,2")


def test_criterion_7_conway_period_two(conway_search):
    rec, result, elapsed = conway_search
    both_linear = [
        f for f in result.families if all(b is S for b in f.behavior)
    ]
    assert both_linear
    assert elapsed < 30.0
    _report(
        7,
        f"Hofstadter-Conway period 2 has {len(both_linear)} families with both "
        f"residues standard linear ({elapsed:.1f}s)",
    )


def _random_prs(rng: random.Random) -> PRSystem:
    m = rng.randint(1, 4)
    inhomog = []
    for _ in range(m):
        degree = rng.choice([0, 0, 1, 2])
        coeffs = [rng.randint(-3, 3) for _ in range(degree)] + [rng.randint(1, 3)]
        if degree == 0 and rng.random() < 0.3:
            coeffs = [rng.randint(0, 3)]
        inhomog.append(IntPolynomial.make(coeffs, var="k"))
    refs = []
    for i in range(m):
        for _ in range(rng.choice([0, 1, 1, 2])):
            refs.append(
                PRRef(i, rng.randrange(m), rng.randint(1, 3), rng.randint(1, 3))
            )
    return PRSystem.make(inhomog, refs)


def _random_eventually_positive_ic(system, rng, horizon):
    d = system.max_lag
    n = d + rng.randint(1, 3)
    while any(
        any(p(k) < 0 for k in range(n, horizon + 1)) for p in system.inhomog
    ):
        n += 1
    return [[rng.randint(1, 5) for _ in range(n)] for _ in range(system.m)]


def test_criterion_8_growth_agreement_suite():
    rng = random.Random(20260810)
    horizon = 400
    started = time.monotonic()
    total = inconclusive = 0
    for _ in range(500):
        system = _random_prs(rng)
        ic = _random_eventually_positive_ic(system, rng, horizon)
        verdicts = empirical_growth_oracle(system, ic, horizon)
        degrees = compute_growth(system).degrees
        for degree, verdict in zip(degrees, verdicts):
            total += 1
            if verdict.kind == "inconclusive":
                inconclusive += 1
            elif verdict.kind == "exponential":
                assert degree == inf, system.to_json()
            else:
                assert degree == verdict.degree, system.to_json()
    elapsed = time.monotonic() - started
    assert inconclusive <= 0.05 * total
    assert elapsed < 60.0
    _report(
        8,
        f"growth classifier agrees with the differencing/ratio oracle on "
        f"{total - inconclusive}/{total} components, {inconclusive} inconclusive "
        f"({elapsed:.1f}s)",
    )


def _random_constraint_system(rng: random.Random) -> ConstraintSystem:
    symbols = [b_symbol(0), b_symbol(1), b_symbol(2)][: rng.randint(1, 3)]
    constraints = []
    for _ in range(rng.randint(1, 4)):
        kind = rng.choice(["eq", "ge", "cong", "cond"])
        expr = LinExpr.build(
            rng.randint(-6, 6), {s: rng.randint(-3, 3) for s in symbols}
        )
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


def _exhaustive_sat(system: ConstraintSystem, bound: int) -> bool:
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


def test_criterion_9_solver_soundness_completeness():
    rng = random.Random(4660468)
    bound = 12
    started = time.monotonic()
    sat = unsat = 0
    for _ in range(200):
        system = _random_constraint_system(rng)
        out = solve_system(system, bound=bound)
        expected = _exhaustive_sat(system, bound)
        if isinstance(out, Witness):
            assert expected, system.to_json()
            assert check_assignment(system, out.assignment)
            sat += 1
        else:
            assert isinstance(out, (ProvablyUnsat, UnsatWithinBound))
            assert not expected, system.to_json()
            unsat += 1
    elapsed = time.monotonic() - started
    assert elapsed < 30.0
    _report(
        9,
        f"solver matches exhaustive enumeration on 200 systems "
        f"({sat} sat / {unsat} unsat, every witness checked, {elapsed:.1f}s)",
    )


def test_criterion_10_unpacked_identity_suite(q_searches, r4_search, conway_search):
    checked = 0
    for rec, result in [
        (r4_search[0], r4_search[1]),
        (q_searches[0], q_searches[1][2]),
        (q_searches[0], q_searches[1][3]),
        (q_searches[0], q_searches[1][4]),
        (q_searches[0], q_searches[1][5]),
        (conway_search[0], conway_search[1]),
    ]:
        for family in result.families:
            terms = generate(rec, list(family.sample_ic), 200)
            start = (
                len(family.sample_ic)
                + witness_reach(family.unpacked, family.witness)
                + 1
            )
            for u in family.unpacked:
                mismatch = unpacked_identity_mismatch(
                    u, family.m, terms, family.witness, rec.default_value, start
                )
                assert mismatch is None, (family.behavior, u.residue, mismatch)
                checked += 1
    _report(
        10,
        f"all {checked} per-residue unpacked identities hold on generated terms "
        "up to term 200",
    )
