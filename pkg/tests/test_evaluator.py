from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from hofsearch import (
    AssumptionSet,
    Dead,
    EventualSolution,
    ResidueForm,
    bfile_lines,
    generate,
    generate_symbolic,
    parse,
    verify_family,
)
from hofsearch.evaluator import (
    FORWARD_REFERENCE,
    SELF_REFERENCE,
    InconsistentAssumption,
    SymbolicSession,
)
from hofsearch.polynomials import IntPolynomial
from hofsearch.symbols import LinExpr, v_symbol

from conftest import fibonacci


def _sym(pos):
    return LinExpr.sym(v_symbol(LinExpr.of(pos)))


class TestGenerate:
    def test_golomb_prefix(self, q_rec):
        assert generate(q_rec, [3, 2, 1], 12) == [3, 2, 1, 3, 5, 4, 3, 8, 7, 3, 11, 10]

    def test_period_two(self, q_rec):
        assert generate(q_rec, [2, 2], 8) == [2, 2, 4, 2, 6, 2, 8, 2]

    def test_r_death(self, r_rec):
        assert generate(r_rec, [1, 1, 0], 4) == Dead(4, SELF_REFERENCE)

    def test_original_hofstadter_values(self, q_rec):
        assert generate(q_rec, [1, 1], 10) == [1, 1, 2, 3, 3, 4, 5, 5, 6, 6]

    def test_count_shorter_than_ic_rejected(self, q_rec):
        with pytest.raises(ValueError):
            generate(q_rec, [1, 1, 1], 2)

    def test_prefix_stability(self, q_rec):
        long = generate(q_rec, [3, 2, 1], 60)
        short = generate(q_rec, [3, 2, 1], 25)
        assert long[:25] == short

    def test_ruskey_big_integers(self, q_rec):
        terms = generate(q_rec, [3, 6, 5, 3, 6, 8], 3 * 95)
        for k in range(2, 95):
            assert terms[3 * k - 1] == fibonacci(k + 4)
        assert terms[3 * 90 - 1] > 10**18  # far past 64-bit

    def test_default_value(self):
        rec = parse("Q(n) = Q(n - Q(n-1)) + Q(n - Q(n-2))")
        from hofsearch.recurrence import Recurrence

        rec5 = Recurrence(rec.name, rec.rhs, default_value=5)
        # Q(3) = Q(3 - 2) + Q(3 - 2) with ic [2, 2] is unchanged, but
        # Q(4) = Q(0) + Q(2) now picks up the default 5.
        assert generate(rec5, [2, 2], 4) == [2, 2, 4, 7]

    def test_forward_reference_death(self):
        rec = parse("Q(n) = Q(n + 1 - Q(n-1))")
        assert generate(rec, [0], 2) == Dead(2, FORWARD_REFERENCE)


class TestGenerateSymbolic:
    def test_concrete_matches_generate(self, q_rec):
        out = generate_symbolic(q_rec, [3, 2, 1], 12)
        assert not isinstance(out, Dead)
        terms, assumptions = out
        assert [t.as_int() for t in terms] == generate(q_rec, [3, 2, 1], 12)
        assert len(assumptions) == 0

    def test_r_example_symbolic_window(self, r_rec):
        r1, r4 = _sym(1), _sym(4)
        out = generate_symbolic(r_rec, [r1, 1, 0, r4, 4, 4, 3], 9)
        terms, assumptions = out
        assert terms[7] == LinExpr.of(4) + r4.scale(2)  # R(8) = 4 + 2*R(4)
        assert terms[8] == LinExpr.of(8)  # R(9) = 8
        # recorded: 5 - 2*R(4) <= 0, stored as 2*R(4) - 5 >= 0
        assert (r4.scale(2) - 5, ">=") in list(assumptions)

    def test_symbolic_death(self, r_rec):
        out = generate_symbolic(r_rec, [_sym(1), 1, 0], 4)
        assert out == Dead(4, SELF_REFERENCE)

    def test_assumptions_consistency_enforced(self):
        s = AssumptionSet()
        s.add(_sym(1) - 3)  # V(1) >= 3
        with pytest.raises(InconsistentAssumption):
            s.add(-_sym(1))  # V(1) <= 0

    def test_entailment(self):
        s = AssumptionSet()
        s.add(_sym(1) - 3)
        assert s.entails_positive(_sym(1))
        assert s.entails_nonpositive(LinExpr.of(2) - _sym(1))
        assert not s.entails_nonpositive(_sym(2))


@st.composite
def _basic_recurrences(draw):
    n_calls = draw(st.integers(1, 3))
    parts = []
    for _ in range(n_calls):
        beta = draw(st.integers(0, 2))
        gamma = draw(st.integers(1, 3))
        alpha = draw(st.integers(1, 2))
        head = f"{alpha}*" if alpha != 1 else ""
        body = f"n - {beta} - Q(n - {gamma})" if beta else f"n - Q(n - {gamma})"
        parts.append(f"{head}Q({body})")
    return parse("Q(n) = " + " + ".join(parts))


@settings(max_examples=40, deadline=None)
@given(
    rec=_basic_recurrences(),
    ic=st.lists(st.integers(0, 6), min_size=2, max_size=5),
    count=st.integers(6, 18),
)
def test_symbolic_layer_degenerates_to_concrete(rec, ic, count):
    count = max(count, len(ic))
    concrete = generate(rec, ic, count)
    symbolic = generate_symbolic(rec, ic, count)
    if isinstance(concrete, Dead):
        assert symbolic == concrete
    else:
        terms, assumptions = symbolic
        assert [t.as_int() for t in terms] == concrete
        assert len(assumptions) == 0


class TestVerifyFamily:
    def test_golomb_closed_form(self, q_rec):
        eventual = EventualSolution(
            m=3,
            forms=(
                ResidueForm.linear(3, -2),
                ResidueForm.const(3),
                ResidueForm.linear(3, 2),
            ),
        )
        ok, mismatch = verify_family(q_rec, [3, 2, 1], eventual, 300)
        assert ok and mismatch is None

    def test_ruskey_recurrent_form(self, q_rec):
        eventual = EventualSolution(
            m=3,
            forms=(
                ResidueForm.recurrent(
                    [(1, 0, 1), (1, 0, 2)], IntPolynomial.zero("k")
                ),
                ResidueForm.const(3),
                ResidueForm.const(6),
            ),
        )
        ok, mismatch = verify_family(q_rec, [3, 6, 5, 3, 6, 8], eventual, 120)
        assert ok and mismatch is None

    def test_negative_control(self, q_rec):
        wrong = EventualSolution(
            m=3,
            forms=(
                ResidueForm.linear(3, -2),
                ResidueForm.const(4),  # deliberately wrong
                ResidueForm.linear(3, 2),
            ),
        )
        ok, mismatch = verify_family(q_rec, [3, 2, 1], wrong, 30)
        assert not ok
        assert mismatch == 4  # the first 3k+1 index past the ic

    def test_death_propagates_as_failure(self, r_rec):
        eventual = EventualSolution(m=4, forms=tuple(ResidueForm.const(1) for _ in range(4)))
        ok, mismatch = verify_family(r_rec, [1, 1, 0], eventual, 20)
        assert not ok and mismatch == 4


def test_bfile_lines():
    assert bfile_lines([5, 7, 9]) == ["1 5", "2 7", "3 9"]


def test_taint_tracking_reports_positive_read_through_steep():
    rec = parse("Q(n) = Q(n - Q(n-1)) + Q(n - Q(n-2))")
    # position 2 declared steep with a concrete small value: computing the
    # next term routes an index through it and lands on a real table read
    session = SymbolicSession(rec, [1, 1], steep_positions=lambda p: p == 2)
    session.step()  # Q(3) = Q(3 - Q(2)) + Q(3 - Q(1)) reads through position 2
    assert session.violations
