"""Symbolic unpacking of a recurrence under an assumed interleaving.

Fix a period ``m`` and, for every residue ``r``, an assumed behavior of the
subsequence ``Q(mk + r)``: eventually constant (``B_r``), standard linear
(``mk + B_r``), or steep (growing strictly faster than ``mk``).  Under these
assumptions every call in the right-hand side can be substituted away, from
the innermost call outward:

* an index that is eventually nonpositive contributes the default value;
* a constant index ``c`` becomes the unknown sequence value ``V(c)``
  (or the default value when ``c`` is a concrete nonpositive integer);
* an index ``mk + c`` refers to the subsequence at residue ``c mod m``,
  shifted by ``ceil(-c / m)``; resolving that residue requires knowing the
  congruence class of ``c``, which is where the case split on congruence
  assignments enters;
* a call to a steep subsequence in outermost position is left in place as a
  reference (these become the self-referential part of the induced
  recurrence system); in inner position its unbounded growth makes the
  surrounding index eventually nonpositive.

The result, per residue, is a polynomial in ``k`` with symbolic coefficients
plus integer-weighted references to steep residues.  Structural consistency
of the case is then checked against the assumed behaviors, with growth of
the steep residues classified through the induced recurrence system.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from enum import Enum
from fractions import Fraction
from math import inf
from typing import Iterator, Mapping

from .polynomials import IntPolynomial
from .prs import GrowthResult, PRRef, PRSystem, compute_growth
from .recurrence import NestedExpr, Recurrence, is_basic
from .symbols import LinExpr, Symbol, b_symbol, v_symbol


class Behavior(Enum):
    CONST = "constant"
    STD_LINEAR = "standard-linear"
    STEEP = "steep"

    def slope(self, m: int) -> int | float:
        if self is Behavior.CONST:
            return 0
        if self is Behavior.STD_LINEAR:
            return m
        return inf


BehaviorVector = tuple[Behavior, ...]


def all_behavior_vectors(m: int) -> list[BehaviorVector]:
    order = (Behavior.CONST, Behavior.STD_LINEAR, Behavior.STEEP)
    return [tuple(v) for v in itertools.product(order, repeat=m)]


class ResidueUndecided(Exception):
    """Unpacking needed the congruence class of a symbol not yet assigned."""

    def __init__(self, symbol: Symbol):
        super().__init__(f"congruence class of {symbol} is undecided")
        self.symbol = symbol


class UnpackReject(Exception):
    """The case is structurally impossible; carries the reason."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class CongruenceAssignment:
    """Congruence classes (mod the period) chosen for constant symbols."""

    entries: tuple[tuple[Symbol, int], ...] = ()

    @staticmethod
    def make(mapping: Mapping[Symbol, int]) -> "CongruenceAssignment":
        return CongruenceAssignment(
            tuple(sorted(mapping.items(), key=lambda kv: kv[0].sort_key()))
        )

    def get(self, symbol: Symbol) -> int | None:
        for s, c in self.entries:
            if s == symbol:
                return c
        return None

    def with_entry(self, symbol: Symbol, cls: int) -> "CongruenceAssignment":
        return CongruenceAssignment.make({**dict(self.entries), symbol: cls})

    def as_dict(self) -> dict[Symbol, int]:
        return dict(self.entries)

    def __str__(self) -> str:
        return ", ".join(f"{s} = {c} (mod m)" for s, c in self.entries) or "(none)"


# ---------------------------------------------------------------------------
# Value algebra: polynomials in k with symbolic coefficients, and signed
# unbounded values


@dataclass(frozen=True)
class KPoly:
    """Polynomial in the subsequence index k with LinExpr coefficients."""

    coeffs: tuple[LinExpr, ...] = ()

    @staticmethod
    def make(coeffs) -> "KPoly":
        cs = [c if isinstance(c, LinExpr) else LinExpr.of(c) for c in coeffs]
        while cs and cs[-1] == LinExpr():
            cs.pop()
        return KPoly(tuple(cs))

    @staticmethod
    def constant(value: LinExpr | int) -> "KPoly":
        return KPoly.make([value])

    @staticmethod
    def from_intpoly(p: IntPolynomial) -> "KPoly":
        return KPoly.make([LinExpr.of(c) for c in p.coeffs])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, power: int) -> LinExpr:
        return self.coeffs[power] if power < len(self.coeffs) else LinExpr()

    @property
    def constant_part(self) -> LinExpr:
        return self.coeff(0)

    @property
    def k_coeff(self) -> LinExpr:
        return self.coeff(1)

    def __add__(self, other: "KPoly") -> "KPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return KPoly.make([self.coeff(i) + other.coeff(i) for i in range(n)])

    def scale(self, factor: int) -> "KPoly":
        return KPoly.make([c.scale(factor) for c in self.coeffs])

    def substitute(self, values) -> "KPoly":
        return KPoly.make([c.substitute(values) for c in self.coeffs])

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for p in range(self.degree, -1, -1):
            c = self.coeff(p)
            if c == LinExpr():
                continue
            body = str(c)
            if ("+" in body or "-" in body[1:]) and p > 0:
                body = f"({body})"
            if p == 0:
                parts.append(body)
            elif p == 1:
                parts.append("k" if body == "1" else f"{body}*k")
            else:
                parts.append(f"k^{p}" if body == "1" else f"{body}*k^{p}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class UnboundedValue:
    """A value growing to +/- infinity with k; the offset is informational."""

    sign: int
    offset: LinExpr = field(default_factory=LinExpr)

    def scale(self, factor: int) -> "UnboundedValue":
        if factor == 0:
            raise ValueError("cannot scale an unbounded value by zero")
        sign = self.sign if factor > 0 else -self.sign
        return UnboundedValue(sign, self.offset.scale(factor))

    def __str__(self) -> str:
        lead = "inf*k" if self.sign > 0 else "-inf*k"
        return f"{lead} + {self.offset}" if self.offset != LinExpr() else lead


Value = KPoly | UnboundedValue


def _vadd(a: Value, b: Value) -> Value:
    if isinstance(a, KPoly) and isinstance(b, KPoly):
        return a + b
    if isinstance(a, UnboundedValue) and isinstance(b, UnboundedValue):
        if a.sign != b.sign:
            raise UnpackReject("conflicting unbounded contributions in one index")
        return UnboundedValue(a.sign, a.offset + b.offset)
    ub, kp = (a, b) if isinstance(a, UnboundedValue) else (b, a)
    return UnboundedValue(ub.sign, ub.offset + kp.constant_part)


@dataclass(frozen=True)
class UnpackedExpr:
    """The eventual identity for Q(mk + r): polynomial plus steep references.

    ``validity`` collects, for every subsequence value read while evaluating
    the term (whether substituted away or kept as a reference), an expression
    that must be >= 1 for the read to point strictly earlier in the sequence.
    Basic recurrences satisfy these automatically; in general they become
    constraints, since an eventual solution must never reference the future.
    """

    residue: int
    poly: KPoly
    refs: tuple[tuple[int, int, LinExpr], ...]  # (coeff, target residue, lag)
    validity: tuple[LinExpr, ...] = ()

    def render(self, name: str = "Q", m: int | None = None) -> str:
        parts = [str(self.poly)] if self.poly.coeffs else []
        for coeff, target, lag in self.refs:
            mag = "" if coeff == 1 else f"{coeff}*"
            parts.append(f"{mag}a{target}(k - ({lag}))")
        head = f"{name}({m}k+{self.residue})" if m else f"{name}(mk+{self.residue})"
        return f"{head} = " + (" + ".join(parts) if parts else "0")


class _UnpackContext:
    def __init__(self, rec: Recurrence, m: int, behavior: BehaviorVector, cong: CongruenceAssignment):
        self.rec = rec
        self.m = m
        self.behavior = behavior
        self.classes = cong.as_dict()
        self.v_symbols: list[Symbol] = []
        self.current_residue = 0
        self.validity: list[LinExpr] = []

    def record_read(self, index_constant: LinExpr) -> None:
        """A subsequence value at mk + index_constant was read; earlier-ness
        requires residue - index_constant >= 1."""
        self.validity.append(LinExpr.of(self.current_residue) - index_constant)

    def register_v(self, index_expr: LinExpr) -> Symbol:
        sym = v_symbol(index_expr)
        if sym not in self.v_symbols:
            self.v_symbols.append(sym)
        return sym

    def residue_of(self, expr: LinExpr) -> int:
        if expr.const.denominator != 1:
            raise UnpackReject(f"index constant {expr} is not an integer")
        total = int(expr.const)
        for s, c in expr.terms:
            if c.denominator != 1:
                raise UnpackReject(f"index constant {expr} has fractional coefficient")
            cls = self.classes.get(s)
            if cls is None:
                raise ResidueUndecided(s)
            total += int(c) * cls
        return total % self.m


def _resolve_call(ctx: _UnpackContext, idx: Value, outermost: bool):
    """Resolve Q(idx): a finite KPoly value, or ("ref", residue, lag)."""
    m = ctx.m
    default = KPoly.constant(ctx.rec.default_value)
    if isinstance(idx, UnboundedValue):
        if idx.sign < 0:
            return default
        raise UnpackReject("call index grows without bound above")
    if idx.degree <= 0:
        c = idx.constant_part
        if c.is_concrete:
            value = c.as_int()
            if value <= 0:
                return default
            return KPoly.constant(LinExpr.sym(ctx.register_v(LinExpr.of(value))))
        return KPoly.constant(LinExpr.sym(ctx.register_v(c)))
    if idx.degree == 1:
        a_expr = idx.k_coeff
        if not a_expr.is_concrete:
            raise UnpackReject(f"index slope {a_expr} is symbolic")
        a = a_expr.as_int()
        if a < 0:
            return default
        if a != m:
            raise UnpackReject(f"index slope {a} is incompatible with period {m}")
        c0 = idx.constant_part
        target = ctx.residue_of(c0)
        lag = (LinExpr.of(target) - c0).scale(Fraction(1, m))
        kind = ctx.behavior[target]
        b_t = LinExpr.sym(b_symbol(target))
        ctx.record_read(c0)
        if kind is Behavior.CONST:
            return KPoly.constant(b_t)
        if kind is Behavior.STD_LINEAR:
            return KPoly.make([c0 - target + b_t, LinExpr.of(m)])
        if outermost:
            return ("ref", target, lag)
        return UnboundedValue(+1, b_t)
    lead = idx.coeffs[-1]
    if not lead.is_concrete:
        raise UnpackReject(f"leading index coefficient {lead} is symbolic")
    if lead.as_int() < 0:
        return default
    raise UnpackReject("superlinear index grows without bound above")


@lru_cache(maxsize=8192)
def _poly_at_residue(poly: IntPolynomial, m: int, residue: int) -> KPoly:
    """P(mk + residue) as a KPoly; cached, the AST is fixed across cases."""
    return KPoly.from_intpoly(poly.compose_affine(m, residue))


def _eval_index(ctx: _UnpackContext, expr: NestedExpr, residue: int) -> Value:
    total: Value = _poly_at_residue(expr.poly, ctx.m, residue)
    for coeff, arg in expr.calls:
        idx = _eval_index(ctx, arg, residue)
        value = _resolve_call(ctx, idx, outermost=False)
        total = _vadd(total, value.scale(coeff))
    return total


def unpack(
    rec: Recurrence,
    m: int,
    behavior: BehaviorVector,
    cong: CongruenceAssignment,
) -> tuple[UnpackedExpr, ...]:
    """Eventual identities for Q(mk + r), r = 0..m-1, under the case.

    Raises :class:`ResidueUndecided` when the congruence assignment does not
    decide a needed class (callers in lazy mode treat this as a case split)
    and :class:`UnpackReject` when the case is structurally impossible.
    """
    if len(behavior) != m:
        raise ValueError("behavior vector length must equal the period")
    ctx = _UnpackContext(rec, m, behavior, cong)
    out = []
    for r in range(m):
        ctx.current_residue = r
        ctx.validity = []
        poly: Value = _poly_at_residue(rec.rhs.poly, m, r)
        refs: list[tuple[int, int, LinExpr]] = []
        for coeff, arg in rec.rhs.calls:
            idx = _eval_index(ctx, arg, r)
            resolved = _resolve_call(ctx, idx, outermost=True)
            if isinstance(resolved, tuple):
                _, target, lag = resolved
                refs.append((coeff, target, lag))
            else:
                poly = _vadd(poly, resolved.scale(coeff))
        if isinstance(poly, UnboundedValue):
            raise UnpackReject("subsequence expression is unbounded")
        merged: dict[tuple[int, tuple], tuple[int, LinExpr]] = {}
        for coeff, target, lag in refs:
            key = (target, lag.sort_key())
            prev = merged.get(key)
            merged[key] = (coeff + (prev[0] if prev else 0), lag)
        clean = tuple(
            (c, target, lag)
            for (target, _), (c, lag) in sorted(merged.items())
            if c != 0
        )
        seen_validity: set = set()
        validity = []
        for v in ctx.validity:
            if v.is_concrete and v.const < 1:
                raise UnpackReject(
                    f"residue {r}: expression reads the current or a future term"
                )
            key = v.sort_key()
            if key not in seen_validity:
                seen_validity.add(key)
                validity.append(v)
        out.append(
            UnpackedExpr(residue=r, poly=poly, refs=clean, validity=tuple(validity))
        )
    return tuple(out)


def unpack_v_symbols(ctx_exprs: tuple[UnpackedExpr, ...]) -> list[Symbol]:
    """All V symbols appearing in the unpacked expressions, canonical order."""
    pool: set[Symbol] = set()
    for u in ctx_exprs:
        for c in u.poly.coeffs:
            pool.update(s for s in c.symbols() if s.kind == "V")
        for _, _, lag in u.refs:
            pool.update(s for s in lag.symbols() if s.kind == "V")
    return sorted(pool, key=lambda s: s.sort_key())


# ---------------------------------------------------------------------------
# Congruence case enumeration


class LazyCongruenceCases:
    """Case splitter for non-basic recurrences.

    Classes are assigned on demand: whenever unpacking stops because some
    symbol's class is undecided, the case splits into one branch per class.
    """

    def __init__(self, rec: Recurrence, behavior: BehaviorVector):
        self.rec = rec
        self.behavior = behavior
        self.m = len(behavior)

    def expand(
        self,
    ) -> Iterator[tuple[CongruenceAssignment, tuple[UnpackedExpr, ...] | None, str | None]]:
        def go(assign: CongruenceAssignment):
            try:
                unpacked = unpack(self.rec, self.m, self.behavior, assign)
            except ResidueUndecided as split:
                for cls in range(self.m):
                    yield from go(assign.with_entry(split.symbol, cls))
                return
            except UnpackReject as reject:
                yield assign, None, reject.reason
                return
            yield assign, unpacked, None

        yield from go(CongruenceAssignment.make({}))


def enumerate_congruence_cases(
    rec: Recurrence, behavior: BehaviorVector
) -> list[CongruenceAssignment] | LazyCongruenceCases:
    """All congruence cases for a behavior vector.

    For a basic recurrence the needed classes are exactly those of the
    constant residues' B symbols, giving a closed m^t product; otherwise a
    lazy splitter is returned.
    """
    m = len(behavior)
    if is_basic(rec):
        syms = [b_symbol(r) for r in range(m) if behavior[r] is Behavior.CONST]
        return [
            CongruenceAssignment.make(dict(zip(syms, combo)))
            for combo in itertools.product(range(m), repeat=len(syms))
        ]
    return LazyCongruenceCases(rec, behavior)


def iter_cases(
    rec: Recurrence, m: int, behavior: BehaviorVector
) -> Iterator[tuple[CongruenceAssignment, tuple[UnpackedExpr, ...] | None, str | None]]:
    """Uniform iteration over (assignment, unpacked, rejection reason)."""
    cases = enumerate_congruence_cases(rec, behavior)
    if isinstance(cases, LazyCongruenceCases):
        yield from cases.expand()
        return
    for cong in cases:
        try:
            yield cong, unpack(rec, m, behavior, cong), None
        except UnpackReject as reject:
            yield cong, None, reject.reason


# ---------------------------------------------------------------------------
# Structural consistency


@dataclass(frozen=True)
class StructureReport:
    ok: bool
    reason: str | None = None
    growth: GrowthResult | None = None
    steep_kinds: tuple[tuple[int, str], ...] = ()
    pending_cycles: tuple[tuple[int, ...], ...] = ()

    def steep_kind(self, residue: int) -> str | None:
        for r, kind in self.steep_kinds:
            if r == residue:
                return kind
        return None


def _reject(reason: str) -> StructureReport:
    return StructureReport(ok=False, reason=reason)


def check_structure(
    unpacked: tuple[UnpackedExpr, ...], behavior: BehaviorVector
) -> StructureReport:
    """Do the unpacked expressions match the assumed behaviors?

    Constant residues must have collapsed to constants, standard linear ones
    to ``mk + c``, and steep ones must contain a growth source.  Steep
    residues are then classified through the induced recurrence system;
    steep-linear residues arising from a cycle do not cause rejection here
    but are reported as needing a steepness constraint.
    """
    m = len(behavior)
    for u in unpacked:
        b = behavior[u.residue]
        if b is Behavior.CONST:
            if u.refs or u.poly.degree > 0:
                return _reject(
                    f"residue {u.residue}: assumed constant but the expression is not"
                )
        elif b is Behavior.STD_LINEAR:
            if u.refs:
                return _reject(
                    f"residue {u.residue}: assumed standard linear but refers to a steep subsequence"
                )
            k = u.poly.k_coeff
            if u.poly.degree != 1 or not k.is_concrete or k.as_int() != m:
                return _reject(
                    f"residue {u.residue}: assumed standard linear but the expression is not {m}k + c"
                )
        else:
            has_source = bool(u.refs)
            if not has_source and u.poly.degree == 1:
                k = u.poly.k_coeff
                has_source = k.is_concrete and k.as_int() > m
            if not has_source and u.poly.degree >= 2:
                lead = u.poly.coeffs[-1]
                has_source = lead.is_concrete and lead.as_int() > 0
            if not has_source:
                return _reject(
                    f"residue {u.residue}: assumed steep but the expression has no growth source"
                )
    system, _ = extract_prs(unpacked, behavior)
    growth = compute_growth(system, degree_floor=0)
    steep_kinds: list[tuple[int, str]] = []
    pending: list[tuple[int, ...]] = []
    for u in unpacked:
        if behavior[u.residue] is not Behavior.STEEP:
            continue
        r = u.residue
        d = growth.degree_of(r)
        cls = growth.class_of(r)
        if d == inf:
            steep_kinds.append((r, "exponential"))
        elif d >= 2:
            steep_kinds.append((r, "superlinear"))
        elif d == 1:
            steep_kinds.append((r, "steep-linear"))
            if cls.is_cycle and cls.cycle_order not in pending:
                pending.append(cls.cycle_order)
        else:
            return _reject(
                f"residue {r}: growth degree {d} is incompatible with a steep subsequence"
            )
    return StructureReport(
        ok=True,
        growth=growth,
        steep_kinds=tuple(steep_kinds),
        pending_cycles=tuple(pending),
    )


def witness_reach(unpacked: tuple[UnpackedExpr, ...], asg) -> int:
    """Farthest back (in absolute index) the identities read under a witness."""
    reach = 1
    for u in unpacked:
        for v in u.validity:
            try:
                reach = max(reach, v.evaluate_int(asg))
            except (KeyError, ValueError):
                pass
    return reach


def unpacked_identity_mismatch(
    u: UnpackedExpr,
    m: int,
    terms: list[int],
    asg,
    default_value: int = 0,
    start: int = 1,
) -> int | None:
    """First index where Q(mk + r) fails the unpacked identity, or None.

    B symbols take witness values; V(c) symbols read the actual term at the
    index c evaluates to (the default value when nonpositive); references
    read the actual subsequence terms.  Checked for every index of the
    residue in [start, len(terms)].
    """

    def term(j: int) -> int:
        return default_value if j <= 0 else terms[j - 1]

    def coeff_value(c: LinExpr) -> int:
        total = c.const
        for s, q in c.terms:
            if s.kind == "V":
                total += q * term(s.index.evaluate_int(asg))
            else:
                total += q * asg[s]
        if total.denominator != 1:
            raise ValueError(f"non-integer coefficient {c}")
        return int(total)

    poly = [coeff_value(c) for c in u.poly.coeffs]
    refs = [
        (coeff, target, lag.evaluate_int(asg)) for coeff, target, lag in u.refs
    ]
    first_k = max(0, -(-(start - u.residue) // m))
    k = first_k
    while True:
        index = m * k + u.residue
        if index > len(terms):
            return None
        if index >= start:
            value = sum(c * k**p for p, c in enumerate(poly))
            for coeff, target, lag in refs:
                value += coeff * term(m * (k - lag) + target)
            if value != terms[index - 1]:
                return index
        k += 1


def extract_prs(
    unpacked: tuple[UnpackedExpr, ...], behavior: BehaviorVector
) -> tuple[PRSystem, list[str]]:
    """The induced recurrence system, plus positivity violations.

    Symbolic constants in the inhomogeneous parts are replaced by a
    degree-preserving placeholder (their value is unknown but they count as
    degree 0); only the degree feeds the growth classification.  Violations
    do not prevent extraction -- the pipeline continues, but its guarantees
    no longer apply.
    """
    inhomog = []
    refs = []
    for u in unpacked:
        coeffs: list[int] = []
        for p in range(u.poly.degree + 1):
            c = u.poly.coeff(p)
            if c.is_concrete:
                coeffs.append(c.as_int())
            elif p == 0:
                coeffs.append(1)  # symbolic constant: degree 0, value unknown
            else:
                raise UnpackReject(f"symbolic coefficient {c} on k^{p}")
        inhomog.append(IntPolynomial.make(coeffs, var="k"))
        for coeff, target, lag in u.refs:
            concrete = lag.as_int() if lag.is_concrete and lag.const.denominator == 1 else None
            refs.append(PRRef(u.residue, target, concrete, coeff))
    system = PRSystem.make(inhomog, refs)
    return system, system.validate()
