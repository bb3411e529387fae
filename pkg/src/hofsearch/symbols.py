"""Symbols and exact linear expressions shared across the pipeline.

Three kinds of symbols occur while reasoning about an interleaved solution:

* ``B(r)`` -- the unknown constant term of the subsequence at residue ``r``
  (its eventual value when constant, its intercept when linear);
* ``V(c)`` -- the unknown sequence value at index ``c``, where ``c`` is itself
  an integer-linear expression in other symbols;
* auxiliary variables introduced by the solver (e.g. when a congruence is
  rewritten as an equality).

A :class:`LinExpr` is an exact rational-linear combination of symbols plus a
constant.  Rational coefficients only ever acquire denominators dividing the
search period (they come from dividing an index by the period), and every
expression that must be integer-valued is checked at the point of use.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rat = Union[int, Fraction]


@dataclass(frozen=True, order=False)
class Symbol:
    """An interned symbolic unknown.

    Equality is structural; two ``V`` symbols with structurally-equal index
    expressions are the same symbol.
    """

    kind: str  # "B" | "V" | "aux"
    residue: int | None = None
    index: "LinExpr | None" = None
    name: str | None = None

    def sort_key(self) -> tuple:
        if self.kind == "B":
            return (0, self.residue, "")
        if self.kind == "V":
            return (1, 0, self.index.sort_key())
        return (2, 0, self.name)

    def __str__(self) -> str:
        if self.kind == "B":
            return f"B{self.residue}"
        if self.kind == "V":
            return f"V({self.index})"
        return self.name or "aux"


def b_symbol(residue: int) -> Symbol:
    return Symbol(kind="B", residue=residue)


def v_symbol(index: "LinExpr") -> Symbol:
    return Symbol(kind="V", index=index)


def aux_symbol(name: str) -> Symbol:
    return Symbol(kind="aux", name=name)


@dataclass(frozen=True)
class LinExpr:
    """constant + sum of coefficient * symbol, with exact arithmetic.

    ``terms`` is kept sorted by symbol key with zero coefficients dropped, so
    structural equality doubles as mathematical equality.
    """

    const: Fraction = Fraction(0)
    terms: tuple[tuple[Symbol, Fraction], ...] = ()

    # -- construction -------------------------------------------------

    @staticmethod
    def of(value: Rat) -> "LinExpr":
        return LinExpr(const=Fraction(value))

    @staticmethod
    def sym(symbol: Symbol, coeff: Rat = 1) -> "LinExpr":
        c = Fraction(coeff)
        if c == 0:
            return LinExpr()
        return LinExpr(const=Fraction(0), terms=((symbol, c),))

    @staticmethod
    def build(const: Rat, coeffs: Mapping[Symbol, Rat]) -> "LinExpr":
        terms = tuple(
            sorted(
                ((s, Fraction(c)) for s, c in coeffs.items() if Fraction(c) != 0),
                key=lambda t: t[0].sort_key(),
            )
        )
        return LinExpr(const=Fraction(const), terms=terms)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "LinExpr | Rat") -> "LinExpr":
        if isinstance(other, (int, Fraction)):
            return LinExpr(self.const + other, self.terms)
        coeffs = dict(self.terms)
        for s, c in other.terms:
            coeffs[s] = coeffs.get(s, Fraction(0)) + c
        return LinExpr.build(self.const + other.const, coeffs)

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr(-self.const, tuple((s, -c) for s, c in self.terms))

    def __sub__(self, other: "LinExpr | Rat") -> "LinExpr":
        if isinstance(other, (int, Fraction)):
            return LinExpr(self.const - other, self.terms)
        return self + (-other)

    def __rsub__(self, other: Rat) -> "LinExpr":
        return (-self) + other

    def scale(self, factor: Rat) -> "LinExpr":
        f = Fraction(factor)
        if f == 0:
            return LinExpr()
        return LinExpr(self.const * f, tuple((s, c * f) for s, c in self.terms))

    # -- queries ---------------------------------------------------------

    @property
    def is_concrete(self) -> bool:
        return not self.terms

    def as_int(self) -> int:
        """The exact integer value of a concrete, integral expression."""
        if self.terms:
            raise ValueError(f"expression {self} is not concrete")
        if self.const.denominator != 1:
            raise ValueError(f"expression {self} is not an integer")
        return int(self.const)

    @property
    def is_integral_coeffs(self) -> bool:
        return self.const.denominator == 1 and all(
            c.denominator == 1 for _, c in self.terms
        )

    def coeff(self, symbol: Symbol) -> Fraction:
        for s, c in self.terms:
            if s == symbol:
                return c
        return Fraction(0)

    def symbols(self) -> tuple[Symbol, ...]:
        return tuple(s for s, _ in self.terms)

    def substitute(self, values: Mapping[Symbol, "LinExpr | int"]) -> "LinExpr":
        """Replace symbols that occur in ``values``; others are kept."""
        out = LinExpr.of(self.const)
        for s, c in self.terms:
            if s in values:
                v = values[s]
                if isinstance(v, int):
                    out = out + c * v
                else:
                    out = out + v.scale(c)
            else:
                out = out + LinExpr.sym(s, c)
        return out

    def evaluate(self, values: Mapping[Symbol, int]) -> Fraction:
        total = self.const
        for s, c in self.terms:
            if s not in values:
                raise KeyError(f"no value for symbol {s}")
            total += c * values[s]
        return total

    def evaluate_int(self, values: Mapping[Symbol, int]) -> int:
        v = self.evaluate(values)
        if v.denominator != 1:
            raise ValueError(f"{self} does not evaluate to an integer")
        return int(v)

    def sort_key(self) -> tuple:
        return (
            (self.const.numerator, self.const.denominator),
            tuple((s.sort_key(), c.numerator, c.denominator) for s, c in self.terms),
        )

    def __str__(self) -> str:
        parts: list[str] = []
        if self.const != 0 or not self.terms:
            parts.append(_fmt_rat(self.const))
        for s, c in self.terms:
            if c == 1:
                parts.append(f"+ {s}")
            elif c == -1:
                parts.append(f"- {s}")
            elif c < 0:
                parts.append(f"- {_fmt_rat(-c)}*{s}")
            else:
                parts.append(f"+ {_fmt_rat(c)}*{s}")
        text = " ".join(parts)
        if text.startswith("+ "):
            text = text[2:]
        return text


def _fmt_rat(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


ZERO = LinExpr()
ONE = LinExpr.of(1)


def lin_sum(exprs: Iterable[LinExpr]) -> LinExpr:
    total = ZERO
    for e in exprs:
        total = total + e
    return total
