"""Exact integer polynomials in one variable.

Coefficients are arbitrary-precision Python integers; index ``i`` of the
coefficient tuple is the coefficient of the variable to the ``i``-th power.
The zero polynomial has an empty coefficient tuple and the distinguished
degree ``-1`` (standing in for "minus infinity": it is smaller than the
degree of every nonzero polynomial and behaves correctly under ``max``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class IntPolynomial:
    coeffs: tuple[int, ...] = ()
    var: str = "n"

    @staticmethod
    def make(coeffs: Sequence[int], var: str = "n") -> "IntPolynomial":
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        return IntPolynomial(tuple(int(c) for c in cs), var)

    @staticmethod
    def zero(var: str = "n") -> "IntPolynomial":
        return IntPolynomial((), var)

    @staticmethod
    def constant(c: int, var: str = "n") -> "IntPolynomial":
        return IntPolynomial.make([c], var)

    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, power: int) -> int:
        return self.coeffs[power] if power < len(self.coeffs) else 0

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def __call__(self, x: int) -> int:
        total = 0
        for c in reversed(self.coeffs):
            total = total * x + c
        return total

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial.make(
            [self.coefficient(i) + other.coefficient(i) for i in range(n)], self.var
        )

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-c for c in self.coeffs), self.var)

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def scale(self, factor: int) -> "IntPolynomial":
        if factor == 0:
            return IntPolynomial.zero(self.var)
        return IntPolynomial(tuple(c * factor for c in self.coeffs), self.var)

    def compose_affine(self, a: int, b: int, var: str = "k") -> "IntPolynomial":
        """The polynomial ``p(a*x + b)`` in the new variable ``x``."""
        result = IntPolynomial.zero(var)
        base = IntPolynomial.make([b, a], var)
        power = IntPolynomial.constant(1, var)
        for c in self.coeffs:
            result = result + power.scale(c)
            power = _mul(power, base)
        return result

    @property
    def eventually_nonnegative(self) -> bool:
        """True when values are >= 0 for all large enough arguments."""
        if self.is_zero:
            return True
        return self.leading > 0 if self.degree >= 1 else self.coeffs[0] >= 0

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for p in range(self.degree, -1, -1):
            c = self.coefficient(p)
            if c == 0:
                continue
            mag = abs(c)
            if p == 0:
                body = str(mag)
            elif p == 1:
                body = self.var if mag == 1 else f"{mag}*{self.var}"
            else:
                body = f"{self.var}^{p}" if mag == 1 else f"{mag}*{self.var}^{p}"
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


def _mul(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    if p.is_zero or q.is_zero:
        return IntPolynomial.zero(p.var or q.var)
    out = [0] * (len(p.coeffs) + len(q.coeffs) - 1)
    for i, a in enumerate(p.coeffs):
        for j, b in enumerate(q.coeffs):
            out[i + j] += a * b
    return IntPolynomial.make(out, p.var)


def poly_sum(polys: Iterable[IntPolynomial], var: str = "n") -> IntPolynomial:
    total = IntPolynomial.zero(var)
    for p in polys:
        total = total + p
    return total
