"""Linear nested recurrences: AST, parser, formatter, classification.

A recurrence has the shape

    Q(n) = P(n) + sum_i alpha_i * Q(E_i)

where ``P`` is an integer polynomial in ``n`` and every argument ``E_i`` is
again an expression of the same shape.  The textual DSL is ASCII:

    recurrence := IDENT "(" "n" ")" "=" expr
    expr       := term (("+" | "-") term)*
    term       := INT | INT "*" call | call | poly-term
    poly-term  := INT? "*"? "n" ("^" INT)?
    call       := IDENT "(" iexpr ")"      -- IDENT must equal the name
    iexpr      := expr

Whitespace is insignificant and integers may be negated with a unary minus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .polynomials import IntPolynomial


class RecurrenceSyntaxError(ValueError):
    """Raised on malformed DSL input; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class NestedExpr:
    """Polynomial part plus coefficient-weighted nested calls.

    The call list is kept in a canonical order (argument depth, then the
    argument's canonical text, then coefficient) and calls with structurally
    equal arguments are merged, so structural equality of two expressions is
    decidable by ``==``.
    """

    poly: IntPolynomial = IntPolynomial.zero()
    calls: tuple[tuple[int, "NestedExpr"], ...] = ()

    @staticmethod
    def make(
        poly: IntPolynomial, calls: list[tuple[int, "NestedExpr"]]
    ) -> "NestedExpr":
        merged: dict[NestedExpr, int] = {}
        order: list[NestedExpr] = []
        for coeff, arg in calls:
            if arg not in merged:
                merged[arg] = 0
                order.append(arg)
            merged[arg] += coeff
        kept = [(merged[a], a) for a in order if merged[a] != 0]
        kept.sort(key=lambda ca: (ca[1].depth, str(ca[1]), ca[0]))
        return NestedExpr(poly, tuple(kept))

    @cached_property
    def depth(self) -> int:
        if not self.calls:
            return 0
        return 1 + max(arg.depth for _, arg in self.calls)

    @property
    def has_calls(self) -> bool:
        return bool(self.calls)

    def render(self, name: str) -> str:
        parts: list[str] = []
        if not self.poly.is_zero:
            parts.append(str(self.poly))
        for coeff, arg in self.calls:
            inner = f"{name}({arg.render(name)})"
            mag = abs(coeff)
            body = inner if mag == 1 else f"{mag}*{inner}"
            parts.append(("- " if coeff < 0 else "+ ") + body)
        if not parts:
            return "0"
        text = " ".join(parts)
        if text.startswith("+ "):
            return text[2:]
        if text.startswith("- "):
            return "-" + text[2:]
        return text

    def __str__(self) -> str:
        return self.render("Q")


@dataclass(frozen=True)
class Recurrence:
    """A named linear nested recurrence plus the value used at indices <= 0."""

    name: str
    rhs: NestedExpr
    default_value: int = 0

    def __post_init__(self):
        if not self.rhs.has_calls:
            raise ValueError("recurrence right-hand side contains no recursive call")

    @cached_property
    def innermost_arguments(self) -> tuple[NestedExpr, ...]:
        """Arguments of calls that contain no further calls."""
        found: list[NestedExpr] = []

        def walk(expr: NestedExpr) -> None:
            for _, arg in expr.calls:
                if arg.has_calls:
                    walk(arg)
                else:
                    found.append(arg)

        walk(self.rhs)
        return tuple(found)

    @cached_property
    def nonstandard_innermost(self) -> bool:
        """True unless every innermost argument is ``n - gamma``, gamma >= 1."""
        return any(_shift_of(arg) is None for arg in self.innermost_arguments)


def _shift_of(arg: NestedExpr) -> int | None:
    """gamma when ``arg`` is exactly ``n - gamma`` with gamma >= 1, else None."""
    if arg.has_calls or arg.poly.degree != 1 or arg.poly.coefficient(1) != 1:
        return None
    gamma = -arg.poly.coefficient(0)
    return gamma if gamma >= 1 else None


def is_basic(rec: Recurrence) -> bool:
    """Whether the pipeline's guarantees apply in full.

    Requires a zero polynomial part, positive call coefficients, and every
    argument of the form ``n - beta - Q(n - gamma)`` with ``beta >= 0`` and
    ``gamma >= 1``.
    """
    if not rec.rhs.poly.is_zero:
        return False
    for coeff, arg in rec.rhs.calls:
        if coeff <= 0:
            return False
        if arg.poly.degree != 1 or arg.poly.coefficient(1) != 1:
            return False
        if arg.poly.coefficient(0) > 0:  # beta = -constant must be >= 0
            return False
        if len(arg.calls) != 1:
            return False
        inner_coeff, inner_arg = arg.calls[0]
        if inner_coeff != -1:
            return False
        if _shift_of(inner_arg) is None:
            return False
    return True


def max_inner_shift(rec: Recurrence) -> int:
    """Largest gamma over all innermost calls ``Q(n - gamma)``."""
    shifts = [g for g in map(_shift_of, rec.innermost_arguments) if g is not None]
    if not shifts:
        raise ValueError(
            "recurrence has no innermost call of the form n - gamma; "
            "inner shift is undefined"
        )
    return max(shifts)


def format_recurrence(rec: Recurrence) -> str:
    return f"{rec.name}(n) = {rec.rhs.render(rec.name)}"


# ---------------------------------------------------------------------------
# Parsing


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|([()=+\-*^]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise RecurrenceSyntaxError(f"unexpected character {stripped[0]!r}", at)
        if m.group(1) is not None:
            tokens.append(("INT", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("IDENT", m.group(2), m.start(2)))
        else:
            tokens.append((m.group(3), m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.name: str | None = None

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise RecurrenceSyntaxError(
                f"expected {kind!r}, found {tok[1]!r}", tok[2]
            )
        return tok

    def parse_recurrence(self) -> Recurrence:
        name_tok = self.expect("IDENT")
        self.name = name_tok[1]
        self.expect("(")
        var = self.expect("IDENT")
        if var[1] != "n":
            raise RecurrenceSyntaxError("left-hand side must be applied to n", var[2])
        self.expect(")")
        self.expect("=")
        rhs = self.parse_expr()
        self.expect("EOF")
        if not rhs.has_calls:
            raise RecurrenceSyntaxError(
                "right-hand side contains no recursive call", len(self.text)
            )
        return Recurrence(name=self.name, rhs=rhs)

    def parse_expr(self) -> NestedExpr:
        poly = IntPolynomial.zero()
        calls: list[tuple[int, NestedExpr]] = []
        sign = 1
        if self.peek()[0] in ("+", "-"):
            sign = -1 if self.next()[0] == "-" else 1
        while True:
            term_poly, term_calls = self.parse_term(sign)
            poly = poly + term_poly
            calls.extend(term_calls)
            if self.peek()[0] in ("+", "-"):
                sign = -1 if self.next()[0] == "-" else 1
            else:
                break
        return NestedExpr.make(poly, calls)

    def parse_term(
        self, sign: int
    ) -> tuple[IntPolynomial, list[tuple[int, NestedExpr]]]:
        tok = self.peek()
        if tok[0] == "INT":
            self.next()
            value = sign * int(tok[1])
            if self.peek()[0] == "*":
                self.next()
                return self.parse_scaled(value)
            if self.peek()[0] == "IDENT" and self.peek()[1] == "n":
                return self.parse_power(value), []
            return IntPolynomial.constant(value), []
        if tok[0] == "IDENT":
            if tok[1] == "n":
                return self.parse_power(sign), []
            return IntPolynomial.zero(), [(sign, self.parse_call())]
        raise RecurrenceSyntaxError(f"unexpected token {tok[1]!r}", tok[2])

    def parse_scaled(
        self, value: int
    ) -> tuple[IntPolynomial, list[tuple[int, NestedExpr]]]:
        tok = self.peek()
        if tok[0] == "IDENT" and tok[1] == "n":
            return self.parse_power(value), []
        if tok[0] == "IDENT":
            return IntPolynomial.zero(), [(value, self.parse_call())]
        raise RecurrenceSyntaxError(
            f"expected a call or n after '*', found {tok[1]!r}", tok[2]
        )

    def parse_power(self, coeff: int) -> IntPolynomial:
        var = self.expect("IDENT")
        if var[1] != "n":
            raise RecurrenceSyntaxError("only the variable n is allowed", var[2])
        power = 1
        if self.peek()[0] == "^":
            self.next()
            exp = self.expect("INT")
            power = int(exp[1])
        coeffs = [0] * power + [coeff]
        return IntPolynomial.make(coeffs)

    def parse_call(self) -> NestedExpr:
        ident = self.expect("IDENT")
        if ident[1] != self.name:
            raise RecurrenceSyntaxError(
                f"call to {ident[1]!r} does not match recurrence name {self.name!r}",
                ident[2],
            )
        self.expect("(")
        arg = self.parse_expr()
        self.expect(")")
        return arg


def parse(text: str) -> Recurrence:
    """Parse DSL text into a :class:`Recurrence`; round-trips with format."""
    return _Parser(text).parse_recurrence()


# Frequently used recurrences, handy for tests and docs.
HOFSTADTER_Q = "Q(n) = Q(n - Q(n-1)) + Q(n - Q(n-2))"
CONOLLY = "C(n) = C(n - C(n-1)) + C(n - 1 - C(n-2))"
CONWAY = "A(n) = A(A(n-1)) + A(n - A(n-1))"
HOFSTADTER_V = "V(n) = V(n - V(n-1)) + V(n - V(n-4))"
THREE_TERM_R = "R(n) = R(n - R(n-1)) + R(n - R(n-2)) + R(n - R(n-3))"
