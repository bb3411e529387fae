"""Concrete eventual solutions: per-residue closed forms or recurrences.

After a witness is substituted into an unpacked case, every residue of the
period is described by one of:

* a constant value,
* a linear form ``slope * k + intercept`` in the subsequence index ``k``,
* a self-referential linear recurrence: integer-weighted references to
  residue subsequences at earlier indices, a polynomial inhomogeneity in
  ``k``, and optionally references to fixed absolute sequence positions
  (``term_refs``) whose values are pinned by the initial condition rather
  than by the witness.

The description is valid *eventually*: for all terms beyond the initial
condition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .polynomials import IntPolynomial


@dataclass(frozen=True)
class ResidueForm:
    kind: str  # "const" | "linear" | "recurrent"
    value: int | None = None
    slope: int | None = None
    intercept: int | None = None
    refs: tuple[tuple[int, int, int], ...] = ()  # (coeff, residue, lag)
    poly: IntPolynomial = IntPolynomial.zero("k")
    term_refs: tuple[tuple[int, int], ...] = ()  # (coeff, absolute index)

    @staticmethod
    def const(value: int) -> "ResidueForm":
        return ResidueForm(kind="const", value=value)

    @staticmethod
    def linear(slope: int, intercept: int) -> "ResidueForm":
        return ResidueForm(kind="linear", slope=slope, intercept=intercept)

    @staticmethod
    def recurrent(refs, poly, term_refs=()) -> "ResidueForm":
        return ResidueForm(
            kind="recurrent", refs=tuple(refs), poly=poly, term_refs=tuple(term_refs)
        )

    def describe(self, m: int, residue: int) -> str:
        head = f"Q({m}k+{residue})" if residue else f"Q({m}k)"
        if self.kind == "const":
            return f"{head} = {self.value}"
        if self.kind == "linear":
            sign = "+" if self.intercept >= 0 else "-"
            return f"{head} = {self.slope}*k {sign} {abs(self.intercept)}"
        parts = [str(self.poly)] if not self.poly.is_zero else []
        for coeff, r, lag in self.refs:
            inner = f"{m}*(k-{lag})" + (f"+{r}" if r else "")
            mag = "" if coeff == 1 else f"{coeff}*"
            parts.append(f"{mag}Q({inner})")
        for coeff, index in self.term_refs:
            mag = "" if coeff == 1 else f"{coeff}*"
            parts.append(f"{mag}Q({index})")
        return f"{head} = " + " + ".join(parts) if parts else f"{head} = 0"

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "const":
            out["value"] = self.value
        elif self.kind == "linear":
            out["slope"] = self.slope
            out["intercept"] = self.intercept
        else:
            out["refs"] = [list(r) for r in self.refs]
            out["poly"] = list(self.poly.coeffs)
            out["term_refs"] = [list(t) for t in self.term_refs]
        return out


@dataclass(frozen=True)
class EventualSolution:
    m: int
    forms: tuple[ResidueForm, ...]
    default_value: int = 0

    def form_at(self, index: int) -> ResidueForm:
        return self.forms[index % self.m]

    def expected_value(self, index: int, terms: list[int]) -> int | None:
        """Value the description predicts for 1-based ``index``.

        For recurrent residues the referenced terms are read from ``terms``
        (1-based prefix of the sequence), with nonpositive indices taking the
        default value.  Returns None when a reference exceeds the known
        prefix, which cannot happen for references pointing strictly earlier.
        """
        k, r = divmod(index, self.m)
        form = self.forms[r]
        if form.kind == "const":
            return form.value
        if form.kind == "linear":
            return form.slope * k + form.intercept

        def term(j: int) -> int | None:
            if j <= 0:
                return self.default_value
            if j > len(terms):
                return None
            return terms[j - 1]

        total = form.poly(k)
        for coeff, rr, lag in form.refs:
            v = term(self.m * (k - lag) + rr)
            if v is None:
                return None
            total += coeff * v
        for coeff, abs_index in form.term_refs:
            v = term(abs_index)
            if v is None:
                return None
            total += coeff * v
        return total

    def concrete_value(self, index: int, ic_values: dict[int, int]) -> int | None:
        """Closed-form value at ``index`` for non-recurrent residues.

        ``ic_values`` supplies values at the absolute positions used by
        ``term_refs``; returns None for recurrent residues.
        """
        form = self.form_at(index)
        if form.kind == "recurrent":
            return None
        k = index // self.m
        if form.kind == "const":
            return form.value
        return form.slope * k + form.intercept

    def to_json(self) -> dict:
        return {
            "period": self.m,
            "default": self.default_value,
            "forms": [f.to_json() for f in self.forms],
        }
