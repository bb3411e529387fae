"""Full search over behavior vectors and congruence cases.

For every one of the 3^m behavior vectors and every congruence case the
driver runs: unpack -> structural check -> constraint build -> solve ->
concretize -> initial-condition construction -> deterministic instantiation
-> numeric verification.  Every case lands in exactly one bucket: a
verified solution family, a rejected case (with the stage and reason), or an
anomaly (a solved case that failed a later stage -- never silently dropped,
since the construction is sound for basic recurrences and an anomaly
indicates a pipeline bug or a non-basic recurrence outside the guarantees).

A family is identified by its structural case: the behavior vector plus the
congruence assignment.  All satisfying witnesses of one case belong to the
same family (the search stores the first, deterministically smallest one).
Shift equivalence is a separate, optional grouping.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .constraints import ConstraintSystem, build_constraints
from .eventual import EventualSolution, ResidueForm
from .evaluator import verify_family
from .icbuilder import (
    ConcretizeError,
    ConstraintViolation,
    IcFailure,
    SymbolicIC,
    build_ic,
    concretize,
    default_instantiation,
    instantiate,
)
from .polynomials import IntPolynomial
from .recurrence import Recurrence, format_recurrence
from .solver import ProvablyUnsat, UnsatWithinBound, Witness, solve_system
from .symbols import Symbol, b_symbol
from .unpacker import (
    Behavior,
    BehaviorVector,
    CongruenceAssignment,
    UnpackedExpr,
    all_behavior_vectors,
    check_structure,
    extract_prs,
    iter_cases,
    witness_reach,
)


@dataclass(frozen=True)
class SearchOptions:
    bound: int = 64
    verify_terms: int = 200
    witnesses: int = 1
    jobs: int = 1
    strict: bool = False
    max_ic_length: int | None = None
    trace_unpack: bool = False


@dataclass(frozen=True)
class SolutionFamily:
    m: int
    behavior: BehaviorVector
    congruences: CongruenceAssignment
    unpacked: tuple[UnpackedExpr, ...]
    system: ConstraintSystem
    witness: dict[Symbol, int]
    witnesses: tuple[dict[Symbol, int], ...]
    leaf_guards: tuple
    eventual: EventualSolution
    symbolic_ic: SymbolicIC
    sample_values: dict[Symbol, int]
    sample_ic: tuple[int, ...]
    verified_terms: int
    eventual_start: int = 0  # first index the eventual description covers
    positivity_notes: tuple[str, ...] = ()

    def descriptor(self) -> tuple:
        classes = self.congruences.as_dict()
        return tuple(
            (
                self.behavior[r].value,
                classes.get(b_symbol(r)),
            )
            for r in range(self.m)
        )


@dataclass(frozen=True)
class RejectedCase:
    behavior: BehaviorVector
    congruences: CongruenceAssignment | None
    stage: str  # "unpack" | "structure" | "solve"
    reason: str


@dataclass(frozen=True)
class Anomaly:
    behavior: BehaviorVector
    congruences: CongruenceAssignment
    stage: str  # "concretize" | "ic" | "instantiate" | "verify"
    reason: str


@dataclass(frozen=True)
class SearchResult:
    recurrence: Recurrence
    m: int
    families: tuple[SolutionFamily, ...]
    rejected: tuple[RejectedCase, ...]
    anomalies: tuple[Anomaly, ...]
    options: SearchOptions

    @property
    def case_count(self) -> int:
        return len(self.families) + len(self.rejected) + len(self.anomalies)


def _process_behavior(args) -> list:
    rec, m, behavior, opts = args
    records: list = []
    for cong, unpacked, reject_reason in iter_cases(rec, m, behavior):
        if unpacked is None:
            records.append(RejectedCase(behavior, cong, "unpack", reject_reason))
            continue
        report = check_structure(unpacked, behavior)
        if not report.ok:
            records.append(RejectedCase(behavior, cong, "structure", report.reason))
            continue
        _, positivity = extract_prs(unpacked, behavior)
        system = build_constraints(
            unpacked, behavior, cong, report, rec.default_value
        )
        solved = solve_system(system, bound=opts.bound, witnesses=opts.witnesses)
        if isinstance(solved, ProvablyUnsat):
            records.append(
                RejectedCase(behavior, cong, "solve", "unsatisfiable (provably)")
            )
            continue
        if isinstance(solved, UnsatWithinBound):
            records.append(
                RejectedCase(
                    behavior,
                    cong,
                    "solve",
                    f"unsatisfiable within bound {solved.bound}",
                )
            )
            continue
        witness_list = solved if isinstance(solved, list) else [solved]
        first: Witness = witness_list[0]
        try:
            eventual = concretize(
                unpacked, first.assignment, m, rec.default_value, behavior
            )
        except ConcretizeError as exc:
            records.append(Anomaly(behavior, cong, "concretize", str(exc)))
            continue
        sic = build_ic(
            rec,
            m,
            behavior,
            eventual,
            system,
            first.assignment,
            first.guards,
            opts.max_ic_length,
            unpacked=unpacked,
        )
        if isinstance(sic, IcFailure):
            records.append(
                Anomaly(
                    behavior,
                    cong,
                    "ic",
                    f"family found but no generic initial condition within "
                    f"length cap {sic.max_length}: {sic.reason}",
                )
            )
            continue
        try:
            values = default_instantiation(sic, bound=opts.bound)
            sample = instantiate(sic, values)
        except (ConstraintViolation, ValueError) as exc:
            records.append(Anomaly(behavior, cong, "instantiate", str(exc)))
            continue
        # The eventual description holds once every value its derivation
        # substituted lies beyond the initial condition.
        start = len(sample) + witness_reach(unpacked, first.assignment) + 1
        ok, mismatch = verify_family(
            rec, sample, eventual, opts.verify_terms, start=start
        )
        if not ok:
            records.append(
                Anomaly(
                    behavior,
                    cong,
                    "verify",
                    f"eventual solution mismatch at term {mismatch}",
                )
            )
            continue
        records.append(
            SolutionFamily(
                m=m,
                behavior=behavior,
                congruences=cong,
                unpacked=unpacked,
                system=system,
                witness=first.assignment,
                witnesses=tuple(w.assignment for w in witness_list),
                leaf_guards=first.guards,
                eventual=eventual,
                symbolic_ic=sic,
                sample_values=values,
                sample_ic=tuple(sample),
                verified_terms=opts.verify_terms,
                eventual_start=start,
                positivity_notes=tuple(positivity),
            )
        )
    return records


def search(rec: Recurrence, m: int, opts: SearchOptions | None = None) -> SearchResult:
    """Search period-m positive-recurrent solutions of the recurrence."""
    if m < 1:
        raise ValueError("period must be at least 1")
    opts = opts or SearchOptions()
    behaviors = all_behavior_vectors(m)
    tasks = [(rec, m, b, opts) for b in behaviors]
    if opts.jobs > 1:
        with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            per_behavior = list(pool.map(_process_behavior, tasks, chunksize=1))
    else:
        per_behavior = [_process_behavior(t) for t in tasks]
    families: list[SolutionFamily] = []
    rejected: list[RejectedCase] = []
    anomalies: list[Anomaly] = []
    for records in per_behavior:
        for r in records:
            if isinstance(r, SolutionFamily):
                families.append(r)
            elif isinstance(r, RejectedCase):
                rejected.append(r)
            else:
                anomalies.append(r)
    return SearchResult(
        recurrence=rec,
        m=m,
        families=tuple(families),
        rejected=tuple(rejected),
        anomalies=tuple(anomalies),
        options=opts,
    )


# ---------------------------------------------------------------------------
# Shift equivalence


def family_key(family: SolutionFamily) -> tuple:
    """Lexicographically least rotation of the per-residue descriptors."""
    desc = family.descriptor()
    m = family.m
    return min(
        tuple(desc[(r + s) % m] for r in range(m)) for s in range(m)
    )


def canonicalize_mod_shift(
    families: Sequence[SolutionFamily],
) -> list[list[SolutionFamily]]:
    """Group families into shift-equivalence classes.

    Each class is returned with its representative first: the member whose
    own descriptor tuple is smallest.
    """
    groups: dict[tuple, list[SolutionFamily]] = {}
    for f in families:
        groups.setdefault(family_key(f), []).append(f)
    classes = []
    for key in sorted(groups):
        members = sorted(groups[key], key=lambda f: f.descriptor())
        classes.append(members)
    return classes


def shift_eventual(
    eventual: EventualSolution, s: int, original_terms: Sequence[int]
) -> EventualSolution:
    """The eventual solution of the shifted sequence Q'(n) = Q(n + s).

    Absolute term references that would fall at or below zero after the
    shift are folded to their concrete values from ``original_terms``.
    """
    m = eventual.m
    forms = []
    for r in range(m):
        r2 = (r + s) % m
        w = (r + s) // m
        form = eventual.forms[r2]
        if form.kind == "const":
            forms.append(form)
            continue
        if form.kind == "linear":
            forms.append(ResidueForm.linear(form.slope, form.intercept + form.slope * w))
            continue
        poly = form.poly.compose_affine(1, w, var="k")
        refs = []
        for coeff, rho, lag in form.refs:
            rho2 = (rho - s) % m
            delta = (rho - s - rho2) // m
            refs.append((coeff, rho2, lag - w - delta))
        extra = 0
        term_refs = []
        for coeff, abs_index in form.term_refs:
            moved = abs_index - s
            if moved >= 1:
                term_refs.append((coeff, moved))
            else:
                extra += coeff * original_terms[abs_index - 1]
        if extra:
            poly = poly + IntPolynomial.constant(extra, var="k")
        forms.append(ResidueForm.recurrent(refs, poly, term_refs))
    return EventualSolution(m=m, forms=tuple(forms), default_value=eventual.default_value)


# ---------------------------------------------------------------------------
# Reporting


def _case_json(behavior: BehaviorVector, cong: CongruenceAssignment | None) -> dict:
    return {
        "behavior": [b.value for b in behavior],
        "congruences": (
            {str(s): c for s, c in cong.entries} if cong is not None else None
        ),
    }


def _family_json(f: SolutionFamily) -> dict:
    return {
        **_case_json(f.behavior, f.congruences),
        "constraints": f.system.to_json()["constraints"],
        "witness": {str(s): v for s, v in sorted(f.witness.items(), key=lambda kv: kv[0].sort_key())},
        "extra_witnesses": [
            {str(s): v for s, v in sorted(w.items(), key=lambda kv: kv[0].sort_key())}
            for w in f.witnesses[1:]
        ],
        "leaf_guards": [str(g) for g in f.leaf_guards],
        "eventual": f.eventual.to_json(),
        "symbolic_ic": f.symbolic_ic.to_json(),
        "sample_ic": list(f.sample_ic),
        "verified_terms": f.verified_terms,
        "eventual_start": f.eventual_start,
        "unpacked": [u.render(m=f.m) for u in f.unpacked],
        "positivity_notes": list(f.positivity_notes),
    }


def report_json(result: SearchResult, mod_shift: bool = False) -> dict:
    out = {
        "recurrence": format_recurrence(result.recurrence),
        "period": result.m,
        "families": [_family_json(f) for f in result.families],
        "rejected": [
            {"case": _case_json(r.behavior, r.congruences), "stage": r.stage, "reason": r.reason}
            for r in result.rejected
        ],
        "anomalies": [
            {"case": _case_json(a.behavior, a.congruences), "stage": a.stage, "reason": a.reason}
            for a in result.anomalies
        ],
    }
    if mod_shift:
        classes = canonicalize_mod_shift(result.families)
        out["shift_classes"] = [
            {
                "size": len(cls),
                "representative": _case_json(cls[0].behavior, cls[0].congruences),
                "members": [_case_json(f.behavior, f.congruences) for f in cls],
            }
            for cls in classes
        ]
    return out


def report_text(result: SearchResult, mod_shift: bool = False) -> str:
    lines = [
        f"recurrence: {format_recurrence(result.recurrence)}",
        f"period: {result.m}",
        f"families: {len(result.families)}   rejected cases: {len(result.rejected)}   anomalies: {len(result.anomalies)}",
    ]
    for i, f in enumerate(result.families):
        lines.append("")
        lines.append(f"family {i}:")
        lines.append("  behavior: " + ", ".join(b.value for b in f.behavior))
        lines.append(f"  congruences: {f.congruences}")
        witness = ", ".join(
            f"{s}={v}" for s, v in sorted(f.witness.items(), key=lambda kv: kv[0].sort_key())
        )
        lines.append(f"  witness: {witness or '(empty)'}")
        for r in range(f.m):
            lines.append("    " + f.eventual.forms[r].describe(f.m, r))
        ic = ", ".join(
            str(e.as_int()) if e.is_concrete else str(e) for e in f.symbolic_ic.entries
        )
        lines.append(f"  symbolic ic: [{ic}]")
        if f.symbolic_ic.constraints:
            lines.append(
                "  ic constraints: "
                + "; ".join(f"{e} >= 0" if rel == '>=' else f"{e} == 0" for e, rel in f.symbolic_ic.constraints)
            )
        lines.append(f"  sample ic: {list(f.sample_ic)}")
        lines.append(f"  verified terms: {f.verified_terms}")
    if mod_shift:
        classes = canonicalize_mod_shift(result.families)
        lines.append("")
        lines.append(f"shift classes: {len(classes)}")
        for cls in classes:
            rep = cls[0]
            lines.append(
                "  class of size "
                + str(len(cls))
                + ": behavior "
                + ", ".join(b.value for b in rep.behavior)
                + f"; congruences {rep.congruences}"
            )
    return "\n".join(lines) + "\n"


def render_report(result: SearchResult, fmt: str = "text", mod_shift: bool = False) -> str:
    if fmt == "json":
        return json.dumps(report_json(result, mod_shift), indent=2, sort_keys=True) + "\n"
    return report_text(result, mod_shift)
