"""Systems of interleaved nonhomogeneous linear recurrences and their growth.

A system has ``m`` component sequences; component ``i`` satisfies

    a_i(k) = P_i(k) + sum over references (alpha * a_j(k - lag))

with nonnegative integer weights and eventually nonnegative integer
polynomials ``P_i`` (violations of these conditions can be represented --
they are reported by :func:`validate` and the growth classification is then
no longer guaranteed).  Lags may be symbolic-positive: the classifier only
uses the existence and weight of references, never lag magnitudes.

Growth classification builds a weighted digraph on the components, marks the
vertices forced exponential (a circuit containing an arc of weight > 1, or
membership in two or more distinct simple circuits), condenses what is left
into a DAG of singleton/cycle classes, and propagates polynomial degrees
from the leaves, adding one for each cycle class.  Degrees use the
convention deg(0) = -1, so a weight-1 self-loop with zero inhomogeneity
correctly yields a constant (degree-0) sequence; the distinguished value
``-1`` itself marks an eventually-zero component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import inf
from typing import Sequence

import networkx as nx

from .polynomials import IntPolynomial

SYMBOLIC_LAG = None  # lag marker for references with unresolved positive lag


@dataclass(frozen=True)
class PRRef:
    src: int
    dst: int
    lag: int | None  # None = symbolic positive
    coeff: int


@dataclass(frozen=True)
class PRSystem:
    m: int
    inhomog: tuple[IntPolynomial, ...]
    refs: tuple[PRRef, ...]

    @staticmethod
    def make(
        inhomog: Sequence[IntPolynomial], refs: Sequence[PRRef]
    ) -> "PRSystem":
        return PRSystem(len(inhomog), tuple(inhomog), tuple(refs))

    @property
    def max_lag(self) -> int:
        lags = [r.lag for r in self.refs if r.lag is not None]
        return max(lags) if lags else 0

    @property
    def has_symbolic_lags(self) -> bool:
        return any(r.lag is None for r in self.refs)

    def validate(self) -> list[str]:
        """Violations of the positivity conditions (empty when valid)."""
        problems = []
        for r in self.refs:
            if r.coeff < 1:
                problems.append(
                    f"reference {r.src}->{r.dst} has nonpositive weight {r.coeff}"
                )
            if r.lag is not None and r.lag < 1:
                problems.append(f"reference {r.src}->{r.dst} has lag {r.lag} < 1")
        for i, p in enumerate(self.inhomog):
            if not p.eventually_nonnegative:
                problems.append(f"inhomogeneous part of component {i} ({p}) is eventually negative")
        return problems

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "inhomog": [list(p.coeffs) for p in self.inhomog],
            "coeffs": [
                [r.src, (r.lag if r.lag is not None else "symbolic"), r.dst, r.coeff]
                for r in self.refs
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "PRSystem":
        inhomog = [IntPolynomial.make(c, var="k") for c in data["inhomog"]]
        refs = []
        for src, lag, dst, coeff in data["coeffs"]:
            refs.append(
                PRRef(int(src), int(dst), None if lag == "symbolic" else int(lag), int(coeff))
            )
        sys = PRSystem.make(inhomog, refs)
        if int(data["m"]) != sys.m:
            raise ValueError("declared m does not match the inhomogeneous list")
        return sys


@dataclass(frozen=True)
class WeightedDigraph:
    """At most one arc per ordered pair; parallel references merge by weight."""

    vertices: tuple[int, ...]
    arcs: tuple[tuple[int, int, int], ...]  # (src, dst, weight)

    def weight(self, src: int, dst: int) -> int:
        for s, d, w in self.arcs:
            if (s, d) == (src, dst):
                return w
        return 0

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.vertices)
        for s, d, w in self.arcs:
            g.add_edge(s, d, weight=w)
        return g


def build_graph(system: PRSystem) -> WeightedDigraph:
    weights: dict[tuple[int, int], int] = {}
    for r in system.refs:
        weights[(r.src, r.dst)] = weights.get((r.src, r.dst), 0) + r.coeff
    arcs = tuple(
        (s, d, w) for (s, d), w in sorted(weights.items()) if w != 0
    )
    return WeightedDigraph(tuple(range(system.m)), arcs)


@dataclass(frozen=True)
class GrowthClass:
    members: tuple[int, ...]
    is_cycle: bool
    cycle_order: tuple[int, ...]
    degree: int | float  # -1, 0, 1, ... or inf
    tag: str  # "poly-from-inhomog" | "cycle-plus-one" | "inherited" | "exponential"


@dataclass(frozen=True)
class GrowthResult:
    degrees: tuple[int | float, ...]
    class_ids: tuple[int, ...]
    classes: tuple[GrowthClass, ...]

    def degree_of(self, component: int) -> int | float:
        return self.degrees[component]

    def class_of(self, component: int) -> GrowthClass:
        return self.classes[self.class_ids[component]]


def compute_growth(
    system: PRSystem,
    degree_floor: int | None = None,
    w_deletion: str = "all",
) -> GrowthResult:
    """Per-component growth: polynomial degree, or ``inf`` for exponential.

    ``degree_floor`` optionally clamps the initial degree of every
    inhomogeneous part from below; the solution pipeline passes 0 because
    its component sequences are known to stay positive, so even a literal
    zero inhomogeneity behaves like a (symbolic) constant.

    ``w_deletion`` selects how outgoing arcs of exponential-forced vertices
    are removed: "all" deletes every outgoing arc, "cycle-arcs" only the
    arcs lying on some circuit.  Both yield the same degrees; the choice is
    exposed for cross-checking.
    """
    g = build_graph(system).to_networkx()
    m = system.m
    init: dict[int, int | float] = {}
    for i in range(m):
        d = system.inhomog[i].degree
        if degree_floor is not None:
            d = max(d, degree_floor)
        init[i] = d

    cycles = [tuple(c) for c in nx.simple_cycles(g)]
    forced: set[int] = set()
    for v in range(m):
        through = [c for c in cycles if v in c]
        if len(through) >= 2:
            forced.add(v)
            continue
        for cyc in through:
            arcs = list(zip(cyc, cyc[1:] + cyc[:1]))
            if any(g[a][b]["weight"] > 1 for a, b in arcs):
                forced.add(v)
                break

    gp = g.copy()
    for v in forced:
        init[v] = inf
        if w_deletion == "all":
            gp.remove_edges_from(list(gp.out_edges(v)))
        elif w_deletion == "cycle-arcs":
            drop = [
                (v, u)
                for _, u in list(gp.out_edges(v))
                if u == v or nx.has_path(gp, u, v)
            ]
            gp.remove_edges_from(drop)
        else:
            raise ValueError(f"unknown deletion mode {w_deletion!r}")

    # Equivalence classes: strongly connected components of the pruned graph.
    # Each is a single vertex or a single cycle.
    sccs = sorted((sorted(c) for c in nx.strongly_connected_components(gp)), key=min)
    class_ids = [0] * m
    for ci, members in enumerate(sccs):
        for v in members:
            class_ids[v] = ci

    def is_cycle_class(members: list[int]) -> bool:
        if len(members) > 1:
            return True
        v = members[0]
        return gp.has_edge(v, v)

    def cycle_order(members: list[int]) -> tuple[int, ...]:
        order = [min(members)]
        mset = set(members)
        while len(order) < len(members):
            nxt = [u for u in gp.successors(order[-1]) if u in mset]
            order.append(nxt[0])
        return tuple(order)

    # Condensation arcs between classes.
    succ: dict[int, set[int]] = {ci: set() for ci in range(len(sccs))}
    for a, b in gp.edges():
        if class_ids[a] != class_ids[b]:
            succ[class_ids[a]].add(class_ids[b])

    final: dict[int, int | float] = {}

    def resolve(ci: int) -> int | float:
        if ci in final:
            return final[ci]
        base = max(init[v] for v in sccs[ci])
        for cj in succ[ci]:
            base = max(base, resolve(cj))
        if is_cycle_class(sccs[ci]) and base != inf:
            base = base + 1
        final[ci] = base
        return base

    classes = []
    for ci, members in enumerate(sccs):
        degree = resolve(ci)
        cyc = is_cycle_class(members)
        if degree == inf:
            tag = "exponential"
        elif cyc:
            tag = "cycle-plus-one"
        elif any(init[v] == degree for v in members):
            tag = "poly-from-inhomog"
        else:
            tag = "inherited"
        classes.append(
            GrowthClass(
                members=tuple(members),
                is_cycle=cyc,
                cycle_order=cycle_order(members) if cyc else (),
                degree=degree,
                tag=tag,
            )
        )
    degrees = tuple(classes[class_ids[v]].degree for v in range(m))
    return GrowthResult(degrees=degrees, class_ids=tuple(class_ids), classes=tuple(classes))


# ---------------------------------------------------------------------------
# Empirical oracle


@dataclass(frozen=True)
class OracleVerdict:
    kind: str  # "poly" | "exponential" | "inconclusive"
    degree: int | None = None


D_MAX = 6


def is_eventually_positive_ic(system: PRSystem, ic: Sequence[Sequence[int]], horizon: int) -> bool:
    """Both conditions: trailing positivity and nonnegative inhomogeneity."""
    if len(ic) != system.m:
        return False
    lengths = {len(c) for c in ic}
    if len(lengths) != 1:
        return False
    n = lengths.pop()
    d = system.max_lag
    if n < d + 1:
        return False
    for component in ic:
        if any(component[-(i + 1)] <= 0 for i in range(d + 1)):
            return False
    for p in system.inhomog:
        if not p.eventually_nonnegative:
            return False
        if any(p(k) < 0 for k in range(n, horizon + 1)):
            return False
    return True


def generate_components(
    system: PRSystem, ic: Sequence[Sequence[int]], horizon: int
) -> list[list[int]]:
    if system.has_symbolic_lags:
        raise ValueError("cannot evaluate a system with symbolic lags")
    values = [list(c) for c in ic]
    n = len(ic[0])
    by_src: dict[int, list[PRRef]] = {i: [] for i in range(system.m)}
    for r in system.refs:
        by_src[r.src].append(r)
    for k in range(n + 1, horizon + 1):
        for i in range(system.m):
            total = system.inhomog[i](k)
            for r in by_src[i]:
                total += r.coeff * values[r.dst][k - r.lag - 1]
            values[i].append(total)
    return values


def _classify_series(window: list[int], d_max: int = D_MAX) -> OracleVerdict:
    max_stride = 36
    for stride in range(1, max_stride + 1):
        check_len = stride + 8
        usable = (len(window) - check_len) // stride
        if usable < 1:
            break
        levels = min(usable, d_max + 2)
        cur = window
        for j in range(levels + 1):
            tail = cur[-check_len:]
            if len(cur) >= check_len and all(v == 0 for v in tail):
                degree = j - 1
                if degree <= d_max:
                    return OracleVerdict("poly", degree)
                return OracleVerdict("inconclusive")
            if j == levels:
                break
            cur = [cur[i + stride] - cur[i] for i in range(len(cur) - stride)]
    # Ratio-style tail test: a genuinely exponential component at least
    # doubles every dozen steps or so, far outpacing any degree-6 polynomial.
    span = min(120, len(window) - 1)
    if span > 20 and window[-1] > 0:
        earlier = max(window[-1 - span], 1)
        if window[-1] >= 512 * earlier:
            return OracleVerdict("exponential")
    return OracleVerdict("inconclusive")


def empirical_growth_oracle(
    system: PRSystem, ic: Sequence[Sequence[int]], horizon: int
) -> list[OracleVerdict]:
    """Growth verdicts from raw terms: repeated (strided) finite differencing
    for quasipolynomial degrees, a ratio-style tail test for exponentials.

    Entirely independent of the graph classifier; requires concrete lags and
    an eventually positive initial condition.
    """
    if not is_eventually_positive_ic(system, ic, horizon):
        raise ValueError("initial condition is not eventually positive for this system")
    values = generate_components(system, ic, horizon)
    n = len(ic[0])
    settle = n + system.m * max(system.max_lag, 1) + 4
    out = []
    for series in values:
        window = series[min(settle, max(len(series) - 40, 0)):]
        out.append(_classify_series(window))
    return out


def growth_labels_json(system: PRSystem, result: GrowthResult) -> dict:
    return {
        "m": system.m,
        "degrees": [
            ("exponential" if d == inf else int(d)) for d in result.degrees
        ],
        "classes": [
            {
                "members": list(c.members),
                "is_cycle": c.is_cycle,
                "degree": "exponential" if c.degree == inf else int(c.degree),
                "tag": c.tag,
            }
            for c in result.classes
        ],
    }


def load_system(text: str) -> PRSystem:
    return PRSystem.from_json(json.loads(text))
