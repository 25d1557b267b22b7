"""Degrees and differentials of the hairy and oriented graph complexes.

The hairy differential is ``delta = delta_split + [mu, -]``.  Vertex
splitting sums over unordered bipartitions of the half-edges at a vertex
(a new vertex may receive nothing, which gives a univalent vertex under the
``>= 1`` policy; those terms cancel against the pendant terms of
``[mu, -]``).  The oriented complex uses the bracket with the directed edge.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator

from .graphcore import Basis, ContextMismatch, Graph, GraphSum, canonical_key
from .operact import ActionGraph, action_terms, gc_bracket, half_edges_at, mu_graph, standard_bracket_terms

VARIANTS = ("hairy", "plain_undirected", "plain_directed_acyclic")


class UsageError(ValueError):
    """An operation was called outside its domain."""


class CompletenessError(RuntimeError):
    """A differential produced a term outside the declared target slice."""


@dataclass(frozen=True)
class ComplexContext:
    m: int = 1
    n: int = 3
    valence_policy: int = 1
    variant: str = "hairy"

    def __post_init__(self):
        if self.valence_policy not in (1, 3):
            raise UsageError("valence_policy must be 1 or 3")
        if self.variant not in VARIANTS:
            raise UsageError(f"variant must be one of {VARIANTS}")

    def check(self, g: Graph) -> None:
        if g.context != (self.m, self.n):
            raise ContextMismatch(f"graph lives in {g.context}, context is {(self.m, self.n)}")


def hair_constants(m: int, n: int) -> tuple[int, int]:
    """(C, D) in deg = n(v-1) + (1-n)e + C*h + D for hairy graphs."""
    return m + 1 - n, n


def degree(g: Graph, ctx: ComplexContext | None = None) -> int:
    m, n = g.m, g.n
    if g.line:
        return 2 * m + 1 - n
    base = n * (g.v - 1) + (1 - n) * g.e
    if ctx is not None and ctx.variant != "hairy":
        return base
    if ctx is None and any(d for *_, d in g.edges):
        return base
    c, d = hair_constants(m, n)
    return base + c * g.h + d


# ---------------------------------------------------------------------------
# vertex splitting


def split_terms(g: Graph, policy: int = 1) -> Iterator[tuple[Graph, Fraction]]:
    """Labeled terms of the splitting differential (no canonicalization).

    Vertex ``w`` becomes ``w`` and ``w + 1`` joined by a new undirected edge
    stored last.  The sign is the Koszul sign of the splitting acting as a
    derivation from the left.
    """
    if g.line:
        return
    n = g.n
    e = g.e
    base_sign = -1 if ((n + 1) * e) % 2 else 1
    for w in range(g.v):
        sign = base_sign * (-1 if (n * w) % 2 else 1)
        halves = half_edges_at(g, w)
        d = len(halves)
        if d == 0:
            if policy <= 1:
                yield _split_graph(g, w, halves, ()), Fraction(sign, 2)
            continue
        # first half-edge stays on the old vertex: one term per unordered split
        for rest in product((0, 1), repeat=d - 1):
            f = (0,) + rest
            k1 = sum(rest)
            if min(d - k1, k1) + 1 < policy:
                continue
            yield _split_graph(g, w, halves, f), Fraction(sign)


def _split_graph(g: Graph, w: int, halves, f) -> Graph:
    def shift(x):
        return x if x <= w else x + 1

    moved = {h for h, side in zip(halves, f) if side}
    edges = []
    for k, (s, t, dr) in enumerate(g.edges):
        s2 = w + 1 if ("hs", k) in moved else shift(s)
        t2 = w + 1 if ("ht", k) in moved else shift(t)
        edges.append((s2, t2, dr))
    edges.append((w, w + 1, False))
    hairs = tuple(w + 1 if ("ha", j) in moved else shift(a) for j, a in enumerate(g.hairs))
    return Graph(g.v + 1, tuple(edges), hairs, g.m, g.n)


def _collect(terms, m: int, n: int) -> GraphSum:
    out = GraphSum(m, n)
    for g, c in terms:
        key, s = canonical_key(g)
        if s:
            out.add_key(key, c * s)
    return out


def delta_split(g: Graph, ctx: ComplexContext | None = None) -> GraphSum:
    ctx = ctx or ComplexContext(g.m, g.n)
    ctx.check(g)
    if ctx.variant != "hairy":
        return delta(g, ctx)
    return _collect(split_terms(g, ctx.valence_policy), g.m, g.n)


def hair_terms(g: Graph, policy: int = 1) -> Iterator[tuple[Graph, int]]:
    """Labeled terms of ``[mu, g]`` whose new vertex meets the policy."""
    if policy > 2:
        return
    for t, s in standard_bracket_terms(mu_graph(g.m, g.n), g):
        yield t, s


def delta_hair(g: Graph, ctx: ComplexContext | None = None) -> GraphSum:
    ctx = ctx or ComplexContext(g.m, g.n)
    ctx.check(g)
    if ctx.variant != "hairy":
        raise UsageError("the hair differential only exists on hairy graphs")
    return _collect(hair_terms(g, ctx.valence_policy), g.m, g.n)


_OR_EDGE: dict = {}


def _edge_sum(m: int, n: int, directed: bool) -> GraphSum:
    key = (m, n, directed)
    if key not in _OR_EDGE:
        _OR_EDGE[key] = GraphSum.of(Graph(2, ((0, 1, directed),), (), m, n))
    return _OR_EDGE[key]


def delta(g: Graph, ctx: ComplexContext | None = None) -> GraphSum:
    """Full differential of a single graph."""
    ctx = ctx or ComplexContext(g.m, g.n)
    ctx.check(g)
    if g.lines:
        raise UsageError("the differential is not defined on disjoint unions with free lines")
    if ctx.variant == "hairy":
        terms = list(split_terms(g, ctx.valence_policy))
        terms += list(hair_terms(g, ctx.valence_policy))
        return _collect(terms, g.m, g.n)
    directed = ctx.variant == "plain_directed_acyclic"
    return gc_bracket(_edge_sum(g.m, g.n, directed), GraphSum.of(g))


def apply_linear(fn: Callable[[Graph], GraphSum], x: GraphSum) -> GraphSum:
    out = GraphSum(x.m, x.n)
    for g, c in x.items():
        for key, v in fn(g).terms.items():
            out.add_key(key, v * c)
    return out


def delta_sum(x: GraphSum, ctx: ComplexContext | None = None) -> GraphSum:
    ctx = ctx or ComplexContext(x.m, x.n)
    return apply_linear(lambda g: delta(g, ctx), x)


def deformed_delta_even_m(g: Graph, ctx: ComplexContext | None = None, k_max: int = 2) -> GraphSum:
    """The deformation sum_{k>=2} (1/k!) Gamma_k acting on ``g``.

    ``Gamma_k`` has the input slot joined by ``k`` edges to a slot filled with
    mu, so ``k`` hairs of ``g`` are attached to one new haired vertex.
    """
    ctx = ctx or ComplexContext(g.m, g.n)
    if g.m % 2:
        raise UsageError("the deformation exists only for even m")
    if k_max < 2:
        raise UsageError("k_max must be at least 2")
    ctx.check(g)
    out = GraphSum(g.m, g.n)
    # Koszul sign of an odd operator passing g; without it the sum commutes
    # with the differential instead of anticommuting
    sign0 = -1 if degree(g, ctx) % 2 else 1
    fact = 1
    for k in range(2, k_max + 1):
        fact = 1
        for i in range(2, k + 1):
            fact *= i
        if g.h < k:
            break
        gamma = ActionGraph(2, tuple((0, 1) for _ in range(k)), ("w", "b"))
        for t, s in action_terms(gamma, [g, mu_graph(g.m, g.n)], exact=False):
            key, cs = canonical_key(t)
            if cs:
                out.add_key(key, Fraction(sign0 * s * cs, fact))
    return out


# ---------------------------------------------------------------------------
# matrices


def differential_matrix(src: Basis, dst: Basis, which: str = "full", ctx: ComplexContext | None = None, k_max: int = 2):
    """Matrix of the chosen differential from ``src`` to ``dst`` (columns = sources)."""
    from .exactla import SparseMat

    m, n = src.m, src.n
    ctx = ctx or ComplexContext(m, n)
    fns = {
        "split": lambda g: delta_split(g, ctx),
        "hair": lambda g: delta_hair(g, ctx),
        "full": lambda g: delta(g, ctx),
        "deformed": lambda g: delta(g, ctx) + deformed_delta_even_m(g, ctx, k_max),
    }
    if which not in fns:
        raise UsageError(f"unknown differential {which!r}")
    fn = fns[which]
    index = dst.index()
    entries = {}
    for j, g in enumerate(src.graphs):
        for key, c in fn(g).terms.items():
            if c == 0:
                continue
            i = index.get(key)
            if i is None:
                raise CompletenessError(f"term {key} of the differential of source {j} is not in the target slice")
            entries[(i, j)] = entries.get((i, j), 0) + c
    return SparseMat(len(dst.graphs), len(src.graphs), {k: v for k, v in entries.items() if v != 0})


# ---------------------------------------------------------------------------
# delta squared audit


def _native():
    try:
        from . import _kernel
    except ImportError:
        return None
    return _kernel


@dataclass
class SquareAudit:
    m: int
    n: int
    valence_policy: int
    engine: str
    slices: int = 0
    graphs: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "valence_policy": self.valence_policy,
            "engine": self.engine,
            "slices": self.slices,
            "graphs": self.graphs,
            "failures": self.failures,
            "ok": self.ok,
        }


def delta_squared_python(g: Graph, ctx: ComplexContext, memo: dict | None = None) -> GraphSum:
    memo = {} if memo is None else memo
    first = delta(g, ctx)
    out = GraphSum(g.m, g.n)
    for h, c in first.items():
        key = h.key()
        if key not in memo:
            memo[key] = delta(h, ctx)
        for k2, c2 in memo[key].terms.items():
            out.add_key(k2, c * c2)
    return out


def delta_squared_audit(
    m: int,
    n: int,
    valence_policy: int = 1,
    v_max: int = 6,
    e_max: int = 9,
    h_max: int = 4,
    engine: str = "auto",
) -> SquareAudit:
    """Check delta squared on every basis graph of the slices in range."""
    from .graphcore import SliceParams, enumerate_basis, format_graph, graph_from_key

    if engine not in ("auto", "native", "python"):
        raise UsageError("engine must be auto, native or python")
    kernel = _native() if engine != "python" else None
    if engine == "native" and kernel is None:
        raise UsageError("the native kernel is not built")
    ctx = ComplexContext(m, n, valence_policy)
    audit = SquareAudit(m, n, valence_policy, "native" if kernel else "python")
    native = kernel.DeltaSquared(m, n, valence_policy) if kernel else None
    for v in range(0, v_max + 1):
        for e in range(0, e_max + 1):
            for h in range(0, h_max + 1):
                basis = enumerate_basis(SliceParams(v, e, h, min_valence=valence_policy), m, n)
                if not basis.graphs:
                    continue
                audit.slices += 1
                memo: dict = {}
                if native:
                    native.clear()
                for g in basis.graphs:
                    audit.graphs += 1
                    if native and g.v:
                        raw = native.check(g.v, list(g.edges), list(g.hairs))
                        res = GraphSum(m, n)
                        for (rv, re_, rh), c in raw:
                            res.add_graph(Graph(rv, tuple(re_), tuple(rh), m, n), Fraction(c, 4))
                    else:
                        res = delta_squared_python(g, ctx, memo)
                    if res.terms:
                        audit.failures.append(
                            {
                                "graph": format_graph(g),
                                "residual": {format_graph(graph_from_key(k, m, n)): str(c) for k, c in res.terms.items()},
                            }
                        )
    return audit
