"""Lie brackets, the Maurer-Cartan element, the cup product and PBW weights.

Brackets carry the overall scale ``NU``.  It is the single free
normalization of the twisted bracket and is pinned by requiring that the
bracket of the line graph with itself is the theta graph with one hair,
with coefficient +1.  Rescaling a Lie bracket by ``NU`` is an isomorphism of
Lie algebras (``x -> x / NU``), so the differential keeps the unscaled
hair action while the brackets reported here use the scaled one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, factorial

from .diffcomplex import ComplexContext, UsageError, delta_sum, differential_matrix
from .exactla import ConsistencyError, SparseMat, Solution, solve
from .gallery import two_loop_class
from .graphcore import Graph, GraphSum, SliceParams, enumerate_basis
from .operact import (
    ActionGraph,
    action_terms,
    gc_bracket,
    graph_word,
    standard_bracket,
    twist_substitute,
    word_parity,
)

NU = Fraction(1, 8)

GCOR = ComplexContext(0, 2, 1, "plain_directed_acyclic")


def _parity(g: Graph) -> int:
    return word_parity(graph_word(g, 0), g.m, g.n)


def lie_parity(g: Graph) -> int:
    """Parity of ``g`` as an element of the Lie algebra (word parity + m)."""
    return (_parity(g) + g.m) % 2


def _homogeneous_parity(x: GraphSum) -> int:
    ps = {_parity(g) for g, _ in x.items()}
    if len(ps) > 1:
        raise UsageError("inputs must be homogeneous")
    return ps.pop() if ps else 0


# ---------------------------------------------------------------------------
# brackets


def std_bracket(x: GraphSum, y: GraphSum, scale=NU) -> GraphSum:
    """Standard bracket: a hair of one graph attached to a vertex of the other."""
    return standard_bracket(x, y).scaled(scale)


def _colored(gamma: Graph, whites) -> ActionGraph:
    cols = ["b"] * gamma.v
    for w in whites:
        cols[w] = "w"
    return ActionGraph(gamma.v, tuple((s, t) for s, t, _ in gamma.edges), tuple(cols))


def _reorder_sign(parities, order) -> int:
    """Koszul sign of listing inputs in ``order`` instead of 0, 1, 2, ..."""
    sign = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j] and parities[order[i]] and parities[order[j]]:
                sign = -sign
    return sign


def _twisted_terms(mc: "MCElement", inputs: list[GraphSum]) -> GraphSum:
    """Unscaled sum over mc terms and ordered white-vertex choices."""
    k = len(inputs)
    m, n = inputs[0].m, inputs[0].n
    pars = [_homogeneous_parity(x) for x in inputs]
    out = GraphSum(m, n)
    for gamma, c in mc.graphs():
        if gamma.v < k:
            continue
        for verts in permutations(range(gamma.v), k):
            order = sorted(range(k), key=lambda i: verts[i])
            slotted = [inputs[i] for i in order]
            sgn = _reorder_sign(pars, order)
            res = twist_substitute(_colored(gamma, verts), slotted, exact=False)
            if res:
                out = out + res.scaled(c * sgn)
    return out


def shoikhet_bracket(x: GraphSum, y: GraphSum, mc: "MCElement | None" = None, scale=NU) -> GraphSum:
    """Standard bracket plus the corrections twisted by the MC element."""
    mc = mc if mc is not None else mc_element_2loop(1)
    raw = standard_bracket(x, y) + _twisted_terms(mc, [x, y])
    return raw.scaled(scale)


def shoikhet_correction(x: GraphSum, y: GraphSum, mc: "MCElement | None" = None, scale=NU) -> GraphSum:
    mc = mc if mc is not None else mc_element_2loop(1)
    return _twisted_terms(mc, [x, y]).scaled(scale)


def linfty_operation(mc: "MCElement", k: int, inputs: list[GraphSum], scale=NU) -> GraphSum:
    """k-ary operation from the MC element; scaled by ``scale ** (k - 1)``."""
    if k < 2:
        raise UsageError("arity must be at least 2")
    if len(inputs) != k:
        raise UsageError(f"{k} inputs expected, got {len(inputs)}")
    return _twisted_terms(mc, list(inputs)).scaled(Fraction(scale) ** (k - 1))


# ---------------------------------------------------------------------------
# Maurer-Cartan element in the oriented complex


def mc_shape_ok(g: Graph) -> bool:
    return all(g.in_degree(x) >= 2 or g.out_degree(x) >= 2 for x in range(g.v))


@dataclass
class MCElement:
    """Loop-graded MC element of the oriented complex; terms include the scale."""

    terms_by_loop: dict = field(default_factory=dict)
    scale: Fraction = Fraction(1)

    def graphs(self):
        for g in sorted(self.terms_by_loop):
            yield from self.terms_by_loop[g].items()

    def max_loops(self) -> int:
        return max(self.terms_by_loop, default=0)

    def closure_residual(self, loops: int) -> GraphSum:
        """``delta m(g) + 1/2 sum_{a+b=g} [m(a), m(b)]``."""
        out = GraphSum(0, 2)
        if loops in self.terms_by_loop:
            out = out + delta_sum(self.terms_by_loop[loops], GCOR)
        for a, xa in self.terms_by_loop.items():
            b = loops - a
            if b in self.terms_by_loop:
                out = out + gc_bracket(xa, self.terms_by_loop[b]).scaled(Fraction(1, 2))
        return out

    def check(self) -> dict:
        """Residual per stored loop order plus the shape condition."""
        report = {}
        for g in sorted(self.terms_by_loop):
            res = self.closure_residual(g)
            shape = all(mc_shape_ok(x) for x, _ in self.terms_by_loop[g].items())
            report[g] = {"residual": res, "shape_ok": shape}
        return report

    def to_json(self) -> dict:
        return {
            "scale": str(self.scale),
            "terms_by_loop": {str(g): x.to_json() for g, x in sorted(self.terms_by_loop.items())},
        }


def mc_element_2loop(lam=1) -> MCElement:
    lam = Fraction(lam)
    if lam == 0:
        return MCElement({}, lam)
    return MCElement({2: two_loop_class().scaled(lam)}, lam)


@lru_cache(maxsize=None)
def _gcor_slice(v: int, e: int):
    return enumerate_basis(SliceParams(v, e, directed=True, acyclic=True, mc_shape=True), 0, 2)


@lru_cache(maxsize=None)
def _gcor_matrix(v: int, e: int):
    return differential_matrix(_gcor_slice(v, e), _gcor_slice(v + 1, e + 1), "full", GCOR)


@dataclass
class ExtensionCertificate:
    loops: int
    slices: dict
    residual: GraphSum


def mc_extend(mc: MCElement, target_loops: int) -> tuple[MCElement, ExtensionCertificate | None]:
    """Add the loop order ``target_loops`` term by solving the MC equation."""
    if target_loops > 4:
        raise UsageError("only loop orders up to 4 are supported")
    if target_loops <= mc.max_loops():
        return mc, None
    terms = dict(mc.terms_by_loop)
    certs = {}
    for g in range(mc.max_loops() + 1, target_loops + 1):
        probe = MCElement(terms, mc.scale)
        rhs = probe.closure_residual(g).scaled(-1)
        if not rhs:
            continue
        by_slice: dict = {}
        for x, c in rhs.items():
            by_slice.setdefault((x.v, x.e), GraphSum(0, 2)).add_graph(x, c)
        found = GraphSum(0, 2)
        for (v, e), part in sorted(by_slice.items()):
            src, dst = _gcor_slice(v - 1, e - 1), _gcor_slice(v, e)
            idx = dst.index()
            b = [Fraction(0)] * len(dst.graphs)
            for key, c in part.terms.items():
                if key not in idx:
                    raise ConsistencyError(f"term {key} leaves the MC-shaped slice")
                b[idx[key]] = c
            sol = solve(_gcor_matrix(v - 1, e - 1), b)
            certs[(v, e)] = sol
            if not sol.feasible:
                raise ConsistencyError(f"the MC equation at {g} loops is not solvable in slice {(v, e)}")
            for j, z in enumerate(sol.z):
                if z:
                    found.add_graph(src.graphs[j], z)
        terms[g] = found
    out = MCElement(terms, mc.scale)
    return out, ExtensionCertificate(target_loops, certs, out.closure_residual(target_loops))


# ---------------------------------------------------------------------------
# homology classes modulo exact terms


def _slice_key(g: Graph) -> tuple:
    return (g.v, g.e, g.h)


def _policy_for(x: GraphSum) -> int:
    return 3 if all(all(g.valence(u) >= 3 for u in range(g.v)) for g, _ in x.items()) else 1


@lru_cache(maxsize=None)
def _hairy_slice(m: int, n: int, v: int, e: int, h: int, policy: int):
    return enumerate_basis(SliceParams(v, e, h, min_valence=policy), m, n)


@lru_cache(maxsize=None)
def _hairy_matrix(m: int, n: int, v: int, e: int, h: int, policy: int):
    ctx = ComplexContext(m, n, policy)
    return differential_matrix(_hairy_slice(m, n, v, e, h, policy), _hairy_slice(m, n, v + 1, e + 1, h, policy), "full", ctx)


@dataclass
class ClassCertificate:
    """Outcome of writing ``x`` as ``sum coeffs[i] * gens[i] + delta z``."""

    feasible: bool
    coeffs: list
    unique: bool
    slices: dict

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "coeffs": [str(c) for c in self.coeffs] if self.coeffs is not None else None,
            "unique": self.unique,
            "slices": {str(k): s.to_json() for k, s in self.slices.items()},
        }


def express_mod_exact(x: GraphSum, gens: list[GraphSum] | None = None, policy: int | None = None) -> ClassCertificate:
    """Solve ``x = sum a_i gens_i + delta z`` in the hairy complex.

    Each generator must lie in a single (v, e, h) slice; slices not met by
    any generator must be exact on their own.
    """
    gens = gens or []
    m, n = x.m, x.n
    everything = x
    for g in gens:
        everything = everything + g
    if policy is None:
        policy = _policy_for(everything)
    parts: dict = {}
    for g, c in x.items():
        parts.setdefault(_slice_key(g), GraphSum(m, n)).add_graph(g, c)
    gen_slice = []
    for gsum in gens:
        keys = {_slice_key(g) for g, _ in gsum.items()}
        if len(keys) != 1:
            raise UsageError("each generator must be a nonzero element of one slice")
        gen_slice.append(keys.pop())
        parts.setdefault(gen_slice[-1], GraphSum(m, n))
    coeffs = [Fraction(0)] * len(gens)
    unique = True
    certs = {}
    feasible = True
    for sk, part in sorted(parts.items()):
        v, e, h = sk
        dst = _hairy_slice(m, n, v, e, h, policy)
        idx = dst.index()
        if v >= 1:
            d = _hairy_matrix(m, n, v - 1, e - 1, h, policy)
        else:
            d = SparseMat(len(dst.graphs), 0, {})
        mine = [i for i, s in enumerate(gen_slice) if s == sk]
        data = dict(d.data)
        for col, gi in enumerate(mine):
            for key, c in gens[gi].terms.items():
                data[(idx[key], d.cols + col)] = c
        a = SparseMat(d.rows, d.cols + len(mine), data)
        b = [Fraction(0)] * d.rows
        for key, c in part.terms.items():
            b[idx[key]] = c
        sol = solve(a, b)
        certs[sk] = sol
        if not sol.feasible:
            feasible = False
            continue
        from .exactla import rank

        if mine and rank(a) < rank(d) + len(mine):
            unique = False
        for col, gi in enumerate(mine):
            coeffs[gi] = sol.z[d.cols + col]
    return ClassCertificate(feasible, coeffs if feasible else None, unique, certs)


def is_exact(x: GraphSum, policy: int | None = None) -> ClassCertificate:
    return express_mod_exact(x, [], policy)


# ---------------------------------------------------------------------------
# Bernoulli numbers and PBW weights


@lru_cache(maxsize=None)
def _bernoulli_minus(j: int) -> Fraction:
    if j == 0:
        return Fraction(1)
    return -sum(comb(j + 1, k) * _bernoulli_minus(k) for k in range(j)) / (j + 1)


def bernoulli(j: int, b1_sign: int = -1) -> Fraction:
    """Bernoulli numbers with ``B_1 = b1_sign / 2``."""
    if j < 0:
        raise UsageError("index must be non-negative")
    if b1_sign not in (1, -1):
        raise UsageError("b1_sign must be +1 or -1")
    if j == 1:
        return Fraction(b1_sign, 2)
    return _bernoulli_minus(j)


def _ad_power(k: int) -> list[Fraction]:
    """``ad_x^k (y)`` in the basis ``x^a y x^(k-a)``, indexed by ``a``."""
    return [Fraction(comb(k, a) * (-1) ** (k - a)) for a in range(k + 1)]


def _sym_times(j: int, z: list[Fraction]) -> list[Fraction]:
    """Symmetrization of ``x^j z / j!`` for ``z`` linear in ``y``."""
    k = len(z) - 1
    out = [Fraction(0)] * (j + k + 1)
    for i in range(j + 1):
        for a, c in enumerate(z):
            out[i + a] += c
    return [c / factorial(j + 1) for c in out]


@lru_cache(maxsize=None)
def chain_weights_oracle(order: int, light_first: bool = False) -> tuple[Fraction, ...]:
    """PBW weights of the chains ``ad_x^k y`` for ``k <= order``.

    Solves ``x^n y / n! = sum_k c_k Sym(x^(n-k) ad_x^k(y) / (n-k)!)`` in the
    universal enveloping algebra of the free Lie algebra on x, y, restricted
    to words with one y (a free nilpotent quotient is enough).  With
    ``light_first`` the product is ``y x^n / n!`` instead.
    """
    n = order
    rows = n + 1
    data = {}
    for k in range(n + 1):
        col = _sym_times(n - k, _ad_power(k))
        for a, c in enumerate(col):
            if c:
                data[(a, k)] = c
    rhs = [Fraction(0)] * rows
    rhs[0 if light_first else n] = Fraction(1, factorial(n))
    sol = solve(SparseMat(rows, n + 1, data), rhs)
    if not sol.feasible:
        raise ConsistencyError("symmetrization system is singular")
    return tuple(sol.z)


@dataclass(frozen=True)
class LieForest:
    """A forest of chain trees ``ad_a^k(b)``; ``chains`` lists the k values.

    ``heavy`` is the slot (1 or 2) differentiated k times in every tree; the
    other slot is differentiated once per tree.
    """

    chains: tuple = ()
    heavy: int = 1

    def __post_init__(self):
        if self.heavy not in (1, 2):
            raise UsageError("heavy slot must be 1 or 2")
        if any(int(k) < 1 for k in self.chains):
            raise UsageError("chain lengths must be positive")
        object.__setattr__(self, "chains", tuple(sorted(int(k) for k in self.chains)))


def chain_tree(k: int) -> LieForest:
    return LieForest((k,), 1)


@dataclass
class PBWWeightTable:
    """Memoized PBW weights keyed by forest shape."""

    weights: dict = field(default_factory=dict)

    def weight(self, t: LieForest) -> Fraction:
        if t in self.weights:
            return self.weights[t]
        if not t.chains:
            w = Fraction(1)
        else:
            cs = chain_weights_oracle(max(t.chains), t.heavy == 2)
            w = Fraction(1)
            counts: dict = {}
            for k in t.chains:
                w *= cs[k]
                counts[k] = counts.get(k, 0) + 1
            for mult in counts.values():
                w /= factorial(mult)
        self.weights[t] = w
        return w


DEFAULT_PBW = PBWWeightTable()


def pbw_weight(t: LieForest, table: PBWWeightTable | None = None) -> Fraction:
    if not isinstance(t, LieForest):
        raise UsageError("pbw_weight expects a LieForest of chain trees")
    return (table or DEFAULT_PBW).weight(t)


# the chain weights equal B_n / n! with this sign of B_1
PBW_B1_SIGN = 1


# ---------------------------------------------------------------------------
# cup product with one-hair graphs


def chain_action_graph(j: int) -> ActionGraph:
    """Slot 0 feeds every chain vertex, slot 1 feeds the last one."""
    edges = [(0, 2 + i) for i in range(j)] + [(1, 1 + j)]
    edges += [(3 + i, 2 + i) for i in range(j - 1)]
    return ActionGraph(2 + j, tuple(edges), ("w", "w") + ("b",) * j)


def _disjoint(x: Graph, x1: Graph) -> GraphSum:
    m, n = x.m, x.n
    out = GraphSum(m, n)
    if x.line:
        sign = -1 if (_parity(x) * _parity(x1)) % 2 else 1
        out.add_graph(Graph(x1.v, x1.edges, x1.hairs, m, n, lines=1), sign)
        return out
    for g, s in action_terms(ActionGraph(2, ()), [x, x1], exact=False):
        out.add_graph(g, s)
    return out


def cup_one_hair(x: GraphSum, x1: GraphSum, n_max: int = 4, table: PBWWeightTable | None = None) -> GraphSum:
    """Cup product of ``x`` with a sum ``x1`` of one-hair graphs.

    Disjoint union plus ``c_j`` times the chain of ``j`` new vertices fed by
    ``j`` hairs of ``x`` and ending at the hair of ``x1``, for ``j <= n_max``.
    """
    if x.context != x1.context:
        raise UsageError("context mismatch")
    for g, _ in x1.items():
        if g.h != 1 or g.line:
            raise UsageError("the second factor must have exactly one hair per term")
    out = GraphSum(x.m, x.n)
    for g1, c1 in x1.items():
        for g, c in x.items():
            out = out + _disjoint(g, g1).scaled(c * c1)
            for j in range(1, n_max + 1):
                if g.h < j:
                    break
                w = pbw_weight(chain_tree(j), table)
                if w == 0:
                    continue
                term = twist_substitute(chain_action_graph(j), [GraphSum.of(g), GraphSum.of(g1)], exact=False)
                out = out + term.scaled(w * c * c1)
    return out


__all__ = [
    "NU",
    "GCOR",
    "lie_parity",
    "std_bracket",
    "shoikhet_bracket",
    "shoikhet_correction",
    "linfty_operation",
    "MCElement",
    "mc_element_2loop",
    "mc_extend",
    "mc_shape_ok",
    "ExtensionCertificate",
    "ClassCertificate",
    "express_mod_exact",
    "is_exact",
    "bernoulli",
    "chain_weights_oracle",
    "LieForest",
    "chain_tree",
    "PBWWeightTable",
    "pbw_weight",
    "PBW_B1_SIGN",
    "chain_action_graph",
    "cup_one_hair",
    "Solution",
]
