"""The invariant suite behind ``hairygraphs verify``.

Each check returns ``{"name", "ok", "summary", "witness"}`` and depends only
on its arguments, so results do not depend on the number of workers.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial

from .diffcomplex import ComplexContext, delta_squared_audit, delta_sum, differential_matrix
from .exactla import rank_cross_check, read_sms, write_sms
from .gallery import NAMED, bracket_pool, two_loop_class
from .graphcore import Graph, GraphSum, SliceParams, canonical_key, enumerate_basis, format_graph

CONTEXTS = ((0, 2), (1, 2), (1, 3), (2, 3))
SMALL_RANGE = (4, 6, 3)
FULL_RANGE = (6, 9, 4)


def _result(name: str, ok: bool, summary: str, witness=None) -> dict:
    return {"name": name, "ok": bool(ok), "summary": summary, "witness": witness}


def check_delta_squared(full: bool = False, seed: int = 0) -> dict:
    v_max, e_max, h_max = FULL_RANGE if full else SMALL_RANGE
    graphs = 0
    for m, n in CONTEXTS:
        for policy in (1, 3):
            audit = delta_squared_audit(m, n, policy, v_max, e_max, h_max)
            graphs += audit.graphs
            if not audit.ok:
                return _result("delta_squared", False, f"nonzero in context {(m, n)}, policy {policy}", audit.failures[0])
    return _result("delta_squared", True, f"zero on {graphs} graphs with v<={v_max}, e<={e_max}, h<={h_max}")


def _random_graph(rng: random.Random, m: int, n: int) -> Graph:
    v = rng.randint(1, 6)
    edges = []
    for _ in range(rng.randint(0, 8)):
        if v < 2:
            break
        a, b = rng.sample(range(v), 2)
        edges.append((a, b, False))
    hairs = tuple(rng.randrange(v) for _ in range(rng.randint(0, 4)))
    return Graph(v, tuple(edges), hairs, m, n)


def check_canonical(full: bool = False, seed: int = 0) -> dict:
    rng = random.Random(seed)
    trials = 2000 if full else 400
    for _ in range(trials):
        m, n = rng.choice(CONTEXTS)
        g = _random_graph(rng, m, n)
        key, sign = canonical_key(g)
        perm = list(range(g.v))
        rng.shuffle(perm)
        h = g.relabel(perm)
        edges = list(h.edges)
        rng.shuffle(edges)
        h = Graph(h.v, tuple(edges), h.hairs, m, n)
        key2, sign2 = canonical_key(h)
        same = (sign == 0) == (sign2 == 0) and (sign == 0 or key == key2)
        if not same:
            return _result("canonical", False, "relabeling changed the canonical form", format_graph(g))
        if sign:
            canon, s = graph_key_graph(key, m, n)
            if s != 1 or canonical_key(canon)[0] != key:
                return _result("canonical", False, "canonical form is not idempotent", format_graph(g))
    return _result("canonical", True, f"{trials} random relabelings and reorderings")


def graph_key_graph(key, m: int, n: int) -> tuple[Graph, int]:
    from .graphcore import graph_from_key

    g = graph_from_key(key, m, n)
    return g, canonical_key(g)[1]


def _pool_sums(m: int = 1, n: int = 3, size: int = 20):
    pool = bracket_pool(m, n, size)
    return pool, [GraphSum.of(g) for g in pool]


def check_antisymmetry(full: bool = False, seed: int = 0) -> dict:
    from .structures import lie_parity, shoikhet_bracket, std_bracket

    pool, xs = _pool_sums()
    for a, b in combinations_with_replacement(range(len(pool)), 2):
        sign = -((-1) ** (lie_parity(pool[a]) * lie_parity(pool[b])))
        if std_bracket(xs[a], xs[b]) != std_bracket(xs[b], xs[a]).scaled(sign):
            return _result("antisymmetry", False, "std bracket", [format_graph(pool[a]), format_graph(pool[b])])
    small = [NAMED[k]() for k in ("line", "mu", "tripod", "H2", "theta_hair")]
    for a, b in combinations_with_replacement(range(len(small)), 2):
        x, y = GraphSum.of(small[a]), GraphSum.of(small[b])
        sign = -((-1) ** (lie_parity(small[a]) * lie_parity(small[b])))
        if shoikhet_bracket(x, y) != shoikhet_bracket(y, x).scaled(sign):
            return _result("antisymmetry", False, "twisted bracket", [format_graph(small[a]), format_graph(small[b])])
    return _result("antisymmetry", True, f"std on {len(pool)} graphs, twisted on {len(small)}")


def jacobi_failures(size: int = 20, m: int = 1, n: int = 3, limit: int = 1) -> tuple[int, list]:
    """Triples of the pool violating the graded Jacobi identity."""
    from .structures import lie_parity, std_bracket

    pool, xs = _pool_sums(m, n, size)
    par = [lie_parity(g) for g in pool]
    inner: dict = {}

    def br(a, b):
        if (a, b) not in inner:
            inner[(a, b)] = std_bracket(xs[a], xs[b], scale=1)
        return inner[(a, b)]

    bad = []
    count = 0
    for a, b, c in combinations_with_replacement(range(len(pool)), 3):
        count += 1
        jac = (
            std_bracket(xs[a], br(b, c), scale=1).scaled((-1) ** (par[a] * par[c]))
            + std_bracket(xs[b], br(c, a), scale=1).scaled((-1) ** (par[b] * par[a]))
            + std_bracket(xs[c], br(a, b), scale=1).scaled((-1) ** (par[c] * par[b]))
        )
        if jac:
            bad.append([format_graph(pool[i]) for i in (a, b, c)])
            if len(bad) >= limit:
                break
    return count, bad


def check_jacobi(full: bool = False, seed: int = 0) -> dict:
    size = 20 if full else 10
    count, bad = jacobi_failures(size)
    if bad:
        return _result("jacobi", False, "std bracket Jacobiator is nonzero", bad[0])
    return _result("jacobi", True, f"{count} triples from a pool of {size}")


def chain_map_failures(size: int = 20, m: int = 1, n: int = 3) -> tuple[int, list]:
    """Pairs violating ``delta [x, y] = [delta x, y] + (-1)^|x| [x, delta y]``."""
    from .structures import lie_parity, std_bracket

    pool, xs = _pool_sums(m, n, size)
    ctx = ComplexContext(m, n, 1)
    dx = [delta_sum(x, ctx) for x in xs]
    bad = []
    count = 0
    for a, b in product(range(len(pool)), repeat=2):
        count += 1
        lhs = delta_sum(std_bracket(xs[a], xs[b], scale=1), ctx)
        rhs = std_bracket(dx[a], xs[b], scale=1) + std_bracket(xs[a], dx[b], scale=1).scaled((-1) ** lie_parity(pool[a]))
        if lhs != rhs:
            bad.append([format_graph(pool[a]), format_graph(pool[b])])
    return count, bad


def check_chain_map(full: bool = False, seed: int = 0) -> dict:
    count, bad = chain_map_failures(20 if full else 12)
    if bad:
        return _result("chain_map", False, "the differential is not a derivation of the bracket", bad[0])
    return _result("chain_map", True, f"{count} ordered pairs")


def check_two_loop_class(full: bool = False, seed: int = 0) -> dict:
    from .exactla import homology_dim
    from .structures import GCOR, _gcor_matrix, _gcor_slice

    x = two_loop_class()
    if delta_sum(x, GCOR):
        return _result("two_loop_class", False, "the two-loop combination is not closed", x.to_json())
    d_in = _gcor_matrix(3, 4)
    target = _gcor_slice(4, 5)
    idx = target.index()
    from .exactla import solve

    b = [Fraction(0)] * len(target.graphs)
    for key, c in x.terms.items():
        b[idx[key]] = c
    if solve(d_in, b).feasible:
        return _result("two_loop_class", False, "the two-loop combination is exact")
    dim = homology_dim(d_in, _gcor_matrix(4, 5))
    return _result("two_loop_class", dim == 1, f"closed, not exact, homology dimension {dim}")


def check_mc(full: bool = False, seed: int = 0) -> dict:
    from .structures import mc_element_2loop, mc_extend, mc_shape_ok

    mc = mc_element_2loop(1)
    if full:
        mc, _ = mc_extend(mc, 4)
    for loops, x in sorted(mc.terms_by_loop.items()):
        if mc.closure_residual(loops):
            return _result("mc_closure", False, f"nonzero closure residual at {loops} loops")
        if not all(mc_shape_ok(g) for g, _ in x.items()):
            return _result("mc_closure", False, f"a {loops}-loop term violates the valence shape")
    return _result("mc_closure", True, f"closure residual zero up to {mc.max_loops()} loops")


def check_pbw(full: bool = False, seed: int = 0) -> dict:
    from .structures import PBW_B1_SIGN, bernoulli, chain_tree, chain_weights_oracle, pbw_weight

    top = 6 if full else 4
    oracle = chain_weights_oracle(top)
    for k in range(1, top + 1):
        expect = bernoulli(k, PBW_B1_SIGN) / factorial(k)
        got = pbw_weight(chain_tree(k))
        if got != expect or oracle[k] != expect:
            return _result("pbw_weights", False, f"weight of the {k}-chain", {"got": str(got), "expected": str(expect)})
    return _result("pbw_weights", True, f"chain weights equal B_k/k! for k <= {top}")


def _suite_matrices(full: bool):
    mats = []
    for m, n in CONTEXTS:
        ctx = ComplexContext(m, n, 1)
        for v, e, h in ((1, 1, 2), (2, 2, 1), (2, 3, 1), (3, 3, 2), (3, 4, 1)) + (((4, 5, 1), (4, 6, 0)) if full else ()):
            src = enumerate_basis(SliceParams(v, e, h), m, n)
            dst = enumerate_basis(SliceParams(v + 1, e + 1, h), m, n)
            mats.append(((m, n, v, e, h), differential_matrix(src, dst, "full", ctx)))
    from .structures import _gcor_matrix

    for v, e in ((3, 4), (4, 5), (5, 6)):
        mats.append((("gcor", v, e), _gcor_matrix(v, e)))
    return mats


def check_ranks(full: bool = False, seed: int = 0) -> dict:
    for label, mat in _suite_matrices(full):
        info = rank_cross_check(mat)
        if not info["agree"] or any(r > info["exact"] for r in info["modp"].values()):
            return _result("rank_cross_check", False, f"matrix {label}", {"exact": info["exact"], "modp": info["modp"]})
        if read_sms(write_sms(mat)) != mat:
            return _result("rank_cross_check", False, f"SMS round trip of {label}")
    return _result("rank_cross_check", True, "exact and modular ranks agree; SMS round trips")


CHECKS = {
    "antisymmetry": check_antisymmetry,
    "canonical": check_canonical,
    "chain_map": check_chain_map,
    "delta_squared": check_delta_squared,
    "jacobi": check_jacobi,
    "mc_closure": check_mc,
    "pbw_weights": check_pbw,
    "rank_cross_check": check_ranks,
    "two_loop_class": check_two_loop_class,
}


def _run_one(name: str, full: bool, seed: int) -> dict:
    return CHECKS[name](full=full, seed=seed)


def run_suite(jobs: int = 1, seed: int = 0, full: bool = False, only=None) -> list[dict]:
    names = sorted(only) if only else sorted(CHECKS)
    unknown = [x for x in names if x not in CHECKS]
    if unknown:
        from .diffcomplex import UsageError

        raise UsageError(f"unknown checks {unknown}; choose from {sorted(CHECKS)}")
    if jobs <= 1 or len(names) == 1:
        return [_run_one(x, full, seed) for x in names]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_one, x, full, seed) for x in names]
        return [f.result() for f in futures]
