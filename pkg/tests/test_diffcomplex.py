from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction

import oracle
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hairygraphs import gallery
from hairygraphs.diffcomplex import (
    ComplexContext,
    UsageError,
    apply_linear,
    deformed_delta_even_m,
    degree,
    delta,
    delta_hair,
    delta_split,
    delta_squared_audit,
    delta_sum,
    differential_matrix,
    hair_terms,
    split_terms,
)
from hairygraphs.graphcore import (
    Graph,
    GraphSum,
    ParityProfile,
    SliceParams,
    canonical_key,
    enumerate_basis,
    format_graph,
    graph_from_key,
)
from hairygraphs.operact import ActionGraph, action_terms, mu_graph
from hairygraphs.structures import GCOR

CONTEXTS = [(1, 3), (0, 2), (1, 2), (2, 3)]


def u(v, edges, hairs=(), m=1, n=3):
    return Graph(v, tuple((s, t, False) for s, t in edges), tuple(hairs), m, n)


def oracle_input(g):
    return g.v, tuple((s, t) for s, t, _ in g.edges), g.hairs


# ---------------------------------------------------------------------------
# degrees


def test_degrees_of_named_graphs():
    # theta in the plain complex with n = 1, each two-loop graph with n = 2
    assert degree(gallery.theta(0, 1), ComplexContext(0, 1, 1, "plain_undirected")) == 1
    for g in gallery.two_loop_graphs():
        assert degree(g, GCOR) == 1


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(CONTEXTS), st.integers(1, 5), st.data())
def test_splitting_raises_degree_by_one(ctx, v, data):
    m, n = ctx
    pairs = st.tuples(st.integers(0, v - 1), st.integers(0, v - 1)).filter(lambda p: p[0] != p[1])
    edges = data.draw(st.lists(pairs, max_size=6)) if v > 1 else []
    hairs = data.draw(st.lists(st.integers(0, v - 1), max_size=3))
    g = u(v, edges, hairs, m, n)
    for t, _ in delta_split(g).items():
        assert degree(t) - degree(g) == 1


# ---------------------------------------------------------------------------
# the splitting part


def test_split_of_mu_and_line_vanish():
    assert not delta_split(gallery.mu(), ComplexContext(1, 3, 3))
    assert not delta_split(gallery.line())


@pytest.mark.parametrize("m,n", CONTEXTS)
def test_mu_satisfies_the_maurer_cartan_equation(m, n):
    # with univalent vertices allowed, the splitting of mu is cancelled by half
    # of its self-bracket
    ctx = ComplexContext(m, n, 1)
    mu = gallery.mu(m, n)
    assert delta_split(mu, ctx)
    assert not delta_split(mu, ctx) + delta_hair(mu, ctx).scaled(Fraction(1, 2))


@pytest.mark.parametrize("m,n", CONTEXTS)
@pytest.mark.parametrize("policy", [1, 3])
def test_splitting_matches_brute_force(m, n, policy):
    ctx = ComplexContext(m, n, policy)
    for v, e, h in [(3, 3, 2), (3, 4, 1), (2, 3, 1), (2, 2, 2)]:
        for g in enumerate_basis(SliceParams(v, e, h, min_valence=policy), m, n):
            expect = oracle.reduce_terms(oracle.split_terms(*oracle_input(g), m, n, policy), m, n)
            assert oracle.from_package(delta_split(g, ctx)) == expect, format_graph(g)


# ---------------------------------------------------------------------------
# the hair part


def test_hair_part_of_line_vanishes():
    assert not delta_hair(gallery.line(), ComplexContext(1, 3, 3))
    assert not delta(gallery.line(), ComplexContext(1, 3, 3))


@pytest.mark.parametrize("m,n", CONTEXTS)
def test_hair_part_of_mu_vanishes_for_trivalent_policy(m, n):
    assert not delta_hair(gallery.mu(m, n), ComplexContext(m, n, 3))


def test_hair_part_of_tripod_matches_brute_force():
    # the tripod is nonzero when hairs are even
    for m, n in [(2, 3), (1, 2)]:
        g = gallery.tripod(m, n)
        assert canonical_key(g)[1]
        expect = oracle.reduce_terms(oracle.hair_terms(*oracle_input(g), m, n), m, n)
        assert expect
        assert oracle.from_package(delta_hair(g)) == expect


@pytest.mark.parametrize("m,n", CONTEXTS)
def test_hair_part_matches_brute_force_on_random_graphs(m, n):
    rng = random.Random(11)
    for _ in range(60):
        v = rng.randint(1, 4)
        edges = [tuple(rng.sample(range(v), 2)) for _ in range(rng.randint(0, 4))] if v > 1 else []
        hairs = [rng.randrange(v) for _ in range(rng.randint(0, 3))]
        g = u(v, edges, hairs, m, n)
        expect = oracle.reduce_terms(oracle.hair_terms(v, tuple(edges), tuple(hairs), m, n), m, n)
        assert oracle.from_package(delta_hair(g)) == expect


def test_hair_part_is_off_for_trivalent_policy():
    assert not list(hair_terms(gallery.k4_hair(), 3))


# ---------------------------------------------------------------------------
# the full differential


def test_hedgehog_is_closed():
    assert not delta(gallery.hedgehog2())


def test_line_is_closed():
    assert not delta(gallery.line())


def test_two_loop_class_is_closed():
    assert not delta_sum(gallery.two_loop_class(), GCOR)


def test_oriented_differential_of_an_edge():
    g = Graph(2, ((0, 1, True),), (), 0, 2)
    assert not delta(g, GCOR)
    assert not oracle.reduce_terms(oracle.directed_split_terms(2, ((0, 1),)), 0, 2, True)


@pytest.mark.parametrize("v,e", [(3, 2), (3, 3), (4, 4), (4, 5), (5, 6)])
def test_oriented_differential_matches_brute_force(v, e):
    for g in enumerate_basis(SliceParams(v, e, 0, directed=True, acyclic=True), 0, 2):
        edges = tuple((s, t) for s, t, _ in g.edges)
        expect = oracle.reduce_terms(oracle.directed_split_terms(v, edges), 0, 2, True)
        assert oracle.from_package(delta(g, GCOR)) == expect


@pytest.mark.parametrize("m,n", CONTEXTS)
def test_full_differential_matches_brute_force(m, n):
    for g in enumerate_basis(SliceParams(3, 3, 2), m, n):
        assert oracle.from_package(delta(g)) == oracle.delta(*oracle_input(g), m, n)


@pytest.mark.parametrize("m,n", CONTEXTS)
def test_brute_force_differential_squares_to_zero(m, n):
    # an independent check of the parity table: the oracle alone
    for v, e, h in [(2, 1, 2), (2, 2, 1), (3, 2, 2), (2, 3, 1)]:
        for key in oracle.basis_keys(v, e, h, m, n):
            first = oracle.delta(*key, m, n)
            total: dict = defaultdict(Fraction)
            for k, c in first.items():
                for k2, c2 in oracle.delta(*k, m, n).items():
                    total[k2] += c * c2
            assert not any(total.values()), key


def _square_with_profile(g, p):
    def once(x):
        acc = defaultdict(Fraction)
        for t, c in list(split_terms(x)) + list(hair_terms(x)):
            k, s = canonical_key(t, p)
            if s:
                acc[k] += c * s
        return {k: c for k, c in acc.items() if c}

    total = defaultdict(Fraction)
    for k, c in once(g).items():
        for k2, c2 in once(graph_from_key(k, g.m, g.n)).items():
            total[k2] += c * c2
    return {k: c for k, c in total.items() if c}


@pytest.mark.parametrize(
    "text",
    ["G m=1 n=3 v=2 h=[1,1] e=[0-1]", "G m=2 n=3 v=2 h=[0,1] e=[0-1,0-1]"],
)
def test_other_hair_parity_breaks_delta_squared(text):
    # hairs odd exactly for even m: the square no longer vanishes
    from hairygraphs.graphcore import parse_graph

    g = parse_graph(text)
    alt = ParityProfile(g.n % 2 == 1, g.n % 2 == 0, g.m % 2 == 0, g.n % 2 == 1)
    assert _square_with_profile(g, alt)
    assert not _square_with_profile(g, g.profile)


@pytest.mark.parametrize("m,n", CONTEXTS)
@pytest.mark.parametrize("policy", [1, 3])
def test_delta_squared_small_range(m, n, policy):
    audit = delta_squared_audit(m, n, policy, 4, 6, 3, engine="python")
    assert audit.ok, audit.failures[:1]


def test_native_and_python_audits_agree():
    pytest.importorskip("hairygraphs._kernel")
    a = delta_squared_audit(1, 3, 1, 4, 5, 3, engine="python")
    b = delta_squared_audit(1, 3, 1, 4, 5, 3, engine="native")
    assert a.ok and b.ok
    assert (a.graphs, a.slices) == (b.graphs, b.slices)


def test_native_differential_matches_python():
    kernel = pytest.importorskip("hairygraphs._kernel")
    rng = random.Random(5)
    for _ in range(300):
        m, n = rng.choice(CONTEXTS)
        policy = rng.choice([1, 3])
        v = rng.randint(1, 5)
        edges = [tuple(rng.sample(range(v), 2)) for _ in range(rng.randint(0, 6))] if v > 1 else []
        hairs = [rng.randrange(v) for _ in range(rng.randint(0, 3))]
        g = u(v, edges, hairs, m, n)
        if not canonical_key(g)[1]:
            # orbit compression assumes the input is nonzero
            continue
        got = defaultdict(Fraction)
        for (tv, te, th), c in kernel.delta_terms(g.v, list(g.edges), list(g.hairs), m, n, policy):
            k, s = canonical_key(Graph(tv, tuple(te), tuple(th), m, n))
            if s:
                got[k] += Fraction(c, 2) * s
        got = {k: c for k, c in got.items() if c}
        assert got == delta(g, ComplexContext(m, n, policy)).terms


# ---------------------------------------------------------------------------
# the deformation for even m


def test_deformation_needs_even_m():
    with pytest.raises(UsageError):
        deformed_delta_even_m(gallery.tripod(1, 2))


def test_deformation_with_fewer_than_two_hairs():
    assert not deformed_delta_even_m(gallery.mu(0, 3))
    assert not deformed_delta_even_m(gallery.theta_hair(2, 3))


def test_deformation_of_tripod():
    # six ordered hair pairs, i.e. three unordered pairs with weight 1/2!; the
    # only output shape is the two-vertex hedgehog, which vanishes for n odd
    gamma = ActionGraph(2, ((0, 1), (0, 1)), ("w", "b"))
    terms = list(action_terms(gamma, [gallery.tripod(2, 3), mu_graph(2, 3)], exact=False))
    assert len(terms) == 6
    assert {canonical_key(t)[0] for t, _ in terms} == {canonical_key(gallery.hedgehog2(2, 3))[0]}
    assert canonical_key(gallery.hedgehog2(2, 3))[1] == 0
    assert not deformed_delta_even_m(gallery.tripod(2, 3))


@pytest.mark.parametrize("m,n", [(0, 3), (2, 3), (0, 2)])
def test_deformed_differential_squares_to_zero_to_second_order(m, n):
    ctx = ComplexContext(m, n, 1)

    def d(x):
        out = delta(x, ctx)
        if x.h >= 2:
            out = out + deformed_delta_even_m(x, ctx, 3)
        return out

    for v, e, h in [(1, 0, 3), (1, 0, 4), (2, 1, 3), (2, 1, 4), (3, 2, 3)]:
        for g in enumerate_basis(SliceParams(v, e, h), m, n):
            square = apply_linear(d, d(g))
            low = GraphSum(m, n)
            for t, c in square.items():
                if t.h >= g.h - 2:
                    low.add_graph(t, c)
            assert not low, format_graph(g)


def test_deformation_degree_is_one_for_m_zero():
    ctx = ComplexContext(0, 3, 1)
    for g in enumerate_basis(SliceParams(2, 1, 4), 0, 3):
        for t, _ in deformed_delta_even_m(g, ctx).items():
            assert degree(t, ctx) == degree(g, ctx) + 1


# ---------------------------------------------------------------------------
# matrices


def test_matrix_from_mu():
    # a single entry: the differential of mu is minus the haired edge
    src = enumerate_basis(SliceParams(1, 0, 1), 1, 3)
    dst = enumerate_basis(SliceParams(2, 1, 1), 1, 3)
    mat = differential_matrix(src, dst)
    assert (mat.rows, mat.cols) == (1, 1)
    assert mat.entries == [(0, 0, Fraction(-1))]


def test_matrix_columns_are_differentials():
    ctx = ComplexContext(1, 3, 1)
    src = enumerate_basis(SliceParams(3, 3, 2), 1, 3)
    dst = enumerate_basis(SliceParams(4, 4, 2), 1, 3)
    mat = differential_matrix(src, dst, "full", ctx)
    for j, g in enumerate(src):
        col = {dst.graphs[i].key(): c for i, c in mat.column(j).items()}
        assert col == delta(g, ctx).terms


def test_unknown_matrix_kind():
    src = enumerate_basis(SliceParams(1, 0, 1), 1, 3)
    with pytest.raises(UsageError):
        differential_matrix(src, src, "bogus")
