"""Brute-force reference implementations for freezing expected values.

Graphs here are plain ``(v, edges, hairs)`` tuples with ``edges`` a tuple of
``(s, t)`` pairs.  Canonical forms minimize over every vertex permutation and
signs are read off directly from the orientation data:

* the vertex order counts when n is odd;
* the edge order counts when n is even;
* edge directions count when n is odd (undirected edges only);
* the hair order counts when m and n have the same parity.

Nothing here calls the package's canonicalizer, enumerator or differential.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from itertools import combinations_with_replacement, permutations, product


def parities(m: int, n: int) -> tuple[bool, bool, bool, bool]:
    """(vertex, edge, hair, flip) oddness."""
    return n % 2 == 1, n % 2 == 0, (m - n) % 2 == 0, n % 2 == 1


def inversions(seq) -> int:
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def canon(v: int, edges, hairs, m: int, n: int, directed: bool = False):
    """(key, sign) with graph = sign * canonical representative, or (None, 0)."""
    vodd, eodd, hodd, fodd = parities(m, n)
    best = None
    signs = set()
    for perm in permutations(range(v)):
        flips = 0
        es = []
        for s, t in edges:
            a, b = perm[s], perm[t]
            if not directed and a > b:
                a, b = b, a
                flips += 1
            es.append((a, b))
        hs = [perm[x] for x in hairs]
        sign = 1
        if vodd and inversions(perm) % 2:
            sign = -sign
        if fodd and not directed and flips % 2:
            sign = -sign
        if eodd and inversions(es) % 2:
            sign = -sign
        if hodd and inversions(hs) % 2:
            sign = -sign
        key = (v, tuple(sorted(es)), tuple(sorted(hs)))
        if best is None or key < best:
            best, signs = key, {sign}
        elif key == best:
            signs.add(sign)
    if best is None:
        best, signs = (0, (), ()), {1}
    _, es, hs = best
    if eodd and len(set(es)) < len(es):
        return None, 0
    if hodd and len(set(hs)) < len(hs):
        return None, 0
    if fodd and not directed and any(a == b for a, b in es):
        return None, 0
    if len(signs) > 1:
        return None, 0
    return best, signs.pop()


def connected(v: int, edges) -> bool:
    if v == 0:
        return True
    seen = {0}
    todo = [0]
    while todo:
        x = todo.pop()
        for s, t in edges:
            for a, b in ((s, t), (t, s)):
                if a == x and b not in seen:
                    seen.add(b)
                    todo.append(b)
    return len(seen) == v


def acyclic(v: int, edges) -> bool:
    indeg = [0] * v
    for _, t in edges:
        indeg[t] += 1
    ready = [x for x in range(v) if indeg[x] == 0]
    done = 0
    while ready:
        x = ready.pop()
        done += 1
        for s, t in edges:
            if s == x:
                indeg[t] -= 1
                if indeg[t] == 0:
                    ready.append(t)
    return done == v


def basis_keys(
    v: int,
    e: int,
    h: int,
    m: int,
    n: int,
    min_valence: int = 1,
    directed: bool = False,
    mc_shape: bool = False,
) -> set:
    """Canonical keys of nonzero connected graphs, from all labeled graphs."""
    if directed:
        slots = [(a, b) for a in range(v) for b in range(v) if a != b]
    else:
        slots = [(a, b) for a in range(v) for b in range(a + 1, v)]
    out = set()
    for edges in combinations_with_replacement(slots, e):
        if not connected(v, edges):
            continue
        if directed and not acyclic(v, edges):
            continue
        if mc_shape:
            ins = [sum(1 for _, t in edges if t == x) for x in range(v)]
            outs = [sum(1 for s, _ in edges if s == x) for x in range(v)]
            if any(ins[x] < 2 and outs[x] < 2 for x in range(v)):
                continue
        for hairs in combinations_with_replacement(range(v), h):
            val = [sum((s == x) + (t == x) for s, t in edges) + hairs.count(x) for x in range(v)]
            if any(d < min_valence for d in val):
                continue
            key, sign = canon(v, edges, hairs, m, n, directed)
            if sign:
                out.add(key)
    return out


def reduce_terms(terms, m: int, n: int, directed: bool = False) -> dict:
    """Canonical ``{key: coefficient}`` of labeled ``(v, edges, hairs, coeff)`` terms."""
    acc: dict = defaultdict(Fraction)
    for v, edges, hairs, c in terms:
        key, sign = canon(v, edges, hairs, m, n, directed)
        if sign:
            acc[key] += c * sign
    return {k: c for k, c in acc.items() if c}


def split_terms(v: int, edges, hairs, m: int, n: int, policy: int = 1):
    """Every ordered bipartition of the half-edges at every vertex, weight 1/2.

    Vertex ``w`` becomes ``w`` and ``w + 1`` joined by a new edge stored last;
    the sign is ``(-1)^((n + 1) e + n w)``.
    """
    e = len(edges)
    for w in range(v):
        halves = [("s", k) for k, (s, _) in enumerate(edges) if s == w]
        halves += [("t", k) for k, (_, t) in enumerate(edges) if t == w]
        halves += [("h", j) for j, a in enumerate(hairs) if a == w]
        sign = (-1) ** ((n + 1) * e + n * w)
        for side in product((0, 1), repeat=len(halves)):
            moved = {hv for hv, sd in zip(halves, side) if sd}
            k1 = len(moved)
            if min(k1, len(halves) - k1) + 1 < policy:
                continue

            def place(x, tag):
                if tag in moved:
                    return w + 1
                return x if x <= w else x + 1

            new_edges = tuple((place(s, ("s", k)), place(t, ("t", k))) for k, (s, t) in enumerate(edges))
            new_edges += ((w, w + 1),)
            new_hairs = tuple(place(a, ("h", j)) for j, a in enumerate(hairs))
            yield v + 1, new_edges, new_hairs, Fraction(sign, 2)


def hair_terms(v: int, edges, hairs, m: int, n: int, policy: int = 1):
    """Terms of the hair part: a new univalent vertex at every vertex, and
    every hair pushed out along a new edge to a new vertex that carries it.

    The new vertex is vertex 0.  Pendant edges are stored first with sign -1;
    a pushed hair ``j`` moves to the front of the hair list, its new edge is
    stored last, and the sign is ``(-1)^(j [hairs odd] + (e + 1) [n even])``.
    """
    if policy > 2:
        return
    _, _, hodd, _ = parities(m, n)
    shifted = tuple((s + 1, t + 1) for s, t in edges)
    for x in range(v):
        yield v + 1, ((0, x + 1),) + shifted, tuple(a + 1 for a in hairs), Fraction(-1)
    for j in range(len(hairs)):
        rest = [a + 1 for a in hairs]
        a = rest.pop(j)
        sign = (-1) ** (j * hodd + (len(edges) + 1) * (n % 2 == 0))
        yield v + 1, shifted + ((a, 0),), (0,) + tuple(rest), Fraction(sign)


def directed_split_terms(v: int, edges):
    """Splittings in the oriented complex (n = 2), weight 1/2 per ordered choice.

    Each vertex splits into two vertices that both keep a half-edge, joined
    by a new edge in either direction, stored last, with sign ``(-1)^(e + 1)``.
    Splittings leaving a univalent vertex cancel in the bracket with the edge
    and are skipped.  Outputs with directed cycles are dropped.
    """
    sign = Fraction((-1) ** (len(edges) + 1), 2)
    for w in range(v):
        halves = [("s", k) for k, (s, _) in enumerate(edges) if s == w]
        halves += [("t", k) for k, (_, t) in enumerate(edges) if t == w]
        for side in product((0, 1), repeat=len(halves)):
            moved = {hv for hv, sd in zip(halves, side) if sd}
            if not moved or len(moved) == len(halves):
                continue

            def place(x, tag):
                if tag in moved:
                    return w + 1
                return x if x <= w else x + 1

            kept = tuple((place(s, ("s", k)), place(t, ("t", k))) for k, (s, t) in enumerate(edges))
            for new in ((w, w + 1), (w + 1, w)):
                if acyclic(v + 1, kept + (new,)):
                    yield v + 1, kept + (new,), (), sign


def delta(v: int, edges, hairs, m: int, n: int, policy: int = 1) -> dict:
    terms = list(split_terms(v, edges, hairs, m, n, policy)) + list(hair_terms(v, edges, hairs, m, n, policy))
    return reduce_terms(terms, m, n)


def from_package(x) -> dict:
    """A package GraphSum as an oracle ``{key: coefficient}``."""
    terms = []
    directed = False
    for g, c in x.items():
        directed = directed or any(d for *_, d in g.edges)
        terms.append((g.v, tuple((s, t) for s, t, _ in g.edges), g.hairs, c))
    return reduce_terms(terms, x.m, x.n, directed)


def chain_weights(order: int) -> list[Fraction]:
    """Weights c_k of right-nested k-fold brackets in log(e^x e^y), linear in y.

    Computed by expanding e^x e^y in the free algebra with y to first order
    and matching against the basis ad_x^k(y).
    """
    # ad_x^k(y) = sum_i (-1)^i C(k, i) x^(k-i) y x^i, and only ad_x^k(y) contains
    # the word y x^k, with coefficient (-1)^k
    from math import factorial

    # words linear in y are x^a y x^b, stored as a dict (a, b) -> coefficient
    def mul(p, q):
        out: dict = defaultdict(Fraction)
        for (a1, b1, y1), c1 in p.items():
            for (a2, b2, y2), c2 in q.items():
                if y1 + y2 > 1:
                    continue
                if y1:
                    out[(a1, b1 + a2 + b2, 1)] += c1 * c2
                elif y2:
                    out[(a1 + a2, b2, 1)] += c1 * c2
                else:
                    out[(a1 + a2, 0, 0)] += c1 * c2
        return dict(out)

    exp_x = {(k, 0, 0): Fraction(1, factorial(k)) for k in range(order + 2)}
    exp_y = {(0, 0, 0): Fraction(1), (0, 0, 1): Fraction(1)}
    z = mul(exp_x, exp_y)
    z[(0, 0, 0)] -= 1
    z = {k: c for k, c in z.items() if c and k[0] + k[1] <= order + 1}
    log: dict = defaultdict(Fraction)
    power = {(0, 0, 0): Fraction(1)}
    for j in range(1, order + 3):
        power = mul(power, z)
        power = {k: c for k, c in power.items() if k[0] + k[1] <= order + 1}
        for k, c in power.items():
            log[k] += Fraction((-1) ** (j + 1), j) * c
    return [log.get((0, k, 1), Fraction(0)) * (-1) ** k for k in range(order + 1)]


def insert_directed(host_v: int, host_edges, w: int, guest_v: int, guest_edges):
    """Insertion of a digraph into vertex ``w`` of another (n = 2, no hairs).

    The guest's vertices take the place of ``w``; each half-edge at ``w`` is
    reattached to any guest vertex; host edges come first, every sign is +1.
    """

    def hmap(x):
        return x if x < w else x + guest_v - 1

    halves = [(k, 0) for k, (s, _) in enumerate(host_edges) if s == w]
    halves += [(k, 1) for k, (_, t) in enumerate(host_edges) if t == w]
    for f in product(range(guest_v), repeat=len(halves)):
        target = dict(zip(halves, f))
        edges = []
        for k, (s, t) in enumerate(host_edges):
            s2 = w + target[(k, 0)] if (k, 0) in target else hmap(s)
            t2 = w + target[(k, 1)] if (k, 1) in target else hmap(t)
            edges.append((s2, t2))
        edges += [(w + s, w + t) for s, t in guest_edges]
        yield host_v + guest_v - 1, tuple(edges), (), Fraction(1)


def self_insertion(x: dict) -> dict:
    """``x o x`` summed over all slots, for an oracle digraph sum at n = 2.

    For ``x`` of odd degree this is half the self-bracket.
    """
    terms = []
    for (v1, e1, _), c1 in x.items():
        for (v2, e2, _), c2 in x.items():
            for w in range(v1):
                for v, edges, hairs, c in insert_directed(v1, e1, w, v2, e2):
                    if acyclic(v, edges):
                        terms.append((v, edges, hairs, c * c1 * c2))
    return reduce_terms(terms, 0, 2, True)
