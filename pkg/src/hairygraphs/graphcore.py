"""Graphs with orientation data, canonical forms, linear combinations, bases.

A graph is stored together with its orientation: the order of the vertex
list, the order of the edge list, the stored direction of each undirected
edge and the order of the hair list.  Reordering any of these multiplies the
element by a sign determined by the :class:`ParityProfile` of the ambient
complex.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Iterator

DEFAULT_VERTEX_CAP = 10


class StructuralError(ValueError):
    """Malformed graph data."""


class ContextMismatch(ValueError):
    """Two graph sums from different complexes were combined."""


class ResourceError(RuntimeError):
    """A configured size bound was exceeded."""


def vertex_cap() -> int:
    return int(os.environ.get("HGC_VERTEX_CAP", DEFAULT_VERTEX_CAP))


@dataclass(frozen=True)
class ParityProfile:
    """Signs for permuting the orientation data of a graph.

    ``True`` means the corresponding transposition acts by -1.
    """

    vertex_swap: bool
    edge_swap: bool
    hair_swap: bool
    direction_flip: bool

    @classmethod
    def for_context(cls, m: int, n: int) -> "ParityProfile":
        return _profile(m % 2, n % 2)

    def as_tuple(self) -> tuple[bool, bool, bool, bool]:
        return (self.vertex_swap, self.edge_swap, self.hair_swap, self.direction_flip)


@lru_cache(maxsize=None)
def _profile(mp: int, np_: int) -> ParityProfile:
    # hairs are odd exactly when m and n have the same parity; this keeps the
    # two-vertex hedgehog and the line graph nonzero for m = 1 and odd n
    return ParityProfile(
        vertex_swap=np_ == 1,
        edge_swap=np_ == 0,
        hair_swap=mp == np_,
        direction_flip=np_ == 1,
    )


Edge = tuple  # (source, target, directed)


@dataclass(frozen=True)
class Graph:
    """A hairy (multi)graph with its orientation datum.

    ``edges`` holds ``(s, t, directed)`` triples; for undirected edges the
    stored pair order is still part of the orientation.  ``hairs`` lists the
    anchor vertex of each hair.  The line graph ``L`` has ``line=True``, no
    vertices and two abstract hair ends.  ``lines`` counts extra free line
    components; they only occur in disjoint unions such as cup products.
    """

    v: int
    edges: tuple = ()
    hairs: tuple = ()
    m: int = 1
    n: int = 3
    line: bool = False
    lines: int = 0

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(s), int(t), bool(d)) for s, t, d in self.edges))
        object.__setattr__(self, "hairs", tuple(int(a) for a in self.hairs))
        if self.v < 0 or self.lines < 0:
            raise StructuralError("negative vertex or line count")
        if self.line:
            if self.v or self.edges or self.hairs or self.lines:
                raise StructuralError("the line graph has no vertices, edges or anchored hairs")
            return
        for s, t, _ in self.edges:
            if not (0 <= s < self.v and 0 <= t < self.v):
                raise StructuralError(f"edge ({s},{t}) out of range for v={self.v}")
        for a in self.hairs:
            if not 0 <= a < self.v:
                raise StructuralError(f"hair anchor {a} out of range for v={self.v}")

    @property
    def context(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def profile(self) -> ParityProfile:
        return ParityProfile.for_context(self.m, self.n)

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def h(self) -> int:
        return 2 if self.line else len(self.hairs) + 2 * self.lines

    @property
    def loops(self) -> int:
        """First Betti number (hairs do not contribute)."""
        if self.line:
            return 0
        return self.e - self.v + components(self.v, self.edges)

    def key(self) -> tuple:
        if self.line:
            return LINE_KEY
        if self.lines:
            return (self.v, self.edges, self.hairs, self.lines)
        return (self.v, self.edges, self.hairs)

    def valence(self, x: int) -> int:
        return sum((s == x) + (t == x) for s, t, _ in self.edges) + self.hairs.count(x)

    def out_degree(self, x: int) -> int:
        return sum(1 for s, _, d in self.edges if d and s == x)

    def in_degree(self, x: int) -> int:
        return sum(1 for _, t, d in self.edges if d and t == x)

    def relabel(self, perm: Iterable[int]) -> "Graph":
        perm = list(perm)
        return Graph(
            self.v,
            tuple((perm[s], perm[t], d) for s, t, d in self.edges),
            tuple(perm[a] for a in self.hairs),
            self.m,
            self.n,
            self.line,
            self.lines,
        )

    def with_context(self, m: int, n: int) -> "Graph":
        return Graph(self.v, self.edges, self.hairs, m, n, self.line, self.lines)

    def to_text(self) -> str:
        return format_graph(self)

    def __str__(self) -> str:
        return self.to_text()


LINE_KEY = ("LINE",)


def line_graph(m: int = 1, n: int = 3) -> Graph:
    return Graph(0, (), (), m, n, True)


def graph_from_key(key: tuple, m: int, n: int) -> Graph:
    if key == LINE_KEY:
        return line_graph(m, n)
    v, edges, hairs, *rest = key
    return Graph(v, edges, hairs, m, n, lines=rest[0] if rest else 0)


def components(v: int, edges: Iterable) -> int:
    parent = list(range(v))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = v
    for s, t, _ in edges:
        a, b = find(s), find(t)
        if a != b:
            parent[a] = b
            count -= 1
    return count


def is_acyclic(v: int, edges: Iterable) -> bool:
    succ = [[] for _ in range(v)]
    indeg = [0] * v
    for s, t, d in edges:
        if not d:
            return False
        succ[s].append(t)
        indeg[t] += 1
    stack = [x for x in range(v) if indeg[x] == 0]
    seen = 0
    while stack:
        x = stack.pop()
        seen += 1
        for y in succ[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                stack.append(y)
    return seen == v


# ---------------------------------------------------------------------------
# canonical forms


def _perm_parity(p) -> int:
    seen = [False] * len(p)
    parity = 0
    for i in range(len(p)):
        if not seen[i]:
            j = i
            length = 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            parity ^= (length - 1) & 1
    return parity


def _sort_parity(items: list) -> int:
    parity = 0
    k = len(items)
    for i in range(k):
        a = items[i]
        for j in range(i + 1, k):
            if items[j] < a:
                parity ^= 1
    return parity


def _refine(colors: list, adj: list) -> list:
    ncells = len(set(colors))
    while True:
        sigs = [
            (colors[x], tuple(sorted((kind, colors[y]) for kind, y in adj[x])))
            for x in range(len(colors))
        ]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == ncells:
            return new
        colors, ncells = new, len(ranks)


def _leaves(colors: list, adj: list) -> Iterator[list]:
    colors = _refine(colors, adj)
    v = len(colors)
    if len(set(colors)) == v:
        yield colors
        return
    counts: dict[int, int] = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    target = min(c for c, k in counts.items() if k > 1)
    for x in range(v):
        if colors[x] == target:
            ind = [(c, 0 if (y == x or c != target) else 1) for y, c in enumerate(colors)]
            ranks = {s: i for i, s in enumerate(sorted(set(ind)))}
            yield from _leaves([ranks[s] for s in ind], adj)


def _labeled_key(v, edges, hairs, lab, prof_t):
    vodd, eodd, hodd, fodd = prof_t
    flips = 0
    new_edges = []
    for s, t, d in edges:
        a, b = lab[s], lab[t]
        if not d and a > b:
            a, b = b, a
            flips += 1
        new_edges.append((a, b, d))
    new_hairs = [lab[a] for a in hairs]
    parity = 0
    if vodd:
        parity ^= _perm_parity(lab)
    if fodd:
        parity ^= flips & 1
    if eodd:
        parity ^= _sort_parity(new_edges)
    if hodd:
        parity ^= _sort_parity(new_hairs)
    new_edges.sort()
    new_hairs.sort()
    return (v, tuple(new_edges), tuple(new_hairs)), parity


def _obviously_zero(edges, hairs, prof_t) -> bool:
    _, eodd, hodd, fodd = prof_t
    if fodd and any(s == t and not d for s, t, d in edges):
        return True
    if eodd:
        norm = [(min(s, t), max(s, t), d) if not d else (s, t, d) for s, t, d in edges]
        if len(set(norm)) < len(norm):
            return True
    if hodd and len(set(hairs)) < len(hairs):
        return True
    return False


@lru_cache(maxsize=1 << 20)
def _canon(v: int, edges: tuple, hairs: tuple, prof_t: tuple) -> tuple:
    """Return (canonical key, sign, automorphism perms or None)."""
    adj = [[] for _ in range(v)]
    for s, t, d in edges:
        if d:
            adj[s].append((1, t))
            adj[t].append((2, s))
        else:
            adj[s].append((0, t))
            adj[t].append((0, s))
    nh = [0] * v
    for a in hairs:
        nh[a] += 1
    init = [(nh[x], sorted(k for k, _ in adj[x])) for x in range(v)]
    ranks = {}
    for s in sorted(map(repr, init)):
        ranks.setdefault(s, len(ranks))
    colors = [ranks[repr(s)] for s in init]
    best = None
    best_parity = 0
    zero = False
    for lab in _leaves(colors, adj):
        key, parity = _labeled_key(v, edges, hairs, lab, prof_t)
        if best is None or key < best:
            best, best_parity, zero = key, parity, False
        elif key == best and parity != best_parity:
            zero = True
    if zero or _obviously_zero(edges, hairs, prof_t):
        return best, 0
    return best, -1 if best_parity else 1


def canonicalize(g: Graph, p: ParityProfile | None = None) -> tuple[Graph, int]:
    """Return the least isomorphic relabeling of ``g`` and the sign relating them.

    ``g == sign * canonical`` in the complex.  The sign is 0 exactly when
    ``g`` has an automorphism reversing its orientation.
    """
    key, sign = canonical_key(g, p)
    return graph_from_key(key, g.m, g.n), sign


def canonical_key(g: Graph, p: ParityProfile | None = None) -> tuple[tuple, int]:
    p = p or g.profile
    if g.line:
        # swapping the two ends of L: each end is a half-edge plus an
        # external vertex, so the swap has parity m + n
        return LINE_KEY, 0 if (g.m + g.n) % 2 else 1
    if g.v > vertex_cap():
        raise ResourceError(f"{g.v} vertices exceeds the cap of {vertex_cap()}")
    key, sign = _canon(g.v, g.edges, g.hairs, p.as_tuple())
    if not g.lines:
        return key, sign
    # a free line has word parity n + 1; its end swap has parity m + n
    if (g.m + g.n) % 2 or (g.lines > 1 and (g.n + 1) % 2):
        sign = 0
    return key + (g.lines,), sign


def automorphisms(g: Graph) -> list[list[int]]:
    """All vertex permutations preserving the underlying (unoriented) graph."""
    adj = [[] for _ in range(g.v)]
    for s, t, d in g.edges:
        adj[s].append((1 if d else 0, t))
        adj[t].append((2 if d else 0, s))
    nh = [g.hairs.count(x) for x in range(g.v)]
    init = [(nh[x], sorted(k for k, _ in adj[x])) for x in range(g.v)]
    ranks = {}
    for s in sorted(map(repr, init)):
        ranks.setdefault(s, len(ranks))
    colors = [ranks[repr(s)] for s in init]
    prof = (False, False, False, False)
    leaves = []
    for lab in _leaves(colors, adj):
        key, _ = _labeled_key(g.v, g.edges, g.hairs, lab, prof)
        leaves.append((key, lab))
    best = min(k for k, _ in leaves)
    mins = [lab for k, lab in leaves if k == best]
    first = mins[0]
    inv_first = [0] * g.v
    for x, y in enumerate(first):
        inv_first[y] = x
    return [[inv_first[lab[x]] for x in range(g.v)] for lab in mins]


# ---------------------------------------------------------------------------
# linear combinations


@dataclass
class GraphSum:
    """Finite rational linear combination of canonical graphs."""

    m: int
    n: int
    terms: dict = field(default_factory=dict)

    @property
    def context(self) -> tuple[int, int]:
        return (self.m, self.n)

    @classmethod
    def zero(cls, m: int, n: int) -> "GraphSum":
        return cls(m, n, {})

    @classmethod
    def of(cls, g: Graph, coeff=1) -> "GraphSum":
        s = cls(g.m, g.n)
        s.add_graph(g, coeff)
        return s

    def add_graph(self, g: Graph, coeff=1) -> None:
        if (g.m, g.n) != (self.m, self.n):
            raise ContextMismatch(f"graph context {(g.m, g.n)} vs sum context {self.context}")
        key, sign = canonical_key(g)
        if sign:
            self.add_key(key, sign * coeff)

    def add_key(self, key: tuple, coeff) -> None:
        if not coeff:
            return
        c = self.terms.get(key, 0) + coeff
        if c:
            self.terms[key] = c
        else:
            del self.terms[key]

    def combine(self, other: "GraphSum", scalar=1) -> "GraphSum":
        return gsum_combine(self, other, scalar)

    def scaled(self, c) -> "GraphSum":
        c = Fraction(c)
        if not c:
            return GraphSum(self.m, self.n)
        return GraphSum(self.m, self.n, {k: v * c for k, v in self.terms.items()})

    def __add__(self, other: "GraphSum") -> "GraphSum":
        return gsum_combine(self, other, 1)

    def __sub__(self, other: "GraphSum") -> "GraphSum":
        return gsum_combine(self, other, -1)

    def __neg__(self) -> "GraphSum":
        return self.scaled(-1)

    def __rmul__(self, c) -> "GraphSum":
        return self.scaled(c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphSum):
            return NotImplemented
        return self.context == other.context and self.normalized() == other.normalized()

    def normalized(self) -> dict:
        return {k: Fraction(v) for k, v in self.terms.items() if v}

    def __bool__(self) -> bool:
        return any(self.terms.values())

    def __len__(self) -> int:
        return len(self.terms)

    def items(self) -> list[tuple[Graph, Fraction]]:
        return [(graph_from_key(k, self.m, self.n), Fraction(c)) for k, c in sorted(self.terms.items(), key=_sort_key)]

    def coefficient(self, g: Graph) -> Fraction:
        key, sign = canonical_key(g)
        if not sign:
            return Fraction(0)
        return Fraction(self.terms.get(key, 0)) * sign

    def to_json(self) -> dict:
        return {
            "context": {"m": self.m, "n": self.n},
            "terms": [{"graph": format_graph(g), "coeff": str(c)} for g, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GraphSum":
        m, n = data["context"]["m"], data["context"]["n"]
        out = cls(m, n)
        for t in data["terms"]:
            out.add_graph(parse_graph(t["graph"]).with_context(m, n), Fraction(t["coeff"]))
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return f"GraphSum(m={self.m}, n={self.n}, 0)"
        body = " + ".join(f"({c})*[{format_graph(g)}]" for g, c in self.items())
        return f"GraphSum(m={self.m}, n={self.n}, {body})"


def _sort_key(item):
    key = item[0]
    return (0,) if key == LINE_KEY else (1, key)


def gsum_combine(a: GraphSum, b: GraphSum, scalar=1) -> GraphSum:
    """Return ``a + scalar * b``."""
    if a.context != b.context:
        raise ContextMismatch(f"{a.context} vs {b.context}")
    out = GraphSum(a.m, a.n, dict(a.terms))
    scalar = Fraction(scalar)
    if scalar:
        for k, c in b.terms.items():
            out.add_key(k, c * scalar)
    return out


# ---------------------------------------------------------------------------
# text and JSON formats

_TEXT_RE = re.compile(
    r"^G\s+m=(-?\d+)\s+n=(-?\d+)\s+(?:(LINE)|v=(\d+)\s+h=\[([^\]]*)\]\s+e=\[([^\]]*)\])"
    r"(?:\s+lines=(\d+))?(?:\s+c=\[([^\]]*)\])?\s*$"
)


def format_graph(g: Graph) -> str:
    if g.line:
        return f"G m={g.m} n={g.n} LINE"
    hs = ",".join(map(str, g.hairs))
    es = ",".join(f"{s}{'>' if d else '-'}{t}" for s, t, d in g.edges)
    extra = f" lines={g.lines}" if g.lines else ""
    return f"G m={g.m} n={g.n} v={g.v} h=[{hs}] e=[{es}]{extra}"


def parse_graph(text: str) -> Graph:
    g, _ = parse_graph_with_colors(text)
    return g


def parse_graph_with_colors(text: str) -> tuple[Graph, list[str] | None]:
    text = text.strip()
    if text.startswith("{"):
        return graph_from_json(json.loads(text)), None
    mt = _TEXT_RE.match(text)
    if not mt:
        raise StructuralError(f"cannot parse graph: {text!r}")
    m, n = int(mt.group(1)), int(mt.group(2))
    colors = [c.strip() for c in mt.group(8).split(",") if c.strip()] if mt.group(8) is not None else None
    if mt.group(3):
        return line_graph(m, n), colors
    v = int(mt.group(4))
    hairs = [int(x) for x in mt.group(5).split(",") if x.strip()]
    edges = []
    for tok in mt.group(6).split(","):
        tok = tok.strip()
        if not tok:
            continue
        em = re.match(r"^(\d+)([>-])(\d+)$", tok)
        if not em:
            raise StructuralError(f"bad edge token {tok!r}")
        edges.append((int(em.group(1)), int(em.group(3)), em.group(2) == ">"))
    lines = int(mt.group(7)) if mt.group(7) else 0
    return Graph(v, tuple(edges), tuple(hairs), m, n, lines=lines), colors


def graph_to_json(g: Graph) -> dict:
    return {
        "m": g.m,
        "n": g.n,
        "v": g.v,
        "hairs": list(g.hairs),
        "edges": [{"s": s, "t": t, "dir": d} for s, t, d in g.edges],
        "line": g.line,
        "lines": g.lines,
    }


def graph_from_json(d: dict) -> Graph:
    try:
        if d.get("line"):
            return line_graph(d["m"], d["n"])
        edges = tuple((e["s"], e["t"], bool(e.get("dir", False))) for e in d.get("edges", []))
        return Graph(d["v"], edges, tuple(d.get("hairs", [])), d["m"], d["n"], lines=int(d.get("lines", 0)))
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"bad graph JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# basis enumeration


@dataclass(frozen=True)
class SliceParams:
    vertices: int
    edges: int
    hairs: int = 0
    connected: bool = True
    min_valence: int = 1
    acyclic: bool = False
    directed: bool = False
    oriented_quotient: bool = False
    mc_shape: bool = False
    tadpoles: bool = False

    def accepts(self, g: Graph) -> bool:
        if g.line:
            return self.vertices == 0 and self.edges == 0 and self.hairs == 2
        if (g.v, g.e, len(g.hairs)) != (self.vertices, self.edges, self.hairs):
            return False
        if not self.tadpoles and any(s == t for s, t, _ in g.edges):
            return False
        if self.connected and g.v and components(g.v, g.edges) != 1:
            return False
        if any(d != self.directed for _, _, d in g.edges):
            return False
        if self.acyclic and not is_acyclic(g.v, g.edges):
            return False
        for x in range(g.v):
            if g.valence(x) < self.min_valence:
                return False
            if self.mc_shape and g.in_degree(x) < 2 and g.out_degree(x) < 2:
                return False
            if self.oriented_quotient and g.out_degree(x) + g.hairs.count(x) == 0:
                return False
        return True


@dataclass
class Basis:
    params: SliceParams
    m: int
    n: int
    graphs: list

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def index(self) -> dict:
        return {g.key(): i for i, g in enumerate(self.graphs)}


def _underlying_graphs(v: int, e: int, directed: bool, acyclic: bool, simple: bool, tadpoles: bool) -> list:
    """Edge sets on v vertices up to isomorphism (no orientation signs)."""
    null = (False, False, False, False)
    if directed:
        slots = [(a, b, True) for a in range(v) for b in range(v) if a != b]
    else:
        slots = [(a, b, False) for a in range(v) for b in range(a, v) if a != b or tadpoles]
    level = {(v, (), ()): None}
    for _ in range(e):
        nxt = {}
        for key in level:
            edges = key[1]
            for s in slots:
                if simple and s in edges:
                    continue
                if directed and (s[1], s[0], True) in edges:
                    continue
                new = edges + (s,)
                if acyclic and not is_acyclic(v, new):
                    continue
                k, _ = _canon(v, tuple(sorted(new)), (), null)
                nxt.setdefault(k, None)
        level = nxt
    return [k[1] for k in level]


def _hair_orbits(v: int, h: int, auts: list, distinct: bool) -> list:
    if distinct:
        from itertools import combinations

        cands = combinations(range(v), h)
    else:
        cands = combinations_with_replacement(range(v), h)
    seen = set()
    reps = []
    for c in cands:
        if c in seen:
            continue
        orbit = {tuple(sorted(p[a] for a in c)) for p in auts}
        seen |= orbit
        reps.append(c)
    return reps


def enumerate_basis(params: SliceParams, m: int, n: int, p: ParityProfile | None = None) -> Basis:
    """All canonical nonzero graphs of the slice, sorted by canonical key."""
    p = p or ParityProfile.for_context(m, n)
    prof_t = p.as_tuple()
    v, e, h = params.vertices, params.edges, params.hairs
    if v > vertex_cap():
        raise ResourceError(f"{v} vertices exceeds the cap of {vertex_cap()}")
    if v == 0:
        graphs = []
        if e == 0 and h == 2:
            L = line_graph(m, n)
            if canonical_key(L)[1]:
                graphs.append(L)
        return Basis(params, m, n, graphs)
    simple = (not params.directed and prof_t[1]) or (params.directed and prof_t[1])
    found = {}
    for edges in _underlying_graphs(v, e, params.directed, params.acyclic, simple, params.tadpoles):
        base = Graph(v, edges, (), m, n)
        if params.connected and components(v, edges) != 1:
            continue
        auts = automorphisms(base)
        for hairs in _hair_orbits(v, h, auts, prof_t[2]):
            g = Graph(v, edges, hairs, m, n)
            if not params.accepts(g):
                continue
            key, sign = _canon(v, edges, hairs, prof_t)
            if sign:
                found[key] = None
    graphs = [graph_from_key(k, m, n) for k in sorted(found)]
    return Basis(params, m, n, graphs)
