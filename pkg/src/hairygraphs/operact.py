"""Operadic insertion, the graph-on-graph hair action and twisting by mu.

Signs are computed in a single Koszul model.  A graph is a word of
graded objects:

* every vertex has parity ``n``;
* every edge is an edge object of parity ``n + 1`` followed by its source
  and target half-edges, each of parity ``n``;
* every hair is its anchor half-edge (``n``), an edge object (``n + 1``),
  a far half-edge (``n``) and an external end (``m``);
* the line graph is ``end0, half0, edge, half1, end1``.

The stored orientation of a :class:`Graph` is this word read in storage
order, and the parity table of :mod:`graphcore` is what the model gives for
transpositions.  Operations are written as moves on words, so every sign is
the Koszul sign of an explicit rearrangement.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Sequence

from .graphcore import ContextMismatch, Graph, GraphSum, StructuralError, is_acyclic, line_graph

# object kinds -> parity as function of (m, n)
_PAR = {
    "v": lambda m, n: n & 1,
    "eo": lambda m, n: (n + 1) & 1,
    "hs": lambda m, n: n & 1,
    "ht": lambda m, n: n & 1,
    "ha": lambda m, n: n & 1,
    "ho": lambda m, n: (n + 1) & 1,
    "hf": lambda m, n: n & 1,
    "hx": lambda m, n: m & 1,
    "lx": lambda m, n: m & 1,
    "lh": lambda m, n: n & 1,
    "lo": lambda m, n: (n + 1) & 1,
    "g": lambda m, n: m & 1,
}


class ArityError(ValueError):
    """Wrong number of inputs for an operation."""


def parity(kind: str, m: int, n: int) -> int:
    return _PAR[kind](m, n)


def graph_word(g: Graph, tag) -> list[tuple]:
    """Objects of ``g`` in storage order; ids are ``(kind, tag, index)``."""
    if g.lines:
        raise StructuralError("graphs with free line components cannot be operated on")
    if g.line:
        return [("lx", tag, 0), ("lh", tag, 0), ("lo", tag, 0), ("lh", tag, 1), ("lx", tag, 1)]
    w = [("v", tag, i) for i in range(g.v)]
    for k in range(len(g.edges)):
        w += [("eo", tag, k), ("hs", tag, k), ("ht", tag, k)]
    for j in range(len(g.hairs)):
        w += [("ha", tag, j), ("ho", tag, j), ("hf", tag, j), ("hx", tag, j)]
    return w


def word_parity(word: Iterable[tuple], m: int, n: int) -> int:
    return sum(_PAR[o[0]](m, n) for o in word) & 1


def koszul(current: Sequence[tuple], target: Sequence[tuple], m: int, n: int) -> int:
    """Sign of rearranging ``current`` into ``target`` (same objects)."""
    odd_cur = [o for o in current if _PAR[o[0]](m, n)]
    odd_tgt = [o for o in target if _PAR[o[0]](m, n)]
    if len(odd_cur) != len(odd_tgt):
        raise AssertionError("word mismatch")
    pos = {o: i for i, o in enumerate(odd_tgt)}
    perm = [pos[o] for o in odd_cur]
    seen = [False] * len(perm)
    par = 0
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            par ^= (length - 1) & 1
    return -1 if par else 1


@dataclass
class Assembly:
    """A labeled output graph whose objects keep their input identities."""

    m: int
    n: int
    vertices: list
    edges: list  # (eo, hs, ht, src vertex id, tgt vertex id, directed)
    hairs: list  # (ha, ho, hf, hx, anchor vertex id)
    line: bool = False

    def target_word(self) -> list:
        if self.line:
            raise AssertionError("line output has a fixed word")
        w = list(self.vertices)
        for eo, hs, ht, *_ in self.edges:
            w += [eo, hs, ht]
        for ha, ho, hf, hx, _ in self.hairs:
            w += [ha, ho, hf, hx]
        return w

    def graph(self) -> Graph:
        idx = {x: i for i, x in enumerate(self.vertices)}
        return Graph(
            len(self.vertices),
            tuple((idx[s], idx[t], d) for *_, s, t, d in self.edges),
            tuple(idx[a] for *_, a in self.hairs),
            self.m,
            self.n,
        )


def decompose(g: Graph, tag) -> tuple[list, list, list]:
    """Vertex ids, edge records and hair records of ``g`` for an Assembly."""
    vs = [("v", tag, i) for i in range(g.v)]
    es = [
        (("eo", tag, k), ("hs", tag, k), ("ht", tag, k), vs[s], vs[t], d)
        for k, (s, t, d) in enumerate(g.edges)
    ]
    hs = [(("ha", tag, j), ("ho", tag, j), ("hf", tag, j), ("hx", tag, j), vs[a]) for j, a in enumerate(g.hairs)]
    return vs, es, hs


# ---------------------------------------------------------------------------
# insertion


def half_edges_at(g: Graph, w: int) -> list[tuple]:
    """Half-edges incident to vertex ``w`` as ``(kind, index)`` pairs."""
    out = []
    for k, (s, t, _) in enumerate(g.edges):
        if s == w:
            out.append(("hs", k))
        if t == w:
            out.append(("ht", k))
    for j, a in enumerate(g.hairs):
        if a == w:
            out.append(("ha", j))
    return out


def insert_terms(host: Graph, w: int, guest: Graph, choices=None) -> Iterator[tuple[Graph, int]]:
    """Labeled terms of inserting ``guest`` into vertex ``w`` of ``host``.

    Yields ``(graph, sign)`` for each function from the half-edges at ``w``
    to the vertices of ``guest`` (or for each function in ``choices``).
    """
    if host.line or guest.line:
        raise StructuralError("insertion needs graphs with vertices")
    if not 0 <= w < host.v:
        raise StructuralError(f"slot {w} out of range")
    m, n = host.m, host.n
    hw = graph_word(host, 0)
    gw = graph_word(guest, 1)
    pos = hw.index(("v", 0, w))
    tail = hw[pos + 1 :]
    # bring the slot vertex to the front, then splice the guest in after it
    sign0 = -1 if (n * word_parity(hw[:pos], m, n) + word_parity(gw, m, n) * word_parity(tail, m, n)) % 2 else 1
    current = hw[:pos] + gw + tail
    hv, he, hh = decompose(host, 0)
    gv, ge, gh = decompose(guest, 1)
    halves = half_edges_at(host, w)
    if choices is None:
        choices = product(range(guest.v), repeat=len(halves))
    for f in choices:
        target_of = {}
        for (kind, idx), u in zip(halves, f):
            target_of[(kind, idx)] = gv[u]
        vertices = hv[:w] + gv + hv[w + 1 :]
        edges = []
        for k, (eo, hs, ht, s, t, d) in enumerate(he):
            s2 = target_of.get(("hs", k), s)
            t2 = target_of.get(("ht", k), t)
            edges.append((eo, hs, ht, s2, t2, d))
        edges += ge
        hairs = []
        for j, (ha, ho, hf, hx, a) in enumerate(hh):
            hairs.append((ha, ho, hf, hx, target_of.get(("ha", j), a)))
        hairs += gh
        asm = Assembly(m, n, vertices, edges, hairs)
        yield asm.graph(), sign0 * koszul(current, asm.target_word(), m, n)


def insert(host: Graph, slot: int, guest: Graph) -> GraphSum:
    """Sum over all reconnections of the half-edges at ``slot`` into ``guest``."""
    out = GraphSum(host.m, host.n)
    for g, s in insert_terms(host, slot, guest):
        out.add_graph(g, s)
    return out


def prelie(x: GraphSum, y: GraphSum, keep=None) -> GraphSum:
    """Insertion pre-Lie product: sum over slots of x of inserting y."""
    out = GraphSum(x.m, x.n)
    for gx, cx in x.items():
        for gy, cy in y.items():
            for w in range(gx.v):
                for g, s in insert_terms(gx, w, gy):
                    if keep is not None and not keep(g):
                        continue
                    out.add_graph(g, s * cx * cy)
    return out


def plain_degree(g: Graph) -> int:
    return g.n * (g.v - 1) + (1 - g.n) * g.e


def gc_bracket(x: GraphSum, y: GraphSum, keep=None) -> GraphSum:
    """Graded commutator of insertion on plain (directed) graph sums."""
    out = GraphSum(x.m, x.n)
    for gx, cx in x.items():
        for gy, cy in y.items():
            a = GraphSum.of(gx, cx)
            b = GraphSum.of(gy, cy)
            sgn = -1 if (plain_degree(gx) * plain_degree(gy)) % 2 else 1
            out = out + prelie(a, b, keep) - prelie(b, a, keep).scaled(sgn)
    return out


# ---------------------------------------------------------------------------
# the hair action


@dataclass(frozen=True)
class ActionGraph:
    """A directed acyclic graph whose vertices are input slots.

    ``colors[i]`` is ``"w"`` for an input slot and ``"b"`` for a slot filled
    by mu.  The edge order is the orientation of the operation.
    """

    k: int
    edges: tuple
    colors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(s), int(t)) for s, t in self.edges))
        cols = tuple(self.colors) if self.colors else ("w",) * self.k
        if len(cols) != self.k or any(c not in ("w", "b") for c in cols):
            raise StructuralError("colors must list w/b for every vertex")
        object.__setattr__(self, "colors", cols)
        for s, t in self.edges:
            if not (0 <= s < self.k and 0 <= t < self.k) or s == t:
                raise StructuralError(f"bad action edge ({s},{t})")
        if not is_acyclic(self.k, [(s, t, True) for s, t in self.edges]):
            raise StructuralError("action graph must be acyclic")

    def out_degree(self, i: int) -> int:
        return sum(1 for s, _ in self.edges if s == i)

    @property
    def whites(self) -> list[int]:
        return [i for i, c in enumerate(self.colors) if c == "w"]

    def to_text(self, m: int = 1, n: int = 2) -> str:
        es = ",".join(f"{s}>{t}" for s, t in self.edges)
        return f"G m={m} n={n} v={self.k} h=[] e=[{es}] c=[{','.join(self.colors)}]"


def _hair_slots(z: Graph, tag) -> list:
    """Consumable hair ends of an input: (ext id, far half-edge id, index)."""
    if z.line:
        return [(("lx", tag, 0), ("lh", tag, 0), 0), (("lx", tag, 1), ("lh", tag, 1), 1)]
    return [(("hx", tag, j), ("hf", tag, j), j) for j in range(len(z.hairs))]


def action_terms(gamma: ActionGraph, inputs: Sequence[Graph], exact: bool = True) -> Iterator[tuple[Graph, int]]:
    """Labeled terms of ``gamma(z_0, ..., z_{k-1})``.

    Each edge ``i -> j`` of ``gamma`` connects a hair of ``z_i`` to a vertex of
    ``z_j``.  A hair chosen twice gives zero.  With ``exact`` the out-degree of
    every slot must equal the hair count of its input; otherwise surplus hairs
    survive (the leg-attaching embedding).
    """
    if len(inputs) != gamma.k:
        raise ArityError(f"{gamma.k} inputs expected, got {len(inputs)}")
    if not inputs:
        return
    m, n = inputs[0].m, inputs[0].n
    for i, z in enumerate(inputs):
        nh = z.h
        od = gamma.out_degree(i)
        if od > nh or (exact and od != nh):
            return
    p = len(gamma.edges)
    word = [("g", None, q) for q in range(p)]
    for i, z in enumerate(inputs):
        word += graph_word(z, i)
    hair_opts = []
    vert_opts = []
    for s, t in gamma.edges:
        hair_opts.append(_hair_slots(inputs[s], s))
        if inputs[t].line:
            return
        vert_opts.append(list(range(inputs[t].v)))
    for hairs_pick in product(*hair_opts):
        exts = [h[0] for h in hairs_pick]
        if len(set(exts)) < len(exts):
            continue
        # contract each edge object with the external end it consumes
        cur = list(word)
        sign = 1
        for q in range(p):
            g = ("g", None, q)
            gi = cur.index(g)
            cur.pop(gi)
            xi = cur.index(exts[q])
            if parity("g", m, n):
                lo, hi = (gi, xi) if gi <= xi else (xi, gi)
                between = word_parity(cur[lo:hi], m, n)
                if between:
                    sign = -sign
            cur.pop(xi)
        for verts_pick in product(*vert_opts):
            yield from _assemble_action(gamma, inputs, hairs_pick, verts_pick, cur, sign, m, n)


def _assemble_action(gamma, inputs, hairs_pick, verts_pick, cur, sign, m, n):
    vertices: list = []
    edges: list = []
    hairs: list = []
    used = {}
    for (s, t), (ext, far, idx), u in zip(gamma.edges, hairs_pick, verts_pick):
        used[(s, idx)] = ("v", t, u)
    line_parts = []
    for i, z in enumerate(inputs):
        if z.line:
            c0 = used.get((i, 0))
            c1 = used.get((i, 1))
            lo = ("lo", i, 0)
            h0, h1 = ("lh", i, 0), ("lh", i, 1)
            x0, x1 = ("lx", i, 0), ("lx", i, 1)
            if c0 is not None and c1 is not None:
                edges.append((lo, h0, h1, c0, c1, False))
            elif c0 is not None:
                hairs.append((h0, lo, h1, x1, c0))
            elif c1 is not None:
                hairs.append((h1, lo, h0, x0, c1))
            else:
                line_parts.append(i)
            continue
        vs, es, hs = decompose(z, i)
        vertices += vs
        edges += es
        for j, (ha, ho, hf, hx, a) in enumerate(hs):
            target = used.get((i, j))
            if target is None:
                hairs.append((ha, ho, hf, hx, a))
            else:
                edges.append((ho, ha, hf, a, target, False))
    if line_parts:
        if len(inputs) == 1 and not gamma.edges:
            yield line_graph(m, n), sign
            return
        raise StructuralError("an untouched line graph cannot be part of a larger output")
    asm = Assembly(m, n, vertices, edges, hairs)
    yield asm.graph(), sign * koszul(cur, asm.target_word(), m, n)


def hairy_action(gamma: ActionGraph, inputs: Sequence[GraphSum], exact: bool = True) -> GraphSum:
    """Multilinear extension of :func:`action_terms` to graph sums."""
    if len(inputs) != gamma.k:
        raise ArityError(f"{gamma.k} inputs expected, got {len(inputs)}")
    m, n = inputs[0].m, inputs[0].n
    out = GraphSum(m, n)
    for picks in product(*[x.items() for x in inputs]):
        coeff = Fraction(1)
        for _, c in picks:
            coeff *= c
        for g, s in action_terms(gamma, [g for g, _ in picks], exact):
            out.add_graph(g, s * coeff)
    return out


def mu_graph(m: int, n: int) -> Graph:
    return Graph(1, (), (0,), m, n)


def twist_substitute(gamma: ActionGraph, inputs: Sequence[GraphSum], exact: bool = True) -> GraphSum:
    """Action of ``gamma`` with mu in every black slot and ``inputs`` in the white ones."""
    whites = gamma.whites
    if len(inputs) != len(whites):
        raise ArityError(f"{len(whites)} white inputs expected, got {len(inputs)}")
    if not inputs:
        raise ArityError("at least one white input is needed")
    m, n = inputs[0].m, inputs[0].n
    if any(gamma.out_degree(i) > 1 for i, c in enumerate(gamma.colors) if c == "b"):
        return GraphSum(m, n)
    mu = GraphSum.of(mu_graph(m, n))
    full = []
    it = iter(inputs)
    for c in gamma.colors:
        full.append(next(it) if c == "w" else mu)
    # black slots always keep mu's hair when unused
    return _action_mixed(gamma, full, exact)


def _action_mixed(gamma: ActionGraph, full: Sequence[GraphSum], exact: bool) -> GraphSum:
    m, n = full[0].m, full[0].n
    out = GraphSum(m, n)
    for picks in product(*[x.items() for x in full]):
        coeff = Fraction(1)
        for _, c in picks:
            coeff *= c
        graphs = [g for g, _ in picks]
        ok = True
        for i, g in enumerate(graphs):
            od = gamma.out_degree(i)
            need_exact = exact and gamma.colors[i] == "w"
            if od > g.h or (need_exact and od != g.h):
                ok = False
        if not ok:
            continue
        for g, s in action_terms(gamma, graphs, exact=False):
            out.add_graph(g, s * coeff)
    return out


def generator_graphs(m: int) -> list[tuple[ActionGraph, int]]:
    """Image of the Lie bracket: the undirected edge read as directed edges."""
    return [(ActionGraph(2, ((0, 1),)), 1), (ActionGraph(2, ((1, 0),)), -1 if m % 2 == 0 else 1)]


def standard_bracket_terms(x: Graph, y: Graph) -> Iterator[tuple[Graph, int]]:
    """Labeled terms of the standard bracket of two graphs.

    ``[x, y] = (-1)^(m+1+m|x|) (x -> y + (-1)^(m+1) y -> x)`` where ``x -> y``
    attaches one hair of ``x`` to a vertex of ``y``.  With this sign the
    bracket is a graded Lie bracket for the parity ``|x| + m``.
    """
    m, n = x.m, x.n
    if y.context != (m, n):
        raise ContextMismatch(f"{x.context} vs {y.context}")
    px = word_parity(graph_word(x, 0), m, n)
    pre = -1 if (m + 1 + m * px) % 2 else 1
    for gamma, c in generator_graphs(m):
        for g, s in action_terms(gamma, [x, y], exact=False):
            yield g, pre * c * s


def standard_bracket(x: GraphSum, y: GraphSum) -> GraphSum:
    if x.context != y.context:
        raise ContextMismatch(f"{x.context} vs {y.context}")
    out = GraphSum(x.m, x.n)
    for gx, cx in x.items():
        for gy, cy in y.items():
            for g, s in standard_bracket_terms(gx, gy):
                out.add_graph(g, s * cx * cy)
    return out
