"""Named graphs used by the examples, tests and the command line.

Edge and hair lists follow the order in which the graphs are usually drawn,
so each fixes an orientation.  Hairy graphs default to ``m = 1, n = 3``.
"""
from __future__ import annotations

from .graphcore import Graph, GraphSum, line_graph


def _u(v: int, edges, hairs, m: int = 1, n: int = 3) -> Graph:
    return Graph(v, tuple((s, t, False) for s, t in edges), tuple(hairs), m, n)


def _d(v: int, edges, m: int = 0, n: int = 2) -> Graph:
    return Graph(v, tuple((s, t, True) for s, t in edges), (), m, n)


def line(m: int = 1, n: int = 3) -> Graph:
    return line_graph(m, n)


def mu(m: int = 1, n: int = 3) -> Graph:
    return _u(1, (), (0,), m, n)


def theta(m: int = 1, n: int = 3) -> Graph:
    return _u(2, ((0, 1),) * 3, (), m, n)


def theta_hair(m: int = 1, n: int = 3) -> Graph:
    """Three parallel edges and one hair."""
    return _u(2, ((0, 1),) * 3, (1,), m, n)


def tripod(m: int = 1, n: int = 3) -> Graph:
    """One vertex with three hairs."""
    return _u(1, (), (0, 0, 0), m, n)


def hedgehog2(m: int = 1, n: int = 3) -> Graph:
    """Double edge with one hair at each end."""
    return _u(2, ((0, 1), (0, 1)), (0, 1), m, n)


def k4_hair(m: int = 1, n: int = 3) -> Graph:
    """The complete graph on four vertices with one hair."""
    return _u(4, ((0, 1), (0, 3), (0, 2), (3, 2), (3, 1), (2, 1)), (2,), m, n)


def square_two_doubles_hair(m: int = 1, n: int = 3) -> Graph:
    """Four-cycle with two opposite doubled edges and one hair."""
    return _u(4, ((0, 1), (0, 1), (0, 2), (3, 2), (3, 2), (3, 1)), (2,), m, n)


def square_one_double_hair(m: int = 1, n: int = 3) -> Graph:
    """Four-cycle with one doubled edge, a chord and one hair (an exact graph)."""
    return _u(4, ((0, 1), (0, 1), (0, 2), (3, 2), (3, 0), (3, 1)), (2,), m, n)


def chain_three_hairs(m: int = 1, n: int = 3) -> Graph:
    """Path v = w - x = y with doubled outer edges and hairs on v, x, y."""
    return _u(4, ((0, 1), (0, 1), (1, 2), (2, 3), (2, 3)), (0, 2, 3), m, n)


def square_chord_three_hairs(m: int = 1, n: int = 3) -> Graph:
    """Four-cycle v w x y with chord w - y and hairs on v, x, y."""
    return _u(4, ((0, 1), (0, 3), (1, 2), (1, 3), (2, 3)), (0, 2, 3), m, n)


def six_vertex_corrections(m: int = 1, n: int = 3) -> list[Graph]:
    """The three one-hair six-vertex graphs in the H2 self-bracket correction."""
    base = ((0, 1), (0, 1), (2, 3), (2, 0), (2, 4))
    return [
        _u(6, base + ((3, 1), (3, 5), (4, 5), (4, 5)), (2,), m, n),
        _u(6, base + ((3, 1), (3, 5), (3, 5), (4, 5)), (4,), m, n),
        _u(6, base + ((3, 5), (3, 5), (4, 5), (1, 5)), (4,), m, n),
    ]


def two_loop_graphs() -> list[Graph]:
    """The three four-vertex five-edge acyclic graphs of the two-loop class."""
    return [
        _d(4, ((0, 1), (2, 1), (2, 0), (3, 0), (3, 1))),
        _d(4, ((0, 1), (1, 2), (0, 2), (3, 0), (3, 1))),
        _d(4, ((0, 1), (1, 2), (0, 2), (0, 3), (1, 3))),
    ]


# with the drawn orientations the middle graph enters with a minus sign
TWO_LOOP_COEFFS = (1, -2, 1)


def two_loop_class() -> GraphSum:
    out = GraphSum(0, 2)
    for g, c in zip(two_loop_graphs(), TWO_LOOP_COEFFS):
        out.add_graph(g, c)
    return out


def one_hair_circle(k: int = 3, m: int = 1, n: int = 3) -> Graph:
    """A k-cycle with one hair."""
    return _u(k, tuple((i, (i + 1) % k) for i in range(k)), (0,), m, n)


NAMED = {
    "line": line,
    "mu": mu,
    "theta": theta,
    "theta_hair": theta_hair,
    "tripod": tripod,
    "H2": hedgehog2,
    "K4_hair": k4_hair,
}
# short names used on the command line
NAMED.update({"L": line, "LINE": line, "H": hedgehog2, "K4h": k4_hair})


def bracket_pool(m: int = 1, n: int = 3, size: int = 20) -> list[Graph]:
    """The first ``size`` small hairy graphs: the line graph, then basis
    graphs with at most three vertices and edges, ordered by slice."""
    from .graphcore import SliceParams, canonical_key, enumerate_basis

    pool = [line_graph(m, n)] if canonical_key(line_graph(m, n))[1] else []
    for v in range(1, 4):
        for e in range(0, 4):
            for h in range(0, 4):
                pool += enumerate_basis(SliceParams(v, e, h), m, n).graphs
                if len(pool) >= size:
                    return pool[:size]
    return pool
