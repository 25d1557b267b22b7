"""Exact sparse linear algebra over the rationals.

Ranks use fraction-free elimination over Python integers (each column is
first cleared of denominators, rows are kept primitive by dividing out
their content) with a Markowitz pivot rule.  The same elimination runs over
a prime field for cross-checks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

PRIMES = (101, 10007)


class UsageError(ValueError):
    pass


class ConsistencyError(RuntimeError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


@dataclass
class SparseMat:
    rows: int
    cols: int
    data: dict = field(default_factory=dict)  # (i, j) -> Fraction, no zeros

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.data.items():
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise UsageError(f"entry ({i},{j}) out of range for {self.rows}x{self.cols}")
            v = _frac(v)
            if v:
                clean[(i, j)] = v
        self.data = clean

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMat":
        r = len(rows)
        c = len(rows[0]) if r else 0
        return cls(r, c, {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row) if v})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseMat":
        return cls(rows, cols, {})

    @property
    def entries(self) -> list[tuple[int, int, Fraction]]:
        return [(i, j, v) for (i, j), v in sorted(self.data.items())]

    @property
    def nnz(self) -> int:
        return len(self.data)

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.data.items():
            out[i][j] = v
        return out

    def transpose(self) -> "SparseMat":
        return SparseMat(self.cols, self.rows, {(j, i): v for (i, j), v in self.data.items()})

    def column(self, j: int) -> dict[int, Fraction]:
        return {i: v for (i, jj), v in self.data.items() if jj == j}

    def __matmul__(self, other: "SparseMat") -> "SparseMat":
        if self.cols != other.rows:
            raise UsageError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        by_row: dict[int, list] = {}
        for (k, j), v in other.data.items():
            by_row.setdefault(k, []).append((j, v))
        out: dict = {}
        for (i, k), a in self.data.items():
            for j, b in by_row.get(k, ()):
                out[(i, j)] = out.get((i, j), 0) + a * b
        return SparseMat(self.rows, other.cols, out)

    def apply(self, vec: Sequence) -> list[Fraction]:
        if len(vec) != self.cols:
            raise UsageError("vector length does not match column count")
        out = [Fraction(0)] * self.rows
        for (i, j), v in self.data.items():
            out[i] += v * vec[j]
        return out

    def is_zero(self) -> bool:
        return not self.data

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "SparseMat":
        return SparseMat(self.rows, self.cols, {(row_perm[i], col_perm[j]): v for (i, j), v in self.data.items()})

    def hstack(self, col: Sequence) -> "SparseMat":
        data = dict(self.data)
        for i, v in enumerate(col):
            if v:
                data[(i, self.cols)] = _frac(v)
        return SparseMat(self.rows, self.cols + 1, data)

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseMat) and (self.rows, self.cols, self.data) == (other.rows, other.cols, other.data)


# ---------------------------------------------------------------------------
# elimination


def _integer_rows(a: SparseMat) -> list[dict[int, int]]:
    """Rows of ``a`` after scaling every column to integer entries."""
    col_den: dict[int, int] = {}
    for (_, j), v in a.data.items():
        col_den[j] = lcm(col_den.get(j, 1), v.denominator)
    rows: list[dict[int, int]] = [dict() for _ in range(a.rows)]
    for (i, j), v in a.data.items():
        rows[i][j] = int(v * col_den[j])
    return [r for r in rows if r]


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


def _markowitz(active: dict, col_rows: dict):
    """Pivot from the sparsest column, then the sparsest row inside it.

    This bounds the Markowitz cost (r - 1)(c - 1) by the column count times
    the shortest row without scanning every entry.  Ties break on indices so
    the elimination order is deterministic.
    """
    best_j = None
    best_c = None
    for j, rs in col_rows.items():
        c = len(rs)
        if c and (best_c is None or c < best_c or (c == best_c and j < best_j)):
            best_j, best_c = j, c
            if c == 1:
                break
    if best_j is None:
        return None
    best_i = min(col_rows[best_j], key=lambda i: (len(active[i]), i))
    return best_i, best_j


def _eliminate(rows: list[dict[int, int]], modulus: int | None) -> int:
    """Rank by elimination with Markowitz pivoting; ``rows`` is consumed."""
    if modulus:
        rows = [{k: v % modulus for k, v in r.items() if v % modulus} for r in rows]
        rows = [r for r in rows if r]
    active = dict(enumerate(rows))
    col_rows: dict[int, set] = {}
    for i, r in active.items():
        for j in r:
            col_rows.setdefault(j, set()).add(i)
    rank = 0
    while active:
        best = _markowitz(active, col_rows)
        if best is None:
            break
        pi, pj = best
        prow = active.pop(pi)
        for j in prow:
            col_rows[j].discard(pi)
        rank += 1
        p = prow[pj]
        for i in list(col_rows[pj]):
            r = active[i]
            a = r[pj]
            if modulus:
                f = a * pow(p, -1, modulus) % modulus
                new = dict(r)
                for j, v in prow.items():
                    nv = (new.get(j, 0) - f * v) % modulus
                    if nv:
                        new[j] = nv
                    else:
                        new.pop(j, None)
            else:
                new = {j: v * p for j, v in r.items()}
                for j, v in prow.items():
                    nv = new.get(j, 0) - a * v
                    if nv:
                        new[j] = nv
                    else:
                        new.pop(j, None)
                new = _primitive(new)
            for j in r:
                if j not in new:
                    col_rows[j].discard(i)
            for j in new:
                if j not in r:
                    col_rows.setdefault(j, set()).add(i)
            if new:
                active[i] = new
            else:
                del active[i]
        del col_rows[pj]
    return rank


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def rank(a: SparseMat, mode: str = "exact", p: int | None = None) -> int:
    """Rank of ``a``; ``mode`` is ``"exact"`` or ``"modp"`` (with prime ``p``)."""
    if mode == "exact":
        rows = _integer_rows(a)
        # eliminate the smaller side
        if a.rows > a.cols:
            rows = _integer_rows(a.transpose())
        return _eliminate(rows, None)
    if mode == "modp":
        if p is None or not is_prime(p):
            raise UsageError(f"modp rank needs a prime modulus, got {p}")
        return _eliminate(_integer_rows(a), p)
    raise UsageError(f"unknown rank mode {mode!r}")


def rank_cross_check(a: SparseMat, primes: Iterable[int] = PRIMES) -> dict:
    exact = rank(a)
    mods = {q: rank(a, "modp", q) for q in primes}
    return {"exact": exact, "modp": mods, "agree": any(v == exact for v in mods.values())}


def kernel_dim(a: SparseMat) -> int:
    return a.cols - rank(a)


# ---------------------------------------------------------------------------
# solving


@dataclass
class Solution:
    feasible: bool
    z: list[Fraction] | None
    rank_a: int
    rank_ab: int

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "z": None if self.z is None else [str(x) for x in self.z],
            "rank_a": self.rank_a,
            "rank_ab": self.rank_ab,
        }


def solve(a: SparseMat, b: Sequence) -> Solution:
    """Some exact solution of ``a z = b`` or a rank certificate that none exists."""
    if len(b) != a.rows:
        raise UsageError(f"right side has length {len(b)}, matrix has {a.rows} rows")
    b = [_frac(x) for x in b]
    # row echelon form over Q on the augmented system, columns of a only as pivots
    rows: list[dict[int, Fraction]] = [dict() for _ in range(a.rows)]
    for (i, j), v in a.data.items():
        rows[i][j] = v
    aug = a.cols
    for i, v in enumerate(b):
        if v:
            rows[i][aug] = v
    rows = [r for r in rows if r]
    pivots: list[tuple[int, dict]] = []
    active = dict(enumerate(rows))
    col_rows: dict[int, set] = {}
    for i, r in active.items():
        for j in r:
            if j != aug:
                col_rows.setdefault(j, set()).add(i)
    while True:
        best = _markowitz(active, col_rows)
        if best is None:
            break
        pi, pj = best
        prow = active.pop(pi)
        for j in prow:
            if j != aug:
                col_rows[j].discard(pi)
        pivots.append((pj, prow))
        pv = prow[pj]
        for i in list(col_rows[pj]):
            r = active[i]
            f = r[pj] / pv
            new = dict(r)
            for j, v in prow.items():
                nv = new.get(j, 0) - f * v
                if nv:
                    new[j] = nv
                else:
                    new.pop(j, None)
            for j in r:
                if j not in new and j != aug:
                    col_rows[j].discard(i)
            for j in new:
                if j not in r and j != aug:
                    col_rows.setdefault(j, set()).add(i)
            if new:
                active[i] = new
            else:
                del active[i]
        del col_rows[pj]
    rank_a = len(pivots)
    inconsistent = any(set(r) == {aug} for r in active.values())
    if inconsistent:
        return Solution(False, None, rank_a, rank_a + 1)
    z = [Fraction(0)] * a.cols
    for pj, prow in reversed(pivots):
        s = prow.get(aug, Fraction(0))
        for j, v in prow.items():
            if j != aug and j != pj:
                s -= v * z[j]
        z[pj] = s / prow[pj]
    if a.apply(z) != b:
        raise ConsistencyError("solution failed exact verification")
    return Solution(True, z, rank_a, rank_a)


def homology_dim(d_in: SparseMat, d_out: SparseMat) -> int:
    """dim ker(d_out) - rank(d_in) at the middle slice."""
    if d_in.rows != d_out.cols:
        raise UsageError(f"d_in lands in dimension {d_in.rows}, d_out starts from {d_out.cols}")
    if not (d_out @ d_in).is_zero():
        raise ConsistencyError("d_out * d_in is not zero")
    return d_out.cols - rank(d_out) - rank(d_in)


# ---------------------------------------------------------------------------
# SMS format


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def write_sms(a: SparseMat) -> str:
    lines = [f"{a.rows} {a.cols} M"]
    for i, j, v in a.entries:
        lines.append(f"{i + 1} {j + 1} {_fmt(v)}")
    lines.append("0 0 0")
    return "\n".join(lines) + "\n"


def read_sms(text: str) -> SparseMat:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise UsageError("empty SMS input")
    head = lines[0].split()
    if len(head) != 3 or head[2] not in ("M", "Q", "R", "Z"):
        raise UsageError(f"bad SMS header {lines[0]!r}")
    rows, cols = int(head[0]), int(head[1])
    data = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise UsageError(f"bad SMS line {ln!r}")
        i, j = int(parts[0]), int(parts[1])
        if i == 0 and j == 0:
            break
        data[(i - 1, j - 1)] = data.get((i - 1, j - 1), 0) + Fraction(parts[2])
    else:
        raise UsageError("SMS input is missing the 0 0 0 terminator")
    return SparseMat(rows, cols, data)


def vector_to_json(vec: Sequence[Fraction]) -> str:
    return json.dumps([_fmt(_frac(x)) for x in vec])


def vector_from_json(text: str) -> list[Fraction]:
    return [Fraction(x) for x in json.loads(text)]
