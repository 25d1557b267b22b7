from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hairygraphs.exactla import (
    ConsistencyError,
    SparseMat,
    UsageError,
    homology_dim,
    is_prime,
    kernel_dim,
    rank,
    rank_cross_check,
    read_sms,
    solve,
    vector_from_json,
    vector_to_json,
    write_sms,
)
from hairygraphs.structures import _gcor_matrix


def sympy_rank(a: SparseMat) -> int:
    if not a.rows or not a.cols:
        return 0
    return sympy.Matrix(a.rows, a.cols, lambda i, j: sympy.Rational(str(a.data.get((i, j), 0)))).rank()


# ---------------------------------------------------------------------------
# rank


def test_small_ranks():
    assert rank(SparseMat.from_dense([[1, 0], [0, 1]])) == 2
    assert rank(SparseMat.zero(3, 4)) == 0
    assert rank(SparseMat.from_dense([[1, 2], [2, 4]])) == 1
    assert rank(SparseMat.from_dense([[Fraction(1, 3), 1], [1, 3]])) == 1
    assert rank(SparseMat.zero(0, 5)) == 0


def test_rank_mode_errors():
    a = SparseMat.from_dense([[1]])
    with pytest.raises(UsageError):
        rank(a, "modp", 4)
    with pytest.raises(UsageError):
        rank(a, "modp")
    with pytest.raises(UsageError):
        rank(a, "float")


def test_modular_rank_can_drop():
    a = SparseMat.from_dense([[2, 0], [0, 3]])
    assert rank(a, "modp", 2) == 1
    assert rank(a, "modp", 5) == 2
    info = rank_cross_check(a, primes=(2, 3, 5))
    assert info["exact"] == 2 and info["agree"]


def test_is_prime():
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]


entries = st.integers(-4, 4).map(Fraction) | st.fractions(min_value=-3, max_value=3, max_denominator=5)


@st.composite
def matrices(draw):
    r = draw(st.integers(0, 7))
    c = draw(st.integers(0, 7))
    cells = draw(st.lists(entries, min_size=r * c, max_size=r * c))
    dense = [[cells[i * c + j] if draw(st.booleans()) else 0 for j in range(c)] for i in range(r)]
    return SparseMat(r, c, {(i, j): v for i, row in enumerate(dense) for j, v in enumerate(row) if v})


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_exact_rank_matches_sympy_and_modular_rank(a):
    r = rank(a)
    assert r == sympy_rank(a)
    assert r == rank(a.transpose())
    info = rank_cross_check(a)
    assert info["agree"] and all(x <= r for x in info["modp"].values())
    assert kernel_dim(a) == a.cols - r


def test_oriented_differential_rank_against_sympy():
    a = _gcor_matrix(4, 5)
    assert rank(a) == sympy_rank(a)
    assert rank_cross_check(a)["agree"]


# ---------------------------------------------------------------------------
# solving


def test_zero_right_side():
    a = SparseMat.from_dense([[1, 2], [3, 4]])
    sol = solve(a, [0, 0])
    assert sol.feasible and sol.z == [0, 0]


def test_feasible_system():
    a = SparseMat.from_dense([[1, 1, 0], [0, 1, 1], [1, 2, 1]])
    z0 = [Fraction(1, 2), Fraction(-1, 3), 2]
    b = a.apply(z0)
    sol = solve(a, b)
    assert sol.feasible and a.apply(sol.z) == b
    assert sol.rank_a == sol.rank_ab == 2


def test_infeasible_system_has_rank_certificate():
    a = SparseMat.from_dense([[1, 1], [2, 2]])
    sol = solve(a, [1, 3])
    assert not sol.feasible and sol.z is None
    assert (sol.rank_a, sol.rank_ab) == (1, 2)
    assert sol.to_json()["feasible"] is False


@settings(max_examples=100, deadline=None)
@given(matrices(), st.data())
def test_solve_recovers_a_constructed_right_side(a, data):
    z0 = data.draw(st.lists(entries, min_size=a.cols, max_size=a.cols))
    b = a.apply(z0)
    sol = solve(a, b)
    assert sol.feasible and a.apply(sol.z) == b


def test_solve_length_mismatch():
    with pytest.raises(UsageError):
        solve(SparseMat.from_dense([[1]]), [1, 2])


# ---------------------------------------------------------------------------
# homology


def test_homology_of_a_short_exact_sequence_is_zero():
    d_in = SparseMat.from_dense([[1], [0]])
    d_out = SparseMat.from_dense([[0, 1]])
    assert homology_dim(d_in, d_out) == 0


def test_homology_with_zero_differentials():
    assert homology_dim(SparseMat.zero(3, 0), SparseMat.zero(0, 3)) == 3


def test_homology_checks_composition():
    with pytest.raises(ConsistencyError):
        homology_dim(SparseMat.from_dense([[1]]), SparseMat.from_dense([[1]]))
    with pytest.raises(UsageError):
        homology_dim(SparseMat.zero(2, 1), SparseMat.zero(1, 3))


def test_oriented_two_loop_homology():
    assert homology_dim(_gcor_matrix(3, 4), _gcor_matrix(4, 5)) == 1


# ---------------------------------------------------------------------------
# formats


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_sms_round_trip(a):
    assert read_sms(write_sms(a)) == a


def test_sms_text():
    a = SparseMat(2, 3, {(0, 1): Fraction(-1, 2), (1, 2): 4})
    assert write_sms(a) == "2 3 M\n1 2 -1/2\n2 3 4\n0 0 0\n"


def test_sms_errors():
    with pytest.raises(UsageError):
        read_sms("")
    with pytest.raises(UsageError):
        read_sms("2 2 X\n0 0 0\n")
    with pytest.raises(UsageError):
        read_sms("2 2 M\n1 1 1\n")


def test_out_of_range_entry():
    with pytest.raises(UsageError):
        SparseMat(1, 1, {(1, 0): 1})


def test_vector_json_round_trip():
    vec = [Fraction(1, 3), Fraction(0), Fraction(-7)]
    assert vector_to_json(vec) == '["1/3", "0", "-7"]'
    assert vector_from_json(vector_to_json(vec)) == vec
