from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convex_energy.errors import DomainError, ResourceError
from convex_energy.falconer import (
    ConvexFunction,
    build_lattice_set,
    distance_count_naive,
    distance_value_count,
    distance_values,
    lattice_rows,
    parse_function,
    predicted_separated_exponent,
    q_schedule,
    rho_f,
    separated_count,
    separated_table,
)
from convex_energy.sequences import gen_sequence

import oracles

SQUARE = ConvexFunction.power(2)


def test_lattice_set():
    E = build_lattice_set(2, 1, 2)
    assert len(E) == 9
    assert E.resolution == 0.25
    assert E.is_full_box()
    E = build_lattice_set(1, 0.5, 1)
    assert len(E) == 2
    assert E.resolution == 1
    with pytest.raises(DomainError):
        build_lattice_set(2, 2, 2)
    with pytest.raises(DomainError):
        build_lattice_set(0, 1, 2)
    with pytest.raises(ResourceError):
        build_lattice_set(10**4, 1, 3)


def test_q_schedule():
    assert q_schedule(4) == [2, 2, 4, 64]


def test_rho_f():
    assert rho_f((3, 4), SQUARE) == 25
    assert rho_f((0, 0), SQUARE) == 0
    assert rho_f((1, 2, 3), ConvexFunction.power(3)) == 36
    assert rho_f((Fraction(1, 2), -1), SQUARE) == Fraction(5, 4)
    with pytest.raises(DomainError):
        rho_f((0.5,), SQUARE)


def test_table_function():
    f = ConvexFunction.from_sequence(gen_sequence("power:2", 4), zero=0)
    assert rho_f((1, -2, 4), f) == 1 + 4 + 16
    with pytest.raises(DomainError):
        f(5)
    with pytest.raises(DomainError):
        f(Fraction(1, 2))


def test_parse_function():
    assert parse_function("power:3").k == 3
    for bad in ("power", "power:0", "exp"):
        with pytest.raises(DomainError):
            parse_function(bad)


def test_distance_value_examples():
    assert distance_value_count(build_lattice_set(1, 0.5, 1), SQUARE) == 2
    assert distance_value_count(build_lattice_set(2, 1, 2), SQUARE) == 6
    assert distance_values(build_lattice_set(2, 1, 2), SQUARE) == [Fraction(v, 4) for v in (0, 1, 2, 4, 5, 8)]
    single = build_lattice_set(2, 1, 2).subset([4])
    assert distance_value_count(single, SQUARE) == 1


@pytest.mark.parametrize("q", range(1, 9))
@pytest.mark.parametrize("k", [2, 3])
def test_distance_count_matches_naive(q, k):
    E = build_lattice_set(q, 1, 2)
    f = ConvexFunction.power(k)
    expected = len(oracles.distance_values(q, 2, k))
    assert distance_value_count(E, f) == expected
    assert distance_count_naive(E, f) == expected


def test_partial_sets_and_translation():
    E = build_lattice_set(4, 1, 2)
    mask = (E.cells.sum(axis=1) % 3) != 0
    part = E.subset(mask)
    assert not part.is_full_box()
    n = distance_value_count(part, SQUARE)
    assert n == distance_count_naive(part, SQUARE)
    assert distance_value_count(part.shifted((5, -2)), SQUARE) == n
    assert distance_value_count(E.shifted((3, 3)), SQUARE) == distance_value_count(E, SQUARE)


def test_table_function_on_lattice():
    f = ConvexFunction.from_sequence(gen_sequence("power:2", 3), zero=0)
    E = build_lattice_set(3, 1, 2)
    assert distance_value_count(E, f) == distance_count_naive(E, f)


def test_separated_count_examples():
    assert separated_count([Fraction(0), Fraction(1, 2), Fraction(1)], Fraction(3, 5)) == 2
    assert separated_count([0.0, 0.5, 1.0], 0.6) == 2
    assert separated_count([1, 5, 9], 4) == 3
    assert separated_count([], 1) == 0
    with pytest.raises(DomainError):
        separated_count([1, 2], 0)
    with pytest.raises(DomainError):
        separated_count([3, 1], 1)


def test_separated_count_scaled():
    # values 0.10, 0.15, 0.30 stored at scale 100
    assert separated_count(np.array([10, 15, 30]), 0.1, scale=100) == 2
    assert separated_count(np.array([10, 15, 30]), 0.05, scale=100) == 3


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 60), min_size=1, max_size=9, unique=True), st.integers(1, 20))
def test_greedy_is_maximal(values, delta):
    values = sorted(values)
    got = separated_count(np.array(values), delta)
    assert got == oracles.max_separated(values, delta)
    assert got == separated_count(values, Fraction(delta))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=40, unique=True), st.integers(1, 1000))
def test_separated_monotone_in_delta(values, delta):
    arr = np.array(sorted(values))
    assert separated_count(arr, delta + 1) <= separated_count(arr, delta)
    assert separated_count(arr, Fraction(1, 10)) == len(values)


def test_harness_table():
    rows, fit = separated_table("power:2", 2, [16, 32, 64, 128])
    assert [r[0] for r in rows] == [16, 32, 64, 128]
    assert rows[0][1] == pytest.approx(16 ** (-1 / 3))
    assert fit.slope >= predicted_separated_exponent(2) - 0.1
    assert separated_table("power:2", 2, [16, 32, 64, 128])[0] == rows


def test_harness_on_scaled_sequence():
    rows, _ = separated_table("sqrt:30", 2, [8, 16, 32])
    assert all(0 < r[2] <= 32 * 33 for r in rows)


def test_lattice_rows():
    rows = lattice_rows([1, 2], 1.0, 2, SQUARE)
    assert rows == [(1, 1.0, 2, "x^2", 3, 1.0), (2, 1.0, 2, "x^2", 6, 0.25)]
