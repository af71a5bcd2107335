import pytest
from hypothesis import given, settings, strategies as st

from convex_energy.energy import (
    dirichlet_coefficients,
    energy_bruteforce,
    energy_dirichlet,
    energy_from_weights,
    fit_exponent,
)
from convex_energy.errors import DomainError, ResourceError
from convex_energy.sequences import ConvexSequence, gen_random_convex, gen_sequence
from convex_energy.sumset import build_weighted_sumset

import oracles


def seq_of(*values):
    return ConvexSequence(tuple(values))


def via_weights(seq, d):
    return energy_from_weights(build_weighted_sumset(seq, d)).energy


def test_small_examples():
    squares = seq_of(1, 4, 9)
    assert via_weights(squares, 2) == 15
    assert energy_bruteforce(squares, 2).energy == 15
    assert energy_dirichlet(squares, 2).energy == 15
    assert via_weights(seq_of(1, 2, 3), 2) == 19
    assert energy_dirichlet(seq_of(1, 2), 2).energy == 6
    assert energy_dirichlet(seq_of(1), 3).energy == 1
    assert energy_bruteforce(seq_of(1, 2), 1).energy == 2
    for d in (1, 2, 4):
        assert via_weights(seq_of(5), d) == 1


def test_backend_labels():
    seq = seq_of(1, 4, 9)
    assert energy_from_weights(build_weighted_sumset(seq, 2)).backend == "weights"
    assert energy_bruteforce(seq, 2).backend == "bruteforce"
    assert energy_dirichlet(seq, 2).backend == "dirichlet"


def test_bruteforce_matches_tuple_oracle():
    for seed in range(5):
        seq = gen_random_convex(seed, 7)
        assert energy_bruteforce(seq, 2).energy == oracles.energy_by_tuples(seq.values, 2)


def test_dirichlet_coefficients_match_convolution():
    seq = gen_sequence("power:3", 6)
    offset, coeffs = dirichlet_coefficients(seq, 3)
    ref = oracles.dirichlet_coefficients(seq.values, 3)
    assert offset == 3
    assert {offset + i: int(c) for i, c in enumerate(coeffs) if c} == ref


def test_dirichlet_wide_coefficients():
    # N^d above 2^32 needs 8-byte packing
    seq = gen_sequence("power:1", 300)
    _, coeffs = dirichlet_coefficients(seq, 4)
    assert int(coeffs.sum()) == 300**4


def test_quadrature_matches_exact():
    for kind in ("power:2", "random:4", "power:3"):
        seq = gen_sequence(kind, 12)
        for d in (1, 2, 3):
            quad = energy_dirichlet(seq, d, method="quadrature")
            assert quad.energy == energy_dirichlet(seq, d).energy
            assert abs(quad.raw - quad.energy) < 1e-3


def test_dirichlet_rejects_scaled_sequences():
    seq = gen_sequence("sqrt:5", 4)
    with pytest.raises(DomainError):
        energy_dirichlet(seq, 2)
    with pytest.raises(DomainError):
        energy_dirichlet(seq, 2, method="quadrature")
    with pytest.raises(DomainError):
        energy_dirichlet(gen_sequence("power:2", 4), 2, method="simpson")


def test_guards():
    with pytest.raises(ResourceError, match="N=101, d=2"):
        energy_bruteforce(gen_sequence("power:1", 101), 2)
    with pytest.raises(ResourceError, match="degree"):
        dirichlet_coefficients(gen_sequence("power:3", 100), 2, degree_budget=1000)


def test_bruteforce_limit_ignores_env(monkeypatch):
    monkeypatch.setenv("CE_BUDGET", str(10**15))
    with pytest.raises(ResourceError):
        energy_bruteforce(gen_sequence("power:1", 101), 2)


def test_sqrt_squarefree_only_diagonal():
    for n in (4, 8, 16):
        seq = gen_sequence("sqrt:30", n)
        assert via_weights(seq, 2) == 2 * n * n - n
    assert energy_bruteforce(gen_sequence("sqrt:30", 8), 2).energy == 2 * 64 - 8


def test_linear_closed_form():
    for n in range(1, 40):
        assert via_weights(gen_sequence("power:1", n), 2) == oracles.energy_linear_closed_form(n)


seqs = st.builds(gen_random_convex, st.integers(0, 10**6), st.integers(1, 9), st.integers(0, 3))


@settings(max_examples=40, deadline=None)
@given(seqs, st.integers(1, 3))
def test_three_backends_agree(seq, d):
    e = via_weights(seq, d)
    if seq.n ** (2 * d) <= 10**6:
        assert e == energy_bruteforce(seq, d).energy
    assert e == energy_dirichlet(seq, d).energy
    assert e >= seq.n**d


@settings(max_examples=40, deadline=None)
@given(seqs, st.integers(1, 3), st.integers(1, 50), st.integers(-100, 100))
def test_affine_invariance(seq, d, a, c):
    assert via_weights(seq.affine(a, c), d) == via_weights(seq, d)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12), st.integers(1, 3))
def test_monotone_in_n(seed, n, d):
    seq = gen_random_convex(seed, n)
    assert via_weights(seq.prefix(n - 1), d) <= via_weights(seq, d)


def test_fit_exact_power_law():
    fit = fit_exponent([(10, 1e3), (100, 1e6), (1000, 1e9)])
    assert fit.slope == pytest.approx(3.0, abs=1e-9)
    assert fit.max_residual < 1e-9
    assert set(fit.as_dict()) == {"slope", "intercept", "max_residual", "points"}


def test_fit_linear_energy_slope():
    pts = [(n, oracles.energy_linear_closed_form(n)) for n in (64, 128, 256, 512)]
    assert 2.99 <= fit_exponent(pts).slope <= 3.01


def test_fit_errors():
    with pytest.raises(DomainError):
        fit_exponent([(1, 1), (2, 2)])
    with pytest.raises(DomainError):
        fit_exponent([(1, 1), (2, 0), (3, 3)])
    with pytest.raises(DomainError):
        fit_exponent([(2, 1), (2, 2), (3, 3)])
