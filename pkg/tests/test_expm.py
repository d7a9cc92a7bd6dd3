import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindblad_bench.expm import THETA_13, ExpmError, Propagator, expm, pade13_eval
from lindblad_bench.lindblad import build_lindbladian, random_model
from oracles import crandn, hermitian, random_with_norm, rel, taylor_expm


def test_zero_gives_identity():
    p = expm(np.zeros((4, 4)), 0.3)
    assert np.max(np.abs(p.matrix_aos - np.eye(4))) <= 1e-15


def test_zero_step_gives_identity(rng):
    p = expm(crandn(rng, 9, 9), 0.0)
    assert np.max(np.abs(p.matrix_aos - np.eye(9))) <= 1e-15


def test_diagonal(rng):
    lam = rng.normal(size=6) + 1j * rng.normal(size=6)
    p = expm(np.diag(lam), 1.0)
    assert rel(p.matrix_aos, np.diag(np.exp(lam))) <= 1e-13


def test_diagonal_large_norm_uses_squaring():
    lam = np.array([-40.0, 3.0 + 25j, 0.5])
    p = expm(np.diag(lam))
    assert rel(np.diag(p.matrix_aos), np.exp(lam)) <= 1e-13


def test_nilpotent():
    p = expm(np.array([[0, 1], [0, 0]]), 1.0)
    assert np.max(np.abs(p.matrix_aos - np.array([[1, 1], [0, 1]]))) <= 1e-15


def test_matches_taylor_oracle_on_9x9(rng):
    for _ in range(50):
        m = random_with_norm(rng, 9, rng.uniform(0.01, 2.0))
        assert rel(expm(m).matrix_aos, taylor_expm(m)) <= 1e-11


def test_matches_taylor_oracle_up_to_norm_10(rng):
    for norm in (3.0, 5.0, 8.0, 10.0):
        m = random_with_norm(rng, 9, norm)
        assert rel(expm(m).matrix_aos, taylor_expm(m, terms=40)) <= 1e-11


def test_pade13_examples(rng):
    assert np.max(np.abs(pade13_eval(np.zeros((3, 3))) - np.eye(3))) <= 1e-15
    r = pade13_eval(0.1 * np.eye(3))
    assert np.max(np.abs(r - math.exp(0.1) * np.eye(3))) <= 1e-15
    for _ in range(20):
        m = random_with_norm(rng, 6, rng.uniform(0.1, THETA_13))
        assert rel(pade13_eval(m), taylor_expm(m, terms=40)) <= 1e-12


@pytest.mark.parametrize("n", [2, 4, 9, 16, 81])
def test_semigroup(rng, n):
    a = crandn(rng, n, n)
    dt = 0.7 / np.abs(a).sum(axis=0).max() * rng.uniform(0.5, 4)
    one = expm(a, dt).matrix_aos
    two = expm(a, 2 * dt).matrix_aos
    assert rel(one @ one, two) <= 1e-10


def test_semigroup_on_lindbladian(rng):
    lind = build_lindbladian(random_model(9, rng))
    one = expm(lind.matrix, 0.3).matrix_aos
    assert rel(one @ one, expm(lind.matrix, 0.6).matrix_aos) <= 1e-10


@pytest.mark.parametrize("d", [2, 3, 9, 27])
def test_anti_hermitian_gives_unitary(rng, d):
    h = hermitian(rng, d)
    for dt in (0.01, 1.0, 30.0):
        p = expm(-1j * h, dt).matrix_aos
        assert np.max(np.abs(p.conj().T @ p - np.eye(d))) <= 1e-11


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3), st.integers(0, 2**32 - 1))
def test_scaling_invariance(n, dt, seed):
    a = crandn(np.random.default_rng(seed), n, n)
    assert rel(expm(a, dt).matrix_aos, expm(a * dt, 1.0).matrix_aos) <= 1e-12


def test_layouts_agree_bitwise(rng):
    p = expm(crandn(rng, 9, 9), 0.2)
    assert np.array_equal(p.matrix_soa.re, p.matrix_aos.real)
    assert np.array_equal(p.matrix_soa.im, p.matrix_aos.imag)
    assert p.step == 0.2 and p.size == 9 and p.dim == 3


def test_propagator_dim_requires_square_size():
    p = expm(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        p.dim
    assert isinstance(p, Propagator)


def test_errors():
    with pytest.raises(ValueError):
        expm(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        expm(np.eye(2), math.nan)
    with pytest.raises(ExpmError):
        expm(np.array([[math.inf, 0], [0, 0]]))
    with pytest.raises(ExpmError):
        expm(np.eye(2), 1e30)
