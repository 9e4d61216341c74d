"""Compiled and pure-Python kernels must agree, and both must match brute force."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zeroconc import kernels
from zeroconc import _pykernels as py

compiled = kernels.compiled_impl
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")

finite = st.floats(-1e3, 1e3, allow_nan=False)


def brute_permanent(A):
    n = A.shape[0]
    return sum(np.prod([A[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n)))


def matchings(items):
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in matchings(rest):
            yield [(a, items[i])] + m


def brute_hafnian(A):
    return sum(np.prod([A[i, j] for i, j in m]) for m in matchings(list(range(A.shape[0]))))


def random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("n", range(0, 7))
def test_permanent_matches_brute_force(n):
    A = random_complex(np.random.default_rng(n), n)
    expected = brute_permanent(A) if n else 1.0
    assert abs(kernels.permanent(A) - expected) < 1e-9 * max(1.0, abs(expected))
    assert abs(py.permanent(A) - expected) < 1e-9 * max(1.0, abs(expected))


@pytest.mark.parametrize("n", [0, 2, 4, 6, 8])
def test_hafnian_matches_brute_force(n):
    rng = np.random.default_rng(10 + n)
    A = random_complex(rng, n)
    A = A + A.T
    expected = brute_hafnian(A) if n else 1.0
    assert abs(kernels.hafnian(A) - expected) < 1e-9 * max(1.0, abs(expected))
    assert abs(py.hafnian(A) - expected) < 1e-9 * max(1.0, abs(expected))


def test_hafnian_odd_is_zero():
    assert kernels.hafnian(np.ones((3, 3))) == 0


def test_permanent_of_ones_is_factorial():
    assert kernels.permanent(np.ones((6, 6))).real == pytest.approx(720.0)


def test_count_flips_examples():
    assert kernels.count_flips([-1.0, 1.0]) == (1, 0)
    assert kernels.count_flips([1.0, 0.0, -1.0]) == (0, 1)
    assert kernels.count_flips([1.0, -1.0, 1.0]) == (2, 0)


def test_winding_of_identity_on_circle():
    z = np.exp(2j * math.pi * np.arange(64) / 64)
    turns, step = kernels.winding(z ** 3)
    assert turns == pytest.approx(3.0)
    assert step == pytest.approx(3 * 2 * math.pi / 64)


def test_eval_field_conjugation_is_exact():
    rng = np.random.default_rng(1)
    lam, a, b = rng.uniform(0.1, 3, 40), rng.standard_normal(40), rng.standard_normal(40)
    x, y = rng.uniform(-5, 5, 30), rng.uniform(-0.5, 0.5, 30)
    f = kernels.eval_field(lam, a, b, x, y)
    g = kernels.eval_field(lam, a, b, x, -y)
    assert np.array_equal(g, np.conj(f))


def test_eval_field_matches_complex_trig():
    rng = np.random.default_rng(2)
    lam, a, b = rng.uniform(0.1, 3, 20), rng.standard_normal(20), rng.standard_normal(20)
    z = rng.uniform(-3, 3, 10) + 1j * rng.uniform(-0.4, 0.4, 10)
    expected = np.cos(np.outer(z, lam)) @ a + np.sin(np.outer(z, lam)) @ b
    assert np.allclose(kernels.eval_field(lam, a, b, z.real, z.imag), expected, atol=1e-12)


def test_refine_roots_finds_sine_zero():
    lam, a, b = np.array([1.0]), np.array([0.0]), np.array([1.0])
    root = kernels.refine_roots(lam, a, b, [3.0], [3.3], 60)
    assert root[0] == pytest.approx(math.pi, abs=1e-12)


# -- parity between backends ------------------------------------------------

@needs_compiled
@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(0, 50), elements=finite))
def test_parity_count_flips(v):
    assert compiled.count_flips(np.ascontiguousarray(v)) == py.count_flips(v)


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 5)), elements=finite))
def test_parity_count_flips_columns(x):
    assert np.array_equal(compiled.count_flips_columns(np.ascontiguousarray(x)),
                          py.count_flips_columns(x))


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_parity_trig_and_field(m, seed):
    rng = np.random.default_rng(seed)
    lam, a, b = rng.uniform(0, 5, m), rng.standard_normal(m), rng.standard_normal(m)
    x, y = rng.uniform(-10, 10, 17), rng.uniform(-1, 1, 17)
    assert np.allclose(compiled.trig_sum(lam, a, b, x), py.trig_sum(lam, a, b, x),
                       rtol=1e-12, atol=1e-11)
    assert np.allclose(compiled.eval_field(lam, a, b, x, y), py.eval_field(lam, a, b, x, y),
                       rtol=1e-12, atol=1e-11)


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parity_winding(seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    t1, s1 = compiled.winding(f)
    t2, s2 = py.winding(f)
    assert t1 == pytest.approx(t2, abs=1e-12)
    assert s1 == pytest.approx(s2, abs=1e-12)


@needs_compiled
@settings(max_examples=20, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_parity_permanent_hafnian(n, seed):
    A = random_complex(np.random.default_rng(seed), n)
    assert abs(compiled.permanent(A) - py.permanent(A)) < 1e-9 * max(1, abs(py.permanent(A)))
    B = A + A.T
    if n % 2 == 0:
        assert abs(compiled.hafnian(B) - py.hafnian(B)) < 1e-9 * max(1, abs(py.hafnian(B)))


@needs_compiled
def test_parity_refine_roots():
    rng = np.random.default_rng(5)
    lam, a, b = rng.uniform(0.1, 2, 10), rng.standard_normal(10), rng.standard_normal(10)
    t = np.linspace(0, 20, 801)
    v = py.trig_sum(lam, a, b, t)
    cells = np.flatnonzero(v[:-1] * v[1:] < 0)
    left, right = t[cells], t[cells + 1]
    r1 = compiled.refine_roots(lam, a, b, left, right, 45)
    r2 = py.refine_roots(lam, a, b, left, right, 45)
    assert np.allclose(r1, r2, atol=1e-11)
    assert np.all(np.abs(py.trig_sum(lam, a, b, r1)) < 1e-9)


@pytest.mark.parametrize("impl", ["compiled", "python"])
def test_flips_survive_product_underflow(impl):
    mod = kernels.compiled_impl if impl == "compiled" else kernels.python_impl
    if mod is None:
        pytest.skip("compiled kernels not built")
    v = np.array([-1e-200, 1e-200, 0.0, -1e-300])
    assert mod.count_flips(v) == (1, 1)
    col = np.ascontiguousarray(np.column_stack([v, -v]))
    assert mod.count_flips_columns(col).tolist() == [1, 1]
