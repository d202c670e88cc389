import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pftl import _kernels
from pftl.numerical import _vtable_base, state_classes

import oracles

needs_numba = pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not installed")


@needs_numba
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 8), steps=st.integers(1, 6))
def test_count_step_backends_agree(seed, n, steps):
    rng = np.random.default_rng(seed)
    d = oracles.random_structured_dtmc(rng, n)
    cls = state_classes(rng.random(n) < 0.5, rng.random(n) < 0.6)
    active = rng.random(n) < 0.8
    a = b = _vtable_base(cls)
    for _ in range(steps):
        a = _kernels.count_step_numpy(d.indptr, d.indices, d.values, cls, active, a)
        b = _kernels.count_step_numba(d.indptr, d.indices, d.values, cls, active, b)
        np.testing.assert_allclose(a, b, atol=1e-15)


@needs_numba
@pytest.mark.parametrize("dense", [True, False])
def test_count_step_backends_agree_on_large_chains(dense):
    rng = np.random.default_rng(3)
    n = 60
    d = oracles.random_dense_dtmc(rng, n) if dense else oracles.random_structured_dtmc(rng, n)
    cls = state_classes(rng.random(n) < 0.5, rng.random(n) < 0.6)
    active = rng.random(n) < 0.9
    a = b = _vtable_base(cls)
    for _ in range(8):
        a = _kernels.count_step_numpy(d.indptr, d.indices, d.values, cls, active, a)
        b = _kernels.count_step_numba(d.indptr, d.indices, d.values, cls, active, b)
        np.testing.assert_allclose(a, b, atol=1e-14)


@needs_numba
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 8), steps=st.integers(0, 50))
def test_walk_discrete_backends_agree(seed, n, steps):
    rng = np.random.default_rng(seed)
    d = oracles.random_structured_dtmc(rng, n)
    u = rng.random(steps)
    a = _kernels.walk_discrete_numpy(d.indptr, d.indices, d.cumulative, d.initial, u)
    b = _kernels.walk_discrete_numba(d.indptr, d.indices, d.cumulative, d.initial, u)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[1] == b[1]


@needs_numba
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 6), horizon=st.floats(0, 20), cap=st.integers(1, 40))
def test_walk_timed_backends_agree(seed, n, horizon, cap):
    rng = np.random.default_rng(seed)
    c = oracles.random_ctmc(rng, n, density=0.5)
    uc, ut = rng.random(cap), 1.0 - rng.random(cap)
    args = (c.indptr, c.indices, c.cumulative, c.exit_rates, c.initial, 0.0, horizon, uc, ut)
    a = _kernels.walk_timed_numpy(*args)
    b = _kernels.walk_timed_numba(*args)
    np.testing.assert_array_equal(a[0], b[0])
    # compiled and numpy logarithms may differ in the last bit
    np.testing.assert_allclose(a[1], b[1], rtol=1e-14)
    assert a[2] == pytest.approx(b[2], rel=1e-14) and a[3] == b[3]


def test_count_step_keeps_mass():
    rng = np.random.default_rng(0)
    d = oracles.random_dense_dtmc(rng, 5)
    cls = state_classes(rng.random(5) < 0.5, rng.random(5) < 0.5)
    layer = _vtable_base(cls)
    for _ in range(10):
        layer = _kernels.count_step(d.indptr, d.indices, d.values, cls, np.ones(5, bool), layer)
    np.testing.assert_allclose(layer.sum(axis=(1, 2)), 1.0)


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("", "numba" if _kernels.NUMBA_AVAILABLE else "numpy")])
def test_environment_flag_selects_backend(flag, expected):
    env = dict(os.environ, PFTL_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from pftl import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
