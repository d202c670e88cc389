import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from pftl.model import (Ctmc, Dtmc, ModelError, bscc_decompose, mat_power_apply, poisson_truncate,
                        strongly_connected_components, transient_apply, uniformize, validate_model)

import oracles


def two_state_ctmc(a=2.0, b=1.0):
    return Ctmc.from_transitions(2, 0, [(0, 1, a), (1, 0, b)])


class TestValidate:
    def test_stochastic_row_is_valid(self):
        d = Dtmc.from_transitions(2, 0, [(0, 0, 0.5), (0, 1, 0.5), (1, 1, 1.0)])
        assert validate_model(d) == []

    def test_row_sum_violation_names_state(self):
        d = Dtmc.from_transitions(2, 0, [(0, 0, 0.5), (0, 1, 0.4), (1, 1, 1.0)])
        problems = validate_model(d)
        assert len(problems) == 1 and "state 0" in problems[0] and "row-sum" in problems[0]

    def test_negative_rate(self):
        c = Ctmc.from_transitions(2, 0, [(0, 1, -1.0), (1, 0, 1.0)])
        assert any("rate-sign" in p for p in validate_model(c))

    def test_exit_rate_mismatch(self):
        c = two_state_ctmc()
        bad = Ctmc(c.num_states, c.initial, c.indptr, c.indices, c.values, c.labels, np.array([5.0, 1.0]))
        assert any("exit rate" in p for p in validate_model(bad))

    def test_zero_entries_dropped(self):
        d = Dtmc.from_transitions(2, 0, [(0, 0, 0.0), (0, 1, 1.0), (1, 1, 1.0)])
        assert d.row(0) == [(1, 1.0)]

    def test_out_of_range_transition(self):
        with pytest.raises(ModelError):
            Dtmc.from_transitions(2, 0, [(0, 2, 1.0)])


class TestUniformize:
    def test_max_exit_rate(self):
        unif, lam = uniformize(two_state_ctmc())
        assert lam == 2.0
        np.testing.assert_allclose(unif.dense(), [[0, 1], [0.5, 0.5]])

    def test_larger_rate(self):
        unif, lam = uniformize(two_state_ctmc(), 4.0)
        np.testing.assert_allclose(unif.dense(), [[0.5, 0.5], [0.25, 0.75]])

    def test_absorbing_state_identity_row(self):
        c = Ctmc.from_transitions(2, 0, [(0, 1, 1.0)])
        unif, _ = uniformize(c, 1.0)
        assert unif.row(1) == [(1, 1.0)]

    def test_rate_below_max_rejected(self):
        with pytest.raises(ModelError):
            uniformize(two_state_ctmc(), 1.0)

    def test_labels_and_initial_kept(self):
        c = Ctmc.from_transitions(2, 1, [(0, 1, 2.0), (1, 0, 1.0)], {0: {"a"}})
        unif, _ = uniformize(c)
        assert unif.initial == 1 and unif.labels == c.labels


class TestPoisson:
    def test_zero(self):
        w = poisson_truncate(0.0, 1e-10)
        assert (w.left, w.right) == (0, 0) and w[0] == 1.0

    def test_unit_rate(self):
        w = poisson_truncate(1.0, 1e-10)
        assert w.total >= 1 - 1e-10
        assert w[0] == pytest.approx(math.exp(-1), rel=1e-9)

    def test_mode_at_hundred(self):
        w = poisson_truncate(100.0, 1e-10)
        direct = [math.exp(-100 + n * math.log(100) - math.lgamma(n + 1)) for n in range(260)]
        assert int(np.argmax(direct)) in (99, 100)
        assert w.left + int(np.argmax(w.weights)) in (99, 100)
        for n in range(w.left, w.right + 1):
            assert w[n] == pytest.approx(direct[n], rel=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(lam=st.floats(0.0, 2000.0), eps=st.sampled_from([1e-4, 1e-8, 1e-12]))
    def test_mass_and_width(self, lam, eps):
        w = poisson_truncate(lam, eps)
        assert w.total >= 1 - eps - 1e-12
        assert w.right <= lam + 10 * math.sqrt(lam) + 30


class TestTransient:
    def test_time_zero_identity(self):
        v = np.array([0.3, 0.7])
        np.testing.assert_array_equal(transient_apply(two_state_ctmc(), 0.0, v), v)

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_absorbing_two_state(self, t):
        c = Ctmc.from_transitions(2, 0, [(0, 1, 1.0)])
        out = transient_apply(c, t, [0.0, 1.0], 1e-10)
        assert out[0] == pytest.approx(1 - math.exp(-t), abs=1e-8)

    def test_matches_expm(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            c = oracles.random_ctmc(rng, 5)
            v = rng.random(5)
            t = float(rng.uniform(0.1, 5))
            np.testing.assert_allclose(transient_apply(c, t, v, 1e-12),
                                       scipy.linalg.expm(c.generator() * t) @ v, atol=1e-9)

    def test_mat_power(self):
        d = Dtmc.from_dense([[0.5, 0.5], [0.2, 0.8]])
        v = np.array([1.0, 0.0])
        np.testing.assert_allclose(mat_power_apply(d, 5, v), np.linalg.matrix_power(d.dense(), 5) @ v)


def _reach(adj, s):
    seen, todo = {s}, [s]
    while todo:
        x = todo.pop()
        for y in np.flatnonzero(adj[x]):
            if y not in seen:
                seen.add(int(y))
                todo.append(int(y))
    return seen


class TestScc:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 9).flatmap(lambda n: st.lists(st.lists(st.booleans(), min_size=n, max_size=n),
                                                       min_size=n, max_size=n)))
    def test_components_match_mutual_reachability(self, rows):
        adj = np.array(rows, dtype=bool)
        n = adj.shape[0]
        trans = [(s, t, 1.0) for s in range(n) for t in range(n) if adj[s, t]]
        d = Dtmc.from_transitions(n, 0, trans)
        comps = strongly_connected_components(n, d.indptr, d.indices)
        reach = [_reach(adj, s) for s in range(n)]
        expected = {frozenset(t for t in range(n) if t in reach[s] and s in reach[t]) for s in range(n)}
        assert {frozenset(c) for c in comps} == expected
        assert sorted(x for c in comps for x in c) == list(range(n))

    def test_bsccs(self):
        d = Dtmc.from_transitions(5, 0, [(0, 1, 0.5), (0, 3, 0.5), (1, 2, 1.0), (2, 1, 1.0),
                                         (3, 3, 1.0), (4, 0, 1.0)])
        nonbscc, bsccs = bscc_decompose(d)
        assert nonbscc == {0, 4}
        assert bsccs == [frozenset({1, 2}), frozenset({3})]
