import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pftl.model import Ctmc, Dtmc
from pftl.modelfile import ModelParseError, format_model, parse_model

import oracles

EXAMPLE = """
# two-state availability model
MODEL ctmc
STATES 2
INIT 0
LABELS
  0 up
TRANSITIONS
  0 1 2.0   # failure
  1 0 1.0
"""


def test_parse_example():
    m = parse_model(EXAMPLE)
    assert isinstance(m, Ctmc)
    assert m.labels_of(0) == {"up"} and m.labels_of(1) == frozenset()
    np.testing.assert_allclose(m.exit_rates, [2.0, 1.0])


@pytest.mark.parametrize("text, line", [
    ("MODEL dtmc\nSTATES 2\nINIT 5\n", 3),
    ("MODEL ctmc\nSTATES 2\nINIT 0\nTRANSITIONS\n0 0 1.0\n", 5),
    ("MODEL dtmc\nSTATES 2\nINIT 0\nTRANSITIONS\n0 1 1\n0 1 1\n", 6),
    ("MODEL dtmc\nSTATES 2\nINIT 0\nTRANSITIONS\n0 1 x\n", 5),
    ("MODEL mdp\n", 1),
])
def test_errors_carry_line(text, line):
    with pytest.raises(ModelParseError) as exc:
        parse_model(text)
    assert exc.value.line == line


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 6), continuous=st.booleans())
def test_round_trip(seed, n, continuous):
    rng = np.random.default_rng(seed)
    model = oracles.random_ctmc(rng, n) if continuous else oracles.random_structured_dtmc(rng, n)
    again = parse_model(format_model(model))
    assert type(again) is type(model)
    assert again.labels == model.labels and again.initial == model.initial
    np.testing.assert_array_equal(again.indptr, model.indptr)
    np.testing.assert_array_equal(again.indices, model.indices)
    np.testing.assert_array_equal(again.values, model.values)
