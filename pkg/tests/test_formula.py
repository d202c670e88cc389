import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from pftl.formula import (And, Atom, Comparator, Embed, FormulaError, FormulaSyntaxError, Fragment, Freq,
                          Next, Not, PathAnd, PathNot, Prob, TimeInterval, TrueF, UNBOUNDED, Until,
                          classify_fragment, eventually, format_formula, frequency_holds, globally,
                          mk_and, mk_not, normalize_interval, parse_formula, total_bound)

A, B, C = Atom("a"), Atom("b"), Atom("c")


def test_frequency_example():
    f = parse_formula("P>=0.5 [ Q>0.8[0,10] (a) ]")
    assert f == Prob(Comparator.GE, 0.5, Freq(Comparator.GT, 0.8, TimeInterval.closed(0, 10), Embed(A), Embed(TrueF())))


def test_until_example():
    f = parse_formula("P<0.1 [ a U[2,5] b ]")
    assert f == Prob(Comparator.LT, 0.1, Until(Embed(A), Embed(B), TimeInterval.closed(2, 5)))


def test_globally_desugars():
    f = parse_formula("P>=1 [ G (a) ]")
    assert f.path == PathNot(Until(Embed(TrueF()), Embed(Not(A)), UNBOUNDED))


def test_conditional_and_disjunction_inside_q():
    f = parse_formula("P>=0.5 [ Q>=0.5 [0,5] ((a U[0,2] b) | c) ]")
    assert f.path == Freq(Comparator.GE, 0.5, TimeInterval.closed(0, 5),
                          Until(Embed(A), Embed(B), TimeInterval.closed(0, 2)), Embed(C))
    g = parse_formula("P>=0.5 [ Q>=0.5 ((a | b) | c) ]")
    assert g.path.right == Embed(C)


def test_open_interval_syntax():
    f = parse_formula("P>0.2 [ a U(1,2] b ]")
    assert f.path.interval == TimeInterval(1, 2, False, True)


@pytest.mark.parametrize("text", ["P>=0.5 [ a U b", "P>=2 [ a ]", "a U b", "P>=0.5 [ F[3,1] a ]", "Q>=0.5 (a)"])
def test_rejects(text):
    with pytest.raises(FormulaError):
        parse_formula(text)


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula("P>=0.5 [ a U[0,2 b ]")
    assert exc.value.position == 17


# --- normalization -----------------------------------------------------------


def test_normalize_examples():
    assert normalize_interval(TimeInterval(2, 5, False, True), "discrete") == TimeInterval(3, 5, True, True)
    assert normalize_interval(TimeInterval(0, 10, False, False), "continuous") == TimeInterval.closed(0, 10)
    with pytest.raises(FormulaError):
        normalize_interval(TimeInterval(3, 4, False, False), "discrete")


intervals = st.builds(
    lambda lo, width, lc, hc, inf: TimeInterval(lo, math.inf if inf else lo + width, lc, hc),
    st.sampled_from([0, 0.5, 1, 2, 2.5, 3]), st.sampled_from([0, 0.5, 1, 1.5, 4]),
    st.booleans(), st.booleans(), st.booleans())


@given(intervals, st.sampled_from(["discrete", "continuous"]))
def test_normalize_idempotent(iv, base):
    try:
        once = normalize_interval(iv, base)
    except FormulaError:
        return
    assert normalize_interval(once, base) == once


@given(intervals)
def test_discrete_normalization_keeps_naturals(iv):
    try:
        norm = normalize_interval(iv, "discrete")
    except FormulaError:
        assert not any(iv.contains(n) for n in range(0, 12))
        return
    for n in range(0, 12):
        assert iv.contains(n) == norm.contains(n)


# --- printing round trip ---------------------------------------------------------


def state_formulas(path_strategy):
    atoms = st.sampled_from([A, B, C, Atom("up"), TrueF()])
    return st.recursive(atoms, lambda inner: st.one_of(
        st.builds(Not, inner),
        st.builds(And, inner, inner),
        st.builds(Prob, st.sampled_from(list(Comparator)), st.sampled_from([0, 0.1, 0.5, 1]), path_strategy(inner)),
    ), max_leaves=6)


bounded = st.builds(lambda lo, w, lc, hc: TimeInterval(lo, lo + w, lc, hc),
                    st.sampled_from([0, 1, 0.5]), st.sampled_from([0.5, 2, 3]), st.booleans(), st.booleans())


def path_formulas(state):
    leaf = st.builds(Embed, state)
    return st.recursive(leaf, lambda inner: st.one_of(
        st.builds(mk_not, inner),
        st.builds(mk_and, inner, inner),
        st.builds(Next, inner),
        st.builds(Until, inner, inner, st.one_of(st.just(UNBOUNDED), bounded)),
        st.builds(Freq, st.sampled_from(list(Comparator)), st.sampled_from([0, 0.25, 0.8, 1]),
                  st.one_of(st.just(UNBOUNDED), bounded), inner, inner),
    ), max_leaves=4)


@settings(max_examples=300, deadline=None)
@given(state_formulas(path_formulas))
def test_format_parse_round_trip(f):
    assert parse_formula(format_formula(f)) == f


# --- derived operators agree with their truth tables ---------------------------------


def evaluate(f, val):
    if isinstance(f, Atom):
        return val[f.name]
    if isinstance(f, TrueF):
        return True
    if isinstance(f, Not):
        return not evaluate(f.sub, val)
    if isinstance(f, And):
        return evaluate(f.left, val) and evaluate(f.right, val)
    raise TypeError(f)


@pytest.mark.parametrize("text, fn", [
    ("a | b", lambda a, b, c: a or b),
    ("a -> b", lambda a, b, c: (not a) or b),
    ("a -> b -> c", lambda a, b, c: (not a) or ((not b) or c)),
    ("!a & b | c", lambda a, b, c: ((not a) and b) or c),
    ("false | a", lambda a, b, c: a),
])
def test_desugaring_truth_table(text, fn):
    f = parse_formula(f"P>=0.5 [ X ({text}) ]").path.sub.state
    for a, b, c in itertools.product([False, True], repeat=3):
        assert evaluate(f, {"a": a, "b": b, "c": c}) == fn(a, b, c)


def test_eventually_globally_builders():
    assert eventually(A) == Until(Embed(TrueF()), Embed(A))
    assert globally(A) == PathNot(Until(Embed(TrueF()), Embed(Not(A))))


# --- fragments and bounds ----------------------------------------------------------


@pytest.mark.parametrize("text, frag", [
    ("P>=0.5 [ Q>=0.5 (a | b) ]", Fragment.CTL_LIKE),
    ("P>=0.5 [ Q>=0.5 [0,5] ((a U[0,2] b) | c) ]", Fragment.BOUNDED_LTL_LIKE),
    ("P>0.3 [ !(a U b) & F[1,2] c ]", Fragment.NEITHER),
    ("P>=0.5 [ X a & F[0,1] b ]", Fragment.NEITHER),
    ("P>=1 [ a U[0,3] b ]", Fragment.CTL_LIKE),
    ("P>=0.5 [ a U[0,3] P>0.5 [ X b ] ]", Fragment.CTL_LIKE),
    ("P>=0.5 [ Q>=0.5 [0,3] ((a U[0,3] P>0.5 [ X b ]) | c) ]", Fragment.NEITHER),
])
def test_classify(text, frag):
    assert classify_fragment(parse_formula(text)) is frag


def test_nested_probability_in_unbounded_q():
    # A CTL-like shape: the nested P is a state formula under Q, which the numerical engine handles
    assert classify_fragment(parse_formula("P>=0.5 [ Q>=0.5 (P>=0.1 [ X a ]) ]")) is Fragment.CTL_LIKE


@pytest.mark.parametrize("text, bound", [
    ("P>0.5 [ a U[0,3] b ]", 3),
    ("P>0.5 [ Q>=0.5 [0,10] ((a U[0,2] b) | c) ]", 12),
    ("P>0.5 [ a ]", 0),
])
def test_total_bound(text, bound):
    assert total_bound(parse_formula(text).path) == bound


def test_total_bound_rejects_unbounded():
    with pytest.raises(FormulaError):
        total_bound(parse_formula("P>0.5 [ F a ]").path)


@settings(max_examples=100, deadline=None)
@given(path_formulas(st.sampled_from([A, B])), path_formulas(st.sampled_from([A, C])))
def test_total_bound_monotone(p1, p2):
    try:
        b1, b2 = total_bound(p1), total_bound(p2)
    except FormulaError:
        return
    assert total_bound(mk_and(p1, p2)) == max(b1, b2)
    assert total_bound(mk_not(p1)) == b1
    u = Until(p1, p2, TimeInterval.closed(0, 2))
    assert total_bound(u) == 2 + max(b1, b2) >= max(b1, b2)


@pytest.mark.parametrize("cmp, q, hits, total, expected", [
    (Comparator.GE, 0.5, 1, 2, True),
    (Comparator.GT, 0.5, 1, 2, False),
    (Comparator.LE, 0.1, 1, 10, True),
    (Comparator.LT, 0.3, 3, 10, False),
    (Comparator.GE, 0.7, 0, 0, True),
])
def test_frequency_holds_exact(cmp, q, hits, total, expected):
    assert frequency_holds(cmp, q, hits, total) is expected
