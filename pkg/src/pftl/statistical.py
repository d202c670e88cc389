"""Statistical checking of bounded path formulae with Wald's sequential test.

Paths are sampled, each is checked exactly (counting on discrete paths,
interval sets on timed paths), and the verdict stream feeds a sequential
probability ratio test.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .formula import (And, Atom, Comparator, Embed, Freq, Not, PathAnd, PathNot,
                      TimeInterval, TrueF, Until, exact, format_formula, is_bounded_ltl_like,
                      normalize_interval, total_bound)
from .intervals import Interval, IntervalSet
from .model import Ctmc, Dtmc
from .simulation import DiscretePath, RandomSource, TimedPath, sample_discrete_prefix, sample_timed_prefix


class SprtConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the sequential test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SprtConfig:
    alpha: float = 0.01
    beta: float = 0.01
    delta: float = 0.01
    max_samples: int = 1_000_000

    def validate(self, p: float) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise SprtConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.delta <= 0:
            raise SprtConfigError(f"delta must be positive, got {self.delta}")
        if not (0 < p - self.delta and p + self.delta < 1):
            raise SprtConfigError(
                f"indifference region ({p - self.delta:g}, {p + self.delta:g}) must lie inside (0, 1)")
        if self.max_samples < 1:
            raise SprtConfigError("max_samples must be at least 1")


def log_likelihood_ratio(p: float, delta: float, n: int, m: int) -> float:
    """``log`` of ``(p+d)^m (1-p-d)^(n-m) / ((p-d)^m (1-p+d)^(n-m))``."""
    return m * math.log((p + delta) / (p - delta)) + (n - m) * math.log((1 - p - delta) / (1 - p + delta))


@dataclass
class SprtState:
    n: int = 0
    m: int = 0
    log_lambda: float = 0.0


class Sprt:
    """One running test of ``P cmp p``; ``observe`` returns the verdict once decided."""

    def __init__(self, p: float, cmp: Comparator, config: SprtConfig):
        config.validate(p)
        self.p, self.cmp, self.config = float(p), cmp, config
        self.state = SprtState()
        self._up = math.log((p + config.delta) / (p - config.delta))
        self._down = math.log((1 - p - config.delta) / (1 - p + config.delta))
        self.accept_h0 = math.log((1 - config.beta) / config.alpha)
        self.accept_h1 = math.log(config.beta / (1 - config.alpha))

    def observe(self, satisfied: bool) -> str | None:
        st = self.state
        st.n += 1
        if satisfied:
            st.m += 1
        st.log_lambda = st.m * self._up + (st.n - st.m) * self._down
        if st.log_lambda > self.accept_h0:
            return self._verdict(True)
        if st.log_lambda < self.accept_h1:
            return self._verdict(False)
        if st.n >= self.config.max_samples:
            return "inconclusive"
        return None

    def _verdict(self, h0: bool) -> str:
        # H0 says the success probability exceeds p; lower-bound comparators read it directly
        holds = h0 if self.cmp.upper else not h0
        return "holds" if holds else "fails"


@dataclass(frozen=True)
class SprtResult:
    verdict: str
    samples_used: int
    m: int
    log_lambda: float


def sprt_run(p: float, cmp: Comparator, config: SprtConfig, verdicts: Iterable[bool]) -> SprtResult:
    test = Sprt(p, cmp, config)
    decision = None
    for v in verdicts:
        decision = test.observe(bool(v))
        if decision is not None:
            break
    if decision is None:
        decision = "inconclusive"
    st = test.state
    return SprtResult(decision, st.n, st.m, st.log_lambda)


# ---------------------------------------------------------------------------
# discrete-time paths
# ---------------------------------------------------------------------------


def _window_counts(prefix: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Number of true entries in ``[lo, hi]`` (clipped) from an exclusive prefix-sum array."""
    size = prefix.shape[0] - 1
    lo = np.clip(lo, 0, size)
    hi = np.clip(hi + 1, 0, size)
    return np.maximum(prefix[hi] - prefix[lo], 0)


def _prefix(arr: np.ndarray) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(arr, dtype=np.int64)))


def _state_truth(model, phi, states) -> np.ndarray:
    if isinstance(phi, Atom):
        if isinstance(model, (Dtmc, Ctmc)):
            return model.atom_mask(phi.name)[np.asarray(states, dtype=np.int64)]
        return np.array([phi.name in model.labels_of(s) for s in states], dtype=bool)
    if isinstance(phi, TrueF):
        return np.ones(len(states), dtype=bool)
    if isinstance(phi, Not):
        return ~_state_truth(model, phi.sub, states)
    if isinstance(phi, And):
        return _state_truth(model, phi.left, states) & _state_truth(model, phi.right, states)
    raise TypeError(f"unsupported state formula on a path: {format_formula(phi)}")


def discrete_truth(model, psi, states) -> np.ndarray:
    """Truth of ``psi`` on every suffix of the path (suffixes near the end see a truncated future)."""
    if isinstance(psi, Embed):
        return _state_truth(model, psi.state, states)
    if isinstance(psi, PathNot):
        return ~discrete_truth(model, psi.sub, states)
    if isinstance(psi, PathAnd):
        return discrete_truth(model, psi.left, states) & discrete_truth(model, psi.right, states)
    pos = np.arange(len(states))
    lo = pos + int(psi.interval.lo)
    hi = pos + int(psi.interval.hi)
    if isinstance(psi, Until):
        left = discrete_truth(model, psi.left, states)
        right = discrete_truth(model, psi.right, states)
        # first position at or after each index where the left operand fails
        fails = np.append(np.flatnonzero(~left), len(states))
        first_fail = fails[np.searchsorted(fails, pos)]
        return _window_counts(_prefix(right), lo, np.minimum(hi, first_fail)) > 0
    if isinstance(psi, Freq):
        right = discrete_truth(model, psi.right, states)
        both = right & discrete_truth(model, psi.left, states)
        cond = _window_counts(_prefix(right), lo, hi)
        hits = _window_counts(_prefix(both), lo, hi)
        fq = exact(psi.q)
        ok = psi.cmp.holds(hits * fq.denominator, cond * fq.numerator)
        return (cond == 0) | ok
    raise TypeError(f"unsupported path formula: {format_formula(psi)}")


def check_path_discrete(path: DiscretePath, psi, model) -> bool:
    """Whether the path prefix satisfies the bounded formula ``psi`` at position 0."""
    return bool(discrete_truth(model, _discrete_intervals(psi), path.states)[0])


def _discrete_intervals(psi):
    """Rewrite every interval to its integer closed form."""
    if isinstance(psi, Embed):
        return psi
    if isinstance(psi, PathNot):
        return PathNot(_discrete_intervals(psi.sub))
    if isinstance(psi, PathAnd):
        return PathAnd(_discrete_intervals(psi.left), _discrete_intervals(psi.right))
    iv = normalize_interval(psi.interval, "discrete")
    if isinstance(psi, Until):
        return Until(_discrete_intervals(psi.left), _discrete_intervals(psi.right), iv)
    if isinstance(psi, Freq):
        return Freq(psi.cmp, psi.q, iv, _discrete_intervals(psi.left), _discrete_intervals(psi.right))
    raise TypeError(f"unsupported path formula: {format_formula(psi)}")


# ---------------------------------------------------------------------------
# continuous-time paths: satisfaction interval sets
# ---------------------------------------------------------------------------


def satint_state(path: TimedPath, model, phi, k_total: float) -> IntervalSet:
    """Times in ``[0, k_total]`` at which the path sits in a state satisfying ``phi``."""
    truth = _state_truth(model, phi, path.states)
    starts = path.entry_times()
    ends = starts + np.asarray(path.durations)
    return IntervalSet(Interval(float(a), float(b), True, False)
                       for a, b, ok in zip(starts, ends, truth) if ok).clip(0.0, k_total)


def satint_atomic(path: TimedPath, model, name: str, k_total: float) -> IntervalSet:
    return satint_state(path, model, Atom(name), k_total)


def satint_not(s: IntervalSet, k_total: float) -> IntervalSet:
    return s.complement(0.0, k_total)


def satint_and(s1: IntervalSet, s2: IntervalSet) -> IntervalSet:
    return s1.intersect(s2)


def _window(interval: TimeInterval) -> Interval:
    return Interval(float(interval.lo), float(interval.hi), interval.lo_closed, interval.hi_closed)


def satint_until(s1: IntervalSet, s2: IntervalSet, interval: TimeInterval, k_total: float) -> IntervalSet:
    """Start times from which ``s2`` is reached within ``interval`` while staying in ``s1``."""
    if not interval.bounded:
        raise ValueError("until needs a bounded interval here")
    out = []
    for left in s1:
        reach = Interval(left.lo, left.hi, left.lo_closed, True)  # I_i plus its supremum
        start = Interval(left.lo, left.hi, True, left.hi_closed)  # I_i plus its infimum
        for idx in s2.overlapping(left.lo, left.hi):
            y = reach.intersect(s2.intervals[idx])
            if y.empty:
                continue
            x = Interval(y.lo - interval.hi, y.hi - interval.lo,
                         y.lo_closed and interval.hi_closed, y.hi_closed and interval.lo_closed)
            hit = x.intersect(start)
            if not hit.empty:
                out.append(hit)
    result = IntervalSet(out)
    if interval.contains(0.0):
        result = result.union(s2)
    return result.clip(0.0, k_total)


def _window_share(s12: IntervalSet, s2: IntervalSet, window: Interval, t: float):
    """``(hits, cond)`` inside ``window + t``: measures, or point counts when ``s2`` has no length there."""
    w = window.shift(t)
    cond = s2.measure_in(w.lo, w.hi)
    if cond > 0:
        return s12.measure_in(w.lo, w.hi), cond
    return s12.points_in(w), s2.points_in(w)


def frequency_at(s12: IntervalSet, s2: IntervalSet, window: Interval, t: float):
    """Frequency of ``s12`` among ``s2`` inside ``window + t``; ``None`` when undefined."""
    hits, cond = _window_share(s12, s2, window, t)
    return hits / cond if cond else None


def _freq_ok(cmp: Comparator, q: Fraction, hits: float, cond: float) -> bool:
    """Exact ``hits / cond (cmp) q``; floats only decide clear cases."""
    qf = float(q)
    gap = hits - qf * cond
    if abs(gap) > 1e-9 * max(cond, 1.0):
        return cmp.holds(gap, 0.0)
    return cmp.holds(Fraction(hits) * q.denominator, Fraction(cond) * q.numerator)


def _share_ok(cmp: Comparator, q: Fraction, share) -> bool:
    hits, cond = share
    return cond == 0 or _freq_ok(cmp, q, hits, cond)


def satint_q(s12: IntervalSet, s2: IntervalSet, cmp: Comparator, q: float,
             interval: TimeInterval, k_total: float) -> IntervalSet:
    """Times ``t`` at which the frequency of ``s12`` among ``s2`` over ``interval + t`` obeys ``cmp q``.

    ``s12`` must be a subset of ``s2``. The result lives in ``[0, k_total - sup interval]``.
    """
    if not interval.bounded:
        raise ValueError("frequency operator needs a bounded interval here")
    if interval.lo == interval.hi and not (interval.lo_closed and interval.hi_closed):
        return IntervalSet.full(k_total - float(interval.hi))  # empty window: no condition points
    q = float(q)
    lo, k = float(interval.lo), float(interval.hi)
    if k == 0:
        # point window: a conditional on the current instant
        not2 = satint_not(s2, k_total)
        if cmp.holds(1, q) and cmp.holds(0, q):
            return IntervalSet.full(k_total)
        if cmp.holds(1, q):
            return not2.union(s12)
        if cmp.holds(0, q):
            return not2.union(s2.intersect(satint_not(s12, k_total)))
        return not2
    if lo > 0:
        inner = TimeInterval(0.0, k - lo, interval.lo_closed, interval.hi_closed)
        return satint_q(s12, s2, cmp, q, inner, k_total).shift(-lo).clip(0.0, k_total - k)
    return _satint_q_window(s12, s2, cmp, exact(q), _window(interval), k_total)


def nondif_points(s12: IntervalSet, s2: IntervalSet, k: float, k_total: float) -> list[float]:
    end = k_total - k
    pts = {0.0, end}
    for iv in tuple(s12) + tuple(s2):
        for x in (iv.lo - k, iv.lo, iv.hi - k, iv.hi):
            if 0.0 <= x <= end:
                pts.add(x)
    return sorted(pts)


def _satint_q_window(s12, s2, cmp, q, window: Interval, k_total: float) -> IntervalSet:
    k = window.hi
    end = k_total - k
    if end < 0:
        return IntervalSet()
    pts = nondif_points(s12, s2, k, k_total)
    out = []
    for t in pts:
        if _share_ok(cmp, q, _window_share(s12, s2, window, t)):
            out.append(Interval.point(t))
    for a, b in zip(pts, pts[1:]):
        l2a, l2b = s2.measure_in(a, a + k), s2.measure_in(b, b + k)
        l12a, l12b = s12.measure_in(a, a + k), s12.measure_in(b, b + k)
        gap = Interval(a, b, False, False)
        if l2a == 0 and l2b == 0:
            if _share_ok(cmp, q, _window_share(s12, s2, window, 0.5 * (a + b))):
                out.append(gap)
        elif l2a == 0:
            if _freq_ok(cmp, q, l12b, l2b):
                out.append(gap)
        elif l2b == 0:
            if _freq_ok(cmp, q, l12a, l2a):
                out.append(gap)
        else:
            ok_a, ok_b = _freq_ok(cmp, q, l12a, l2a), _freq_ok(cmp, q, l12b, l2b)
            if ok_a and ok_b:
                out.append(gap)
            elif ok_a or ok_b:
                qf = float(q)
                slope12, slope2 = (l12b - l12a) / (b - a), (l2b - l2a) / (b - a)
                denom = slope12 - qf * slope2
                # a zero float slope means the exact tie sits within rounding of an end
                cross = (b if ok_a else a) if denom == 0 else min(max(a + (qf * l2a - l12a) / denom, a), b)
                if ok_a:
                    out.append(Interval(a, cross, False, False))
                else:
                    out.append(Interval(cross, b, False, False))
                if not cmp.strict and a < cross < b:
                    out.append(Interval.point(cross))
    return IntervalSet(out).clip(0.0, end)


def satint(path: TimedPath, model, psi, k_total: float) -> IntervalSet:
    if isinstance(psi, Embed):
        return satint_state(path, model, psi.state, k_total)
    if isinstance(psi, PathNot):
        return satint_not(satint(path, model, psi.sub, k_total), k_total)
    if isinstance(psi, PathAnd):
        return satint_and(satint(path, model, psi.left, k_total), satint(path, model, psi.right, k_total))
    if isinstance(psi, Until):
        return satint_until(satint(path, model, psi.left, k_total),
                            satint(path, model, psi.right, k_total), psi.interval, k_total)
    if isinstance(psi, Freq):
        s2 = satint(path, model, psi.right, k_total)
        s12 = satint_and(satint(path, model, psi.left, k_total), s2)
        return satint_q(s12, s2, psi.cmp, psi.q, psi.interval, k_total)
    raise TypeError(f"unsupported path formula: {format_formula(psi)}")


def check_path_timed(path: TimedPath, psi, model, k_total: float | None = None) -> bool:
    if k_total is None:
        k_total = float(total_bound(psi))
    return satint(path, model, psi, float(k_total)).contains(0.0)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StatisticalResult:
    verdict: str
    samples_used: int
    m: int
    log_lambda: float
    config: SprtConfig
    seed: int
    formula: str

    def to_record(self) -> dict:
        return {"verdict": self.verdict, "samplesUsed": self.samples_used, "m": self.m,
                "logLambda": self.log_lambda,
                "config": {"alpha": self.config.alpha, "beta": self.config.beta,
                           "delta": self.config.delta, "maxSamples": self.config.max_samples},
                "seed": self.seed, "formula": self.formula}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def path_checker(model, psi):
    """Return ``sample(rng) -> bool`` drawing one path and checking ``psi`` on it."""
    horizon = total_bound(psi)
    if model.continuous:
        def sample(rng):
            return check_path_timed(sample_timed_prefix(model, horizon, rng), psi, model, horizon)
    else:
        psi_d = _discrete_intervals(psi)
        steps = int(total_bound(psi_d))

        def sample(rng):
            path = sample_discrete_prefix(model, steps, rng)
            return bool(discrete_truth(model, psi_d, path.states)[0])
    return sample


def run_statistical(model, phi, config: SprtConfig | None = None, seed: int = 0,
                    workers: int | None = None, batch_size: int = 256) -> StatisticalResult:
    """Check a bounded ``P`` formula at the initial state by sequential sampling.

    Path ``i`` always uses the generator for ``(seed, i)`` and verdicts are
    consumed in index order, so the result does not depend on ``workers``.
    """
    config = config or SprtConfig()
    if not is_bounded_ltl_like(phi):
        raise ValueError(f"statistical engine needs P~p[bounded path formula]: {format_formula(phi)}")
    test = Sprt(phi.p, phi.cmp, config)
    sample = path_checker(model, phi.path)
    source = RandomSource(seed)

    def batch(first: int) -> list[bool]:
        last = min(first + batch_size, config.max_samples)
        return [sample(source.path_rng(i)) for i in range(first, last)]

    decision = None
    pool = ThreadPoolExecutor(workers) if workers and workers > 1 else None
    try:
        first = 0
        while decision is None and first < config.max_samples:
            if pool is None:
                chunks = [batch(first)]
                first += batch_size
            else:
                starts = [first + b * batch_size for b in range(workers)]
                starts = [s for s in starts if s < config.max_samples]
                chunks = list(pool.map(batch, starts))
                first = starts[-1] + batch_size
            for chunk in chunks:
                for v in chunk:
                    decision = test.observe(v)
                    if decision is not None:
                        break
                if decision is not None:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    st = test.state
    return StatisticalResult(decision or "inconclusive", st.n, st.m, st.log_lambda, config, seed,
                             format_formula(phi))
