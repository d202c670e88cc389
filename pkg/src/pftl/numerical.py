"""Exact model checking of the CTL-like fragment on finite explicit chains.

Satisfaction sets are boolean vectors over the states. Probabilities for
``X``/``U`` follow the usual PCTL/CSL procedures; the frequency operator is
evaluated with visit-count tables (``v`` for bounded windows, ``u`` for the
transient prefix of unbounded windows) and, for continuous time, with the
binomial spent-time weights of :func:`binom_bound`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from . import _kernels
from .formula import (And, Atom, Comparator, Embed, Fragment, Freq, Next, Not, Prob, PathNot,
                      TimeInterval, TrueF, Until, classify_fragment, exact, format_formula,
                      frequency_holds, normalize_interval)
from .model import (Ctmc, Dtmc, Model, bscc_decompose, mat_power_apply, poisson_truncate,
                    transient_apply, uniformize)


class FragmentError(ValueError):
    """The formula lies outside the fragment an engine supports."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to converge or met a singular system."""


@dataclass(frozen=True)
class CheckOptions:
    epsilon: float = 1e-10  # Poisson truncation error
    max_iterations: int = 100_000  # cap on u-table steps
    residual: float = 1e-9  # mass allowed to remain in the transient states
    tolerance: float = 1e-9  # probabilities this close to a bound count as equal
    uniformization_rate: float | None = None


# ---------------------------------------------------------------------------
# count tables
# ---------------------------------------------------------------------------


def state_classes(sat1, sat2) -> np.ndarray:
    """0: condition fails, 1: condition only, 2: condition and event."""
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    cls = np.zeros(sat1.shape[0], dtype=np.int64)
    cls[sat2] = _kernels.ONLY_COND
    cls[sat2 & sat1] = _kernels.BOTH
    return cls


@dataclass
class CountTable:
    """Layer ``horizon`` of a count table: ``table[s, j, i]``.

    ``i`` counts visits to condition states, ``j`` visits to states where
    event and condition both hold.
    """

    horizon: int
    table: np.ndarray
    classes: np.ndarray = field(repr=False)

    def v(self, j: int, i: int) -> np.ndarray:
        m = self.table.shape[1]
        if not (0 <= j < m and 0 <= i < m):
            return np.zeros(self.table.shape[0])
        return self.table[:, j, i]

    def total_mass(self) -> np.ndarray:
        return self.table.sum(axis=(1, 2))


def _vtable_base(cls: np.ndarray) -> np.ndarray:
    n = cls.shape[0]
    base = np.zeros((n, 2, 2))
    base[cls == _kernels.NEITHER, 0, 0] = 1.0
    base[cls == _kernels.ONLY_COND, 0, 1] = 1.0
    base[cls == _kernels.BOTH, 1, 1] = 1.0
    return base


def _layers(dtmc: Dtmc, cls, active, base, step=None):
    """Yield successive count-table layers, starting with ``base`` at horizon 0."""
    step = step or _kernels.count_step
    layer = base
    yield layer
    while True:
        layer = step(dtmc.indptr, dtmc.indices, dtmc.values, cls, active, layer)
        yield layer


def vtable_layers(dtmc: Dtmc, sat1, sat2):
    cls = state_classes(sat1, sat2)
    active = np.ones(dtmc.num_states, dtype=bool)
    return _layers(dtmc, cls, active, _vtable_base(cls))


def compute_vtable(dtmc: Dtmc, sat1, sat2, h: int) -> CountTable:
    """Probabilities of visit counts over the ``h + 1`` states of ``h``-step paths."""
    cls = state_classes(sat1, sat2)
    for depth, layer in enumerate(vtable_layers(dtmc, sat1, sat2)):
        if depth == h:
            return CountTable(h, layer, cls)


def _utable_base(n: int, free_bottom) -> np.ndarray:
    base = np.zeros((n, 2, 2))
    base[np.asarray(free_bottom, dtype=bool), 0, 0] = 1.0
    return base


def _free_bottom_mask(n, bsccs, sat2) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for comp in bsccs:
        idx = np.fromiter(comp, dtype=np.int64)
        if not sat2[idx].any():
            mask[idx] = True
    return mask


def compute_utable(dtmc: Dtmc, sat1, sat2, partition, h: int) -> CountTable:
    """Counts accumulated before first entering a BSCC free of condition states at step ``h``."""
    nonbscc, bsccs = partition
    n = dtmc.num_states
    sat2 = np.asarray(sat2, dtype=bool)
    cls = state_classes(sat1, sat2)
    active = np.zeros(n, dtype=bool)
    active[list(nonbscc)] = True
    base = _utable_base(n, _free_bottom_mask(n, bsccs, sat2))
    for depth, layer in enumerate(_layers(dtmc, cls, active, base)):
        if depth == h:
            return CountTable(h, layer, cls)


def acceptance_mask(cmp: Comparator, q, m: int) -> np.ndarray:
    """``mask[j, i]``: ``j <= i`` and either ``i == 0`` or ``j/i cmp q`` exactly."""
    mask = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(i + 1):
            mask[j, i] = frequency_holds(cmp, q, j, i)
    return mask


def acceptance_column(cmp: Comparator, q, i: int) -> np.ndarray:
    """``col[j]`` for ``j = 0..i``: whether ``j`` hits out of ``i`` meet the bound.

    The accepted ``j`` form a contiguous range whose end is found with
    integer arithmetic, so large ``i`` cost no per-entry rational checks.
    """
    j = np.arange(i + 1)
    if i == 0:
        return np.ones(1, dtype=bool)
    fq = exact(q)
    num, den = i * fq.numerator, fq.denominator  # threshold is num / den
    floor, ceil = num // den, -((-num) // den)
    if cmp is Comparator.GE:
        return j >= ceil
    if cmp is Comparator.GT:
        return j >= floor + 1
    if cmp is Comparator.LE:
        return j <= floor
    return j <= ceil - 1


# ---------------------------------------------------------------------------
# binomial spent-time weights
# ---------------------------------------------------------------------------


def _binom_pmf(n: int, q: float) -> np.ndarray:
    if q <= 0.0:
        pmf = np.zeros(n + 1)
        pmf[0] = 1.0
        return pmf
    if q >= 1.0:
        pmf = np.zeros(n + 1)
        pmf[n] = 1.0
        return pmf
    ls = np.arange(n + 1)
    logc = gammaln(n + 1) - gammaln(ls + 1) - gammaln(n - ls + 1)
    pmf = np.exp(logc + ls * math.log(q) + (n - ls) * math.log1p(-q))
    return pmf / pmf.sum()


def _binom_column(cmp: Comparator, q: float, i: int) -> np.ndarray:
    """``B[cmp q](j, i)`` for ``j = 0..i``."""
    col = np.zeros(i + 1)
    if i == 0:
        col[0] = 1.0
        return col
    pmf = _binom_pmf(i - 1, q)
    upper = np.cumsum(pmf[::-1])[::-1]  # upper[l] = P(L >= l)
    lower = np.cumsum(pmf)  # lower[l] = P(L <= l)
    inner = np.arange(1, i)
    col[1:i] = lower[inner - 1] if cmp.upper else upper[inner]
    col[0] = 1.0 if cmp.holds(0, q) else 0.0
    col[i] = 1.0 if cmp.holds(1, q) else 0.0
    return col


def binom_bound(cmp: Comparator, q: float, j: int, i: int) -> float:
    """Probability that exponential spent times put the frequency ``j``-of-``i`` within ``cmp q``.

    With ``i`` condition states of which ``j`` also satisfy the event, the
    event's share of the condition time is Beta(j, i - j); its CDF is the
    binomial tail ``P(Bin(i - 1, q) >= j)``.
    """
    if not 0 <= j <= i:
        raise ValueError("need 0 <= j <= i")
    return float(_binom_column(cmp, float(q), i)[j])


def binom_table(cmp: Comparator, q: float, m: int) -> np.ndarray:
    """``table[j, i] = binom_bound(cmp, q, j, i)`` for ``0 <= j <= i < m``."""
    table = np.zeros((m, m))
    for i in range(m):
        table[: i + 1, i] = _binom_column(cmp, float(q), i)
    return table


def _reduce(layer: np.ndarray, weights: np.ndarray) -> np.ndarray:
    m = layer.shape[1]
    return np.tensordot(layer, weights[:m, :m], axes=([1, 2], [0, 1]))


# ---------------------------------------------------------------------------
# BSCC analysis
# ---------------------------------------------------------------------------


def limit_distribution(dtmc: Dtmc, states) -> np.ndarray:
    """Stationary distribution of the chain restricted to the closed class ``states``.

    Entries follow the sorted order of ``states``.
    """
    idx = np.array(sorted(states), dtype=np.int64)
    k = idx.shape[0]
    if k == 1:
        return np.ones(1)
    sub = dtmc.matrix[idx][:, idx].toarray()
    system = sub.T - np.eye(k)
    system[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular stationary system on {k} states") from exc
    if np.any(pi < -1e-9):
        raise NumericError("stationary solution has negative entries; states are not a BSCC")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def reach_solve(dtmc: Dtmc, nonbscc, r_bottom: np.ndarray) -> np.ndarray:
    """Solve ``(P_A - I) r_A = -P_{A,rest} r_rest`` for the transient states ``A``.

    ``r_bottom`` gives values on BSCC states; entries on ``A`` are ignored.
    The returned vector covers all states.
    """
    r = np.array(r_bottom, dtype=float)
    a = np.array(sorted(nonbscc), dtype=np.int64)
    if a.size == 0:
        return r
    mask = np.zeros(dtmc.num_states, dtype=bool)
    mask[a] = True
    r[a] = 0.0
    mat = dtmc.matrix
    p_a = mat[a][:, a].toarray()
    rhs = -(mat[a] @ r)
    try:
        r_a = np.linalg.solve(p_a - np.eye(a.size), rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericError("transient system is singular") from exc
    r[a] = np.clip(r_a, 0.0, 1.0)
    return r


@dataclass
class BsccAnalysis:
    nonbscc: frozenset
    bsccs: list
    distributions: list  # per BSCC, aligned with sorted(states)
    accepting: list  # per BSCC: True, False, or None when it has no condition states
    r: np.ndarray


def analyse_bsccs(dtmc: Dtmc, cmp: Comparator, q, sat1, sat2, tol: float = 1e-9) -> BsccAnalysis:
    nonbscc, bsccs = bscc_decompose(dtmc)
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    r_bottom = np.zeros(dtmc.num_states)
    dists, accepting = [], []
    for comp in bsccs:
        idx = np.array(sorted(comp), dtype=np.int64)
        pi = limit_distribution(dtmc, comp)
        dists.append(pi)
        cond = sat2[idx]
        if not cond.any():
            accepting.append(None)
            continue
        ratio = pi[cond & sat1[idx]].sum() / pi[cond].sum()
        ok = cmp.holds_tol(float(ratio), float(q), tol)
        accepting.append(ok)
        if ok:
            r_bottom[idx] = 1.0
    r = reach_solve(dtmc, nonbscc, r_bottom)
    return BsccAnalysis(nonbscc, bsccs, dists, accepting, r)


# ---------------------------------------------------------------------------
# X and U
# ---------------------------------------------------------------------------


def _until_unbounded(dtmc: Dtmc, sat1, sat2) -> np.ndarray:
    n = dtmc.num_states
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    # backward reachability of sat2 through sat1 states
    pred = dtmc.matrix.T.tocsr()
    can = sat2.copy()
    frontier = list(np.flatnonzero(sat2))
    while frontier:
        t = frontier.pop()
        for s in pred.indices[pred.indptr[t]:pred.indptr[t + 1]]:
            if not can[s] and sat1[s]:
                can[s] = True
                frontier.append(s)
    x = sat2.astype(float)
    unknown = np.flatnonzero(can & ~sat2)
    if unknown.size:
        mat = dtmc.matrix
        sub = mat[unknown][:, unknown].toarray()
        rhs = mat[unknown] @ sat2.astype(float)
        x[unknown] = np.linalg.solve(np.eye(unknown.size) - sub, rhs)
    return np.clip(x, 0.0, 1.0)


def _until_dtmc(dtmc: Dtmc, interval: TimeInterval, sat1, sat2) -> np.ndarray:
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    iv = normalize_interval(interval, "discrete")
    k = int(iv.lo)
    if iv.bounded:
        x = sat2.astype(float)
        stay = sat1 & ~sat2
        for _ in range(int(iv.hi) - k):
            x = np.where(sat2, 1.0, np.where(stay, dtmc.matrix @ x, 0.0))
    else:
        x = _until_unbounded(dtmc, sat1, sat2)
    for _ in range(k):
        x = np.where(sat1, dtmc.matrix @ x, 0.0)
    return np.clip(x, 0.0, 1.0)


def _until_ctmc(ctmc: Ctmc, interval: TimeInterval, sat1, sat2, opts: CheckOptions) -> np.ndarray:
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    iv = normalize_interval(interval, "continuous")
    lo, hi = float(iv.lo), float(iv.hi)
    if iv.bounded:
        stop = sat2 | ~sat1
        x = transient_apply(ctmc.with_absorbing(stop), hi - lo, sat2.astype(float), opts.epsilon)
    else:
        unif, _ = uniformize(ctmc, opts.uniformization_rate)
        x = _until_unbounded(unif, sat1, sat2)
    if lo > 0:
        x = transient_apply(ctmc.with_absorbing(~sat1), lo, np.where(sat1, x, 0.0), opts.epsilon)
    return np.clip(x, 0.0, 1.0)


def prob_next(model: Model, sat) -> np.ndarray:
    sat = np.asarray(sat, dtype=float)
    if isinstance(model, Ctmc):
        out = np.zeros(model.num_states)
        moving = model.exit_rates > 0
        out[moving] = (model.matrix @ sat)[moving] / model.exit_rates[moving]
        return np.clip(out, 0.0, 1.0)
    return np.clip(model.matrix @ sat, 0.0, 1.0)


def prob_until(model: Model, interval: TimeInterval, sat1, sat2, opts: CheckOptions | None = None) -> np.ndarray:
    opts = opts or CheckOptions()
    if isinstance(model, Ctmc):
        return _until_ctmc(model, interval, sat1, sat2, opts)
    return _until_dtmc(model, interval, sat1, sat2)


# ---------------------------------------------------------------------------
# the frequency operator
# ---------------------------------------------------------------------------


def prob_q_bounded_dtmc(dtmc: Dtmc, cmp: Comparator, q, interval: TimeInterval, sat1, sat2) -> np.ndarray:
    iv = normalize_interval(interval, "discrete")
    if not iv.bounded:
        raise ValueError("bounded window expected")
    k, h = int(iv.lo), int(iv.hi - iv.lo)
    layer = compute_vtable(dtmc, sat1, sat2, h).table
    mask = acceptance_mask(cmp, q, layer.shape[1]).astype(float)
    x = _reduce(layer, mask)
    return np.clip(mat_power_apply(dtmc, k, x), 0.0, 1.0)


def transient_sum_by_horizon(dtmc: Dtmc, sat1, sat2, bscc: BsccAnalysis, column, opts: CheckOptions):
    """Weighted u-table summed horizon by horizon until the transient mass is below the residual.

    ``column(i)`` gives the weights for ``j = 0..i``. Each horizon costs a
    full count layer, so this route suits chains that leave the transient
    states quickly; it is kept as a reference for :func:`transient_sum_by_count`.
    Returns ``(total, residual, steps)``.
    """
    n = dtmc.num_states
    sat2 = np.asarray(sat2, dtype=bool)
    cls = state_classes(sat1, sat2)
    active = np.zeros(n, dtype=bool)
    active[list(bscc.nonbscc)] = True
    base = _utable_base(n, _free_bottom_mask(n, bscc.bsccs, sat2))
    alive = active.astype(float)
    total = np.zeros(n)
    weights = np.zeros((0, 0))
    for h, layer in enumerate(_layers(dtmc, cls, active, base)):
        m = layer.shape[1]
        if m > weights.shape[0]:
            size = max(2 * weights.shape[0], m, 8)
            weights = np.zeros((size, size))
            for i in range(size):
                weights[: i + 1, i] = column(i)
        total += _reduce(layer, weights)
        if h > 0:
            alive = np.where(active, dtmc.matrix @ alive, 0.0)
        if alive.max(initial=0.0) <= opts.residual:
            return total, float(alive.max(initial=0.0)), h
        if h >= opts.max_iterations:
            raise NumericError(
                f"u-table sum did not converge: transient mass {alive.max():.3g} after {h} steps "
                f"(residual target {opts.residual:g}); raise max_iterations")


def transient_sum_by_count(dtmc: Dtmc, sat1, sat2, bscc: BsccAnalysis, column, opts: CheckOptions):
    """The same weighted sum as :func:`transient_sum_by_horizon`, ordered by visit count.

    ``w[j, i](s)``, the probability of first entering a bottom class without
    condition states after a prefix with counts ``(j, i)``, solves one linear
    system per ``i`` with a fixed matrix ``I - D_N P_AA`` (``D_N`` selects the
    transient states that add no count). The sum stops once the mass still
    unaccounted for, out of the total probability of such an entry, is below
    the residual. Returns ``(total, residual, levels)``.
    """
    n = dtmc.num_states
    sat2 = np.asarray(sat2, dtype=bool)
    free = _free_bottom_mask(n, bscc.bsccs, sat2)
    total = free.astype(float) * column(0)[0]
    a = np.array(sorted(bscc.nonbscc), dtype=np.int64)
    if a.size == 0:
        return total, 0.0, 0
    cls = state_classes(sat1, sat2)[a]
    neither = (cls == _kernels.NEITHER).astype(float)[:, None]
    only = (cls == _kernels.ONLY_COND).astype(float)[:, None]
    both = (cls == _kernels.BOTH).astype(float)[:, None]
    rows = dtmc.matrix[a]
    p_aa = rows[:, a].toarray()
    p_free = rows @ free.astype(float)
    target = reach_solve(dtmc, bscc.nonbscc, free.astype(float))[a]
    lu = scipy.linalg.lu_factor(np.eye(a.size) - neither * p_aa)
    acc = np.zeros(a.size)
    part = np.zeros(a.size)
    prev = None  # sum over successors of w[., i - 1]
    for i in range(opts.max_iterations + 1):
        if prev is None:
            rhs = neither * p_free[:, None]
        else:
            rhs = np.zeros((a.size, i + 1))
            rhs[:, :i] += only * prev
            rhs[:, 1:] += both * prev
        x = scipy.linalg.lu_solve(lu, rhs)
        np.clip(x, 0.0, None, out=x)
        part += x @ column(i)
        acc += x.sum(axis=1)
        prev = p_aa @ x
        if i == 0:
            prev[:, 0] += p_free
        residual = float(np.max(target - acc, initial=0.0))
        if residual <= opts.residual:
            total[a] = part
            return total, max(residual, 0.0), i
    raise NumericError(
        f"transient sum did not converge: unaccounted mass {residual:.3g} after {opts.max_iterations} "
        f"count levels (residual target {opts.residual:g}); raise max_iterations")


def _acceptance(cmp, q):
    return lambda i: acceptance_column(cmp, q, i).astype(float)


def _spent_time(cmp, q):
    return lambda i: _binom_column(cmp, float(q), i)


def _keep_bottom(bscc: BsccAnalysis, x: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    """``x`` is constant on each closed bottom class, so a later window start leaves it unchanged there."""
    out = np.clip(shifted, 0.0, 1.0)
    for b in bscc.bsccs:
        idx = list(b)
        out[idx] = x[idx]
    return out


def prob_q_unbounded_dtmc(dtmc: Dtmc, cmp: Comparator, q, interval: TimeInterval, sat1, sat2,
                          opts: CheckOptions | None = None) -> np.ndarray:
    opts = opts or CheckOptions()
    iv = normalize_interval(interval, "discrete")
    bscc = analyse_bsccs(dtmc, cmp, q, sat1, sat2, opts.tolerance)
    usum, _, _ = transient_sum_by_count(dtmc, sat1, sat2, bscc, _acceptance(cmp, q), opts)
    x = bscc.r + usum
    return _keep_bottom(bscc, x, mat_power_apply(dtmc, int(iv.lo), x))


def prob_q_bounded_ctmc(ctmc: Ctmc, cmp: Comparator, q, interval: TimeInterval, sat1, sat2,
                        opts: CheckOptions | None = None) -> np.ndarray:
    opts = opts or CheckOptions()
    iv = normalize_interval(interval, "continuous")
    if not iv.bounded:
        raise ValueError("bounded window expected")
    lo, hi = float(iv.lo), float(iv.hi)
    unif, lam = uniformize(ctmc, opts.uniformization_rate)
    if lo == hi:
        cls = state_classes(sat1, sat2)
        point = {_kernels.NEITHER: 1.0,
                 _kernels.ONLY_COND: binom_bound(cmp, q, 0, 1),
                 _kernels.BOTH: binom_bound(cmp, q, 1, 1)}
        x = np.array([point[c] for c in cls])
    else:
        weights = poisson_truncate(lam * (hi - lo), opts.epsilon / 2)
        btab = binom_table(cmp, q, weights.right + 2)
        x = np.zeros(ctmc.num_states)
        for h, layer in enumerate(vtable_layers(unif, sat1, sat2)):
            if h >= weights.left:
                x += weights[h] * _reduce(layer, btab)
            if h >= weights.right:
                break
    return np.clip(transient_apply(ctmc, lo, x, opts.epsilon / 2, lam), 0.0, 1.0)


def prob_q_unbounded_ctmc(ctmc: Ctmc, cmp: Comparator, q, interval: TimeInterval, sat1, sat2,
                          opts: CheckOptions | None = None) -> np.ndarray:
    opts = opts or CheckOptions()
    iv = normalize_interval(interval, "continuous")
    unif, lam = uniformize(ctmc, opts.uniformization_rate)
    bscc = analyse_bsccs(unif, cmp, q, sat1, sat2, opts.tolerance)
    usum, _, _ = transient_sum_by_count(unif, sat1, sat2, bscc, _spent_time(cmp, q), opts)
    x = bscc.r + usum
    return _keep_bottom(bscc, x, transient_apply(ctmc, float(iv.lo), x, opts.epsilon, lam))


# ---------------------------------------------------------------------------
# state formulae
# ---------------------------------------------------------------------------


class NumericalChecker:
    """Bottom-up satisfaction sets with per-subformula caching."""

    def __init__(self, model: Model, options: CheckOptions | None = None):
        self.model = model
        self.options = options or CheckOptions()
        self._sat: dict = {}
        self._prob: dict = {}

    def sat(self, phi) -> np.ndarray:
        if phi in self._sat:
            return self._sat[phi]
        n = self.model.num_states
        if isinstance(phi, Atom):
            res = self.model.atom_mask(phi.name)
        elif isinstance(phi, TrueF):
            res = np.ones(n, dtype=bool)
        elif isinstance(phi, Not):
            res = ~self.sat(phi.sub)
        elif isinstance(phi, And):
            res = self.sat(phi.left) & self.sat(phi.right)
        elif isinstance(phi, Prob):
            probs = self.probabilities(phi.path)
            tol = self.options.tolerance
            res = np.array([phi.cmp.holds_tol(float(x), float(phi.p), tol) for x in probs], dtype=bool)
        else:
            raise FragmentError(f"not a state formula: {format_formula(phi)}")
        res.setflags(write=False)
        self._sat[phi] = res
        return res

    def _operand(self, psi) -> np.ndarray:
        if not isinstance(psi, Embed):
            raise FragmentError(f"path operator operands must be state formulas: {format_formula(psi)}")
        return self.sat(psi.state)

    def probabilities(self, psi) -> np.ndarray:
        if psi in self._prob:
            return self._prob[psi]
        model, opts = self.model, self.options
        continuous = isinstance(model, Ctmc)
        if isinstance(psi, Embed):
            res = self.sat(psi.state).astype(float)
        elif isinstance(psi, PathNot):
            res = 1.0 - self.probabilities(psi.sub)
        elif isinstance(psi, Next):
            res = prob_next(model, self._operand(psi.sub))
        elif isinstance(psi, Until):
            res = prob_until(model, psi.interval, self._operand(psi.left), self._operand(psi.right), opts)
        elif isinstance(psi, Freq):
            s1, s2 = self._operand(psi.left), self._operand(psi.right)
            args = (psi.cmp, psi.q, psi.interval, s1, s2)
            if continuous:
                if psi.interval.bounded:
                    res = prob_q_bounded_ctmc(model, *args, opts)
                else:
                    res = prob_q_unbounded_ctmc(model, *args, opts)
            else:
                if psi.interval.bounded:
                    res = prob_q_bounded_dtmc(model, *args)
                else:
                    res = prob_q_unbounded_dtmc(model, *args, opts)
        else:
            raise FragmentError(f"unsupported path formula for the numerical engine: {format_formula(psi)}")
        res = np.clip(res, 0.0, 1.0)
        res.setflags(write=False)
        self._prob[psi] = res
        return res


def check_state_formula(model: Model, phi, options: CheckOptions | None = None) -> np.ndarray:
    if classify_fragment(phi) is not Fragment.CTL_LIKE:
        raise FragmentError(f"formula is not in the CTL-like fragment: {format_formula(phi)}")
    return NumericalChecker(model, options).sat(phi)


@dataclass
class CheckResult:
    holds: bool
    sat: np.ndarray
    probabilities: np.ndarray | None  # for a top-level P operator


def check(model: Model, phi, options: CheckOptions | None = None) -> CheckResult:
    if classify_fragment(phi) is not Fragment.CTL_LIKE:
        raise FragmentError(f"formula is not in the CTL-like fragment: {format_formula(phi)}")
    checker = NumericalChecker(model, options)
    sat = checker.sat(phi)
    probs = checker.probabilities(phi.path) if isinstance(phi, Prob) else None
    return CheckResult(bool(sat[model.initial]), sat, probs)
