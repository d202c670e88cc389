"""Explicit-state Markov chains and the numerical primitives built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Protocol, Sequence, Union, runtime_checkable

import numpy as np
import scipy.sparse as sp

ROW_SUM_TOL = 1e-9


class ModelError(ValueError):
    """Raised for malformed models or invalid model parameters."""


def _csr_from_transitions(num_states, transitions):
    """Build CSR arrays from ``(source, target, value)`` triples.

    Zero values are dropped. Entries of each row are sorted by target.
    """
    rows = [[] for _ in range(num_states)]
    for src, dst, val in transitions:
        if not (0 <= src < num_states and 0 <= dst < num_states):
            raise ModelError(f"transition {src}->{dst} references a state outside 0..{num_states - 1}")
        if val == 0:
            continue
        rows[src].append((int(dst), float(val)))
    indptr = np.zeros(num_states + 1, dtype=np.int64)
    indices, values = [], []
    for s, row in enumerate(rows):
        row.sort()
        indices.extend(t for t, _ in row)
        values.extend(v for _, v in row)
        indptr[s + 1] = len(indices)
    return indptr, np.asarray(indices, dtype=np.int64), np.asarray(values, dtype=float)


def _normalize_labels(num_states, labels):
    if labels is None:
        return tuple(frozenset() for _ in range(num_states))
    if isinstance(labels, dict):
        out = [frozenset() for _ in range(num_states)]
        for s, names in labels.items():
            out[s] = frozenset(names)
        return tuple(out)
    out = tuple(frozenset(names) for names in labels)
    if len(out) != num_states:
        raise ModelError(f"expected {num_states} label sets, got {len(out)}")
    return out


@dataclass(frozen=True, eq=False)
class _Explicit:
    num_states: int
    initial: int
    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    labels: tuple

    def row(self, s: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[s], self.indptr[s + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.values[lo:hi].tolist()))

    @property
    def rows(self) -> list[list[tuple[int, float]]]:
        return [self.row(s) for s in range(self.num_states)]

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        n = self.num_states
        return sp.csr_matrix((self.values, self.indices, self.indptr), shape=(n, n))

    def atom_mask(self, name: str) -> np.ndarray:
        return np.fromiter((name in ls for ls in self.labels), dtype=bool, count=self.num_states)

    def successors(self, s: int) -> list[tuple[int, float]]:
        return self.row(s)

    def initial_state(self) -> int:
        return self.initial

    def labels_of(self, s: int) -> frozenset:
        return self.labels[s]

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Per-row cumulative normalized weights, used by the samplers."""
        cum = np.empty_like(self.values)
        for s in range(self.num_states):
            lo, hi = self.indptr[s], self.indptr[s + 1]
            if hi > lo:
                row = np.cumsum(self.values[lo:hi])
                cum[lo:hi] = row / row[-1]
        return cum


@dataclass(frozen=True, eq=False)
class Dtmc(_Explicit):
    """Discrete-time Markov chain with a sparse row-stochastic matrix."""

    continuous = False

    @classmethod
    def from_transitions(cls, num_states: int, initial: int,
                         transitions: Iterable[tuple[int, int, float]], labels=None) -> "Dtmc":
        indptr, indices, values = _csr_from_transitions(num_states, transitions)
        return cls(num_states, initial, indptr, indices, values, _normalize_labels(num_states, labels))

    @classmethod
    def from_dense(cls, matrix, initial: int = 0, labels=None) -> "Dtmc":
        mat = np.asarray(matrix, dtype=float)
        n = mat.shape[0]
        trans = [(s, t, mat[s, t]) for s in range(n) for t in range(n) if mat[s, t] != 0]
        return cls.from_transitions(n, initial, trans, labels)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def renormalized(self) -> "Dtmc":
        values = self.values.copy()
        for s in range(self.num_states):
            lo, hi = self.indptr[s], self.indptr[s + 1]
            total = values[lo:hi].sum()
            if total > 0:
                values[lo:hi] /= total
        return Dtmc(self.num_states, self.initial, self.indptr, self.indices, values, self.labels)


@dataclass(frozen=True, eq=False)
class Ctmc(_Explicit):
    """Continuous-time Markov chain; ``values`` hold off-diagonal rates."""

    exit_rates: np.ndarray = field(default=None)
    continuous = True

    def __post_init__(self):
        if self.exit_rates is None:
            sums = np.asarray(self.matrix.sum(axis=1)).ravel()
            object.__setattr__(self, "exit_rates", sums)

    @classmethod
    def from_transitions(cls, num_states: int, initial: int,
                         transitions: Iterable[tuple[int, int, float]], labels=None) -> "Ctmc":
        indptr, indices, values = _csr_from_transitions(num_states, transitions)
        return cls(num_states, initial, indptr, indices, values, _normalize_labels(num_states, labels))

    @classmethod
    def from_generator(cls, generator, initial: int = 0, labels=None) -> "Ctmc":
        gen = np.asarray(generator, dtype=float)
        n = gen.shape[0]
        trans = [(s, t, gen[s, t]) for s in range(n) for t in range(n) if s != t and gen[s, t] != 0]
        return cls.from_transitions(n, initial, trans, labels)

    def generator(self) -> np.ndarray:
        q = self.matrix.toarray()
        q[np.diag_indices(self.num_states)] -= self.exit_rates
        return q

    def with_absorbing(self, states) -> "Ctmc":
        """Copy of the chain in which every state in the boolean mask ``states`` is absorbing."""
        mask = np.asarray(states, dtype=bool)
        keep = [(s, t, v) for s in range(self.num_states) if not mask[s] for t, v in self.row(s)]
        return Ctmc.from_transitions(self.num_states, self.initial, keep, self.labels)


Model = Union[Dtmc, Ctmc]


@runtime_checkable
class SuccessorOracle(Protocol):
    """Implicit, possibly countable-state chain explored only by simulation.

    ``continuous`` selects the time base: successor weights are
    probabilities when False and rates when True.
    """

    continuous: bool

    def initial_state(self) -> Hashable: ...

    def labels_of(self, state) -> frozenset: ...

    def successors(self, state) -> Sequence[tuple[Hashable, float]]: ...


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate_model(model: Model) -> list[str]:
    """Return human-readable invariant violations; an empty list means valid."""
    problems = []
    n = model.num_states
    if n <= 0:
        problems.append("model has no states")
        return problems
    if not 0 <= model.initial < n:
        problems.append(f"initial state {model.initial} outside 0..{n - 1}")
    if len(model.labels) != n:
        problems.append(f"expected {n} label sets, got {len(model.labels)}")
    for s in range(n):
        lo, hi = model.indptr[s], model.indptr[s + 1]
        targets = model.indices[lo:hi]
        vals = model.values[lo:hi]
        if np.any((targets < 0) | (targets >= n)):
            problems.append(f"state {s}: transition target outside 0..{n - 1}")
        if len(set(targets.tolist())) != len(targets):
            problems.append(f"state {s}: duplicate transition targets")
        if isinstance(model, Ctmc):
            if np.any(vals < 0):
                problems.append(f"state {s}: negative rate (rate-sign violation)")
            if np.any(targets == s):
                problems.append(f"state {s}: explicit self-loop rate; diagonal entries are implied")
            if not np.isfinite(vals).all():
                problems.append(f"state {s}: non-finite rate")
            if abs(float(model.exit_rates[s]) - float(vals.sum())) > ROW_SUM_TOL:
                problems.append(f"state {s}: exit rate {model.exit_rates[s]} differs from outgoing "
                                f"rate sum {vals.sum()}")
        else:
            if np.any(vals <= 0) or np.any(vals > 1):
                problems.append(f"state {s}: probability outside (0, 1]")
            total = float(vals.sum())
            if abs(total - 1.0) > ROW_SUM_TOL:
                problems.append(f"state {s}: row sums to {total:.12g} (row-sum violation)")
    return problems


# ---------------------------------------------------------------------------
# uniformization and transient probabilities
# ---------------------------------------------------------------------------


def uniformize(ctmc: Ctmc, rate: float | None = None) -> tuple[Dtmc, float]:
    """Return ``(I + Q/rate, rate)``; the rate defaults to the maximum exit rate."""
    max_exit = float(ctmc.exit_rates.max()) if ctmc.num_states else 0.0
    if rate is None:
        rate = max_exit
    elif rate < max_exit:
        raise ModelError(f"uniformization rate {rate} is below the maximum exit rate {max_exit}")
    trans = []
    for s in range(ctmc.num_states):
        row = ctmc.row(s)
        if rate > 0:
            stay = 1.0 - ctmc.exit_rates[s] / rate
            trans.extend((s, t, r / rate) for t, r in row)
        else:
            stay = 1.0
        if stay > 0:
            trans.append((s, s, stay))
    return Dtmc.from_transitions(ctmc.num_states, ctmc.initial, trans, ctmc.labels), rate


@dataclass(frozen=True)
class PoissonWeights:
    """Truncated Poisson probabilities ``weights[n - left] = rho(n; lambda_k)``."""

    lambda_k: float
    epsilon: float
    left: int
    right: int
    weights: np.ndarray

    def __getitem__(self, n: int) -> float:
        if self.left <= n <= self.right:
            return float(self.weights[n - self.left])
        return 0.0

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def poisson_truncate(lambda_k: float, epsilon: float) -> PoissonWeights:
    """Poisson weights on a window around the mode holding mass >= 1 - epsilon.

    Weights are grown outwards from the mode with the ratio recurrence,
    always on the side whose geometric tail bound is larger, until both
    tail bounds together fall below ``epsilon / 2`` of the retained mass.
    The retained weights are then normalized, which keeps the total
    absolute error under ``epsilon`` and avoids relying on the rounding of
    the mode weight (about ``lambda_k`` ulps) for the stopping test.
    """
    if lambda_k < 0:
        raise ValueError("lambda_k must be nonnegative")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if lambda_k == 0:
        return PoissonWeights(0.0, epsilon, 0, 0, np.ones(1))
    mode = int(math.floor(lambda_k))
    left_w, right_w = [], []
    lo = hi = mode
    w_lo = w_hi = total = 1.0  # relative to the mode weight

    def tails():
        r_hi = lambda_k / (hi + 1)
        right = w_hi * r_hi / (1 - r_hi) if r_hi < 1 else math.inf
        if lo == 0:
            left = 0.0
        else:
            r_lo = lo / lambda_k
            left = w_lo * r_lo / (1 - r_lo) if r_lo < 1 else math.inf
        return left, right

    while True:
        left, right = tails()
        if left + right <= 0.5 * epsilon * total:
            break
        if right >= left:
            w_next = w_hi * lambda_k / (hi + 1)
            if w_next == 0.0:
                break
            hi += 1
            w_hi = w_next
            right_w.append(w_hi)
            total += w_hi
        else:
            w_next = w_lo * lo / lambda_k
            if w_next == 0.0:
                break
            lo -= 1
            w_lo = w_next
            left_w.append(w_lo)
            total += w_lo
    weights = np.array(left_w[::-1] + [1.0] + right_w) / total
    return PoissonWeights(float(lambda_k), epsilon, lo, hi, weights)


def transient_apply(ctmc: Ctmc, t: float, v, epsilon: float = 1e-10, rate: float | None = None) -> np.ndarray:
    """Approximate ``Pi_t v`` by uniformization with Poisson truncation."""
    v = np.asarray(v, dtype=float)
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0:
        return v.copy()
    unif, lam = uniformize(ctmc, rate)
    if lam == 0:
        return v.copy()
    weights = poisson_truncate(lam * t, epsilon)
    mat = unif.matrix
    out = np.zeros_like(v)
    cur = v.copy()
    for n in range(weights.right + 1):
        if n >= weights.left:
            out += weights[n] * cur
        if n < weights.right:
            cur = mat @ cur
    return out


def mat_power_apply(dtmc: Dtmc, k: int, v) -> np.ndarray:
    """``P^k v`` by ``k`` successive matrix-vector products."""
    cur = np.asarray(v, dtype=float)
    mat = dtmc.matrix
    for _ in range(int(k)):
        cur = mat @ cur
    return cur


# ---------------------------------------------------------------------------
# graph decomposition
# ---------------------------------------------------------------------------


def strongly_connected_components(num_states: int, indptr, indices) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    index = [-1] * num_states
    low = [0] * num_states
    on_stack = [False] * num_states
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(num_states):
        if index[root] != -1:
            continue
        work = [(root, int(indptr[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, edge = work[-1]
            end = int(indptr[v + 1])
            if edge < end:
                work[-1] = (v, edge + 1)
                w = int(indices[edge])
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, int(indptr[w])))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def bscc_decompose(dtmc: _Explicit) -> tuple[frozenset, list[frozenset]]:
    """Split the states into the transient part and the bottom SCCs.

    Returns ``(non_bscc_states, [B_1, ..., B_n])`` with the BSCCs ordered by
    their smallest state.
    """
    n = dtmc.num_states
    comps = strongly_connected_components(n, dtmc.indptr, dtmc.indices)
    comp_of = np.empty(n, dtype=np.int64)
    for c, members in enumerate(comps):
        comp_of[members] = c
    bottoms = []
    for c, members in enumerate(comps):
        leaves = False
        for s in members:
            lo, hi = dtmc.indptr[s], dtmc.indptr[s + 1]
            if np.any(comp_of[dtmc.indices[lo:hi]] != c):
                leaves = True
                break
        if not leaves:
            bottoms.append(frozenset(members))
    bottoms.sort(key=min)
    in_bottom = set().union(*bottoms) if bottoms else set()
    rest = frozenset(s for s in range(n) if s not in in_bottom)
    return rest, bottoms
