"""Hot inner loops, compiled with numba when available.

Every kernel has a ``*_numpy`` reference implementation and, when numba
imports, a ``*_numba`` twin with identical semantics. The module-level names
(``count_step``, ``walk_discrete``, ``walk_timed``) point at the numba version
unless ``PFTL_DISABLE_NUMBA`` is set to a truthy value in the environment or
numba is missing.
"""

import os

import numpy as np
import scipy.sparse as sp

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - depends on the environment
    numba = None
    NUMBA_AVAILABLE = False

_DISABLED = os.environ.get("PFTL_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = NUMBA_AVAILABLE and not _DISABLED

# Counting classes for a state in the frequency count tables.
NEITHER = 0
ONLY_COND = 1  # condition holds, event does not
BOTH = 2  # condition and event hold


# ---------------------------------------------------------------------------
# count tables: one layer step of the v/u recurrences
# ---------------------------------------------------------------------------


def count_step_numpy(indptr, indices, data, cls, active, old):
    """Advance a count-table layer by one step.

    ``old`` has shape ``(n, m, m)`` and holds ``old[s, j, i]`` for the
    previous horizon. The result has shape ``(n, m + 1, m + 1)`` and satisfies
    ``new[s, j + dj(s), i + di(s)] = sum_t P(s, t) * old[t, j, i]`` for active
    rows ``s``; inactive rows are zero.
    """
    n, m, _ = old.shape
    mat = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    pulled = (mat @ old.reshape(n, m * m)).reshape(n, m, m)
    new = np.zeros((n, m + 1, m + 1))
    both = active & (cls == BOTH)
    only = active & (cls == ONLY_COND)
    neither = active & (cls == NEITHER)
    new[both, 1:, 1:] = pulled[both]
    new[only, :m, 1:] = pulled[only]
    new[neither, :m, :m] = pulled[neither]
    return new


def walk_discrete_numpy(indptr, indices, cumprobs, start, uniforms):
    """Follow a discrete-time path, one uniform variate per step."""
    steps = uniforms.shape[0]
    states = np.empty(steps + 1, dtype=np.int64)
    s = start
    states[0] = s
    for k in range(steps):
        lo, hi = indptr[s], indptr[s + 1]
        if lo == hi:
            return states[: k + 1], False
        pos = lo + np.searchsorted(cumprobs[lo:hi], uniforms[k], side="right")
        s = indices[min(pos, hi - 1)]
        states[k + 1] = s
    return states, True


def walk_timed_numpy(indptr, indices, cumprobs, exit_rates, start, elapsed, horizon,
                     u_choice, u_time):
    """Extend a timed path until the elapsed time passes ``horizon``.

    Returns ``(states, durations, elapsed, finished)``. ``states[0]`` is
    ``start``; ``durations[k]`` is the sojourn in ``states[k]``. The walk
    stops early when the uniform buffers run out (``finished`` is False) or
    when an absorbing state is reached (its duration is ``inf``).
    """
    cap = u_time.shape[0]
    states = np.empty(cap + 1, dtype=np.int64)
    durations = np.empty(cap + 1)
    s = start
    count = 0
    for k in range(cap):
        states[count] = s
        rate = exit_rates[s]
        if rate <= 0.0:
            durations[count] = np.inf
            return states[: count + 1], durations[: count + 1], np.inf, True
        d = -np.log(u_time[k]) / rate
        durations[count] = d
        count += 1
        elapsed += d
        if elapsed > horizon:
            return states[:count], durations[:count], elapsed, True
        lo, hi = indptr[s], indptr[s + 1]
        pos = lo + np.searchsorted(cumprobs[lo:hi], u_choice[k], side="right")
        s = indices[min(pos, hi - 1)]
    states[count] = s
    return states[: count + 1], durations[:count], elapsed, False


if NUMBA_AVAILABLE:

    @numba.njit(cache=True, nogil=True)
    def _scatter(cls, active, pulled, m):
        n = pulled.shape[0]
        new = np.zeros((n, m + 1, m + 1))
        for s in range(n):
            if not active[s]:
                continue
            dj = 1 if cls[s] == 2 else 0
            di = 1 if cls[s] >= 1 else 0
            out = new[s]
            row = pulled[s]
            # entries with j > i are structurally zero
            for j in range(m):
                for i in range(j, m):
                    out[j + dj, i + di] = row[j * m + i]
        return new

    @numba.njit(cache=True, nogil=True)
    def _pull_rows(indptr, indices, data, active, flat):
        n, size = flat.shape
        # one contiguous span per source row covers all of its nonzero entries
        first = np.zeros(n, dtype=np.int64)
        stop = np.zeros(n, dtype=np.int64)
        for t in range(n):
            row = flat[t]
            k = 0
            while k < size and row[k] == 0.0:
                k += 1
            first[t] = k
            k = size
            while k > first[t] and row[k - 1] == 0.0:
                k -= 1
            stop[t] = k
        pulled = np.zeros((n, size))
        for s in range(n):
            if not active[s]:
                continue
            acc = pulled[s]
            for e in range(indptr[s], indptr[s + 1]):
                t = indices[e]
                lo, hi = first[t], stop[t]
                if lo >= hi:
                    continue
                p = data[e]
                src = flat[t, lo:hi]
                dst = acc[lo:hi]
                # zero-based loop over views so the compiler vectorizes it
                for k in range(hi - lo):
                    dst[k] += p * src[k]
        return pulled

    @numba.njit(cache=True, nogil=True)
    def count_step_numba(indptr, indices, data, cls, active, old):
        n, m, _ = old.shape
        flat = np.ascontiguousarray(old).reshape(n, m * m)
        return _scatter(cls, active, _pull_rows(indptr, indices, data, active, flat), m)

    @numba.njit(cache=True, nogil=True)
    def walk_discrete_numba(indptr, indices, cumprobs, start, uniforms):
        steps = uniforms.shape[0]
        states = np.empty(steps + 1, dtype=np.int64)
        s = start
        states[0] = s
        for k in range(steps):
            lo = indptr[s]
            hi = indptr[s + 1]
            if lo == hi:
                return states[: k + 1], False
            pos = lo + np.searchsorted(cumprobs[lo:hi], uniforms[k], side="right")
            if pos > hi - 1:
                pos = hi - 1
            s = indices[pos]
            states[k + 1] = s
        return states, True

    @numba.njit(cache=True, nogil=True)
    def walk_timed_numba(indptr, indices, cumprobs, exit_rates, start, elapsed, horizon,
                         u_choice, u_time):
        cap = u_time.shape[0]
        states = np.empty(cap + 1, dtype=np.int64)
        durations = np.empty(cap + 1)
        s = start
        count = 0
        for k in range(cap):
            states[count] = s
            rate = exit_rates[s]
            if rate <= 0.0:
                durations[count] = np.inf
                return states[: count + 1], durations[: count + 1], np.inf, True
            d = -np.log(u_time[k]) / rate
            durations[count] = d
            count += 1
            elapsed += d
            if elapsed > horizon:
                return states[:count], durations[:count], elapsed, True
            lo = indptr[s]
            hi = indptr[s + 1]
            pos = lo + np.searchsorted(cumprobs[lo:hi], u_choice[k], side="right")
            if pos > hi - 1:
                pos = hi - 1
            s = indices[pos]
        states[count] = s
        return states[: count + 1], durations[:count], elapsed, False

else:  # pragma: no cover
    count_step_numba = count_step_numpy
    walk_discrete_numba = walk_discrete_numpy
    walk_timed_numba = walk_timed_numpy


if USE_NUMBA:
    count_step = count_step_numba
    walk_discrete = walk_discrete_numba
    walk_timed = walk_timed_numba
else:
    count_step = count_step_numpy
    walk_discrete = walk_discrete_numpy
    walk_timed = walk_timed_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
