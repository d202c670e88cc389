"""Sampling of finite path prefixes from explicit chains and successor oracles.

Every path draws its randomness from its own generator, derived from the
pair ``(seed, path_index)``, so a batch of paths comes out the same no
matter how it is split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from . import _kernels
from .model import Ctmc, Dtmc, ModelError

MAX_SEGMENTS = 10_000_000
_CHUNK = 256


class ExplosionError(ModelError):
    """A timed path used more segments than allowed before reaching the horizon."""


@dataclass(frozen=True)
class RandomSource:
    seed: int

    def path_rng(self, index: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(index,))))


@dataclass(frozen=True)
class DiscretePath:
    states: Sequence[Hashable]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class TimedPath:
    """Segments ``(states[i], durations[i])``; an absorbed path ends with duration ``inf``."""

    states: Sequence[Hashable]
    durations: np.ndarray

    @property
    def total_time(self) -> float:
        return float(np.sum(self.durations))

    def entry_times(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.durations)[:-1]))

    def state_at(self, t: float):
        idx = int(np.searchsorted(np.cumsum(self.durations), t, side="right"))
        return self.states[min(idx, len(self.states) - 1)]


def _pick(succ, weights_sum, u):
    acc = 0.0
    target = u * weights_sum
    for state, w in succ:
        acc += w
        if target < acc:
            return state
    return succ[-1][0]


def sample_discrete_prefix(model, k_total: int, rng: np.random.Generator) -> DiscretePath:
    k_total = int(k_total)
    if isinstance(model, Dtmc):
        uniforms = rng.random(k_total)
        states, finished = _kernels.walk_discrete(model.indptr, model.indices, model.cumulative,
                                                  model.initial, uniforms)
        if not finished:
            raise ModelError(f"state {states[-1]} has no successors")
        return DiscretePath(states)
    if getattr(model, "continuous", True):
        raise ModelError("discrete sampling needs a discrete-time model")
    s = model.initial_state()
    states = [s]
    for u in rng.random(k_total):
        succ = model.successors(s)
        if not succ:
            raise ModelError(f"state {s!r} has no successors")
        s = _pick(succ, sum(w for _, w in succ), u)
        states.append(s)
    return DiscretePath(states)


def _timed_explicit(model: Ctmc, k_total: float, rng, max_segments: int) -> TimedPath:
    states_parts, dur_parts = [], []
    start, elapsed, used, chunk = model.initial, 0.0, 0, _CHUNK
    while True:
        u_choice = rng.random(chunk)
        u_time = 1.0 - rng.random(chunk)  # (0, 1]
        states, durations, elapsed, finished = _kernels.walk_timed(
            model.indptr, model.indices, model.cumulative, model.exit_rates,
            start, elapsed, float(k_total), u_choice, u_time)
        if finished:
            states_parts.append(states)
            dur_parts.append(durations)
            break
        states_parts.append(states[:-1])
        dur_parts.append(durations)
        used += durations.shape[0]
        if used >= max_segments:
            raise ExplosionError(
                f"path needed more than {max_segments} segments before time {k_total} "
                f"(reached {elapsed:.6g}); the chain may be explosive or the horizon too long")
        start = int(states[-1])
        chunk = min(chunk * 2, 1 << 16)
    return TimedPath(np.concatenate(states_parts), np.concatenate(dur_parts))


def _timed_oracle(model, k_total: float, rng, max_segments: int) -> TimedPath:
    s = model.initial_state()
    states, durations = [], []
    elapsed = 0.0
    while True:
        states.append(s)
        succ = model.successors(s)
        rate = sum(w for _, w in succ)
        if rate <= 0.0:
            durations.append(np.inf)
            break
        d = -np.log(1.0 - rng.random()) / rate
        durations.append(d)
        elapsed += d
        if elapsed > k_total:
            break
        if len(states) >= max_segments:
            raise ExplosionError(f"path needed more than {max_segments} segments before time {k_total}")
        s = _pick(succ, rate, rng.random())
    return TimedPath(states, np.asarray(durations))


def sample_timed_prefix(model, k_total: float, rng: np.random.Generator,
                        max_segments: int = MAX_SEGMENTS) -> TimedPath:
    """Sample segments until their total time exceeds ``k_total``."""
    if isinstance(model, Ctmc):
        return _timed_explicit(model, k_total, rng, max_segments)
    if not getattr(model, "continuous", False):
        raise ModelError("timed sampling needs a continuous-time model")
    return _timed_oracle(model, k_total, rng, max_segments)
