"""Epsilon-perturbed dynamics and Monte Carlo velocity estimates.

Each particle the deterministic rule lets move actually moves with
probability ``1 - eps``, independently of the others.  A particle the rule
holds back never moves.

Every step consumes exactly ``n`` uniforms from the generator, one per
particle in index order, whether or not the particle is allowed to move.
Particle ``i`` moves iff it is allowed and ``u_i >= eps``.  The compiled
trajectory kernel follows the same convention, so a trajectory is identical
whether it is produced by repeated :func:`step_stochastic` calls or by
:func:`sample_trajectory`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .chain import (
    ChainState,
    LeftPriority,
    LongCluster,
    OddEven,
    RightPriority,
    Rule,
    all_states,
    mask_code,
    move_mask,
)

CHUNK_STEPS = 1 << 15
MAX_N = 62

_KIND_TABLE, _KIND_LEFT, _KIND_RIGHT, _KIND_ODD_EVEN, _KIND_LONG = range(5)


def check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
    return eps


@dataclass(frozen=True)
class RngStream:
    """Seed plus replica index; each pair names an independent PCG64 stream."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class TrajectoryStats:
    steps: int
    counts: np.ndarray
    initial: ChainState
    final: ChainState

    @property
    def velocities(self) -> np.ndarray:
        return self.counts / self.steps


@dataclass
class VelocityEstimate:
    v: np.ndarray
    stderr: np.ndarray
    v_avg: float
    v_avg_stderr: float
    replicas: int
    steps: int
    eps: float
    rule: str


def step_stochastic(x: ChainState, rule: Rule, eps: float, rng: np.random.Generator):
    """One random step.  Returns ``(next_state, moved)``."""
    eps = check_epsilon(eps)
    allowed = move_mask(x, rule)
    u = rng.random(x.n)
    moved = tuple(int(a and ui >= eps) for a, ui in zip(allowed, u))
    nxt = ChainState(x.n, tuple(d ^ m for d, m in zip(x.cells, moved)))
    return nxt, moved


@numba.njit(cache=True)
def _native_mask(code, n, kind):
    full = (1 << n) - 1
    rot = ((code >> 1) | ((code & 1) << (n - 1))) & full
    comps = ~code & rot & full  # bit i: d_i = 0 and d_{i+1} = 1
    if comps == 0:
        return full
    if kind == _KIND_LEFT:
        right_wins = 0
    elif kind == _KIND_RIGHT:
        right_wins = comps
    elif kind == _KIND_ODD_EVEN:
        # node i has an odd left particle iff i is odd
        odd = 0
        for i in range(1, n, 2):
            odd |= 1 << i
        right_wins = comps & odd
    else:
        l0 = 0
        l1 = 0
        # comps != 0, so the state is not constant; start after a change
        start = 0
        for i in range(n):
            if ((code >> i) & 1) != ((code >> ((i - 1) % n)) & 1):
                start = i
                break
        run = 0
        prev = -1
        for k in range(n):
            d = (code >> ((start + k) % n)) & 1
            if d == prev:
                run += 1
            else:
                run = 1
            prev = d
            if d == 0 and run > l0:
                l0 = run
            if d == 1 and run > l1:
                l1 = run
        right_wins = 0 if l0 >= l1 else comps
    left_wins = comps & ~right_wins
    # a left win blocks particle i + 1, a right win blocks particle i
    losers = right_wins | (((left_wins << 1) | (left_wins >> (n - 1))) & full)
    return full & ~losers


@numba.njit(cache=True)
def _run_chunk(code, n, kind, table, u, eps, counts, count):
    steps = u.shape[0]
    for t in range(steps):
        if kind == _KIND_TABLE:
            allowed = table[code]
        else:
            allowed = _native_mask(code, n, kind)
        moved = 0
        for i in range(n):
            if (allowed >> i) & 1 and u[t, i] >= eps:
                moved |= 1 << i
                if count:
                    counts[i] += 1
        code ^= moved
    return code


def _kernel_args(rule: Rule, n: int):
    if n > MAX_N:
        raise ValueError(f"n={n} exceeds the simulator limit of {MAX_N}")
    rule.check_size(n)
    kinds = {LeftPriority: _KIND_LEFT, RightPriority: _KIND_RIGHT,
             OddEven: _KIND_ODD_EVEN, LongCluster: _KIND_LONG}
    kind = kinds.get(type(rule))
    if kind is not None:
        return kind, np.zeros(1, dtype=np.int64)
    if n > 20:
        raise ValueError(f"custom rules are tabulated and limited to n <= 20, got n={n}")
    table = np.array([mask_code(move_mask(x, rule)) for x in all_states(n)], dtype=np.int64)
    return _KIND_TABLE, table


def native_mask_code(x: ChainState, rule: Rule) -> int:
    """Move mask as computed by the compiled kernel (bit i = particle i)."""
    kind, table = _kernel_args(rule, x.n)
    if kind == _KIND_TABLE:
        return int(table[x.code])
    return int(_native_mask(x.code, x.n, kind))


def _advance(code, n, kind, table, eps, steps, gen, counts, count):
    done = 0
    while done < steps:
        k = min(CHUNK_STEPS, steps - done)
        u = gen.random((k, n))
        code = _run_chunk(code, n, kind, table, u, eps, counts, count)
        done += k
    return code


def sample_trajectory(x0: ChainState, rule: Rule, eps: float, steps: int,
                      burn_in: int | None = None,
                      rng: RngStream | np.random.Generator | None = None) -> TrajectoryStats:
    """Run ``burn_in`` discarded steps, then count moves over ``steps`` steps.

    ``burn_in`` defaults to ``10 * n``.
    """
    eps = check_epsilon(eps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n = x0.n
    if burn_in is None:
        burn_in = 10 * n
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if rng is None:
        rng = RngStream(0)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    kind, table = _kernel_args(rule, n)
    counts = np.zeros(n, dtype=np.int64)
    code = _advance(x0.code, n, kind, table, eps, burn_in, gen, counts, False)
    code = _advance(code, n, kind, table, eps, steps, gen, counts, True)
    return TrajectoryStats(steps, counts, x0, ChainState.from_code(n, code))


def estimate_velocities(x0: ChainState, rule: Rule, eps: float, steps: int,
                        burn_in: int | None = None, replicas: int = 8,
                        seed: int = 0) -> VelocityEstimate:
    """Mean and standard error of per-particle velocities over independent replicas.

    Replica ``r`` uses ``RngStream(seed, r)``.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    runs = np.array([
        sample_trajectory(x0, rule, eps, steps, burn_in, RngStream(seed, r)).velocities
        for r in range(replicas)
    ])
    v = runs.mean(axis=0)
    avg = runs.mean(axis=1)
    if replicas > 1:
        stderr = runs.std(axis=0, ddof=1) / np.sqrt(replicas)
        avg_err = float(avg.std(ddof=1) / np.sqrt(replicas))
    else:
        stderr = np.full(x0.n, np.nan)
        avg_err = float("nan")
    return VelocityEstimate(v, stderr, float(avg.mean()), avg_err, replicas, steps,
                            eps, rule.name)
