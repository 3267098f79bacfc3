"""Exhaustive checks of the free-movement optimality results.

"Any rule" is modelled as "any choice of winners for every competition at
every step".  Every state-feedback rule picks one such assignment per step,
so a breadth-first search over assignments bounds all of them from below.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

from .chain import (
    ChainState,
    LongCluster,
    Rule,
    Side,
    _cluster_stats_code,
    all_states,
    find_competitions,
    is_free_movement,
    step_deterministic,
    step_with_winners,
)

BFS_CAP = 12
LEMMA1_CAP = 10


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise ValueError(f"n={n} exceeds the exhaustive-check cap of {cap}")


def winner_assignments(x: ChainState):
    """All ``2 ** len(find_competitions(x))`` winner tuples, LEFT-first order."""
    return itertools.product((Side.LEFT, Side.RIGHT), repeat=len(find_competitions(x)))


@dataclass
class ReachabilityCertificate:
    state: ChainState
    min_steps: float
    witness: list[tuple[ChainState, tuple[Side, ...]]] = field(default_factory=list)

    def replay(self) -> ChainState:
        x = self.state
        for s, winners in self.witness:
            if s != x:
                raise ValueError(f"witness expects state {s}, replay is at {x}")
            x = step_with_winners(x, winners)
        return x


def min_time_to_free(x: ChainState) -> ReachabilityCertificate:
    """Fewest steps to a constant state over all winner sequences, with a witness path."""
    _check_cap(x.n, BFS_CAP)
    if is_free_movement(x):
        return ReachabilityCertificate(x, 0)
    parent: dict[ChainState, tuple[ChainState, tuple[Side, ...]] | None] = {x: None}
    queue = deque([x])
    while queue:
        cur = queue.popleft()
        for winners in winner_assignments(cur):
            nxt = step_with_winners(cur, winners)
            if nxt in parent:
                continue
            parent[nxt] = (cur, winners)
            if is_free_movement(nxt):
                path = []
                node = nxt
                while parent[node] is not None:
                    prev, w = parent[node]
                    path.append((prev, w))
                    node = prev
                path.reverse()
                return ReachabilityCertificate(x, len(path), path)
            queue.append(nxt)
    return ReachabilityCertificate(x, math.inf)


def _successor_codes(n: int, code: int) -> set[int]:
    full = (1 << n) - 1
    rot = ((code >> 1) | ((code & 1) << (n - 1))) & full
    comps = ~code & rot & full
    nodes = [i for i in range(n) if comps >> i & 1]
    out = set()
    for choice in range(1 << len(nodes)):
        losers = 0
        for k, i in enumerate(nodes):
            # bit set: right particle i+1 wins, so particle i is held
            losers |= 1 << i if choice >> k & 1 else 1 << ((i + 1) % n)
        out.add(code ^ (full & ~losers))
    return out


def min_time_table(n: int) -> list[float]:
    """Minimum steps to free movement for every state code, by backward BFS
    from the two constant states over the all-assignments transition graph."""
    _check_cap(n, BFS_CAP)
    size = 1 << n
    preds: list[list[int]] = [[] for _ in range(size)]
    for code in range(size):
        for nxt in _successor_codes(n, code):
            preds[nxt].append(code)
    dist = [math.inf] * size
    queue = deque()
    for c in (0, size - 1):
        dist[c] = 0
        queue.append(c)
    while queue:
        c = queue.popleft()
        for p in preds[c]:
            if dist[p] == math.inf:
                dist[p] = dist[c] + 1
                queue.append(p)
    return dist


def time_to_free_under_rule(x: ChainState, rule: Rule, horizon: int | None = None) -> float:
    """Steps until the deterministic orbit first hits a constant state.

    Returns ``math.inf`` once a state repeats (the orbit is a cycle that
    avoids free movement).  The default horizon ``2 ** n`` is exact.
    """
    if horizon is None:
        horizon = 1 << x.n
    seen = set()
    for t in range(horizon + 1):
        if is_free_movement(x):
            return t
        if x in seen:
            return math.inf
        seen.add(x)
        x = step_deterministic(x, rule)
    return math.inf


@dataclass
class CheckReport:
    name: str
    n: int
    checked: int
    counterexamples: list[str] = field(default_factory=list)
    max_steps: float | None = None

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = "" if self.max_steps is None else f", max a = {self.max_steps}"
        return f"{self.name} n={self.n}: {status} ({self.checked} cases{extra})"


def check_theorem1(n: int) -> CheckReport:
    """a(x, long-cluster) == l(x) == BFS optimum for every state."""
    _check_cap(n, BFS_CAP)
    table = min_time_table(n)
    rule = LongCluster()
    report = CheckReport("Theorem 1", n, 0, max_steps=0)
    for x in all_states(n):
        a = time_to_free_under_rule(x, rule)
        l = _cluster_stats_code(n, x.code).l
        best = table[x.code]
        report.checked += 1
        report.max_steps = max(report.max_steps, a)
        if not a == l == best:
            cert = min_time_to_free(x)
            path = " ".join(f"{s}/{''.join(w.value for w in ws)}" for s, ws in cert.witness)
            report.counterexamples.append(
                f"state={x} a_long_cluster={a} l={l} bfs_min={best} witness=[{path}]")
    return report


def check_lemma1(n: int) -> CheckReport:
    """l(next) >= l(x) - 1 for every state and every winner assignment."""
    _check_cap(n, LEMMA1_CAP)
    report = CheckReport("Lemma 1", n, 0)
    for x in all_states(n):
        l = _cluster_stats_code(n, x.code).l
        for winners in winner_assignments(x):
            y = step_with_winners(x, winners)
            report.checked += 1
            ly = _cluster_stats_code(n, y.code).l
            if ly < l - 1:
                report.counterexamples.append(
                    f"state={x} winners={''.join(w.value for w in winners)} "
                    f"next={y} l={l} l_next={ly}")
    return report


def check_lemma2_decrement(n: int) -> CheckReport:
    """Under long-cluster, l drops by exactly one whenever l >= 1."""
    _check_cap(n, BFS_CAP)
    rule = LongCluster()
    report = CheckReport("Lemma 2 (decrement)", n, 0)
    for x in all_states(n):
        l = _cluster_stats_code(n, x.code).l
        if l < 1:
            continue
        y = step_deterministic(x, rule)
        ly = _cluster_stats_code(n, y.code).l
        report.checked += 1
        if ly != l - 1:
            report.counterexamples.append(f"state={x} next={y} l={l} l_next={ly}")
    return report


def run_suite(n_min: int = 2, n_max: int = 10) -> list[CheckReport]:
    """Theorem 1 and Lemma 2 up to ``n_max``; Lemma 1 up to ``min(n_max, 10)``."""
    reports = []
    for n in range(n_min, n_max + 1):
        reports.append(check_theorem1(n))
    for n in range(n_min, min(n_max, LEMMA1_CAP) + 1):
        reports.append(check_lemma1(n))
    for n in range(n_min, n_max + 1):
        reports.append(check_lemma2_decrement(n))
    return reports
