"""Deterministic dynamics of a binary closed chain of contours.

Contour ``i`` holds one particle in cell 0 (lower) or cell 1 (upper).  Node
``i`` is shared by contours ``i`` and ``i + 1`` (mod n).  Particle ``i`` crosses
node ``i`` when it moves 0 -> 1, and particle ``i + 1`` crosses the same node
when it moves 1 -> 0.  Both trying at once is a competition, settled by a rule.

States are encoded as integers with bit ``i`` equal to ``d_i``.  The string
form puts ``d_0`` first, so ``"011"`` is the state ``(0, 1, 1)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence


class Side(enum.Enum):
    """Winner of a competition.

    LEFT is the particle entering the node from cell 0 (index ``i`` at node
    ``i``), RIGHT the one entering from cell 1 (index ``i + 1``).
    """

    LEFT = "L"
    RIGHT = "R"


@dataclass(frozen=True)
class ChainState:
    n: int
    cells: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"a chain needs at least 2 contours, got n={self.n}")
        if len(self.cells) != self.n:
            raise ValueError(f"expected {self.n} cells, got {len(self.cells)}")
        if any(d not in (0, 1) for d in self.cells):
            raise ValueError(f"cells must be 0 or 1: {self.cells!r}")

    @property
    def code(self) -> int:
        return sum(d << i for i, d in enumerate(self.cells))

    @classmethod
    def from_code(cls, n: int, code: int) -> "ChainState":
        if not 0 <= code < (1 << n):
            raise ValueError(f"code {code} out of range for n={n}")
        return cls(n, tuple((code >> i) & 1 for i in range(n)))

    @classmethod
    def from_string(cls, s: str) -> "ChainState":
        if not s or any(c not in "01" for c in s):
            raise ValueError(f"state string must be a non-empty binary string: {s!r}")
        return cls(len(s), tuple(int(c) for c in s))

    def __str__(self) -> str:
        return "".join(str(d) for d in self.cells)

    def __getitem__(self, i: int) -> int:
        return self.cells[i % self.n]


def make_state(n: int, bits: Sequence[int]) -> ChainState:
    return ChainState(n, tuple(int(b) for b in bits))


def all_states(n: int) -> Iterable[ChainState]:
    """Every state of an n-contour chain, in code order."""
    for code in range(1 << n):
        yield ChainState.from_code(n, code)


class Competition(NamedTuple):
    node: int
    left_particle: int
    right_particle: int


def find_competitions(x: ChainState) -> list[Competition]:
    n = x.n
    return [
        Competition(i, i, (i + 1) % n)
        for i in range(n)
        if x.cells[i] == 0 and x.cells[(i + 1) % n] == 1
    ]


class ClusterStats(NamedTuple):
    l0: int
    l1: int

    @property
    def l(self) -> int:
        return min(self.l0, self.l1)


@lru_cache(maxsize=None)
def _cluster_stats_code(n: int, code: int) -> ClusterStats:
    full = (1 << n) - 1
    if code == 0:
        return ClusterStats(n, 0)
    if code == full:
        return ClusterStats(0, n)
    cells = [(code >> i) & 1 for i in range(n)]
    # start right after a value change so no run wraps around the origin
    start = next(i for i in range(n) if cells[i] != cells[i - 1])
    best = [0, 0]
    run = 0
    prev = None
    for k in range(n):
        d = cells[(start + k) % n]
        run = run + 1 if d == prev else 1
        prev = d
        best[d] = max(best[d], run)
    return ClusterStats(best[0], best[1])


def cluster_stats(x: ChainState) -> ClusterStats:
    """Longest cyclic runs of 0s and 1s."""
    return _cluster_stats_code(x.n, x.code)


def long_cluster_direction(x: ChainState) -> Side:
    s = cluster_stats(x)
    return Side.LEFT if s.l0 >= s.l1 else Side.RIGHT


def is_free_movement(x: ChainState) -> bool:
    """True for the constant states, the only ones where nobody is ever delayed."""
    return all(d == x.cells[0] for d in x.cells)


class Rule:
    """Competition resolution rule.

    Subclasses implement :meth:`resolve`.  ``name`` is the CLI spelling and
    ``rotation_invariant`` says whether relabelling contours by a cyclic shift
    commutes with the rule.
    """

    name = "rule"
    rotation_invariant = False

    def resolve(self, x: ChainState, c: Competition) -> Side:
        raise NotImplementedError

    def check_size(self, n: int) -> None:
        pass

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class LeftPriority(Rule):
    name = "left"
    rotation_invariant = True

    def resolve(self, x, c):
        return Side.LEFT


class RightPriority(Rule):
    name = "right"
    rotation_invariant = True

    def resolve(self, x, c):
        return Side.RIGHT


class OddEven(Rule):
    """The particle on the even-indexed contour wins.  Needs an even chain."""

    name = "odd-even"

    def __init__(self, n: int):
        if n % 2:
            raise ValueError(f"odd-even rule is undefined for odd n={n}")
        self.n = n

    def check_size(self, n):
        if n != self.n:
            raise ValueError(f"odd-even rule built for n={self.n}, used with n={n}")

    def resolve(self, x, c):
        return Side.LEFT if c.left_particle % 2 == 0 else Side.RIGHT

    def __repr__(self):
        return f"OddEven({self.n})"


class LongCluster(Rule):
    """Favour the side that shortens the longer cluster; ties go left."""

    name = "long-cluster"
    rotation_invariant = True

    def resolve(self, x, c):
        return long_cluster_direction(x)


class TableRule(Rule):
    """Explicit winner table keyed by ``(state code, node)``."""

    name = "table"

    def __init__(self, n: int, table: Mapping[tuple[int, int], Side]):
        self.n = n
        self.table = dict(table)
        for x in all_states(n):
            for c in find_competitions(x):
                if (x.code, c.node) not in self.table:
                    raise ValueError(f"table has no entry for state {x}, node {c.node}")

    def check_size(self, n):
        if n != self.n:
            raise ValueError(f"table rule built for n={self.n}, used with n={n}")

    def resolve(self, x, c):
        return self.table[(x.code, c.node)]

    def __repr__(self):
        return f"TableRule(n={self.n}, entries={len(self.table)})"


RULE_NAMES = ("left", "right", "odd-even", "long-cluster")


def rule_from_name(name: str, n: int) -> Rule:
    if name == "left":
        return LeftPriority()
    if name == "right":
        return RightPriority()
    if name == "odd-even":
        return OddEven(n)
    if name == "long-cluster":
        return LongCluster()
    raise ValueError(f"unknown rule {name!r}; choose from {', '.join(RULE_NAMES)}")


def resolve(rule: Rule, x: ChainState, c: Competition) -> Side:
    return rule.resolve(x, c)


def mask_for_winners(x: ChainState, winners: Sequence[Side]) -> tuple[int, ...]:
    """Move mask when the i-th competition of ``x`` is won by ``winners[i]``."""
    comps = find_competitions(x)
    if len(winners) != len(comps):
        raise ValueError(f"{len(comps)} competitions but {len(winners)} winners")
    mask = [1] * x.n
    for c, w in zip(comps, winners):
        loser = c.right_particle if w is Side.LEFT else c.left_particle
        mask[loser] = 0
    return tuple(mask)


def move_mask(x: ChainState, rule: Rule) -> tuple[int, ...]:
    """Per-particle flags: 1 if the particle moves in the deterministic step."""
    rule.check_size(x.n)
    return mask_for_winners(x, [rule.resolve(x, c) for c in find_competitions(x)])


def apply_mask(x: ChainState, mask: Sequence[int]) -> ChainState:
    return ChainState(x.n, tuple(d ^ m for d, m in zip(x.cells, mask)))


def step_with_winners(x: ChainState, winners: Sequence[Side]) -> ChainState:
    return apply_mask(x, mask_for_winners(x, winners))


def step_deterministic(x: ChainState, rule: Rule) -> ChainState:
    return apply_mask(x, move_mask(x, rule))


def mask_code(mask: Sequence[int]) -> int:
    return sum(m << i for i, m in enumerate(mask))
