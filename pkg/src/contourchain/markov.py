"""Exact Markov analysis of the epsilon dynamics over all 2**n states."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .chain import ChainState, Rule, _cluster_stats_code, all_states, move_mask
from .stochastic import check_epsilon

DEFAULT_EXACT_CAP = 14
DENSE_SOLVE_LIMIT = 1 << 13


class ExactCapacityError(ValueError):
    pass


class ReducibleChainError(RuntimeError):
    """Raised when the chain has more than one recurrent class."""

    def __init__(self, classes: list[list[int]]):
        self.classes = classes
        shown = "; ".join("{" + ", ".join(map(str, c[:8])) + (", ..." if len(c) > 8 else "") + "}"
                          for c in classes[:6])
        super().__init__(f"{len(classes)} recurrent classes (state codes): {shown}")


def exact_cap() -> int:
    """Largest n accepted for exact analysis; ``CONTOUR_EXACT_CAP`` overrides."""
    raw = os.environ.get("CONTOUR_EXACT_CAP")
    return int(raw) if raw else DEFAULT_EXACT_CAP


def mask_matrix(n: int, rule: Rule) -> np.ndarray:
    """``M[x, i] = 1`` iff particle i moves from state code x deterministically."""
    rule.check_size(n)
    return np.array([move_mask(x, rule) for x in all_states(n)], dtype=np.int8)


@dataclass
class TransitionMatrix:
    n: int
    eps: float
    rule: str
    P: sp.csr_matrix
    masks: np.ndarray = field(repr=False)

    def dense(self) -> np.ndarray:
        return self.P.toarray()

    def __getitem__(self, xy):
        x, y = xy
        return float(self.P[x, y])


def _subset_tables(n: int):
    tables = []
    for k in range(n + 1):
        idx = np.arange(1 << k)
        bits = ((idx[:, None] >> np.arange(k)) & 1).astype(np.int64)
        tables.append((bits, bits.sum(axis=1)))
    return tables


def build_matrix(n: int, rule: Rule, eps: float) -> TransitionMatrix:
    """Row-stochastic transition matrix of the epsilon dynamics.

    ``P[x, y]`` is the product over allowed movers ``i`` of ``1 - eps`` if
    ``y_i != x_i`` and ``eps`` otherwise; non-movers must keep their cell.
    """
    cap = exact_cap()
    if n > cap:
        raise ExactCapacityError(
            f"n={n} exceeds the exact-analysis cap of {cap}; use Monte Carlo (mc) "
            f"or raise CONTOUR_EXACT_CAP")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    eps = check_epsilon(eps)
    masks = mask_matrix(n, rule)
    q = 1.0 - eps
    subsets = _subset_tables(n)
    weights = 1 << np.arange(n, dtype=np.int64)
    rows, cols, vals = [], [], []
    for x in range(1 << n):
        movers = weights[masks[x] == 1]
        k = len(movers)
        bits, flips = subsets[k]
        prob = q ** flips * eps ** (k - flips)
        keep = prob > 0
        rows.append(np.full(keep.sum(), x, dtype=np.int64))
        cols.append(x ^ (bits[keep] @ movers))
        vals.append(prob[keep])
    size = 1 << n
    P = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(size, size))
    return TransitionMatrix(n, eps, rule.name, P, masks)


def recurrent_classes(P: sp.spmatrix) -> list[list[int]]:
    """Closed communicating classes of the positive-entry graph."""
    ncomp, labels = connected_components(P, directed=True, connection="strong")
    coo = sp.coo_matrix(P)
    leaving = np.zeros(ncomp, dtype=bool)
    cross = labels[coo.row] != labels[coo.col]
    leaving[labels[coo.row[cross]]] = True
    return [np.flatnonzero(labels == c).tolist() for c in range(ncomp) if not leaving[c]]


@dataclass
class StationaryDistribution:
    pi: np.ndarray
    residual: float

    def __getitem__(self, x):
        return self.pi[x]

    def mass(self, codes: Sequence[int]) -> float:
        return float(self.pi[list(codes)].sum())


def stationary(tm: TransitionMatrix) -> StationaryDistribution:
    """Unique stationary law by a direct linear solve.

    One balance equation is replaced by the normalisation constraint.  A chain
    with several recurrent classes raises :class:`ReducibleChainError`.
    """
    classes = recurrent_classes(tm.P)
    if len(classes) != 1:
        raise ReducibleChainError(classes)
    size = tm.P.shape[0]
    b = np.zeros(size)
    b[-1] = 1.0
    # dense LU is faster up to a few thousand states; sparse LU avoids the n=14 memory wall
    if size <= DENSE_SOLVE_LIMIT:
        A = tm.P.T.toarray()
        A[np.diag_indices(size)] -= 1.0
        A[-1, :] = 1.0
        pi = scipy.linalg.solve(A, b, overwrite_a=True, overwrite_b=True)
    else:
        A = (tm.P.T - sp.identity(size, format="csr")).tolil()
        A[-1, :] = np.ones(size)
        pi = spsolve(A.tocsc(), b)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = float(np.abs(tm.P.T @ pi - pi).max())
    return StationaryDistribution(pi, residual)


def stationary_power(tm: TransitionMatrix, tol: float = 1e-12,
                     max_iter: int = 10_000_000) -> StationaryDistribution:
    """Power iteration from the uniform law; slow for tiny eps, used as a cross-check."""
    size = tm.P.shape[0]
    PT = tm.P.T.tocsr()
    pi = np.full(size, 1.0 / size)
    for _ in range(max_iter):
        nxt = PT @ pi
        # lazy averaging kills periodicity without moving the fixed point
        nxt = 0.5 * (nxt + pi)
        if np.abs(nxt - pi).max() < tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise RuntimeError("power iteration did not converge")
    pi /= pi.sum()
    return StationaryDistribution(pi, float(np.abs(PT @ pi - pi).max()))


@dataclass
class VelocityReport:
    v: np.ndarray
    eps: float
    rule: str

    @property
    def v_avg(self) -> float:
        return float(self.v.mean())


def velocities(tm: TransitionMatrix, dist: StationaryDistribution) -> VelocityReport:
    """``v_i = (1 - eps) * sum_x pi(x) * m_i(x)``."""
    v = (1.0 - tm.eps) * (dist.pi @ tm.masks.astype(float))
    return VelocityReport(v, tm.eps, tm.rule)


@dataclass(frozen=True)
class MacrostatePartition:
    names: tuple[str, ...]
    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = sorted(c for g in self.groups for c in g)
        if len(flat) != len(set(flat)):
            raise ValueError("macrostate groups overlap")

    def check_covers(self, n: int) -> None:
        if sorted(c for g in self.groups for c in g) != list(range(1 << n)):
            raise ValueError(f"partition does not cover the {1 << n} states of n={n}")


def three_contour_partition() -> MacrostatePartition:
    """G1 = {000}, G2 = {111}, G3 = two ones, G4 = one one (codes, bit i = d_i)."""
    def codes(*strings):
        return tuple(ChainState.from_string(s).code for s in strings)
    return MacrostatePartition(
        ("G1", "G2", "G3", "G4"),
        (codes("000"), codes("111"), codes("011", "101", "110"), codes("001", "010", "100")),
    )


@dataclass
class LumpResult:
    names: tuple[str, ...]
    matrix: np.ndarray
    discrepancy: float

    def p(self, src: str, dst: str) -> float:
        return float(self.matrix[self.names.index(src), self.names.index(dst)])


def lump(tm: TransitionMatrix, partition: MacrostatePartition) -> LumpResult:
    """Macro transition probabilities read off the first state of each group.

    ``discrepancy`` is the largest deviation of any other group member's
    row sums from the representative's; zero means exactly lumpable.
    """
    partition.check_covers(tm.n)
    P = tm.P.tocsc()
    k = len(partition.groups)
    agg = np.column_stack([np.asarray(P[:, list(g)].sum(axis=1)).ravel() for g in partition.groups])
    macro = np.zeros((k, k))
    worst = 0.0
    for a, g in enumerate(partition.groups):
        rows = agg[list(g)]
        macro[a] = rows[0]
        worst = max(worst, float(np.abs(rows - rows[0]).max()))
    return LumpResult(partition.names, macro, worst)


def level_sets(n: int) -> list[list[int]]:
    """``S_i`` = codes with ``min(l0, l1) == i``, for ``i = 0 .. n // 2``."""
    sets = [[] for _ in range(n // 2 + 1)]
    for code in range(1 << n):
        sets[_cluster_stats_code(n, code).l].append(code)
    return sets


def level_set_probs(dist: StationaryDistribution, n: int) -> np.ndarray:
    return np.array([dist.mass(s) if s else 0.0 for s in level_sets(n)])


@dataclass
class ExpansionFit:
    """Polynomial fit ``f(eps) ~ constant + slope * eps + curvature * eps**2``."""

    constant: float
    slope: float
    curvature: float | None


def fit_expansion(eps: Sequence[float], values: Sequence[float]) -> ExpansionFit:
    """Interpolate through the sample points with degree ``len - 1`` (at most 2).

    Two points give the first-order coefficients; a third point estimates the
    second-order remainder and removes its bias from the slope.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(eps) < 2:
        raise ValueError("need at least two epsilon values to fit")
    deg = min(len(eps) - 1, 2)
    V = np.vander(eps, deg + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, values, rcond=None)
    return ExpansionFit(float(coef[0]), float(coef[1]), float(coef[2]) if deg == 2 else None)


@dataclass
class SweepTable:
    n: int
    rule: str
    header: list[str]
    rows: list[list[float]]
    reports: list[VelocityReport]

    def column(self, name: str) -> np.ndarray:
        j = self.header.index(name)
        return np.array([r[j] for r in self.rows])


def epsilon_sweep(n: int, rule: Rule, eps_list: Sequence[float], *,
                  groups: MacrostatePartition | None = None,
                  levels: bool = False) -> SweepTable:
    """One exact solve per epsilon, rows in input order."""
    if not eps_list:
        raise ValueError("epsilon list is empty")
    header = ["epsilon", "v_avg"] + [f"v_{i}" for i in range(n)]
    if groups is not None:
        header += list(groups.names)
    if levels:
        header += [f"P_{i}" for i in range(n // 2 + 1)]
    rows, reports = [], []
    for eps in eps_list:
        eps = check_epsilon(eps)
        if eps == 0.0:
            raise ValueError("epsilon must be positive for a stationary solve")
        tm = build_matrix(n, rule, eps)
        dist = stationary(tm)
        rep = velocities(tm, dist)
        row = [eps, rep.v_avg, *rep.v.tolist()]
        if groups is not None:
            row += [dist.mass(g) for g in groups.groups]
        if levels:
            row += level_set_probs(dist, n).tolist()
        rows.append(row)
        reports.append(rep)
    return SweepTable(n, rule.name, header, rows, reports)


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def sweep_csv(table: SweepTable) -> str:
    lines = [",".join(table.header)]
    lines += [",".join(format_float(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"
