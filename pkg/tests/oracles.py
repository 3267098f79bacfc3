"""Brute-force reference computations, kept independent of the package code paths."""
import itertools
from fractions import Fraction


def pairwise_competitions(cells):
    n = len(cells)
    return [i for i in range(n) if (cells[i], cells[(i + 1) % n]) == (0, 1)]


def rotation_scan_runs(cells):
    """Longest cyclic run of each value by testing every window at every start."""
    n = len(cells)
    best = {0: 0, 1: 0}
    for v in (0, 1):
        for start in range(n):
            for length in range(1, n + 1):
                if all(cells[(start + k) % n] == v for k in range(length)):
                    best[v] = max(best[v], length)
    return best[0], best[1]


def traced_mask(cells, winner_of):
    """Move flags from a direct reading of the node semantics.

    ``winner_of(node)`` returns "L" or "R".  Particle i heads for node i when
    in cell 0 and for node i-1 when in cell 1; it is blocked only if another
    particle heads for the same node and wins.
    """
    n = len(cells)
    target = [i if cells[i] == 0 else (i - 1) % n for i in range(n)]
    mask = []
    for i in range(n):
        rivals = [j for j in range(n) if j != i and target[j] == target[i]]
        if not rivals:
            mask.append(1)
            continue
        node = target[i]
        i_is_left = cells[i] == 0
        w = winner_of(node)
        mask.append(1 if (w == "L") == i_is_left else 0)
    return tuple(mask)


def transition_row_by_attempts(cells, mask, eps):
    """Distribution of the next state, marginalising over every particle's
    attempt outcome (failures drawn for all n particles, movers or not)."""
    n = len(cells)
    row = {}
    for fails in itertools.product((0, 1), repeat=n):
        p = 1
        for f in fails:
            p *= eps if f else (1 - eps)
        nxt = tuple(d ^ (m and not f) for d, m, f in zip(cells, mask, fails))
        row[nxt] = row.get(nxt, 0) + p
    return row


def code_of(cells):
    return sum(d << i for i, d in enumerate(cells))


def cells_of(n, code):
    return tuple((code >> i) & 1 for i in range(n))


def exact_rational_stationary(n, mask_of, eps):
    """Stationary law with exact Fraction arithmetic (Gauss-Jordan)."""
    size = 1 << n
    P = [[Fraction(0)] * size for _ in range(size)]
    for x in range(size):
        cells = cells_of(n, x)
        for y_cells, p in transition_row_by_attempts(cells, mask_of(cells), eps).items():
            P[x][code_of(y_cells)] += p
    A = [[P[j][i] - (1 if i == j else 0) for j in range(size)] for i in range(size)]
    A[-1] = [Fraction(1)] * size
    b = [Fraction(0)] * (size - 1) + [Fraction(1)]
    M = [row + [bb] for row, bb in zip(A, b)]
    for col in range(size):
        piv = next(r for r in range(col, size) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(size):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][-1] for r in range(size)]
