"""Minimum-cost bipartite assignment (Hungarian / Kuhn-Munkres)."""

from __future__ import annotations

import math

import numpy as np


def _solve_square(c):
    """Shortest augmenting path with row/column potentials, O(n^3).

    ``c`` is a square list-of-lists. Returns ``col_of_row``. Column scans use a
    strict ``<`` so ties resolve to the smallest column index.
    """
    n = len(c)
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row (1-based) matched to column j; column 0 is virtual
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = c[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = [0] * n
    for j in range(1, n + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


def hungarian(cost) -> list[tuple[int, int]]:
    """Assign ``min(n, m)`` (row, col) pairs of minimal total cost.

    Rectangular inputs are padded to a square with a constant sentinel of
    ``10 * (1 + max cost)``; pairs landing on padding are dropped. Output is
    sorted by row.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    n, m = cost.shape
    if n == 0 or m == 0:
        return []
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost entries must be finite")
    size = max(n, m)
    sentinel = 10.0 * (1.0 + float(cost.max()))
    padded = np.full((size, size), sentinel)
    padded[:n, :m] = cost
    cols = _solve_square(padded.tolist())
    return [(r, c) for r, c in enumerate(cols) if r < n and c < m]
