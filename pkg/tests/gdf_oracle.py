"""Independent brute-force Dijkstra over the weighted grid (test oracle).

Re-derives edge weights from the documented rule (step length times one plus
the mean endpoint cost) and searches with a plain binary heap; shares no code
with the planner's field construction.
"""

import heapq
import math

import numpy as np

_SQRT2 = math.sqrt(2.0)


def dijkstra_oracle(cost, resolution, goal, lethal=1.0):
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    dist = np.full((n, m), np.inf)
    gi, gj = goal
    if cost[gi, gj] >= lethal:
        return dist
    dist[gi, gj] = 0.0
    heap = [(0.0, gi, gj)]
    visited = np.zeros((n, m), dtype=bool)
    while heap:
        d, i, j = heapq.heappop(heap)
        if visited[i, j]:
            continue
        visited[i, j] = True
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                a, b = i + di, j + dj
                if not (0 <= a < n and 0 <= b < m) or visited[a, b]:
                    continue
                if cost[a, b] >= lethal:
                    continue
                length = resolution * (_SQRT2 if di != 0 and dj != 0 else 1.0)
                w = length * (1.0 + 0.5 * (cost[i, j] + cost[a, b]))
                nd = d + w
                if nd < dist[a, b]:
                    dist[a, b] = nd
                    heapq.heappush(heap, (nd, a, b))
    return dist
