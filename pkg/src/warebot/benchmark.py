"""Planner timing benchmark on random occupancy maps.

The three searches (A* on a binary heap, A* on a linearly scanned open
pool, Dijkstra on the pool) are compiled with numba so the structural cost
profile, not interpreter overhead, dominates at the benchmark map sizes.
The kernels mirror the canonical searches cell for cell and are
cross-checked against them in the test suite.
"""

import csv
import io
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .mapping import OccupancyGridMap
from .planner import UnreachableGoalError

# key packs (f, -g): f ascending first, deeper nodes first among ties
_G_BITS = 21
_G_CAP = 1 << 20


@njit(cache=True)
def _heap_search_cost(reachable, sh, sv, eh, ev, use_heuristic):
    """Cost of the optimal path, or -1; binary heap with lazy deletion."""
    nh, nv = reachable.shape
    n = nh * nv
    start = sh * nv + sv
    end = eh * nv + ev
    if start == end:
        return 0
    g = np.full(n, -1, np.int64)
    closed = np.zeros(n, np.uint8)
    cap = 4 * n + 16
    heap_key = np.empty(cap, np.int64)
    heap_cell = np.empty(cap, np.int64)
    g[start] = 0
    h0 = abs(sh - eh) + abs(sv - ev) if use_heuristic else 0
    heap_key[0] = (h0 << _G_BITS) + _G_CAP
    heap_cell[0] = start
    size = 1
    while size > 0:
        cell = heap_cell[0]
        size -= 1
        key = heap_key[size]
        cur = heap_cell[size]
        i = 0
        while True:  # sift down the last element
            left = 2 * i + 1
            right = left + 1
            smallest = i
            k = key
            if left < size and heap_key[left] < k:
                smallest = left
                k = heap_key[left]
            if right < size and heap_key[right] < k:
                smallest = right
            if smallest == i:
                break
            heap_key[i] = heap_key[smallest]
            heap_cell[i] = heap_cell[smallest]
            i = smallest
        heap_key[i] = key
        heap_cell[i] = cur
        if closed[cell] == 1:
            continue  # stale lazy-deletion entry
        closed[cell] = 1
        ch = cell // nv
        cv = cell % nv
        cost = g[cell] + 1
        for step in range(4):
            if step == 0:
                th, tv = ch + 1, cv
            elif step == 1:
                th, tv = ch - 1, cv
            elif step == 2:
                th, tv = ch, cv + 1
            else:
                th, tv = ch, cv - 1
            if th < 0 or th >= nh or tv < 0 or tv >= nv:
                continue
            if not reachable[th, tv]:
                continue
            nb = th * nv + tv
            if closed[nb] == 1:
                continue
            if g[nb] != -1 and cost >= g[nb]:
                continue
            g[nb] = cost
            if nb == end:
                return cost
            f = cost + (abs(th - eh) + abs(tv - ev) if use_heuristic else 0)
            nkey = (f << _G_BITS) + (_G_CAP - cost)
            j = size
            size += 1
            while j > 0:  # sift up
                parent = (j - 1) // 2
                if heap_key[parent] <= nkey:
                    break
                heap_key[j] = heap_key[parent]
                heap_cell[j] = heap_cell[parent]
                j = parent
            heap_key[j] = nkey
            heap_cell[j] = nb
    return -1


@njit(cache=True)
def _list_search_cost(reachable, sh, sv, eh, ev, use_heuristic):
    """Cost of the optimal path, or -1; unsorted pool with linear min scan."""
    nh, nv = reachable.shape
    n = nh * nv
    start = sh * nv + sv
    end = eh * nv + ev
    if start == end:
        return 0
    g = np.full(n, -1, np.int64)
    closed = np.zeros(n, np.uint8)
    pool_key = np.empty(n, np.int64)
    pool_cell = np.empty(n, np.int64)
    pos = np.full(n, -1, np.int64)
    g[start] = 0
    h0 = abs(sh - eh) + abs(sv - ev) if use_heuristic else 0
    pool_key[0] = (h0 << _G_BITS) + _G_CAP
    pool_cell[0] = start
    pos[start] = 0
    size = 1
    while size > 0:
        mi = 0
        for i in range(1, size):  # O(N) find-min
            if pool_key[i] < pool_key[mi]:
                mi = i
        cell = pool_cell[mi]
        size -= 1
        if mi != size:  # true deletion by swap-remove
            pool_key[mi] = pool_key[size]
            pool_cell[mi] = pool_cell[size]
            pos[pool_cell[mi]] = mi
        pos[cell] = -1
        closed[cell] = 1
        ch = cell // nv
        cv = cell % nv
        cost = g[cell] + 1
        for step in range(4):
            if step == 0:
                th, tv = ch + 1, cv
            elif step == 1:
                th, tv = ch - 1, cv
            elif step == 2:
                th, tv = ch, cv + 1
            else:
                th, tv = ch, cv - 1
            if th < 0 or th >= nh or tv < 0 or tv >= nv:
                continue
            if not reachable[th, tv]:
                continue
            nb = th * nv + tv
            if closed[nb] == 1:
                continue
            if g[nb] != -1 and cost >= g[nb]:
                continue
            g[nb] = cost
            if nb == end:
                return cost
            f = cost + (abs(th - eh) + abs(tv - ev) if use_heuristic else 0)
            nkey = (f << _G_BITS) + (_G_CAP - cost)
            if pos[nb] >= 0:  # cheaper rediscovery: replace in place
                pool_key[pos[nb]] = nkey
            else:
                pool_key[size] = nkey
                pool_cell[size] = nb
                pos[nb] = size
                size += 1
    return -1


@njit(cache=True)
def _reachable_component(reachable, sh, sv):
    """Cells connected to (sh, sv), as a uint8 mask (BFS flood fill)."""
    nh, nv = reachable.shape
    n = nh * nv
    mask = np.zeros(n, np.uint8)
    queue = np.empty(n, np.int64)
    head = 0
    tail = 0
    queue[tail] = sh * nv + sv
    tail += 1
    mask[sh * nv + sv] = 1
    while head < tail:
        cell = queue[head]
        head += 1
        ch = cell // nv
        cv = cell % nv
        for step in range(4):
            if step == 0:
                th, tv = ch + 1, cv
            elif step == 1:
                th, tv = ch - 1, cv
            elif step == 2:
                th, tv = ch, cv + 1
            else:
                th, tv = ch, cv - 1
            if th < 0 or th >= nh or tv < 0 or tv >= nv:
                continue
            nb = th * nv + tv
            if reachable[th, tv] and mask[nb] == 0:
                mask[nb] = 1
                queue[tail] = nb
                tail += 1
    return mask.reshape(nh, nv)


METHODS = ("astar_heap", "astar_list", "dijkstra")


def kernel_search_cost(reachable: np.ndarray, start, end, method: str) -> int:
    """Path cost from the compiled kernel for one method; -1 when no path."""
    sh, sv = start
    eh, ev = end
    if method == "astar_heap":
        return int(_heap_search_cost(reachable, sh, sv, eh, ev, True))
    if method == "astar_list":
        return int(_list_search_cost(reachable, sh, sv, eh, ev, True))
    if method == "dijkstra":
        return int(_list_search_cost(reachable, sh, sv, eh, ev, False))
    raise ValueError(f"unknown method {method!r}")


def random_occupancy_map(width: int, height: int, density: float,
                         rng: np.random.Generator) -> OccupancyGridMap:
    """Uniform random occupancy at the given density; window at the origin."""
    reachable = rng.random((width, height)) >= density
    return OccupancyGridMap.from_reachable(reachable)


def draw_solvable_pairs(reachable: np.ndarray, n_pairs: int,
                        rng: np.random.Generator, max_tries: int = 1000):
    """Random start/end pairs with a path between them (re-drawn otherwise)."""
    nh, nv = reachable.shape
    total_reachable = int(reachable.sum())
    pairs = []
    tries = 0
    while len(pairs) < n_pairs:
        tries += 1
        if tries > max_tries:
            raise UnreachableGoalError("could not draw enough solvable pairs")
        sh, sv = int(rng.integers(nh)), int(rng.integers(nv))
        if not reachable[sh, sv]:
            continue
        component = _reachable_component(reachable, sh, sv)
        cand_h, cand_v = np.nonzero(component)
        # avoid seeding the whole benchmark inside a small isolated pocket
        if len(cand_h) < max(2, total_reachable // 2):
            continue
        need = n_pairs - len(pairs)
        picks = rng.integers(len(cand_h), size=need)
        for p in picks:
            eh, ev = int(cand_h[p]), int(cand_v[p])
            if (eh, ev) != (sh, sv):
                pairs.append(((sh, sv), (eh, ev)))
            # start cells vary across pairs: re-seed the next start
            sh, sv = eh, ev
            if len(pairs) == n_pairs:
                break
    return pairs[:n_pairs]


@dataclass(frozen=True)
class BenchmarkRow:
    width: int
    height: int
    method: str
    mean_seconds: float
    pairs: int


def warm_up_kernels():
    """Trigger JIT compilation outside the timed region."""
    tiny = np.ones((4, 4), dtype=bool)
    for method in METHODS:
        kernel_search_cost(tiny, (0, 0), (3, 3), method)
    _reachable_component(tiny, 0, 0)


def benchmark_planners(map_sizes, n_pairs: int = 50, obstacle_density: float = 0.25,
                       seed: int = 0):
    """Mean wall time of each method over the same solvable pairs per size.

    ``map_sizes`` is an iterable of (width, height). Returns one
    BenchmarkRow per size and method.
    """
    if n_pairs < 1:
        raise ValueError("need at least one start/end pair")
    warm_up_kernels()
    rng = np.random.default_rng(seed)
    rows = []
    for width, height in map_sizes:
        ogm = random_occupancy_map(width, height, obstacle_density, rng)
        reachable = ogm.dense_reachable()
        pairs = draw_solvable_pairs(reachable, n_pairs, rng)
        for method in METHODS:
            total = 0.0
            for start, end in pairs:
                t0 = time.perf_counter()
                cost = kernel_search_cost(reachable, start, end, method)
                total += time.perf_counter() - t0
                if cost < 0:
                    raise UnreachableGoalError(
                        f"pair {start}->{end} became unsolvable ({method})")
            rows.append(BenchmarkRow(width, height, method, total / n_pairs, n_pairs))
    return rows


def write_benchmark_csv(rows, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["width", "height", "method", "mean_seconds", "pairs"])
    for row in rows:
        writer.writerow([row.width, row.height, row.method,
                         f"{row.mean_seconds:.6f}", row.pairs])


def benchmark_csv(rows) -> str:
    buf = io.StringIO()
    write_benchmark_csv(rows, buf)
    return buf.getvalue()


def parse_sizes(text: str):
    """Parse '168x120,336x240' into [(168, 120), (336, 240)]."""
    sizes = []
    for token in text.split(","):
        w, _, h = token.strip().partition("x")
        sizes.append((int(w), int(h)))
    return sizes
