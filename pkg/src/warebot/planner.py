"""Shortest-path search on the occupancy grid.

A* over 4-connected cells with unit move cost and the Manhattan heuristic;
the open set is either a binary heap (lazy deletion) or an unsorted pool
scanned linearly for the minimum (true deletion). Dijkstra is the same
search with a zero heuristic. The closed set is a hash set.

The goal's cost is final as soon as it enters the open set: every inserter
is one of its grid neighbours, so with unit moves and a consistent
heuristic a cheaper later discovery is impossible.
"""

import heapq
from dataclasses import dataclass

from .mapping import OccupancyGridMap


class UnreachableGoalError(RuntimeError):
    """No path exists between the requested endpoints."""


class InvalidEndpointError(ValueError):
    """Start or end cell is occupied or outside the map window."""


@dataclass(slots=True)
class GridNode:
    h: int
    v: int
    g: int
    f: int
    father: "GridNode | None" = None

    @property
    def cell(self):
        return (self.h, self.v)


@dataclass
class PlannedPath:
    """Ordered reachable cells from start to end; unit cost per move."""

    cells: list

    @property
    def cost(self) -> int:
        return len(self.cells) - 1

    def __len__(self):
        return len(self.cells)


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


_NEIGHBOR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class _HeapOpenSet:
    """Binary-heap open set with lazy deletion.

    Ties break on lower f, then higher g, then insertion order. Removals
    and updates leave stale heap entries behind; pops skip entries whose
    sequence number is no longer current.
    """

    def __init__(self):
        self._heap = []
        self._current = {}
        self._seq = 0

    def __len__(self):
        return len(self._current)

    def __contains__(self, cell):
        return cell in self._current

    def push(self, cell, f, g):
        self._seq += 1
        self._current[cell] = self._seq
        heapq.heappush(self._heap, (f, -g, self._seq, cell))

    def remove(self, cell):
        del self._current[cell]

    def pop_min(self):
        while self._heap:
            f, neg_g, seq, cell = heapq.heappop(self._heap)
            if self._current.get(cell) == seq:
                del self._current[cell]
                return cell
        raise KeyError("open set is empty")


class _ListOpenSet:
    """Unsorted open pool: O(N) scan for the minimum, true deletion."""

    def __init__(self):
        self._entries = {}
        self._seq = 0

    def __len__(self):
        return len(self._entries)

    def __contains__(self, cell):
        return cell in self._entries

    def push(self, cell, f, g):
        self._seq += 1
        self._entries[cell] = (f, -g, self._seq)

    def remove(self, cell):
        del self._entries[cell]

    def pop_min(self):
        cell = min(self._entries, key=self._entries.__getitem__)
        del self._entries[cell]
        return cell


_OPEN_SETS = {"binary_heap": _HeapOpenSet, "linked_list": _ListOpenSet}


def reconstruct_path(end_node: GridNode) -> PlannedPath:
    """Follow father pointers back to the start and reverse."""
    cells = []
    seen = set()
    node = end_node
    while node is not None:
        assert node.cell not in seen, "father chain has a cycle"
        seen.add(node.cell)
        cells.append(node.cell)
        node = node.father
    cells.reverse()
    return PlannedPath(cells)


def _search(start, end, ogm: OccupancyGridMap, heuristic, open_set_kind: str,
            expanded=None):
    try:
        make_open = _OPEN_SETS[open_set_kind]
    except KeyError:
        raise ValueError(f"unknown open set kind {open_set_kind!r}") from None
    start, end = tuple(start), tuple(end)
    for name, cell in (("start", start), ("end", end)):
        if not ogm.in_window(*cell):
            raise InvalidEndpointError(f"{name} cell {cell} is outside the map window")
        if not ogm.reachable(*cell):
            raise InvalidEndpointError(f"{name} cell {cell} is occupied")
    if start == end:
        return PlannedPath([start])

    nodes = {start: GridNode(start[0], start[1], g=0, f=heuristic(start, end))}
    open_set = make_open()
    open_set.push(start, nodes[start].f, 0)
    closed = set()

    while len(open_set):
        cell = open_set.pop_min()
        node = nodes[cell]
        closed.add(cell)
        if expanded is not None:
            expanded.append(cell)
        for dh, dv in _NEIGHBOR_STEPS:
            nb = (cell[0] + dh, cell[1] + dv)
            if nb in closed or not ogm.in_window(*nb) or not ogm.reachable(*nb):
                continue
            cost = node.g + 1
            known = nodes.get(nb)
            if nb in open_set:
                if cost < known.g:
                    open_set.remove(nb)
                else:
                    continue
            nb_node = GridNode(nb[0], nb[1], g=cost,
                               f=cost + heuristic(nb, end), father=node)
            nodes[nb] = nb_node
            open_set.push(nb, nb_node.f, nb_node.g)
            if nb == end:
                return reconstruct_path(nb_node)
    raise UnreachableGoalError(f"no path from {start} to {end}")


def astar_search(start, end, ogm: OccupancyGridMap,
                 open_set_kind: str = "binary_heap",
                 expanded=None) -> PlannedPath:
    """Optimal 4-connected path using the Manhattan heuristic.

    ``expanded`` may be a list that collects the pop order of closed cells.
    """
    return _search(start, end, ogm, manhattan, open_set_kind, expanded)


def dijkstra_search(start, end, ogm: OccupancyGridMap,
                    open_set_kind: str = "linked_list",
                    expanded=None) -> PlannedPath:
    """Baseline search with a zero heuristic."""
    return _search(start, end, ogm, lambda a, b: 0, open_set_kind, expanded)
