import numpy as np
import pytest

from conftest import bfs_cost
from warebot.benchmark import (
    benchmark_planners,
    benchmark_csv,
    draw_solvable_pairs,
    kernel_search_cost,
    parse_sizes,
    random_occupancy_map,
    warm_up_kernels,
)
from warebot.mapping import OccupancyGridMap
from warebot.planner import (
    GridNode,
    InvalidEndpointError,
    PlannedPath,
    UnreachableGoalError,
    _HeapOpenSet,
    astar_search,
    dijkstra_search,
    manhattan,
    reconstruct_path,
)


def grid_map(reachable):
    return OccupancyGridMap.from_reachable(np.asarray(reachable, dtype=bool))


def assert_valid_path(path, ogm, start, end):
    assert path.cells[0] == tuple(start)
    assert path.cells[-1] == tuple(end)
    for a, b in zip(path.cells, path.cells[1:]):
        assert manhattan(a, b) == 1
    for cell in path.cells:
        assert ogm.reachable(*cell)


# --------------------------------------------------------------- manhattan

def test_manhattan_basic():
    assert manhattan((0, 0), (0, 0)) == 0
    assert manhattan((0, 0), (3, 4)) == 7


def test_manhattan_symmetric(rng):
    for _ in range(50):
        a = tuple(rng.integers(-50, 50, 2))
        b = tuple(rng.integers(-50, 50, 2))
        assert manhattan(a, b) == manhattan(b, a)


# ------------------------------------------------------------------ search

@pytest.mark.parametrize("kind", ["binary_heap", "linked_list"])
def test_start_equals_end(kind):
    ogm = grid_map(np.ones((3, 3)))
    path = astar_search((1, 1), (1, 1), ogm, kind)
    assert path.cells == [(1, 1)]
    assert path.cost == 0


@pytest.mark.parametrize("kind", ["binary_heap", "linked_list"])
def test_empty_grid_staircase(kind):
    ogm = grid_map(np.ones((3, 3)))
    path = astar_search((0, 0), (2, 2), ogm, kind)
    assert path.cost == 4
    assert_valid_path(path, ogm, (0, 0), (2, 2))
    # monotone staircase: every move increases h or v
    for a, b in zip(path.cells, path.cells[1:]):
        assert b[0] >= a[0] and b[1] >= a[1]


@pytest.mark.parametrize("kind", ["binary_heap", "linked_list"])
def test_wall_with_gap_matches_bfs(kind):
    reachable = np.ones((5, 5), dtype=bool)
    reachable[2, :] = False
    reachable[2, 3] = True  # single gap
    ogm = grid_map(reachable)
    path = astar_search((0, 0), (4, 0), ogm, kind)
    assert path.cost == bfs_cost(reachable, (0, 0), (4, 0))
    assert_valid_path(path, ogm, (0, 0), (4, 0))


@pytest.mark.parametrize("search", [astar_search, dijkstra_search])
def test_fully_walled_is_unreachable(search):
    reachable = np.ones((5, 5), dtype=bool)
    reachable[2, :] = False
    ogm = grid_map(reachable)
    with pytest.raises(UnreachableGoalError):
        search((0, 0), (4, 0), ogm)


def test_occupied_endpoint_rejected():
    reachable = np.ones((4, 4), dtype=bool)
    reachable[1, 1] = False
    ogm = grid_map(reachable)
    with pytest.raises(InvalidEndpointError):
        astar_search((1, 1), (3, 3), ogm)
    with pytest.raises(InvalidEndpointError):
        astar_search((0, 0), (1, 1), ogm)


def test_endpoint_outside_window_rejected():
    ogm = grid_map(np.ones((4, 4)))
    with pytest.raises(InvalidEndpointError):
        astar_search((0, 0), (9, 9), ogm)


def test_dijkstra_matches_astar_on_random_maps(rng):
    solvable = 0
    for _ in range(200):
        reachable = rng.random((32, 32)) >= 0.25
        ogm = grid_map(reachable)
        start = (int(rng.integers(32)), int(rng.integers(32)))
        end = (int(rng.integers(32)), int(rng.integers(32)))
        if not (reachable[start] and reachable[end]):
            continue
        oracle = bfs_cost(reachable, start, end)
        if oracle is None:
            with pytest.raises(UnreachableGoalError):
                astar_search(start, end, ogm)
            with pytest.raises(UnreachableGoalError):
                dijkstra_search(start, end, ogm)
            continue
        solvable += 1
        assert astar_search(start, end, ogm).cost == oracle
        assert dijkstra_search(start, end, ogm).cost == oracle
    assert solvable > 100


def test_open_set_kinds_agree_on_cost(rng):
    for _ in range(50):
        reachable = rng.random((24, 24)) >= 0.3
        ogm = grid_map(reachable)
        start = (int(rng.integers(24)), int(rng.integers(24)))
        end = (int(rng.integers(24)), int(rng.integers(24)))
        if not (reachable[start] and reachable[end]):
            continue
        if bfs_cost(reachable, start, end) is None:
            continue
        heap_path = astar_search(start, end, ogm, "binary_heap")
        list_path = astar_search(start, end, ogm, "linked_list")
        assert heap_path.cost == list_path.cost


def test_no_cell_expanded_twice(rng):
    for _ in range(20):
        reachable = rng.random((20, 20)) >= 0.25
        ogm = grid_map(reachable)
        start = (int(rng.integers(20)), int(rng.integers(20)))
        end = (int(rng.integers(20)), int(rng.integers(20)))
        if not (reachable[start] and reachable[end]):
            continue
        expanded = []
        try:
            astar_search(start, end, ogm, "binary_heap", expanded=expanded)
        except UnreachableGoalError:
            pass
        assert len(expanded) == len(set(expanded))


def test_adding_obstacles_never_shortens_paths(rng):
    for _ in range(30):
        reachable = rng.random((16, 16)) >= 0.15
        start, end = (0, 0), (15, 15)
        reachable[start] = reachable[end] = True
        before = bfs_cost(reachable, start, end)
        if before is None:
            continue
        ogm = grid_map(reachable)
        base = astar_search(start, end, ogm).cost
        blocked = reachable.copy()
        cells = np.argwhere(blocked)
        for h, v in cells[rng.integers(len(cells), size=6)]:
            if (h, v) not in (start, end):
                blocked[h, v] = False
        if bfs_cost(blocked, start, end) is None:
            continue
        assert astar_search(start, end, grid_map(blocked)).cost >= base


# --------------------------------------------------------- reconstruction

def test_reconstruct_start_only():
    node = GridNode(2, 3, g=0, f=0)
    assert reconstruct_path(node).cells == [(2, 3)]


def test_reconstruct_linear_chain():
    nodes = [GridNode(0, i, g=i, f=i) for i in range(5)]
    for i in range(1, 5):
        nodes[i].father = nodes[i - 1]
    path = reconstruct_path(nodes[-1])
    assert path.cells == [(0, i) for i in range(5)]
    assert path.cost == 4


def test_reconstruct_detects_cycle():
    a = GridNode(0, 0, g=0, f=0)
    b = GridNode(0, 1, g=1, f=1, father=a)
    a.father = b
    with pytest.raises(AssertionError):
        reconstruct_path(b)


def test_path_adjacency_invariant_on_random_map(rng):
    reachable = rng.random((30, 30)) >= 0.2
    ogm = grid_map(reachable)
    for _ in range(20):
        start = (int(rng.integers(30)), int(rng.integers(30)))
        end = (int(rng.integers(30)), int(rng.integers(30)))
        if not (reachable[start] and reachable[end]):
            continue
        try:
            path = astar_search(start, end, ogm)
        except UnreachableGoalError:
            continue
        assert_valid_path(path, ogm, start, end)


# ------------------------------------------------------------ binary heap

def test_heap_pop_matches_sorted_oracle(rng):
    heap = _HeapOpenSet()
    oracle = {}
    seq = 0
    popped = []
    oracle_popped = []
    for step in range(500):
        if oracle and rng.random() < 0.4:
            cell = min(oracle, key=oracle.__getitem__)
            oracle_popped.append(cell)
            del oracle[cell]
            popped.append(heap.pop_min())
        else:
            cell = (int(rng.integers(40)), int(rng.integers(40)))
            f, g = int(rng.integers(40)), int(rng.integers(20))
            if cell in oracle:
                del oracle[cell]
                heap.remove(cell)
            seq += 1
            oracle[cell] = (f, -g, seq)
            heap.push(cell, f, g)
    while oracle:
        cell = min(oracle, key=oracle.__getitem__)
        oracle_popped.append(cell)
        del oracle[cell]
        popped.append(heap.pop_min())
    assert popped == oracle_popped


# --------------------------------------------------------------- kernels

def test_kernels_match_bfs_and_canonical(rng):
    warm_up_kernels()
    for _ in range(60):
        reachable = rng.random((24, 24)) >= 0.25
        start = (int(rng.integers(24)), int(rng.integers(24)))
        end = (int(rng.integers(24)), int(rng.integers(24)))
        if not (reachable[start] and reachable[end]):
            continue
        oracle = bfs_cost(reachable, start, end)
        kernel_costs = {m: kernel_search_cost(reachable, start, end, m)
                        for m in ("astar_heap", "astar_list", "dijkstra")}
        if oracle is None:
            assert all(c == -1 for c in kernel_costs.values())
            continue
        assert all(c == oracle for c in kernel_costs.values()), kernel_costs
        ogm = grid_map(reachable)
        assert astar_search(start, end, ogm).cost == oracle


def test_benchmark_emits_nine_rows():
    rows = benchmark_planners([(24, 18), (32, 24), (40, 30)], n_pairs=3, seed=5)
    assert len(rows) == 9
    csv_text = benchmark_csv(rows)
    lines = csv_text.strip().splitlines()
    assert lines[0] == "width,height,method,mean_seconds,pairs"
    assert len(lines) == 10


def test_draw_solvable_pairs_are_solvable(rng):
    ogm = random_occupancy_map(40, 30, 0.25, rng)
    reachable = ogm.dense_reachable()
    pairs = draw_solvable_pairs(reachable, 20, rng)
    assert len(pairs) == 20
    for start, end in pairs:
        assert bfs_cost(reachable, start, end) is not None


def test_parse_sizes():
    assert parse_sizes("168x120,336x240,672x480") == [(168, 120), (336, 240), (672, 480)]
