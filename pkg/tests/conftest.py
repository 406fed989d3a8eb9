from collections import deque

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_twist(rng, max_angle=np.pi - 1e-3, max_translation=2.0):
    """Sample a twist with rotation angle strictly below the log branch cut."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, max_angle)
    rho = rng.uniform(-max_translation, max_translation, size=3)
    return np.concatenate([rho, angle * axis])


def bfs_cost(reachable, start, end):
    """Oracle: breadth-first distance on a 4-connected boolean grid."""
    reachable = np.asarray(reachable, dtype=bool)
    if start == end:
        return 0
    dist = {start: 0}
    queue = deque([start])
    while queue:
        h, v = queue.popleft()
        for dh, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = (h + dh, v + dv)
            if not (0 <= nb[0] < reachable.shape[0]
                    and 0 <= nb[1] < reachable.shape[1]):
                continue
            if not reachable[nb] or nb in dist:
                continue
            dist[nb] = dist[(h, v)] + 1
            if nb == end:
                return dist[nb]
            queue.append(nb)
    return None
