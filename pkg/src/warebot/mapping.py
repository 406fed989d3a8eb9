"""Occupancy grid mapping from keyframe depth points.

Keyframe pixels are back-projected, chained into the first keyframe's
coordinate frame, dropped onto the motion plane and counted into a sparse
signed-index grid. A cell is unreachable once its point count exceeds the
occupancy threshold.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import transform_point
from .vision import CameraIntrinsics


class DegenerateMapError(ValueError):
    """The map has no observed extent to compute statistics over."""


@dataclass
class WorldPointCloud:
    points: np.ndarray  # (N, 3)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        self.points = pts

    def __len__(self):
        return len(self.points)


def collect_world_points(chain, intr: CameraIntrinsics) -> WorldPointCloud:
    """Back-project every selected pixel of every keyframe into the frame of
    the first keyframe, using each keyframe's cached chain pose."""
    if not chain:
        raise ValueError("keyframe chain is empty")
    clouds = []
    for kf in chain:
        if len(kf) == 0:
            continue
        z = 1.0 / kf.depth_mean
        local = np.column_stack([
            (kf.pixel_u - intr.cx) / intr.fx * z,
            (kf.pixel_v - intr.cy) / intr.fy * z,
            z,
        ])
        clouds.append(transform_point(kf.world_pose, local))
    if not clouds:
        return WorldPointCloud(np.empty((0, 3)))
    return WorldPointCloud(np.vstack(clouds))


def project_to_plane(cloud: WorldPointCloud) -> np.ndarray:
    """Drop the height coordinate: (x, y, z) -> (x, z)."""
    return cloud.points[:, [0, 2]].copy()


@dataclass
class CellCounts:
    """Sparse rasterisation result with observed continuous extents."""

    cell_size_h: float
    cell_size_v: float
    counts: dict
    h_range: tuple | None       # observed (min, max) signed h indices
    v_range: tuple | None
    x_extent: tuple | None      # continuous (min, max) of point x
    z_extent: tuple | None

    @property
    def total(self):
        return sum(self.counts.values())


def rasterize(planar: np.ndarray, cell_size_h: float, cell_size_v: float) -> CellCounts:
    """Count points into signed grid cells: (floor(x/H), floor(z/V)).

    Floor rounds toward minus infinity, so negative coordinates produce
    negative indices.
    """
    if cell_size_h <= 0 or cell_size_v <= 0:
        raise ValueError("cell sizes must be positive")
    planar = np.asarray(planar, dtype=float).reshape(-1, 2)
    counts: dict = {}
    if len(planar) == 0:
        return CellCounts(cell_size_h, cell_size_v, counts, None, None, None, None)
    hs = np.floor(planar[:, 0] / cell_size_h).astype(int)
    vs = np.floor(planar[:, 1] / cell_size_v).astype(int)
    for h, v in zip(hs.tolist(), vs.tolist()):
        counts[(h, v)] = counts.get((h, v), 0) + 1
    return CellCounts(
        cell_size_h, cell_size_v, counts,
        h_range=(int(hs.min()), int(hs.max())),
        v_range=(int(vs.min()), int(vs.max())),
        x_extent=(float(planar[:, 0].min()), float(planar[:, 0].max())),
        z_extent=(float(planar[:, 1].min()), float(planar[:, 1].max())),
    )


@dataclass
class OccupancyGridMap:
    """Signed-index grid of point counts with a reachability threshold.

    A cell is reachable while its count stays at or below the threshold;
    cells with no points are reachable. The window (h_range, v_range) is the
    region handed to the planner.
    """

    cell_size_h: float
    cell_size_v: float
    occupied_threshold: int
    counts: dict = field(default_factory=dict)
    h_range: tuple = (0, 0)
    v_range: tuple = (0, 0)

    def __post_init__(self):
        if self.occupied_threshold < 0:
            raise ValueError("occupancy threshold must be non-negative")
        if self.h_range[0] > self.h_range[1] or self.v_range[0] > self.v_range[1]:
            raise ValueError("map window must be non-empty")
        for (h, v), c in self.counts.items():
            if c < 0:
                raise ValueError("cell counts must be non-negative")

    def count(self, h: int, v: int) -> int:
        return self.counts.get((h, v), 0)

    def reachable(self, h: int, v: int) -> bool:
        return self.count(h, v) <= self.occupied_threshold

    def in_window(self, h: int, v: int) -> bool:
        return (self.h_range[0] <= h <= self.h_range[1]
                and self.v_range[0] <= v <= self.v_range[1])

    @property
    def window_shape(self):
        return (self.h_range[1] - self.h_range[0] + 1,
                self.v_range[1] - self.v_range[0] + 1)

    def dense_reachable(self) -> np.ndarray:
        """Dense boolean window, indexed [h - h_min, v - v_min]."""
        arr = np.ones(self.window_shape, dtype=bool)
        h0, v0 = self.h_range[0], self.v_range[0]
        for (h, v), c in self.counts.items():
            if c > self.occupied_threshold and self.in_window(h, v):
                arr[h - h0, v - v0] = False
        return arr

    @classmethod
    def from_reachable(cls, reachable: np.ndarray, cell_size_h=1.0, cell_size_v=1.0,
                       origin=(0, 0)) -> "OccupancyGridMap":
        """Build a map from a dense boolean array (True = reachable)."""
        reachable = np.asarray(reachable, dtype=bool)
        h0, v0 = origin
        counts = {}
        for h, v in zip(*np.nonzero(~reachable)):
            counts[(int(h) + h0, int(v) + v0)] = 1
        return cls(
            cell_size_h=cell_size_h, cell_size_v=cell_size_v,
            occupied_threshold=0, counts=counts,
            h_range=(h0, h0 + reachable.shape[0] - 1),
            v_range=(v0, v0 + reachable.shape[1] - 1),
        )


def threshold_occupancy(cells: CellCounts, occupied_threshold: int,
                        h_range=None, v_range=None) -> OccupancyGridMap:
    """Turn raw cell counts into an occupancy map.

    The window defaults to the observed index ranges; pass explicit ranges
    to widen it (all unobserved cells are reachable). The window must
    contain every rasterised point.
    """
    h_range = h_range if h_range is not None else cells.h_range
    v_range = v_range if v_range is not None else cells.v_range
    if h_range is None or v_range is None:
        raise DegenerateMapError("no points and no explicit window")
    if cells.h_range is not None:
        if (h_range[0] > cells.h_range[0] or h_range[1] < cells.h_range[1]
                or v_range[0] > cells.v_range[0] or v_range[1] < cells.v_range[1]):
            raise ValueError("window must contain all rasterised points")
    return OccupancyGridMap(
        cell_size_h=cells.cell_size_h,
        cell_size_v=cells.cell_size_v,
        occupied_threshold=occupied_threshold,
        counts=dict(cells.counts),
        h_range=tuple(h_range),
        v_range=tuple(v_range),
    )


@dataclass(frozen=True)
class MapStats:
    cells_h: int        # index span along h (continuous-extent estimate)
    cells_v: int
    size_h: float       # metres: h span / horizontal scale
    size_v: float
    length: float       # metres along the motion (v) axis
    width: float        # metres across (h axis)
    ratio: float        # length / width


def map_stats(ogm: OccupancyGridMap, scale_h: float, scale_v: float) -> MapStats:
    """Metric size of the built map.

    ``scale_h`` and ``scale_v`` are map units per real metre for the two
    axes. The index span (max - min) estimates the continuous coordinate
    span in cells; a single-cell axis spans one cell.
    """
    if scale_h <= 0 or scale_v <= 0:
        raise ValueError("scale factors must be positive")
    occupied = [hv for hv, c in ogm.counts.items() if c > 0]
    if not occupied:
        raise DegenerateMapError("map has no observed cells")
    hs = [h for h, _ in occupied]
    vs = [v for _, v in occupied]
    cells_h = max(max(hs) - min(hs), 1)
    cells_v = max(max(vs) - min(vs), 1)
    size_h = cells_h * ogm.cell_size_h / scale_h
    size_v = cells_v * ogm.cell_size_v / scale_v
    return MapStats(
        cells_h=cells_h, cells_v=cells_v,
        size_h=size_h, size_v=size_v,
        length=size_v, width=size_h,
        ratio=size_v / size_h,
    )


def inflate_obstacles(ogm: OccupancyGridMap, radius_cells: int) -> OccupancyGridMap:
    """Grow every unreachable cell by a Chebyshev radius (robot footprint).

    Radius zero returns the map unchanged; the default pipeline applies no
    inflation.
    """
    if radius_cells < 0:
        raise ValueError("inflation radius must be non-negative")
    if radius_cells == 0:
        return ogm
    counts = dict(ogm.counts)
    blocker = ogm.occupied_threshold + 1
    for (h, v), c in ogm.counts.items():
        if c <= ogm.occupied_threshold:
            continue
        for dh in range(-radius_cells, radius_cells + 1):
            for dv in range(-radius_cells, radius_cells + 1):
                cell = (h + dh, v + dv)
                if counts.get(cell, 0) <= ogm.occupied_threshold:
                    counts[cell] = blocker
    return OccupancyGridMap(
        cell_size_h=ogm.cell_size_h, cell_size_v=ogm.cell_size_v,
        occupied_threshold=ogm.occupied_threshold, counts=counts,
        h_range=ogm.h_range, v_range=ogm.v_range,
    )


def save_map(path, ogm: OccupancyGridMap) -> None:
    """Text format: header ``ogm v1 H V T1 hmin hmax vmin vmax`` then one
    ``h v count`` line per cell holding points. Round-trips bit-exactly."""
    lines = [
        f"ogm v1 {ogm.cell_size_h!r} {ogm.cell_size_v!r} {ogm.occupied_threshold} "
        f"{ogm.h_range[0]} {ogm.h_range[1]} {ogm.v_range[0]} {ogm.v_range[1]}"
    ]
    for (h, v) in sorted(ogm.counts):
        c = ogm.counts[(h, v)]
        if c > 0:
            lines.append(f"{h} {v} {c}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_map(path) -> OccupancyGridMap:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("ogm v1 "):
        raise ValueError("not an ogm v1 map file")
    head = lines[0].split()
    if len(head) != 9:
        raise ValueError("malformed ogm header")
    counts = {}
    for ln in lines[1:]:
        h, v, c = ln.split()
        counts[(int(h), int(v))] = int(c)
    return OccupancyGridMap(
        cell_size_h=float(head[2]),
        cell_size_v=float(head[3]),
        occupied_threshold=int(head[4]),
        counts=counts,
        h_range=(int(head[5]), int(head[6])),
        v_range=(int(head[7]), int(head[8])),
    )


def load_point_cloud(path) -> WorldPointCloud:
    """Whitespace-separated ``x y z`` lines."""
    pts = np.loadtxt(path, dtype=float, ndmin=2)
    if pts.size == 0:
        return WorldPointCloud(np.empty((0, 3)))
    if pts.shape[1] != 3:
        raise ValueError("point cloud rows must be 'x y z'")
    return WorldPointCloud(pts)
