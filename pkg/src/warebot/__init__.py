"""Warehouse robot navigation stack.

Monocular direct-method localization, occupancy grid mapping, heap-based A*
path planning, linear Kalman state estimation, two-phase waypoint tracking,
and a closed-loop simulator with an HTTP/WebSocket operator service.
"""

__version__ = "0.1.0"
