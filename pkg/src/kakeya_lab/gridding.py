"""Data-anchored cell grids and point/segment distance kernels.

Grids are anchored to the data's bounding box, with padding rounded up to a
whole number of cells, so that rigidly translated data produces identically
translated cell centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CellGrid:
    """Axis-aligned grid of cubic cells; centers at origin + (index+1/2)*h."""

    origin: np.ndarray
    h: float
    shape: tuple[int, ...]

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.shape[axis]) + 0.5) * self.h

    def centers(self) -> np.ndarray:
        axes = [self.axis_centers(d) for d in range(len(self.shape))]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_measure(self) -> float:
        return float(self.h ** len(self.shape))


def grid_over(points: np.ndarray, h: float, pad: float) -> CellGrid:
    """Grid covering the bounding box of `points` inflated by `pad`.

    The pad is rounded up to a multiple of h so enlarging the pad never
    shifts existing cell centers.
    """
    points = np.asarray(points, dtype=float)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    k = int(np.ceil(pad / h)) + 1
    origin = lo - k * h
    shape = tuple(int(np.ceil((hi[d] - origin[d]) / h)) + k for d in range(points.shape[1]))
    return CellGrid(origin, float(h), shape)


def segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact distances from `points` (M, d) to the segment a-b."""
    ab = b - a
    ab2 = float(np.dot(ab, ab))
    if ab2 < 1e-300:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip((points - a) @ ab / ab2, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(points - proj, axis=1)


def polyline_min_distance(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Distance from each point to a closed polyline, chunked over segments."""
    points = np.asarray(points, dtype=float)
    v = np.asarray(vertices, dtype=float)
    w = np.roll(v, -1, axis=0)
    ab = w - v
    ab2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    best = np.full(len(points), np.inf)
    step = max(1, int(4e6 // max(len(points), 1)))
    for s in range(0, len(v), step):
        e = min(s + step, len(v))
        pa = points[:, None, :] - v[None, s:e, :]
        t = np.clip(np.einsum("pnd,nd->pn", pa, ab[s:e]) / ab2[s:e], 0.0, 1.0)
        proj = v[None, s:e, :] + t[:, :, None] * ab[None, s:e, :]
        d = np.linalg.norm(points[:, None, :] - proj, axis=2)
        best = np.minimum(best, d.min(axis=1))
    return best


def mark_near_polyline(grid: CellGrid, vertices: np.ndarray, tol: float) -> np.ndarray:
    """Boolean field over grid cells whose center is within tol of the polyline.

    Works per segment on its own bounding sub-box, so cost scales with the
    tube of cells around the polyline rather than the whole grid.
    """
    v = np.asarray(vertices, dtype=float)
    w = np.roll(v, -1, axis=0)
    mask = np.zeros(grid.shape, dtype=bool)
    h = grid.h
    nx, ny = grid.shape
    ab = w - v
    ab2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    for k in range(len(v)):
        a, b = v[k], w[k]
        lo = np.minimum(a, b) - tol - h
        hi = np.maximum(a, b) + tol + h
        i0 = max(int(np.floor((lo[0] - grid.origin[0]) / h - 0.5)), 0)
        i1 = min(int(np.ceil((hi[0] - grid.origin[0]) / h - 0.5)), nx - 1)
        j0 = max(int(np.floor((lo[1] - grid.origin[1]) / h - 0.5)), 0)
        j1 = min(int(np.ceil((hi[1] - grid.origin[1]) / h - 0.5)), ny - 1)
        if i1 < i0 or j1 < j0:
            continue
        gx = grid.origin[0] + (np.arange(i0, i1 + 1) + 0.5) * h
        gy = grid.origin[1] + (np.arange(j0, j1 + 1) + 0.5) * h
        px, py = np.meshgrid(gx, gy, indexing="ij")
        pa_x = px - a[0]
        pa_y = py - a[1]
        t = np.clip((pa_x * ab[k, 0] + pa_y * ab[k, 1]) / ab2[k], 0.0, 1.0)
        dx = pa_x - t * ab[k, 0]
        dy = pa_y - t * ab[k, 1]
        mask[i0 : i1 + 1, j0 : j1 + 1] |= dx * dx + dy * dy <= tol * tol
    return mask
