"""Piecewise-affine potential and the per-column upper envelope.

Along a vertical line the competing functions x.y_i - R_i are affine in x3
with slopes y_i3 <= -delta < 0, so the envelope is a convex, decreasing,
piecewise-linear function of x3 and each cell meets the column in a single
interval.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from src.domain_model.types import DiracCloud, WeightVector
from src.errors import CapSaturationError


@dataclass(frozen=True)
class ColumnProfile:
    column: Tuple[float, float]
    breakpoints: List[Tuple[Tuple[float, float], int]] = field(default_factory=list)
    surface_height: float = 0.0

    @property
    def wet(self) -> bool:
        return self.surface_height > 0.0


def potential_values(cloud: DiracCloud, w: WeightVector, points: np.ndarray):
    """Vectorized P at 3-D points with the argmax index (lowest on ties)."""
    values = np.atleast_2d(points) @ cloud.points.T - w.weights
    index = np.argmax(values, axis=1)
    return values[np.arange(len(values)), index], index


def evaluate_potential(cloud: DiracCloud, w: WeightVector, x) -> Tuple[float, int]:
    value, index = potential_values(cloud, w, np.asarray(x, dtype=np.float64).reshape(1, 3))
    return float(value[0]), int(index[0])


def column_intercepts(cloud: DiracCloud, w: WeightVector, columns: np.ndarray) -> np.ndarray:
    """a_i = x1 y_i1 + x2 y_i2 - R_i for every column, shape (M, N)."""
    return np.atleast_2d(columns)[:, :2] @ cloud.points[:, :2].T - w.weights


def surface_from_intercepts(a: np.ndarray, slopes: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Crossing height of the envelope with q, clamped at zero.

    Line i stays at or above q up to (a_i - q)/|b_i|, so the envelope does
    up to the largest of these.
    """
    crossings = (a - q[:, None]) / (-slopes)[None, :]
    return np.maximum(np.max(crossings, axis=1), 0.0)


def free_surface(cloud: DiracCloud, w: WeightVector, columns: np.ndarray) -> np.ndarray:
    """Pointwise free-surface height h_P(x1, x2) at the given columns."""
    columns = np.atleast_2d(np.asarray(columns, dtype=np.float64))
    q = 0.5 * (columns[:, 0] ** 2 + columns[:, 1] ** 2)
    return surface_from_intercepts(column_intercepts(cloud, w, columns), cloud.points[:, 2], q)


def envelope_pieces(a: np.ndarray, slopes: np.ndarray, heights: np.ndarray):
    """Walk the upper envelope of a_i + b_i z up each column to its height.

    Args:
        a: intercepts, shape (M, N)
        slopes: b_i, shape (N,), all negative
        heights: column heights h >= 0, shape (M,)

    Returns:
        (row, index, z_lo, z_hi) arrays of the non-degenerate intervals in
        row order then bottom to top.
    """
    m, n = a.shape
    active = np.argmax(a, axis=1)
    z_lo = np.zeros(m)
    rows = np.flatnonzero(heights > 0.0)

    out_rows, out_idx, out_lo, out_hi = [], [], [], []
    for _ in range(n + 1):
        if rows.size == 0:
            break
        cur = active[rows]
        lo = z_lo[rows]
        a_rows = a[rows]
        a_cur = a_rows[np.arange(rows.size), cur]
        db = slopes[None, :] - slopes[cur][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            z_cross = (a_cur[:, None] - a_rows) / db
        z_cross = np.where(db > 0.0, np.maximum(z_cross, lo[:, None]), np.inf)
        nxt = np.argmin(z_cross, axis=1)
        z_next = z_cross[np.arange(rows.size), nxt]
        hi = np.minimum(z_next, heights[rows])

        keep = hi > lo
        out_rows.append(rows[keep])
        out_idx.append(cur[keep])
        out_lo.append(lo[keep])
        out_hi.append(hi[keep])

        climbing = z_next < heights[rows]
        rows = rows[climbing]
        active[rows] = nxt[climbing]
        z_lo[rows] = z_next[climbing]

    if not out_rows:
        empty = np.zeros(0)
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), empty, empty

    row = np.concatenate(out_rows)
    order = np.argsort(row, kind="stable")
    return (
        row[order],
        np.concatenate(out_idx)[order],
        np.concatenate(out_lo)[order],
        np.concatenate(out_hi)[order],
    )


def column_profile(cloud: DiracCloud, w: WeightVector, column, cap_height: float) -> ColumnProfile:
    """Envelope intervals and free-surface height of a single column.

    Raises:
        CapSaturationError: if the surface reaches the cap height.
    """
    x1, x2 = float(column[0]), float(column[1])
    a = column_intercepts(cloud, w, np.array([[x1, x2]]))
    q = np.array([0.5 * (x1 * x1 + x2 * x2)])
    h = surface_from_intercepts(a, cloud.points[:, 2], q)
    if h[0] >= cap_height:
        raise CapSaturationError(float(h[0]), cap_height, 1)

    _, index, lo, hi = envelope_pieces(a, cloud.points[:, 2], h)
    breakpoints = [((float(l), float(u)), int(i)) for i, l, u in zip(index, lo, hi)]
    return ColumnProfile(column=(x1, x2), breakpoints=breakpoints, surface_height=float(h[0]))
