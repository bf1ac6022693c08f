"""Column quadrature over the horizontal domain."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from src.domain_model.types import DomainSpec, QuadratureSpec


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Midpoints of the columns whose center lies in the polygon.

    ``q_mean`` is the exact column mean of q = (x1^2 + x2^2)/2, which is
    q(center) + (dx^2 + dy^2)/24 for a rectangular column.
    """

    domain: DomainSpec
    spec: QuadratureSpec
    centers: np.ndarray
    cell_index: np.ndarray
    q_point: np.ndarray
    q_mean: np.ndarray
    column_area: float
    spacing: Tuple[float, float]

    @property
    def size(self) -> int:
        return len(self.centers)

    @property
    def shape(self) -> Tuple[int, int]:
        n = self.spec.columns_per_axis
        return (n, n)

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature sum of a per-column field."""
        return float(np.sum(values) * self.column_area)

    def to_image(self, values: np.ndarray, fill: float = np.nan) -> np.ndarray:
        """Scatter a per-column field onto the full (n, n) bounding-box raster."""
        image = np.full(self.shape, fill)
        image[self.cell_index[:, 0], self.cell_index[:, 1]] = values
        return image


@lru_cache(maxsize=32)
def build_grid(domain: DomainSpec, spec: QuadratureSpec) -> QuadratureGrid:
    n = spec.columns_per_axis
    x0, y0, x1, y1 = domain.bounding_box
    dx = (x1 - x0) / n
    dy = (y1 - y0) / n

    ix, iy = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    centers = np.column_stack([x0 + (ix + 0.5) * dx, y0 + (iy + 0.5) * dy])
    inside = domain.contains(centers)

    centers = centers[inside]
    centers.setflags(write=False)
    cell_index = np.column_stack([ix[inside], iy[inside]])
    q_point = 0.5 * (centers[:, 0] ** 2 + centers[:, 1] ** 2)
    q_mean = q_point + (dx * dx + dy * dy) / 24.0

    return QuadratureGrid(
        domain=domain,
        spec=spec,
        centers=centers,
        cell_index=cell_index,
        q_point=q_point,
        q_mean=q_mean,
        column_area=dx * dy,
        spacing=(dx, dy),
    )
