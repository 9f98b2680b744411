"""
Uniform square meshes of the unit square for bilinear elements.

Numbering (n cells per side, h = 1/n)::

    node (i, j)   index j·(n+1) + i        at (i·h, j·h)
    cell (i, j)   index j·n + i            corners CCW: (i,j) (i+1,j) (i+1,j+1) (i,j+1)
    vertical edge   v(i, j)  index j·(n+1) + i       x = i·h,  y ∈ [j·h, (j+1)·h]
    horizontal edge h(i, j)  index n(n+1) + j·n + i  y = j·h,  x ∈ [i·h, (i+1)·h]

Edge normals point in +x (vertical) and +y (horizontal). Relative to a cell,
the left and bottom sides have sign -1, the right and top sides +1. Edge
parameters run from the lower/left endpoint ("a") to the upper/right one ("b").
"""

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

# Cell side order used throughout: left, right, bottom, top.
SIDE_SIGNS = np.array([-1.0, 1.0, -1.0, 1.0])


@dataclass(slots=True, frozen=True)
class Box:
    """Axis-aligned rectangle [x0, x1] × [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"Degenerate box {self}")

    @classmethod
    def centered(cls, cx: float, cy: float, half: float) -> "Box":
        return cls(cx - half, cx + half, cy - half, cy + half)

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def perimeter(self) -> float:
        return 2.0 * ((self.x1 - self.x0) + (self.y1 - self.y0))


@dataclass(slots=True, frozen=True)
class Mesh2D:
    n: int

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_nodes(self) -> int:
        return (self.n + 1) ** 2

    @property
    def n_cells(self) -> int:
        return self.n * self.n

    @property
    def n_edges(self) -> int:
        return 2 * self.n * (self.n + 1)

    @property
    def n_free(self) -> int:
        # pure Neumann: every node is free
        return self.n_nodes

    @property
    def nodes(self) -> np.ndarray:
        """(n_nodes, 2) coordinates."""
        t = np.linspace(0.0, 1.0, self.n + 1)
        x, y = np.meshgrid(t, t, indexing="xy")
        return np.column_stack([x.ravel(), y.ravel()])

    @property
    def cells(self) -> np.ndarray:
        """(n_cells, 4) node indices, counterclockwise from the lower-left."""
        n = self.n
        j, i = np.divmod(np.arange(n * n), n)
        base = j * (n + 1) + i
        return np.column_stack([base, base + 1, base + n + 2, base + n + 1])

    @property
    def cell_origins(self) -> np.ndarray:
        """(n_cells, 2) lower-left corner of each cell."""
        j, i = np.divmod(np.arange(self.n_cells), self.n)
        return np.column_stack([i, j]) * self.h

    # ------------------------------------------------------------------ #
    # Edges
    # ------------------------------------------------------------------ #

    def vertical_edge(self, i: int, j: int) -> int:
        return j * (self.n + 1) + i

    def horizontal_edge(self, i: int, j: int) -> int:
        return self.n * (self.n + 1) + j * self.n + i

    @property
    def cell_edges(self) -> np.ndarray:
        """(n_cells, 4) edge indices in side order left, right, bottom, top."""
        n = self.n
        j, i = np.divmod(np.arange(n * n), n)
        offset = n * (n + 1)
        return np.column_stack(
            [
                j * (n + 1) + i,
                j * (n + 1) + i + 1,
                offset + j * n + i,
                offset + (j + 1) * n + i,
            ]
        )

    @property
    def boundary_edges(self) -> np.ndarray:
        """Boolean mask over edges lying on ∂Ω."""
        n = self.n
        mask = np.zeros(self.n_edges, dtype=bool)
        j, i = np.divmod(np.arange(n * (n + 1)), n + 1)
        mask[: n * (n + 1)] = (i == 0) | (i == n)
        jh, _ = np.divmod(np.arange(n * (n + 1)), n)
        mask[n * (n + 1) :] = (jh == 0) | (jh == n)
        return mask

    @property
    def edge_nodes(self) -> np.ndarray:
        """(n_edges, 2) node indices of endpoints a (lower/left) and b."""
        n = self.n
        j, i = np.divmod(np.arange(n * (n + 1)), n + 1)
        vertical = np.column_stack([j * (n + 1) + i, (j + 1) * (n + 1) + i])
        jh, ih = np.divmod(np.arange(n * (n + 1)), n)
        horizontal = np.column_stack([jh * (n + 1) + ih, jh * (n + 1) + ih + 1])
        return np.vstack([vertical, horizontal])

    # ------------------------------------------------------------------ #
    # Mesh-aligned regions
    # ------------------------------------------------------------------ #

    def grid_index(self, coordinate: float) -> int:
        """Grid line index of ``coordinate``; raises if it is not on a mesh line."""
        scaled = coordinate * self.n
        k = int(round(scaled))
        if abs(scaled - k) > 1e-9 or not 0 <= k <= self.n:
            raise ValueError(
                f"load region not mesh-aligned: {coordinate} is not a multiple "
                f"of h=1/{self.n}"
            )
        return k

    def cells_in(self, box: Box) -> np.ndarray:
        """Indices of the cells covering ``box`` (which must be mesh-aligned)."""
        i0, i1 = self.grid_index(box.x0), self.grid_index(box.x1)
        j0, j1 = self.grid_index(box.y0), self.grid_index(box.y1)
        ii, jj = np.meshgrid(np.arange(i0, i1), np.arange(j0, j1), indexing="xy")
        return (jj * self.n + ii).ravel()

    def edges_on(self, box: Box) -> np.ndarray:
        """Indices of the edges making up ∂box (mesh-aligned)."""
        i0, i1 = self.grid_index(box.x0), self.grid_index(box.x1)
        j0, j1 = self.grid_index(box.y0), self.grid_index(box.y1)
        edges = [self.vertical_edge(i, j) for i in (i0, i1) for j in range(j0, j1)]
        edges += [self.horizontal_edge(i, j) for j in (j0, j1) for i in range(i0, i1)]
        return np.array(edges, dtype=int)


def build_quad_mesh(n: int) -> Mesh2D:
    if n < 2 or n & (n - 1):
        raise ValueError(
            f"n must be a power of two >= 2 so load regions align with mesh "
            f"lines, got {n}"
        )
    logger.debug("Quad mesh: n=%d, %d nodes", n, (n + 1) ** 2)
    return Mesh2D(n=n)
