"""Tensor-product Gauss–Legendre rules on [-1, 1]^dim."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 30


@dataclass(slots=True, frozen=True)
class Quadrature:
    """
    A quadrature rule on the reference element [-1, 1]^dim.

    ``order`` is the number of points per direction; the rule integrates
    polynomials of degree ``2 * order - 1`` per direction exactly.

    Usage:
        rule = gauss_rule(3, dim=1)
        rule.integrate(lambda x: x[:, 0] ** 4)   # -> 0.4
        x, w = rule.on_interval(0.0, 0.25)        # mapped points and weights
    """

    order: int
    dim: int
    points: np.ndarray  # (m, dim)
    weights: np.ndarray  # (m,)

    @property
    def degree(self) -> int:
        return 2 * self.order - 1

    @property
    def measure(self) -> float:
        return float(2**self.dim)

    def integrate(self, func) -> float:
        """Integrate ``func(points) -> values`` over the reference element."""
        return float(np.dot(self.weights, func(self.points)))

    def on_interval(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Points and weights of a 1D rule mapped affinely onto [a, b]."""
        if self.dim != 1:
            raise ValueError(f"on_interval needs a 1D rule, got dim={self.dim}")
        half = 0.5 * (b - a)
        return a + half * (self.points[:, 0] + 1.0), half * self.weights

    def on_unit_square(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(xi, eta, weights) of a 2D rule mapped onto [0, 1]^2."""
        if self.dim != 2:
            raise ValueError(f"on_unit_square needs a 2D rule, got dim={self.dim}")
        xi = 0.5 * (self.points[:, 0] + 1.0)
        eta = 0.5 * (self.points[:, 1] + 1.0)
        return xi, eta, 0.25 * self.weights


@lru_cache(maxsize=None)
def gauss_rule(order: int, dim: int = 1) -> Quadrature:
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"Unsupported Gauss order {order} (1..{MAX_ORDER})")
    if dim not in (1, 2):
        raise ValueError(f"Unsupported quadrature dimension {dim}")

    x, w = np.polynomial.legendre.leggauss(order)
    if dim == 1:
        points = x.reshape(-1, 1)
        weights = w
    else:
        gx, gy = np.meshgrid(x, x, indexing="ij")
        points = np.column_stack([gx.ravel(), gy.ravel()])
        weights = np.outer(w, w).ravel()

    points.setflags(write=False)
    weights.setflags(write=False)
    return Quadrature(order=order, dim=dim, points=points, weights=weights)
