"""Reference element: tensor Lagrange bases, Gauss rules, affine cell maps.

The reference cell is the unit square [0, 1]^2 and the reference edge is the
unit interval [0, 1].  Local basis functions are numbered lexicographically
with the x index running fastest, so for ``k = 1`` the order is
(0,0), (1,0), (0,1), (1,1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_GAUSS_POINTS = 10
MAX_DEGREE = 4


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature points and weights on the reference interval or square."""

    points: np.ndarray
    weights: np.ndarray
    exactness: int

    def __len__(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def gauss_rule_1d(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [0, 1], exact up to degree 2n - 1."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise ValueError(f"unsupported Gauss point count {n!r}; need 1 <= n <= {MAX_GAUSS_POINTS}")
    x, w = leggauss(int(n))
    points = 0.5 * (x + 1.0)
    weights = 0.5 * w
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points, weights, 2 * n - 1)


@lru_cache(maxsize=None)
def gauss_rule_2d(n: int) -> QuadratureRule:
    """Tensor Gauss rule with n points per direction on [0, 1]^2.

    Points are ordered with x fastest, matching the basis numbering.
    """
    r = gauss_rule_1d(n)
    px, py = np.meshgrid(r.points, r.points)
    wx, wy = np.meshgrid(r.weights, r.weights)
    points = np.column_stack([px.ravel(), py.ravel()])
    weights = (wx * wy).ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points, weights, r.exactness)


def _lagrange_1d(nodes: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the 1D Lagrange polynomials on ``nodes`` at ``t``.

    Returns arrays of shape ``t.shape + (len(nodes),)``.
    """
    t = np.asarray(t, dtype=float)[..., None]
    m = len(nodes)
    vals = np.ones(t.shape[:-1] + (m,))
    ders = np.zeros(t.shape[:-1] + (m,))
    for i in range(m):
        others = [j for j in range(m) if j != i]
        denom = np.prod([nodes[i] - nodes[j] for j in others])
        factors = [(t[..., 0] - nodes[j]) for j in others]
        vals[..., i] = np.prod(factors, axis=0) / denom if factors else 1.0
        d = np.zeros(t.shape[:-1])
        for skip in range(len(others)):
            term = np.ones(t.shape[:-1])
            for q, fac in enumerate(factors):
                if q != skip:
                    term = term * fac
            d = d + term
        ders[..., i] = d / denom
    return vals, ders


@dataclass(frozen=True)
class ReferenceBasis:
    """Tensor-product Lagrange basis Q_k on equispaced nodes of [0, 1]^2."""

    degree: int

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in [1, {MAX_DEGREE}], got {self.degree}")

    @property
    def nodes_1d(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.degree + 1)

    @property
    def nodes(self) -> np.ndarray:
        """Reference node coordinates, shape ``((k+1)**2, 2)``."""
        t = self.nodes_1d
        px, py = np.meshgrid(t, t)
        return np.column_stack([px.ravel(), py.ravel()])

    @property
    def size(self) -> int:
        return (self.degree + 1) ** 2

    def tabulate(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate all basis functions at an array of reference points.

        ``points`` has shape ``(..., 2)``.  Returns values of shape
        ``(..., nbasis)`` and reference gradients of shape ``(..., nbasis, 2)``.
        """
        points = np.asarray(points, dtype=float)
        vx, dx = _lagrange_1d(self.nodes_1d, points[..., 0])
        vy, dy = _lagrange_1d(self.nodes_1d, points[..., 1])
        lead = points.shape[:-1]
        m = self.degree + 1
        # basis index = b * m + a  (a: x index, b: y index)
        values = (vy[..., :, None] * vx[..., None, :]).reshape(lead + (m * m,))
        gx = (vy[..., :, None] * dx[..., None, :]).reshape(lead + (m * m,))
        gy = (dy[..., :, None] * vx[..., None, :]).reshape(lead + (m * m,))
        return values, np.stack([gx, gy], axis=-1)


def eval_basis(basis: ReferenceBasis, p) -> tuple[np.ndarray, np.ndarray]:
    """Basis values and reference gradients at a single reference point."""
    values, grads = basis.tabulate(np.asarray(p, dtype=float).reshape(2))
    return values, grads


@dataclass(frozen=True)
class CellGeometry:
    """Affine map from [0,1]^2 onto an axis-aligned rectangle."""

    lower: tuple[float, float]
    dx: float
    dy: float

    @property
    def det(self) -> float:
        return self.dx * self.dy

    def to_physical(self, ref_points) -> np.ndarray:
        ref_points = np.asarray(ref_points, dtype=float)
        return np.asarray(self.lower) + ref_points * np.array([self.dx, self.dy])

    def to_reference(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return (points - np.asarray(self.lower)) / np.array([self.dx, self.dy])


def map_gradient(geom: CellGeometry, ref_grad) -> np.ndarray:
    """Physical gradient J^{-T} ref_grad; the Jacobian is diag(dx, dy)."""
    ref_grad = np.asarray(ref_grad, dtype=float)
    return ref_grad / np.array([geom.dx, geom.dy])


def default_quadrature_points(degree: int) -> int:
    """Gauss points per direction used for cells and faces at degree ``k``."""
    return degree + 2
