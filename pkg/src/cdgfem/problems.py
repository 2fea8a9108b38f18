"""Coefficient bundles for -eps*Lap(u) + b.grad(u) = f, u = g on the boundary.

All callables take coordinate arrays ``(x, y)`` and broadcast; ``b`` and
``exact_grad_u`` return a pair of arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

UNIT_SQUARE = ((0.0, 0.0), (1.0, 1.0))
CENTERED_SQUARE = ((-1.0, -1.0), (1.0, 1.0))


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    epsilon: float
    b: Callable
    div_b: Callable
    f: Callable
    g: Callable
    bounds: tuple = UNIT_SQUARE
    exact_u: Optional[Callable] = None
    exact_grad_u: Optional[Callable] = None

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon!r}")


def _check_epsilon(epsilon):
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon!r}")


def _constant(value):
    def fn(x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(value))
    return fn


def _unit_advection(x, y):
    shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
    return np.ones(shape), np.ones(shape)


def example1(epsilon: float) -> ProblemSpec:
    """Boundary layers along x = 1 and y = 1 on the unit square, b = (1, 1).

    u = x + y(1-x) + (exp(-1/eps) - exp(-(1-x)(1-y)/eps)) / (1 - exp(-1/eps))
    """
    _check_epsilon(epsilon)
    eps = float(epsilon)
    tail = math.exp(-1.0 / eps)          # underflows to 0.0 for small eps
    denom = -math.expm1(-1.0 / eps)

    def layer(x, y):
        return np.exp(-(1.0 - x) * (1.0 - y) / eps)

    def u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return x + y * (1.0 - x) + (tail - layer(x, y)) / denom

    def grad_u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = layer(x, y) / (eps * denom)
        return 1.0 - y - w * (1.0 - y), 1.0 - x - w * (1.0 - x)

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = layer(x, y) / (eps * denom)
        ax, ay = 1.0 - x, 1.0 - y
        # -eps*Lap(u) = w*(ax^2 + ay^2),  b.grad(u) = ax + ay - w*(ax + ay)
        return ax + ay + w * (ax * ax + ay * ay - ax - ay)

    return ProblemSpec("example1", eps, _unit_advection, _constant(0.0), f, u,
                       UNIT_SQUARE, u, grad_u)


def example2(epsilon: float) -> ProblemSpec:
    """Interior layer along x = 0 on (-1, 1)^2, b = (-x, y).

    u = (1 - y^2) erf(x / sqrt(2 eps))
    """
    _check_epsilon(epsilon)
    eps = float(epsilon)
    s = math.sqrt(2.0 * eps)

    def b(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        return -x, y.copy()

    def u(x, y):
        return (1.0 - np.asarray(y, dtype=float) ** 2) * erf(np.asarray(x, dtype=float) / s)

    def grad_u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        derf = 2.0 / (math.sqrt(math.pi) * s) * np.exp(-(x / s) ** 2)
        return (1.0 - y * y) * derf, -2.0 * y * erf(x / s)

    def f(x, y):
        # the x-advection and x-diffusion terms cancel exactly
        y = np.asarray(y, dtype=float)
        return 2.0 * (eps - y * y) * erf(np.asarray(x, dtype=float) / s)

    return ProblemSpec("example2", eps, b, _constant(0.0), f, u, CENTERED_SQUARE, u, grad_u)


def manufactured_linear(epsilon: float = 1.0) -> ProblemSpec:
    """u = 1 + 2x + 3y with b = (1, 1); every scheme should reproduce it."""
    _check_epsilon(epsilon)

    def u(x, y):
        return 1.0 + 2.0 * np.asarray(x, dtype=float) + 3.0 * np.asarray(y, dtype=float)

    def grad_u(x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.full(shape, 2.0), np.full(shape, 3.0)

    return ProblemSpec("manufactured_linear", float(epsilon), _unit_advection, _constant(0.0),
                       _constant(5.0), u, UNIT_SQUARE, u, grad_u)


CATALOG = {
    "example1": example1,
    "example2": example2,
    "manufactured_linear": manufactured_linear,
}


def make_problem(name: str, epsilon: float) -> ProblemSpec:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(CATALOG)}") from None
    return factory(epsilon)


def verify_forcing(spec: ProblemSpec, samples: int = 200, step: float = 1e-5,
                   seed: int = 0) -> float:
    """Max relative defect of the forcing against central differences of exact_u.

    Returns max |(-eps*Lap_h u + b.grad_h u) - f| / (1 + |f|) over random
    interior points.
    """
    if spec.exact_u is None:
        raise ValueError(f"problem {spec.name!r} has no exact solution")
    rng = np.random.default_rng(seed)
    (x0, y0), (x1, y1) = spec.bounds
    margin = 2 * step
    x = rng.uniform(x0 + margin, x1 - margin, samples)
    y = rng.uniform(y0 + margin, y1 - margin, samples)
    u = spec.exact_u
    h = step
    c = u(x, y)
    uxp, uxm = u(x + h, y), u(x - h, y)
    uyp, uym = u(x, y + h), u(x, y - h)
    lap = (uxp + uxm + uyp + uym - 4.0 * c) / (h * h)
    ux = (uxp - uxm) / (2 * h)
    uy = (uyp - uym) / (2 * h)
    bx, by = spec.b(x, y)
    residual = -spec.epsilon * lap + bx * ux + by * uy
    fv = spec.f(x, y)
    return float(np.max(np.abs(residual - fv) / (1.0 + np.abs(fv))))


def sign_condition_margin(spec: ProblemSpec, x, y) -> float:
    """min of rho = -div(b)/2 over the given points (should be >= 0)."""
    return float(np.min(-0.5 * np.asarray(spec.div_b(x, y))))
