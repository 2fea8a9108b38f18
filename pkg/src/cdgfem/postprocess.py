"""Discrete fields, error norms and file output (legacy VTK, CSV)."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Union

import numpy as np

from .element import ReferenceBasis, default_quadrature_points, gauss_rule_2d
from .mesh import Mesh
from .space import DofMap

_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class DiscreteField:
    coeffs: np.ndarray
    dofs: DofMap
    mesh: Mesh

    def __post_init__(self):
        if len(self.coeffs) != self.dofs.n_dofs:
            raise ValueError(f"coefficient vector has length {len(self.coeffs)}, "
                             f"expected {self.dofs.n_dofs}")

    @property
    def degree(self) -> int:
        return self.dofs.degree

    @property
    def method(self):
        return self.dofs.method

    def cell_values(self, ref_points) -> np.ndarray:
        """Element-local values at reference points, shape ``(ne, npts)``."""
        phi, _ = ReferenceBasis(self.degree).tabulate(np.asarray(ref_points, dtype=float))
        return self.coeffs[self.dofs.cell_dofs] @ phi.T

    def nodal_values(self) -> np.ndarray:
        """Per-element coefficients, shape ``(ne, (k+1)^2)``."""
        return self.coeffs[self.dofs.cell_dofs]

    def __call__(self, x, y) -> np.ndarray:
        """Point evaluation; a point on an element boundary uses the element
        with the larger lattice index along each axis, clipped to the mesh."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        m = self.mesh
        (x0, y0), (x1, y1) = m.bounds
        i = np.clip(np.floor((x - x0) / (x1 - x0) * m.nx).astype(int), 0, m.nx - 1)
        j = np.clip(np.floor((y - y0) / (y1 - y0) * m.ny).astype(int), 0, m.ny - 1)
        e = (j * m.nx + i).ravel()
        ref = (np.stack([x.ravel(), y.ravel()], axis=-1) - m.cell_lower[e]) / m.cell_size[e]
        phi, _ = ReferenceBasis(self.degree).tabulate(ref)
        vals = np.einsum("pi,pi->p", phi, self.coeffs[self.dofs.cell_dofs[e]])
        return vals.reshape(x.shape)


def interpolate(fn: Callable, dofs: DofMap, mesh: Mesh) -> DiscreteField:
    """Nodal interpolant of ``fn`` in the space numbered by ``dofs``."""
    xy = dofs.dof_coords
    vals = np.broadcast_to(np.asarray(fn(xy[:, 0], xy[:, 1]), dtype=float), (dofs.n_dofs,))
    return DiscreteField(vals.copy(), dofs, mesh)


Operand = Union[DiscreteField, Callable]


def _lattice_difference(a: DiscreteField, b: Operand, ref_points) -> np.ndarray:
    va = a.cell_values(ref_points)
    if isinstance(b, DiscreteField):
        if not a.mesh.same_grid(b.mesh):
            raise ValueError("fields live on different meshes")
        vb = b.cell_values(ref_points)
    else:
        m = a.mesh
        X = m.cell_lower[:, None, :] + np.asarray(ref_points)[None] * m.cell_size[:, None, :]
        vb = np.broadcast_to(np.asarray(b(X[..., 0], X[..., 1]), dtype=float), va.shape)
    return va - vb


def _norm_degree(a: DiscreteField, b: Operand) -> int:
    k = a.degree
    if isinstance(b, DiscreteField):
        k = max(k, b.degree)
    return k


def l2_norm_diff(a: Operand, b: Operand) -> float:
    """L2 norm of a - b using the (k+2)^2 Gauss rule on every element."""
    if not isinstance(a, DiscreteField):
        a, b = b, a
    rule = gauss_rule_2d(default_quadrature_points(_norm_degree(a, b)))
    d = _lattice_difference(a, b, rule.points)
    size = a.mesh.cell_size
    area = size[:, 0] * size[:, 1]
    return float(math.sqrt(np.sum(area * (d * d @ rule.weights))))


def linf_sample_points(k: int) -> np.ndarray:
    """Per-element lattice for maximum norms: Gauss points plus the corners."""
    rule = gauss_rule_2d(default_quadrature_points(k))
    return np.vstack([rule.points, _CORNERS])


def linf_norm_diff(a: Operand, b: Operand) -> float:
    """Max |a - b| over the per-element sample lattice, one-sided at element
    boundaries."""
    if not isinstance(a, DiscreteField):
        a, b = b, a
    d = _lattice_difference(a, b, linf_sample_points(_norm_degree(a, b)))
    return float(np.max(np.abs(d)))


def nodal_max_error(field: DiscreteField, exact: Callable) -> float:
    """Max |u_h - u| over all element-local Lagrange nodes."""
    nodes = ReferenceBasis(field.degree).nodes
    return float(np.max(np.abs(_lattice_difference(field, exact, nodes))))


def write_vtk(field: DiscreteField, path, title: str = "cdgfem field"):
    """Legacy ASCII VTK with four private points per quad so jumps between
    elements stay visible.  Also writes the region tag as cell data."""
    mesh = field.mesh
    ne = mesh.n_elements
    pts = mesh.cell_lower[:, None, :] + _CORNERS[None] * mesh.cell_size[:, None, :]
    vals = field.cell_values(_CORNERS)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {4 * ne} double"]
    lines += [f"{x!r} {y!r} 0.0" for x, y in pts.reshape(-1, 2).tolist()]
    lines.append(f"CELLS {ne} {5 * ne}")
    lines += [f"4 {4 * e} {4 * e + 1} {4 * e + 2} {4 * e + 3}" for e in range(ne)]
    lines.append(f"CELL_TYPES {ne}")
    lines += ["9"] * ne
    lines += [f"CELL_DATA {ne}", "SCALARS region int 1", "LOOKUP_TABLE default"]
    lines += [str(int(r)) for r in mesh.region]
    lines += [f"POINT_DATA {4 * ne}", "SCALARS u double 1", "LOOKUP_TABLE default"]
    lines += [repr(float(v)) for v in vals.ravel()]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write VTK file {path}: {exc}") from exc


@dataclass
class SweepRecord:
    """One row of a sweep.  For single-method runs the ``*_cdg`` columns hold
    that method's numbers and ``method`` names it."""

    epsilon: float
    sigma_c: float
    sigma_d: float
    theta: int
    mesh_size: int
    dofs_cdg: int
    dofs_dg: int
    l2_diff: float = math.nan
    linf_diff: float = math.nan
    l2_err_cdg: float = math.nan
    linf_err_cdg: float = math.nan
    l2_err_dg: float = math.nan
    linf_err_dg: float = math.nan
    method: str = "cdg"
    status: str = "ok"


RECORD_FIELDS = [f.name for f in dataclasses.fields(SweepRecord)]
_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SweepRecord)}


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(records: Iterable[SweepRecord], path):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RECORD_FIELDS)
            for r in records:
                w.writerow([_fmt(getattr(r, name)) for name in RECORD_FIELDS])
    except OSError as exc:
        raise OSError(f"cannot write CSV file {path}: {exc}") from exc


def read_csv(path) -> list[SweepRecord]:
    casts = {"float": float, "int": int, "str": str}
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(SweepRecord(**{k: casts[_FIELD_TYPES[k]](v) for k, v in row.items()}))
    return out
