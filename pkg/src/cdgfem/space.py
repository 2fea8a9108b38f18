"""Global degree-of-freedom numbering for the cG, dG and mixed cdG spaces.

Continuous elements share DoFs through a global lattice of Lagrange nodes;
discontinuous elements own private copies of all their nodes, including
those on the interface with the continuous region.  Shared DoFs come first
in lattice order (x fastest), then private DoFs element by element.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum, IntEnum

import numpy as np

from .element import ReferenceBasis
from .mesh import FaceKind, Mesh, Region


class MethodKind(str, Enum):
    CG = "cg"
    DG = "dg"
    CDG = "cdg"

    @classmethod
    def parse(cls, value) -> "MethodKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; choose from cg, dg, cdg") from None


class DofClass(IntEnum):
    SHARED = 0
    PRIVATE = 1


@dataclass(frozen=True, eq=False)
class DofMap:
    method: MethodKind
    degree: int
    cell_dofs: np.ndarray           # (ne, (k+1)^2) global indices
    dof_class: np.ndarray           # (n_dofs,) DofClass values
    dof_coords: np.ndarray          # (n_dofs, 2) node positions
    constrained_dofs: np.ndarray = np.zeros(0, dtype=np.int64)
    constrained_values: np.ndarray = np.zeros(0)

    @property
    def n_dofs(self) -> int:
        return len(self.dof_class)

    @property
    def constraints(self) -> dict[int, float]:
        return dict(zip(self.constrained_dofs.tolist(), self.constrained_values.tolist()))

    @property
    def n_shared(self) -> int:
        return int(np.sum(self.dof_class == DofClass.SHARED))


def continuous_mask(mesh: Mesh, method: MethodKind) -> np.ndarray:
    """Which elements are treated as continuous under ``method``."""
    method = MethodKind.parse(method)
    if method is MethodKind.CG:
        return np.ones(mesh.n_elements, dtype=bool)
    if method is MethodKind.DG:
        return np.zeros(mesh.n_elements, dtype=bool)
    return mesh.region == Region.CONTINUOUS


def coupled_interior_faces(mesh: Mesh, method: MethodKind) -> np.ndarray:
    """Interior faces that carry face integrals under ``method``.

    Faces inside the continuous region never do: the trace jump vanishes there.
    """
    method = MethodKind.parse(method)
    if method is MethodKind.CG:
        return np.zeros(0, dtype=np.int64)
    if method is MethodKind.DG:
        return np.flatnonzero(mesh.face_minus >= 0)
    return mesh.faces_of_kind(FaceKind.INTERIOR_DISCONTINUOUS, FaceKind.INTERFACE)


def weak_boundary_faces(mesh: Mesh, method: MethodKind) -> np.ndarray:
    """Boundary faces where Dirichlet data enters weakly (Nitsche terms)."""
    cont = continuous_mask(mesh, method)
    bnd = np.flatnonzero(mesh.face_minus < 0)
    return bnd[~cont[mesh.face_plus[bnd]]]


def _local_lattice(mesh: Mesh, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Lattice (column, row) of every local node of every element."""
    jj, ii = np.divmod(np.arange(mesh.n_elements), mesh.nx)
    m = k + 1
    b, a = np.divmod(np.arange(m * m), m)
    return ii[:, None] * k + a[None, :], jj[:, None] * k + b[None, :]


def build_dof_map(mesh: Mesh, k: int, method) -> DofMap:
    """Number the DoFs of the degree-k space selected by ``method``."""
    method = MethodKind.parse(method)
    basis = ReferenceBasis(k)
    nb = basis.size
    cont = continuous_mask(mesh, method)

    col, row = _local_lattice(mesh, k)
    width = mesh.nx * k + 1
    lattice_id = row * width + col

    cell_dofs = np.empty((mesh.n_elements, nb), dtype=np.int64)
    shared_ids = np.unique(lattice_id[cont])
    n_shared = len(shared_ids)
    cell_dofs[cont] = np.searchsorted(shared_ids, lattice_id[cont])
    n_disc = int(np.sum(~cont))
    cell_dofs[~cont] = n_shared + np.arange(n_disc * nb).reshape(n_disc, nb)
    n_dofs = n_shared + n_disc * nb

    dof_class = np.full(n_dofs, DofClass.PRIVATE, dtype=np.int8)
    dof_class[:n_shared] = DofClass.SHARED

    # node positions from element geometry; shared nodes get the same value
    # from every element touching them
    ref = basis.nodes
    coords = mesh.cell_lower[:, None, :] + ref[None, :, :] * mesh.cell_size[:, None, :]
    dof_coords = np.empty((n_dofs, 2))
    dof_coords[cell_dofs.ravel()] = coords.reshape(-1, 2)

    for a in (cell_dofs, dof_class, dof_coords):
        a.setflags(write=False)
    return DofMap(method, k, cell_dofs, dof_class, dof_coords)


def side_local_nodes(k: int, normal) -> np.ndarray:
    """Local node indices on the element side with outward normal ``normal``."""
    m = k + 1
    b, a = np.divmod(np.arange(m * m), m)
    nx_, ny_ = normal
    if nx_ < 0:
        sel = a == 0
    elif nx_ > 0:
        sel = a == k
    elif ny_ < 0:
        sel = b == 0
    else:
        sel = b == k
    return np.flatnonzero(sel)


def apply_dirichlet_constraints(dofs: DofMap, mesh: Mesh, g) -> DofMap:
    """Constrain shared DoFs on the continuous part of the boundary to g(node).

    Pure dG keeps an empty constrained set; its boundary data is weak.
    """
    if dofs.method is MethodKind.DG:
        return replace(dofs, constrained_dofs=np.zeros(0, dtype=np.int64),
                       constrained_values=np.zeros(0))
    cont = continuous_mask(mesh, dofs.method)
    bnd = np.flatnonzero(mesh.face_minus < 0)
    bnd = bnd[cont[mesh.face_plus[bnd]]]
    picked = []
    for f in bnd:
        local = side_local_nodes(dofs.degree, mesh.face_normal[f])
        picked.append(dofs.cell_dofs[mesh.face_plus[f], local])
    if picked:
        idx = np.unique(np.concatenate(picked))
    else:
        idx = np.zeros(0, dtype=np.int64)
    xy = dofs.dof_coords[idx]
    values = np.asarray(g(xy[:, 0], xy[:, 1]), dtype=float).reshape(-1) if len(idx) else np.zeros(0)
    values = np.broadcast_to(values, idx.shape).copy()
    idx.setflags(write=False)
    values.setflags(write=False)
    return replace(dofs, constrained_dofs=idx, constrained_values=values)


def sparsity_arrays(dofs: DofMap, mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Unique (row, col) couplings as two sorted index arrays."""
    cd = dofs.cell_dofs
    nb = cd.shape[1]
    rows = [np.repeat(cd, nb, axis=1).ravel()]
    cols = [np.tile(cd, (1, nb)).ravel()]
    faces = coupled_interior_faces(mesh, dofs.method)
    if len(faces):
        both = np.concatenate([cd[mesh.face_plus[faces]], cd[mesh.face_minus[faces]]], axis=1)
        rows.append(np.repeat(both, 2 * nb, axis=1).ravel())
        cols.append(np.tile(both, (1, 2 * nb)).ravel())
    key = np.unique(np.concatenate(rows) * dofs.n_dofs + np.concatenate(cols))
    return key // dofs.n_dofs, key % dofs.n_dofs


def sparsity_pattern(dofs: DofMap, mesh: Mesh) -> set[tuple[int, int]]:
    """Structural couplings: within each element, and across every face that
    carries face integrals for the map's method."""
    r, c = sparsity_arrays(dofs, mesh)
    return set(zip(r.tolist(), c.tolist()))
