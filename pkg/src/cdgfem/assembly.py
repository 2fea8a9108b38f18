"""Assembly of the interior-penalty advection-diffusion system.

Bilinear form (rows are test functions v, columns trial functions u)::

    sum_E  eps grad u . grad v - (b . grad v) u - (div b) u v
  + sum_e  sigma eps/h_e [u].[v] - {eps grad u}.[v] - theta {eps grad v}.[u]
  + sum_e  (b . n+)(v+ - v-) u_upwind   (interior faces)
  + sum_out (b . n) u v                 (outflow boundary)

Face terms are assembled only on faces that carry them for the chosen space:
the discontinuous skeleton and interface for cdG, every face for dG, none for
cG.  Boundary data enters weakly on the discontinuous part of the boundary and
strongly (by elimination) on the continuous part.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .element import ReferenceBasis, default_quadrature_points, gauss_rule_1d, gauss_rule_2d
from .linalg import from_coo
from .mesh import FaceKind, Flow, Mesh, classify_boundary_flow
from .problems import ProblemSpec
from .space import DofMap, MethodKind, coupled_interior_faces, weak_boundary_faces


class NumericalDomainError(ArithmeticError):
    """Problem data evaluated to NaN or infinity at a quadrature point."""


@dataclass(frozen=True)
class DGParameters:
    sigma_c: float = 10.0
    sigma_d: float = 10.0
    theta: int = -1
    superpenalty_mode: bool = False

    def __post_init__(self):
        if self.theta not in (-1, 0, 1):
            raise ValueError(f"theta must be -1, 0 or 1, got {self.theta!r}")
        if not (self.sigma_c > 0 and self.sigma_d > 0):
            raise ValueError("penalty parameters must be positive")

    @classmethod
    def for_degree(cls, k: int, **kw) -> "DGParameters":
        """Default penalties 10 k^2 on both skeleton classes."""
        sigma = 10.0 * k * k
        kw.setdefault("sigma_d", sigma)
        kw.setdefault("sigma_c", kw["sigma_d"])
        return cls(**kw)


@dataclass(frozen=True)
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray


@dataclass
class SystemAssembler:
    """Accumulates local blocks as COO triplets plus a dense load vector."""

    n: int
    rows: list = field(default_factory=list)
    cols: list = field(default_factory=list)
    vals: list = field(default_factory=list)
    rhs: np.ndarray = None

    def __post_init__(self):
        if self.rhs is None:
            self.rhs = np.zeros(self.n)

    def add_blocks(self, dofs: np.ndarray, blocks: np.ndarray):
        """Scatter local matrices ``blocks[c, i, j]`` onto ``dofs[c, i], dofs[c, j]``."""
        m = dofs.shape[1]
        self.rows.append(np.repeat(dofs, m, axis=1).ravel())
        self.cols.append(np.tile(dofs, (1, m)).ravel())
        self.vals.append(blocks.reshape(len(dofs), -1).ravel())

    def add_vectors(self, dofs: np.ndarray, vectors: np.ndarray):
        np.add.at(self.rhs, dofs.ravel(), vectors.ravel())

    def matrix(self) -> sp.csr_matrix:
        if not self.rows:
            return sp.csr_matrix((self.n, self.n))
        return from_coo(self.n, np.concatenate(self.rows), np.concatenate(self.cols),
                        np.concatenate(self.vals))


def jump_average(plus_value, minus_value, n_plus):
    """Jump and average of a face trace.

    Scalar traces: jump = v+ n+ + v- n- (a vector), average = (v+ + v-)/2.
    Vector traces: average = (t+ + t-)/2 and jump = t+.n+ + t-.n- (a scalar).
    On the boundary (``minus_value is None``) the jump is v n and the average
    is the one-sided value.
    """
    n = np.asarray(n_plus, dtype=float)
    vp = np.asarray(plus_value, dtype=float)
    if minus_value is None:
        jump = vp * n if vp.ndim == 0 else float(vp @ n)
        return jump, vp
    vm = np.asarray(minus_value, dtype=float)
    if vp.ndim == 0:
        return (vp - vm) * n, 0.5 * (vp + vm)
    return float((vp - vm) @ n), 0.5 * (vp + vm)


def _evaluate(fn, X, what):
    val = np.asarray(fn(X[..., 0], X[..., 1]), dtype=float)
    val = np.broadcast_to(val, X.shape[:-1])
    if not np.all(np.isfinite(val)):
        raise NumericalDomainError(f"{what} is not finite at some quadrature point")
    return val


def _evaluate_b(problem, X):
    bx, by = problem.b(X[..., 0], X[..., 1])
    B = np.stack(np.broadcast_arrays(np.asarray(bx, float), np.asarray(by, float)), axis=-1)
    B = np.broadcast_to(B, X.shape)
    if not np.all(np.isfinite(B)):
        raise NumericalDomainError("advection field is not finite at some quadrature point")
    return B


def _check_sign_condition(div_b, name):
    rho = -0.5 * div_b
    if rho.size and rho.min() < -1e-12:
        warnings.warn(f"{name}: rho = -div(b)/2 is negative (min {rho.min():.3e}); "
                      "the coercivity assumption is violated", RuntimeWarning, stacklevel=3)


def assemble_volume(mesh: Mesh, dofs: DofMap, problem: ProblemSpec, system: SystemAssembler):
    k = dofs.degree
    basis = ReferenceBasis(k)
    rule = gauss_rule_2d(default_quadrature_points(k))
    phi, dphi = basis.tabulate(rule.points)                      # (q,i), (q,i,d)
    size = mesh.cell_size
    X = mesh.cell_lower[:, None, :] + rule.points[None] * size[:, None, :]
    W = rule.weights[None, :] * (size[:, 0] * size[:, 1])[:, None]
    G = dphi[None] / size[:, None, None, :]                      # (e,q,i,d)

    B = _evaluate_b(problem, X)
    div_b = _evaluate(problem.div_b, X, "div b")
    f = _evaluate(problem.f, X, "forcing f")
    _check_sign_condition(div_b, problem.name)

    eps = problem.epsilon
    bgrad = np.einsum("eqid,eqd->eqi", G, B)
    A = eps * np.einsum("eq,eqid,eqjd->eij", W, G, G)
    A -= np.einsum("eq,eqi,qj->eij", W, bgrad, phi)
    A -= np.einsum("eq,qi,qj->eij", W * div_b, phi, phi)
    F = np.einsum("eq,qi->ei", W * f, phi)
    system.add_blocks(dofs.cell_dofs, A)
    system.add_vectors(dofs.cell_dofs, F)


def _face_points(mesh: Mesh, faces: np.ndarray, k: int):
    rule = gauss_rule_1d(default_quadrature_points(k))
    v = mesh.vertices[mesh.face_vertices[faces]]                 # (f,2,2)
    X = v[:, None, 0, :] + rule.points[None, :, None] * (v[:, None, 1, :] - v[:, None, 0, :])
    W = rule.weights[None, :] * mesh.face_length[faces][:, None]
    return X, W


def _side_tables(mesh: Mesh, elems: np.ndarray, X: np.ndarray, basis: ReferenceBasis):
    """Basis values and physical gradients of ``elems`` at physical points X."""
    lower = mesh.cell_lower[elems][:, None, :]
    size = mesh.cell_size[elems][:, None, :]
    ref = np.clip((X - lower) / size, 0.0, 1.0)
    phi, dphi = basis.tabulate(ref)
    return phi, dphi / size[:, :, None, :]


def _face_sigma(mesh: Mesh, faces: np.ndarray, params: DGParameters) -> np.ndarray:
    sigma = np.full(len(faces), float(params.sigma_d))
    if params.superpenalty_mode:
        kind = mesh.face_kind[faces]
        cont = (kind == FaceKind.INTERIOR_CONTINUOUS) | (kind == FaceKind.BOUNDARY_CONTINUOUS)
        sigma[cont] = params.sigma_c
    return sigma


def _check_superpenalty(dofs: DofMap, params: DGParameters):
    if params.superpenalty_mode and dofs.method is not MethodKind.DG:
        raise ValueError("superpenalty mode requires a pure dG DoF map")


def assemble_interior_faces(mesh: Mesh, dofs: DofMap, problem: ProblemSpec,
                            params: DGParameters, system: SystemAssembler):
    _check_superpenalty(dofs, params)
    faces = coupled_interior_faces(mesh, dofs.method)
    if len(faces) == 0:
        return
    k = dofs.degree
    basis = ReferenceBasis(k)
    plus, minus = mesh.face_plus[faces], mesh.face_minus[faces]
    n = mesh.face_normal[faces]
    X, W = _face_points(mesh, faces, k)
    phi_p, G_p = _side_tables(mesh, plus, X, basis)
    phi_m, G_m = _side_tables(mesh, minus, X, basis)
    Gn_p = np.einsum("fqid,fd->fqi", G_p, n)
    Gn_m = np.einsum("fqid,fd->fqi", G_m, n)

    jump = np.concatenate([phi_p, -phi_m], axis=2)               # [w] = jump * n
    avg_n = 0.5 * np.concatenate([Gn_p, Gn_m], axis=2)           # {grad w} . n
    bn = np.einsum("fqd,fd->fq", _evaluate_b(problem, X), n)
    # tie b.n = 0 goes to the plus side; the term is multiplied by b.n anyway
    up_plus = (bn >= 0)[..., None]
    upwind = np.concatenate([np.where(up_plus, phi_p, 0.0), np.where(up_plus, 0.0, phi_m)], axis=2)

    eps = problem.epsilon
    pen = _face_sigma(mesh, faces, params) * eps / mesh.face_length[faces]
    A = np.einsum("fq,fqi,fqj->fij", W * pen[:, None], jump, jump)
    A -= eps * np.einsum("fq,fqi,fqj->fij", W, jump, avg_n)
    A -= params.theta * eps * np.einsum("fq,fqi,fqj->fij", W, avg_n, jump)
    A += np.einsum("fq,fqi,fqj->fij", W * bn, jump, upwind)

    local = np.concatenate([dofs.cell_dofs[plus], dofs.cell_dofs[minus]], axis=1)
    system.add_blocks(local, A)


def assemble_boundary_faces(mesh: Mesh, dofs: DofMap, problem: ProblemSpec,
                            params: DGParameters, system: SystemAssembler):
    _check_superpenalty(dofs, params)
    faces = weak_boundary_faces(mesh, dofs.method)
    if len(faces) == 0:
        return
    flow = mesh.face_flow[faces]
    if np.any(flow == Flow.UNSET):
        raise ValueError("boundary faces have no inflow/outflow tags; run classify_boundary_flow")
    k = dofs.degree
    basis = ReferenceBasis(k)
    elem = mesh.face_plus[faces]
    n = mesh.face_normal[faces]
    X, W = _face_points(mesh, faces, k)
    phi, G = _side_tables(mesh, elem, X, basis)
    Gn = np.einsum("fqid,fd->fqi", G, n)
    bn = np.einsum("fqd,fd->fq", _evaluate_b(problem, X), n)
    g = _evaluate(problem.g, X, "boundary data g")
    outflow = (flow == Flow.OUTFLOW)[:, None]

    eps = problem.epsilon
    pen = (_face_sigma(mesh, faces, params) * eps / mesh.face_length[faces])[:, None]
    A = np.einsum("fq,fqi,fqj->fij", W * pen, phi, phi)
    A -= eps * np.einsum("fq,fqi,fqj->fij", W, phi, Gn)
    A -= params.theta * eps * np.einsum("fq,fqi,fqj->fij", W, Gn, phi)
    A += np.einsum("fq,fqi,fqj->fij", W * bn * outflow, phi, phi)

    F = np.einsum("fq,fqi->fi", W * pen * g, phi)
    F -= params.theta * eps * np.einsum("fq,fqi->fi", W * g, Gn)
    F -= np.einsum("fq,fqi->fi", W * bn * ~outflow * g, phi)

    local = dofs.cell_dofs[elem]
    system.add_blocks(local, A)
    system.add_vectors(local, F)


def eliminate_constraints(A: sp.csr_matrix, rhs: np.ndarray, dofs: DofMap) -> LinearSystem:
    """Replace constrained rows and columns by the identity, moving the known
    values to the right-hand side."""
    idx = dofs.constrained_dofs
    if len(idx) == 0:
        return LinearSystem(A, rhs)
    known = np.zeros(A.shape[0])
    known[idx] = dofs.constrained_values
    rhs = rhs - A @ known
    rhs[idx] = dofs.constrained_values
    free = np.ones(A.shape[0])
    free[idx] = 0.0
    D = sp.diags(free)
    A = (D @ A @ D + sp.diags(1.0 - free)).tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    return LinearSystem(A, rhs)


def assemble_system(mesh: Mesh, dofs: DofMap, problem: ProblemSpec,
                    params: DGParameters, method=None) -> LinearSystem:
    """Assemble and apply strong constraints for the space described by ``dofs``."""
    if method is not None and MethodKind.parse(method) is not dofs.method:
        raise ValueError(f"method {method!r} does not match the DoF map ({dofs.method.value})")
    if np.any(mesh.face_flow[mesh.face_minus < 0] == Flow.UNSET):
        mesh = classify_boundary_flow(mesh, problem.b)
    system = SystemAssembler(dofs.n_dofs)
    assemble_volume(mesh, dofs, problem, system)
    assemble_interior_faces(mesh, dofs, problem, params, system)
    assemble_boundary_faces(mesh, dofs, problem, params, system)
    return eliminate_constraints(system.matrix(), system.rhs, dofs)
