"""Sparse storage and a direct solver for the nonsymmetric FEM systems."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class SolveReport:
    relative_residual: float
    iterations: int
    status: SolveStatus

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED


def from_coo(n: int, rows, cols, values) -> sp.csr_matrix:
    """CSR matrix from coordinate arrays; duplicate entries are summed."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if rows.shape != cols.shape or rows.shape != values.shape:
        raise ValueError("row, column and value arrays must have equal length")
    if len(rows) and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
        raise ValueError(f"triplet index out of range for dimension {n}")
    A = sp.coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def from_triplets(n: int, entries) -> sp.csr_matrix:
    """CSR matrix from an iterable of ``(row, col, value)`` triples."""
    entries = list(entries)
    if not entries:
        return sp.csr_matrix((n, n))
    r, c, v = zip(*entries)
    if any(int(i) != i for i in r + c):
        raise ValueError("triplet indices must be integers")
    return from_coo(n, r, c, v)


def solve(A, b, tol: float = DEFAULT_TOL, refinement_steps: int = 3):
    """Solve ``A x = b`` by sparse LU with partial pivoting (SuperLU).

    The relative residual is checked after the solve; a few steps of
    iterative refinement are tried before reporting breakdown.
    """
    A = sp.csc_matrix(A)
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    scale = bnorm if bnorm > 0 else 1.0
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        log.warning("LU factorization failed: %s", exc)
        return np.full_like(b, np.nan), SolveReport(np.inf, 0, SolveStatus.BREAKDOWN)

    x = lu.solve(b)
    rel = np.linalg.norm(b - A @ x) / scale
    steps = 0
    while not rel <= tol and steps < refinement_steps:
        x = x + lu.solve(b - A @ x)
        rel = np.linalg.norm(b - A @ x) / scale
        steps += 1
    status = SolveStatus.CONVERGED if rel <= tol else SolveStatus.BREAKDOWN
    if status is SolveStatus.BREAKDOWN:
        log.warning("direct solve residual %.3e exceeds tolerance %.1e", rel, tol)
    return x, SolveReport(float(rel), steps, status)
