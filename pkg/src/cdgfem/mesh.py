"""Structured quadrilateral meshes with continuous/discontinuous region tags.

Elements are indexed ``e = j * nx + i`` for column ``i`` and row ``j``;
vertices ``v = j * (nx + 1) + i``.  Faces are numbered with all vertical
faces (normal along x) first, row by row, followed by the horizontal faces.
For an interior face the plus element is the one with the smaller index and
``normal`` points out of it, toward the minus element.  Boundary faces have
``minus == -1`` and an outward normal.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np


class Point2(NamedTuple):
    x: float
    y: float


class Region(IntEnum):
    CONTINUOUS = 0
    DISCONTINUOUS = 1


class FaceKind(IntEnum):
    INTERIOR_CONTINUOUS = 0
    INTERIOR_DISCONTINUOUS = 1
    INTERFACE = 2
    BOUNDARY_CONTINUOUS = 3
    BOUNDARY_DISCONTINUOUS = 4


class Flow(IntEnum):
    UNSET = -1
    INFLOW = 0
    OUTFLOW = 1


INTERIOR_KINDS = (FaceKind.INTERIOR_CONTINUOUS, FaceKind.INTERIOR_DISCONTINUOUS, FaceKind.INTERFACE)
BOUNDARY_KINDS = (FaceKind.BOUNDARY_CONTINUOUS, FaceKind.BOUNDARY_DISCONTINUOUS)


@dataclass(frozen=True)
class ElementCell:
    id: int
    vertex_ids: tuple[int, int, int, int]
    region: Region
    lower_corner: Point2
    upper_corner: Point2

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.upper_corner.x - self.lower_corner.x,
                              self.upper_corner.y - self.lower_corner.y))

    @property
    def centroid(self) -> Point2:
        return Point2(0.5 * (self.lower_corner.x + self.upper_corner.x),
                      0.5 * (self.lower_corner.y + self.upper_corner.y))


@dataclass(frozen=True)
class Face:
    id: int
    vertex_ids: tuple[int, int]
    plus_element: int
    minus_element: Optional[int]
    normal: tuple[float, float]
    length: float
    kind: FaceKind
    flow: Optional[Flow]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle; each edge is independently open or closed."""

    x0: float
    x1: float
    y0: float
    y1: float
    closed: tuple[bool, bool, bool, bool] = (True, True, True, True)

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        cx0, cx1, cy0, cy1 = self.closed
        inside = (x >= self.x0) if cx0 else (x > self.x0)
        inside &= (x <= self.x1) if cx1 else (x < self.x1)
        inside &= (y >= self.y0) if cy0 else (y > self.y0)
        inside &= (y <= self.y1) if cy1 else (y < self.y1)
        return inside

    def __str__(self) -> str:
        cx0, cx1, cy0, cy1 = self.closed
        return (f"{'[' if cx0 else '('}{self.x0!r},{self.x1!r}{']' if cx1 else ')'}x"
                f"{'[' if cy0 else '('}{self.y0!r},{self.y1!r}{']' if cy1 else ')'}")


_INTERVAL = r"\s*([\[(])\s*([^,\s]+)\s*,\s*([^\])\s]+)\s*([\])])\s*"
_RECT_RE = re.compile(_INTERVAL + "x" + _INTERVAL + "$")


@dataclass(frozen=True)
class RegionSpec:
    """The continuous region as a union of rectangles (empty means pure dG)."""

    rects: tuple[Rect, ...] = ()

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        inside = np.zeros(np.broadcast(x, np.asarray(y)).shape, dtype=bool)
        for r in self.rects:
            inside |= r.contains(x, y)
        return inside

    @classmethod
    def parse(cls, text: str) -> "RegionSpec":
        """Parse ``"[0,0.5)x[0,0.5)"``; several rectangles are joined with ``;``.

        ``"none"`` (or an empty string) gives the empty region.
        """
        text = text.strip()
        if text.lower() in ("", "none", "empty"):
            return cls(())
        rects = []
        for part in text.split(";"):
            m = _RECT_RE.match(part)
            if m is None:
                raise ValueError(f"cannot parse rectangle {part!r}")
            ox, a, b, cx, oy, c, d, cy = m.groups()
            a, b, c, d = (float(v) for v in (a, b, c, d))
            if a > b or c > d:
                raise ValueError(f"empty rectangle {part!r}")
            rects.append(Rect(a, b, c, d, (ox == "[", cx == "]", oy == "[", cy == "]")))
        return cls(tuple(rects))

    @classmethod
    def whole(cls, bounds) -> "RegionSpec":
        (x0, y0), (x1, y1) = bounds
        return cls((Rect(x0, x1, y0, y1),))

    def __str__(self) -> str:
        return ";".join(str(r) for r in self.rects) if self.rects else "none"


@dataclass(frozen=True, eq=False)
class Mesh:
    """Structured quad mesh.  Arrays are read-only after construction."""

    bounds: tuple[Point2, Point2]
    nx: int
    ny: int
    vertices: np.ndarray          # (nv, 2)
    cell_vertices: np.ndarray     # (ne, 4), counterclockwise
    cell_lower: np.ndarray        # (ne, 2)
    cell_upper: np.ndarray        # (ne, 2)
    region: np.ndarray            # (ne,) Region values
    face_vertices: np.ndarray     # (nf, 2)
    face_plus: np.ndarray         # (nf,)
    face_minus: np.ndarray        # (nf,), -1 on the boundary
    face_normal: np.ndarray       # (nf, 2), out of the plus element
    face_length: np.ndarray       # (nf,)
    face_kind: np.ndarray         # (nf,) FaceKind values
    face_flow: np.ndarray         # (nf,) Flow values

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def n_faces(self) -> int:
        return len(self.face_plus)

    @property
    def cell_size(self) -> np.ndarray:
        return self.cell_upper - self.cell_lower

    @property
    def cell_diameter(self) -> np.ndarray:
        s = self.cell_size
        return np.hypot(s[:, 0], s[:, 1])

    @property
    def centroids(self) -> np.ndarray:
        return 0.5 * (self.cell_lower + self.cell_upper)

    @property
    def face_midpoints(self) -> np.ndarray:
        v = self.vertices[self.face_vertices]
        return 0.5 * (v[:, 0] + v[:, 1])

    @property
    def is_boundary_face(self) -> np.ndarray:
        return self.face_minus < 0

    def element(self, e: int) -> ElementCell:
        lo, up = self.cell_lower[e], self.cell_upper[e]
        return ElementCell(int(e), tuple(int(v) for v in self.cell_vertices[e]),
                           Region(int(self.region[e])), Point2(*lo), Point2(*up))

    @property
    def elements(self) -> list[ElementCell]:
        return [self.element(e) for e in range(self.n_elements)]

    def face(self, f: int) -> Face:
        minus = int(self.face_minus[f])
        flow = int(self.face_flow[f])
        return Face(int(f), tuple(int(v) for v in self.face_vertices[f]), int(self.face_plus[f]),
                    None if minus < 0 else minus, tuple(float(c) for c in self.face_normal[f]),
                    float(self.face_length[f]), FaceKind(int(self.face_kind[f])),
                    None if flow == Flow.UNSET else Flow(flow))

    @property
    def faces(self) -> list[Face]:
        return [self.face(f) for f in range(self.n_faces)]

    def faces_of_kind(self, *kinds: FaceKind) -> np.ndarray:
        return np.flatnonzero(np.isin(self.face_kind, [int(k) for k in kinds]))

    def same_grid(self, other: "Mesh") -> bool:
        return (self is other) or (self.nx == other.nx and self.ny == other.ny
                                   and tuple(self.bounds) == tuple(other.bounds))

    def _replace(self, **arrays) -> "Mesh":
        for a in arrays.values():
            a.setflags(write=False)
        return dataclasses.replace(self, **arrays)


def build_structured_mesh(bounds, nx: int, ny: int) -> Mesh:
    """Uniform nx-by-ny mesh of the rectangle ``bounds = ((x0, y0), (x1, y1))``.

    All elements start out continuous; boundary faces carry no flow tag yet.
    """
    (x0, y0), (x1, y1) = bounds
    if not (np.isfinite([x0, y0, x1, y1]).all() and x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate bounds {bounds!r}")
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError(f"element counts must be positive integers, got nx={nx}, ny={ny}")
    nx, ny = int(nx), int(ny)

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    vx, vy = np.meshgrid(xs, ys)
    vertices = np.column_stack([vx.ravel(), vy.ravel()])

    jj, ii = np.divmod(np.arange(nx * ny), nx)
    v00 = jj * (nx + 1) + ii
    cell_vertices = np.column_stack([v00, v00 + 1, v00 + nx + 2, v00 + nx + 1])
    cell_lower = np.column_stack([xs[ii], ys[jj]])
    cell_upper = np.column_stack([xs[ii + 1], ys[jj + 1]])

    # vertical faces: x = xs[i], between ys[j] and ys[j+1]
    jv, iv = np.divmod(np.arange((nx + 1) * ny), nx + 1)
    vert_vertices = np.column_stack([jv * (nx + 1) + iv, (jv + 1) * (nx + 1) + iv])
    left = np.where(iv > 0, jv * nx + iv - 1, -1)
    right = np.where(iv < nx, jv * nx + iv, -1)
    vert_plus = np.where(left >= 0, left, right)
    vert_minus = np.where(left >= 0, right, -1)
    vert_normal = np.zeros((len(iv), 2))
    vert_normal[:, 0] = np.where(left >= 0, 1.0, -1.0)
    vert_length = ys[jv + 1] - ys[jv]

    # horizontal faces: y = ys[j], between xs[i] and xs[i+1]
    jh, ih = np.divmod(np.arange(nx * (ny + 1)), nx)
    hor_vertices = np.column_stack([jh * (nx + 1) + ih, jh * (nx + 1) + ih + 1])
    below = np.where(jh > 0, (jh - 1) * nx + ih, -1)
    above = np.where(jh < ny, jh * nx + ih, -1)
    hor_plus = np.where(below >= 0, below, above)
    hor_minus = np.where(below >= 0, above, -1)
    hor_normal = np.zeros((len(ih), 2))
    hor_normal[:, 1] = np.where(below >= 0, 1.0, -1.0)
    hor_length = xs[ih + 1] - xs[ih]

    face_minus = np.concatenate([vert_minus, hor_minus])
    n_faces = len(face_minus)
    face_kind = np.where(face_minus >= 0, FaceKind.INTERIOR_CONTINUOUS,
                         FaceKind.BOUNDARY_CONTINUOUS).astype(np.int8)

    arrays = dict(
        vertices=vertices,
        cell_vertices=cell_vertices,
        cell_lower=cell_lower,
        cell_upper=cell_upper,
        region=np.full(nx * ny, Region.CONTINUOUS, dtype=np.int8),
        face_vertices=np.concatenate([vert_vertices, hor_vertices]),
        face_plus=np.concatenate([vert_plus, hor_plus]),
        face_minus=face_minus,
        face_normal=np.concatenate([vert_normal, hor_normal]),
        face_length=np.concatenate([vert_length, hor_length]),
        face_kind=face_kind,
        face_flow=np.full(n_faces, Flow.UNSET, dtype=np.int8),
    )
    for a in arrays.values():
        a.setflags(write=False)
    return Mesh(bounds=(Point2(float(x0), float(y0)), Point2(float(x1), float(y1))),
                nx=nx, ny=ny, **arrays)


def _face_kinds(mesh: Mesh, region: np.ndarray) -> np.ndarray:
    plus_reg = region[mesh.face_plus]
    interior = mesh.face_minus >= 0
    minus_reg = region[np.where(interior, mesh.face_minus, mesh.face_plus)]
    kind = np.empty(mesh.n_faces, dtype=np.int8)
    cont = plus_reg == Region.CONTINUOUS
    kind[~interior & cont] = FaceKind.BOUNDARY_CONTINUOUS
    kind[~interior & ~cont] = FaceKind.BOUNDARY_DISCONTINUOUS
    same = plus_reg == minus_reg
    kind[interior & same & cont] = FaceKind.INTERIOR_CONTINUOUS
    kind[interior & same & ~cont] = FaceKind.INTERIOR_DISCONTINUOUS
    kind[interior & ~same] = FaceKind.INTERFACE
    return kind


def classify_regions(mesh: Mesh, spec: RegionSpec) -> Mesh:
    """Tag each element by whether its centroid lies in the continuous region
    and reclassify every face accordingly.  Returns a new mesh."""
    c = mesh.centroids
    region = np.where(spec.contains(c[:, 0], c[:, 1]), Region.CONTINUOUS,
                      Region.DISCONTINUOUS).astype(np.int8)
    return mesh._replace(region=region, face_kind=_face_kinds(mesh, region))


def with_regions(mesh: Mesh, region: Sequence[int]) -> Mesh:
    """Apply explicit per-element region tags (mainly for tests)."""
    region = np.asarray(region, dtype=np.int8).copy()
    if region.shape != (mesh.n_elements,):
        raise ValueError("need one region tag per element")
    return mesh._replace(region=region, face_kind=_face_kinds(mesh, region))


def classify_boundary_flow(mesh: Mesh, b: Callable) -> Mesh:
    """Tag each boundary face inflow (b.n <= 0) or outflow (b.n > 0), with b
    evaluated at the face midpoint."""
    mid = mesh.face_midpoints
    bx, by = b(mid[:, 0], mid[:, 1])
    bn = (np.broadcast_to(bx, mid[:, 0].shape) * mesh.face_normal[:, 0]
          + np.broadcast_to(by, mid[:, 0].shape) * mesh.face_normal[:, 1])
    flow = np.where(bn > 0, Flow.OUTFLOW, Flow.INFLOW).astype(np.int8)
    flow[~mesh.is_boundary_face] = Flow.UNSET
    return mesh._replace(face_flow=flow)


def skeleton_counts(mesh: Mesh) -> dict[str, int]:
    """Sizes of the continuous skeleton, discontinuous skeleton (interface
    included), the interface alone and the boundary."""
    k = mesh.face_kind
    return {
        "continuous": int(np.sum(k == FaceKind.INTERIOR_CONTINUOUS)),
        "discontinuous": int(np.sum((k == FaceKind.INTERIOR_DISCONTINUOUS) | (k == FaceKind.INTERFACE))),
        "interface": int(np.sum(k == FaceKind.INTERFACE)),
        "boundary": int(np.sum(mesh.face_minus < 0)),
    }
