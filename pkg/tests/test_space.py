import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdgfem.assembly import DGParameters, SystemAssembler, assemble_interior_faces, assemble_volume
from cdgfem.element import ReferenceBasis, gauss_rule_1d
from cdgfem.mesh import FaceKind, RegionSpec, build_structured_mesh, classify_regions, with_regions
from cdgfem.problems import manufactured_linear
from cdgfem.space import (DofClass, MethodKind, apply_dirichlet_constraints, build_dof_map,
                          sparsity_arrays, sparsity_pattern)

UNIT = ((0.0, 0.0), (1.0, 1.0))


@pytest.fixture(scope="module")
def example1_mesh():
    return classify_regions(build_structured_mesh(UNIT, 32, 32),
                            RegionSpec.parse("[0,0.96875)x[0,0.96875)"))


@pytest.mark.parametrize("method,count", [("dg", 4096), ("cg", 1089), ("cdg", 1276)])
def test_dof_counts_example1(example1_mesh, method, count):
    assert build_dof_map(example1_mesh, 1, method).n_dofs == count


def test_dof_counts_higher_degree():
    m = build_structured_mesh(UNIT, 3, 2)
    assert build_dof_map(m, 2, "cg").n_dofs == 7 * 5
    assert build_dof_map(m, 2, "dg").n_dofs == 6 * 9


def test_cdg_private_dofs_are_unshared(example1_mesh):
    dofs = build_dof_map(example1_mesh, 1, "cdg")
    disc = example1_mesh.region == 1
    private = dofs.cell_dofs[disc].ravel()
    assert len(np.unique(private)) == len(private)
    assert np.all(dofs.dof_class[private] == DofClass.PRIVATE)
    assert not np.intersect1d(private, dofs.cell_dofs[~disc].ravel()).size


def test_shared_dofs_agree_on_coordinates(example1_mesh):
    dofs = build_dof_map(example1_mesh, 2, "cdg")
    m = example1_mesh
    ref = ReferenceBasis(2).nodes
    coords = m.cell_lower[:, None, :] + ref[None] * m.cell_size[:, None, :]
    np.testing.assert_allclose(dofs.dof_coords[dofs.cell_dofs], coords, atol=1e-15)


def test_dg_has_no_constraints(example1_mesh):
    dofs = apply_dirichlet_constraints(build_dof_map(example1_mesh, 1, "dg"), example1_mesh,
                                       lambda x, y: x)
    assert dofs.constraints == {}


def test_cg_constraints_small_mesh():
    m = build_structured_mesh(UNIT, 2, 2)
    dofs = apply_dirichlet_constraints(build_dof_map(m, 1, "cg"), m, lambda x, y: 0 * x)
    assert len(dofs.constraints) == 8
    assert set(dofs.constraints.values()) == {0.0}
    free = set(range(9)) - set(dofs.constraints)
    assert dofs.dof_coords[free.pop()].tolist() == [0.5, 0.5]


def test_cdg_constraints_example1(example1_mesh):
    dofs = apply_dirichlet_constraints(build_dof_map(example1_mesh, 1, "cdg"), example1_mesh,
                                       lambda x, y: x + y)
    idx = dofs.constrained_dofs
    assert len(idx) == 63
    assert np.all(dofs.dof_class[idx] == DofClass.SHARED)
    xy = dofs.dof_coords[idx]
    assert np.all((xy[:, 0] == 0) | (xy[:, 1] == 0))
    np.testing.assert_allclose(dofs.constrained_values, xy.sum(axis=1))


def test_sparsity_single_dg_element():
    m = build_structured_mesh(UNIT, 1, 1)
    assert len(sparsity_pattern(build_dof_map(m, 1, "dg"), m)) == 16


def _dense_structural_count(mesh, dofs):
    """Brute force: assemble with every term switched on and count nonzeros."""
    problem = manufactured_linear(1.0)
    sys = SystemAssembler(dofs.n_dofs)
    assemble_volume(mesh, dofs, problem, sys)
    assemble_interior_faces(mesh, dofs, problem, DGParameters(theta=1), sys)
    dense = sys.matrix().toarray()
    return set(zip(*np.nonzero(dense)))


def test_sparsity_cg_two_cells_matches_dense_assembly():
    m = build_structured_mesh(UNIT, 2, 1)
    dofs = build_dof_map(m, 1, "cg")
    assert dofs.n_dofs == 6
    pattern = sparsity_pattern(dofs, m)
    # 6x6 minus the 8 pairs between the two outer node columns
    assert len(pattern) == 28
    assert pattern == _dense_structural_count(m, dofs)


def test_sparsity_dg_two_cells_matches_dense_assembly():
    m = build_structured_mesh(UNIT, 2, 1)
    dofs = build_dof_map(m, 1, "dg")
    pattern = sparsity_pattern(dofs, m)
    assert len(pattern) == 64
    # node pairs both off the shared face couple through no face term
    assert _dense_structural_count(m, dofs) <= pattern


def test_cdg_pattern_smaller_than_dg(example1_mesh):
    cdg = sparsity_pattern(build_dof_map(example1_mesh, 1, "cdg"), example1_mesh)
    dg = sparsity_pattern(build_dof_map(example1_mesh, 1, "dg"), example1_mesh)
    assert len(cdg) < len(dg)


def test_pattern_is_symmetric(example1_mesh):
    p = sparsity_pattern(build_dof_map(example1_mesh, 1, "cdg"), example1_mesh)
    assert all((c, r) in p for r, c in p)


def test_limit_equivalence_numbering():
    m = build_structured_mesh(UNIT, 4, 3)
    all_c = classify_regions(m, RegionSpec.whole(UNIT))
    all_d = classify_regions(m, RegionSpec.parse("none"))
    for tagged, ref in ((all_c, "cg"), (all_d, "dg")):
        a = build_dof_map(tagged, 2, "cdg")
        b = build_dof_map(tagged, 2, ref)
        np.testing.assert_array_equal(a.cell_dofs, b.cell_dofs)
        np.testing.assert_array_equal(a.dof_class, b.dof_class)


@settings(max_examples=40, deadline=None)
@given(nx=st.integers(1, 5), ny=st.integers(1, 5), k=st.integers(1, 3), seed=st.integers(0, 10 ** 6))
def test_count_monotonicity_and_conformity(nx, ny, k, seed):
    rng = np.random.default_rng(seed)
    m = with_regions(build_structured_mesh(UNIT, nx, ny), rng.integers(0, 2, nx * ny))
    n = {meth: build_dof_map(m, k, meth).n_dofs for meth in ("cg", "cdg", "dg")}
    assert n["cg"] <= n["cdg"] <= n["dg"]

    dofs = build_dof_map(m, k, "cdg")
    coeffs = rng.normal(size=dofs.n_dofs)
    basis = ReferenceBasis(k)
    t = gauss_rule_1d(k + 2).points
    for f in np.flatnonzero(m.face_kind == FaceKind.INTERIOR_CONTINUOUS):
        v = m.vertices[m.face_vertices[f]]
        X = v[0] + t[:, None] * (v[1] - v[0])
        vals = []
        for e in (m.face_plus[f], m.face_minus[f]):
            ref = (X - m.cell_lower[e]) / m.cell_size[e]
            vals.append(basis.tabulate(ref)[0] @ coeffs[dofs.cell_dofs[e]])
        np.testing.assert_allclose(vals[0], vals[1], atol=1e-12)


def test_numbering_is_deterministic(example1_mesh):
    a = build_dof_map(example1_mesh, 1, "cdg")
    b = build_dof_map(example1_mesh, 1, "cdg")
    np.testing.assert_array_equal(a.cell_dofs, b.cell_dofs)
    # shared DoFs first, then private
    assert np.all(np.diff(a.dof_class) >= 0)


def test_sparsity_arrays_sorted(example1_mesh):
    r, c = sparsity_arrays(build_dof_map(example1_mesh, 1, "cdg"), example1_mesh)
    key = r * 10 ** 6 + c
    assert np.all(np.diff(key) > 0)


def test_method_parse():
    assert MethodKind.parse("CDG") is MethodKind.CDG
    with pytest.raises(ValueError):
        MethodKind.parse("fem")
