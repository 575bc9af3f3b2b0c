"""Mesh validation, refinement gluing, and pullback transport.

The gluing tests compare against a brute-force oracle that identifies
small cubes purely by their physical corner point sets (exact dyadic
floats on structured meshes), sharing nothing with the integer keys
used by :func:`refine`.
"""

import json

import numpy as np
import pytest

from cubeforms.forms import PolyForm, basis_form
from cubeforms.mesh import (
    AffineMap,
    CubicalMesh,
    MeshValidationError,
    PulledBackForm,
    load_mesh,
    pullback_basis,
    refine,
    save_mesh,
    structured_mesh,
)
from cubeforms.smallcubes import (
    enumerate_small_cubes,
    small_cube_count,
    small_cube_from_geometry,
)


def _corner_bits(j, n):
    return np.array([(j >> i) & 1 for i in range(n)], dtype=float)


# -- construction and validation -------------------------------------


def test_structured_mesh_counts_and_coordinates():
    mesh = structured_mesh(2, 3)
    assert mesh.n_vertices == 16
    assert mesh.n_cells == 9
    # vertices on the uniform grid, last axis fastest
    grid = np.array(
        [[i / 3, j / 3] for i in range(4) for j in range(4)]
    )
    assert np.array_equal(mesh.vertices, grid)


def test_structured_mesh_binary_corner_order():
    for n, m, shear in [(1, 3, 0.0), (2, 2, 0.0), (2, 2, 0.4), (3, 2, 0.1)]:
        mesh = structured_mesh(n, m, shear=shear)
        for ci in range(mesh.n_cells):
            amap = mesh.cell_map(ci)
            cell = mesh.cells[ci]
            for j in range(2**n):
                want = mesh.vertices[cell[j]]
                got = amap(_corner_bits(j, n))
                assert np.allclose(got, want, atol=1e-14)


def test_structured_mesh_shear_tilts_first_axis():
    mesh = structured_mesh(2, 1, shear=0.5)
    assert np.allclose(
        sorted(map(tuple, mesh.vertices.tolist())),
        [(0.0, 0.0), (0.5, 1.0), (1.0, 0.0), (1.5, 1.0)],
    )


def test_cell_map_round_trip():
    mesh = structured_mesh(2, 2, shear=0.3)
    amap = mesh.cell_map(3)
    pts = np.random.default_rng(1).random((20, 2))
    back = amap.pull_to_reference(amap(pts))
    assert np.abs(back - pts).max() < 1e-13
    assert amap.determinant == pytest.approx(0.25)


def _square(vertices, cells):
    return CubicalMesh(2, np.asarray(vertices, dtype=float), cells)


def test_rejects_bad_vertex_shape():
    with pytest.raises(MeshValidationError, match="shape"):
        CubicalMesh(2, np.zeros((4, 3)), ((0, 1, 2, 3),))


def test_rejects_non_finite_vertex():
    with pytest.raises(MeshValidationError, match="finite"):
        _square([[0, 0], [1, 0], [0, np.nan], [1, 1]], ((0, 1, 2, 3),))


def test_rejects_wrong_cell_length():
    with pytest.raises(MeshValidationError, match="expected"):
        _square([[0, 0], [1, 0], [0, 1]], ((0, 1, 2),))


def test_rejects_out_of_range_vertex_id():
    with pytest.raises(MeshValidationError, match="valid ids"):
        _square([[0, 0], [1, 0], [0, 1], [1, 1]], ((0, 1, 2, 7),))


def test_rejects_repeated_vertex_in_cell():
    with pytest.raises(MeshValidationError, match="repeats"):
        _square([[0, 0], [1, 0], [0, 1], [1, 1], [0, 2], [1, 2]], ((0, 1, 2, 2), (2, 3, 4, 5)))


def test_rejects_dangling_vertex():
    with pytest.raises(MeshValidationError, match="used by no cell"):
        _square(
            [[0, 0], [1, 0], [0, 1], [1, 1], [5, 5]], ((0, 1, 2, 3),)
        )


def test_rejects_duplicate_vertex_coordinates():
    with pytest.raises(MeshValidationError, match="coincide"):
        _square(
            [[0, 0], [1, 0], [0, 1], [1, 1], [1, 0]],
            ((0, 1, 2, 3), (1, 4, 3, 2)),
        )


def test_rejects_non_parallelotope_cell():
    with pytest.raises(MeshValidationError, match="parallelotope"):
        _square([[0, 0], [1, 0], [0, 1], [2, 2]], ((0, 1, 2, 3),))


def test_rejects_degenerate_cell():
    with pytest.raises(MeshValidationError, match="degenerate"):
        _square([[0, 0], [1, 0], [2, 0], [3, 0]], ((0, 1, 2, 3),))


def test_rejects_non_conforming_cells():
    # cells share vertices {0, 1, 3}, which is not a binary face of
    # either cell
    verts = [[0, 0], [1, 0], [0, 1], [1, 1], [2, 1]]
    with pytest.raises(MeshValidationError, match="whole face"):
        _square(verts, ((0, 1, 2, 3), (3, 4, 0, 1)))


def test_accepts_translated_disjoint_cells():
    mesh = _square(
        [[0, 0], [1, 0], [0, 1], [1, 1], [5, 0], [6, 0], [5, 1], [6, 1]],
        ((0, 1, 2, 3), (4, 5, 6, 7)),
    )
    assert mesh.n_cells == 2


def test_mesh_json_round_trip(tmp_path):
    mesh = structured_mesh(2, 2, shear=0.25)
    path = tmp_path / "mesh.json"
    save_mesh(mesh, path)
    loaded = load_mesh(path)
    assert loaded.dimension == mesh.dimension
    assert np.array_equal(loaded.vertices, mesh.vertices)
    assert loaded.cells == mesh.cells


def test_load_mesh_malformed_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dimension": 2, "vertices": [[0, 0]]}))
    with pytest.raises(MeshValidationError, match="malformed"):
        load_mesh(path)


# -- refinement ------------------------------------------------------


@pytest.mark.parametrize(
    "n,m,k,shear",
    [(1, 3, 2, 0.0), (2, 2, 2, 0.0), (2, 3, 1, 0.3), (2, 2, 3, 0.5), (3, 2, 2, 0.2)],
)
def test_refined_counts_match_finer_grid(n, m, k, shear):
    # gluing m^n cells of order k must reproduce the small-cube counts
    # of a single (m*k)-grid cell
    refined = refine(structured_mesh(n, m, shear=shear), k)
    for p in range(n + 1):
        assert refined.count(p) == small_cube_count(n, p, m * k)


@pytest.mark.parametrize("n,m,k", [(2, 2, 2), (2, 2, 1), (3, 2, 1)])
def test_refinement_matches_point_set_oracle(n, m, k):
    mesh = structured_mesh(n, m)
    refined = refine(mesh, k)
    maps = [mesh.cell_map(i) for i in range(mesh.n_cells)]
    for p in range(n + 1):
        local = enumerate_small_cubes(n, p, k)
        seen: dict[frozenset, set] = {}
        for ci in range(mesh.n_cells):
            for li, sc in enumerate(local):
                pts = maps[ci](
                    np.array(sc.corner_numerators(), dtype=float) / k
                )
                key = frozenset(map(tuple, pts.tolist()))
                seen.setdefault(key, set()).add(
                    int(refined.cell_tables[p][ci, li])
                )
        # distinct point sets <-> distinct global ids, one-to-one
        assert len(seen) == refined.count(p)
        assert all(len(ids) == 1 for ids in seen.values())
        assert {i for ids in seen.values() for i in ids} == set(
            range(refined.count(p))
        )


def test_owner_multiplicity_accounts_for_every_local_cube():
    n, m, k = 2, 2, 2
    refined = refine(structured_mesh(n, m), k)
    for p in range(n + 1):
        total = sum(len(gc.owners) for gc in refined.cubes[p])
        assert total == m**n * small_cube_count(n, p, k)
    # the centre vertex belongs to all four cells
    assert max(len(gc.owners) for gc in refined.cubes[0]) == 4


def test_axis_aligned_refinement_signs_are_uniform():
    # identical edge matrices in every cell must give identical signs;
    # degrees 0 and 1 are fixed to +1 by the sign normalisation
    refined = refine(structured_mesh(2, 2), 2)
    for p in range(3):
        signs = refined.cell_signs[p]
        assert len(np.unique(signs)) == 1
    assert np.all(refined.cell_signs[0] == 1)
    assert np.all(refined.cell_signs[1] == 1)


def test_sheared_refinement_signs_agree_between_owners():
    refined = refine(structured_mesh(2, 2, shear=0.6), 2)
    for p in range(3):
        for gc in refined.cubes[p]:
            signs = {s for (_, _, s) in gc.owners}
            assert len(signs) == 1


def test_incidence_entry_pattern():
    refined = refine(structured_mesh(2, 2, shear=0.3), 2)
    for q in (0, 1):
        rows = refined.incidence(q)
        assert len(rows) == refined.count(q + 1)
        for entries in rows:
            assert len(entries) == 2 * (q + 2 - 1)
            assert all(s in (-1, 1) for (_, s) in entries)
            ids = [i for (i, _) in entries]
            assert all(0 <= i < refined.count(q) for i in ids)


@pytest.mark.parametrize(
    "n,m,k,shear", [(2, 2, 2, 0.0), (2, 2, 2, 0.7), (3, 2, 1, 0.4), (3, 1, 2, 0.0)]
)
def test_coboundary_squares_to_zero(n, m, k, shear):
    refined = refine(structured_mesh(n, m, shear=shear), k)
    for q in range(n - 1):
        upper = refined.coboundary_matrix(q + 1)
        lower = refined.coboundary_matrix(q)
        product = upper @ lower
        assert product.nnz == 0 or np.all(product.data == 0)


def test_coboundary_shape_and_cache():
    refined = refine(structured_mesh(2, 2), 1)
    d0 = refined.coboundary_matrix(0)
    assert d0.shape == (refined.count(1), refined.count(0))
    assert refined.coboundary_matrix(0) is d0


def test_degree_restriction_raises_for_missing_level():
    refined = refine(structured_mesh(2, 2), 2, degrees=(1,))
    assert refined.degrees == (1,)
    assert refined.count(1) == small_cube_count(2, 1, 4)
    with pytest.raises(KeyError):
        refined.count(0)
    with pytest.raises(KeyError):
        refined.incidence(0)


def test_refine_rejects_bad_arguments():
    mesh = structured_mesh(2, 1)
    with pytest.raises(ValueError):
        refine(mesh, 0)
    with pytest.raises(ValueError):
        refine(mesh, 2, degrees=(3,))


def test_to_csv_lists_every_cube(tmp_path):
    refined = refine(structured_mesh(2, 2), 1)
    path = tmp_path / "cubes.csv"
    refined.to_csv(path, 1)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "id,degree,n_owners,first_cell,anchor"
    assert len(lines) == 1 + refined.count(1)


# -- pullback --------------------------------------------------------


def test_pullback_through_identity_map_is_transparent():
    amap = AffineMap(origin=np.zeros(2), linear=np.eye(2))
    ref = basis_form(small_cube_from_geometry(2, (0,), (1, 0)))
    pulled = pullback_basis(amap, ref)
    assert isinstance(pulled, PulledBackForm)
    pts = np.random.default_rng(3).random((15, 2))
    got = pulled.evaluate(pts)
    want = ref.evaluate(pts)
    assert set(got) == set(want)
    for dirs in want:
        assert np.allclose(got[dirs], want[dirs], atol=1e-14)


def test_pullback_scales_components_by_inverse_edge_lengths():
    # the cell [0,2]x[0,3]: a unit reference 1-form along axis 0
    # becomes 1/2 along physical axis 0
    amap = AffineMap(origin=np.zeros(2), linear=np.diag([2.0, 3.0]))
    ref = PolyForm(2, 1, {(0,): np.ones((1, 1))})
    pulled = pullback_basis(amap, ref)
    got = pulled.evaluate(np.array([[1.0, 1.5]]))
    # vanishing components are dropped from the result
    assert set(got) == {(0,)}
    assert got[(0,)][0] == pytest.approx(0.5)


def test_pullback_derivative_matches_finite_differences():
    # sheared cell, scalar form: d(pullback) vs central differences
    amap = AffineMap(
        origin=np.array([0.5, -1.0]),
        linear=np.array([[1.0, 0.7], [0.0, 2.0]]),
    )
    ref = basis_form(small_cube_from_geometry(2, (), (1, 2)))
    pulled = pullback_basis(amap, ref)
    derived = pulled.exterior_derivative()
    assert derived.degree == 1
    rng = np.random.default_rng(5)
    pts = amap(rng.random((8, 2)) * 0.8 + 0.1)
    h = 1e-6
    got = derived.evaluate(pts)
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = h
        hi = pulled.evaluate(pts + shift)[()]
        lo = pulled.evaluate(pts - shift)[()]
        fd = (hi - lo) / (2 * h)
        assert np.abs(got[(axis,)] - fd).max() < 1e-6
