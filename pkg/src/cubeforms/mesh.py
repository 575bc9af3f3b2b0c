"""Cubical meshes of parallelotopes and their order-k refinements.

A mesh stores vertices plus cells of 2^n vertex ids in binary-corner
order: corner number c sits at reference coordinates whose j-th entry is
bit j of c, so corner 0 is the cell origin, corner 1 its neighbour along
reference axis 0, corner 2 along axis 1, and so on.  Every cell must be
a parallelotope (the image of the unit cube under an invertible affine
map) and cells may only meet along whole shared faces, which is checked
on the shared vertex-id sets.

Refinement instantiates the small p-cubes of every cell and glues them
globally.  Identification is exact: a small-cube corner is keyed by the
integer multilinear weights of the cell's vertices at that point (common
denominator k^n, zero weights dropped), and a small cube by the set of
its corner keys, so cubes shared between neighbouring cells coincide
bit for bit regardless of which cell produced them.  Each global cube
carries an orientation, stored as the exterior coordinates of its span;
owners record the sign relating their local direction order to it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import NamedTuple

import numpy as np
from scipy import sparse

from .forms import PolyForm, exterior_derivative
from .smallcubes import (
    SmallCube,
    enumerate_small_cubes,
    small_cube_from_geometry,
    small_cube_positions,
)

#: Relative tolerance for the parallelotope shape check.
SHAPE_TOL = 1e-12

#: Relative tolerance below which a cell map counts as degenerate.
DEGENERACY_TOL = 1e-14


class MeshValidationError(ValueError):
    """Raised when a mesh fails a structural or geometric check."""


def _corner_shift(corner: int, dimension: int) -> tuple[int, ...]:
    return tuple((corner >> j) & 1 for j in range(dimension))


@dataclass(frozen=True)
class AffineMap:
    """x -> origin + linear @ x; columns of ``linear`` are cell edges."""

    origin: np.ndarray
    linear: np.ndarray

    def __call__(self, reference_points) -> np.ndarray:
        pts = np.asarray(reference_points, dtype=float)
        return self.origin + pts @ self.linear.T

    @cached_property
    def inverse_linear(self) -> np.ndarray:
        return np.linalg.inv(self.linear)

    @cached_property
    def determinant(self) -> float:
        return float(np.linalg.det(self.linear))

    def pull_to_reference(self, physical_points) -> np.ndarray:
        pts = np.asarray(physical_points, dtype=float)
        return (pts - self.origin) @ self.inverse_linear.T


@dataclass(frozen=True)
class CubicalMesh:
    """Vertices and cells of a conforming parallelotope mesh.

    Validation runs on construction and raises
    :class:`MeshValidationError` with a description of the first problem
    found.
    """

    dimension: int
    vertices: np.ndarray
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != self.dimension:
            raise MeshValidationError(
                f"vertex array must have shape (*, {self.dimension}), "
                f"got {verts.shape}"
            )
        if not np.all(np.isfinite(verts)):
            raise MeshValidationError("vertex coordinates must be finite")
        verts = verts.copy()
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(
            self, "cells", tuple(tuple(int(v) for v in cell) for cell in self.cells)
        )
        self._validate()

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def cell_map(self, index: int) -> AffineMap:
        """Affine map of one cell, from its origin and edge corners."""
        cell = self.cells[index]
        origin = self.vertices[cell[0]]
        linear = np.column_stack(
            [self.vertices[cell[1 << j]] - origin for j in range(self.dimension)]
        )
        return AffineMap(origin=origin, linear=linear)

    # -- validation --------------------------------------------------

    def _validate(self) -> None:
        n = self.dimension
        nv = self.n_vertices
        used: set[int] = set()
        for ci, cell in enumerate(self.cells):
            if len(cell) != 1 << n:
                raise MeshValidationError(
                    f"cell {ci} has {len(cell)} vertices, expected {1 << n} "
                    f"in dimension {n}"
                )
            for v in cell:
                if not 0 <= v < nv:
                    raise MeshValidationError(
                        f"cell {ci} references vertex {v}, valid ids are 0..{nv - 1}"
                    )
            if len(set(cell)) != len(cell):
                raise MeshValidationError(f"cell {ci} repeats a vertex id: {cell}")
            used.update(cell)
        if len(used) != nv:
            dangling = sorted(set(range(nv)) - used)
            raise MeshValidationError(
                f"{len(dangling)} vertex ids are used by no cell "
                f"(first few: {dangling[:5]})"
            )
        self._check_duplicate_vertices()
        for ci in range(self.n_cells):
            self._check_parallelotope(ci)
        self._check_conformity()

    def _check_duplicate_vertices(self) -> None:
        scale = max(1.0, float(np.abs(self.vertices).max(initial=0.0)))
        order = np.lexsort(self.vertices.T[::-1])
        v = self.vertices[order]
        close = np.all(np.abs(np.diff(v, axis=0)) <= SHAPE_TOL * scale, axis=1)
        if np.any(close):
            i = int(np.argmax(close))
            a, b = int(order[i]), int(order[i + 1])
            raise MeshValidationError(
                f"vertices {min(a, b)} and {max(a, b)} coincide at "
                f"{v[i].tolist()}; merge them and share the id"
            )

    def _check_parallelotope(self, index: int) -> None:
        n = self.dimension
        cell = self.cells[index]
        amap = self.cell_map(index)
        scale = max(
            1.0, float(np.linalg.norm(amap.linear, axis=0).max(initial=0.0))
        )
        for corner in range(1 << n):
            predicted = amap(np.array(_corner_shift(corner, n), dtype=float))
            actual = self.vertices[cell[corner]]
            deviation = float(np.linalg.norm(actual - predicted))
            if deviation > SHAPE_TOL * scale * (1 << n):
                raise MeshValidationError(
                    f"cell {index} is not a parallelotope: corner {corner} "
                    f"(vertex {cell[corner]}) deviates by {deviation:.3e} "
                    f"from the affine prediction {predicted.tolist()}"
                )
        if abs(amap.determinant) <= DEGENERACY_TOL * scale**n:
            raise MeshValidationError(
                f"cell {index} is degenerate: edge-matrix determinant "
                f"{amap.determinant:.3e}"
            )

    def _check_conformity(self) -> None:
        incident: dict[int, list[int]] = {}
        for ci, cell in enumerate(self.cells):
            for v in cell:
                incident.setdefault(v, []).append(ci)
        pairs = {
            (a, b)
            for cells in incident.values()
            for a, b in combinations(sorted(set(cells)), 2)
        }
        for a, b in sorted(pairs):
            shared = set(self.cells[a]) & set(self.cells[b])
            for ci in (a, b):
                positions = [
                    pos for pos, v in enumerate(self.cells[ci]) if v in shared
                ]
                if not _is_binary_face(positions):
                    raise MeshValidationError(
                        f"cells {a} and {b} share vertex ids {sorted(shared)} "
                        f"which do not form a whole face of cell {ci}; "
                        "cells must meet along complete shared faces"
                    )


def _is_binary_face(positions: list[int]) -> bool:
    """True iff the corner numbers are exactly those of one cube face."""
    land = positions[0]
    lor = positions[0]
    for c in positions[1:]:
        land &= c
        lor |= c
    free = lor & ~land
    if len(positions) != 1 << free.bit_count():
        return False
    generated = set()
    sub = free
    while True:
        generated.add(land | sub)
        if sub == 0:
            break
        sub = (sub - 1) & free
    return set(positions) == generated


# -- construction and file format ------------------------------------


def structured_mesh(dimension: int, subdivisions: int, shear: float = 0.0) -> CubicalMesh:
    """Uniform m^n grid on the unit cube, optionally sheared.

    A nonzero ``shear`` tilts the grid by adding shear * x_1 to the
    first coordinate of every vertex, turning squares into congruent
    parallelograms (needs dimension >= 2).
    """
    n, m = dimension, subdivisions
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if m < 1:
        raise ValueError(f"need at least one subdivision, got {m}")
    if shear and n < 2:
        raise ValueError("shear needs at least two dimensions")
    shape = (m + 1,) * n
    grid = np.array(list(product(range(m + 1), repeat=n)), dtype=float) / m
    # itertools.product runs the last axis fastest, matching C-order ids
    verts = grid.copy()
    if shear:
        verts[:, 0] += shear * verts[:, 1]
    cells = []
    for base in product(range(m), repeat=n):
        corner_ids = []
        for corner in range(1 << n):
            idx = tuple(b + s for b, s in zip(base, _corner_shift(corner, n)))
            corner_ids.append(int(np.ravel_multi_index(idx, shape)))
        cells.append(tuple(corner_ids))
    return CubicalMesh(n, verts, tuple(cells))


def load_mesh(path) -> CubicalMesh:
    """Read a mesh from JSON: {"dimension", "vertices", "cells"}.

    Cells list vertex ids in binary-corner order, 0-based.
    """
    with open(path) as fh:
        data = json.load(fh)
    try:
        dimension = int(data["dimension"])
        vertices = np.asarray(data["vertices"], dtype=float)
        cells = tuple(tuple(int(v) for v in cell) for cell in data["cells"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshValidationError(f"malformed mesh file {path}: {exc}") from exc
    return CubicalMesh(dimension, vertices, cells)


def save_mesh(mesh: CubicalMesh, path) -> None:
    """Write a mesh as JSON (inverse of :func:`load_mesh`)."""
    data = {
        "dimension": mesh.dimension,
        "vertices": mesh.vertices.tolist(),
        "cells": [list(cell) for cell in mesh.cells],
    }
    with open(path, "w") as fh:
        json.dump(data, fh)
        fh.write("\n")


# -- pushing reference forms through cell maps -----------------------


@dataclass(frozen=True)
class PulledBackForm:
    """A reference-coordinate form expressed in physical coordinates.

    Wraps a polynomial form on the reference cube together with a cell
    map; evaluation pulls physical points back to reference coordinates
    and transforms the covector part with the minors of the inverse
    Jacobian, so the result is the form (phi^-1)^* w with components in
    the ambient coordinate differentials.
    """

    cell_map: AffineMap
    reference: PolyForm

    @property
    def degree(self) -> int:
        return self.reference.degree

    @property
    def dimension(self) -> int:
        return self.reference.dimension

    def evaluate(self, physical_points) -> dict[tuple[int, ...], np.ndarray | float]:
        x = self.cell_map.pull_to_reference(physical_points)
        ref_vals = self.reference.evaluate(x, warn_outside=False)
        b = self.cell_map.inverse_linear
        n, p = self.dimension, self.degree
        out = {}
        for phys_dirs in combinations(range(n), p):
            total = None
            for ref_dirs, vals in ref_vals.items():
                minor = _minor_det(b, ref_dirs, phys_dirs)
                if minor == 0.0:
                    continue
                total = minor * vals if total is None else total + minor * vals
            if total is not None:
                out[phys_dirs] = total
        return out

    def exterior_derivative(self) -> "PulledBackForm":
        # d commutes with pullback, so differentiate on the reference side
        return PulledBackForm(self.cell_map, exterior_derivative(self.reference))


def pullback_basis(cell_map: AffineMap, reference: PolyForm) -> PulledBackForm:
    """Wrap a reference form for evaluation in physical coordinates."""
    return PulledBackForm(cell_map, reference)


def _minor_det(
    matrix: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]
) -> float:
    if not rows:
        return 1.0
    if len(rows) == 1:
        return float(matrix[rows[0], cols[0]])
    return float(np.linalg.det(matrix[np.ix_(rows, cols)]))


# -- refinement ------------------------------------------------------


class CubeOwner(NamedTuple):
    cell: int
    local_index: int
    sign: int


@dataclass
class GlobalCube:
    """One small cube of the refined mesh, shared by its owner cells."""

    index: int
    degree: int
    key: frozenset
    orientation: np.ndarray
    owners: list[CubeOwner] = field(default_factory=list)

    @property
    def representative(self) -> CubeOwner:
        return self.owners[0]


def _global_cube_key(
    cell_vertices: tuple[int, ...], cube: SmallCube, order: int
) -> frozenset:
    """Exact identifier of the cube's physical point set.

    Each corner is keyed by the nonzero integer multilinear weights of
    the cell vertices at that point (denominator k^n implied); on a
    shared face both cells produce identical keys, because the weights
    are intrinsic to the face once the off-face factors collapse to
    powers of k.
    """
    n = cube.dimension
    k = order
    corner_keys = []
    for nums in cube.corner_numerators():
        entries = []
        for corner in range(1 << n):
            w = 1
            for j in range(n):
                w *= nums[j] if (corner >> j) & 1 else k - nums[j]
                if w == 0:
                    break
            if w:
                entries.append((cell_vertices[corner], w))
        corner_keys.append(tuple(sorted(entries)))
    return frozenset(corner_keys)


def _exterior_coordinates(edges: np.ndarray) -> np.ndarray:
    """All p-by-p row minors of an (n, p) edge matrix, rows sorted."""
    n, p = edges.shape
    if p == 0:
        return np.ones(1)
    return np.array(
        [_minor_det(edges, rows, tuple(range(p))) for rows in combinations(range(n), p)]
    )


def _canonical_orientation(edges: np.ndarray) -> np.ndarray:
    """Owner-independent unit orientation vector for a small cube's span.

    Edge vectors are sign-normalised (first significant component made
    positive) and sorted, removing any dependence on the local direction
    order, then wedged and scaled to unit length.  Components below
    1e-9 of the edge length are treated as zero so that both owners of a
    shared cube make identical decisions despite roundoff.
    """
    n, p = edges.shape
    if p == 0:
        return np.ones(1)
    cols = []
    for j in range(p):
        v = edges[:, j].copy()
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise MeshValidationError("small cube has a zero edge vector")
        snapped = np.where(np.abs(v) > 1e-9 * norm, v, 0.0)
        lead = snapped[np.nonzero(snapped)[0]]
        if lead.size == 0:
            raise MeshValidationError("small cube has a vanishing edge vector")
        if lead[0] < 0:
            snapped = -snapped
            v = -v
        cols.append((tuple(snapped), v))
    cols.sort(key=lambda item: item[0])
    wedge = _exterior_coordinates(np.column_stack([v for _, v in cols]))
    norm = float(np.linalg.norm(wedge))
    if norm == 0.0:
        raise MeshValidationError("small cube spans a degenerate plane")
    out = wedge / norm
    out.setflags(write=False)
    return out


@dataclass
class RefinedMesh:
    """Order-k refinement of a mesh: globally numbered small cubes.

    For each requested degree p, ``cubes[p]`` lists the distinct global
    small p-cubes, ``cell_tables[p][c, i]`` the global id of local cube
    i of cell c, and ``cell_signs[p][c, i]`` the sign relating the local
    direction order to the stored global orientation.
    """

    mesh: CubicalMesh
    order: int
    degrees: tuple[int, ...]
    maps: tuple[AffineMap, ...]
    cubes: dict[int, list[GlobalCube]]
    cell_tables: dict[int, np.ndarray]
    cell_signs: dict[int, np.ndarray]
    _coboundaries: dict[int, sparse.csr_matrix] = field(
        default_factory=dict, init=False, repr=False
    )

    @property
    def dimension(self) -> int:
        return self.mesh.dimension

    def count(self, degree: int) -> int:
        """Number of distinct global small cubes of one degree."""
        return len(self._cubes_of(degree))

    def _cubes_of(self, degree: int) -> list[GlobalCube]:
        if degree not in self.cubes:
            raise KeyError(
                f"degree {degree} was not refined; available: {self.degrees}"
            )
        return self.cubes[degree]

    def local_cubes(self, degree: int) -> list[SmallCube]:
        """Reference small cubes of one cell, canonical order."""
        return enumerate_small_cubes(self.dimension, degree, self.order)

    def incidence(self, degree: int) -> list[list[tuple[int, int]]]:
        """Per global (degree+1)-cube: its faces as (global id, sign).

        Signs follow the boundary of the oriented cube: the face fixing
        the j-th spanned direction contributes (-1)^j, positive on the
        far side and negative on the near side, conjugated by the
        relative orientations of cube and face.
        """
        top = self._cubes_of(degree + 1)
        table = self.cell_tables[degree]
        signs = self.cell_signs[degree]
        positions = small_cube_positions(self.dimension, degree, self.order)
        local_top = self.local_cubes(degree + 1)
        out: list[list[tuple[int, int]]] = []
        for gc in top:
            cell, local_index, cube_sign = gc.representative
            sc = local_top[local_index]
            entries: list[tuple[int, int]] = []
            for j, axis in enumerate(sc.directions):
                face_dirs = tuple(d for d in sc.directions if d != axis)
                for side in (0, 1):
                    nums = list(sc.anchor_numerators)
                    nums[axis] += side
                    face = small_cube_from_geometry(self.order, face_dirs, tuple(nums))
                    fi = positions[face.geometry_key()]
                    coeff = (
                        cube_sign
                        * (-1) ** j
                        * (1 if side else -1)
                        * int(signs[cell, fi])
                    )
                    entries.append((int(table[cell, fi]), coeff))
            out.append(entries)
        return out

    def coboundary_matrix(self, degree: int) -> sparse.csr_matrix:
        """Sparse map from p-cochains to (p+1)-cochains, cached.

        Row g lists the boundary faces of global cube g with their
        incidence signs; applying it to a vector of integrals over the
        p-cubes realises the discrete exterior derivative.
        """
        if degree in self._coboundaries:
            return self._coboundaries[degree]
        entries = self.incidence(degree)
        rows, cols, vals = [], [], []
        for g, faces in enumerate(entries):
            for f, coeff in faces:
                rows.append(g)
                cols.append(f)
                vals.append(float(coeff))
        matrix = sparse.csr_matrix(
            (vals, (rows, cols)),
            shape=(self.count(degree + 1), self.count(degree)),
        )
        self._coboundaries[degree] = matrix
        return matrix

    def to_csv(self, path, degree: int) -> None:
        """Debug dump: one line per global cube with owners and anchor."""
        local = self.local_cubes(degree)
        with open(path, "w") as fh:
            fh.write("id,degree,n_owners,first_cell,anchor\n")
            for gc in self._cubes_of(degree):
                cell, li, _ = gc.representative
                anchor = self.maps[cell](
                    np.array([float(a) for a in local[li].anchor])
                )
                coords = " ".join(f"{x:.6g}" for x in anchor)
                fh.write(
                    f"{gc.index},{degree},{len(gc.owners)},{cell},{coords}\n"
                )


def refine(mesh: CubicalMesh, order: int, degrees=None) -> RefinedMesh:
    """Subdivide every cell into its order-k small cubes and glue them.

    ``degrees`` restricts which p-levels are built (default all); the
    coboundary between p and p+1 needs both present.
    """
    n = mesh.dimension
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if degrees is None:
        wanted = tuple(range(n + 1))
    else:
        wanted = tuple(sorted(set(int(p) for p in degrees)))
        if any(not 0 <= p <= n for p in wanted):
            raise ValueError(f"degrees {wanted} outside 0..{n}")
    maps = tuple(mesh.cell_map(i) for i in range(mesh.n_cells))
    cubes: dict[int, list[GlobalCube]] = {}
    tables: dict[int, np.ndarray] = {}
    signs: dict[int, np.ndarray] = {}
    for p in wanted:
        local = enumerate_small_cubes(n, p, order)
        registry: dict[frozenset, GlobalCube] = {}
        ordered: list[GlobalCube] = []
        table = np.empty((mesh.n_cells, len(local)), dtype=np.int64)
        sign = np.empty((mesh.n_cells, len(local)), dtype=np.int8)
        for ci, cell in enumerate(mesh.cells):
            edge_matrix = maps[ci].linear / order
            for li, sc in enumerate(local):
                key = _global_cube_key(cell, sc, order)
                edges = edge_matrix[:, list(sc.directions)]
                gc = registry.get(key)
                if gc is None:
                    gc = GlobalCube(
                        index=len(ordered),
                        degree=p,
                        key=key,
                        orientation=_canonical_orientation(edges),
                    )
                    registry[key] = gc
                    ordered.append(gc)
                if p == 0:
                    s = 1
                else:
                    pl = _exterior_coordinates(edges)
                    dot = float(pl @ gc.orientation)
                    if abs(dot) <= 1e-8 * float(np.linalg.norm(pl)):
                        raise MeshValidationError(
                            f"cells disagree on the span of a shared small "
                            f"cube near cell {ci}"
                        )
                    s = 1 if dot > 0 else -1
                gc.owners.append(CubeOwner(ci, li, s))
                table[ci, li] = gc.index
                sign[ci, li] = s
        cubes[p] = ordered
        table.setflags(write=False)
        sign.setflags(write=False)
        tables[p] = table
        signs[p] = sign
    return RefinedMesh(
        mesh=mesh,
        order=order,
        degrees=wanted,
        maps=maps,
        cubes=cubes,
        cell_tables=tables,
        cell_signs=signs,
    )
