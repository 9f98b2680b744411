"""Tests for uniform quadrilateral meshes."""

import numpy as np
import pytest

from sensbounds.mesh import Box, build_quad_mesh


class TestBuildQuadMesh:
    def test_smallest_mesh(self):
        mesh = build_quad_mesh(2)
        assert mesh.n_nodes == 9
        assert mesh.n_cells == 4
        assert mesh.n_free == 9
        assert mesh.h == 0.5

    def test_reference_mesh_size(self):
        assert build_quad_mesh(128).h == pytest.approx(1.0 / 128)

    @pytest.mark.parametrize("n", [0, 1, 3, 6, 12])
    def test_rejects_non_power_of_two(self, n):
        with pytest.raises(ValueError, match="power of two"):
            build_quad_mesh(n)

    def test_cells_are_counterclockwise(self):
        mesh = build_quad_mesh(4)
        nodes = mesh.nodes
        for cell in mesh.cells:
            p = nodes[cell]
            # shoelace area of a CCW square is +h²
            x, y = p[:, 0], p[:, 1]
            area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
            assert area == pytest.approx(mesh.h**2)

    def test_cell_areas_sum_to_one(self):
        mesh = build_quad_mesh(8)
        assert mesh.n_cells * mesh.h**2 == pytest.approx(1.0)

    def test_cell_origins_are_first_corners(self):
        mesh = build_quad_mesh(4)
        np.testing.assert_allclose(mesh.cell_origins, mesh.nodes[mesh.cells[:, 0]])


class TestEdges:
    def test_edge_count(self):
        mesh = build_quad_mesh(4)
        assert mesh.n_edges == 40
        assert mesh.edge_nodes.shape == (40, 2)

    def test_boundary_edges(self):
        mesh = build_quad_mesh(4)
        assert mesh.boundary_edges.sum() == 16

    def test_every_interior_edge_shared_by_two_cells(self):
        mesh = build_quad_mesh(4)
        counts = np.bincount(mesh.cell_edges.ravel(), minlength=mesh.n_edges)
        assert np.all(counts[mesh.boundary_edges] == 1)
        assert np.all(counts[~mesh.boundary_edges] == 2)

    def test_cell_edges_match_cell_corners(self):
        mesh = build_quad_mesh(4)
        for cell, edges in zip(mesh.cells, mesh.cell_edges):
            left, right, bottom, top = (set(mesh.edge_nodes[e]) for e in edges)
            assert left == {cell[0], cell[3]}
            assert right == {cell[1], cell[2]}
            assert bottom == {cell[0], cell[1]}
            assert top == {cell[3], cell[2]}


class TestAlignedRegions:
    def test_load_region_is_central_block(self):
        mesh = build_quad_mesh(8)
        cells = mesh.cells_in(Box.centered(0.5, 0.5, 0.125))
        assert sorted(cells.tolist()) == [27, 28, 35, 36]

    def test_edges_on_box(self):
        mesh = build_quad_mesh(8)
        box = Box(0.5, 0.625, 0.5, 0.625)
        edges = mesh.edges_on(box)
        assert len(edges) == 4
        assert not np.any(mesh.boundary_edges[edges])

    def test_misaligned_box_rejected(self):
        mesh = build_quad_mesh(4)
        with pytest.raises(ValueError, match="mesh-aligned"):
            mesh.cells_in(Box(0.1, 0.5, 0.0, 0.5))

    def test_degenerate_box(self):
        with pytest.raises(ValueError, match="Degenerate"):
            Box(0.5, 0.5, 0.0, 1.0)
