"""Tests for frame geometry, Hermite meshes and the free-DOF map."""

import numpy as np
import pytest

from sensbounds.mesh import (
    FrameGeometry,
    FrameNode,
    MemberDef,
    StiffnessProfile,
    build_frame_mesh,
    gauss_rule,
)


def _portal(n: int, beam_ei_prime: float = 0.0):
    return build_frame_mesh(FrameGeometry.portal(beam_ei_prime=beam_ei_prime), n)


class TestPortalMesh:
    def test_single_division(self):
        mesh = _portal(1)
        assert len(mesh.elements) == 3
        assert mesh.n_free == 3
        assert set(mesh.dof_names) == {"sway", "rotation:B", "rotation:C"}

    def test_joints_share_rotation_dofs(self):
        mesh = _portal(1)
        theta_b = mesh.named_dof("rotation:B")
        ab, bc, _ = mesh.elements
        assert theta_b in ab.dofs
        assert theta_b in bc.dofs

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 50])
    def test_free_dof_count(self, n):
        # interior (w, θ) per member, θ_B, θ_C, sway
        assert _portal(n).n_free == 6 * n - 3

    def test_four_divisions_hand_count(self):
        mesh = _portal(4)
        assert len(mesh.elements) == 12
        assert mesh.n_free == 21

    def test_reference_element_size(self):
        assert _portal(50).h == pytest.approx(1.0 / 50)

    def test_elements_partition_members(self):
        mesh = _portal(5)
        for m, member in enumerate(mesh.members):
            elements = [mesh.elements[i] for i in mesh.elements_of(m)]
            assert elements[0].s_a == 0.0
            assert elements[-1].s_b == pytest.approx(member.length)
            for a, b in zip(elements, elements[1:]):
                assert a.s_b == b.s_a
            assert all(e.length > 0.0 for e in elements)

    def test_supports_carry_no_dofs(self):
        mesh = _portal(2)
        first = mesh.elements[0]
        # local w_a, θ_a at the fixed support A vanish for every DOF vector
        assert np.all(first.transform[:2] == 0.0)

    def test_column_sway_enters_with_normal_sign(self):
        mesh = _portal(1)
        u = mesh.unit_vector("sway")
        local = mesh.elements[0].gather(u)
        # AB runs upward; its left normal is -x, so a +x sway is w = -1 at B
        assert local[2] == pytest.approx(-1.0)

    def test_joint_rotation_is_clockwise_positive(self):
        mesh = _portal(1)
        local = mesh.elements[1].gather(mesh.unit_vector("rotation:B"))
        assert local[1] == pytest.approx(-1.0)


class TestPointDofs:
    def test_interior_node(self):
        mesh = _portal(2)
        g = mesh.point_dof("BC", 0.5, "w")
        assert g.sum() == pytest.approx(1.0)
        assert g[mesh.named_dof("BC:w:1")] == 1.0

    def test_no_node_at_position(self):
        mesh = _portal(2)
        with pytest.raises(ValueError, match="No mesh node"):
            mesh.point_dof("BC", 0.3, "w")

    def test_unknown_component(self):
        with pytest.raises(ValueError, match="component"):
            _portal(2).point_dof("BC", 0.5, "u")

    def test_unknown_dof(self):
        with pytest.raises(KeyError, match="not in mesh"):
            _portal(2).named_dof("rotation:Z")


class TestGeometryValidation:
    def test_zero_length_member(self):
        nodes = (FrameNode("A", 0.0, 0.0), FrameNode("B", 0.0, 0.0))
        members = (MemberDef("AB", "A", "B", StiffnessProfile.constant(1.0)),)
        with pytest.raises(ValueError, match="zero length"):
            FrameGeometry(nodes=nodes, members=members)

    def test_axial_rigidity(self):
        nodes = (
            FrameNode("A", 0.0, 0.0, translation=(("u", 1.0, 0.0),)),
            FrameNode("B", 1.0, 0.0),
        )
        members = (MemberDef("AB", "A", "B", StiffnessProfile.constant(1.0)),)
        with pytest.raises(ValueError, match="axial rigidity"):
            FrameGeometry(nodes=nodes, members=members)

    def test_unknown_node(self):
        nodes = (FrameNode("A", 0.0, 0.0),)
        members = (MemberDef("AB", "A", "B", StiffnessProfile.constant(1.0)),)
        with pytest.raises(ValueError, match="unknown node"):
            FrameGeometry(nodes=nodes, members=members)

    def test_divisions_must_be_positive(self):
        with pytest.raises(ValueError, match="n_per_member"):
            build_frame_mesh(FrameGeometry.portal(), 0)

    def test_clamped_beam_dofs(self):
        mesh = build_frame_mesh(FrameGeometry.clamped_beam(), 4)
        assert mesh.n_free == 6


class TestStiffnessProfile:
    def test_tapered_column(self):
        profile = StiffnessProfile.tapered(2.0, 1.0)
        assert profile.value(0.0) == pytest.approx(2.0)
        assert profile.value(1.0) == pytest.approx(8.0)
        assert not profile.has_derivative

    def test_local_shift(self):
        profile = StiffnessProfile.tapered(1.0, 1.0)
        ei, _ = profile.local(0.5)
        assert np.polynomial.polynomial.polyval(0.25, ei) == pytest.approx(
            float(profile.value(0.75))
        )

    def test_constant_profile_needs_polynomial_rule_only(self):
        profile = StiffnessProfile.constant(1.0, 1.0)
        assert profile.rule_order(0.0, 0.5, degree=6) == 4

    def test_rational_integrand_needs_more_points(self):
        profile = StiffnessProfile.tapered(1.0, 1.0)
        assert profile.rule_order(0.0, 0.5, degree=6) > 4

    def test_rule_is_accurate_for_inverse_stiffness(self):
        profile = StiffnessProfile.tapered(1.0, 1.0)
        order = profile.rule_order(0.0, 1.0, degree=0)
        x, w = gauss_rule(order).on_interval(0.0, 1.0)
        # ∫₀¹ (1+s)^-2 ds = 1/2
        assert float(w @ (1.0 / profile.value(x))) == pytest.approx(0.5, rel=1e-13)
