"""Shapes, flow systems, the validator, and base-level boundary strata."""

from __future__ import annotations

import dataclasses
from fractions import Fraction

import pytest

import flowcat as fc


def _codes(fs: fc.FlowSystem) -> set[str]:
    return {v.code for v in fc.validate_flow_system(fs)}


def _swap_xw(fs: fc.FlowSystem, *comps: fc.Component) -> fc.FlowSystem:
    pairs = tuple(
        (s, t, tuple(comps) if (s, t) == ("x", "w") else cs) for s, t, cs in fs.pairs
    )
    return dataclasses.replace(fs, pairs=pairs)


class TestShapes:
    def test_labels_round_trip(self):
        for shape in (fc.POINT, fc.INTERVAL, fc.CIRCLE, fc.sphere_like(2), fc.sphere_like(5)):
            assert fc.parse_shape(fc.shape_label(shape)) == shape

    def test_dims_and_closedness(self):
        assert (fc.POINT.dim, fc.INTERVAL.dim, fc.CIRCLE.dim) == (0, 1, 1)
        assert fc.sphere_like(2).dim == 2
        assert fc.POINT.closed and fc.CIRCLE.closed and fc.sphere_like(3).closed
        assert not fc.INTERVAL.closed

    def test_low_dimensional_spheres_have_dedicated_shapes(self):
        with pytest.raises(ValueError):
            fc.sphere_like(1)
        with pytest.raises(ValueError):
            fc.sphere_like(0)

    def test_parse_rejects_unknown_label(self):
        with pytest.raises(ValueError):
            fc.parse_shape("Blob")

    def test_piece_refs_order_lexicographically(self):
        a = fc.PieceRef("x", "y", "c0")
        b = fc.PieceRef("x", "y", "c1")
        c = fc.PieceRef("y", "w", "a")
        assert sorted([c, b, a]) == [a, b, c]


class TestFlowSystem:
    def test_deformed_base_values_are_rank_plus_tag(self, deformed_fs):
        values = {p.id: p.value for p in deformed_fs.points}
        assert values == {
            "w": Fraction(3, 2),
            "y": Fraction(9, 4),
            "x": Fraction(25, 8),
            "z": Fraction(49, 16),
        }

    def test_values_strictly_drop_along_every_edge(self, deformed_fs):
        for s, t, _ in deformed_fs.pairs:
            assert deformed_fs.point(s).value > deformed_fs.point(t).value > 0

    def test_lookup_helpers(self, deformed_fs):
        assert deformed_fs.has_point("y")
        assert not deformed_fs.has_point("nope")
        assert deformed_fs.point("x").index == 2
        assert deformed_fs.successors("x") == ("w", "y")
        assert deformed_fs.max_index == 2
        assert [c.id for c in deformed_fs.components("y", "w")] == ["a", "b"]
        assert deformed_fs.components("w", "x") == ()

    def test_moduli_dimension_is_index_gap_minus_one(self, deformed_fs):
        assert fc.moduli_dimension(deformed_fs, "x", "w") == 1
        assert fc.moduli_dimension(deformed_fs, "x", "y") == 0
        assert fc.moduli_dimension(deformed_fs, "z", "y") == 0


class TestValidatorAcceptsCorpus:
    def test_deformed_and_spheres_validate(self, deformed_fs):
        assert fc.validate_flow_system(deformed_fs) == ()
        for n in (1, 2, 3):
            fs, _ = fc.sphere_system(n)
            assert fc.validate_flow_system(fs) == ()


class TestValidatorViolations:
    def test_dup_point(self):
        assert "dup-point" in _codes(fc.flow_system([("a", 1), ("a", 0)], {}))

    def test_bad_id(self):
        assert _codes(fc.flow_system([("a b", 1), ("w", 0)], {})) == {"bad-id"}

    def test_negative_index_is_unrepresentable(self):
        # CritPoint refuses to hold a negative index, so the system can never
        # reach the validator; the constructor raises instead.
        with pytest.raises(ValueError):
            fc.flow_system([("a", -1)], {})

    def test_dup_pair(self, deformed_fs):
        pairs = deformed_fs.pairs + (deformed_fs.pairs[1],)
        assert "dup-pair" in _codes(dataclasses.replace(deformed_fs, pairs=pairs))

    def test_unknown_point(self, deformed_fs):
        points = tuple(p for p in deformed_fs.points if p.id != "z")
        assert "unknown-point" in _codes(
            dataclasses.replace(deformed_fs, points=points)
        )

    def test_self_pair(self, deformed_fs):
        comps = deformed_fs.components("x", "y")
        pairs = deformed_fs.pairs + (("x", "x", comps),)
        assert "self-pair" in _codes(dataclasses.replace(deformed_fs, pairs=pairs))

    def test_index_order(self):
        bad = fc.flow_system(
            [("x", 2), ("y", 1)], {("y", "x"): [("c0", fc.POINT, ())]}
        )
        assert _codes(bad) == {"index-order"}

    def test_dup_component(self, deformed_fs):
        c = deformed_fs.components("x", "w")[0]
        assert "dup-component" in _codes(_swap_xw(deformed_fs, c, c))

    def test_dimension(self):
        bad = fc.flow_system(
            [("x", 2), ("m", 1), ("y", 0)],
            {
                ("x", "m"): [("c0", fc.POINT, ())],
                ("m", "y"): [("c0", fc.POINT, ())],
                ("x", "y"): [("flat", fc.POINT, ())],
            },
        )
        assert "dimension" in _codes(bad)

    def test_closed_boundary(self, deformed_fs):
        c = dataclasses.replace(deformed_fs.components("x", "w")[0], shape=fc.CIRCLE)
        assert "closed-boundary" in _codes(_swap_xw(deformed_fs, c))

    def test_interval_needs_two_distinct_ends(self, deformed_fs):
        c = deformed_fs.components("x", "w")[0]
        assert "interval-ends" in _codes(
            _swap_xw(deformed_fs, dataclasses.replace(c, boundary=()))
        )
        b0 = c.boundary[0]
        assert "interval-ends" in _codes(
            _swap_xw(deformed_fs, dataclasses.replace(c, boundary=(b0, b0)))
        )

    def test_endpoint_shape(self, deformed_fs):
        c = deformed_fs.components("x", "w")[0]
        b0, b1 = c.boundary
        bad = dataclasses.replace(c, boundary=((b0[0],), b1))
        assert "endpoint-shape" in _codes(_swap_xw(deformed_fs, bad))

    def test_endpoint_chain(self, deformed_fs):
        c = deformed_fs.components("x", "w")[0]
        b0, b1 = c.boundary
        broken = (fc.PieceRef("x", "y", "c0"), fc.PieceRef("z", "y", "c0"))
        bad = dataclasses.replace(c, boundary=(b0, broken))
        assert "endpoint-chain" in _codes(_swap_xw(deformed_fs, bad))

    def test_endpoint_ref(self, deformed_fs):
        c = deformed_fs.components("x", "w")[0]
        b0, b1 = c.boundary
        missing = (fc.PieceRef("x", "y", "ghost"), fc.PieceRef("y", "w", "a"))
        bad = dataclasses.replace(c, boundary=(b0, missing))
        assert "endpoint-ref" in _codes(_swap_xw(deformed_fs, bad))

    def test_endpoint_dim_and_phantom(self, deformed_fs):
        c = deformed_fs.components("x", "w")[0]
        b0, _ = c.boundary
        ghost = (fc.PieceRef("x", "z", "ghost"), fc.PieceRef("z", "w", "c0"))
        bad = dataclasses.replace(c, boundary=(b0, ghost))
        codes = _codes(_swap_xw(deformed_fs, bad))
        assert "phantom-endpoint" in codes
        assert "endpoint-dim" in codes

    def test_missing_space(self):
        bad = fc.flow_system(
            [("x", 2), ("m", 1), ("y", 0)],
            {("x", "m"): [("c0", fc.POINT, ())], ("m", "y"): [("c0", fc.POINT, ())]},
        )
        assert _codes(bad) == {"missing-space"}

    def test_uncovered_breaking(self):
        bad = fc.flow_system(
            [("x", 2), ("m", 1), ("y", 0)],
            {
                ("x", "m"): [("c0", fc.POINT, ())],
                ("m", "y"): [
                    ("a", fc.POINT, ()),
                    ("b", fc.POINT, ()),
                    ("c", fc.POINT, ()),
                ],
                ("x", "y"): [
                    (
                        "j",
                        fc.INTERVAL,
                        (
                            (fc.PieceRef("x", "m", "c0"), fc.PieceRef("m", "y", "a")),
                            (fc.PieceRef("x", "m", "c0"), fc.PieceRef("m", "y", "b")),
                        ),
                    )
                ],
            },
        )
        assert _codes(bad) == {"uncovered-breaking"}

    def test_reused_breaking(self, deformed_fs):
        c = deformed_fs.components("x", "w")[0]
        twin = dataclasses.replace(c, id="c1")
        assert "reused-breaking" in _codes(_swap_xw(deformed_fs, c, twin))

    def test_violation_messages_name_subjects(self, deformed_fs):
        points = tuple(p for p in deformed_fs.points if p.id != "z")
        got = fc.validate_flow_system(dataclasses.replace(deformed_fs, points=points))
        assert all(v.subjects for v in got)
        assert any("z" in v.message for v in got)


class TestBoundaryStrata:
    def test_deformed_interval_breaks_once_through_y(self, deformed_fs):
        st = fc.boundary_strata(deformed_fs, "x", "w")
        assert [(s.depth, s.dim) for s in st.strata] == [(0, 1), (1, 0), (1, 0)]
        top = st.strata[0]
        assert top.intermediates == ()
        assert top.factors == (fc.PieceRef("x", "w", "c0"),)
        for s in st.strata[1:]:
            assert s.intermediates == ("y",)
            assert [f.source for f in s.factors] == ["x", "y"]
            assert [f.target for f in s.factors] == ["y", "w"]
        assert st.closure == ((1, 0), (2, 0))

    def test_closure_pairs_point_from_deeper_to_shallower(self, deformed_fs):
        for s, t, _ in deformed_fs.pairs:
            st = fc.boundary_strata(deformed_fs, s, t)
            for i, j in st.closure:
                assert st.strata[i].depth > st.strata[j].depth
                mids_j = set(st.strata[j].intermediates)
                mids_i = set(st.strata[i].intermediates)
                assert mids_j < mids_i

    def test_point_pair_has_single_zero_stratum_per_component(self, deformed_fs):
        st = fc.boundary_strata(deformed_fs, "y", "w")
        assert [(s.depth, s.dim) for s in st.strata] == [(0, 0), (0, 0)]
        assert st.closure == ()
