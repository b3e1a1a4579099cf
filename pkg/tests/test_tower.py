"""Tower construction: Morse data, derived spaces, termination, declarations."""

from __future__ import annotations

from fractions import Fraction

import pytest

import flowcat as fc
from flowcat.tower import product_critical


def _morse(tower: fc.Tower, level: int, space_key: str) -> dict[str, fc.MorseEntry]:
    sp = tower.space(level, space_key)
    return {fc.point_key(e.point): e for e in sp.morse}


class TestDeformedLevelOne:
    def test_space_keys(self, deformed_tower):
        assert [sp.key for sp in deformed_tower.spaces(1)] == [
            "M(x>w)",
            "M(x>y)",
            "M(y>w)",
            "M(z>w)",
            "M(z>y)",
        ]

    def test_point_component_values_are_slot_plus_tag(self, deformed_tower):
        assert _morse(deformed_tower, 1, "M(x>y)")["x/y:c0"].value == Fraction(65, 16)
        assert _morse(deformed_tower, 1, "M(z>y)")["z/y:c0"].value == Fraction(161, 32)
        yw = _morse(deformed_tower, 1, "M(y>w)")
        assert yw["y/w:a"].value == Fraction(9, 4)
        assert yw["y/w:b"].value == Fraction(17, 8)
        assert {e.role for e in yw.values()} == {"point"}

    def test_values_on_upstream_spaces_dominate_downstream(self, deformed_tower):
        up = min(e.value for e in _morse(deformed_tower, 1, "M(x>y)").values())
        down = max(e.value for e in _morse(deformed_tower, 1, "M(y>w)").values())
        assert up > down > 0

    def test_interval_end_entries(self, deformed_tower):
        xw = _morse(deformed_tower, 1, "M(x>w)")
        hi = xw["(x/y:c0,y/w:a)"]
        lo = xw["(x/y:c0,y/w:b)"]
        assert (hi.role, lo.role) == ("end_max", "end_min")
        assert (hi.index, lo.index) == (1, 0)
        assert hi.value == Fraction(65, 16) + Fraction(9, 4) == Fraction(101, 16)
        assert lo.value == Fraction(65, 16) + Fraction(17, 8) == Fraction(99, 16)
        zw = _morse(deformed_tower, 1, "M(z>w)")
        assert zw["(z/y:c0,y/w:a)"].value == Fraction(233, 32)
        assert zw["(z/y:c0,y/w:b)"].value == Fraction(229, 32)

    def test_all_values_within_a_level_are_distinct(self, deformed_tower):
        for level in range(1, deformed_tower.max_level + 1):
            live = [
                e.value
                for sp in deformed_tower.spaces(level)
                for e in sp.morse
                if e.role != "stationary"
            ]
            assert len(live) == len(set(live))


class TestDeformedHigherLevels:
    def test_level_two_spaces(self, deformed_tower):
        keys = [sp.key for sp in deformed_tower.spaces(2)]
        assert keys == [
            "M((x/y:c0,y/w:a)>(x/y:c0,y/w:b)|x>w)",
            "M((z/y:c0,y/w:a)>(z/y:c0,y/w:b)|z>w)",
            "M(x/y:c0>x/y:c0|x>y)",
            "M(y/w:a>y/w:a|y>w)",
            "M(y/w:b>y/w:b|y>w)",
            "M(z/y:c0>z/y:c0|z>y)",
        ]
        stat = [sp.stationary for sp in deformed_tower.spaces(2)]
        assert stat == [False, False, True, True, True, True]

    def test_derived_point_spaces_are_singletons(self, deformed_tower):
        p = _morse(deformed_tower, 2, "M((x/y:c0,y/w:a)>(x/y:c0,y/w:b)|x>w)")
        q = _morse(deformed_tower, 2, "M((z/y:c0,y/w:a)>(z/y:c0,y/w:b)|z>w)")
        assert len(p) == 1 and len(q) == 1
        (pe,) = p.values()
        (qe,) = q.values()
        assert pe.value == Fraction(5, 4) and pe.index == 0 and pe.role == "point"
        assert qe.value == Fraction(17, 8) and qe.index == 0 and qe.role == "point"

    def test_stationary_tails_have_zero_value(self, deformed_tower):
        for sp in deformed_tower.spaces(3):
            assert sp.stationary
            for e in sp.morse:
                assert e.role == "stationary"
                assert e.value == 0 and e.index == 0

    def test_tower_terminates_once_all_spaces_are_stationary(self, deformed_tower):
        assert deformed_tower.max_level == 3
        assert deformed_tower.complete
        assert all(sp.stationary for sp in deformed_tower.spaces(3))
        with pytest.raises(ValueError):
            deformed_tower.spaces(4)

    def test_derived_table_links_parent_entries(self, deformed_tower):
        sp = deformed_tower.space(1, "M(x>w)")
        assert len(sp.derived) == 1
        src, tgt, comps = sp.derived[0]
        assert src == "(x/y:c0,y/w:a)" and tgt == "(x/y:c0,y/w:b)"
        assert [c.dim for c in comps] == [0]


class TestProductCritical:
    def test_value_and_index_add_over_live_factors(self, deformed_tower):
        up = _morse(deformed_tower, 1, "M(x>y)")["x/y:c0"]
        down = _morse(deformed_tower, 1, "M(y>w)")["y/w:a"]
        got = product_critical([up, down])
        assert got.value == up.value + down.value == Fraction(101, 16)
        assert got.index == up.index + down.index == 0
        assert got.role == "corner"
        assert fc.point_key(got.point) == "(x/y:c0,y/w:a)"

    def test_stationary_factors_are_absorbed(self, deformed_tower):
        live = _morse(deformed_tower, 1, "M(x>y)")["x/y:c0"]
        tail = next(iter(deformed_tower.space(2, "M(x/y:c0>x/y:c0|x>y)").morse))
        assert tail.role == "stationary"
        assert product_critical([tail, live]) == live
        assert product_critical([live]) == live
        assert product_critical([tail]) == tail
        with pytest.raises(ValueError):
            product_critical([])


class TestSphereTowers:
    def test_sphere_one(self, sphere_towers):
        t = sphere_towers[1]
        assert t.max_level == 2 and t.complete
        entries = _morse(t, 1, "M(N>S)")
        assert entries["N/S:c0"].value == Fraction(5, 4)
        assert entries["N/S:c1"].value == Fraction(9, 8)
        assert {e.role for e in entries.values()} == {"point"}
        assert all(sp.stationary for sp in t.spaces(2))

    def test_sphere_two_declared_points(self, sphere_towers):
        t = sphere_towers[2]
        entries = _morse(t, 1, "M(N>S)")
        assert entries["hi1"].index == 1 and entries["hi1"].value == Fraction(13, 4)
        assert entries["lo1"].index == 0 and entries["lo1"].value == Fraction(17, 8)
        assert {e.role for e in entries.values()} == {"declared"}
        circle = _morse(t, 2, "M(hi1>lo1|N>S)")
        assert circle["hi1/lo1:0"].value == Fraction(5, 4)
        assert circle["hi1/lo1:1"].value == Fraction(9, 8)

    def test_sphere_three_iterates_three_nontrivial_levels(self, sphere_towers):
        t = sphere_towers[3]
        assert t.max_level == 4 and t.complete
        assert [sp.key for sp in t.spaces(2)] == ["M(hi1>lo1|N>S)"]
        assert [sp.key for sp in t.spaces(3)] == ["M(hi2>lo2|hi1>lo1;N>S)"]
        assert all(sp.stationary for sp in t.spaces(4))
        nontrivial = [
            lv
            for lv in range(1, t.max_level + 1)
            if any(not sp.stationary for sp in t.spaces(lv))
        ]
        base_dim = max(fc.moduli_dimension(t.base, s, x) for s, x, _ in t.base.pairs)
        assert len(nontrivial) <= base_dim + 1


class TestBuildControls:
    def test_max_level_truncation(self, deformed_fs):
        t = fc.build_tower(deformed_fs, max_level=1)
        assert t.max_level == 1
        assert not t.complete
        assert [sp.key for sp in t.spaces(1)] == [
            "M(x>w)",
            "M(x>y)",
            "M(y>w)",
            "M(z>w)",
            "M(z>y)",
        ]

    def test_invalid_system_is_rejected_up_front(self):
        bad = fc.flow_system(
            [("x", 2), ("m", 1), ("y", 0)],
            {("x", "m"): [("c0", fc.POINT, ())], ("m", "y"): [("c0", fc.POINT, ())]},
        )
        with pytest.raises(fc.InvalidFlowSystemError):
            fc.build_tower(bad)

    def test_closed_component_requires_declaration(self):
        fs, _ = fc.sphere_system(2)
        with pytest.raises(fc.MissingDeclarationError):
            fc.build_tower(fs)

    def test_declarations_lookup_and_rebuild(self):
        fs, decls = fc.sphere_system(2)
        assert decls.get("M(N>S)", "c0") is not None
        assert decls.get("M(N>S)", "ghost") is None
        assert decls.get("M(no>pe)", "c0") is None
        rebuilt = fc.Declarations.build(
            {(a, c): d for a, c, d in decls.entries}
        )
        assert rebuilt == decls
