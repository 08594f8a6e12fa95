"""Cube engine: structure building, view operations, materialization."""

import random

import pytest

from corpus import derived3_log, random_log, random_structure, random_view, table1_log, ts
from oracles import brute_force_materialize, materialized_as_dict
from occube.cube import (
    Cell,
    CubeView,
    Dimension,
    build_structure,
    cell_sublog,
    change_granularity,
    check_compatible,
    check_view,
    default_view,
    dice,
    materialize,
    slice as cube_slice,
)
from occube.errors import CubeError
from occube.model import ValueSet, ValueSetCollection, validate_log


class TestBuildStructure:
    def test_activity_domain_from_table1(self):
        s = build_structure(table1_log(), ["activity"])
        assert s.val("activity") == {
            "create purchase order",
            "post document",
            "enter incoming invoice",
            "park invoice",
        }

    def test_year_granularity_buckets(self):
        s = build_structure(table1_log(), ["timestamp"])
        years = s.level("timestamp", "year")
        assert [m.label for m in years] == ["2000", "2020"]
        assert s.default_levels["timestamp"] == "year"
        months = s.level("timestamp", "month")
        assert [m.label for m in months] == ["2000-01", "2020-05"]

    def test_singleton_granularity_single_event(self):
        log = derived3_log().restrict({"e1"})
        s = build_structure(log, ["activity"])
        assert [m.label for m in s.level("activity", "values")] == ["A"]
        assert s.gran("activity")[0].values == frozenset({"A"})

    def test_object_type_dimension_domain(self):
        s = build_structure(derived3_log(), ["item"])
        assert s.val("item") == {"i1", "i2", "i3"}

    def test_unknown_dimension(self):
        with pytest.raises(CubeError) as err:
            build_structure(table1_log(), ["price"])
        assert err.value.code == "unknown-dimension-name"

    def test_val_is_union_of_gran(self):
        rng = random.Random(5)
        for _ in range(15):
            log = random_log(rng, max_events=25)
            s = random_structure(rng, log)
            if s is None:
                continue
            for d in s.dimension_names:
                union = set()
                for m in s.gran(d):
                    union |= m.values
                assert frozenset(union) == s.val(d)

    def test_explicit_level_must_cover(self):
        with pytest.raises(CubeError) as err:
            build_structure(
                derived3_log(),
                ["item"],
                {"item": {"half": [("low", ["i1"])]}},
            )
        assert err.value.code == "granularity-not-covering"


class TestCompatibility:
    def test_own_structure_is_compatible(self):
        log = table1_log()
        s = build_structure(log, ["activity", "item"])
        assert check_compatible(s, log) == ()

    def test_subset_log_fits_larger_domain(self):
        log = table1_log()
        s = build_structure(log, ["item"])
        smaller = log.restrict({"0002", "17500"})
        assert check_compatible(s, smaller) == ()

    def test_domain_omitting_i3_flags_event_0001(self):
        log = table1_log()
        # built against a smaller log, then checked against the full one
        sub = log.restrict({"17499"})
        s = build_structure(sub, ["item"])
        issues = check_compatible(s, log)
        assert any(i.rule == "objects-outside-domain" and i.event_id == "0001" for i in issues)

    def test_dimension_unknown(self):
        log = derived3_log()
        s = build_structure(log, ["activity"])
        bigger = build_structure(table1_log(), ["resource"])
        issues = check_compatible(bigger, log)
        assert [i.rule for i in issues] == ["dimension-unknown"]


class TestViewOps:
    def setup_method(self):
        self.log = derived3_log()
        self.structure = build_structure(self.log, ["activity", "item", "timestamp"])
        self.view = default_view(self.structure)

    def test_default_view_selects_everything(self):
        assert self.view.selected == ("activity", "item", "timestamp")
        assert self.view.sel["activity"] == self.structure.level("activity", "values")
        assert self.view.sel["timestamp"] == self.structure.level("timestamp", "year")

    def test_slice_removes_dimension_and_pins_value(self):
        v = cube_slice(self.view, "item", "i1")
        assert v.selected == ("activity", "timestamp")
        assert [m.label for m in v.sel["item"]] == ["i1"]
        # original untouched
        assert self.view.selected == ("activity", "item", "timestamp")

    def test_slice_errors(self):
        v = cube_slice(self.view, "item", "i1")
        with pytest.raises(CubeError) as err:
            cube_slice(v, "item", "i1")
        assert err.value.code == "dimension-not-selected"
        with pytest.raises(CubeError) as err:
            cube_slice(self.view, "activity", "Z")
        assert err.value.code == "value-set-not-in-selection"

    def test_slice_to_empty_selection(self):
        v = self.view
        for d in list(v.selected):
            v = cube_slice(v, d, list(v.sel[d])[0])
        assert v.selected == ()
        m = materialize(v, self.structure, self.log)
        assert len(m) == 1

    def test_dice_restricts_without_removing(self):
        v = dice(self.view, {"item": ["i1", "i2"]})
        assert v.selected == self.view.selected
        assert [m.label for m in v.sel["item"]] == ["i1", "i2"]

    def test_identity_dice(self):
        v = dice(self.view, {"item": list(self.view.sel["item"])})
        assert v == self.view

    def test_dice_twice_equals_nested_filter(self):
        v1 = dice(self.view, {"item": ["i1", "i2"]})
        v2 = dice(v1, {"item": ["i2"]})
        direct = dice(self.view, {"item": ["i2"]})
        assert v2 == direct

    def test_dice_errors(self):
        with pytest.raises(CubeError) as err:
            dice(self.view, {"item": ["nope"]})
        assert err.value.code == "filter-outside-selection"
        sliced = cube_slice(self.view, "item", "i1")
        with pytest.raises(CubeError) as err:
            dice(sliced, {"item": ["i1"]})
        assert err.value.code == "filter-on-hidden-dimension"
        diced = dice(self.view, {"item": ["i1"]})
        with pytest.raises(CubeError) as err:
            dice(diced, {"item": ["i2"]})
        assert err.value.code == "filter-outside-selection"

    def test_change_granularity_identity(self):
        v = change_granularity(self.view, "timestamp", "year", self.structure)
        assert v == self.view

    def test_drill_down_then_roll_up(self):
        fine = change_granularity(self.view, "timestamp", "month", self.structure)
        assert fine != self.view
        back = change_granularity(fine, "timestamp", "year", self.structure)
        assert back == self.view

    def test_change_granularity_errors(self):
        foreign = ValueSet.of(["i1", "i9"], label="zzz")
        with pytest.raises(CubeError) as err:
            change_granularity(self.view, "item", [foreign], self.structure)
        assert err.value.code == "granularity-not-in-structure"

    def test_change_granularity_coverage_mismatch_after_dice(self):
        log = table1_log()  # spans 2000 and 2020
        s = build_structure(log, ["timestamp"])
        v = dice(default_view(s), {"timestamp": ["2000"]})
        with pytest.raises(CubeError) as err:
            change_granularity(v, "timestamp", "year", s)
        assert err.value.code == "coverage-mismatch"

    def test_drill_down_diced_year_to_its_months(self):
        log = table1_log()
        s = build_structure(log, ["timestamp"])
        v = dice(default_view(s), {"timestamp": ["2000"]})
        months = [m for m in s.level("timestamp", "month") if m.label.startswith("2000")]
        fine = change_granularity(v, "timestamp", months, s)
        assert [m.label for m in fine.sel["timestamp"]] == ["2000-01"]
        back = change_granularity(fine, "timestamp", [v.sel["timestamp"][0]], s)
        assert back == v

    def test_antichain_enforced(self):
        a = ValueSet.of(["x"], label="a")
        ab = ValueSet.of(["x", "y"], label="ab")
        with pytest.raises(CubeError) as err:
            CubeView(("d",), {"d": ValueSetCollection([a, ab])})
        assert err.value.code == "view-invariant-violation"


class TestMaterialize:
    def test_derived_example_item_cells(self):
        log = derived3_log()
        s = build_structure(log, ["item"])
        m = materialize(default_view(s), s, log)
        got = {cell.labels()["item"]: ids for cell, ids in m}
        assert got == {"i1": ("e1", "e2"), "i2": ("e1",), "i3": ("e3",)}

    def test_sliced_view_filters_hidden_dimension(self):
        log = derived3_log()
        s = build_structure(log, ["activity", "item"])
        v = cube_slice(default_view(s), "item", "i1")
        m = materialize(v, s, log)
        got = {cell.labels()["activity"]: ids for cell, ids in m}
        # hidden item filter keeps only events whose item set is within {i1}
        assert got == {"A": (), "B": ("e2",)}

    def test_empty_selection_single_global_cell(self):
        log = derived3_log()
        s = build_structure(log, ["order"])
        v = cube_slice(default_view(s), "order", "o1")
        m = materialize(v, s, log)
        assert len(m) == 1
        cell, ids = m.entries[0]
        assert cell.coords == ()
        assert ids == ("e1", "e2")

    def test_dense_includes_empty_cells(self):
        log = derived3_log()
        s = build_structure(log, ["activity", "order"])
        m = materialize(default_view(s), s, log)
        assert len(m) == 4  # 2 activities x 2 orders
        sparse = materialize(default_view(s), s, log, include_empty=False)
        assert len(sparse) == 3
        assert sparse.cell_space == 4

    def test_cell_count_is_product_of_selection_sizes(self):
        rng = random.Random(23)
        for _ in range(10):
            log = random_log(rng, max_events=20)
            s = random_structure(rng, log)
            if s is None:
                continue
            v = random_view(rng, s)
            m = materialize(v, s, log)
            expected = 1
            for d in v.selected:
                expected *= len(v.sel[d])
            assert len(m) == expected == m.cell_space

    def test_matches_brute_force_oracle(self):
        rng = random.Random(99)
        checked = 0
        while checked < 60:
            log = random_log(rng, max_events=30)
            s = random_structure(rng, log)
            if s is None:
                continue
            v = random_view(rng, s)
            expected = brute_force_materialize(v, s, log)
            for engine in ("py", "c"):
                got = materialized_as_dict(materialize(v, s, log, engine=engine))
                assert got == expected
            checked += 1

    def test_workers_deterministic(self):
        rng = random.Random(4)
        log = random_log(rng, max_events=40)
        s = random_structure(rng, log)
        v = random_view(rng, s)
        one = materialized_as_dict(materialize(v, s, log, workers=1))
        four = materialized_as_dict(materialize(v, s, log, workers=4))
        assert one == four

    def test_attribute_partition(self):
        # disjoint attribute selections place each surviving event in exactly one cell
        rng = random.Random(41)
        for _ in range(10):
            log = random_log(rng, max_events=30)
            s = random_structure(rng, log)
            if s is None:
                continue
            if any(d.kind != "attribute" for d in s.dimensions):
                continue
            v = default_view(s)
            m = materialize(v, s, log)
            seen: dict[str, int] = {}
            for _, ids in m:
                for eid in ids:
                    seen[eid] = seen.get(eid, 0) + 1
            survivors = {
                eid for cell_ids in brute_force_materialize(v, s, log).values() for eid in cell_ids
            }
            for eid in survivors:
                assert seen[eid] >= 1

    def test_object_duplication_accounting(self):
        log = derived3_log()
        s = build_structure(log, ["item"])
        v = default_view(s)
        m = materialize(v, s, log)
        incidences = sum(len(ids) for _, ids in m)
        assert incidences == sum(len(e.omap["item"]) for e in log.events)

    def test_slice_equals_dice_then_drop(self):
        rng = random.Random(17)
        for _ in range(15):
            log = random_log(rng, max_events=25)
            s = random_structure(rng, log)
            if s is None:
                continue
            v = random_view(rng, s)
            if not v.selected:
                continue
            d = rng.choice(v.selected)
            member = rng.choice(list(v.sel[d]))
            sliced = cube_slice(v, d, member)
            diced = dice(v, {d: [member]})
            dropped = CubeView(tuple(x for x in diced.selected if x != d), diced.sel)
            assert sliced == dropped
            a = materialized_as_dict(materialize(sliced, s, log))
            b = materialized_as_dict(materialize(dropped, s, log))
            assert a == b

    def test_view_ops_are_pure(self):
        log = derived3_log()
        s = build_structure(log, ["activity", "item"])
        v = default_view(s)
        before = (v.selected, dict(v.sel))
        cube_slice(v, "item", "i1")
        dice(v, {"activity": ["A"]})
        change_granularity(v, "item", "objects", s)
        assert (v.selected, dict(v.sel)) == before

    def test_incompatible_structure_rejected(self):
        log = table1_log()
        sub = log.restrict({"17499"})
        s = build_structure(sub, ["item"])
        with pytest.raises(CubeError) as err:
            materialize(default_view(s), s, log)
        assert err.value.code == "incompatible-structure"


class TestCellSublog:
    def test_cell_sublog_from_derived_example(self):
        log = derived3_log()
        s = build_structure(log, ["item"])
        m = materialize(default_view(s), s, log)
        cell = next(c for c in m.cells if c.labels()["item"] == "i1")
        sub = cell_sublog(m, cell, log)
        assert [e.id for e in sub] == ["e1", "e2"]
        assert validate_log(sub).ok
        assert sub.object_types == log.object_types

    def test_empty_cell_gives_empty_valid_log(self):
        log = derived3_log()
        s = build_structure(log, ["activity", "order"])
        m = materialize(default_view(s), s, log)
        empty_cells = [c for c, ids in m if not ids]
        sub = cell_sublog(m, empty_cells[0], log)
        assert len(sub) == 0
        assert validate_log(sub).ok

    def test_unknown_cell(self):
        log = derived3_log()
        s = build_structure(log, ["item"])
        m = materialize(default_view(s), s, log)
        bogus = Cell((("item", ValueSet.of(["i9"], label="i9")),))
        with pytest.raises(CubeError) as err:
            m.events_of(bogus)
        assert err.value.code == "unknown-cell"

    def test_disjoint_attribute_cells_partition_filtered_log(self):
        rng = random.Random(31)
        for _ in range(10):
            log = random_log(rng, max_events=30)
            dims = ["activity"]
            s = build_structure(log, dims)
            v = default_view(s)
            m = materialize(v, s, log)
            counts: dict[str, int] = {}
            for _, ids in m:
                for eid in ids:
                    counts[eid] = counts.get(eid, 0) + 1
            assert set(counts.values()) <= {1}
            assert len(counts) == len(log)
