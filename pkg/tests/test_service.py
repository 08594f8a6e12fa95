"""HTTP session API and headless script replay."""

import json

import pytest
from fastapi.testclient import TestClient

from corpus import derived3_log, table1_log
from occube.io.ocel import export_ocel
from occube.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def upload(client, log, fmt="ocel", mapping=None):
    files = {"file": ("log.json", export_ocel(log).encode("utf-8"))}
    data = {"format": fmt}
    if mapping is not None:
        data["mapping"] = json.dumps(mapping)
    response = client.post("/sessions", files=files, data=data)
    assert response.status_code == 200, response.text
    return response.json()


def build_default_cube(client, sid, dimensions):
    response = client.post(f"/sessions/{sid}/cube", json={"dimensions": dimensions})
    assert response.status_code == 200, response.text
    return response.json()


class TestCreateSession:
    def test_upload_table1(self, client):
        body = upload(client, table1_log())
        assert body["object_types"] == ["invoice", "item", "order"]
        assert body["events"] == 4
        assert "create purchase order" in body["activities"]

    def test_upload_empty_ocel(self, client):
        from occube.model import EventLog

        body = upload(client, EventLog([], object_types={"order"}))
        assert body["events"] == 0

    def test_csv_without_mapping_is_400(self, client):
        files = {"file": ("log.csv", b"case,activity,time\n")}
        response = client.post("/sessions", files=files, data={"format": "csv"})
        assert response.status_code == 400
        assert response.json()["code"] == "missing-mapping"

    def test_broken_ocel_is_400(self, client):
        files = {"file": ("log.json", b"{nope")}
        response = client.post("/sessions", files=files, data={"format": "ocel"})
        assert response.status_code == 400
        assert response.json()["code"] == "parse-error"

    def test_payload_too_large_is_413(self):
        client = TestClient(create_app(upload_limit=10))
        files = {"file": ("log.json", export_ocel(table1_log()).encode("utf-8"))}
        response = client.post("/sessions", files=files, data={"format": "ocel"})
        assert response.status_code == 413

    def test_csv_upload(self, client):
        csv_bytes = b"case,activity,time\r\nc1,A,2020-01-01 09:00:00\r\n"
        files = {"file": ("log.csv", csv_bytes)}
        mapping = {"case_column": "case", "activity_column": "activity", "timestamp_column": "time"}
        response = client.post("/sessions", files=files, data={"format": "csv", "mapping": json.dumps(mapping)})
        assert response.status_code == 200
        assert response.json()["object_types"] == ["case"]


class TestBuildCube:
    def test_three_dimensions(self, client):
        sid = upload(client, table1_log())["session"]
        body = build_default_cube(client, sid, ["activity", "timestamp", "item"])
        names = [d["name"] for d in body["dimensions"]]
        assert names == ["activity", "item", "timestamp"]
        assert body["view"]["selected"] == ["activity", "item", "timestamp"]

    def test_resource_attribute_dimension_accepted(self, client):
        sid = upload(client, table1_log())["session"]
        body = build_default_cube(client, sid, ["resource"])
        assert body["dimensions"][0]["n_values"] == 3

    def test_zero_dimensions_degenerate_cube(self, client):
        sid = upload(client, table1_log())["session"]
        response = client.post(f"/sessions/{sid}/cube", json={"dimensions": []})
        assert response.status_code == 200
        cells = client.get(f"/sessions/{sid}/cells").json()
        assert cells["total_cells"] == 1
        assert cells["cells"][0] == {"coords": {}, "events": 4}

    def test_unknown_session_404(self, client):
        response = client.post("/sessions/nope/cube", json={"dimensions": []})
        assert response.status_code == 404

    def test_unknown_dimension_422(self, client):
        sid = upload(client, table1_log())["session"]
        response = client.post(f"/sessions/{sid}/cube", json={"dimensions": ["price"]})
        assert response.status_code == 422
        assert response.json()["code"] == "unknown-dimension-name"


class TestOperations:
    def test_slice_removes_dimension_and_undo_restores(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["activity", "item"])
        response = client.post(f"/sessions/{sid}/ops", json={"op": "slice", "dimension": "item", "member": "i1"})
        assert response.status_code == 200
        assert response.json()["selected"] == ["activity"]
        undone = client.post(f"/sessions/{sid}/ops", json={"op": "undo"})
        assert undone.json()["selected"] == ["activity", "item"]
        assert undone.json()["history_length"] == 0

    def test_dice_outside_selection_409(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        client.post(f"/sessions/{sid}/ops", json={"op": "dice", "filter": {"item": ["i1"]}})
        response = client.post(f"/sessions/{sid}/ops", json={"op": "dice", "filter": {"item": ["i2"]}})
        assert response.status_code == 409
        assert response.json()["code"] == "filter-outside-selection"

    def test_change_granularity_by_level(self, client):
        sid = upload(client, table1_log())["session"]
        build_default_cube(client, sid, ["timestamp"])
        response = client.post(
            f"/sessions/{sid}/ops", json={"op": "change-granularity", "dimension": "timestamp", "level": "month"}
        )
        assert response.status_code == 200
        assert response.json()["sel_sizes"]["timestamp"] == 2

    def test_undo_with_empty_history_409(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        response = client.post(f"/sessions/{sid}/ops", json={"op": "undo"})
        assert response.status_code == 409


class TestCells:
    def test_derived_item_counts(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        body = client.get(f"/sessions/{sid}/cells").json()
        got = {c["coords"]["item"]: c["events"] for c in body["cells"]}
        assert got == {"i1": 2, "i2": 1, "i3": 1}

    def test_pagination_and_416(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        page = client.get(f"/sessions/{sid}/cells", params={"page": 1, "page_size": 2}).json()
        assert len(page["cells"]) == 2
        page2 = client.get(f"/sessions/{sid}/cells", params={"page": 2, "page_size": 2}).json()
        assert len(page2["cells"]) == 1
        response = client.get(f"/sessions/{sid}/cells", params={"page": 3, "page_size": 2})
        assert response.status_code == 416

    def test_counts_stable_across_calls(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["activity", "item"])
        first = client.get(f"/sessions/{sid}/cells").json()
        second = client.get(f"/sessions/{sid}/cells").json()
        assert first == second


class TestModel:
    def test_whole_vs_cell_comparison(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        body = client.get(
            f"/sessions/{sid}/model",
            params={"scope": "cell", "cell": json.dumps({"item": "i3"})},
        ).json()
        whole_nodes = {n["activity"] for n in body["whole"]["nodes"]}
        cell_nodes = {n["activity"] for n in body["cell"]["nodes"]}
        assert whole_nodes == {"A", "B"}
        assert cell_nodes == {"A"}
        assert set(body["palette"]) == {"order", "item"}

    def test_zero_thresholds_full_model(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        body = client.get(f"/sessions/{sid}/model").json()
        assert len(body["whole"]["edges"]) == 2

    def test_filter_removes_type_edges(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        body = client.get(
            f"/sessions/{sid}/model",
            params={"filter": json.dumps({"order": []})},
        ).json()
        types = {e["object_type"] for e in body["whole"]["edges"]}
        assert "order" not in types

    def test_unknown_cell_404(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        response = client.get(
            f"/sessions/{sid}/model", params={"scope": "cell", "cell": json.dumps({"item": "i9"})}
        )
        assert response.status_code == 404

    def test_sliced_view_filters_whole_model(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["activity", "item"])
        client.post(f"/sessions/{sid}/ops", json={"op": "slice", "dimension": "item", "member": "i1"})
        body = client.get(f"/sessions/{sid}/model").json()
        # hidden item filter keeps only e2 (item set within {i1})
        assert {n["activity"] for n in body["whole"]["nodes"]} == {"B"}


class TestExport:
    def test_ocel_round_trip_through_service(self, client):
        log = table1_log()
        sid = upload(client, log)["session"]
        response = client.get(f"/sessions/{sid}/export", params={"what": "ocel"})
        assert response.status_code == 200
        from occube.io.ocel import import_ocel

        assert import_ocel(response.text) == log

    def test_flattened_needs_ot_422(self, client):
        sid = upload(client, table1_log())["session"]
        response = client.get(f"/sessions/{sid}/export", params={"what": "flattened"})
        assert response.status_code == 422
        assert response.json()["code"] == "missing-case-notion"

    def test_cell_sublog_reimports_cleanly(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        response = client.get(
            f"/sessions/{sid}/export",
            params={"what": "ocel", "scope": "cell", "cell": json.dumps({"item": "i1"})},
        )
        from occube.io.ocel import import_ocel
        from occube.model import validate_log

        log = import_ocel(response.text)
        assert validate_log(log).ok
        assert len(log) == 2

    def test_dump_reimport_gives_same_view_summary(self, client):
        sid = upload(client, table1_log())["session"]
        build_default_cube(client, sid, ["activity", "item"])
        client.post(f"/sessions/{sid}/ops", json={"op": "slice", "dimension": "item", "member": "i1"})
        dump_text = client.get(f"/sessions/{sid}/export", params={"what": "dump"}).text

        from occube.io.dump import load_dump

        dump = load_dump(dump_text)
        assert "item" not in dump.view.selected
        assert [m.label for m in dump.view.sel["item"]] == ["i1"]

    def test_dot_export_matches_model_dot(self, client):
        sid = upload(client, derived3_log())["session"]
        build_default_cube(client, sid, ["item"])
        model = client.get(f"/sessions/{sid}/model").json()
        dot = client.get(f"/sessions/{sid}/export", params={"what": "dot"}).text
        assert dot == model["whole"]["dot"]
