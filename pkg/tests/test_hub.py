import json
import urllib.error
import urllib.request

import pytest

from augviz import canonical_bytes, compile_spec, parse_spec, render_virtual, spec_id
from augviz.errors import UnknownIdError, UnknownVersionError, ValidationFailedError
from augviz.hub.store import SpecStore

from conftest import fixture_text


def post(base, path, body: bytes, expect_error=False):
    req = urllib.request.Request(base + path, data=body,
                                 headers={"Content-Type": "application/json"},
                                 method="POST")
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as e:
        if not expect_error:
            raise
        return e.code, e.read()


def get(base, path, expect_error=False):
    try:
        with urllib.request.urlopen(base + path) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as e:
        if not expect_error:
            raise
        return e.code, e.read()


# --- store level ---------------------------------------------------------------

def test_store_publish_idempotent(tmp_path):
    store = SpecStore(tmp_path, "http://hub")
    text = fixture_text("bar_extend.pv.json").encode()
    r1 = store.publish(text)
    r2 = store.publish(text)
    assert (r1.id, r1.version) == (r2.id, r2.version) == (r1.id, 1)
    assert r1.to_dict() == r2.to_dict()
    assert r1.created and not r2.created


def test_store_content_addressing(tmp_path):
    store = SpecStore(tmp_path)
    spec = parse_spec(fixture_text("bar_extend.pv.json"))
    receipt = store.publish(fixture_text("bar_extend.pv.json").encode())
    assert receipt.id == spec_id(spec)
    assert len(receipt.id) == 16
    assert receipt.id == receipt.id.lower()
    # id derives from version-1 canonical bytes
    import hashlib
    assert receipt.id == hashlib.sha256(canonical_bytes(spec)).hexdigest()[:16]


def test_store_versioning_and_immutability(tmp_path):
    store = SpecStore(tmp_path)
    doc = json.loads(fixture_text("bar_extend.pv.json"))
    r1 = store.publish(json.dumps(doc).encode())
    v1_bytes = store.fetch_spec(r1.id)
    v1_ref = store.fetch_reference(r1.id)

    doc["ar"]["appends"][0]["values"][0]["v"] = 70
    r2 = store.publish(json.dumps(doc).encode(), spec_id_hint=r1.id)
    assert r2.version == 2 and r2.id == r1.id

    assert store.fetch_spec(r1.id, 1) == v1_bytes
    assert store.fetch_reference(r1.id, 1) == v1_ref
    assert store.fetch_spec(r1.id) != v1_bytes
    assert store.fetch_spec(r1.id, 2) == store.fetch_spec(r1.id)


def test_store_rejects_invalid_without_force(tmp_path):
    store = SpecStore(tmp_path)
    text = fixture_text("pie_extend.pv.json").encode()
    with pytest.raises(ValidationFailedError) as exc:
        store.publish(text)
    assert exc.value.report.verdict == "invalid"
    receipt = store.publish(text, force=True)
    assert receipt.version == 1


def test_store_unknown_lookups(tmp_path):
    store = SpecStore(tmp_path)
    with pytest.raises(UnknownIdError):
        store.fetch_spec("0" * 16)
    r = store.publish(fixture_text("bar_extend.pv.json").encode())
    with pytest.raises(UnknownVersionError):
        store.fetch_spec(r.id, 9)


def test_store_virtual_matches_local_compile(tmp_path):
    store = SpecStore(tmp_path)
    text = fixture_text("bar_extend.pv.json").encode()
    receipt = store.publish(text)
    fetched = store.fetch_virtual(receipt.id)
    spec = parse_spec(store.fetch_spec(receipt.id))
    local = render_virtual(compile_spec(spec)).encode()
    assert fetched == local


# --- HTTP level ------------------------------------------------------------------

def test_http_publish_fetch_roundtrip(hub):
    text = fixture_text("bar_extend.pv.json").encode()
    status, body = post(hub, "/specs", text)
    assert status == 201
    receipt = json.loads(body)
    assert set(receipt) == {"id", "version", "anchorPayload", "staticRenderURL"}
    payload = receipt["anchorPayload"]
    assert payload["papar"] == 1
    assert payload["id"] == receipt["id"]
    assert payload["ver"] == 1
    assert payload["hub"].startswith("http://")
    assert payload["box"] == [318.0, 178.0, 36.0, 36.0]

    status, body2 = post(hub, "/specs", text)
    assert status == 200  # no-op republish
    assert json.loads(body2) == receipt

    sid = receipt["id"]
    status, spec_bytes = get(hub, f"/specs/{sid}")
    spec = parse_spec(spec_bytes)
    assert spec_bytes == canonical_bytes(spec)

    status, virt = get(hub, f"/specs/{sid}/virtual")
    assert virt == render_virtual(compile_spec(spec)).encode()

    status, ref = get(hub, f"/specs/{sid}/reference")
    assert b'data-anchor=' in ref

    status, anchor = get(hub, f"/specs/{sid}/anchor")
    assert json.loads(anchor) == payload


def test_http_version_bump_serves_old_reference(hub):
    doc = json.loads(fixture_text("bar_extend.pv.json"))
    status, body = post(hub, "/specs", json.dumps(doc).encode())
    receipt = json.loads(body)
    sid = receipt["id"]
    _, ref1 = get(hub, f"/specs/{sid}/reference?v=1")
    _, virt1 = get(hub, f"/specs/{sid}/virtual?v=1")

    doc["ar"]["appends"][0]["values"] = [{"cat": "E", "v": 10}]
    status, body = post(hub, f"/specs/{sid}", json.dumps(doc).encode())
    assert json.loads(body)["version"] == 2

    _, virt2 = get(hub, f"/specs/{sid}/virtual")
    assert virt2 != virt1
    _, ref1_again = get(hub, f"/specs/{sid}/reference?v=1")
    assert ref1_again == ref1


def test_http_errors(hub):
    status, body = get(hub, "/specs/0123456789abcdef", expect_error=True)
    assert status == 404
    assert json.loads(body)["error"] == "unknown-id"

    status, body = post(hub, "/specs", b"{nope", expect_error=True)
    assert status == 400
    assert json.loads(body)["error"] == "parse-error"

    status, body = post(hub, "/specs",
                        fixture_text("pie_extend.pv.json").encode(),
                        expect_error=True)
    assert status == 409
    err = json.loads(body)
    assert err["error"] == "validation-failed"
    assert err["detail"]["verdict"] == "invalid"

    # forced publish goes through
    status, body = post(hub, "/specs?force=1",
                        fixture_text("pie_extend.pv.json").encode())
    assert status == 201

    # no-ar spec publishes fine but has no virtual layer
    status, body = post(hub, "/specs", fixture_text("minimal_bar.pv.json").encode())
    sid = json.loads(body)["id"]
    status, body = get(hub, f"/specs/{sid}/virtual", expect_error=True)
    assert status == 422
    assert json.loads(body)["error"] == "no-ar"

    status, body = get(hub, f"/specs/{sid}?v=7", expect_error=True)
    assert status == 404


def test_http_compile_validate_endpoints(hub):
    text = fixture_text("bar_extend.pv.json").encode()
    status, svg = post(hub, "/compile", text)
    assert status == 200
    assert svg.startswith(b"<svg")
    assert b'data-layer="virtual"' in svg
    assert b"#FF8C00" in svg and b"#1E90FF" in svg

    status, body = post(hub, "/validate", text)
    assert json.loads(body)["verdict"] == "valid"

    status, body = post(hub, "/validate",
                        fixture_text("treemap_internal.pv.json").encode())
    rep = json.loads(body)
    assert rep["verdict"] == "invalid"
    assert rep["stageDiffs"][0]["hint"]["text"] == \
        "avoid 'treemap' when new nodes are added to the internal nodes"


def test_http_concurrent_publishes(hub):
    import threading
    text = fixture_text("bar_extend.pv.json").encode()
    results = []

    def worker():
        status, body = post(hub, "/specs", text)
        results.append(json.loads(body))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len({json.dumps(r, sort_keys=True) for r in results}) == 1
    assert all(r["version"] == 1 for r in results)


def test_http_new_version_unknown_id(hub):
    status, body = post(hub, "/specs/0123456789abcdef",
                        fixture_text("bar_extend.pv.json").encode(),
                        expect_error=True)
    assert status == 404
    assert json.loads(body)["error"] == "unknown-id"


def test_http_serves_ui_assets(tmp_path):
    from augviz.hub.service import run_in_thread
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<html>editor</html>")
    (ui / "app.js").write_text("console.log(1)")
    server, base, _ = run_in_thread(tmp_path / "store", ui_dir=ui)
    try:
        status, body = get(base, "/")
        assert status == 200 and b"editor" in body
        status, body = get(base, "/app.js")
        assert status == 200
        status, body = get(base, "/missing.js", expect_error=True)
        assert status == 404
    finally:
        server.shutdown()
        server.server_close()
