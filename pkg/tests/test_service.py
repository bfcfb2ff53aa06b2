import base64

import pytest
from fastapi.testclient import TestClient

from cbir.service import create_app
from cbir.store import Store

from conftest import blank_ppm


@pytest.fixture()
def client(mini_store_path):
    path, ids = mini_store_path
    app = create_app(path)
    with TestClient(app) as c:
        yield c, ids


def b64(payload: bytes) -> str:
    return base64.b64encode(payload).decode()


def test_healthz(client):
    c, _ = client
    body = c.get("/healthz").json()
    assert body["status"] == "ok"
    assert body["records"] == 9
    assert body["trained"] and body["normalization_fitted"]


def test_categories(client):
    c, _ = client
    cats = c.get("/categories").json()
    assert len(cats) == 9
    assert cats[0] == {"code": 0, "name": "boats"}
    assert cats[8]["name"] == "trains"


def test_enroll_json_and_multipart(client, mini_corpus):
    c, _ = client
    payload = mini_corpus[0].payload
    r = c.post("/images", json={
        "image_b64": b64(payload),
        "keywords": ["added"],
        "metadata": {"owner": "suite"},
        "label": "boats",
    })
    assert r.status_code == 200
    body = r.json()
    assert body["category"] == "boats" and body["category_code"] == 0
    assert len(body["probs"]) == 9
    assert sum(body["probs"]) == pytest.approx(1.0, abs=1e-6)

    r2 = c.post(
        "/images",
        files={"file": ("probe.ppm", payload, "image/x-portable-pixmap")},
        data={"keywords": "uploaded probe", "label": "trains"},
    )
    assert r2.status_code == 200
    assert r2.json()["category"] == "trains"
    meta = c.get(f"/images/{r2.json()['image_id']}/meta").json()
    assert meta["keywords"] == ["uploaded", "probe"]


def test_enroll_errors(client):
    c, _ = client
    assert c.post("/images", json={"image_b64": b64(blank_ppm())}).status_code == 422
    assert c.post("/images", json={"image_b64": b64(b"garbage")}).status_code == 400
    assert c.post("/images", json={"image_b64": "!!!not-base64!!!"}).status_code == 400
    assert c.post("/images", content=b"{not json", headers={"content-type": "application/json"}).status_code == 400
    assert c.post("/images", json={}).status_code == 400


def test_enroll_untrained_store(tmp_path, mini_corpus):
    app = create_app(tmp_path / "fresh.db")
    with TestClient(app) as c:
        r = c.post("/images", json={"image_b64": b64(mini_corpus[0].payload)})
        assert r.status_code == 503


def test_blob_round_trip_and_content_type(client, mini_corpus):
    c, ids = client
    image_id = ids[mini_corpus[0].name]
    r = c.get(f"/images/{image_id}")
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/x-portable-pixmap"
    assert r.content == mini_corpus[0].payload
    assert c.get("/images/99999").status_code == 404


def test_meta_endpoint(client, mini_corpus):
    c, ids = client
    image_id = ids[mini_corpus[0].name]
    meta = c.get(f"/images/{image_id}/meta").json()
    assert meta["image_id"] == image_id
    assert meta["format"] == "ppm"
    assert meta["category"] in [
        "boats", "animals", "cartoon", "automobiles", "human",
        "trees", "buildings", "computers", "trains",
    ]
    assert len(meta["enroll_probs"]) == 9
    assert c.get("/images/424242/meta").status_code == 404


def test_query_flow(client, mini_corpus):
    c, ids = client
    payload = mini_corpus[0].payload
    r = c.post("/query", json={"image_b64": b64(payload), "top_k": 3, "threshold": 0.2})
    assert r.status_code == 200
    body = r.json()
    assert body["query_id"] > 0
    assert len(body["results"]) <= 3
    top = body["results"][0]
    assert top["image_id"] == ids[mini_corpus[0].name]
    assert top["rank"] == 1 and top["score"] == pytest.approx(1.0)
    assert top["url"] == f"/images/{top['image_id']}"
    assert body["comparisons"] > 0


def test_query_errors(client):
    c, _ = client
    assert c.post("/query", json={"image_b64": b64(blank_ppm())}).status_code == 422
    assert c.post("/query", json={"top_k": 3}).status_code == 400
    assert c.post("/query", json={"image_b64": b64(b"junk")}).status_code == 400


def test_query_unfitted_normalization(tmp_path, mini_corpus, _mini_store_template):
    import shutil

    template, _ = _mini_store_template
    path = tmp_path / "nonorm.db"
    shutil.copy(template, path)
    store = Store(path)
    store._execute_write("DELETE FROM meta WHERE key = 'normalization'")
    store.close()
    with TestClient(create_app(path)) as c:
        r = c.post("/query", json={"image_b64": b64(mini_corpus[0].payload)})
        assert r.status_code == 409


def test_feedback_flow(client, mini_corpus):
    c, ids = client
    payload = mini_corpus[0].payload
    target = ids[mini_corpus[1].name]
    results = []
    for _ in range(3):
        q = c.post("/query", json={"image_b64": b64(payload), "top_k": 9,
                                   "threshold": 0.0}).json()
        r = c.post("/feedback", json={
            "query_id": q["query_id"], "image_id": target, "polarity": "negative",
        })
        assert r.status_code == 200
        results.append(r.json())
    assert [x["reassigned"] for x in results] == [False, False, True]

    q = c.post("/query", json={"image_b64": b64(payload), "top_k": 9,
                               "threshold": 0.0}).json()
    pos = c.post("/feedback", json={
        "query_id": q["query_id"], "image_id": ids[mini_corpus[0].name],
        "polarity": "positive",
    })
    assert pos.json() == {"reassigned": False, "new_category": None}
    dup = c.post("/feedback", json={
        "query_id": q["query_id"], "image_id": ids[mini_corpus[0].name],
        "polarity": "positive",
    })
    assert dup.status_code == 409
    assert c.post("/feedback", json={
        "query_id": 9999, "image_id": target, "polarity": "negative",
    }).status_code == 404
    assert c.post("/feedback", json={
        "query_id": q["query_id"], "image_id": 9999, "polarity": "negative",
    }).status_code == 404
    assert c.post("/feedback", json={
        "query_id": q["query_id"], "image_id": target, "polarity": "meh",
    }).status_code == 422


def test_search(client):
    c, ids = client
    hits = c.get("/search", params={"keywords": "sample"}).json()["results"]
    assert len(hits) == 9
    disk_hits = c.get("/search", params={"keywords": "disk sample"}).json()["results"]
    assert len(disk_hits) == 3
    assert all("disk" in h["keywords"] for h in disk_hits)
    assert c.get("/search", params={"keywords": "nothing"}).json()["results"] == []
    assert c.get("/search").json()["results"] == []


def test_get_does_not_mutate(client):
    c, ids = client
    before = c.get("/healthz").json()["records"]
    c.get("/search", params={"keywords": "sample"})
    c.get(f"/images/{list(ids.values())[0]}/meta")
    c.get("/categories")
    assert c.get("/healthz").json()["records"] == before


def test_static_ui_served(tmp_path, mini_store_path):
    path, _ = mini_store_path
    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html><body>cbir</body></html>")
    with TestClient(create_app(path, static_dir=static)) as c:
        r = c.get("/")
        assert r.status_code == 200
        assert "cbir" in r.text
        assert c.get("/healthz").json()["status"] == "ok"
