import hashlib
import sqlite3
import threading

import numpy as np
import pytest

from cbir.errors import (
    Corrupt,
    DuplicateFeedback,
    NotFound,
    StoreIOError,
    VersionMismatch,
)
from cbir.store import ImageRecord, Store


def make_record(rng, category=0, keywords=None, metadata=None) -> ImageRecord:
    probs = rng.uniform(0.1, 1.0, size=9)
    probs /= probs.sum()
    return ImageRecord(
        blob=rng.bytes(64),
        format="ppm",
        category_code=category,
        enroll_probs=probs,
        color_vec=rng.normal(size=30),
        texture_vec=rng.normal(size=39),
        shape_vec=rng.uniform(0, 1, size=30),
        keywords=list(keywords or ["boat", "Harbor"]),
        metadata=dict(metadata or {"owner": "test"}),
    )


@pytest.fixture()
def store(tmp_path):
    s = Store(tmp_path / "t.db")
    yield s
    s.close()


def test_put_get_round_trip(store):
    rng = np.random.default_rng(0)
    record = make_record(rng)
    image_id = store.put_record(record)
    loaded = store.get_record(image_id)
    assert loaded.blob == record.blob
    assert loaded.format == "ppm"
    assert (loaded.color_vec == record.color_vec).all()
    assert (loaded.texture_vec == record.texture_vec).all()
    assert (loaded.shape_vec == record.shape_vec).all()
    assert (loaded.enroll_probs == record.enroll_probs).all()
    assert loaded.keywords == record.keywords
    assert loaded.metadata == record.metadata


def test_ids_strictly_increase(store):
    rng = np.random.default_rng(1)
    ids = [store.put_record(make_record(rng)) for _ in range(5)]
    assert ids == sorted(ids) and len(set(ids)) == 5


def test_put_after_close(tmp_path):
    s = Store(tmp_path / "x.db")
    s.close()
    with pytest.raises(StoreIOError):
        s.put_record(make_record(np.random.default_rng(2)))


def test_get_unknown(store):
    with pytest.raises(NotFound):
        store.get_record(12345)


def test_list_by_category_and_update(store):
    rng = np.random.default_rng(3)
    a = store.put_record(make_record(rng, category=1))
    b = store.put_record(make_record(rng, category=1))
    c = store.put_record(make_record(rng, category=2))
    assert store.list_by_category(1) == [a, b]
    assert store.list_by_category(2) == [c]
    assert store.list_by_category(7) == []
    store.update_category(a, 2)
    assert store.list_by_category(1) == [b]
    assert store.list_by_category(2) == [a, c]
    store.update_category(b, None)
    assert store.list_by_category(None) == [b]
    with pytest.raises(NotFound):
        store.update_category(999, 1)


def test_update_replay_reaches_same_state(tmp_path):
    events = [(1, 3, {3}, {0: 3}), (2, None, {1, 2}, {1: 3}), (1, 5, {0, 3}, {0: 3, 5: 1})]

    def apply_all(path):
        s = Store(path)
        rng = np.random.default_rng(4)
        for _ in range(2):
            s.put_record(make_record(rng))
        for image_id, code, vetoed, negs in events:
            s.update_category(image_id, code, vetoed, negs)
        state = [
            (r.category_code, sorted(r.vetoed), sorted(r.neg_counts.items()))
            for r in (s.get_record(1), s.get_record(2))
        ]
        s.close()
        return state

    assert apply_all(tmp_path / "a.db") == apply_all(tmp_path / "b.db")


def test_search_keywords(store):
    rng = np.random.default_rng(5)
    a = store.put_record(make_record(rng, keywords=["Boat", "sunset"]))
    b = store.put_record(make_record(rng, keywords=["boat", "harbor"]))
    store.put_record(make_record(rng, keywords=["train"]))
    assert store.search_keywords(["boat"]) == [a, b]
    assert store.search_keywords(["BOAT", "harbor"]) == [b]
    assert store.search_keywords(["boat", "plane"]) == []
    assert store.search_keywords([]) == []
    assert store.search_keywords(["boa"]) == []  # whole-token only


def test_weights_and_normalization_round_trip(store):
    with pytest.raises(NotFound):
        store.load_weights()
    with pytest.raises(NotFound):
        store.load_normalization()
    store.save_weights(b"weights-payload")
    store.save_normalization(b"norm-payload")
    assert store.load_weights() == b"weights-payload"
    assert store.load_normalization() == b"norm-payload"
    store.save_weights(b"updated")
    assert store.load_weights() == b"updated"


def test_queries_and_feedback(store):
    qid = store.put_query(3, {"top_k": 5, "threshold": 0.5})
    rec = store.get_query(qid)
    assert rec.predicted_category == 3
    assert rec.params["top_k"] == 5
    with pytest.raises(NotFound):
        store.get_query(qid + 100)
    store.add_feedback(qid, 1, "negative")
    assert store.has_feedback(qid, 1)
    assert not store.has_feedback(qid, 2)
    with pytest.raises(DuplicateFeedback):
        store.add_feedback(qid, 1, "positive")
    assert store.list_feedback()[0][:3] == (qid, 1, "negative")


def test_reopen_preserves_everything(tmp_path):
    path = tmp_path / "p.db"
    rng = np.random.default_rng(6)
    s = Store(path)
    record = make_record(rng)
    image_id = s.put_record(record)
    s.save_weights(b"W" * 100)
    qid = s.put_query(0, {})
    s.add_feedback(qid, image_id, "positive")
    blob_hash = hashlib.sha256(record.blob).hexdigest()
    s.close()

    s2 = Store(path)
    loaded = s2.get_record(image_id)
    assert hashlib.sha256(loaded.blob).hexdigest() == blob_hash
    assert s2.load_weights() == b"W" * 100
    assert s2.has_feedback(qid, image_id)
    s2.close()


def test_version_mismatch(tmp_path):
    path = tmp_path / "v.db"
    Store(path).close()
    conn = sqlite3.connect(path)
    conn.execute("UPDATE meta SET value = ? WHERE key = 'schema_version'", (b"99",))
    conn.commit()
    conn.close()
    with pytest.raises(VersionMismatch):
        Store(path)


def test_corrupt_file(tmp_path):
    path = tmp_path / "c.db"
    path.write_bytes(b"this is not a database at all" * 40)
    with pytest.raises(Corrupt):
        Store(path)


def test_concurrent_readers_see_consistent_state(tmp_path):
    store = Store(tmp_path / "s.db")
    rng = np.random.default_rng(7)
    image_id = store.put_record(make_record(rng, category=0))
    stop = threading.Event()
    failures: list[str] = []

    def writer():
        for i in range(150):
            code = i % 2
            # category and neg_counts must always move together
            store.update_category(image_id, code, set(), {code: i})
        stop.set()

    def reader():
        while not stop.is_set():
            record = store.get_record(image_id)
            if record.category_code not in (0, 1):
                failures.append(f"bad code {record.category_code}")
            if record.neg_counts and record.category_code not in record.neg_counts:
                failures.append("torn read: counts do not match code")

    threads = [threading.Thread(target=reader) for _ in range(4)]
    wt = threading.Thread(target=writer)
    for t in threads:
        t.start()
    wt.start()
    wt.join()
    for t in threads:
        t.join()
    assert failures == []
    store.close()
