"""Single-file embedded persistence for blobs, feature vectors, category
state, classifier weights, normalization, queries, and the feedback ledger.

Backed by sqlite3: one writer at a time (guarded by a process-level lock),
any number of readers, each thread on its own connection.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import N_CATEGORIES
from .errors import (
    Corrupt,
    DuplicateFeedback,
    NotFound,
    StoreFull,
    StoreIOError,
    VersionMismatch,
)

SCHEMA_VERSION = 1

COLOR_DIM = 30
TEXTURE_DIM = 39
SHAPE_DIM = 30

_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS images (
    image_id INTEGER PRIMARY KEY AUTOINCREMENT,
    blob BLOB NOT NULL,
    format TEXT NOT NULL,
    category_code INTEGER,
    enroll_probs BLOB NOT NULL,
    color_vec BLOB NOT NULL,
    texture_vec BLOB NOT NULL,
    shape_vec BLOB NOT NULL,
    keywords TEXT NOT NULL,
    metadata TEXT NOT NULL,
    vetoed TEXT NOT NULL,
    neg_counts TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_images_category ON images(category_code);
CREATE TABLE IF NOT EXISTS queries (
    query_id INTEGER PRIMARY KEY AUTOINCREMENT,
    predicted_category INTEGER NOT NULL,
    timestamp REAL NOT NULL,
    params TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS feedback (
    query_id INTEGER NOT NULL,
    image_id INTEGER NOT NULL,
    polarity TEXT NOT NULL,
    timestamp REAL NOT NULL,
    PRIMARY KEY (query_id, image_id)
);
"""


@dataclass
class ImageRecord:
    """One enrolled image and everything retrieval needs to rank it."""

    blob: bytes
    format: str
    category_code: int | None
    enroll_probs: np.ndarray
    color_vec: np.ndarray
    texture_vec: np.ndarray
    shape_vec: np.ndarray
    keywords: list[str] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)
    vetoed: set[int] = field(default_factory=set)
    neg_counts: dict[int, int] = field(default_factory=dict)
    image_id: int | None = None

    def validate(self) -> None:
        if self.enroll_probs.shape != (N_CATEGORIES,):
            raise ValueError("enroll_probs must have nine entries")
        if abs(float(self.enroll_probs.sum()) - 1.0) > 1e-6:
            raise ValueError("enroll_probs must sum to 1")
        for vec, dim in (
            (self.color_vec, COLOR_DIM),
            (self.texture_vec, TEXTURE_DIM),
            (self.shape_vec, SHAPE_DIM),
        ):
            if vec.shape != (dim,):
                raise ValueError(f"feature vector must have {dim} entries")
        if self.category_code is not None and self.category_code in self.vetoed:
            raise ValueError("category_code may not be vetoed")


@dataclass(frozen=True)
class QueryRecord:
    query_id: int
    predicted_category: int
    timestamp: float
    params: dict


def _vec_to_blob(vec: np.ndarray) -> bytes:
    return np.asarray(vec, dtype=np.float64).astype("<f8").tobytes()


def _blob_to_vec(blob: bytes) -> np.ndarray:
    return np.frombuffer(blob, dtype="<f8").copy()


class Store:
    """Open (creating if needed) the single-file store at `path`."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self._write_lock = threading.Lock()
        self._local = threading.local()
        self._all_conns: list[sqlite3.Connection] = []
        self._conns_lock = threading.Lock()
        self._closed = False
        existed = Path(self.path).exists()
        conn = self._conn()
        try:
            if existed:
                row = conn.execute(
                    "SELECT value FROM meta WHERE key = 'schema_version'"
                ).fetchone()
                if row is None:
                    raise VersionMismatch("store has no schema version")
                found = int(row[0])
                if found != SCHEMA_VERSION:
                    raise VersionMismatch(
                        f"store schema v{found}, expected v{SCHEMA_VERSION}"
                    )
            else:
                with self._write_lock:
                    conn.executescript(_SCHEMA)
                    conn.execute(
                        "INSERT INTO meta (key, value) VALUES ('schema_version', ?)",
                        (str(SCHEMA_VERSION).encode(),),
                    )
                    conn.commit()
        except sqlite3.DatabaseError as exc:
            raise Corrupt(f"not a readable store file: {exc}") from exc

    # -- connection plumbing --------------------------------------------

    def _conn(self) -> sqlite3.Connection:
        if self._closed:
            raise StoreIOError("store is closed")
        conn = getattr(self._local, "conn", None)
        if conn is None:
            try:
                conn = sqlite3.connect(self.path, timeout=30.0)
                conn.execute("PRAGMA journal_mode=WAL")
                conn.execute("PRAGMA synchronous=NORMAL")
                conn.execute("PRAGMA busy_timeout=30000")
            except sqlite3.DatabaseError as exc:
                raise Corrupt(f"cannot open store: {exc}") from exc
            except OSError as exc:
                raise StoreIOError(str(exc)) from exc
            self._local.conn = conn
            with self._conns_lock:
                self._all_conns.append(conn)
        return conn

    def _execute_write(self, sql: str, params=()) -> sqlite3.Cursor:
        conn = self._conn()
        with self._write_lock:
            try:
                cur = conn.execute(sql, params)
                conn.commit()
                return cur
            except sqlite3.IntegrityError:
                conn.rollback()
                raise
            except sqlite3.OperationalError as exc:
                conn.rollback()
                if "full" in str(exc).lower():
                    raise StoreFull(str(exc)) from exc
                raise StoreIOError(str(exc)) from exc

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        with self._conns_lock:
            for conn in self._all_conns:
                try:
                    conn.execute("PRAGMA wal_checkpoint(TRUNCATE)")
                    conn.close()
                except sqlite3.Error:
                    pass
            self._all_conns.clear()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- image records ---------------------------------------------------

    def put_record(self, record: ImageRecord) -> int:
        record.validate()
        cur = self._execute_write(
            "INSERT INTO images (blob, format, category_code, enroll_probs,"
            " color_vec, texture_vec, shape_vec, keywords, metadata, vetoed,"
            " neg_counts) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
            (
                record.blob,
                record.format,
                record.category_code,
                _vec_to_blob(record.enroll_probs),
                _vec_to_blob(record.color_vec),
                _vec_to_blob(record.texture_vec),
                _vec_to_blob(record.shape_vec),
                json.dumps(record.keywords),
                json.dumps(record.metadata, sort_keys=True),
                json.dumps(sorted(record.vetoed)),
                json.dumps({str(k): v for k, v in sorted(record.neg_counts.items())}),
            ),
        )
        record.image_id = int(cur.lastrowid)
        return record.image_id

    def _row_to_record(self, row) -> ImageRecord:
        return ImageRecord(
            image_id=int(row[0]),
            blob=bytes(row[1]),
            format=row[2],
            category_code=None if row[3] is None else int(row[3]),
            enroll_probs=_blob_to_vec(row[4]),
            color_vec=_blob_to_vec(row[5]),
            texture_vec=_blob_to_vec(row[6]),
            shape_vec=_blob_to_vec(row[7]),
            keywords=json.loads(row[8]),
            metadata=json.loads(row[9]),
            vetoed=set(json.loads(row[10])),
            neg_counts={int(k): v for k, v in json.loads(row[11]).items()},
        )

    _RECORD_COLS = (
        "image_id, blob, format, category_code, enroll_probs, color_vec,"
        " texture_vec, shape_vec, keywords, metadata, vetoed, neg_counts"
    )

    def get_record(self, image_id: int) -> ImageRecord:
        row = self._conn().execute(
            f"SELECT {self._RECORD_COLS} FROM images WHERE image_id = ?",
            (image_id,),
        ).fetchone()
        if row is None:
            raise NotFound(f"no image {image_id}")
        return self._row_to_record(row)

    def list_by_category(self, code: int | None) -> list[int]:
        conn = self._conn()
        if code is None:
            rows = conn.execute(
                "SELECT image_id FROM images WHERE category_code IS NULL"
                " ORDER BY image_id"
            ).fetchall()
        else:
            rows = conn.execute(
                "SELECT image_id FROM images WHERE category_code = ?"
                " ORDER BY image_id",
                (code,),
            ).fetchall()
        return [int(r[0]) for r in rows]

    def image_ids(self) -> list[int]:
        rows = self._conn().execute(
            "SELECT image_id FROM images ORDER BY image_id"
        ).fetchall()
        return [int(r[0]) for r in rows]

    def count_records(self) -> int:
        return int(self._conn().execute("SELECT COUNT(*) FROM images").fetchone()[0])

    def feature_rows(self, code: int | None = None, gated: bool = True):
        """(image_id, color_vec, texture_vec) tuples, ascending by id.

        With gated=True only records currently in category `code` are
        returned; otherwise every record is.
        """
        conn = self._conn()
        if gated:
            rows = conn.execute(
                "SELECT image_id, color_vec, texture_vec FROM images"
                " WHERE category_code = ? ORDER BY image_id",
                (code,),
            ).fetchall()
        else:
            rows = conn.execute(
                "SELECT image_id, color_vec, texture_vec FROM images"
                " ORDER BY image_id"
            ).fetchall()
        return [(int(r[0]), _blob_to_vec(r[1]), _blob_to_vec(r[2])) for r in rows]

    def all_vectors(self):
        """(color_vec, texture_vec) pairs for normalization fitting."""
        rows = self._conn().execute(
            "SELECT color_vec, texture_vec FROM images ORDER BY image_id"
        ).fetchall()
        return [(_blob_to_vec(r[0]), _blob_to_vec(r[1])) for r in rows]

    def update_category(
        self,
        image_id: int,
        new_code: int | None,
        vetoed: set[int] | None = None,
        neg_counts: dict[int, int] | None = None,
    ) -> None:
        """Atomically update category state; readers see old or new, never a mix."""
        sets = ["category_code = ?"]
        params: list = [new_code]
        if vetoed is not None:
            sets.append("vetoed = ?")
            params.append(json.dumps(sorted(vetoed)))
        if neg_counts is not None:
            sets.append("neg_counts = ?")
            params.append(json.dumps({str(k): v for k, v in sorted(neg_counts.items())}))
        params.append(image_id)
        cur = self._execute_write(
            f"UPDATE images SET {', '.join(sets)} WHERE image_id = ?", params
        )
        if cur.rowcount == 0:
            raise NotFound(f"no image {image_id}")

    def search_keywords(self, tokens) -> list[int]:
        """Case-insensitive whole-token match, AND semantics across tokens."""
        wanted = [t.lower() for t in tokens if t]
        if not wanted:
            return []
        rows = self._conn().execute(
            "SELECT image_id, keywords FROM images ORDER BY image_id"
        ).fetchall()
        out = []
        for image_id, raw in rows:
            have = {k.lower() for k in json.loads(raw)}
            if all(t in have for t in wanted):
                out.append(int(image_id))
        return out

    # -- queries and feedback ---------------------------------------------

    def put_query(self, predicted_category: int, params: dict) -> int:
        cur = self._execute_write(
            "INSERT INTO queries (predicted_category, timestamp, params)"
            " VALUES (?, ?, ?)",
            (predicted_category, time.time(), json.dumps(params, sort_keys=True)),
        )
        return int(cur.lastrowid)

    def get_query(self, query_id: int) -> QueryRecord:
        row = self._conn().execute(
            "SELECT query_id, predicted_category, timestamp, params"
            " FROM queries WHERE query_id = ?",
            (query_id,),
        ).fetchone()
        if row is None:
            raise NotFound(f"no query {query_id}")
        return QueryRecord(int(row[0]), int(row[1]), float(row[2]), json.loads(row[3]))

    def add_feedback(self, query_id: int, image_id: int, polarity: str) -> None:
        try:
            self._execute_write(
                "INSERT INTO feedback (query_id, image_id, polarity, timestamp)"
                " VALUES (?, ?, ?, ?)",
                (query_id, image_id, polarity, time.time()),
            )
        except sqlite3.IntegrityError as exc:
            raise DuplicateFeedback(
                f"feedback for query {query_id} image {image_id} already recorded"
            ) from exc

    def has_feedback(self, query_id: int, image_id: int) -> bool:
        row = self._conn().execute(
            "SELECT 1 FROM feedback WHERE query_id = ? AND image_id = ?",
            (query_id, image_id),
        ).fetchone()
        return row is not None

    def list_feedback(self) -> list[tuple[int, int, str, float]]:
        rows = self._conn().execute(
            "SELECT query_id, image_id, polarity, timestamp FROM feedback"
            " ORDER BY timestamp, query_id, image_id"
        ).fetchall()
        return [(int(r[0]), int(r[1]), r[2], float(r[3])) for r in rows]

    # -- opaque versioned payloads ----------------------------------------

    def _save_meta(self, key: str, payload: bytes) -> None:
        self._execute_write(
            "INSERT INTO meta (key, value) VALUES (?, ?)"
            " ON CONFLICT(key) DO UPDATE SET value = excluded.value",
            (key, payload),
        )

    def _load_meta(self, key: str) -> bytes:
        row = self._conn().execute(
            "SELECT value FROM meta WHERE key = ?", (key,)
        ).fetchone()
        if row is None:
            raise NotFound(f"no {key} stored")
        return bytes(row[0])

    def save_weights(self, payload: bytes) -> None:
        self._save_meta("weights", payload)

    def load_weights(self) -> bytes:
        return self._load_meta("weights")

    def save_normalization(self, payload: bytes) -> None:
        self._save_meta("normalization", payload)

    def load_normalization(self) -> bytes:
        return self._load_meta("normalization")
