# stage_tools/kv_tool.py
"""
Key-value layer behind the ESG maps and the term dictionary.

Two interchangeable backends:
  - memory: plain dicts (default, desk-scale runs)
  - disk:   one sqlite database file, one table per map (large dumps)

Keys and values are integers (term ids and set ids) except for the term index,
which maps (kind, lexical) pairs to integer ids.
"""

from __future__ import annotations

import sqlite3
import tempfile
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple

MEMORY = "memory"
DISK = "disk"
BACKENDS = (MEMORY, DISK)


class ScalarMap:
    """int -> int map."""

    def get(self, key: int, default: Optional[int] = None) -> Optional[int]:
        raise NotImplementedError

    def __getitem__(self, key: int) -> int:
        value = self.get(key)
        if value is None:
            raise KeyError(key)
        return value

    def __setitem__(self, key: int, value: int) -> None:
        raise NotImplementedError

    def __delitem__(self, key: int) -> None:
        raise NotImplementedError

    def __contains__(self, key: int) -> bool:
        return self.get(key) is not None

    def __len__(self) -> int:
        raise NotImplementedError

    def items(self) -> Iterator[Tuple[int, int]]:
        raise NotImplementedError

    def keys(self) -> Iterator[int]:
        return (k for k, _ in self.items())


class SetMultiMap:
    """int -> set[int] multi-map. A key whose set becomes empty disappears."""

    def get(self, key: int) -> Set[int]:
        raise NotImplementedError

    def add(self, key: int, value: int) -> bool:
        """Insert and report whether the pair was new."""
        raise NotImplementedError

    def discard(self, key: int, value: int) -> None:
        raise NotImplementedError

    def put(self, key: int, values: Iterable[int]) -> None:
        raise NotImplementedError

    def pop(self, key: int) -> Set[int]:
        raise NotImplementedError

    def __contains__(self, key: int) -> bool:
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError

    def keys(self) -> Iterator[int]:
        raise NotImplementedError

    def items(self) -> Iterator[Tuple[int, Set[int]]]:
        for key in list(self.keys()):
            yield key, self.get(key)

    def pair_count(self) -> int:
        raise NotImplementedError


class MemoryScalarMap(ScalarMap):
    def __init__(self) -> None:
        self._data: Dict[int, int] = {}

    def get(self, key: int, default: Optional[int] = None) -> Optional[int]:
        return self._data.get(key, default)

    def __getitem__(self, key: int) -> int:
        return self._data[key]

    def __setitem__(self, key: int, value: int) -> None:
        self._data[key] = value

    def __delitem__(self, key: int) -> None:
        del self._data[key]

    def __contains__(self, key: int) -> bool:
        return key in self._data

    def __len__(self) -> int:
        return len(self._data)

    def items(self) -> Iterator[Tuple[int, int]]:
        return iter(list(self._data.items()))

    def keys(self) -> Iterator[int]:
        return iter(list(self._data))


class MemorySetMultiMap(SetMultiMap):
    def __init__(self) -> None:
        self._data: Dict[int, Set[int]] = {}

    def get(self, key: int) -> Set[int]:
        return set(self._data.get(key, ()))

    def add(self, key: int, value: int) -> bool:
        values = self._data.setdefault(key, set())
        if value in values:
            return False
        values.add(value)
        return True

    def discard(self, key: int, value: int) -> None:
        values = self._data.get(key)
        if values is None:
            return
        values.discard(value)
        if not values:
            del self._data[key]

    def put(self, key: int, values: Iterable[int]) -> None:
        values = set(values)
        if values:
            self._data[key] = values
        else:
            self._data.pop(key, None)

    def pop(self, key: int) -> Set[int]:
        return self._data.pop(key, set())

    def __contains__(self, key: int) -> bool:
        return key in self._data

    def __len__(self) -> int:
        return len(self._data)

    def keys(self) -> Iterator[int]:
        return iter(list(self._data))

    def items(self) -> Iterator[Tuple[int, Set[int]]]:
        return ((k, set(v)) for k, v in list(self._data.items()))

    def pair_count(self) -> int:
        return sum(len(v) for v in self._data.values())


class SqliteScalarMap(ScalarMap):
    def __init__(self, conn: sqlite3.Connection, table: str) -> None:
        self._conn = conn
        self._table = table
        conn.execute(f"CREATE TABLE IF NOT EXISTS {table} (k INTEGER PRIMARY KEY, v INTEGER NOT NULL)")

    def get(self, key: int, default: Optional[int] = None) -> Optional[int]:
        row = self._conn.execute(f"SELECT v FROM {self._table} WHERE k = ?", (key,)).fetchone()
        return row[0] if row else default

    def __setitem__(self, key: int, value: int) -> None:
        self._conn.execute(f"INSERT OR REPLACE INTO {self._table} (k, v) VALUES (?, ?)", (key, value))

    def __delitem__(self, key: int) -> None:
        cur = self._conn.execute(f"DELETE FROM {self._table} WHERE k = ?", (key,))
        if cur.rowcount == 0:
            raise KeyError(key)

    def __len__(self) -> int:
        return self._conn.execute(f"SELECT COUNT(*) FROM {self._table}").fetchone()[0]

    def items(self) -> Iterator[Tuple[int, int]]:
        rows = self._conn.execute(f"SELECT k, v FROM {self._table} ORDER BY k").fetchall()
        return iter([(k, v) for k, v in rows])


class SqliteSetMultiMap(SetMultiMap):
    def __init__(self, conn: sqlite3.Connection, table: str) -> None:
        self._conn = conn
        self._table = table
        conn.execute(
            f"CREATE TABLE IF NOT EXISTS {table} "
            f"(k INTEGER NOT NULL, v INTEGER NOT NULL, PRIMARY KEY (k, v)) WITHOUT ROWID"
        )

    def get(self, key: int) -> Set[int]:
        rows = self._conn.execute(f"SELECT v FROM {self._table} WHERE k = ?", (key,)).fetchall()
        return {r[0] for r in rows}

    def add(self, key: int, value: int) -> bool:
        cur = self._conn.execute(f"INSERT OR IGNORE INTO {self._table} (k, v) VALUES (?, ?)", (key, value))
        return cur.rowcount == 1

    def discard(self, key: int, value: int) -> None:
        self._conn.execute(f"DELETE FROM {self._table} WHERE k = ? AND v = ?", (key, value))

    def put(self, key: int, values: Iterable[int]) -> None:
        self._conn.execute(f"DELETE FROM {self._table} WHERE k = ?", (key,))
        self._conn.executemany(
            f"INSERT OR IGNORE INTO {self._table} (k, v) VALUES (?, ?)", [(key, v) for v in values]
        )

    def pop(self, key: int) -> Set[int]:
        values = self.get(key)
        self._conn.execute(f"DELETE FROM {self._table} WHERE k = ?", (key,))
        return values

    def __contains__(self, key: int) -> bool:
        row = self._conn.execute(f"SELECT 1 FROM {self._table} WHERE k = ? LIMIT 1", (key,)).fetchone()
        return row is not None

    def __len__(self) -> int:
        return self._conn.execute(f"SELECT COUNT(DISTINCT k) FROM {self._table}").fetchone()[0]

    def keys(self) -> Iterator[int]:
        rows = self._conn.execute(f"SELECT DISTINCT k FROM {self._table} ORDER BY k").fetchall()
        return iter([r[0] for r in rows])

    def pair_count(self) -> int:
        return self._conn.execute(f"SELECT COUNT(*) FROM {self._table}").fetchone()[0]


class SqliteTermIndex:
    """(kind, lexical) <-> id table used once the term dictionary spills to disk."""

    def __init__(self, conn: sqlite3.Connection, table: str = "terms") -> None:
        self._conn = conn
        self._table = table
        conn.execute(
            f"CREATE TABLE IF NOT EXISTS {table} "
            f"(id INTEGER PRIMARY KEY, kind TEXT NOT NULL, lexical TEXT NOT NULL, UNIQUE (kind, lexical))"
        )

    def find(self, kind: str, lexical: str) -> Optional[int]:
        row = self._conn.execute(
            f"SELECT id FROM {self._table} WHERE kind = ? AND lexical = ?", (kind, lexical)
        ).fetchone()
        return row[0] if row else None

    def get(self, term_id: int) -> Optional[Tuple[str, str]]:
        row = self._conn.execute(f"SELECT kind, lexical FROM {self._table} WHERE id = ?", (term_id,)).fetchone()
        return (row[0], row[1]) if row else None

    def insert(self, term_id: int, kind: str, lexical: str) -> None:
        self._conn.execute(
            f"INSERT INTO {self._table} (id, kind, lexical) VALUES (?, ?, ?)", (term_id, kind, lexical)
        )

    def insert_many(self, rows: List[Tuple[int, str, str]]) -> None:
        self._conn.executemany(f"INSERT INTO {self._table} (id, kind, lexical) VALUES (?, ?, ?)", rows)


class KeyValueBackend:
    """
    Factory for the named maps of one run. `disk` keeps everything in a single
    sqlite file (a temporary one unless a path is given).
    """

    def __init__(self, kind: str = MEMORY, path: Optional[Path] = None) -> None:
        if kind not in BACKENDS:
            raise ValueError(f"unknown storage backend: {kind!r}")
        self.kind = kind
        self._conn: Optional[sqlite3.Connection] = None
        self._tmpdir: Optional[tempfile.TemporaryDirectory] = None
        if kind == DISK:
            if path is None:
                self._tmpdir = tempfile.TemporaryDirectory(prefix="esg-kv-")
                path = Path(self._tmpdir.name) / "esg.sqlite"
            self.path: Optional[Path] = Path(path)
            self._conn = sqlite3.connect(str(self.path), check_same_thread=False)
            self._conn.execute("PRAGMA journal_mode = OFF")
            self._conn.execute("PRAGMA synchronous = OFF")
        else:
            self.path = None
        self._prefixes = 0

    def fresh_prefix(self, stem: str) -> str:
        """Table-name prefix unique within this backend."""
        self._prefixes += 1
        return f"{stem}{self._prefixes}"

    @classmethod
    def memory(cls) -> "KeyValueBackend":
        return cls(MEMORY)

    @classmethod
    def disk(cls, path: Optional[Path] = None) -> "KeyValueBackend":
        return cls(DISK, path)

    def scalar_map(self, name: str) -> ScalarMap:
        if self._conn is None:
            return MemoryScalarMap()
        return SqliteScalarMap(self._conn, name)

    def set_multimap(self, name: str) -> SetMultiMap:
        if self._conn is None:
            return MemorySetMultiMap()
        return SqliteSetMultiMap(self._conn, name)

    def term_index(self, name: str = "terms") -> SqliteTermIndex:
        if self._conn is None:
            raise ValueError("the memory backend has no term index table")
        return SqliteTermIndex(self._conn, name)

    def close(self) -> None:
        if self._conn is not None:
            self._conn.close()
            self._conn = None
        if self._tmpdir is not None:
            self._tmpdir.cleanup()
            self._tmpdir = None
