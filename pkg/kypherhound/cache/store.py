"""The graph cache: one SQLite file holding imported graphs and their indexes.

Each graph is stored as its own table ``graph_<n>`` with one text column per
header column (``c0``, ``c1``, ...) holding canonical KGTK surface text. The
catalog tables record where each graph came from, its fingerprint, header and
the indexes built for it so far.
"""

import logging
import os
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from sqlalchemy import Column, Index, MetaData, Table, Text, create_engine, event, func, inspect, select
from sqlalchemy.engine import Connection, Engine
from sqlalchemy.exc import DatabaseError
from sqlalchemy.orm import Session, sessionmaker

from kypherhound.cache.fingerprint import Fingerprint, Freshness, check_freshness, compute_fingerprint
from kypherhound.cache.models import (
    CACHE_FORMAT,
    GRAPH_TABLE_PREFIX,
    Base,
    CacheMeta,
    GraphRecord,
    IndexRecord,
)
from kypherhound.config import Config
from kypherhound.errors import (
    CacheCorruptionError,
    GraphNameCollisionError,
    ImportFailedError,
    KgtkIOError,
    KypherError,
    SchemaError,
    StaleSourceError,
    UnknownGraphError,
)
from kypherhound.model.io import derive_graph_name, read_edges
from kypherhound.model.schema import ColumnSchema
from kypherhound.model.values import format_value

logger = logging.getLogger(__name__)

SQLITE_HEADER = b"SQLite format 3\x00"


@dataclass(frozen=True)
class GraphDescriptor:
    name: str
    source_path: str
    fingerprint: Fingerprint
    schema: ColumnSchema
    indexes: frozenset[str]
    edge_count: int
    table_name: str

    def column_key(self, column: str) -> str:
        """Storage column for a header column."""
        return f"c{self.schema.index_of(column)}"


@dataclass
class CacheStats:
    imports: int = 0
    reimports: int = 0
    index_builds: int = 0
    hash_checks: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "imports": self.imports,
            "reimports": self.reimports,
            "index_builds": self.index_builds,
            "hash_checks": self.hash_checks,
        }


def graph_table(table_name: str, width: int, metadata: MetaData | None = None) -> Table:
    return Table(
        table_name,
        metadata if metadata is not None else MetaData(),
        *(Column(f"c{i}", Text) for i in range(width)),
    )


def _index_name(table_name: str, key: str) -> str:
    return f"ix_{table_name}_{key}"


def _create_engine(path: Path) -> Engine:
    engine = create_engine(
        f"sqlite:///{path}",
        echo=False,
        connect_args={"timeout": Config.BUSY_TIMEOUT},
    )

    # pysqlite issues its own BEGIN lazily; take control so DDL is transactional too.
    @event.listens_for(engine, "connect")
    def _on_connect(dbapi_connection, _record):
        dbapi_connection.isolation_level = None
        cursor = dbapi_connection.cursor()
        cursor.execute("PRAGMA journal_mode=WAL")
        cursor.execute(f"PRAGMA busy_timeout={int(Config.BUSY_TIMEOUT * 1000)}")
        cursor.close()

    @event.listens_for(engine, "begin")
    def _on_begin(conn):
        conn.exec_driver_sql("BEGIN")

    return engine


class CacheHandle:
    """An open graph cache.

    The catalog is loaded at open time and refreshed after every mutation made
    through this handle.
    """

    def __init__(self, path: Path, engine: Engine):
        self.path = path
        self.engine = engine
        self.stats = CacheStats()
        self._session_factory = sessionmaker(bind=engine)
        self._catalog: dict[str, GraphDescriptor] = {}
        self._tables: dict[str, Table] = {}

    @property
    def catalog(self) -> dict[str, GraphDescriptor]:
        return dict(self._catalog)

    def __contains__(self, name: str) -> bool:
        return name in self._catalog

    def __enter__(self) -> "CacheHandle":
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        self.engine.dispose()

    @contextmanager
    def session(self) -> Iterator[Session]:
        session = self._session_factory()
        try:
            yield session
            session.commit()
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()

    def descriptor(self, name: str) -> GraphDescriptor:
        try:
            return self._catalog[name]
        except KeyError:
            raise UnknownGraphError(name, list(self._catalog)) from None

    def table(self, name: str) -> Table:
        """SQLAlchemy table object for a cataloged graph."""
        descriptor = self.descriptor(name)
        table = self._tables.get(descriptor.table_name)
        if table is None:
            table = graph_table(descriptor.table_name, len(descriptor.schema))
            self._tables[descriptor.table_name] = table
        return table

    def reload(self):
        try:
            with self.session() as session:
                records = session.query(GraphRecord).order_by(GraphRecord.name).all()
                self._catalog = {r.name: _to_descriptor(r) for r in records}
        except DatabaseError as e:
            raise CacheCorruptionError(f"cannot read catalog of {self.path}: {e.orig or e}") from e
        except SchemaError as e:
            raise CacheCorruptionError(f"catalog of {self.path} holds an invalid header: {e}") from e
        self._tables = {}

    def connect(self) -> Connection:
        return self.engine.connect()


def _to_descriptor(record: GraphRecord) -> GraphDescriptor:
    return GraphDescriptor(
        name=record.name,
        source_path=record.source_path,
        fingerprint=Fingerprint(record.size, record.mtime_ns, record.content_hash),
        schema=ColumnSchema(record.column_names),
        indexes=frozenset(ix.column for ix in record.indexes),
        edge_count=record.edge_count or 0,
        table_name=record.table_name,
    )


def _check_header(path: Path):
    if not path.exists() or path.stat().st_size == 0:
        return
    with open(path, "rb") as f:
        header = f.read(len(SQLITE_HEADER))
    if header != SQLITE_HEADER:
        raise CacheCorruptionError(f"{path} is not a graph cache (not an SQLite file)")


def _init_catalog(engine: Engine, path: Path):
    inspector = inspect(engine)
    tables = set(inspector.get_table_names())
    if CacheMeta.__tablename__ not in tables:
        if tables:
            raise CacheCorruptionError(f"{path} is an SQLite file but not a graph cache")
        Base.metadata.create_all(engine)
        with Session(engine) as session:
            session.add(CacheMeta(key="format", value=CACHE_FORMAT))
            session.add(CacheMeta(key="next_table", value="1"))
            session.commit()
        logger.info("Created graph cache %s", path)
        return

    missing = {t.name for t in Base.metadata.sorted_tables} - tables
    if missing:
        raise CacheCorruptionError(f"cache {path} is missing catalog table(s): {', '.join(sorted(missing))}")
    with Session(engine) as session:
        fmt = session.get(CacheMeta, "format")
        if fmt is None or fmt.value != CACHE_FORMAT:
            found = fmt.value if fmt else "none"
            raise CacheCorruptionError(f"cache {path} has format {found}, expected {CACHE_FORMAT}")


def _collect_garbage(cache: CacheHandle):
    """Drop graph tables the catalog does not know; fail on cataloged tables that vanished."""
    existing = {t for t in inspect(cache.engine).get_table_names() if t.startswith(GRAPH_TABLE_PREFIX)}
    known = {d.table_name: d.name for d in cache._catalog.values()}
    for table_name, graph in known.items():
        if table_name not in existing:
            raise CacheCorruptionError(f"graph '{graph}' has no backing table {table_name} in {cache.path}")
    orphans = sorted(existing - set(known))
    if orphans:
        with cache.engine.begin() as conn:
            for table_name in orphans:
                logger.warning("Dropping orphan table %s from %s", table_name, cache.path)
                conn.exec_driver_sql(f'DROP TABLE IF EXISTS "{table_name}"')


def open_cache(path: str | os.PathLike) -> CacheHandle:
    """Open (or create) the graph cache at ``path``.

    A directory means ``<dir>/graph-cache.sqlite3``.

    Raises:
        CacheCorruptionError: The file is not a graph cache or its catalog is inconsistent.
    """
    path = Path(path).expanduser()
    if path.is_dir():
        path = path / Config.CACHE_FILENAME
    path.parent.mkdir(parents=True, exist_ok=True)
    _check_header(path)

    engine = _create_engine(path)
    try:
        _init_catalog(engine, path)
        cache = CacheHandle(path, engine)
        cache.reload()
        _collect_garbage(cache)
    except KypherError:
        engine.dispose()
        raise
    except DatabaseError as e:
        engine.dispose()
        raise CacheCorruptionError(f"cannot open graph cache {path}: {e.orig or e}") from e
    logger.debug("Opened graph cache %s with %d graph(s)", path, len(cache._catalog))
    return cache


def _next_table_name(session: Session) -> str:
    counter = session.get(CacheMeta, "next_table")
    number = int(counter.value)
    counter.value = str(number + 1)
    return f"{GRAPH_TABLE_PREFIX}{number}"


def _insert_rows(conn: Connection, table: Table, records, width: int) -> int:
    batch_size = Config.IMPORT_BATCH_SIZE
    keys = [f"c{i}" for i in range(width)]
    insert = table.insert()
    batch = []
    count = 0
    for record in records:
        batch.append(dict(zip(keys, (format_value(v) for v in record.cells), strict=True)))
        if len(batch) >= batch_size:
            conn.execute(insert, batch)
            count += len(batch)
            batch = []
    if batch:
        conn.execute(insert, batch)
        count += len(batch)
    return count


def _load_graph(cache: CacheHandle, path: Path, name: str, fingerprint: Fingerprint) -> GraphDescriptor:
    """Load a file into a new table and swap it into the catalog in one transaction."""
    try:
        schema, records = read_edges(path, node_file_ok=True)
    except KypherError as e:
        raise ImportFailedError(f"cannot import {path} as '{name}': {e}") from e

    try:
        with cache.engine.begin() as conn, Session(bind=conn) as session:
            table_name = _next_table_name(session)
            table = graph_table(table_name, len(schema))
            table.create(conn)
            edge_count = _insert_rows(conn, table, records, len(schema))

            record = session.query(GraphRecord).filter(GraphRecord.name == name).one_or_none()
            old_table = None
            kept_indexes = []
            if record is None:
                record = GraphRecord(name=name)
                session.add(record)
            else:
                old_table = record.table_name
                kept_indexes = [ix.column for ix in record.indexes if ix.column in schema.columns]
                record.indexes.clear()
                # old index rows must be gone before the same columns are recorded again
                session.flush()

            record.source_path = str(path)
            record.table_name = table_name
            record.size = fingerprint.size
            record.mtime_ns = fingerprint.mtime_ns
            record.content_hash = fingerprint.content_hash
            record.columns = "\t".join(schema.columns)
            record.edge_count = edge_count

            for column in kept_indexes:
                key = f"c{schema.index_of(column)}"
                index_name = _index_name(table_name, key)
                Index(index_name, table.c[key]).create(conn)
                record.indexes.append(IndexRecord(column=column, index_name=index_name))
                cache.stats.index_builds += 1
            session.flush()

            if old_table:
                conn.exec_driver_sql(f'DROP TABLE IF EXISTS "{old_table}"')
    except KypherError as e:
        raise ImportFailedError(f"cannot import {path} as '{name}': {e}") from e
    except DatabaseError as e:
        raise ImportFailedError(f"cannot import {path} as '{name}': {e.orig or e}") from e
    finally:
        records.close()

    cache.stats.imports += 1
    cache.reload()
    logger.info("Imported %s as '%s' (%d edges)", path, name, edge_count)
    return cache.descriptor(name)


def import_graph(cache: CacheHandle, file: str | os.PathLike, alias: str | None = None) -> GraphDescriptor:
    """Import a KGTK file under ``alias`` or its derived name.

    Re-importing an unchanged file is a no-op. A name already bound to a
    different source file is an error.
    """
    path = Path(file).expanduser().resolve()
    name = alias or derive_graph_name(path)
    existing = cache._catalog.get(name)
    if existing is not None:
        if existing.source_path != str(path):
            raise GraphNameCollisionError(
                f"graph name '{name}' already refers to {existing.source_path}, not {path}"
            )
        return ensure_fresh(cache, name)

    if not path.is_file():
        raise KgtkIOError(f"input file not found: {path}")
    return _load_graph(cache, path, name, compute_fingerprint(path))


def ensure_fresh(cache: CacheHandle, name: str) -> GraphDescriptor:
    """Reimport ``name`` if its source changed; indexes are rebuilt on the new table."""
    descriptor = cache.descriptor(name)
    path = Path(descriptor.source_path)
    if not path.is_file():
        raise StaleSourceError(name, str(path))

    check = check_freshness(path, descriptor.fingerprint)
    if check.hashed:
        cache.stats.hash_checks += 1
    if check.verdict is Freshness.FRESH:
        return descriptor
    if check.verdict is Freshness.TOUCHED:
        with cache.session() as session:
            record = session.query(GraphRecord).filter(GraphRecord.name == name).one()
            record.mtime_ns = check.current.mtime_ns
        cache.reload()
        return cache.descriptor(name)

    logger.info("Source of '%s' changed, reimporting %s", name, path)
    fingerprint = check.current if check.current.content_hash else compute_fingerprint(path)
    descriptor = _load_graph(cache, path, name, fingerprint)
    cache.stats.reimports += 1
    return descriptor


def ensure_index(cache: CacheHandle, name: str, column: str):
    """Create the index on (graph, column) unless it already exists."""
    descriptor = cache.descriptor(name)
    if not descriptor.schema.has(column):
        raise SchemaError(
            f"graph '{name}' has no column '{column}' (columns: {', '.join(descriptor.schema.columns)})"
        )
    if column in descriptor.indexes:
        return

    key = descriptor.column_key(column)
    index_name = _index_name(descriptor.table_name, key)
    table = cache.table(name)
    with cache.engine.begin() as conn, Session(bind=conn) as session:
        Index(index_name, table.c[key]).create(conn, checkfirst=True)
        record = session.query(GraphRecord).filter(GraphRecord.name == name).one()
        record.indexes.append(IndexRecord(column=column, index_name=index_name))
        session.flush()
    cache.stats.index_builds += 1
    cache.reload()
    logger.info("Built index %s on %s.%s", index_name, name, column)


def list_graphs(cache: CacheHandle) -> list[GraphDescriptor]:
    return [cache._catalog[name] for name in sorted(cache._catalog)]


def drop_graph(cache: CacheHandle, name: str):
    descriptor = cache.descriptor(name)
    with cache.engine.begin() as conn, Session(bind=conn) as session:
        record = session.query(GraphRecord).filter(GraphRecord.name == name).one()
        session.delete(record)
        session.flush()
        conn.exec_driver_sql(f'DROP TABLE IF EXISTS "{descriptor.table_name}"')
    cache.reload()
    logger.info("Dropped graph '%s'", name)


def count_rows(cache: CacheHandle, name: str) -> int:
    """Row count straight from the table, for consistency checks."""
    table = cache.table(name)
    with cache.connect() as conn:
        return conn.execute(select(func.count()).select_from(table)).scalar_one()
