"""Streaming read/write of KGTK TSV edge files."""

import gzip
import io
import logging
import os
import zlib
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from functools import lru_cache
from pathlib import Path
from typing import BinaryIO

from kypherhound.errors import EdgeFormatError, KgtkIOError, ValueParseError
from kypherhound.model.schema import LABEL, NODE1, ColumnSchema, EdgeRecord
from kypherhound.model.values import EMPTY, KgtkValue, format_value, parse_value

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"

Source = str | os.PathLike | BinaryIO

# Labels and popular nodes repeat constantly; values are immutable so caching is safe.
cached_parse_value = lru_cache(maxsize=1 << 16)(parse_value)


def is_gzip(data: bytes) -> bool:
    return data[:2] == GZIP_MAGIC


def derive_graph_name(path: str | os.PathLike) -> str:
    """labels.tsv.gz -> labels, p31.tsv -> p31, class.count.tsv.gz -> class.count"""
    name = Path(path).name
    for suffix in (".gz", ".tsv"):
        if name.endswith(suffix) and len(name) > len(suffix):
            name = name[: -len(suffix)]
    return name


def _sniff(stream: BinaryIO, size: int = 2) -> bytes:
    if hasattr(stream, "peek"):
        return stream.peek(size)[:size]
    position = stream.tell()
    head = stream.read(size)
    stream.seek(position)
    return head


def _open_source(source: Source) -> tuple[BinaryIO, BinaryIO, str, bool]:
    """Open a path or adopt a byte stream, unwrapping gzip by suffix or magic bytes."""
    if isinstance(source, (str, os.PathLike)):
        name = os.fspath(source)
        try:
            raw = open(name, "rb")
        except OSError as e:
            raise KgtkIOError(f"cannot open {name}: {e.strerror or e}") from e
        owned = True
    else:
        raw, name, owned = source, getattr(source, "name", "<stream>"), False
        if not isinstance(name, str):
            name = "<stream>"

    head = _sniff(raw)
    if is_gzip(head) or (name.endswith(".gz") and head):
        return gzip.GzipFile(fileobj=raw, mode="rb"), raw, name, owned
    return raw, raw, name, owned


def _split_line(line: str) -> list[str]:
    return line.rstrip("\r\n").split("\t")


def _record(cells: list[str], schema: ColumnSchema, line_no: int, source: str) -> EdgeRecord:
    if len(cells) != len(schema):
        raise EdgeFormatError(f"expected {len(schema)} columns, found {len(cells)}", line_no, source)
    try:
        values = tuple(cached_parse_value(cell) for cell in cells)
    except ValueParseError as e:
        raise EdgeFormatError(str(e), line_no, source) from e
    node1 = schema.roles[NODE1]
    if values[node1] is EMPTY:
        raise EdgeFormatError("node1 is empty", line_no, source)
    label = schema.roles.get(LABEL)
    if label is not None and values[label] is EMPTY:
        raise EdgeFormatError("label is empty", line_no, source)
    return EdgeRecord(values)


def _records(
    text: io.TextIOWrapper,
    schema: ColumnSchema,
    first: list[str] | None,
    start_line: int,
    source: str,
    closer,
) -> Iterator[EdgeRecord]:
    line_no = start_line
    try:
        if first is not None:
            yield _record(first, schema, line_no, source)
        for line in text:
            line_no += 1
            if not line.strip("\r\n"):
                continue
            yield _record(_split_line(line), schema, line_no, source)
    except UnicodeDecodeError as e:
        raise KgtkIOError(f"{source}:{line_no + 1}: not valid UTF-8") from e
    except (OSError, EOFError, zlib.error) as e:
        raise KgtkIOError(f"{source}: read failed near line {line_no}: {e}") from e
    finally:
        closer()


def read_edges(
    source: Source, header_expected: bool = True, *, node_file_ok: bool = False
) -> tuple[ColumnSchema, Iterator[EdgeRecord]]:
    """Read a KGTK file lazily.

    Args:
        source: Path or binary stream. Gzip is detected by suffix and magic bytes.
        header_expected: When False the schema is inferred from the first row's width.
        node_file_ok: Accept headers with node1 but no label/node2 (node lists).

    Returns:
        The schema and a generator of records. The generator owns the
        underlying file and closes it when exhausted or closed.
    """
    stream, raw, name, owned = _open_source(source)
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")

    def closer():
        if owned or stream is not raw:
            text.close()
        else:
            text.detach()
        if owned:
            raw.close()

    try:
        line_no = 0
        first_line = ""
        while not first_line.strip("\r\n"):
            first_line = text.readline()
            line_no += 1
            if not first_line:
                break
        if header_expected:
            if not first_line:
                raise EdgeFormatError("file has no header line", 1, name)
            schema = ColumnSchema(_split_line(first_line)).validate(node_file_ok)
            first = None
        elif first_line:
            first = _split_line(first_line)
            schema = ColumnSchema.headerless(len(first))
        else:
            schema, first = ColumnSchema.headerless(3), None
    except UnicodeDecodeError as e:
        closer()
        raise KgtkIOError(f"{name}: header is not valid UTF-8") from e
    except (OSError, EOFError, zlib.error) as e:
        closer()
        raise KgtkIOError(f"{name}: read failed: {e}") from e
    except Exception:
        closer()
        raise

    return schema, _records(text, schema, first, line_no, name, closer)


@contextmanager
def open_edges(source: Source, header_expected: bool = True, *, node_file_ok: bool = False):
    """Context-managed read_edges that always releases the file."""
    schema, records = read_edges(source, header_expected, node_file_ok=node_file_ok)
    try:
        yield schema, records
    finally:
        records.close()


def _row_cells(row: EdgeRecord | Iterable[KgtkValue]) -> tuple[KgtkValue, ...]:
    return row.cells if isinstance(row, EdgeRecord) else tuple(row)


def write_edges(
    sink: Source,
    schema: ColumnSchema,
    rows: Iterable[EdgeRecord | Iterable[KgtkValue]],
    compress: bool | None = None,
) -> int:
    """Write a header and rows with LF line endings.

    Paths ending in .gz are compressed unless ``compress`` says otherwise.
    Gzip output carries no timestamp or file name, so identical rows give
    identical bytes.

    Returns:
        Number of rows written.
    """
    if isinstance(sink, (str, os.PathLike)):
        name = os.fspath(sink)
        try:
            raw = open(name, "wb")
        except OSError as e:
            raise KgtkIOError(f"cannot write {name}: {e.strerror or e}") from e
        owned = True
        if compress is None:
            compress = name.endswith(".gz")
    else:
        raw, name, owned = sink, getattr(sink, "name", "<stream>"), False

    target = gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) if compress else raw
    text = io.TextIOWrapper(target, encoding="utf-8", newline="\n")
    width = len(schema)
    count = 0
    try:
        text.write("\t".join(schema.columns) + "\n")
        for row in rows:
            cells = _row_cells(row)
            if len(cells) != width:
                raise EdgeFormatError(f"row {count + 1} has {len(cells)} cells, schema has {width}")
            text.write("\t".join(format_value(v) for v in cells) + "\n")
            count += 1
        text.flush()
    except OSError as e:
        raise KgtkIOError(f"write to {name} failed: {e}") from e
    finally:
        text.detach()
        if compress:
            target.close()
        if owned:
            raw.close()
        else:
            raw.flush()
    return count
