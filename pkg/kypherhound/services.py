"""Query orchestration shared by the CLI and the use-case runner."""

import logging
import os
import sys
import tempfile
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO

from kypherhound.cache.store import (
    CacheHandle,
    CacheStats,
    ensure_fresh,
    ensure_index,
    import_graph,
    open_cache,
)
from kypherhound.config import Config
from kypherhound.errors import KgtkIOError, UsageError
from kypherhound.executor.engine import execute
from kypherhound.model.io import derive_graph_name, write_edges
from kypherhound.model.schema import ColumnSchema
from kypherhound.planner.compiler import bind_graphs, compile_plan, explain, required_indexes
from kypherhound.query.ast import InputSpec
from kypherhound.query.parser import assemble_query

logger = logging.getLogger(__name__)

STDOUT = "-"


@dataclass
class Invocation:
    """One query invocation as given on the command line."""

    inputs: list[InputSpec]
    match: str
    opts: list[str] = field(default_factory=list)
    owheres: list[str | None] = field(default_factory=list)
    where: str | None = None
    returns: str | None = None
    order_by: str | None = None
    limit: int | None = None
    output: str | None = None
    cache: str | None = None
    graph_dir: str | None = None
    explain: bool = False
    join_strategy: str | None = None

    def __post_init__(self):
        if not self.inputs:
            raise UsageError("at least one input file (-i) is required")
        if not self.match or not self.match.strip():
            raise UsageError("--match is required")


@dataclass
class QueryOutcome:
    columns: tuple[str, ...] = ()
    rows: int = 0
    plan: str | None = None
    stats: CacheStats = field(default_factory=CacheStats)


def find_graph_file(text: str, graph_dir: Path | None) -> Path | None:
    """An existing path, else the first of ``<graph_dir>/<text>{.tsv,.tsv.gz,}`` that exists."""
    path = Path(text).expanduser()
    if path.is_file():
        return path
    if graph_dir is not None:
        for suffix in Config.GRAPH_FILE_SUFFIXES:
            candidate = graph_dir / f"{text}{suffix}"
            if candidate.is_file():
                return candidate
    return None


def resolve_input(cache: CacheHandle, spec: InputSpec, graph_dir: Path | None) -> InputSpec:
    """Make sure the graph an input refers to is imported and fresh.

    An existing path wins, then ``<graph-dir>/<name>{.tsv,.tsv.gz,}``, then a
    graph of that name already in the cache.

    Returns:
        The input with its graph name made explicit.
    """
    name = spec.name
    path = find_graph_file(spec.path, graph_dir)
    if path is not None:
        import_graph(cache, path, name)
        return InputSpec(spec.path, name)

    cached = derive_graph_name(spec.path)
    if cached in cache:
        if name == cached:
            ensure_fresh(cache, cached)
        else:
            source = ensure_fresh(cache, cached).source_path
            import_graph(cache, source, name)
        return InputSpec(spec.path, name)

    where = f", in {graph_dir}" if graph_dir is not None else ""
    raise KgtkIOError(f"input not found: {spec.path} (no such file{where} or cached graph)")


def _output_stream(output: str | None, stdout: BinaryIO | None) -> BinaryIO | None:
    """The byte stream to write to, or None when output goes to a file."""
    if output is None or output == STDOUT:
        return stdout if stdout is not None else sys.stdout.buffer
    return None


def write_atomically(target: str | os.PathLike, write) -> int:
    """Call ``write(path)`` on a temporary file next to ``target``, then rename it into place."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".part", dir=target.parent)
    os.close(fd)
    try:
        count = write(temp_name)
        os.replace(temp_name, target)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise
    return count


def write_result(
    output: str | None, schema: ColumnSchema, rows: Iterable, stdout: BinaryIO | None = None
) -> int:
    """Write rows to ``output`` (``-`` for stdout), gzip-compressed when the name ends in .gz."""
    stream = _output_stream(output, stdout)
    if stream is not None:
        return write_edges(stream, schema, rows)
    compress = str(output).endswith(".gz")
    return write_atomically(output, lambda p: write_edges(p, schema, rows, compress=compress))


def run_query(invocation: Invocation, stdout: BinaryIO | None = None) -> QueryOutcome:
    """Import inputs, plan, build indexes, execute and write the result.

    Args:
        invocation: The parsed command line.
        stdout: Byte stream for ``-o -``; defaults to the process stdout.
    """
    cache_path = Config.get_cache_path(invocation.cache)
    graph_dir = Config.get_graph_dir(invocation.graph_dir)

    with open_cache(cache_path) as cache:
        inputs = [resolve_input(cache, spec, graph_dir) for spec in invocation.inputs]
        spec = assemble_query(
            inputs,
            invocation.match,
            invocation.opts,
            where_text=invocation.where,
            return_text=invocation.returns,
            order_text=invocation.order_by,
            limit=invocation.limit,
            opt_where_texts=invocation.owheres,
        )
        plan = compile_plan(bind_graphs(spec, cache))
        stream = _output_stream(invocation.output, stdout)

        if invocation.explain:
            text = explain(plan)
            if stream is not None:
                stream.write(text.encode("utf-8"))
                stream.flush()
            else:
                write_atomically(invocation.output, lambda p: Path(p).write_text(text, encoding="utf-8"))
            return QueryOutcome(plan.outputs, 0, text, cache.stats)

        for graph, column in sorted(required_indexes(plan)):
            ensure_index(cache, graph, column)

        schema, rows = execute(plan, cache, invocation.join_strategy)
        try:
            count = write_result(invocation.output, schema, rows, stdout)
        finally:
            rows.close()
        logger.info("Wrote %d row(s) with columns %s", count, ", ".join(schema.columns))
        return QueryOutcome(schema.columns, count, None, cache.stats)
