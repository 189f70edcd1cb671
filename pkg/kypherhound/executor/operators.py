"""Row iterators for each logical operator.

Rows are tuples laid out as the operator's ``outputs``. Scans, filters,
projections, joins and limits stream; sort and aggregate materialize their
input, and distinct keeps the rows it has seen.
"""

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from itertools import islice

from sqlalchemy import and_, select
from sqlalchemy.engine import Connection

from kypherhound.config import Config
from kypherhound.errors import ExecutionError, UnknownGraphError
from kypherhound.executor.evaluate import compile_expression
from kypherhound.model.io import cached_parse_value
from kypherhound.model.values import EMPTY, Number, format_value, is_true, sort_key
from kypherhound.planner.plan import (
    Aggregate,
    Distinct,
    Filter,
    Join,
    LeftOuterJoin,
    Limit,
    Operator,
    Project,
    Scan,
    Sort,
)
from kypherhound.query.ast import AGGREGATES, BoolOp, Call, Comparison, Expression, Literal, Not, Star, walk

logger = logging.getLogger(__name__)

Row = tuple

JOIN_STRATEGIES = ("hash", "index")


@dataclass
class ExecutionContext:
    cache: object  # CacheHandle
    conn: Connection
    join_strategy: str | None = None


def run_operator(op: Operator, ctx: ExecutionContext) -> Iterator[Row]:
    runner = _RUNNERS.get(type(op))
    if runner is None:
        raise ExecutionError(f"no executor for {type(op).__name__}")
    return runner(op, ctx)


# Scans


def _scan_statement(scan: Scan, ctx: ExecutionContext, lookups: tuple[tuple[str, object], ...] = ()):
    """Build the SELECT for a scan, or None when it can match nothing.

    Returns (statement, layout) where layout maps each output to a result
    column position, or to None when the graph lacks that column.
    """
    try:
        descriptor = ctx.cache.descriptor(scan.graph)
        table = ctx.cache.table(scan.graph)
    except UnknownGraphError as e:
        raise ExecutionError(f"plan references graph '{scan.graph}' which is not in the cache") from e
    schema = descriptor.schema

    conditions = []
    for column, value in tuple(scan.constraints) + tuple(lookups):
        if not schema.has(column):
            return None, ()
        conditions.append(table.c[descriptor.column_key(column)] == format_value(value))
    for a, b in scan.equalities:
        if not (schema.has(a) and schema.has(b)):
            return None, ()
        ca, cb = table.c[descriptor.column_key(a)], table.c[descriptor.column_key(b)]
        conditions.extend([ca == cb, ca != ""])

    selected = []
    layout = []
    for _name, column in scan.bindings:
        if schema.has(column):
            key = descriptor.column_key(column)
            if key not in selected:
                selected.append(key)
            layout.append(selected.index(key))
        else:
            layout.append(None)

    # A scan that binds nothing still yields one empty row per matching edge.
    columns = [table.c[k] for k in selected] or [table.c.c0]
    statement = select(*columns)
    if conditions:
        statement = statement.where(and_(*conditions))
    return statement, tuple(layout)


def _fetch(scan: Scan, ctx: ExecutionContext, lookups=()) -> Iterator[Row]:
    statement, layout = _scan_statement(scan, ctx, lookups)
    if statement is None:
        return
    result = ctx.conn.execution_options(yield_per=Config.FETCH_SIZE).execute(statement)
    try:
        for record in result:
            yield tuple(EMPTY if i is None else cached_parse_value(record[i]) for i in layout)
    finally:
        result.close()


def _run_scan(op: Scan, ctx: ExecutionContext) -> Iterator[Row]:
    return _fetch(op, ctx)


def _run_filter(op: Filter, ctx: ExecutionContext) -> Iterator[Row]:
    predicate = compile_expression(op.predicate, op.child.outputs)
    for row in run_operator(op.child, ctx):
        if is_true(predicate(row)):
            yield row


# Joins


def _key_positions(columns: tuple[str, ...], names) -> list[int]:
    return [columns.index(name) for name in names]


def _inner_scan(op: Operator) -> tuple[Scan, list[Expression]] | None:
    """A scan possibly wrapped in filters, as the inner side of an index lookup join."""
    predicates = []
    while isinstance(op, Filter):
        predicates.append(op.predicate)
        op = op.child
    if isinstance(op, Scan):
        return op, list(reversed(predicates))
    return None


def choose_join_strategy(op: Join, ctx: ExecutionContext) -> str:
    inner = _inner_scan(op.right)
    if inner is None or not op.pairs:
        return "hash"
    if ctx.join_strategy is not None:
        return ctx.join_strategy
    scan, _ = inner
    if op.left.estimate <= Config.INL_RATIO * scan.edge_count:
        return "index"
    return "hash"


def _hash_join(op: Join, ctx: ExecutionContext) -> Iterator[Row]:
    left_cols, right_cols = op.left.outputs, op.right.outputs
    left_key = _key_positions(left_cols, [a for a, _ in op.pairs])
    right_key = _key_positions(right_cols, [b for _, b in op.pairs])
    extra = [i for i, name in enumerate(right_cols) if name not in left_cols]

    build_left = op.left.estimate < op.right.estimate
    build_op, probe_op = (op.left, op.right) if build_left else (op.right, op.left)
    build_key, probe_key = (left_key, right_key) if build_left else (right_key, left_key)

    table: dict[tuple, list[Row]] = {}
    for row in run_operator(build_op, ctx):
        key = tuple(row[i] for i in build_key)
        if EMPTY not in key:
            table.setdefault(key, []).append(row)
    if not table:
        return

    for row in run_operator(probe_op, ctx):
        key = tuple(row[i] for i in probe_key)
        if EMPTY in key:
            continue
        for match in table.get(key, ()):
            left, right = (match, row) if build_left else (row, match)
            yield left + tuple(right[i] for i in extra)


def _index_join(op: Join, ctx: ExecutionContext) -> Iterator[Row]:
    scan, predicates = _inner_scan(op.right)
    left_cols, right_cols = op.left.outputs, op.right.outputs
    lookup_columns = [next(c for bound, c in scan.bindings if bound == name) for _, name in op.pairs]
    left_key = _key_positions(left_cols, [a for a, _ in op.pairs])
    extra = [i for i, name in enumerate(right_cols) if name not in left_cols]
    filters = [compile_expression(p, right_cols) for p in predicates]

    for row in run_operator(op.left, ctx):
        key = [row[i] for i in left_key]
        if EMPTY in key:
            continue
        lookups = tuple(zip(lookup_columns, key, strict=True))
        for match in _fetch(scan, ctx, lookups):
            if all(is_true(f(match)) for f in filters):
                yield row + tuple(match[i] for i in extra)


def _run_join(op: Join, ctx: ExecutionContext) -> Iterator[Row]:
    strategy = choose_join_strategy(op, ctx)
    logger.info("%s join on %s", strategy, ", ".join(a for a, _ in op.pairs) or "nothing (cross product)")
    if strategy == "index":
        return _index_join(op, ctx)
    return _hash_join(op, ctx)


def _run_left_outer_join(op: LeftOuterJoin, ctx: ExecutionContext) -> Iterator[Row]:
    left_cols, right_cols = op.left.outputs, op.right.outputs
    left_key = _key_positions(left_cols, [a for a, _ in op.pairs])
    right_key = _key_positions(right_cols, [b for _, b in op.pairs])
    extra = [i for i, name in enumerate(right_cols) if name not in left_cols]
    padding = (EMPTY,) * len(extra)
    condition = compile_expression(op.condition, op.outputs) if op.condition is not None else None

    table: dict[tuple, list[Row]] = {}
    for row in run_operator(op.right, ctx):
        key = tuple(row[i] for i in right_key)
        if EMPTY not in key:
            table.setdefault(key, []).append(row)

    for row in run_operator(op.left, ctx):
        key = tuple(row[i] for i in left_key)
        matched = False
        if EMPTY not in key:
            for match in table.get(key, ()):
                combined = row + tuple(match[i] for i in extra)
                if condition is None or is_true(condition(combined)):
                    matched = True
                    yield combined
        if not matched:
            yield row + padding


# Result shaping


def _run_project(op: Project, ctx: ExecutionContext) -> Iterator[Row]:
    functions = [compile_expression(expr, op.child.outputs) for _, expr in op.items]
    for row in run_operator(op.child, ctx):
        yield tuple(f(row) for f in functions)


class _Counter:
    """Accumulator for one count() call within one group."""

    __slots__ = ("argument", "count", "seen")

    def __init__(self, argument, distinct: bool):
        self.argument = argument
        self.count = 0
        self.seen = set() if distinct else None

    def add(self, row: Row):
        if self.argument is None:
            self.count += 1
            return
        value = self.argument(row)
        if value is EMPTY:
            return
        if self.seen is not None:
            self.seen.add(value)
        else:
            self.count += 1

    @property
    def result(self) -> int:
        return len(self.seen) if self.seen is not None else self.count


def _replace_calls(expr: Expression, values: dict[Call, int]) -> Expression:
    if isinstance(expr, Call) and expr in values:
        return Literal(Number(values[expr]))
    if isinstance(expr, Comparison):
        return Comparison(expr.op, _replace_calls(expr.left, values), _replace_calls(expr.right, values))
    if isinstance(expr, BoolOp):
        return BoolOp(expr.op, _replace_calls(expr.left, values), _replace_calls(expr.right, values))
    if isinstance(expr, Not):
        return Not(_replace_calls(expr.operand, values))
    if isinstance(expr, Call):
        return Call(expr.name, tuple(_replace_calls(a, values) for a in expr.args), expr.distinct)
    return expr


def _run_aggregate(op: Aggregate, ctx: ExecutionContext) -> Iterator[Row]:
    columns = op.child.outputs
    key_functions = [compile_expression(expr, columns) for _, expr in op.group_keys]
    calls = list(
        dict.fromkeys(
            node
            for _, expr in op.aggregates
            for node in walk(expr)
            if isinstance(node, Call) and node.name in AGGREGATES
        )
    )
    arguments = [
        None if isinstance(call.args[0], Star) else compile_expression(call.args[0], columns)
        for call in calls
    ]

    groups: dict[tuple, list[_Counter]] = {}
    for row in run_operator(op.child, ctx):
        key = tuple(f(row) for f in key_functions)
        counters = groups.get(key)
        if counters is None:
            counters = groups[key] = [
                _Counter(argument, call.distinct) for call, argument in zip(calls, arguments, strict=True)
            ]
        for counter in counters:
            counter.add(row)

    key_aliases = [alias for alias, _ in op.group_keys]
    for key, counters in groups.items():
        values = {call: counter.result for call, counter in zip(calls, counters, strict=True)}
        named = dict(zip(key_aliases, key, strict=True))
        for alias, expr in op.aggregates:
            named[alias] = compile_expression(_replace_calls(expr, values), ())(())
        yield tuple(named[alias] for alias in op.outputs)


def _run_distinct(op: Distinct, ctx: ExecutionContext) -> Iterator[Row]:
    seen = set()
    for row in run_operator(op.child, ctx):
        if row not in seen:
            seen.add(row)
            yield row


def _run_sort(op: Sort, ctx: ExecutionContext) -> Iterator[Row]:
    rows = list(run_operator(op.child, ctx))
    # Stable passes from the last key to the first give a composite order.
    for key in reversed(op.keys):
        function = compile_expression(key.expression, op.child.outputs)
        rows.sort(key=lambda row: sort_key(function(row)), reverse=key.descending)
    return iter(rows)


def _run_limit(op: Limit, ctx: ExecutionContext) -> Iterator[Row]:
    return islice(run_operator(op.child, ctx), op.count)


_RUNNERS = {
    Scan: _run_scan,
    Filter: _run_filter,
    Join: _run_join,
    LeftOuterJoin: _run_left_outer_join,
    Project: _run_project,
    Aggregate: _run_aggregate,
    Distinct: _run_distinct,
    Sort: _run_sort,
    Limit: _run_limit,
}
