"""Brute-force reference evaluator.

Evaluates a QuerySpec by enumerating every combination of edges that fits the
patterns, then filters, groups, sorts and cuts in the plainest way possible.
It deliberately shares no code with the planner or executor so the two can be
checked against each other.
"""

import logging
import os
from collections import Counter
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from decimal import ROUND_DOWN
from functools import cmp_to_key

from kypherhound.errors import KypherError, PlanError, UnboundVariableError, UnknownGraphError
from kypherhound.model.io import open_edges
from kypherhound.model.schema import ID, LABEL, NODE1, NODE2, ColumnSchema, EdgeRecord
from kypherhound.model.values import EMPTY, KgtkValue, Number, String, format_value, parse_value, surface_text
from kypherhound.query.ast import (
    BoolOp,
    Call,
    Comparison,
    Direction,
    Expression,
    Literal,
    Not,
    PatternClause,
    QuerySpec,
    ReturnItem,
    ReturnList,
    Star,
    TypeName,
    Variable,
)

logger = logging.getLogger(__name__)

Graph = tuple[ColumnSchema, list[EdgeRecord]]
Binding = dict

_YES = Number(1)
_NO = Number(0)


@dataclass
class OracleResult:
    columns: tuple[str, ...]
    rows: list[tuple]


def load_graphs(files: Mapping[str, str | os.PathLike]) -> dict[str, Graph]:
    """Read each named file fully into memory."""
    graphs = {}
    for name, path in files.items():
        with open_edges(path, node_file_ok=True) as (schema, records):
            graphs[name] = (schema, list(records))
    return graphs


# Values


def _rank(v: KgtkValue) -> int:
    if v is EMPTY:
        return 0
    if isinstance(v, Number):
        return 1
    return 2


def _cmp(a: KgtkValue, b: KgtkValue) -> int:
    ra, rb = _rank(a), _rank(b)
    if ra != rb:
        return -1 if ra < rb else 1
    if ra == 0:
        return 0
    if ra == 1:
        x, y = a.value, b.value
    else:
        x, y = format_value(a), format_value(b)
    return (x > y) - (x < y)


def _truthy(v: KgtkValue) -> bool:
    return isinstance(v, Number) and v.value != 0


def _cast(v: KgtkValue, kind: str) -> KgtkValue:
    if v is EMPTY:
        return EMPTY
    text = surface_text(v)
    if kind == "string":
        return String(text)
    if isinstance(v, Number):
        number = v.value
    else:
        try:
            parsed = parse_value(text.strip())
        except KypherError:
            return EMPTY
        if not isinstance(parsed, Number):
            return EMPTY
        number = parsed.value
    if kind == "integer":
        return Number(number.to_integral_value(rounding=ROUND_DOWN))
    return Number(number)


def _value(expr: Expression, env: Mapping) -> KgtkValue:
    if isinstance(expr, Variable):
        if expr.name not in env:
            raise UnboundVariableError(expr.name, "an expression")
        return env[expr.name]
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Comparison):
        a, b = _value(expr.left, env), _value(expr.right, env)
        if a is EMPTY or b is EMPTY:
            return _NO
        c = _cmp(a, b)
        holds = {
            "=": c == 0,
            "!=": c != 0,
            "<": c < 0,
            "<=": c <= 0,
            ">": c > 0,
            ">=": c >= 0,
        }[expr.op]
        return _YES if holds else _NO
    if isinstance(expr, BoolOp):
        a = _truthy(_value(expr.left, env))
        if expr.op == "and":
            return _YES if a and _truthy(_value(expr.right, env)) else _NO
        return _YES if a or _truthy(_value(expr.right, env)) else _NO
    if isinstance(expr, Not):
        return _NO if _truthy(_value(expr.operand, env)) else _YES
    if isinstance(expr, Call) and expr.name == "cast":
        kind = expr.args[1].name if isinstance(expr.args[1], TypeName) else str(expr.args[1])
        return _cast(_value(expr.args[0], env), kind)
    raise PlanError(f"the oracle cannot evaluate {expr!r} per row")


# Pattern enumeration


def _bind(binding: Binding, name, value: KgtkValue) -> bool:
    """Bind ``name``; a repeated variable must see the same non-empty value."""
    if name is None:
        return True
    if name in binding:
        old = binding[name]
        return old is not EMPTY and value is not EMPTY and old == value
    binding[name] = value
    return True


@dataclass
class _Step:
    graph: str
    source: tuple  # (name, anchor)
    target: tuple | None
    label: KgtkValue | None
    edge_variable: str | None


def _steps(clauses: Sequence[PatternClause], tag: str) -> list[_Step]:
    steps = []
    for c, clause in enumerate(clauses):
        names = []
        for p, node in enumerate(clause.nodes):
            interior = 0 < p < len(clause.nodes) - 1
            name = node.variable
            if name is None and interior:
                name = (tag, c, p)  # never collides with a query variable
            names.append((name, node.anchor))
        if not clause.relations:
            steps.append(_Step(clause.graph, names[0], None, None, None))
        for r, rel in enumerate(clause.relations):
            left, right = names[r], names[r + 1]
            if rel.direction is Direction.BACKWARD:
                left, right = right, left
            steps.append(_Step(clause.graph, left, right, rel.label, rel.variable))
    return steps


def _extend(binding: Binding, step: _Step, edges: Mapping[str, list[dict]]) -> Iterator[Binding]:
    for edge in edges[step.graph]:
        node1 = edge.get(NODE1, EMPTY)
        node2 = edge.get(NODE2, EMPTY)
        if step.label is not None and (LABEL not in edge or edge[LABEL] != step.label):
            continue
        name, anchor = step.source
        if anchor is not None and node1 != anchor:
            continue
        if step.target is not None:
            _, target_anchor = step.target
            if target_anchor is not None and (NODE2 not in edge or node2 != target_anchor):
                continue
        candidate = dict(binding)
        if not _bind(candidate, name, node1):
            continue
        if step.edge_variable is not None:
            edge_value = edge.get(ID, EMPTY) if ID in edge else edge.get(LABEL, EMPTY)
            if not _bind(candidate, step.edge_variable, edge_value):
                continue
        if step.target is not None and not _bind(candidate, step.target[0], node2):
            continue
        yield candidate


def _enumerate(binding: Binding, steps: list[_Step], edges) -> Iterator[Binding]:
    if not steps:
        yield binding
        return
    for extended in _extend(binding, steps[0], edges):
        yield from _enumerate(extended, steps[1:], edges)


def _public(binding: Binding) -> dict:
    return {k: v for k, v in binding.items() if isinstance(k, str)}


def _variables(clauses) -> list[str]:
    names = []
    for clause in clauses:
        for name in clause.variables():
            if name not in names:
                names.append(name)
    return names


def match_bindings(spec: QuerySpec, graphs: Mapping[str, Graph]) -> list[dict]:
    """Every variable binding of the patterns, optional groups and where clause."""
    for clause in list(spec.match) + [c for g in spec.optionals for c in g.clauses]:
        if clause.graph not in graphs:
            raise UnknownGraphError(str(clause.graph), list(graphs))
    edges = {
        name: [dict(zip(schema.columns, record.cells, strict=True)) for record in records]
        for name, (schema, records) in graphs.items()
    }

    results = [_public(b) for b in _enumerate({}, _steps(spec.match, "m"), edges)]

    for g, group in enumerate(spec.optionals):
        steps = _steps(group.clauses, f"o{g}")
        names = _variables(group.clauses)
        extended = []
        for binding in results:
            found = False
            for candidate in _enumerate(dict(binding), steps, edges):
                candidate = _public(candidate)
                if group.where is not None and not _truthy(_value(group.where, candidate)):
                    continue
                found = True
                extended.append(candidate)
            if not found:
                padded = dict(binding)
                for name in names:
                    padded.setdefault(name, EMPTY)
                extended.append(padded)
        results = extended

    if spec.where is not None:
        results = [b for b in results if _truthy(_value(spec.where, b))]
    return results


# Results


def _is_count(expr: Expression) -> bool:
    return isinstance(expr, Call) and expr.name == "count"


def _has_count(expr: Expression) -> bool:
    if _is_count(expr):
        return True
    if isinstance(expr, (Comparison, BoolOp)):
        return _has_count(expr.left) or _has_count(expr.right)
    if isinstance(expr, Not):
        return _has_count(expr.operand)
    if isinstance(expr, Call):
        return any(_has_count(a) for a in expr.args)
    return False


def _count(call: Call, rows: list[dict]) -> int:
    argument = call.args[0]
    if isinstance(argument, Star):
        return len(rows)
    values = [_value(argument, row) for row in rows]
    values = [v for v in values if v is not EMPTY]
    return len(set(values)) if call.distinct else len(values)


def _group_value(expr: Expression, rows: list[dict]) -> KgtkValue:
    if _is_count(expr):
        return Number(_count(expr, rows))
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, (Comparison, BoolOp)):
        left = Literal(_group_value(expr.left, rows))
        right = Literal(_group_value(expr.right, rows))
        return _value(type(expr)(expr.op, left, right), {})
    if isinstance(expr, Not):
        return _value(Not(Literal(_group_value(expr.operand, rows))), {})
    if isinstance(expr, Call) and expr.name == "cast":
        return _cast(_group_value(expr.args[0], rows), expr.args[1].name)
    raise PlanError(f"{expr!r} mixes grouped and per-row values")


def _sorted(rows: list, keys: list[tuple]) -> list:
    """Stable sort of ``rows`` by (values, descending) key lists."""

    def compare(a, b):
        for (va, desc), (vb, _) in zip(a[1], b[1], strict=True):
            c = _cmp(va, vb)
            if c:
                return -c if desc else c
        return 0

    paired = sorted(zip(rows, keys, strict=True), key=cmp_to_key(compare))
    return [row for row, _ in paired]


def _unique(rows: list[tuple]) -> list[tuple]:
    seen = set()
    out = []
    for row in rows:
        if row not in seen:
            seen.add(row)
            out.append(row)
    return out


def _aggregate_key_env(expr: Expression, returns: ReturnList, row: tuple) -> KgtkValue:
    for i, item in enumerate(returns.items):
        if item.expression == expr:
            return row[i]
    if isinstance(expr, Variable):
        if expr.name in returns.aliases:
            return row[returns.aliases.index(expr.name)]
        raise PlanError(f"order-by of an aggregating query cannot use '{expr.name}'")
    if _is_count(expr):
        raise PlanError("an aggregate used in order-by must also appear in the return clause")
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, (Comparison, BoolOp)):
        left = Literal(_aggregate_key_env(expr.left, returns, row))
        right = Literal(_aggregate_key_env(expr.right, returns, row))
        return _value(type(expr)(expr.op, left, right), {})
    if isinstance(expr, Not):
        return _value(Not(Literal(_aggregate_key_env(expr.operand, returns, row))), {})
    if isinstance(expr, Call) and expr.name == "cast":
        return _cast(_aggregate_key_env(expr.args[0], returns, row), expr.args[1].name)
    raise PlanError(f"cannot order by {expr!r}")


def oracle_query(spec: QuerySpec, graphs: Mapping[str, Graph], apply_limit: bool = True) -> OracleResult:
    """Evaluate ``spec`` by exhaustive enumeration.

    Args:
        spec: An assembled query; clause graphs must be keys of ``graphs``.
        graphs: Graph name to (schema, records) held in memory.
        apply_limit: Cut to ``spec.limit`` rows; off gives the full ordered result.
    """
    returns = spec.returns or ReturnList(tuple(ReturnItem(Variable(v), v) for v in spec.bound_variables()))
    columns = returns.aliases
    bindings = match_bindings(spec, graphs)

    if any(_has_count(item.expression) for item in returns.items):
        groups: dict[tuple, list[dict]] = {}
        plain = [i for i, item in enumerate(returns.items) if not _has_count(item.expression)]
        for binding in bindings:
            key = tuple(_value(returns.items[i].expression, binding) for i in plain)
            groups.setdefault(key, []).append(binding)
        rows = []
        for key, members in groups.items():
            by_position = dict(zip(plain, key, strict=True))
            rows.append(
                tuple(
                    by_position[i] if i in by_position else _group_value(item.expression, members)
                    for i, item in enumerate(returns.items)
                )
            )
        if returns.distinct:
            rows = _unique(rows)
        if spec.order_by:
            keys = [
                [(_aggregate_key_env(k.expression, returns, row), k.descending) for k in spec.order_by]
                for row in rows
            ]
            rows = _sorted(rows, keys)
    else:
        rows, keys = [], []
        for binding in bindings:
            row = tuple(_value(item.expression, binding) for item in returns.items)
            env = {**binding, **dict(zip(columns, row, strict=True))}
            rows.append(row)
            keys.append([(_value(k.expression, env), k.descending) for k in spec.order_by])
        if spec.order_by:
            rows = _sorted(rows, keys)
        if returns.distinct:
            rows = _unique(rows)

    if apply_limit and spec.limit is not None:
        rows = rows[: spec.limit]
    return OracleResult(tuple(columns), rows)


def _output_order_keys(spec: QuerySpec):
    """Order keys rewritten over output columns, or None when they need hidden values."""
    returns = spec.returns
    if returns is None or not spec.order_by:
        return None

    def rewrite(expr):
        for item in returns.items:
            if item.expression == expr:
                return Variable(item.alias)
        if isinstance(expr, Variable):
            return expr if expr.name in returns.aliases else None
        if isinstance(expr, Literal):
            return expr
        if isinstance(expr, (Comparison, BoolOp)):
            left, right = rewrite(expr.left), rewrite(expr.right)
            return None if left is None or right is None else type(expr)(expr.op, left, right)
        if isinstance(expr, Not):
            inner = rewrite(expr.operand)
            return None if inner is None else Not(inner)
        if isinstance(expr, Call) and expr.name == "cast":
            inner = rewrite(expr.args[0])
            return None if inner is None else Call("cast", (inner, expr.args[1]))
        return None

    keys = [rewrite(k.expression) for k in spec.order_by]
    return None if any(k is None for k in keys) else keys


def _show(row: tuple) -> str:
    return "\t".join(format_value(v) for v in row)


def compare_results(
    engine_rows: Sequence[tuple],
    oracle_rows: Sequence[tuple],
    spec: QuerySpec,
    full_oracle_rows: Sequence[tuple] | None = None,
) -> str | None:
    """Describe the first difference between engine and oracle output, or None.

    Without a limit the rows must agree as multisets. With a limit, ties at the
    cut make the exact rows ambiguous, so the engine rows must be as many,
    drawn from the un-limited oracle result, with the same sort keys in order.
    """
    engine_rows = [tuple(r) for r in engine_rows]
    oracle_rows = [tuple(r) for r in oracle_rows]
    if len(engine_rows) != len(oracle_rows):
        return f"engine returned {len(engine_rows)} row(s), oracle {len(oracle_rows)}"

    if spec.limit is None:
        missing = Counter(oracle_rows) - Counter(engine_rows)
        extra = Counter(engine_rows) - Counter(oracle_rows)
    else:
        pool = Counter(tuple(r) for r in (full_oracle_rows if full_oracle_rows is not None else oracle_rows))
        missing = Counter()
        extra = Counter(engine_rows) - pool
    if extra:
        return f"engine row not in oracle result: {_show(next(iter(extra)))}"
    if missing:
        return f"oracle row missing from engine result: {_show(next(iter(missing)))}"

    keys = _output_order_keys(spec)
    if keys is not None:
        columns = spec.returns.aliases
        for i, (a, b) in enumerate(zip(engine_rows, oracle_rows, strict=True)):
            env_a, env_b = dict(zip(columns, a, strict=True)), dict(zip(columns, b, strict=True))
            for key in keys:
                if _cmp(_value(key, env_a), _value(key, env_b)) != 0:
                    return f"sort keys differ at row {i + 1}: {_show(a)} vs {_show(b)}"
    return None
