"""Syntax tree of a Kypher query."""

from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum

from kypherhound.model.values import KgtkValue


class Direction(Enum):
    FORWARD = "->"
    BACKWARD = "<-"


@dataclass(frozen=True)
class NodePattern:
    variable: str | None = None
    anchor: KgtkValue | None = None


@dataclass(frozen=True)
class RelationPattern:
    variable: str | None = None
    label: KgtkValue | None = None
    direction: Direction = Direction.FORWARD


@dataclass(frozen=True)
class PatternClause:
    """One chain ``(a)-[:P]->(b)<-[:Q]-(c)`` over a single graph.

    ``nodes`` has one more entry than ``relations``; relation i connects
    nodes i and i+1.
    """

    graph: str | None
    nodes: tuple[NodePattern, ...]
    relations: tuple[RelationPattern, ...] = ()

    def __post_init__(self):
        if not self.nodes or len(self.nodes) != len(self.relations) + 1:
            raise ValueError("a pattern chain alternates nodes and relations and starts and ends with a node")

    @property
    def elements(self) -> tuple[NodePattern | RelationPattern, ...]:
        out: list[NodePattern | RelationPattern] = [self.nodes[0]]
        for rel, node in zip(self.relations, self.nodes[1:], strict=True):
            out.extend((rel, node))
        return tuple(out)

    def variables(self) -> Iterator[str]:
        for element in self.elements:
            if element.variable is not None:
                yield element.variable


# Expressions


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Literal:
    value: KgtkValue


@dataclass(frozen=True)
class Comparison:
    op: str  # one of < <= > >= = !=
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Not:
    operand: "Expression"


@dataclass(frozen=True)
class TypeName:
    name: str  # integer | float | string


@dataclass(frozen=True)
class Star:
    pass


@dataclass(frozen=True)
class Call:
    name: str  # lower-cased: count | cast
    args: tuple["Expression", ...]
    distinct: bool = False


Expression = Variable | Literal | Comparison | BoolOp | Not | Call | TypeName | Star

AGGREGATES = frozenset({"count"})
CAST_TYPES = frozenset({"integer", "float", "string"})
COMPARISON_OPS = ("<", "<=", ">", ">=", "=", "!=")


def walk(expr: Expression) -> Iterator[Expression]:
    yield expr
    if isinstance(expr, (Comparison, BoolOp)):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Not):
        yield from walk(expr.operand)
    elif isinstance(expr, Call):
        for arg in expr.args:
            yield from walk(arg)


def variables_of(expr: Expression) -> list[str]:
    """Variable names in first-occurrence order."""
    seen: dict[str, None] = {}
    for node in walk(expr):
        if isinstance(node, Variable):
            seen.setdefault(node.name)
    return list(seen)


def is_aggregate(expr: Expression) -> bool:
    return any(isinstance(node, Call) and node.name in AGGREGATES for node in walk(expr))


# Results


@dataclass(frozen=True)
class ReturnItem:
    expression: Expression
    alias: str


@dataclass(frozen=True)
class ReturnList:
    items: tuple[ReturnItem, ...]
    distinct: bool = False

    @property
    def aliases(self) -> tuple[str, ...]:
        return tuple(item.alias for item in self.items)

    @property
    def has_aggregates(self) -> bool:
        return any(is_aggregate(item.expression) for item in self.items)


@dataclass(frozen=True)
class OrderKey:
    expression: Expression
    descending: bool = False


# Whole query


@dataclass(frozen=True)
class OptionalGroup:
    clauses: tuple[PatternClause, ...]
    where: Expression | None = None


@dataclass(frozen=True)
class InputSpec:
    path: str
    alias: str | None = None

    @property
    def name(self) -> str:
        from kypherhound.model.io import derive_graph_name

        return self.alias or derive_graph_name(self.path)


@dataclass(frozen=True)
class QuerySpec:
    inputs: tuple[InputSpec, ...]
    match: tuple[PatternClause, ...]
    optionals: tuple[OptionalGroup, ...] = ()
    where: Expression | None = None
    returns: ReturnList | None = None
    order_by: tuple[OrderKey, ...] = ()
    limit: int | None = None

    def mandatory_variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for clause in self.match:
            for name in clause.variables():
                seen.setdefault(name)
        return list(seen)

    def bound_variables(self) -> list[str]:
        seen = dict.fromkeys(self.mandatory_variables())
        for group in self.optionals:
            for clause in group.clauses:
                for name in clause.variables():
                    seen.setdefault(name)
        return list(seen)
