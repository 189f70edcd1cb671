"""Logical plan operators.

Every operator exposes ``outputs`` (the column names it produces, in order),
``children`` and a one-line ``describe()`` used by explain output. Columns are
named after query variables; planner-generated columns start with ``#``.
"""

from dataclasses import dataclass, field

from kypherhound.config import Config
from kypherhound.model.values import KgtkValue, format_value
from kypherhound.query.ast import Expression, OrderKey
from kypherhound.query.printer import print_expression


def _uniq(names) -> tuple[str, ...]:
    return tuple(dict.fromkeys(names))


@dataclass(frozen=True)
class Scan:
    """All edges of one graph that satisfy constant constraints.

    Args:
        graph: Graph name in the cache.
        constraints: (column, value) pairs every row must equal.
        equalities: Column pairs that must hold the same non-empty value.
        bindings: (output name, column) pairs.
        edge_count: Size of the graph when planned.
    """

    graph: str
    constraints: tuple[tuple[str, KgtkValue], ...] = ()
    equalities: tuple[tuple[str, str], ...] = ()
    bindings: tuple[tuple[str, str], ...] = ()
    edge_count: int = 0

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.bindings)

    @property
    def children(self) -> tuple:
        return ()

    @property
    def estimate(self) -> float:
        return self.edge_count * Config.CONSTRAINT_SELECTIVITY ** len(self.constraints)

    def describe(self) -> str:
        parts = [f"Scan {self.graph}"]
        if self.constraints:
            parts.append("[" + ", ".join(f"{c}={format_value(v)}" for c, v in self.constraints) + "]")
        if self.equalities:
            parts.append("[" + ", ".join(f"{a}=={b}" for a, b in self.equalities) + "]")
        if self.bindings:
            parts.append("-> " + ", ".join(f"{n}:={c}" for n, c in self.bindings))
        return " ".join(parts)


@dataclass(frozen=True)
class Filter:
    child: "Operator"
    predicate: Expression

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.child.outputs

    @property
    def children(self) -> tuple:
        return (self.child,)

    @property
    def estimate(self) -> float:
        return self.child.estimate * 0.5

    def describe(self) -> str:
        return f"Filter {print_expression(self.predicate)}"


@dataclass(frozen=True)
class Join:
    left: "Operator"
    right: "Operator"
    pairs: tuple[tuple[str, str], ...] = ()

    @property
    def outputs(self) -> tuple[str, ...]:
        return _uniq(self.left.outputs + self.right.outputs)

    @property
    def children(self) -> tuple:
        return (self.left, self.right)

    @property
    def estimate(self) -> float:
        if not self.pairs:
            return self.left.estimate * self.right.estimate
        return max(self.left.estimate, self.right.estimate)

    def describe(self) -> str:
        if not self.pairs:
            return "Join cross"
        return "Join on " + ", ".join(f"{a}={b}" for a, b in self.pairs)


@dataclass(frozen=True)
class LeftOuterJoin:
    left: "Operator"
    right: "Operator"
    pairs: tuple[tuple[str, str], ...] = ()
    condition: Expression | None = None

    @property
    def outputs(self) -> tuple[str, ...]:
        return _uniq(self.left.outputs + self.right.outputs)

    @property
    def children(self) -> tuple:
        return (self.left, self.right)

    @property
    def estimate(self) -> float:
        return max(self.left.estimate, self.right.estimate)

    def describe(self) -> str:
        on = "on " + ", ".join(f"{a}={b}" for a, b in self.pairs) if self.pairs else "cross"
        text = f"LeftOuterJoin {on}"
        if self.condition is not None:
            text += f" if {print_expression(self.condition)}"
        return text


@dataclass(frozen=True)
class Project:
    child: "Operator"
    items: tuple[tuple[str, Expression], ...]

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(alias for alias, _ in self.items)

    @property
    def children(self) -> tuple:
        return (self.child,)

    @property
    def estimate(self) -> float:
        return self.child.estimate

    def describe(self) -> str:
        return "Project " + ", ".join(f"{alias}:={print_expression(e)}" for alias, e in self.items)


@dataclass(frozen=True)
class Aggregate:
    """Implicit grouping: ``group_keys`` are the non-aggregate return items."""

    child: "Operator"
    group_keys: tuple[tuple[str, Expression], ...]
    aggregates: tuple[tuple[str, Expression], ...]
    output_order: tuple[str, ...] = ()

    @property
    def outputs(self) -> tuple[str, ...]:
        if self.output_order:
            return self.output_order
        return tuple(a for a, _ in self.group_keys) + tuple(a for a, _ in self.aggregates)

    @property
    def children(self) -> tuple:
        return (self.child,)

    @property
    def estimate(self) -> float:
        return self.child.estimate

    def describe(self) -> str:
        keys = ", ".join(f"{a}:={print_expression(e)}" for a, e in self.group_keys) or "()"
        aggs = ", ".join(f"{a}:={print_expression(e)}" for a, e in self.aggregates)
        return f"Aggregate group=[{keys}] aggregates=[{aggs}]"


@dataclass(frozen=True)
class Distinct:
    child: "Operator"

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.child.outputs

    @property
    def children(self) -> tuple:
        return (self.child,)

    @property
    def estimate(self) -> float:
        return self.child.estimate

    def describe(self) -> str:
        return "Distinct"


@dataclass(frozen=True)
class Sort:
    child: "Operator"
    keys: tuple[OrderKey, ...]

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.child.outputs

    @property
    def children(self) -> tuple:
        return (self.child,)

    @property
    def estimate(self) -> float:
        return self.child.estimate

    def describe(self) -> str:
        return "Sort " + ", ".join(
            print_expression(k.expression) + (" desc" if k.descending else " asc") for k in self.keys
        )


@dataclass(frozen=True)
class Limit:
    child: "Operator"
    count: int

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.child.outputs

    @property
    def children(self) -> tuple:
        return (self.child,)

    @property
    def estimate(self) -> float:
        return min(self.child.estimate, self.count)

    def describe(self) -> str:
        return f"Limit {self.count}"


Operator = Scan | Filter | Join | LeftOuterJoin | Project | Aggregate | Distinct | Sort | Limit


@dataclass(frozen=True)
class Occurrence:
    """One appearance of a variable in a pattern: which atom, graph and column."""

    atom: int
    graph: str
    column: str
    optional: bool = False


@dataclass
class BindingMap:
    occurrences: dict[str, list[Occurrence]] = field(default_factory=dict)

    def add(self, variable: str, occurrence: Occurrence):
        self.occurrences.setdefault(variable, []).append(occurrence)

    def __contains__(self, variable: str) -> bool:
        return variable in self.occurrences

    def variables(self) -> list[str]:
        return list(self.occurrences)


@dataclass(frozen=True)
class LogicalPlan:
    root: Operator
    bindings: BindingMap
    graphs: dict = field(default_factory=dict)  # graph name -> GraphDescriptor

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.root.outputs


def walk_plan(op: Operator):
    yield op
    for child in op.children:
        yield from walk_plan(child)


def scans(op: Operator) -> list[Scan]:
    return [node for node in walk_plan(op) if isinstance(node, Scan)]
