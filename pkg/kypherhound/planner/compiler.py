"""Compile a query into a logical plan.

Each relation of a pattern chain becomes one Scan ("atom"); a lone node
pattern becomes a Scan over node1. Shared variables turn into join
equalities. Mandatory atoms are joined greedily, optional groups are attached
with left outer joins, and the return clause becomes a projection or an
aggregation topped by distinct, sort and limit as requested.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

from kypherhound.errors import PlanError, UnknownGraphError
from kypherhound.model.schema import ID, LABEL, NODE1, NODE2
from kypherhound.model.values import KgtkValue, Symbol
from kypherhound.planner.plan import (
    Aggregate,
    BindingMap,
    Distinct,
    Filter,
    Join,
    LeftOuterJoin,
    Limit,
    LogicalPlan,
    Occurrence,
    Operator,
    Project,
    Scan,
    Sort,
    scans,
    walk_plan,
)
from kypherhound.query.ast import (
    BoolOp,
    Call,
    Comparison,
    Direction,
    Expression,
    Literal,
    Not,
    OrderKey,
    PatternClause,
    QuerySpec,
    ReturnItem,
    ReturnList,
    Variable,
    is_aggregate,
    variables_of,
)

logger = logging.getLogger(__name__)

HIDDEN_PREFIX = "#"


@dataclass(frozen=True)
class ResolvedQuery:
    spec: QuerySpec
    graphs: dict  # graph name -> GraphDescriptor


@dataclass
class Atom:
    index: int
    graph: str
    edge_count: int
    constraints: list[tuple[str, KgtkValue]] = field(default_factory=list)
    bindings: list[tuple[str, str]] = field(default_factory=list)
    equalities: list[tuple[str, str]] = field(default_factory=list)
    optional: bool = False

    def bind(self, name: str, column: str):
        for existing, existing_column in self.bindings:
            if existing == name:
                if existing_column != column:
                    self.equalities.append((existing_column, column))
                return
        self.bindings.append((name, column))

    def constrain(self, column: str, value: KgtkValue):
        if (column, value) not in self.constraints:
            self.constraints.append((column, value))

    @property
    def variables(self) -> set[str]:
        return {name for name, _ in self.bindings}


def bind_graphs(spec: QuerySpec, cache) -> ResolvedQuery:
    """Resolve every clause's graph prefix to a cached graph descriptor.

    Only graphs named by the query's inputs are visible to its clauses.
    """
    catalog = cache.catalog if hasattr(cache, "catalog") else dict(cache)
    input_names = [i.name for i in spec.inputs]
    for name in input_names:
        if name not in catalog:
            raise UnknownGraphError(name, list(catalog))

    clauses = list(spec.match) + [c for group in spec.optionals for c in group.clauses]
    graphs = {}
    for clause in clauses:
        if clause.graph is None or clause.graph not in input_names:
            raise UnknownGraphError(str(clause.graph), input_names)
        graphs[clause.graph] = catalog[clause.graph]
        for rel in clause.relations:
            if rel.label is not None and not isinstance(rel.label, Symbol):
                logger.warning("Relation label %r in graph '%s' is not a symbol", rel.label, clause.graph)
    return ResolvedQuery(spec, graphs)


class _AtomBuilder:
    def __init__(self, resolved: ResolvedQuery):
        self.resolved = resolved
        self.atoms: list[Atom] = []
        self.bindings = BindingMap()
        self._hidden = 0

    def hidden(self, kind: str) -> str:
        self._hidden += 1
        return f"{HIDDEN_PREFIX}{kind}{self._hidden}"

    def add_clause(self, clause: PatternClause, optional: bool) -> list[Atom]:
        descriptor = self.resolved.graphs[clause.graph]
        edge_count = descriptor.edge_count
        relation_column = ID if descriptor.schema.has(ID) else LABEL

        # Interior anonymous nodes still link their two relations.
        names = []
        for position, node in enumerate(clause.nodes):
            interior = 0 < position < len(clause.nodes) - 1
            names.append(node.variable or (self.hidden("node") if interior else None))

        created = []
        if not clause.relations:
            atom = self._new_atom(clause.graph, edge_count, optional)
            self._bind_node(atom, clause.nodes[0], names[0], NODE1)
            created.append(atom)

        for i, rel in enumerate(clause.relations):
            atom = self._new_atom(clause.graph, edge_count, optional)
            src, dst = (i, i + 1) if rel.direction is Direction.FORWARD else (i + 1, i)
            self._bind_node(atom, clause.nodes[src], names[src], NODE1)
            if rel.label is not None:
                atom.constrain(LABEL, rel.label)
            if rel.variable is not None:
                self._bind(atom, rel.variable, relation_column)
            self._bind_node(atom, clause.nodes[dst], names[dst], NODE2)
            created.append(atom)
        return created

    def _new_atom(self, graph: str, edge_count: int, optional: bool) -> Atom:
        atom = Atom(index=len(self.atoms), graph=graph, edge_count=edge_count, optional=optional)
        self.atoms.append(atom)
        return atom

    def _bind_node(self, atom: Atom, node, name: str | None, column: str):
        if node.anchor is not None:
            atom.constrain(column, node.anchor)
        if name is not None:
            self._bind(atom, name, column)

    def _bind(self, atom: Atom, name: str, column: str):
        atom.bind(name, column)
        self.bindings.add(name, Occurrence(atom.index, atom.graph, column, atom.optional))


def _scan_for(atom: Atom, pushdown: bool) -> Operator:
    if pushdown:
        return Scan(
            atom.graph,
            tuple(atom.constraints),
            tuple(atom.equalities),
            tuple(atom.bindings),
            atom.edge_count,
        )
    hidden = [
        (f"{HIDDEN_PREFIX}anchor{atom.index}.{column}", column, value) for column, value in atom.constraints
    ]
    op: Operator = Scan(
        atom.graph,
        (),
        tuple(atom.equalities),
        tuple(atom.bindings) + tuple((name, column) for name, column, _ in hidden),
        atom.edge_count,
    )
    for name, _column, value in hidden:
        op = Filter(op, Comparison("=", Variable(name), Literal(value)))
    return op


def split_conjuncts(expr: Expression | None) -> list[Expression]:
    if expr is None:
        return []
    if isinstance(expr, BoolOp) and expr.op == "and":
        return split_conjuncts(expr.left) + split_conjuncts(expr.right)
    return [expr]


def _priority(atom: Atom) -> tuple:
    return (-len(atom.constraints), atom.edge_count, atom.index)


def _join_sequence(atoms: list[Atom], join_order: Sequence[int] | None) -> list[Atom]:
    if join_order is not None:
        by_index = {a.index: a for a in atoms}
        if sorted(join_order) != sorted(by_index):
            raise PlanError(f"join order {list(join_order)} is not a permutation of atoms {sorted(by_index)}")
        return [by_index[i] for i in join_order]

    remaining = sorted(atoms, key=_priority)
    ordered = [remaining.pop(0)]
    covered = set(ordered[0].variables)
    while remaining:
        connected = [a for a in remaining if a.variables & covered]
        pick = connected[0] if connected else remaining[0]
        remaining.remove(pick)
        ordered.append(pick)
        covered |= pick.variables
    return ordered


def _attach_ready(op: Operator, pending: list[Expression]) -> Operator:
    available = set(op.outputs)
    still = []
    for predicate in pending:
        if set(variables_of(predicate)) <= available:
            op = Filter(op, predicate)
        else:
            still.append(predicate)
    pending[:] = still
    return op


def _build_join_tree(
    atoms: list[Atom],
    predicates: list[Expression],
    pushdown: bool,
    join_order: Sequence[int] | None,
) -> Operator:
    """Join atoms in greedy (or forced) order, placing each predicate as low as it can go."""
    sequence = _join_sequence(atoms, join_order)
    pending = list(predicates)

    # Single-atom predicates sit right above their scan.
    local: dict[int, list[Expression]] = {}
    for predicate in list(pending):
        names = set(variables_of(predicate))
        if not names:
            continue
        for atom in sequence:
            if names <= atom.variables:
                local.setdefault(atom.index, []).append(predicate)
                pending.remove(predicate)
                break

    def leaf(atom: Atom) -> Operator:
        op = _scan_for(atom, pushdown)
        for predicate in local.get(atom.index, ()):
            op = Filter(op, predicate)
        return op

    tree = leaf(sequence[0])
    for atom in sequence[1:]:
        right = leaf(atom)
        shared = [name for name in right.outputs if name in tree.outputs]
        if not shared:
            logger.warning(
                "Pattern on graph '%s' shares no variable with the rest of the query; "
                "planning a cross product",
                atom.graph,
            )
        tree = Join(tree, right, tuple((name, name) for name in shared))
        tree = _attach_ready(tree, pending)
    return _attach_ready(tree, pending) if pending else tree


def _substitute(expr: Expression, mapping: dict[str, Expression]) -> Expression:
    if isinstance(expr, Variable):
        return mapping.get(expr.name, expr)
    if isinstance(expr, Comparison):
        return Comparison(expr.op, _substitute(expr.left, mapping), _substitute(expr.right, mapping))
    if isinstance(expr, BoolOp):
        return BoolOp(expr.op, _substitute(expr.left, mapping), _substitute(expr.right, mapping))
    if isinstance(expr, Not):
        return Not(_substitute(expr.operand, mapping))
    if isinstance(expr, Call):
        return Call(expr.name, tuple(_substitute(a, mapping) for a in expr.args), expr.distinct)
    return expr


def _to_output_columns(expr: Expression, returns: ReturnList) -> Expression:
    """Rewrite an order key of an aggregating query in terms of output columns."""
    for item in returns.items:
        if item.expression == expr:
            return Variable(item.alias)
    if isinstance(expr, Variable):
        if expr.name in returns.aliases:
            return expr
        raise PlanError(
            f"order-by of an aggregating query can only use return columns; '{expr.name}' is not one of them"
        )
    if isinstance(expr, Call) and is_aggregate(expr):
        raise PlanError("an aggregate used in order-by must also appear in the return clause")
    if isinstance(expr, Comparison):
        left, right = _to_output_columns(expr.left, returns), _to_output_columns(expr.right, returns)
        return Comparison(expr.op, left, right)
    if isinstance(expr, BoolOp):
        left, right = _to_output_columns(expr.left, returns), _to_output_columns(expr.right, returns)
        return BoolOp(expr.op, left, right)
    if isinstance(expr, Not):
        return Not(_to_output_columns(expr.operand, returns))
    if isinstance(expr, Call):
        return Call(expr.name, tuple(_to_output_columns(a, returns) for a in expr.args), expr.distinct)
    return expr


def compile_plan(
    resolved: ResolvedQuery,
    *,
    pushdown: bool = True,
    join_order: Sequence[int] | None = None,
) -> LogicalPlan:
    """Build the logical plan for a resolved query.

    Args:
        resolved: Output of bind_graphs.
        pushdown: Put anchor constants into scans (True) or into filters above them.
        join_order: Atom indexes of the mandatory patterns in the order to join them.
    """
    spec = resolved.spec
    builder = _AtomBuilder(resolved)
    mandatory = [atom for clause in spec.match for atom in builder.add_clause(clause, optional=False)]
    groups = [
        (group, [atom for clause in group.clauses for atom in builder.add_clause(clause, optional=True)])
        for group in spec.optionals
    ]

    mandatory_vars = set().union(*(a.variables for a in mandatory))
    conjuncts = split_conjuncts(spec.where)
    early = [c for c in conjuncts if variables_of(c) and set(variables_of(c)) <= mandatory_vars]
    late = [c for c in conjuncts if c not in early]

    root = _build_join_tree(mandatory, early, pushdown, join_order)

    for group, atoms in groups:
        right = _build_join_tree(atoms, [], pushdown, None)
        shared = [name for name in right.outputs if name in root.outputs]
        if not shared:
            logger.warning(
                "Optional pattern shares no variable with the mandatory patterns; planning a cross product"
            )
        root = LeftOuterJoin(root, right, tuple((n, n) for n in shared), group.where)

    for predicate in late:
        root = Filter(root, predicate)

    returns = spec.returns or ReturnList(tuple(ReturnItem(Variable(v), v) for v in spec.bound_variables()))
    root = _compile_return(root, spec, returns)
    return LogicalPlan(root=root, bindings=builder.bindings, graphs=dict(resolved.graphs))


def _compile_return(root: Operator, spec: QuerySpec, returns: ReturnList) -> Operator:
    if returns.has_aggregates:
        group_keys = tuple((i.alias, i.expression) for i in returns.items if not is_aggregate(i.expression))
        aggregates = tuple((i.alias, i.expression) for i in returns.items if is_aggregate(i.expression))
        root = Aggregate(root, group_keys, aggregates, returns.aliases)
        if returns.distinct:
            root = Distinct(root)
        if spec.order_by:
            keys = tuple(
                OrderKey(_to_output_columns(k.expression, returns), k.descending) for k in spec.order_by
            )
            root = Sort(root, keys)
    else:
        if spec.order_by:
            mapping = {i.alias: i.expression for i in returns.items}
            keys = tuple(OrderKey(_substitute(k.expression, mapping), k.descending) for k in spec.order_by)
            root = Sort(root, keys)
        root = Project(root, tuple((i.alias, i.expression) for i in returns.items))
        if returns.distinct:
            root = Distinct(root)
    if spec.limit is not None:
        root = Limit(root, spec.limit)
    return root


def required_indexes(plan: LogicalPlan) -> set[tuple[str, str]]:
    """(graph, column) pairs used by constant constraints or join equalities."""
    wanted: set[tuple[str, str]] = set()

    def present(graph: str, column: str) -> bool:
        descriptor = plan.graphs.get(graph)
        return descriptor is None or descriptor.schema.has(column)

    for scan in scans(plan.root):
        for column, _ in scan.constraints:
            if present(scan.graph, column):
                wanted.add((scan.graph, column))

    for node in walk_plan(plan.root):
        if not isinstance(node, (Join, LeftOuterJoin)):
            continue
        for left_name, right_name in node.pairs:
            for side, name in ((node.left, left_name), (node.right, right_name)):
                for scan in scans(side):
                    for bound, column in scan.bindings:
                        if bound == name and present(scan.graph, column):
                            wanted.add((scan.graph, column))
    return wanted


def explain(plan: LogicalPlan) -> str:
    """Stable text rendering: one operator per line, children indented two spaces."""
    lines: list[str] = []

    def render(op: Operator, depth: int):
        lines.append("  " * depth + op.describe())
        for child in op.children:
            render(child, depth + 1)

    render(plan.root, 0)
    lines.append("Required indexes:")
    indexes = sorted(required_indexes(plan))
    lines.extend(f"  {graph}.{column}" for graph, column in indexes)
    if not indexes:
        lines.append("  (none)")
    return "\n".join(lines) + "\n"
