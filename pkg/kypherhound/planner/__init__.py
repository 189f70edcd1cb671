from kypherhound.planner.compiler import (
    ResolvedQuery,
    bind_graphs,
    compile_plan,
    explain,
    required_indexes,
    split_conjuncts,
)
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

__all__ = [
    "Aggregate",
    "BindingMap",
    "Distinct",
    "Filter",
    "Join",
    "LeftOuterJoin",
    "Limit",
    "LogicalPlan",
    "Occurrence",
    "Operator",
    "Project",
    "ResolvedQuery",
    "Scan",
    "Sort",
    "bind_graphs",
    "compile_plan",
    "explain",
    "required_indexes",
    "scans",
    "split_conjuncts",
    "walk_plan",
]
