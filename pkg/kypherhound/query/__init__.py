from kypherhound.query.ast import (
    Direction,
    InputSpec,
    NodePattern,
    OptionalGroup,
    OrderKey,
    PatternClause,
    QuerySpec,
    RelationPattern,
    ReturnItem,
    ReturnList,
)
from kypherhound.query.parser import assemble_query, parse_expression, parse_match, parse_order, parse_return

__all__ = [
    "Direction",
    "InputSpec",
    "NodePattern",
    "OptionalGroup",
    "OrderKey",
    "PatternClause",
    "QuerySpec",
    "RelationPattern",
    "ReturnItem",
    "ReturnList",
    "assemble_query",
    "parse_expression",
    "parse_match",
    "parse_order",
    "parse_return",
]
