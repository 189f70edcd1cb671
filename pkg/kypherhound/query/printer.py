"""Render syntax trees back to Kypher text that parses to the same tree."""

import re

from kypherhound.model.values import String, Symbol, format_value
from kypherhound.query.ast import (
    BoolOp,
    Call,
    Comparison,
    Expression,
    Literal,
    NodePattern,
    Not,
    OrderKey,
    PatternClause,
    RelationPattern,
    ReturnList,
    Star,
    TypeName,
    Variable,
)
from kypherhound.query.grammar import KEYWORDS

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ALIAS_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_;:\-]*")


def _quote(text: str) -> str:
    return "`" + text.replace("`", "``") + "`"


def print_name(name: str) -> str:
    if _NAME_RE.fullmatch(name) and name.lower() not in KEYWORDS:
        return name
    return _quote(name)


def print_alias(alias: str) -> str:
    if _ALIAS_RE.fullmatch(alias) and alias.lower() not in KEYWORDS:
        return alias
    return _quote(alias)


def print_anchor(value) -> str:
    if isinstance(value, Symbol):
        return print_name(value.text)
    return format_value(value)


def _print_node(node: NodePattern) -> str:
    inner = print_name(node.variable) if node.variable is not None else ""
    if node.anchor is not None:
        inner += ":" + print_anchor(node.anchor)
    return f"({inner})"


def _print_relation(rel: RelationPattern) -> str:
    inner = print_name(rel.variable) if rel.variable is not None else ""
    if rel.label is not None:
        inner += ":" + print_anchor(rel.label)
    body = f"[{inner}]"
    return f"-{body}->" if rel.direction.value == "->" else f"<-{body}-"


def print_clause(clause: PatternClause) -> str:
    parts = [_print_node(clause.nodes[0])]
    for rel, node in zip(clause.relations, clause.nodes[1:], strict=True):
        parts.append(_print_relation(rel))
        parts.append(_print_node(node))
    chain = "".join(parts)
    return f"{print_name(clause.graph)}: {chain}" if clause.graph is not None else chain


def print_match(clauses) -> str:
    return ", ".join(print_clause(c) for c in clauses)


def _is_atomic(expr: Expression) -> bool:
    return isinstance(expr, (Variable, Literal, Call, TypeName, Star))


def _operand(expr: Expression) -> str:
    text = print_expression(expr)
    return text if _is_atomic(expr) else f"({text})"


def print_expression(expr: Expression) -> str:
    if isinstance(expr, Variable):
        return print_name(expr.name)
    if isinstance(expr, Literal):
        if isinstance(expr.value, Symbol):
            return format_value(String(expr.value.text))
        return format_value(expr.value)
    if isinstance(expr, TypeName):
        return expr.name
    if isinstance(expr, Star):
        return "*"
    if isinstance(expr, Comparison):
        return f"{_operand(expr.left)} {expr.op} {_operand(expr.right)}"
    if isinstance(expr, BoolOp):
        return f"{_operand(expr.left)} {expr.op} {_operand(expr.right)}"
    if isinstance(expr, Not):
        return f"not {_operand(expr.operand)}"
    if isinstance(expr, Call):
        args = ", ".join(print_expression(a) for a in expr.args)
        prefix = "distinct " if expr.distinct else ""
        return f"{expr.name}({prefix}{args})"
    raise TypeError(f"not an expression: {expr!r}")


def print_return(returns: ReturnList) -> str:
    items = ", ".join(f"{print_expression(i.expression)} as {print_alias(i.alias)}" for i in returns.items)
    return f"distinct {items}" if returns.distinct else items


def print_order(keys: list[OrderKey]) -> str:
    return ", ".join(print_expression(k.expression) + (" desc" if k.descending else "") for k in keys)
