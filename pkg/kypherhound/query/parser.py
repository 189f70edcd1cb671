"""Parsing of Kypher query fragments into the syntax tree."""

import logging
from collections.abc import Sequence
from functools import lru_cache

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from kypherhound.errors import (
    KypherError,
    KypherSemanticError,
    KypherSyntaxError,
    UnboundVariableError,
    ValueParseError,
)
from kypherhound.model.values import (
    EMPTY,
    String,
    Symbol,
    parse_lang_literal,
    parse_number,
    parse_string_literal,
    parse_value,
    symbol_shaped,
    unescape,
)
from kypherhound.query.ast import (
    CAST_TYPES,
    BoolOp,
    Call,
    Comparison,
    Direction,
    Expression,
    InputSpec,
    Literal,
    NodePattern,
    Not,
    OptionalGroup,
    OrderKey,
    PatternClause,
    QuerySpec,
    RelationPattern,
    ReturnItem,
    ReturnList,
    Star,
    TypeName,
    Variable,
    is_aggregate,
    variables_of,
)
from kypherhound.query.grammar import KYPHER_GRAMMAR, START_RULES
from kypherhound.query.printer import print_expression

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1)
def get_parser() -> Lark:
    return Lark(KYPHER_GRAMMAR, parser="lalr", start=START_RULES, maybe_placeholders=True)


def _unquote_name(token: Token) -> str:
    text = str(token)
    if token.type == "QUOTED_NAME":
        return text[1:-1].replace("``", "`")
    return text


@v_args(inline=True)
class KypherTransformer(Transformer):
    """Builds syntax-tree objects bottom-up from the Lark parse tree."""

    # Patterns

    def match_text(self, *clauses):
        return list(clauses)

    def clause(self, *parts):
        if len(parts) == 2:
            graph, (nodes, relations) = parts
        else:
            graph, (nodes, relations) = None, parts[0]
        return PatternClause(graph, tuple(nodes), tuple(relations))

    def graph_prefix(self, name):
        return _unquote_name(name)

    def chain(self, *elements):
        return list(elements[0::2]), list(elements[1::2])

    def node(self, variable, anchor):
        return NodePattern(variable.name if variable else None, anchor)

    def rel_body(self, variable, anchor):
        return (variable.name if variable else None), anchor

    def forward_relation(self, body):
        variable, label = body or (None, None)
        return RelationPattern(variable, label, Direction.FORWARD)

    def backward_relation(self, body):
        variable, label = body or (None, None)
        return RelationPattern(variable, label, Direction.BACKWARD)

    def name_anchor(self, token):
        return Symbol(str(token))

    def quoted_anchor(self, token):
        value = parse_value(_unquote_name(token))
        if value is EMPTY:
            raise KypherSyntaxError("empty anchor", token.start_pos)
        return value

    def anchor(self, literal):
        return literal.value

    # Expressions

    def expression_text(self, expression):
        return expression

    def variable(self, token):
        return Variable(_unquote_name(token))

    def string_literal(self, token):
        return Literal(parse_string_literal(str(token)))

    def lang_literal(self, token):
        return Literal(parse_lang_literal(str(token)))

    def sq_literal(self, token):
        text = str(token)
        return Literal(String(unescape(text[1:-1], text)))

    def number_literal(self, token):
        return Literal(parse_number(str(token)))

    def or_expr(self, *operands):
        return _fold("or", operands)

    def and_expr(self, *operands):
        return _fold("and", operands)

    def comparison(self, left, op, right):
        op = "!=" if str(op) == "<>" else str(op)
        return Comparison(op, left, right)

    def not_expr(self, operand):
        return Not(operand)

    def star(self):
        return Star()

    def call_args(self, *args):
        return list(args)

    def call(self, name, distinct, args):
        fname = str(name).lower()
        args = args or []
        if fname == "count":
            if len(args) != 1:
                raise KypherSemanticError("count takes exactly one argument")
            if is_aggregate(args[0]):
                raise KypherSemanticError("count cannot be nested inside count")
            if isinstance(args[0], Star) and distinct:
                raise KypherSemanticError("count(distinct *) is not supported")
        elif fname == "cast":
            if distinct:
                raise KypherSemanticError("distinct is only allowed inside count")
            if len(args) != 2:
                raise KypherSemanticError("cast takes an expression and a type name")
            type_arg = args[1]
            if not isinstance(type_arg, Variable) or type_arg.name.lower() not in CAST_TYPES:
                raise KypherSemanticError(f"cast type must be one of {', '.join(sorted(CAST_TYPES))}")
            args = [args[0], TypeName(type_arg.name.lower())]
        else:
            raise KypherSemanticError(f"unknown function '{name}' (supported: cast, count)")
        if any(isinstance(a, Star) for a in args) and fname != "count":
            raise KypherSemanticError("'*' is only allowed as the argument of count")
        return Call(fname, tuple(args), distinct is not None)

    # Results

    def alias(self, token):
        return _unquote_name(token)

    def return_item(self, expression, alias):
        return expression, alias

    def return_text(self, distinct, *items):
        return distinct is not None, list(items)

    def order_key(self, expression, direction):
        descending = direction is not None and str(direction).lower().startswith("desc")
        return OrderKey(expression, descending)

    def order_text(self, *keys):
        return list(keys)


def _fold(op: str, operands) -> Expression:
    result = operands[0]
    for operand in operands[1:]:
        result = BoolOp(op, result, operand)
    return result


def _parse(text: str, start: str):
    try:
        tree = get_parser().parse(text, start=start)
        return KypherTransformer().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ValueParseError):
            raise KypherSyntaxError(str(e.orig_exc), 0, text) from None
        if isinstance(e.orig_exc, KypherError):
            raise e.orig_exc from None
        raise
    except UnexpectedEOF as e:
        raise KypherSyntaxError(f"unexpected end of input in {_describe(start)}", len(text), text) from e
    except UnexpectedInput as e:
        offset = e.pos_in_stream if e.pos_in_stream is not None and e.pos_in_stream >= 0 else len(text)
        found = text[offset : offset + 10] or "end of input"
        line = getattr(e, "line", None)
        column = getattr(e, "column", None)
        where = f" (line {line}, column {column})" if line and line > 0 else ""
        raise KypherSyntaxError(
            f"unexpected {found!r} in {_describe(start)}{where}", offset, text
        ) from e


def _describe(start: str) -> str:
    return {
        "match_text": "match pattern",
        "expression_text": "expression",
        "return_text": "return list",
        "order_text": "order-by list",
    }[start]


def parse_match(text: str) -> list[PatternClause]:
    """Parse comma-separated pattern clauses.

    Unprefixed clauses inherit the graph of the clause before them. A leading
    unprefixed clause keeps ``graph=None``; assemble_query resolves it to the
    first input.
    """
    clauses = _parse(text, "match_text")
    resolved = []
    current = None
    for clause in clauses:
        if clause.graph is None:
            clause = PatternClause(current, clause.nodes, clause.relations)
        current = clause.graph
        resolved.append(clause)
    return resolved


def parse_expression(text: str, allow_aggregates: bool = False) -> Expression:
    expression = _parse(text, "expression_text")
    if not allow_aggregates and is_aggregate(expression):
        raise KypherSemanticError("count is only allowed in return and order-by position")
    return expression


def _default_alias(expression: Expression) -> str:
    if isinstance(expression, Variable):
        return expression.name
    return print_expression(expression)


def parse_return(text: str) -> ReturnList:
    distinct, raw_items = _parse(text, "return_text")
    items = []
    seen = set()
    for expression, alias in raw_items:
        alias = alias if alias is not None else _default_alias(expression)
        if isinstance(expression, Literal):
            # a constant column such as "count_names" is written as the bare symbol
            expression = Literal(symbol_shaped(expression.value))
        if alias in seen:
            raise KypherSemanticError(f"duplicate return alias '{alias}'")
        seen.add(alias)
        items.append(ReturnItem(expression, alias))
    return ReturnList(tuple(items), distinct)


def parse_order(text: str) -> list[OrderKey]:
    return _parse(text, "order_text")


def _check_bound(expression: Expression, bound: set[str], where: str, extra: set[str] = frozenset()):
    for name in variables_of(expression):
        if name not in bound and name not in extra:
            raise UnboundVariableError(name, where)


def _default_graph(clauses: list[PatternClause], default: str | None) -> tuple[PatternClause, ...]:
    out = []
    for clause in clauses:
        if clause.graph is None:
            clause = PatternClause(default, clause.nodes, clause.relations)
        out.append(clause)
    return tuple(out)


def assemble_query(
    inputs: Sequence[InputSpec | tuple[str, str | None]],
    match_text: str,
    opt_texts: Sequence[str] = (),
    where_text: str | None = None,
    return_text: str | None = None,
    order_text: str | None = None,
    limit: int | None = None,
    opt_where_texts: Sequence[str | None] | None = None,
) -> QuerySpec:
    """Parse every fragment of a query and check variable bindings.

    Args:
        inputs: (path, alias) pairs in command-line order.
        match_text: Mandatory patterns.
        opt_texts: One text per optional group.
        where_text: Filter over all bound variables.
        return_text: Output columns. Defaults to every bound variable.
        order_text: Sort keys; may name return aliases.
        limit: Maximum number of output rows.
        opt_where_texts: Conditions attached to the optional group at the same position.

    Raises:
        KypherSyntaxError, KypherSemanticError, UnboundVariableError
    """
    specs = tuple(i if isinstance(i, InputSpec) else InputSpec(*i) for i in inputs)
    default_graph = specs[0].name if specs else None

    if not match_text or not match_text.strip():
        raise KypherSyntaxError("empty match pattern", 0, match_text or "")
    match = _default_graph(parse_match(match_text), default_graph)

    opt_where_texts = list(opt_where_texts or [])
    if len(opt_where_texts) > len(opt_texts):
        raise KypherSemanticError("--owhere given without a preceding --opt")
    opt_where_texts += [None] * (len(opt_texts) - len(opt_where_texts))

    bound = set()
    for clause in match:
        bound.update(clause.variables())

    optionals = []
    previous_graph = match[-1].graph
    for opt_text, opt_where_text in zip(opt_texts, opt_where_texts, strict=True):
        clauses = _default_graph(parse_match(opt_text), previous_graph)
        previous_graph = clauses[-1].graph
        for clause in clauses:
            bound.update(clause.variables())
        opt_where = None
        if opt_where_text:
            opt_where = parse_expression(opt_where_text)
            _check_bound(opt_where, bound, "an optional where clause")
        optionals.append(OptionalGroup(clauses, opt_where))

    spec = QuerySpec(inputs=specs, match=match, optionals=tuple(optionals))
    bound_order = spec.bound_variables()

    where = None
    if where_text and where_text.strip():
        where = parse_expression(where_text)
        _check_bound(where, bound, "the where clause")

    if return_text and return_text.strip():
        returns = parse_return(return_text)
        for item in returns.items:
            _check_bound(item.expression, bound, "the return clause")
    else:
        if not bound_order:
            raise KypherSemanticError("the query binds no variables; give an explicit return clause")
        returns = ReturnList(tuple(ReturnItem(Variable(name), name) for name in bound_order))

    order_by = ()
    if order_text and order_text.strip():
        order_by = tuple(parse_order(order_text))
        aliases = set(returns.aliases)
        for key in order_by:
            _check_bound(key.expression, bound, "the order-by clause", aliases)
            if is_aggregate(key.expression) and not returns.has_aggregates:
                raise KypherSemanticError("count in order-by requires an aggregating return clause")

    if limit is not None and limit < 0:
        raise KypherSemanticError(f"limit must not be negative: {limit}")

    return QuerySpec(
        inputs=specs,
        match=match,
        optionals=tuple(optionals),
        where=where,
        returns=returns,
        order_by=order_by,
        limit=limit,
    )
