"""Expression evaluation over rows.

Booleans are the Numbers 1 and 0. Any comparison that involves Empty is
false, and a failed cast yields Empty instead of raising, so a Filter simply
rejects rows whose predicate is not true.
"""

from collections.abc import Callable, Mapping, Sequence
from decimal import ROUND_DOWN, Decimal, InvalidOperation

from kypherhound.errors import ExecutionError, UnboundVariableError
from kypherhound.model.values import (
    EMPTY,
    FALSE,
    NUMBER_RE,
    TRUE,
    KgtkValue,
    Number,
    Ordering,
    String,
    compare_values,
    is_true,
    surface_text,
)
from kypherhound.query.ast import BoolOp, Call, Comparison, Expression, Literal, Not, Star, TypeName, Variable

RowFunction = Callable[[Sequence[KgtkValue]], KgtkValue]

_COMPARATORS: dict[str, Callable[[Ordering], bool]] = {
    "=": lambda o: o is Ordering.EQUAL,
    "!=": lambda o: o is not Ordering.EQUAL,
    "<": lambda o: o is Ordering.LESS,
    "<=": lambda o: o is not Ordering.GREATER,
    ">": lambda o: o is Ordering.GREATER,
    ">=": lambda o: o is not Ordering.LESS,
}


def compare(op: str, left: KgtkValue, right: KgtkValue) -> KgtkValue:
    if left is EMPTY or right is EMPTY:
        return FALSE
    return TRUE if _COMPARATORS[op](compare_values(left, right)) else FALSE


def _as_decimal(value: KgtkValue) -> Decimal | None:
    if isinstance(value, Number):
        return value.value
    if value is EMPTY:
        return None
    text = surface_text(value).strip()
    if not NUMBER_RE.fullmatch(text):
        return None
    try:
        result = Decimal(text)
    except InvalidOperation:
        return None
    return result if result.is_finite() else None


def cast_value(value: KgtkValue, type_name: str) -> KgtkValue:
    """cast(x, integer|float|string); anything that cannot convert becomes Empty."""
    if value is EMPTY:
        return EMPTY
    if type_name == "string":
        return String(surface_text(value))
    number = _as_decimal(value)
    if number is None:
        return EMPTY
    if type_name == "integer":
        return Number(number.to_integral_value(rounding=ROUND_DOWN))
    return Number(number)


def compile_expression(expr: Expression, columns: Sequence[str]) -> RowFunction:
    """Turn an expression into a function of a row laid out as ``columns``."""
    positions: dict[str, int] = {}
    for i, name in enumerate(columns):
        positions.setdefault(name, i)
    return _compile(expr, positions)


def _compile(expr: Expression, positions: dict[str, int]) -> RowFunction:
    if isinstance(expr, Variable):
        try:
            index = positions[expr.name]
        except KeyError:
            raise UnboundVariableError(expr.name, "the plan") from None
        return lambda row: row[index]

    if isinstance(expr, Literal):
        value = expr.value
        return lambda row: value

    if isinstance(expr, Comparison):
        left, right = _compile(expr.left, positions), _compile(expr.right, positions)
        op = expr.op
        return lambda row: compare(op, left(row), right(row))

    if isinstance(expr, BoolOp):
        left, right = _compile(expr.left, positions), _compile(expr.right, positions)
        if expr.op == "and":
            return lambda row: TRUE if is_true(left(row)) and is_true(right(row)) else FALSE
        return lambda row: TRUE if is_true(left(row)) or is_true(right(row)) else FALSE

    if isinstance(expr, Not):
        operand = _compile(expr.operand, positions)
        return lambda row: FALSE if is_true(operand(row)) else TRUE

    if isinstance(expr, Call):
        if expr.name == "cast":
            inner = _compile(expr.args[0], positions)
            type_arg = expr.args[1]
            type_name = type_arg.name if isinstance(type_arg, TypeName) else str(type_arg)
            return lambda row: cast_value(inner(row), type_name)
        raise ExecutionError(f"{expr.name}() cannot be evaluated per row")

    if isinstance(expr, (Star, TypeName)):
        raise ExecutionError(f"{expr!r} is not a value")
    raise ExecutionError(f"unknown expression {expr!r}")


def evaluate(expr: Expression, row: Mapping[str, KgtkValue]) -> KgtkValue:
    """Evaluate ``expr`` with variables looked up by name in ``row``."""
    columns = tuple(row)
    return compile_expression(expr, columns)(tuple(row[c] for c in columns))
