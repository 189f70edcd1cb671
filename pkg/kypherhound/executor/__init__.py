from kypherhound.executor.engine import execute
from kypherhound.executor.evaluate import cast_value, compile_expression, evaluate
from kypherhound.executor.operators import JOIN_STRATEGIES, choose_join_strategy

__all__ = [
    "JOIN_STRATEGIES",
    "cast_value",
    "choose_join_strategy",
    "compile_expression",
    "evaluate",
    "execute",
]
