"""Run a logical plan against an open graph cache."""

import logging
from collections.abc import Iterator

from kypherhound.errors import ExecutionError
from kypherhound.executor.operators import JOIN_STRATEGIES, ExecutionContext, Row, run_operator
from kypherhound.model.schema import ColumnSchema
from kypherhound.planner.plan import LogicalPlan, scans

logger = logging.getLogger(__name__)


def execute(plan: LogicalPlan, cache, join_strategy: str | None = None) -> tuple[ColumnSchema, Iterator[Row]]:
    """Execute ``plan`` and return the output header and a lazy row stream.

    The stream holds one cache connection until it is exhausted or closed.

    Args:
        plan: A compiled plan.
        cache: The CacheHandle the plan's graphs live in.
        join_strategy: Force "hash" or "index" for every join that allows it.

    Raises:
        ExecutionError: The plan references a graph the cache does not hold.
    """
    if join_strategy is not None and join_strategy not in JOIN_STRATEGIES:
        expected = ", ".join(JOIN_STRATEGIES)
        raise ExecutionError(f"unknown join strategy '{join_strategy}' (expected one of {expected})")
    for scan in scans(plan.root):
        if scan.graph not in cache:
            raise ExecutionError(f"plan references graph '{scan.graph}' which is not in the cache")

    schema = ColumnSchema(plan.outputs)

    def rows() -> Iterator[Row]:
        with cache.connect() as conn:
            ctx = ExecutionContext(cache, conn, join_strategy)
            count = 0
            for row in run_operator(plan.root, ctx):
                count += 1
                yield row
            logger.debug("Plan produced %d row(s)", count)

    return schema, rows()
