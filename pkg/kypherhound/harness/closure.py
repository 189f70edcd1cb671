"""Materialize the reflexive-transitive P279 closure as a P279star graph."""

import logging
import os
from collections.abc import Iterator
from pathlib import Path

import networkx as nx

from kypherhound.errors import CycleError
from kypherhound.model.io import open_edges, write_edges
from kypherhound.model.schema import LABEL, NODE1, NODE2, ColumnSchema
from kypherhound.model.values import EMPTY, Symbol, format_value, sort_key

logger = logging.getLogger(__name__)

SUBCLASS_OF = Symbol("P279")
SUBCLASS_STAR = Symbol("P279star")

CLOSURE_SCHEMA = ColumnSchema((NODE1, LABEL, NODE2))


def load_hierarchy(p279_file: str | os.PathLike) -> nx.DiGraph:
    """Class graph with an edge child -> parent for each P279 edge.

    Rows without a P279 label or without node2 only contribute their node1 as
    a class.
    """
    graph = nx.DiGraph()
    with open_edges(p279_file, node_file_ok=True) as (schema, records):
        for record in records:
            child = record.get(schema, NODE1)
            parent = record.get(schema, NODE2)
            label = record.get(schema, LABEL)
            graph.add_node(child)
            if parent is not EMPTY and (label is EMPTY or label == SUBCLASS_OF):
                graph.add_edge(child, parent)
    return graph


def closure_edges(graph: nx.DiGraph) -> Iterator[tuple]:
    """(class, P279star, ancestor-or-self) rows in a stable order.

    The hierarchy is checked before any row is produced.
    """
    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        member = min((edge[0] for edge in cycle), key=sort_key)
        raise CycleError(format_value(member))

    closure = nx.transitive_closure_dag(graph)

    def rows():
        for node in sorted(graph.nodes, key=sort_key):
            ancestors = set(closure.successors(node)) | {node}
            for ancestor in sorted(ancestors, key=sort_key):
                yield (node, SUBCLASS_STAR, ancestor)

    return rows()


def closure_p279star(p279_file: str | os.PathLike, output: str | os.PathLike) -> Path:
    """Write the P279star graph of ``p279_file`` to ``output``.

    Raises:
        CycleError: The P279 edges are not a DAG.
    """
    graph = load_hierarchy(p279_file)
    count = write_edges(output, CLOSURE_SCHEMA, closure_edges(graph))
    logger.info("Wrote %d P279star edges for %d classes to %s", count, graph.number_of_nodes(), output)
    return Path(output)
