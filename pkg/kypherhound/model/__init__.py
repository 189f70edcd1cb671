from kypherhound.model.io import derive_graph_name, open_edges, read_edges, write_edges
from kypherhound.model.schema import ColumnSchema, EdgeRecord
from kypherhound.model.values import (
    EMPTY,
    KgtkValue,
    LangString,
    Number,
    Ordering,
    String,
    Symbol,
    compare_values,
    format_value,
    parse_value,
)

__all__ = [
    "EMPTY",
    "ColumnSchema",
    "EdgeRecord",
    "KgtkValue",
    "LangString",
    "Number",
    "Ordering",
    "String",
    "Symbol",
    "compare_values",
    "derive_graph_name",
    "format_value",
    "open_edges",
    "parse_value",
    "read_edges",
    "write_edges",
]
