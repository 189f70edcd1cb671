from kypherhound.cache.fingerprint import Fingerprint
from kypherhound.cache.store import (
    CacheHandle,
    CacheStats,
    GraphDescriptor,
    drop_graph,
    ensure_fresh,
    ensure_index,
    import_graph,
    list_graphs,
    open_cache,
)

__all__ = [
    "CacheHandle",
    "CacheStats",
    "Fingerprint",
    "GraphDescriptor",
    "drop_graph",
    "ensure_fresh",
    "ensure_index",
    "import_graph",
    "list_graphs",
    "open_cache",
]
