import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ("1", "true", "yes")


class Config:
    # Graph cache
    CACHE_ENV_VAR = "KYPHERHOUND_CACHE"
    CACHE_FILENAME = "graph-cache.sqlite3"
    DEFAULT_CACHE_DIR = Path.home() / ".kypherhound"
    BUSY_TIMEOUT = float(os.getenv("KYPHERHOUND_BUSY_TIMEOUT", "60"))
    VERIFY_HASH = _flag("KYPHERHOUND_VERIFY_HASH", "false")

    # Inputs
    GRAPH_DIR_ENV_VAR = "KYPHERHOUND_GRAPH_DIR"
    GRAPH_FILE_SUFFIXES = (".tsv", ".tsv.gz", "")

    # Streaming
    IMPORT_BATCH_SIZE = int(os.getenv("KYPHERHOUND_IMPORT_BATCH_SIZE", "10000"))
    FETCH_SIZE = int(os.getenv("KYPHERHOUND_FETCH_SIZE", "5000"))
    HASH_CHUNK_SIZE = 1 << 20

    # Join planning
    INL_RATIO = float(os.getenv("KYPHERHOUND_INL_RATIO", "0.05"))
    CONSTRAINT_SELECTIVITY = 0.1  # assumed fraction of a graph kept per constant constraint

    # Harness
    ORACLE_MAX_EDGES = int(os.getenv("KYPHERHOUND_ORACLE_MAX_EDGES", "20000"))

    # Logging
    LOG_LEVEL = os.getenv("KYPHERHOUND_LOG_LEVEL", "WARNING").upper()

    @classmethod
    def get_cache_path(cls, override: str | os.PathLike | None = None) -> Path:
        """Resolve the cache file: flag, then environment, then ~/.kypherhound."""
        raw = override or os.getenv(cls.CACHE_ENV_VAR)
        path = Path(raw).expanduser() if raw else cls.DEFAULT_CACHE_DIR / cls.CACHE_FILENAME
        if not path.is_absolute():
            path = Path.cwd() / path
        if path.is_dir():
            path = path / cls.CACHE_FILENAME
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    @classmethod
    def get_graph_dir(cls, override: str | os.PathLike | None = None) -> Path | None:
        raw = override or os.getenv(cls.GRAPH_DIR_ENV_VAR)
        return Path(raw).expanduser() if raw else None
