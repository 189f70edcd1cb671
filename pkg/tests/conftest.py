import gzip
import os
from pathlib import Path

import pytest
from click.testing import CliRunner

os.environ.setdefault("KYPHERHOUND_LOG_LEVEL", "WARNING")

EDGE_HEADER = ("node1", "label", "node2")


def write_graph(path: Path, rows, header=EDGE_HEADER) -> Path:
    """Write raw cell texts as a KGTK file; ``.gz`` paths are compressed."""
    lines = ["\t".join(header)] + ["\t".join(row) for row in rows]
    data = ("\n".join(lines) + "\n").encode("utf-8")
    if path.suffix == ".gz":
        data = gzip.compress(data, mtime=0)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return path


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    """Keep every test away from the user's ~/.kypherhound cache."""
    monkeypatch.setenv("KYPHERHOUND_CACHE", str(tmp_path / "default-cache.sqlite3"))
    monkeypatch.delenv("KYPHERHOUND_GRAPH_DIR", raising=False)


@pytest.fixture
def graph_dir(tmp_path):
    directory = tmp_path / "graphs"
    directory.mkdir()
    return directory


@pytest.fixture
def make_graph(graph_dir):
    """Factory: make_graph("p31", [("Q1", "P31", "Q5")]) -> path of graphs/p31.tsv."""

    def factory(name, rows, header=EDGE_HEADER, suffix=".tsv"):
        return write_graph(graph_dir / f"{name}{suffix}", rows, header)

    return factory


@pytest.fixture
def cache_path(tmp_path):
    return tmp_path / "cache.sqlite3"


@pytest.fixture
def cache(cache_path):
    from kypherhound.cache.store import open_cache

    handle = open_cache(cache_path)
    yield handle
    handle.close()


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tiny_graphs(make_graph):
    """The three-edge graph of a first-names query, split into its three files."""
    make_graph("p31", [("a", "P31", "Q5"), ("b", "P31", "Q5")])
    make_graph("items", [("a", "P735", "n1")])
    make_graph("labels", [("n1", "label", "'John'@en")])


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """A generated tiny corpus with its P279star closure, shared read-only."""
    from kypherhound.harness.closure import closure_p279star
    from kypherhound.harness.generator import CorpusSpec, generate_corpus

    directory = tmp_path_factory.mktemp("tiny-corpus")
    generate_corpus(CorpusSpec.tiny(), directory)
    closure_p279star(directory / "p279.tsv", directory / "p279star.tsv")
    return directory
