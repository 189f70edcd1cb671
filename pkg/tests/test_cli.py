"""Tests for kypherhound.cli module."""

import gzip

import pytest

from kypherhound.cache.store import open_cache
from kypherhound.cli import cli, run
from kypherhound.harness.usecases import USECASES, read_result
from kypherhound.model.values import Symbol

MATCH = """
    p31: (person)-[:P31]->(:Q5), # Q5 is human
    items: (person)-[:P735]->(name),
    labels: (name)-[:label]->(name_label)"""
RETURN = 'distinct name as node1, count(name) as node2, name_label as `node1;label`, "count_names" as label'
EXPECTED = "node1\tnode2\tnode1;label\tlabel\nn1\t1\t'John'@en\tcount_names\n"


@pytest.fixture
def query_args(graph_dir, cache_path, tiny_graphs):
    """Factory for the first-names query over the tiny graphs, with extra arguments appended."""

    def factory(*extra, match=MATCH, returns=RETURN):
        args = ["query", "-i", "p31", "-i", "items", "-i", "labels", "--match", match]
        if returns is not None:
            args += ["--return", returns]
        args += ["--order-by", "node2 desc"] if returns == RETURN else []
        return args + ["--graph-dir", str(graph_dir), "--cache", str(cache_path), *extra]

    return factory


class TestQueryCommand:
    """Tests for 'query' command."""

    def test_writes_stdout(self, runner, query_args):
        """Should print the result as a KGTK file."""
        result = runner.invoke(cli, query_args())
        assert result.exit_code == 0, result.output
        assert result.output == EXPECTED

    def test_output_file(self, runner, query_args, tmp_path):
        """Should write to nested output paths and compress .gz outputs."""
        plain, packed = tmp_path / "out" / "names.tsv", tmp_path / "out" / "names.tsv.gz"
        assert runner.invoke(cli, query_args("-o", str(plain))).exit_code == 0
        assert runner.invoke(cli, query_args("-o", str(packed))).exit_code == 0
        assert plain.read_text() == EXPECTED
        assert gzip.decompress(packed.read_bytes()).decode() == EXPECTED
        assert [p.name for p in plain.parent.iterdir() if p.name.endswith(".part")] == []

    def test_repeat_is_identical_and_warm(self, runner, query_args, tmp_path):
        """Should reuse the cache and reproduce the output byte for byte."""
        first, second = tmp_path / "a.tsv", tmp_path / "b.tsv"
        cold = runner.invoke(cli, query_args("-o", str(first), "--verbose"))
        warm = runner.invoke(cli, query_args("-o", str(second), "--verbose"))
        assert cold.exit_code == 0 and warm.exit_code == 0
        assert "Cache: imports=3" in cold.output
        assert "Cache: imports=0" in warm.output
        assert first.read_bytes() == second.read_bytes()

    def test_source_change_is_picked_up(self, runner, query_args, graph_dir):
        """Should reimport an input that changed since the last run."""
        assert runner.invoke(cli, query_args()).output == EXPECTED
        with open(graph_dir / "items.tsv", "a", encoding="utf-8") as f:
            f.write("b\tP735\tn1\n")
        result = runner.invoke(cli, query_args())
        assert result.output == EXPECTED.replace("n1\t1", "n1\t2")

    @pytest.mark.parametrize("strategy", ["hash", "index"])
    def test_join_strategy(self, runner, query_args, strategy):
        """Should give the same output with a forced join strategy."""
        result = runner.invoke(cli, query_args("--join-strategy", strategy))
        assert result.output == EXPECTED

    def test_explain(self, runner, query_args):
        """Should print the plan and its index demand without running it."""
        result = runner.invoke(cli, query_args("--explain"))
        assert result.exit_code == 0
        assert result.output.startswith("Sort node2 desc\n")
        assert "Scan p31 [label=P31, node2=Q5] -> person:=node1" in result.output
        assert result.output.endswith("  p31.node2\n")

    def test_alias(self, runner, graph_dir, cache_path, tiny_graphs):
        """Should name a graph by the --as after its -i."""
        args = ["query", "-i", "p31", "--as", "facts", "--match", "facts: (a)-[:P31]->()", "--order-by", "a"]
        result = runner.invoke(cli, args + ["--graph-dir", str(graph_dir), "--cache", str(cache_path)])
        assert result.exit_code == 0, result.output
        assert result.output == "a\na\nb\n"

    def test_optional_with_condition(self, runner, make_graph, graph_dir, cache_path):
        """Should pair each --owhere with the --opt before it."""
        make_graph("g", [("a", "P1", "b"), ("c", "P1", "d")])
        make_graph("h", [("b", "P2", "x"), ("d", "P2", "y")])
        args = ["query", "-i", "g", "-i", "h", "--match", "g: (s)-[:P1]->(t)", "--opt", "h: (t)-[:P2]->(u)"]
        args += ["--owhere", 'cast(u, string) != "x"', "--return", "s, u", "--order-by", "s"]
        args += ["--graph-dir", str(graph_dir), "--cache", str(cache_path)]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert result.output == "s\tu\na\t\nc\ty\n"

    def test_as_without_input(self, runner, query_args):
        """Should exit 1 when --as has no -i to attach to."""
        result = runner.invoke(cli, ["query", "--as", "x", *query_args()[1:]])
        assert result.exit_code == 1
        assert "--as must directly follow" in result.output

    def test_owhere_without_opt(self, runner, query_args):
        """Should exit 1 when --owhere has no --opt to attach to."""
        result = runner.invoke(cli, query_args("--owhere", "name = name"))
        assert result.exit_code == 1
        assert "--owhere must follow an --opt" in result.output

    def test_missing_match(self, runner, graph_dir):
        """Should exit 1 without --match."""
        result = runner.invoke(cli, ["query", "-i", "p31", "--graph-dir", str(graph_dir)])
        assert result.exit_code == 1

    def test_missing_inputs(self, runner):
        """Should exit 1 without any -i."""
        result = runner.invoke(cli, ["query", "--match", "(a)-[]->(b)"])
        assert result.exit_code == 1
        assert "at least one input" in result.output

    def test_bad_join_strategy(self, runner, query_args):
        """Should exit 1 for an unknown join strategy."""
        assert runner.invoke(cli, query_args("--join-strategy", "merge")).exit_code == 1

    def test_unbound_variable(self, runner, query_args):
        """Should exit 2 for a variable no pattern binds."""
        result = runner.invoke(cli, query_args(returns="nobody"))
        assert result.exit_code == 2
        assert "nobody" in result.output

    def test_syntax_error(self, runner, query_args):
        """Should exit 2 for a malformed pattern."""
        result = runner.invoke(cli, query_args(match="p31: (a)-[->(b)", returns=None))
        assert result.exit_code == 2
        assert "Error:" in result.output

    def test_unknown_graph_prefix(self, runner, query_args):
        """Should exit 2 and list the inputs for an unknown prefix."""
        result = runner.invoke(cli, query_args(match="p13: (a)-[]->(b)", returns=None))
        assert result.exit_code == 2
        assert "unknown graph 'p13' (available: items, labels, p31)" in result.output

    def test_missing_file(self, runner, cache_path, tmp_path):
        """Should exit 3 for an input that does not exist."""
        missing = str(tmp_path / "missing.tsv")
        args = ["query", "-i", missing, "--match", "(a)-[]->(b)", "--cache", str(cache_path)]
        result = runner.invoke(cli, args)
        assert result.exit_code == 3
        assert "input not found" in result.output

    def test_malformed_file(self, runner, make_graph, graph_dir, cache_path):
        """Should exit 3 for a file with a broken row."""
        make_graph("bad", [("Q1", "P31")])
        args = ["query", "-i", "bad", "--match", "(a)-[]->(b)", "--graph-dir", str(graph_dir)]
        result = runner.invoke(cli, args + ["--cache", str(cache_path)])
        assert result.exit_code == 3

    def test_corrupt_cache(self, runner, query_args, cache_path):
        """Should exit 4 when the cache file is not a graph cache."""
        cache_path.write_text("not a database")
        result = runner.invoke(cli, query_args())
        assert result.exit_code == 4
        assert "not a graph cache" in result.output


class TestGraphsCommand:
    """Tests for 'graphs' command."""

    def test_empty(self, runner, cache_path):
        """Should say when nothing is cached."""
        result = runner.invoke(cli, ["graphs", "--cache", str(cache_path)])
        assert result.exit_code == 0
        assert "No graphs cached yet." in result.output

    def test_list_and_drop(self, runner, query_args, cache_path):
        """Should list imported graphs and drop them by name."""
        runner.invoke(cli, query_args())
        listing = runner.invoke(cli, ["graphs", "--cache", str(cache_path)])
        assert "Cached Graphs" in listing.output
        assert "items" in listing.output and "labels" in listing.output

        dropped = runner.invoke(cli, ["graphs", "--cache", str(cache_path), "--drop", "p31"])
        assert dropped.exit_code == 0
        assert "Dropped graph: p31" in dropped.output
        with open_cache(cache_path) as cache:
            assert sorted(cache.catalog) == ["items", "labels"]

    def test_drop_unknown(self, runner, cache_path):
        """Should exit 2 for a graph that is not cached."""
        result = runner.invoke(cli, ["graphs", "--cache", str(cache_path), "--drop", "nope"])
        assert result.exit_code == 2

    def test_cache_from_environment(self, runner, monkeypatch, tmp_path):
        """Should default to the cache named by KYPHERHOUND_CACHE."""
        monkeypatch.setenv("KYPHERHOUND_CACHE", str(tmp_path / "env-cache"))
        (tmp_path / "env-cache").mkdir()
        result = runner.invoke(cli, ["graphs"])
        assert "No graphs cached yet." in result.output
        assert (tmp_path / "env-cache" / "graph-cache.sqlite3").exists()


class TestGenerateCommand:
    """Tests for 'generate' command."""

    def test_generate(self, runner, tmp_path):
        """Should write every corpus file."""
        out = tmp_path / "corpus"
        result = runner.invoke(cli, ["generate", str(out), "--persons", "20", "--seed", "7"])
        assert result.exit_code == 0, result.output
        assert "Generated 7 files in" in result.output
        assert sorted(p.name for p in out.iterdir())[:3] == ["external_ids.tsv", "infobox.tsv", "items.tsv"]

    def test_compress(self, runner, tmp_path):
        """Should write .tsv.gz files with --compress."""
        out = tmp_path / "corpus"
        assert runner.invoke(cli, ["generate", str(out), "--compress"]).exit_code == 0
        assert (out / "p31.tsv.gz").exists()

    def test_bad_fraction(self, runner, tmp_path):
        """Should exit 1 for a fraction outside [0, 1]."""
        result = runner.invoke(cli, ["generate", str(tmp_path), "--identifier-coverage", "2"])
        assert result.exit_code == 1

    def test_bad_preset(self, runner, tmp_path):
        """Should exit 1 for an unknown preset."""
        assert runner.invoke(cli, ["generate", str(tmp_path), "--preset", "huge"]).exit_code == 1


class TestClosureCommand:
    """Tests for 'closure' command."""

    def test_default_output(self, runner, make_graph, graph_dir):
        """Should write p279star.tsv next to the input."""
        p279 = make_graph("p279", [("A", "P279", "B")])
        result = runner.invoke(cli, ["closure", str(p279)])
        assert result.exit_code == 0
        assert "Wrote" in result.output
        assert (graph_dir / "p279star.tsv").read_text() == (
            "node1\tlabel\tnode2\nA\tP279star\tA\nA\tP279star\tB\nB\tP279star\tB\n"
        )

    def test_cycle(self, runner, make_graph, tmp_path):
        """Should exit 2 for a cyclic hierarchy."""
        p279 = make_graph("p279", [("A", "P279", "B"), ("B", "P279", "A")])
        result = runner.invoke(cli, ["closure", str(p279), "-o", str(tmp_path / "star.tsv")])
        assert result.exit_code == 2
        assert "cycle" in result.output


class TestOracleCommand:
    """Tests for 'oracle' command."""

    def test_matches_query(self, runner, query_args):
        """Should print what the engine prints."""
        args = query_args()
        oracle_args = ["oracle", *args[1 : args.index("--cache")]]
        result = runner.invoke(cli, oracle_args)
        assert result.exit_code == 0, result.output
        assert result.output == EXPECTED

    def test_missing_input(self, runner, tmp_path):
        """Should exit 3 for a missing file."""
        result = runner.invoke(cli, ["oracle", "-i", str(tmp_path / "nope.tsv"), "--match", "(a)-[]->(b)"])
        assert result.exit_code == 3


class TestChaining:
    """Tests for feeding one query's output into another."""

    def test_class_count_feeds_film_query(self, runner, tiny_corpus, tmp_path):
        """Should read the class counts written by the previous query."""
        cache_path, out = tmp_path / "cache.sqlite3", tmp_path / "results"
        for name in ("Class instances", "Film instances"):
            usecase = next(u for u in USECASES if u.name == name)
            result = runner.invoke(cli, usecase.argv(tiny_corpus, cache_path, out))
            assert result.exit_code == 0, result.output

        _, counts = read_result(out / "class.count.tsv.gz")
        assert {row[2] for row in counts} == {Symbol("entity_count")}
        columns, rows = read_result(out / "film-classes.tsv")
        assert columns == ("node1", "node1;label", "node2")
        assert 0 < len(rows) <= 10
        counts = [row[2].value for row in rows]
        assert counts == sorted(counts, reverse=True)


class TestRun:
    """Tests for the in-process entry point."""

    def test_returns_exit_code(self, cache_path, tmp_path):
        """Should return codes instead of exiting."""
        assert run(["graphs", "--cache", str(cache_path)]) == 0
        assert run(["query", "-i", str(tmp_path / "nope.tsv"), "--match", "(a)-[]->(b)"]) == 3
        assert run(["query", "--match", "(a)-[]->(b)"]) == 1

    def test_writes_result_file(self, graph_dir, cache_path, tiny_graphs, tmp_path):
        """Should write results when run in-process."""
        out = tmp_path / "p31.tsv"
        args = ["query", "-i", "p31", "--match", "p31: (a)-[]->(c)", "--return", "a", "--order-by", "a"]
        code = run(args + ["--graph-dir", str(graph_dir), "--cache", str(cache_path), "-o", str(out)])
        assert code == 0
        assert out.read_text() == "a\na\nb\n"
