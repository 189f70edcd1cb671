"""Tests for kypherhound.executor package."""

from decimal import Decimal

import pytest

from kypherhound.cache.store import import_graph
from kypherhound.errors import ExecutionError
from kypherhound.executor import cast_value, choose_join_strategy, evaluate, execute
from kypherhound.executor.operators import ExecutionContext
from kypherhound.model.values import EMPTY, FALSE, TRUE, LangString, Number, String, Symbol, format_value
from kypherhound.planner import Join, Scan, bind_graphs, compile_plan
from kypherhound.query.parser import assemble_query, parse_expression
from tests.test_planner import plan_for

FIRST_NAMES_MATCH = (
    "p31: (person)-[:P31]->(:Q5), items: (person)-[:P735]->(name), labels: (name)-[:label]->(nl)"
)
FIRST_NAMES_RETURN = (
    'distinct name as node1, count(name) as node2, nl as `node1;label`, "count_names" as label'
)
SPOUSE_MATCH = "infobox: (artist)-[:`property:spouse`]->(spouse), p31: (spouse)-[]->(:Q5)"
SPOUSE_OPT = "labels: (spouse)-[:label]->(spouse_label)"
SPOUSE_RETURN = 'artist as node1, "P26" as label, spouse as node2, spouse_label as `node2;label`'


def run(cache, graph_dir, names, match, opts=(), *, join_strategy=None, pushdown=True, **kwargs):
    """Import ``names`` from graph_dir, run the query and return header and cell texts."""
    for name in names:
        import_graph(cache, graph_dir / f"{name}.tsv")
    spec = assemble_query([(name, None) for name in names], match, opts, **kwargs)
    plan = compile_plan(bind_graphs(spec, cache), pushdown=pushdown)
    schema, rows = execute(plan, cache, join_strategy)
    return schema.columns, [tuple(format_value(v) for v in row) for row in rows]


@pytest.fixture
def spouse_graphs(make_graph):
    make_graph("infobox", [("A", "property:spouse", "S1"), ("B", "property:spouse", "S2")])
    make_graph("p31", [("S1", "P31", "Q5"), ("S2", "P31", "Q5")])
    make_graph("labels", [("S1", "label", "'Sue'@en"), ("S3", "label", "'Ann'@en")])


class TestExecute:
    """Tests for execute."""

    @pytest.mark.usefixtures("tiny_graphs")
    def test_first_names(self, cache, graph_dir):
        """Should count the one person with a first name."""
        columns, rows = run(
            cache, graph_dir, ["p31", "items", "labels"], FIRST_NAMES_MATCH, return_text=FIRST_NAMES_RETURN
        )
        assert columns == ("node1", "node2", "node1;label", "label")
        assert rows == [("n1", "1", "'John'@en", "count_names")]

    @pytest.mark.usefixtures("tiny_graphs")
    @pytest.mark.parametrize("strategy", ["hash", "index"])
    def test_join_strategies_agree(self, cache, graph_dir, strategy):
        """Should give the same rows whichever join strategy is forced."""
        _, rows = run(
            cache,
            graph_dir,
            ["p31", "items", "labels"],
            FIRST_NAMES_MATCH,
            join_strategy=strategy,
            return_text="person, name, nl",
        )
        assert rows == [("a", "n1", "'John'@en")]

    @pytest.mark.usefixtures("tiny_graphs")
    def test_without_pushdown(self, cache, graph_dir):
        """Should give the same answer with anchors evaluated as filters."""
        _, rows = run(
            cache,
            graph_dir,
            ["p31", "items", "labels"],
            FIRST_NAMES_MATCH,
            pushdown=False,
            return_text=FIRST_NAMES_RETURN,
        )
        assert rows == [("n1", "1", "'John'@en", "count_names")]

    def test_empty_graph_gives_header_only(self, cache, graph_dir, make_graph):
        """Should produce no groups when the input is empty."""
        make_graph("p31", [])
        make_graph("items", [("a", "P735", "n1")])
        make_graph("labels", [("n1", "label", "'John'@en")])
        columns, rows = run(
            cache, graph_dir, ["p31", "items", "labels"], FIRST_NAMES_MATCH, return_text=FIRST_NAMES_RETURN
        )
        assert columns == ("node1", "node2", "node1;label", "label")
        assert rows == []

    def test_ungrouped_count_of_nothing(self, cache, graph_dir, make_graph):
        """Should return no row for a bare count over no matches."""
        make_graph("g", [("a", "P1", "b")])
        columns, rows = run(cache, graph_dir, ["g"], "g: (x)-[:P2]->(y)", return_text="count(x) as n")
        assert columns == ("n",)
        assert rows == []

    @pytest.mark.usefixtures("spouse_graphs")
    def test_optional_match_pads_with_empty(self, cache, graph_dir):
        """Should keep spouses without a label and leave the label cell empty."""
        columns, rows = run(
            cache,
            graph_dir,
            ["infobox", "p31", "labels"],
            SPOUSE_MATCH,
            [SPOUSE_OPT],
            return_text=SPOUSE_RETURN,
        )
        assert columns == ("node1", "label", "node2", "node2;label")
        assert sorted(rows) == [("A", "P26", "S1", "'Sue'@en"), ("B", "P26", "S2", "")]

    @pytest.mark.usefixtures("spouse_graphs")
    def test_optional_where_only_limits_the_match(self, cache, graph_dir):
        """Should pad rows whose optional match fails its own condition."""
        _, rows = run(
            cache,
            graph_dir,
            ["infobox", "p31", "labels"],
            SPOUSE_MATCH,
            [SPOUSE_OPT],
            return_text=SPOUSE_RETURN,
            opt_where_texts=["spouse_label != 'Sue'@en"],
        )
        assert sorted(rows) == [("A", "P26", "S1", ""), ("B", "P26", "S2", "")]

    @pytest.mark.parametrize("strategy", ["hash", "index"])
    def test_empty_never_joins(self, cache, graph_dir, make_graph, strategy):
        """Should not match two empty cells to each other."""
        make_graph("g", [("a", "P1", "")])
        make_graph("h", [("b", "P2", "")])
        _, rows = run(
            cache, graph_dir, ["g", "h"], "g: (x)-[:P1]->(v), h: (y)-[:P2]->(v)", join_strategy=strategy
        )
        assert rows == []

    def test_where_compares_text_order(self, cache, graph_dir, make_graph):
        """Should keep one ordered pair of coauthors per publication."""
        make_graph("items", [("pub", "P50", "Q10"), ("pub", "P50", "Q9")])
        _, rows = run(
            cache,
            graph_dir,
            ["items"],
            "items: (pub)-[:P50]->(author1), items: (pub)-[:P50]->(author2)",
            where_text="author1 > author2",
            return_text="author1, author2",
        )
        assert rows == [("Q9", "Q10")]

    def test_count_and_count_distinct(self, cache, graph_dir, make_graph):
        """Should count duplicates unless asked for distinct values."""
        make_graph("items", [("p1", "P50", "a1"), ("p1", "P50", "a1"), ("p2", "P50", "a1")])
        _, rows = run(
            cache,
            graph_dir,
            ["items"],
            "items: (p)-[:P50]->(a)",
            return_text="a, count(p) as n, count(distinct p) as d, count(*) as s",
        )
        assert rows == [("a1", "3", "2", "3")]

    def test_sort_then_limit(self, cache, graph_dir, make_graph):
        """Should sort numbers by value, break ties on the next key and cut after sorting."""
        make_graph("g", [("x1", "n", "9"), ("x2", "n", "10"), ("x3", "n", "10"), ("x4", "n", "2")])
        _, rows = run(
            cache, graph_dir, ["g"], "g: (a)-[:n]->(b)", return_text="a, b", order_text="b desc, a", limit=3
        )
        assert rows == [("x2", "10"), ("x3", "10"), ("x1", "9")]

    def test_order_by_cast(self, cache, graph_dir, make_graph):
        """Should order string counts numerically once cast."""
        make_graph("count", [("c1", '"entity_count"', '"9"'), ("c2", '"entity_count"', '"10"')])
        _, rows = run(
            cache,
            graph_dir,
            ["count"],
            'count: (c)-[:"entity_count"]->(n)',
            return_text="c",
            order_text="cast(n, integer) desc",
        )
        assert rows == [("c2",), ("c1",)]

    def test_distinct_rows(self, cache, graph_dir, make_graph):
        """Should drop repeated result rows."""
        make_graph("g", [("a", "P31", "Q5"), ("b", "P31", "Q5")])
        _, rows = run(cache, graph_dir, ["g"], "g: (x)-[:P31]->(c)", return_text="distinct c")
        assert rows == [("Q5",)]

    def test_node_file(self, cache, graph_dir, make_graph):
        """Should scan node lists that only have node1."""
        make_graph("ulan", [('"500"',), ('"501"',)], header=("node1",))
        _, rows = run(cache, graph_dir, ["ulan"], "ulan: (u)-[]->()", return_text="u", order_text="u")
        assert rows == [('"500"',), ('"501"',)]

    def test_self_loop(self, cache, graph_dir, make_graph):
        """Should match a repeated variable only on equal cells."""
        make_graph("g", [("a", "P1", "a"), ("a", "P1", "b")])
        _, rows = run(cache, graph_dir, ["g"], "g: (x)-[:P1]->(x)")
        assert rows == [("a",)]

    def test_unknown_strategy(self, cache):
        """Should reject a join strategy it does not know."""
        plan = plan_for(["g"], "g: (a)-[]->(b)")
        with pytest.raises(ExecutionError, match="join strategy"):
            execute(plan, cache, "merge")

    def test_graph_missing_from_cache(self, cache):
        """Should refuse a plan built for graphs the cache lacks."""
        plan = plan_for(["g"], "g: (a)-[]->(b)")
        with pytest.raises(ExecutionError, match="'g'"):
            execute(plan, cache)


class TestChooseJoinStrategy:
    """Tests for choose_join_strategy."""

    def join(self, left_size, right_size, pairs=(("a", "a"),)):
        left = Scan("g", (("label", Symbol("P1")),), (), (("a", "node1"),), left_size)
        right = Scan("h", (), (), (("a", "node1"), ("b", "node2")), right_size)
        return Join(left, right, pairs)

    def context(self, strategy=None):
        return ExecutionContext(cache=None, conn=None, join_strategy=strategy)

    def test_small_outer_uses_index(self):
        """Should look up a large graph by key when few rows drive the join."""
        assert choose_join_strategy(self.join(10, 10_000), self.context()) == "index"

    def test_large_outer_uses_hash(self):
        """Should hash when the driving side is comparable in size."""
        assert choose_join_strategy(self.join(10_000, 10), self.context()) == "hash"

    def test_override(self):
        """Should follow a forced strategy."""
        assert choose_join_strategy(self.join(10, 10_000), self.context("hash")) == "hash"
        assert choose_join_strategy(self.join(10_000, 10), self.context("index")) == "index"

    def test_cross_product_always_hash(self):
        """Should not use index lookups without join keys."""
        assert choose_join_strategy(self.join(10, 10_000, pairs=()), self.context("index")) == "hash"

    def test_inner_join_tree_uses_hash(self):
        """Should only look up into a scan."""
        inner = self.join(10, 10)
        op = Join(Scan("k", (), (), (("a", "node1"),), 1), inner, (("a", "a"),))
        assert choose_join_strategy(op, self.context("index")) == "hash"


class TestEvaluate:
    """Tests for evaluate and cast_value."""

    def test_symbols_compare_as_text(self):
        """Should compare identifiers by text, not by number."""
        expr = parse_expression("author1 > author2")
        assert evaluate(expr, {"author1": Symbol("Q10"), "author2": Symbol("Q9")}) == FALSE
        assert evaluate(expr, {"author1": Symbol("Q9"), "author2": Symbol("Q10")}) == TRUE

    def test_empty_comparisons_are_false(self):
        """Should make both = and != false against Empty."""
        for text in ("x = y", "x != y", "x < y"):
            assert evaluate(parse_expression(text), {"x": EMPTY, "y": Symbol("Q5")}) == FALSE

    def test_symbol_against_string(self):
        """Should compare a symbol with text once it is cast to a string."""
        row = {"x": Symbol("Q5")}
        assert evaluate(parse_expression('x = "Q5"'), row) == FALSE
        assert evaluate(parse_expression('cast(x, string) = "Q5"'), row) == TRUE

    def test_boolean_operators(self):
        """Should combine conditions with and, or and not."""
        row = {"x": Number(3)}
        assert evaluate(parse_expression("x > 1 and not (x > 5)"), row) == TRUE
        assert evaluate(parse_expression("x > 5 or x < 1"), row) == FALSE

    def test_cast_integer(self):
        """Should convert numeric text and truncate fractions."""
        assert cast_value(String("314889"), "integer") == Number(314889)
        assert cast_value(Number(Decimal("2.7")), "integer") == Number(2)
        assert cast_value(Symbol("Q5"), "integer") is EMPTY

    def test_cast_integer_truncates_without_expanding(self):
        """Should truncate toward zero and keep a huge exponent as written."""
        huge = cast_value(Number(Decimal("1e999999999")), "integer")
        assert huge == Number(Decimal("1e999999999"))
        assert format_value(huge) == "1E+999999999"
        assert cast_value(String("-2.7"), "integer") == Number(-2)
        assert cast_value(String("1e999999999"), "integer") == huge

    def test_cast_failures_are_empty(self):
        """Should yield Empty for values without a number."""
        assert cast_value(LangString("film", "en"), "integer") is EMPTY
        assert cast_value(EMPTY, "string") is EMPTY

    def test_cast_float_and_string(self):
        """Should read exponents and strip literal quoting."""
        assert cast_value(String("1e3"), "float") == Number(1000)
        assert cast_value(LangString("film", "en"), "string") == String("film")

    def test_aggregate_not_per_row(self):
        """Should refuse to evaluate count() on a single row."""
        with pytest.raises(ExecutionError):
            evaluate(parse_expression("count(x)", allow_aggregates=True), {"x": Number(1)})
