"""Tests for kypherhound.query package."""

from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kypherhound.errors import KypherSemanticError, KypherSyntaxError, UnboundVariableError
from kypherhound.harness.usecases import USECASES
from kypherhound.model.values import LangString, Number, String, Symbol
from kypherhound.query.ast import (
    BoolOp,
    Call,
    Comparison,
    Direction,
    InputSpec,
    Literal,
    NodePattern,
    Not,
    RelationPattern,
    Star,
    TypeName,
    Variable,
)
from kypherhound.query.parser import assemble_query, parse_expression, parse_match, parse_order, parse_return
from kypherhound.query.printer import print_expression, print_match, print_order, print_return

FIG1_MATCH = """
    p31: (person)-[:P31]->(:Q5), # Q5 is person
    items: (person)-[:P735]->(given_name), # P735 is first name
    labels: (given_name)-[:label]->(given_name_label)"""
FIG1_RETURN = """distinct given_name as node1, count(given_name) as node2,
given_name_label as `node1;label`, "count_names" as label"""
FIG1_INPUTS = [("items", None), ("p31", None), ("labels", None)]


class TestParseMatch:
    """Tests for parse_match."""

    def test_first_names_pattern(self):
        """Should parse three prefixed clauses sharing a variable."""
        clauses = parse_match(FIG1_MATCH)
        assert [c.graph for c in clauses] == ["p31", "items", "labels"]
        assert clauses[0].nodes == (NodePattern("person"), NodePattern(None, Symbol("Q5")))
        assert clauses[0].relations == (RelationPattern(None, Symbol("P31"), Direction.FORWARD),)
        assert clauses[1].nodes[0].variable == "person"

    def test_anonymous_relation_and_node(self):
        """Should accept empty brackets and parentheses."""
        (clause,) = parse_match("ulan: (ulan_id)-[]->()")
        assert clause.graph == "ulan"
        assert clause.nodes == (NodePattern("ulan_id"), NodePattern())
        assert clause.relations == (RelationPattern(),)

    def test_backward_chain(self):
        """Should keep both directions of a chain."""
        (clause,) = parse_match("external_ids: (viaf_id)<-[:P214]-(artist)-[:P245]->(ulan_id)")
        assert [n.variable for n in clause.nodes] == ["viaf_id", "artist", "ulan_id"]
        assert [r.direction for r in clause.relations] == [Direction.BACKWARD, Direction.FORWARD]

    def test_quoted_label(self):
        """Should read backquoted labels as symbols and quoted ones as strings."""
        (clause,) = parse_match('infobox: (a)-[:`property:spouse`]->(b)-[:"entity_count"]->(c)')
        assert clause.relations[0].label == Symbol("property:spouse")
        assert clause.relations[1].label == String("entity_count")

    def test_relation_variable(self):
        """Should bind a variable on the relation."""
        (clause,) = parse_match("(a)-[r:P31]->(b)")
        assert clause.relations[0] == RelationPattern("r", Symbol("P31"))

    def test_prefix_inherited(self):
        """Should give unprefixed clauses the graph of the clause before."""
        clauses = parse_match("p31: (a)-[:P31]->(b), (b)-[:P279]->(c)")
        assert [c.graph for c in clauses] == ["p31", "p31"]

    def test_leading_clause_unprefixed(self):
        """Should leave the graph of a leading unprefixed clause open."""
        assert parse_match("(a)-[:P31]->(b)")[0].graph is None

    def test_lone_node(self):
        """Should accept a clause that is just a node."""
        (clause,) = parse_match("ulan: (x)")
        assert clause.relations == ()

    @pytest.mark.parametrize("text", ["(a)-[:P50]->", "(a)-[:P50]-(b)", "p31: ", "(a)->(b)"])
    def test_syntax_errors(self, text):
        """Should reject dangling or malformed arrows."""
        with pytest.raises(KypherSyntaxError):
            parse_match(text)

    @given(st.lists(st.text("# abcQ5:()-[]>", max_size=15), min_size=3, max_size=3))
    def test_comments_do_not_change_tokens(self, comments):
        """Should ignore text after # up to the end of a line."""
        lines = FIG1_MATCH.strip().split("\n")
        commented = "\n".join(
            line.split("#")[0] + "#" + comment for line, comment in zip(lines, comments, strict=True)
        )
        assert parse_match(commented) == parse_match(FIG1_MATCH)


class TestParseExpression:
    """Tests for parse_expression."""

    def test_comparison(self):
        """Should parse a comparison of two variables."""
        expected = Comparison(">", Variable("author1"), Variable("author2"))
        assert parse_expression("author1 > author2") == expected

    def test_cast(self):
        """Should parse a cast with its type name."""
        expected = Call("cast", (Variable("count"), TypeName("integer")))
        assert parse_expression("cast(count, integer)") == expected
        assert parse_expression("CAST(count, Integer)") == expected

    def test_unbalanced(self):
        """Should report a missing parenthesis."""
        with pytest.raises(KypherSyntaxError):
            parse_expression("a > (b")

    def test_precedence(self):
        """Should bind and tighter than or."""
        assert parse_expression("a or b and c") == BoolOp(
            "or", Variable("a"), BoolOp("and", Variable("b"), Variable("c"))
        )

    def test_not_binds_tighter_than_comparison(self):
        """Should apply not to the left operand only."""
        assert parse_expression("not a = b") == Comparison("=", Not(Variable("a")), Variable("b"))

    def test_literals(self):
        """Should read every literal form."""
        assert parse_expression('"x"') == Literal(String("x"))
        assert parse_expression("'x'") == Literal(String("x"))
        assert parse_expression("'x'@en") == Literal(LangString("x", "en"))
        assert parse_expression("-2.5") == Literal(Number(Decimal("-2.5")))

    def test_not_equal_spellings(self):
        """Should treat <> as !=."""
        assert parse_expression("a <> b") == parse_expression("a != b")

    def test_keywords_case_insensitive(self):
        """Should accept upper-case keywords."""
        assert parse_expression("a AND NOT b") == BoolOp("and", Variable("a"), Not(Variable("b")))

    def test_count_rejected_in_filters(self):
        """Should reject aggregates outside return and order-by."""
        with pytest.raises(KypherSemanticError):
            parse_expression("count(x) > 1")

    @pytest.mark.parametrize(
        "text",
        ["cast(x, date)", "cast(x)", "lower(x)", "count(distinct *)", "count(a, b)", "cast(*, integer)"],
    )
    def test_bad_calls(self, text):
        """Should reject unknown functions and bad arguments."""
        with pytest.raises(KypherSemanticError):
            parse_expression(text, allow_aggregates=True)


names = st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True)
literals = st.one_of(
    st.integers(-1000, 1000).map(Number),
    st.decimals("-100", "100", places=2).map(Number),
    st.text("ab \"'\\\t#", max_size=5).map(String),
    st.text("ab \"'\\#", max_size=5).map(lambda t: LangString(t, "en")),
).map(Literal)
expressions = st.recursive(
    st.one_of(names.map(Variable), literals),
    lambda inner: st.one_of(
        st.builds(Comparison, st.sampled_from(["<", "<=", ">", ">=", "=", "!="]), inner, inner),
        st.builds(BoolOp, st.sampled_from(["and", "or"]), inner, inner),
        st.builds(Not, inner),
        st.builds(lambda e, t: Call("cast", (e, TypeName(t))), inner, st.sampled_from(["integer", "string"])),
    ),
    max_leaves=8,
)


class TestPrinter:
    """Tests for the syntax-tree printer."""

    @given(expressions)
    def test_expression_round_trip(self, expr):
        """Should print expressions that parse back to the same tree."""
        assert parse_expression(print_expression(expr)) == expr

    @pytest.mark.parametrize("usecase", USECASES, ids=lambda u: u.name)
    def test_match_round_trip(self, usecase):
        """Should print every use-case pattern back to an equal pattern."""
        clauses = parse_match(usecase.match)
        assert parse_match(print_match(clauses)) == clauses

    def test_return_and_order_round_trip(self):
        """Should print return lists and order keys that parse back."""
        returns = parse_return(FIG1_RETURN)
        assert parse_return(print_return(returns)) == returns
        keys = parse_order("cast(count, integer) desc, node1")
        assert parse_order(print_order(keys)) == keys

    def test_keyword_variable_quoted(self):
        """Should backquote names that collide with keywords."""
        assert print_expression(Variable("desc")) == "`desc`"
        assert parse_expression("`desc`") == Variable("desc")


class TestParseReturn:
    """Tests for parse_return and parse_order."""

    def test_first_names_return(self):
        """Should read the distinct flag, four items and their aliases."""
        returns = parse_return(FIG1_RETURN)
        assert returns.distinct
        assert returns.aliases == ("node1", "node2", "node1;label", "label")
        assert returns.items[1].expression == Call("count", (Variable("given_name"),))
        assert returns.items[3].expression == Literal(Symbol("count_names"))
        assert returns.has_aggregates

    def test_constant_columns(self):
        """Should write identifier constants as symbols and keep other text quoted."""
        returns = parse_return('"P26" as label, "two words" as note, "42" as n, x')
        assert returns.items[0].expression == Literal(Symbol("P26"))
        assert returns.items[1].expression == Literal(String("two words"))
        assert returns.items[2].expression == Literal(String("42"))
        assert print_return(returns) == '"P26" as label, "two words" as note, "42" as n, x as x'
        assert parse_return(print_return(returns)) == returns

    def test_unquoted_qualifier_alias(self):
        """Should accept aliases with semicolons without backquotes."""
        returns = parse_return("viaf_id as node1;P214, artist_label as node1;label")
        assert returns.aliases == ("node1;P214", "node1;label")

    def test_duplicate_alias(self):
        """Should reject two items with the same alias."""
        with pytest.raises(KypherSemanticError, match="duplicate"):
            parse_return("x as a, y as a")

    def test_default_alias(self):
        """Should name items after their variable or their text."""
        returns = parse_return("x, cast(y, integer)")
        assert returns.aliases == ("x", "cast(y, integer)")

    def test_count_variants(self):
        """Should parse count(*) and count(distinct x)."""
        returns = parse_return("count(*) as n, count(distinct pub) as m")
        assert returns.items[0].expression == Call("count", (Star(),))
        assert returns.items[1].expression == Call("count", (Variable("pub"),), distinct=True)

    def test_order_directions(self):
        """Should read asc, desc and their long forms."""
        keys = parse_order("node2 desc, node1, x ASCENDING, y descending")
        assert [k.descending for k in keys] == [True, False, False, True]


class TestAssembleQuery:
    """Tests for assemble_query."""

    def test_first_names_query(self):
        """Should combine every fragment of the first-names query."""
        spec = assemble_query(FIG1_INPUTS, FIG1_MATCH, return_text=FIG1_RETURN, order_text="node2 desc")
        assert [c.graph for c in spec.match] == ["p31", "items", "labels"]
        assert spec.returns.distinct
        assert len(spec.returns.items) == 4
        assert spec.order_by[0].expression == Variable("node2")
        assert spec.order_by[0].descending

    def test_spouse_query(self):
        """Should keep optional clauses apart from mandatory ones."""
        usecase = next(u for u in USECASES if u.name == "DBpedia spouses")
        spec = assemble_query(usecase.inputs, usecase.match, usecase.opts, return_text=usecase.returns)
        assert len(spec.match) == 2
        assert len(spec.optionals) == 1
        assert spec.optionals[0].clauses[0].graph == "labels"

    def test_optional_clause_inherits_previous_graph(self):
        """Should give an unprefixed optional clause the graph of the clause before it."""
        inputs = [("g", None), ("h", None)]
        spec = assemble_query(inputs, "g: (x)-[]->(y), h: (y)-[]->(z)", ["(z)-[]->(w)", "(w)-[]->(v)"])
        assert [c.graph for c in spec.match] == ["g", "h"]
        assert [group.clauses[0].graph for group in spec.optionals] == ["h", "h"]

    def test_unprefixed_query_uses_first_input(self):
        """Should default every clause to the first input when none is prefixed."""
        spec = assemble_query([("g", None), ("h", None)], "(x)-[]->(y)", ["(y)-[]->(z)"])
        assert spec.match[0].graph == "g"
        assert spec.optionals[0].clauses[0].graph == "g"

    def test_unbound_variable(self):
        """Should name an unbound variable in the where clause."""
        with pytest.raises(UnboundVariableError, match="personn"):
            assemble_query(FIG1_INPUTS, FIG1_MATCH, where_text="personn = given_name")

    def test_unbound_in_return(self):
        """Should check return items too."""
        with pytest.raises(UnboundVariableError):
            assemble_query(FIG1_INPUTS, FIG1_MATCH, return_text="nobody")

    def test_order_by_unknown_name(self):
        """Should reject order keys that are neither variables nor aliases."""
        with pytest.raises(UnboundVariableError):
            assemble_query(FIG1_INPUTS, FIG1_MATCH, return_text=FIG1_RETURN, order_text="nope")

    def test_first_clause_defaults_to_first_input(self):
        """Should put unprefixed leading clauses on the first input."""
        spec = assemble_query([("data/p31.tsv.gz", None), ("labels", None)], "(x)-[:P31]->(y)")
        assert spec.match[0].graph == "p31"

    def test_opt_defaults_to_first_input(self):
        """Should put unprefixed optional clauses on the first input."""
        spec = assemble_query(
            [InputSpec("p31"), InputSpec("labels")],
            "labels: (x)-[:label]->(l)",
            ["(x)-[:P31]->(c)"],
        )
        assert spec.optionals[0].clauses[0].graph == "p31"

    def test_alias_names_graph(self):
        """Should use --as names for graph prefixes."""
        spec = assemble_query([("out/class.count.tsv.gz", "count")], "(c)-[]->(n)")
        assert spec.inputs[0].name == "count"
        assert spec.match[0].graph == "count"

    def test_owhere_sees_optional_variables(self):
        """Should bind optional variables for the optional condition."""
        spec = assemble_query(
            FIG1_INPUTS,
            "p31: (x)-[:P31]->(y)",
            ["labels: (x)-[:label]->(l)"],
            opt_where_texts=['cast(l, string) != "Unknown"'],
        )
        assert spec.optionals[0].where is not None

    def test_owhere_without_opt(self):
        """Should reject a condition with no optional group."""
        with pytest.raises(KypherSemanticError):
            assemble_query(FIG1_INPUTS, "p31: (x)-[:P31]->(y)", [], opt_where_texts=["x = y"])

    def test_default_return(self):
        """Should return every bound variable in order of appearance."""
        spec = assemble_query(FIG1_INPUTS, FIG1_MATCH)
        assert spec.returns.aliases == ("person", "given_name", "given_name_label")

    def test_no_variables_needs_return(self):
        """Should require a return clause when nothing is bound."""
        with pytest.raises(KypherSemanticError):
            assemble_query(FIG1_INPUTS, "p31: ()-[:P31]->(:Q5)")

    def test_count_order_needs_aggregation(self):
        """Should reject count in order-by of a plain query."""
        with pytest.raises(KypherSemanticError):
            assemble_query(FIG1_INPUTS, FIG1_MATCH, return_text="person", order_text="count(person)")

    def test_empty_match(self):
        """Should reject a blank pattern."""
        with pytest.raises(KypherSyntaxError):
            assemble_query(FIG1_INPUTS, "   ")

    @pytest.mark.parametrize("usecase", USECASES, ids=lambda u: u.name)
    def test_usecases_parse(self, usecase):
        """Should parse each use-case query as written."""
        spec = assemble_query(
            usecase.inputs,
            usecase.match,
            usecase.opts,
            where_text=usecase.where,
            return_text=usecase.returns,
            order_text=usecase.order_by,
            limit=usecase.limit,
        )
        assert spec.returns.aliases[0] == "node1"
