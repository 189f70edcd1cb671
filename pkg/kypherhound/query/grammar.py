"""Lark grammar for the Kypher subset.

One grammar serves every query fragment; each CLI flag is parsed from its own
start rule (``match_text`` for --match/--opt, ``expression_text`` for
--where/--owhere, ``return_text`` and ``order_text``).
"""

KYPHER_GRAMMAR = r"""
    // --match / --opt
    match_text: clause ("," clause)*
    clause: graph_prefix? chain
    graph_prefix: (NAME | QUOTED_NAME) ":"
    chain: node (relation node)*
    node: "(" [variable] [":" anchor] ")"
    relation: "-" [rel_body] "->"      -> forward_relation
            | "<-" [rel_body] "-"      -> backward_relation
    rel_body: "[" [variable] [":" anchor] "]"
    anchor: NAME                       -> name_anchor
          | QUOTED_NAME                -> quoted_anchor
          | literal

    // --where / --owhere
    expression_text: expression
    ?expression: or_expr
    ?or_expr: and_expr (_OR and_expr)*
    ?and_expr: comparison (_AND comparison)*
    ?comparison: unary (COMP_OP unary)?
    ?unary: _NOT unary                 -> not_expr
          | atom
    ?atom: literal
         | call
         | variable
         | "(" expression ")"
    call: NAME "(" [DISTINCT] [call_args] ")"
    call_args: call_arg ("," call_arg)*
    ?call_arg: expression
             | "*"                     -> star
    variable: NAME | QUOTED_NAME
    literal: STRING                    -> string_literal
           | LANG_STRING               -> lang_literal
           | SQ_STRING                 -> sq_literal
           | NUMBER                    -> number_literal

    // --return
    return_text: [DISTINCT] return_item ("," return_item)*
    return_item: expression [_AS alias]
    alias: ALIAS | QUOTED_NAME

    // --order-by
    order_text: order_key ("," order_key)*
    order_key: expression [DIRECTION]

    // Keywords are case-insensitive and must end at a word boundary.
    DISTINCT.2: /distinct\b/i
    DIRECTION.2: /(asc|desc)(ending)?\b/i
    _AS.2: /as\b/i
    _AND.2: /and\b/i
    _OR.2: /or\b/i
    _NOT.2: /not\b/i

    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    QUOTED_NAME: /`(?:[^`\n]|``)+`/
    ALIAS: /[A-Za-z_][A-Za-z0-9_;:\-]*/
    STRING: /"(?:[^"\\\n]|\\.)*"/
    LANG_STRING.3: /'(?:[^'\\\n]|\\.)*'@[A-Za-z]{1,8}(?:-[A-Za-z0-9]{1,8})*/
    SQ_STRING: /'(?:[^'\\\n]|\\.)*'/
    NUMBER: /[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?/
    COMP_OP: "<=" | ">=" | "!=" | "<>" | "=" | "<" | ">"

    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

START_RULES = ["match_text", "expression_text", "return_text", "order_text"]

KEYWORDS = frozenset({"distinct", "as", "and", "or", "not", "asc", "ascending", "desc", "descending"})
