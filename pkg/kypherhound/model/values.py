"""Typed KGTK cell values and their surface forms.

Surface forms recognised in a TSV cell:

    ''             Empty
    'text'@tag     LangString
    "text"         String
    123, -4.5e3    Number
    anything else  Symbol

Inside quoted literals a backslash escapes the delimiter quote, the other
quote, the backslash itself and the control characters t, n and r.
"""

import re
from dataclasses import dataclass
from decimal import MAX_EMAX, MIN_EMIN, Context, Decimal, InvalidOperation
from enum import IntEnum

from kypherhound.errors import ValueParseError

NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
LANG_TAG_RE = re.compile(r"[A-Za-z]{1,8}(?:-[A-Za-z0-9]{1,8})*")
_SYMBOL_SHAPE_RE = re.compile(r"[^\s'\"]\S*")

_UNESCAPE = {"\\": "\\", "'": "'", '"': '"', "t": "\t", "n": "\n", "r": "\r"}
_ESCAPE_BASE = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}


@dataclass(frozen=True, slots=True)
class Symbol:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueParseError("symbol text must not be empty", self.text)
        if "\t" in self.text or "\n" in self.text or "\r" in self.text:
            raise ValueParseError("symbol text contains a tab or line break", self.text)
        if self.text[0] in "'\"" or NUMBER_RE.fullmatch(self.text):
            raise ValueParseError("symbol text would read back as a literal", self.text)


@dataclass(frozen=True, slots=True)
class String:
    text: str


@dataclass(frozen=True, slots=True)
class LangString:
    text: str
    lang: str

    def __post_init__(self):
        if not LANG_TAG_RE.fullmatch(self.lang):
            raise ValueParseError("bad language tag", self.lang)


@dataclass(frozen=True, slots=True)
class Number:
    value: Decimal

    def __post_init__(self):
        if not isinstance(self.value, Decimal):
            object.__setattr__(self, "value", Decimal(str(self.value)))
        if not self.value.is_finite():
            raise ValueParseError("number must be finite", str(self.value))


class _Empty:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Empty, ())


EMPTY = _Empty()

KgtkValue = Symbol | String | LangString | Number | _Empty
TEXT_TYPES = (Symbol, String, LangString)


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def unescape(body: str, cell: str) -> str:
    if "\\" not in body:
        return body
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body) or body[i + 1] not in _UNESCAPE:
                raise ValueParseError("bad escape sequence in literal", cell)
            out.append(_UNESCAPE[body[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _escape(text: str, quote: str) -> str:
    return "".join(_ESCAPE_BASE.get(ch) or ("\\" + ch if ch == quote else ch) for ch in text)


def _ends_unescaped(body: str) -> bool:
    """True unless the text ends in an odd run of backslashes."""
    run = len(body) - len(body.rstrip("\\"))
    return run % 2 == 0


def parse_string_literal(cell: str) -> String:
    if len(cell) < 2 or not cell.endswith('"') or not _ends_unescaped(cell[1:-1]):
        raise ValueParseError("unterminated string literal", cell)
    return String(unescape(cell[1:-1], cell))


def parse_lang_literal(cell: str) -> LangString:
    split = cell.rfind("'@")
    if split < 1:
        raise ValueParseError("language string without a language tag", cell)
    body, lang = cell[1:split], cell[split + 2 :]
    if not LANG_TAG_RE.fullmatch(lang):
        raise ValueParseError("bad language tag", cell)
    if not _ends_unescaped(body):
        raise ValueParseError("unterminated language string", cell)
    return LangString(unescape(body, cell), lang)


def parse_number(text: str) -> Number:
    try:
        return Number(Decimal(text))
    except InvalidOperation as e:
        raise ValueParseError("malformed number", text) from e


def parse_value(text: str) -> KgtkValue:
    """Classify a TSV cell by its surface form.

    Args:
        text: A single cell, without tabs or line breaks.

    Returns:
        The typed value.

    Raises:
        ValueParseError: For unterminated quotes or a malformed language tag.
    """
    if not text:
        return EMPTY
    head = text[0]
    if head == "'":
        return parse_lang_literal(text)
    if head == '"':
        return parse_string_literal(text)
    if NUMBER_RE.fullmatch(text):
        return parse_number(text)
    if "\t" in text or "\n" in text:
        raise ValueParseError("cell contains a tab or line break", text)
    return Symbol(text)


def format_value(v: KgtkValue) -> str:
    if v is EMPTY:
        return ""
    if isinstance(v, Symbol):
        return v.text
    if isinstance(v, Number):
        return format_number(v.value)
    if isinstance(v, String):
        return '"' + _escape(v.text, '"') + '"'
    if isinstance(v, LangString):
        return "'" + _escape(v.text, "'") + "'@" + v.lang
    raise TypeError(f"not a KGTK value: {v!r}")


def format_number(value: Decimal) -> str:
    if value == value.to_integral_value() and abs(value) < Decimal(10) ** 30:
        return str(int(value))
    # a context as wide as the value keeps normalize from rounding
    exact = Context(prec=max(len(value.as_tuple().digits), 1), Emax=MAX_EMAX, Emin=MIN_EMIN)
    return str(value.normalize(exact))


def surface_text(v: KgtkValue) -> str:
    """The text a comparison or cast sees: literal content for strings, the symbol otherwise."""
    if isinstance(v, (String, LangString, Symbol)):
        return v.text
    return format_value(v)


def sort_key(v: KgtkValue) -> tuple:
    """Key realising the total value order: Empty, then Numbers, then text."""
    if v is EMPTY:
        return (0,)
    if isinstance(v, Number):
        return (1, v.value)
    return (2, format_value(v))


def compare_values(a: KgtkValue, b: KgtkValue) -> Ordering:
    ka, kb = sort_key(a), sort_key(b)
    if ka < kb:
        return Ordering.LESS
    if ka > kb:
        return Ordering.GREATER
    return Ordering.EQUAL


def symbol_shaped(v: KgtkValue) -> KgtkValue:
    """A String whose text is a bare identifier (``count_names``, ``P26``) as that Symbol.

    Anything else, including Strings with whitespace or a leading quote or
    that read as a number, is returned unchanged.
    """
    if not isinstance(v, String) or not _SYMBOL_SHAPE_RE.fullmatch(v.text) or NUMBER_RE.fullmatch(v.text):
        return v
    return Symbol(v.text)


def is_true(v: KgtkValue) -> bool:
    """Truthiness used by filters: only a nonzero Number counts as true."""
    return isinstance(v, Number) and v.value != 0


TRUE = Number(Decimal(1))
FALSE = Number(Decimal(0))
